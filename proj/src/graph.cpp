#include "rasg/graph.hpp"

#include <cassert>
#include <stdexcept>

namespace rasg::ad {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

int Tape::push(Node&& n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Mat& Tape::grad_of(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.v().rows(), n.v().cols());
  return n.grad;
}

void Tape::acc(int id, const Mat& g) {
  if (!ng(id)) return;
  grad_of(id) += g;
}

Var Tape::input(Mat m) {
  Node n;
  n.op = Op::kInput;
  n.val = std::move(m);
  return make(std::move(n));
}

Var Tape::param(Param& p) {
  for (const auto& [ptr, id] : param_nodes_) {
    if (ptr == &p) return Var{this, id};
  }
  Node n;
  n.op = Op::kParam;
  n.ref = &p.value;
  n.param = &p;
  n.ng = grad_enabled_;
  Var v = make(std::move(n));
  param_nodes_.emplace_back(&p, v.id);
  return v;
}

Var Tape::matmul(Var a, Var b) {
  require(a.val().cols() == b.val().rows(), "matmul: inner dims");
  Node n;
  n.op = Op::kMatMul;
  n.a = a.id;
  n.b = b.id;
  n.ng = ng(a.id) || ng(b.id);
  n.val = a.val() * b.val();
  return make(std::move(n));
}

Var Tape::matmul_ta(Var a, Var b) {
  require(a.val().rows() == b.val().rows(), "matmul_ta: inner dims");
  Node n;
  n.op = Op::kMatMulTA;
  n.a = a.id;
  n.b = b.id;
  n.ng = ng(a.id) || ng(b.id);
  n.val = a.val().transpose() * b.val();
  return make(std::move(n));
}

Var Tape::add(Var a, Var b) {
  require(a.val().rows() == b.val().rows() && a.val().cols() == b.val().cols(), "add: shape");
  Node n;
  n.op = Op::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.ng = ng(a.id) || ng(b.id);
  n.val = a.val() + b.val();
  return make(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  require(a.val().rows() == b.val().rows() && a.val().cols() == b.val().cols(), "sub: shape");
  Node n;
  n.op = Op::kSub;
  n.a = a.id;
  n.b = b.id;
  n.ng = ng(a.id) || ng(b.id);
  n.val = a.val() - b.val();
  return make(std::move(n));
}

Var Tape::add_bias(Var m, Var bias) {
  require(bias.val().cols() == 1 && m.val().rows() == bias.val().rows(), "add_bias: shape");
  Node n;
  n.op = Op::kAddBias;
  n.a = m.id;
  n.b = bias.id;
  n.ng = ng(m.id) || ng(bias.id);
  n.val = m.val().colwise() + Eigen::VectorXd(bias.val().col(0));
  return make(std::move(n));
}

Var Tape::scale(Var a, double c) {
  Node n;
  n.op = Op::kScale;
  n.a = a.id;
  n.x0 = c;
  n.ng = ng(a.id);
  n.val = c * a.val();
  return make(std::move(n));
}

Var Tape::hadamard(Var a, Var b) {
  require(a.val().rows() == b.val().rows() && a.val().cols() == b.val().cols(), "hadamard: shape");
  Node n;
  n.op = Op::kHadamard;
  n.a = a.id;
  n.b = b.id;
  n.ng = ng(a.id) || ng(b.id);
  n.val = a.val().cwiseProduct(b.val());
  return make(std::move(n));
}

Var Tape::tanh(Var a) {
  Node n;
  n.op = Op::kTanh;
  n.a = a.id;
  n.ng = ng(a.id);
  n.val = a.val().array().tanh();
  return make(std::move(n));
}

Var Tape::sigmoid(Var a) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = a.id;
  n.ng = ng(a.id);
  n.val = (1.0 / (1.0 + (-a.val().array()).exp()));
  return make(std::move(n));
}

Var Tape::relu(Var a) {
  Node n;
  n.op = Op::kRelu;
  n.a = a.id;
  n.ng = ng(a.id);
  n.val = a.val().cwiseMax(0.0);
  return make(std::move(n));
}

Var Tape::clamp(Var a, double lo, double hi) {
  Node n;
  n.op = Op::kClamp;
  n.a = a.id;
  n.x0 = lo;
  n.x1 = hi;
  n.ng = ng(a.id);
  n.val = a.val().cwiseMax(lo).cwiseMin(hi);
  return make(std::move(n));
}

Var Tape::log(Var a) {
  Node n;
  n.op = Op::kLog;
  n.a = a.id;
  n.ng = ng(a.id);
  n.val = a.val().array().log();
  return make(std::move(n));
}

Var Tape::softmax_col(Var a) {
  Node n;
  n.op = Op::kSoftmaxCol;
  n.a = a.id;
  n.ng = ng(a.id);
  n.val.resize(a.val().rows(), a.val().cols());
  for (int j = 0; j < a.val().cols(); ++j) {
    const auto col = a.val().col(j);
    const double m = col.maxCoeff();
    Eigen::VectorXd e = (col.array() - m).exp();
    n.val.col(j) = e / e.sum();
  }
  return make(std::move(n));
}

Var Tape::row_max(Var a) {
  Node n;
  n.op = Op::kRowMax;
  n.a = a.id;
  n.ng = ng(a.id);
  const Mat& m = a.val();
  require(m.cols() >= 1, "row_max: empty");
  n.val.resize(m.rows(), 1);
  n.idx.resize(m.rows());
  for (int r = 0; r < m.rows(); ++r) {
    int best = 0;
    double bv = m(r, 0);
    for (int c = 1; c < m.cols(); ++c) {
      if (m(r, c) > bv) {
        bv = m(r, c);
        best = c;
      }
    }
    n.val(r, 0) = bv;
    n.idx[r] = best;
  }
  return make(std::move(n));
}

Var Tape::vstack(Var a, Var b) {
  require(a.val().cols() == b.val().cols(), "vstack: cols");
  Node n;
  n.op = Op::kVStack2;
  n.a = a.id;
  n.b = b.id;
  n.ng = ng(a.id) || ng(b.id);
  n.val.resize(a.val().rows() + b.val().rows(), a.val().cols());
  n.val << a.val(), b.val();
  return make(std::move(n));
}

Var Tape::vstack(Var a, Var b, Var c) {
  require(a.val().cols() == b.val().cols() && b.val().cols() == c.val().cols(), "vstack: cols");
  Node n;
  n.op = Op::kVStack3;
  n.a = a.id;
  n.b = b.id;
  n.c = c.id;
  n.ng = ng(a.id) || ng(b.id) || ng(c.id);
  n.val.resize(a.val().rows() + b.val().rows() + c.val().rows(), a.val().cols());
  n.val << a.val(), b.val(), c.val();
  return make(std::move(n));
}

Var Tape::hstack(const std::vector<Var>& xs) {
  require(!xs.empty(), "hstack: empty");
  Node n;
  n.op = Op::kHStack;
  int cols = 0;
  const int rows = static_cast<int>(xs[0].val().rows());
  for (const Var& x : xs) {
    require(x.val().rows() == rows, "hstack: rows");
    cols += static_cast<int>(x.val().cols());
    n.many.push_back(x.id);
    n.ng = n.ng || ng(x.id);
  }
  n.val.resize(rows, cols);
  int off = 0;
  for (const Var& x : xs) {
    n.val.middleCols(off, x.val().cols()) = x.val();
    off += static_cast<int>(x.val().cols());
  }
  return make(std::move(n));
}

Var Tape::lincomb(const std::vector<Var>& xs, const std::vector<double>& w) {
  require(!xs.empty() && xs.size() == w.size(), "lincomb: arity");
  Node n;
  n.op = Op::kLinComb;
  n.w = w;
  n.val = Mat::Zero(xs[0].val().rows(), xs[0].val().cols());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require(xs[i].val().rows() == n.val.rows() && xs[i].val().cols() == n.val.cols(),
            "lincomb: shape");
    n.val += w[i] * xs[i].val();
    n.many.push_back(xs[i].id);
    n.ng = n.ng || ng(xs[i].id);
  }
  return make(std::move(n));
}

Var Tape::block_rows(Var a, int row0, int rows) {
  require(row0 >= 0 && row0 + rows <= a.val().rows(), "block_rows: range");
  Node n;
  n.op = Op::kBlock;
  n.a = a.id;
  n.i0 = row0;
  n.i1 = rows;
  n.ng = ng(a.id);
  n.val = a.val().middleRows(row0, rows);
  return make(std::move(n));
}

Var Tape::sum_all(Var a) {
  Node n;
  n.op = Op::kSumAll;
  n.a = a.id;
  n.ng = ng(a.id);
  n.val = Mat::Constant(1, 1, a.val().sum());
  return make(std::move(n));
}

Var Tape::mean_all(Var a) {
  Node n;
  n.op = Op::kMeanAll;
  n.a = a.id;
  n.ng = ng(a.id);
  n.val = Mat::Constant(1, 1, a.val().mean());
  return make(std::move(n));
}

Var Tape::gather_cols(Var a, std::vector<int> cols) {
  Node n;
  n.op = Op::kGatherCols;
  n.a = a.id;
  n.ng = ng(a.id);
  n.val.resize(a.val().rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    require(cols[j] >= 0 && cols[j] < a.val().cols(), "gather_cols: index");
    n.val.col(static_cast<Eigen::Index>(j)) = a.val().col(cols[j]);
  }
  n.idx = std::move(cols);
  return make(std::move(n));
}

Var Tape::copy_dist(Var attn, std::vector<int> row_ids, int out_rows) {
  require(attn.val().cols() == 1, "copy_dist: column expected");
  require(static_cast<int>(row_ids.size()) == attn.val().rows(), "copy_dist: id count");
  Node n;
  n.op = Op::kCopyDist;
  n.a = attn.id;
  n.i0 = out_rows;
  n.ng = ng(attn.id);
  n.val = Mat::Zero(out_rows, 1);
  for (std::size_t p = 0; p < row_ids.size(); ++p) {
    require(row_ids[p] >= 0 && row_ids[p] < out_rows, "copy_dist: id range");
    n.val(row_ids[p], 0) += attn.val()(static_cast<Eigen::Index>(p), 0);
  }
  n.idx = std::move(row_ids);
  return make(std::move(n));
}

Var Tape::pad_rows(Var a, int out_rows) {
  require(a.val().cols() == 1 && out_rows >= a.val().rows(), "pad_rows: shape");
  Node n;
  n.op = Op::kPadRows;
  n.a = a.id;
  n.i0 = out_rows;
  n.ng = ng(a.id);
  n.val = Mat::Zero(out_rows, 1);
  n.val.topRows(a.val().rows()) = a.val();
  return make(std::move(n));
}

Var Tape::im2col(Var x, int width) {
  require(x.val().cols() == 1, "im2col: column expected");
  const int len = static_cast<int>(x.val().rows());
  require(width >= 1 && width <= len, "im2col: width");
  Node n;
  n.op = Op::kIm2Col;
  n.a = x.id;
  n.i0 = width;
  n.ng = ng(x.id);
  const int cols = len - width + 1;
  n.val.resize(width, cols);
  for (int p = 0; p < cols; ++p) n.val.col(p) = x.val().col(0).segment(p, width);
  return make(std::move(n));
}

Var Tape::mix(Var p, Var a, Var b) {
  require(p.val().rows() == 1 && p.val().cols() == 1, "mix: scalar gate");
  require(a.val().rows() == b.val().rows() && a.val().cols() == b.val().cols(), "mix: shape");
  Node n;
  n.op = Op::kMix;
  n.a = a.id;
  n.b = b.id;
  n.c = p.id;
  n.ng = ng(a.id) || ng(b.id) || ng(p.id);
  const double g = p.val()(0, 0);
  n.val = g * a.val() + (1.0 - g) * b.val();
  return make(std::move(n));
}

Var Tape::detach(Var a) {
  Node n;
  n.op = Op::kDetach;
  n.val = a.val();
  n.ng = false;
  return make(std::move(n));
}

Var Tape::transpose(Var a) {
  Node n;
  n.op = Op::kTranspose;
  n.a = a.id;
  n.ng = ng(a.id);
  n.val = a.val().transpose();
  return make(std::move(n));
}

Var Tape::rsqrt(Var a) {
  Node n;
  n.op = Op::kRsqrt;
  n.a = a.id;
  n.ng = ng(a.id);
  n.val = a.val().array().rsqrt();
  return make(std::move(n));
}

void Tape::backward(Var loss) {
  require(loss.tape == this, "backward: foreign var");
  require(loss.val().rows() == 1 && loss.val().cols() == 1, "backward: loss must be scalar");
  if (!grad_enabled_) throw std::logic_error("backward on a no-grad tape");
  grad_of(loss.id)(0, 0) += 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.ng || n.grad.size() == 0) continue;
    const Mat& g = n.grad;
    switch (n.op) {
      case Op::kInput:
      case Op::kDetach:
        break;
      case Op::kParam:
        n.param->grad += g;
        break;
      case Op::kMatMul:
        if (ng(n.a)) grad_of(n.a) += g * nodes_[n.b].v().transpose();
        if (ng(n.b)) grad_of(n.b) += nodes_[n.a].v().transpose() * g;
        break;
      case Op::kMatMulTA:
        if (ng(n.a)) grad_of(n.a) += nodes_[n.b].v() * g.transpose();
        if (ng(n.b)) grad_of(n.b) += nodes_[n.a].v() * g;
        break;
      case Op::kAdd:
        acc(n.a, g);
        acc(n.b, g);
        break;
      case Op::kSub:
        acc(n.a, g);
        if (ng(n.b)) grad_of(n.b) -= g;
        break;
      case Op::kAddBias:
        acc(n.a, g);
        if (ng(n.b)) grad_of(n.b) += g.rowwise().sum();
        break;
      case Op::kScale:
        if (ng(n.a)) grad_of(n.a) += n.x0 * g;
        break;
      case Op::kHadamard:
        if (ng(n.a)) grad_of(n.a) += g.cwiseProduct(nodes_[n.b].v());
        if (ng(n.b)) grad_of(n.b) += g.cwiseProduct(nodes_[n.a].v());
        break;
      case Op::kTanh:
        if (ng(n.a)) grad_of(n.a).array() += g.array() * (1.0 - n.val.array().square());
        break;
      case Op::kSigmoid:
        if (ng(n.a)) grad_of(n.a).array() += g.array() * n.val.array() * (1.0 - n.val.array());
        break;
      case Op::kRelu:
        if (ng(n.a))
          grad_of(n.a).array() += g.array() * (n.val.array() > 0.0).cast<double>();
        break;
      case Op::kClamp:
        if (ng(n.a)) {
          const auto& x = nodes_[n.a].v().array();
          grad_of(n.a).array() +=
              g.array() * ((x > n.x0) && (x < n.x1)).cast<double>();
        }
        break;
      case Op::kLog:
        if (ng(n.a)) grad_of(n.a).array() += g.array() / nodes_[n.a].v().array();
        break;
      case Op::kSoftmaxCol:
        if (ng(n.a)) {
          Mat& ga = grad_of(n.a);
          for (int j = 0; j < n.val.cols(); ++j) {
            const double s = n.val.col(j).dot(g.col(j));
            ga.col(j).array() += n.val.col(j).array() * (g.col(j).array() - s);
          }
        }
        break;
      case Op::kRowMax:
        if (ng(n.a)) {
          Mat& ga = grad_of(n.a);
          for (int r = 0; r < n.val.rows(); ++r) ga(r, n.idx[r]) += g(r, 0);
        }
        break;
      case Op::kVStack2: {
        const int ra = static_cast<int>(nodes_[n.a].v().rows());
        if (ng(n.a)) grad_of(n.a) += g.topRows(ra);
        if (ng(n.b)) grad_of(n.b) += g.bottomRows(g.rows() - ra);
        break;
      }
      case Op::kVStack3: {
        const int ra = static_cast<int>(nodes_[n.a].v().rows());
        const int rb = static_cast<int>(nodes_[n.b].v().rows());
        if (ng(n.a)) grad_of(n.a) += g.topRows(ra);
        if (ng(n.b)) grad_of(n.b) += g.middleRows(ra, rb);
        if (ng(n.c)) grad_of(n.c) += g.bottomRows(g.rows() - ra - rb);
        break;
      }
      case Op::kHStack: {
        int off = 0;
        for (int pid : n.many) {
          const int w = static_cast<int>(nodes_[pid].v().cols());
          if (ng(pid)) grad_of(pid) += g.middleCols(off, w);
          off += w;
        }
        break;
      }
      case Op::kLinComb:
        for (std::size_t k = 0; k < n.many.size(); ++k) {
          if (ng(n.many[k])) grad_of(n.many[k]) += n.w[k] * g;
        }
        break;
      case Op::kBlock:
        if (ng(n.a)) grad_of(n.a).middleRows(n.i0, n.i1) += g;
        break;
      case Op::kSumAll:
        if (ng(n.a)) grad_of(n.a).array() += g(0, 0);
        break;
      case Op::kMeanAll:
        if (ng(n.a)) {
          const auto& av = nodes_[n.a].v();
          grad_of(n.a).array() += g(0, 0) / static_cast<double>(av.rows() * av.cols());
        }
        break;
      case Op::kGatherCols:
        if (ng(n.a)) {
          Mat& ga = grad_of(n.a);
          for (std::size_t j = 0; j < n.idx.size(); ++j)
            ga.col(n.idx[j]) += g.col(static_cast<Eigen::Index>(j));
        }
        break;
      case Op::kCopyDist:
        if (ng(n.a)) {
          Mat& ga = grad_of(n.a);
          for (std::size_t p = 0; p < n.idx.size(); ++p)
            ga(static_cast<Eigen::Index>(p), 0) += g(n.idx[p], 0);
        }
        break;
      case Op::kPadRows:
        if (ng(n.a)) grad_of(n.a) += g.topRows(nodes_[n.a].v().rows());
        break;
      case Op::kIm2Col:
        if (ng(n.a)) {
          Mat& ga = grad_of(n.a);
          for (int p = 0; p < n.val.cols(); ++p)
            ga.col(0).segment(p, n.i0) += g.col(p);
        }
        break;
      case Op::kMix: {
        const double gate = nodes_[n.c].v()(0, 0);
        if (ng(n.a)) grad_of(n.a) += gate * g;
        if (ng(n.b)) grad_of(n.b) += (1.0 - gate) * g;
        if (ng(n.c))
          grad_of(n.c)(0, 0) +=
              (g.array() * (nodes_[n.a].v() - nodes_[n.b].v()).array()).sum();
        break;
      }
      case Op::kTranspose:
        if (ng(n.a)) grad_of(n.a) += g.transpose();
        break;
      case Op::kRsqrt:
        // d/dx x^(-1/2) = -x^(-3/2) / 2 = -y^3 / 2
        if (ng(n.a)) grad_of(n.a).array() += g.array() * (-0.5) * n.val.array().cube();
        break;
    }
  }
}

}  // namespace rasg::ad
