#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace rasg::ad {

using Mat = Eigen::MatrixXd;

// A named parameter block with its gradient and Adagrad accumulator.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  Mat accum;

  Param(std::string n, int rows, int cols)
      : name(std::move(n)),
        value(Mat::Zero(rows, cols)),
        grad(Mat::Zero(rows, cols)),
        accum(Mat::Zero(rows, cols)) {}
};

enum class Op : std::uint8_t {
  kInput,
  kParam,
  kMatMul,     // A(m,k) * B(k,n)
  kMatMulTA,   // A^T * B with A(k,m), B(k,n)
  kAdd,
  kSub,
  kAddBias,    // M(m,n) + b(m,1) broadcast over columns
  kScale,      // x0 * A
  kHadamard,
  kTanh,
  kSigmoid,
  kRelu,
  kClamp,      // clamp to [x0, x1]; gradient passes strictly inside
  kLog,
  kSoftmaxCol, // column-wise softmax
  kRowMax,     // (m,n) -> (m,1), argmax per row kept for backward
  kVStack2,
  kVStack3,
  kHStack,     // variadic
  kLinComb,    // sum_i w[i] * X_i, equal shapes
  kBlock,      // rows [i0, i0+i1)
  kSumAll,     // -> 1x1
  kMeanAll,    // -> 1x1
  kGatherCols, // A(:, idx)
  kCopyDist,   // column a(T,1) scattered by idx into (i0,1)
  kPadRows,    // (m,1) -> (i0,1), zero tail
  kIm2Col,     // x(L,1), width i0 -> (i0, L-i0+1)
  kMix,        // p*A + (1-p)*B with scalar node p
  kDetach,
  kTranspose,
  kRsqrt,      // elementwise x^(-1/2)
};

class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;
  bool ok() const { return tape != nullptr && id >= 0; }
  const Mat& val() const;
  double scalar() const { return val()(0, 0); }
};

struct Node {
  Mat val;
  Mat grad;                  // lazily allocated during backward
  const Mat* ref = nullptr;  // kInput-by-ref / kParam point at external storage
  Param* param = nullptr;
  std::vector<int> many;
  std::vector<int> idx;
  std::vector<double> w;
  double x0 = 0.0, x1 = 0.0;
  int a = -1, b = -1, c = -1;
  int i0 = 0, i1 = 0;
  Op op = Op::kInput;
  bool ng = false;  // participates in backward

  const Mat& v() const { return ref != nullptr ? *ref : val; }
};

// Define-by-run reverse-mode tape over Eigen double matrices. One tape per
// forward pass; backward() walks nodes in reverse creation order and adds
// parameter gradients into Param::grad.
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {
    nodes_.reserve(1024);
  }

  Var input(Mat m);
  Var zeros(int rows, int cols) { return input(Mat::Zero(rows, cols)); }
  Var param(Param& p);

  Var matmul(Var a, Var b);
  Var matmul_ta(Var a, Var b);  // a^T * b
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var add_bias(Var m, Var bias);
  Var scale(Var a, double c);
  Var hadamard(Var a, Var b);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var relu(Var a);
  Var clamp(Var a, double lo, double hi);
  Var log(Var a);
  Var softmax_col(Var a);
  Var row_max(Var a);
  Var vstack(Var a, Var b);
  Var vstack(Var a, Var b, Var c);
  Var hstack(const std::vector<Var>& xs);
  Var lincomb(const std::vector<Var>& xs, const std::vector<double>& w);
  Var block_rows(Var a, int row0, int rows);
  Var sum_all(Var a);
  Var mean_all(Var a);
  Var gather_cols(Var a, std::vector<int> cols);
  Var copy_dist(Var attn, std::vector<int> row_ids, int out_rows);
  Var pad_rows(Var a, int out_rows);
  Var im2col(Var x, int width);
  Var mix(Var p, Var a, Var b);
  Var detach(Var a);
  Var transpose(Var a);
  Var rsqrt(Var a);

  void backward(Var loss);

  const Mat& value(int id) const { return nodes_[id].v(); }
  std::size_t size() const { return nodes_.size(); }
  bool grad_enabled() const { return grad_enabled_; }

 private:
  friend struct Var;
  int push(Node&& n);
  Var make(Node&& n) { return Var{this, push(std::move(n))}; }
  bool ng(int id) const { return id >= 0 && nodes_[id].ng; }
  Mat& grad_of(int id);
  void acc(int id, const Mat& g);

  std::vector<Node> nodes_;
  std::vector<std::pair<const Param*, int>> param_nodes_;  // one leaf per param
  bool grad_enabled_;
};

inline const Mat& Var::val() const { return tape->value(id); }

}  // namespace rasg::ad
