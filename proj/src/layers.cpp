#include "rasg/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace rasg {

namespace {
constexpr double kTauFloor = 1e-7;
}

LstmState lstm_cell(ad::Tape& t, ad::Var weights, ad::Var bias, ad::Var input,
                    LstmState prev) {
  const int hidden = static_cast<int>(prev.h.val().rows());
  if (weights.val().rows() != 4 * hidden ||
      weights.val().cols() != input.val().rows() + hidden) {
    throw std::invalid_argument("lstm_cell: weight shape mismatch");
  }
  ad::Var xs = t.vstack(input, prev.h);
  ad::Var gates = t.add(t.matmul(weights, xs), bias);
  ad::Var gi = t.sigmoid(t.block_rows(gates, 0, hidden));
  ad::Var gf = t.sigmoid(t.block_rows(gates, hidden, hidden));
  ad::Var go = t.sigmoid(t.block_rows(gates, 2 * hidden, hidden));
  ad::Var cand = t.tanh(t.block_rows(gates, 3 * hidden, hidden));
  ad::Var c = t.add(t.hadamard(gf, prev.c), t.hadamard(gi, cand));
  ad::Var h = t.hadamard(go, t.tanh(c));
  return {h, c};
}

AttentionOut attention_step(ad::Tape& t, ad::Var ws, ad::Var wh_hd, ad::Var wa,
                            ad::Var s, ad::Var hd) {
  ad::Var pre = t.tanh(t.add_bias(wh_hd, t.matmul(ws, s)));
  ad::Var scores = t.matmul_ta(pre, wa);  // (T x 1)
  ad::Var alpha = t.softmax_col(scores);
  ad::Var f = t.matmul(hd, alpha);
  return {alpha, f};
}

ad::Var alignment_scores(ad::Tape& t, ad::Var doc_emb, ad::Var com_emb, bool cosine) {
  ad::Var gamma = t.matmul_ta(doc_emb, com_emb);
  if (!cosine) return gamma;
  const int dim = static_cast<int>(doc_emb.val().rows());
  ad::Var ones = t.input(ad::Mat::Ones(dim, 1));
  ad::Var rd = t.rsqrt(t.matmul_ta(t.hadamard(doc_emb, doc_emb), ones));
  ad::Var rc = t.rsqrt(t.matmul_ta(t.hadamard(com_emb, com_emb), ones));
  return t.hadamard(gamma, t.matmul(rd, t.transpose(rc)));
}

ad::Var comment_max(ad::Tape& t, ad::Var gamma) { return t.row_max(gamma); }

ad::Var reader_attention_eps(ad::Tape& t, ad::Var delta, ad::Var beta_hat) {
  return t.softmax_col(t.matmul(delta, beta_hat));
}

ad::Var reader_aspect(ad::Tape& t, ad::Var hd, ad::Var eps) {
  return t.matmul(hd, eps);
}

FocusOut decoder_focus(ad::Tape& t, const std::vector<ad::Var>& alpha_hist, int k,
                       ad::Var hd, bool renormalize) {
  if (alpha_hist.empty()) throw std::invalid_argument("decoder_focus: empty history");
  const int n = static_cast<int>(alpha_hist.size());
  const int take = std::min(n, k);
  std::vector<ad::Var> window(alpha_hist.end() - take, alpha_hist.end());
  const double denom = renormalize ? static_cast<double>(take) : static_cast<double>(k);
  std::vector<double> w(static_cast<std::size_t>(take), 1.0 / denom);
  ad::Var nu = t.lincomb(window, w);
  ad::Var m = t.matmul(hd, nu);
  return {nu, m};
}

GapOut attention_gap(ad::Tape& t, ad::Var eps, ad::Var nu, ad::Var hd) {
  ad::Var zeta = t.sub(eps, nu);
  ad::Var d = t.matmul(hd, zeta);
  return {zeta, d};
}

ad::Var cnn_feature(ad::Tape& t, ad::Var x, ad::Var conv) {
  const int width = static_cast<int>(conv.val().cols());
  ad::Var patches = t.im2col(x, width);
  return t.row_max(t.relu(t.matmul(conv, patches)));
}

ad::Var discriminate(ad::Tape& t, ad::Var feature, ad::Var wf, ad::Var bf) {
  return t.sigmoid(t.add(t.matmul(wf, feature), bf));
}

namespace {

std::vector<double> discount_weights(int n, double phi) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = std::pow(phi, n - 1 - i);
  return w;
}

ad::Var log_complement(ad::Tape& t, ad::Var tau) {
  ad::Var one = t.input(ad::Mat::Ones(1, 1));
  return t.log(t.clamp(t.sub(one, tau), kTauFloor, 1.0 - kTauFloor));
}

}  // namespace

ad::Var discriminator_loss(ad::Tape& t, ad::Var tau_u,
                           const std::vector<ad::Var>& tau_m, double phi) {
  if (tau_m.empty()) throw std::invalid_argument("discriminator_loss: no steps");
  const int n = static_cast<int>(tau_m.size());
  const auto w = discount_weights(n, phi);
  double wsum = 0.0;
  for (double x : w) wsum += x;
  std::vector<ad::Var> terms;
  std::vector<double> coef;
  terms.push_back(t.log(t.clamp(tau_u, kTauFloor, 1.0 - kTauFloor)));
  coef.push_back(wsum);
  for (int i = 0; i < n; ++i) {
    terms.push_back(log_complement(t, tau_m[static_cast<std::size_t>(i)]));
    coef.push_back(w[static_cast<std::size_t>(i)]);
  }
  return t.lincomb(terms, coef);
}

ad::Var generator_adv_loss(ad::Tape& t, const std::vector<ad::Var>& tau_m, double phi) {
  if (tau_m.empty()) throw std::invalid_argument("generator_adv_loss: no steps");
  const int n = static_cast<int>(tau_m.size());
  const auto w = discount_weights(n, phi);
  std::vector<ad::Var> terms;
  terms.reserve(tau_m.size());
  for (ad::Var tau : tau_m) terms.push_back(log_complement(t, tau));
  return t.lincomb(terms, w);
}

ad::Var s2sr_mix_attention(ad::Tape& t, ad::Var alpha, ad::Var eps, double mix) {
  const double z = 1.0 + mix;
  return t.lincomb({alpha, eps}, {1.0 / z, mix / z});
}

}  // namespace rasg
