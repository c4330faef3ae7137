#pragma once

#include <utility>
#include <vector>

#include "rasg/graph.hpp"

// Graph-level building blocks. Each works on an explicit tape so unit tests
// can drive them with hand-picked parameters.
namespace rasg {

struct LstmState {
  ad::Var h;
  ad::Var c;
};

// Standard LSTM cell. `weights` is (4H x (I+H)) with gate blocks ordered
// input, forget, output, candidate; `bias` is (4H x 1).
LstmState lstm_cell(ad::Tape& t, ad::Var weights, ad::Var bias, ad::Var input,
                    LstmState prev);

// alpha'_i = Wa^T tanh(Ws s + Wh h_i); returns the attention simplex and the
// context vector f = sum_i alpha_i h_i. `wh_hd` is the precomputed Wh * Hd.
struct AttentionOut {
  ad::Var alpha;  // (T x 1)
  ad::Var f;      // (2H x 1)
};
AttentionOut attention_step(ad::Tape& t, ad::Var ws, ad::Var wh_hd, ad::Var wa,
                            ad::Var s, ad::Var hd);

// gamma_{i,k} = e(doc_i) . e(com_k) for one comment: (T^d x T^c_j).
ad::Var alignment_scores(ad::Tape& t, ad::Var doc_emb, ad::Var com_emb,
                         bool cosine = false);

// delta column for one comment: max over the comment axis.
ad::Var comment_max(ad::Tape& t, ad::Var gamma);

// epsilon = softmax(delta * beta_hat) over document positions.
ad::Var reader_attention_eps(ad::Tape& t, ad::Var delta, ad::Var beta_hat);

// u = sum_i eps_i h_i.
ad::Var reader_aspect(ad::Tape& t, ad::Var hd, ad::Var eps);

// nu_t = 1/k sum of the last k attention vectors (zero padded below t);
// m_t = Hd nu_t. `alpha_hist` holds alpha_1..alpha_t, most recent last.
struct FocusOut {
  ad::Var nu;
  ad::Var m;
};
FocusOut decoder_focus(ad::Tape& t, const std::vector<ad::Var>& alpha_hist, int k,
                       ad::Var hd, bool renormalize = false);

// zeta_t = eps - nu_t; d_t = Hd zeta_t.
struct GapOut {
  ad::Var zeta;
  ad::Var d;
};
GapOut attention_gap(ad::Tape& t, ad::Var eps, ad::Var nu, ad::Var hd);

// Bias-free 1-D convolution along the feature axis, ReLU, global max pool
// per filter. `conv` is (n_f x w).
ad::Var cnn_feature(ad::Tape& t, ad::Var x, ad::Var conv);

// tau = sigmoid(Wf F + bf), scalar.
ad::Var discriminate(ad::Tape& t, ad::Var feature, ad::Var wf, ad::Var bf);

// L_c^d = sum_t phi^(T-t) (log tau_u + log(1 - tau_m_t)); tau clamped away
// from {0,1} before the log.
ad::Var discriminator_loss(ad::Tape& t, ad::Var tau_u,
                           const std::vector<ad::Var>& tau_m, double phi);

// L_c^g = sum_t phi^(T-t) log(1 - tau_m_t).
ad::Var generator_adv_loss(ad::Tape& t, const std::vector<ad::Var>& tau_m,
                           double phi);

// Mixed attention used by the S2SR baseline: normalize(alpha + mix * eps).
// Both inputs are simplexes, so the normalizer is the constant 1 + mix.
ad::Var s2sr_mix_attention(ad::Tape& t, ad::Var alpha, ad::Var eps, double mix);

}  // namespace rasg
