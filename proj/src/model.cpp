#include "rasg/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rasg/rng.hpp"

namespace rasg {

namespace {
constexpr double kProbFloor = 1e-12;
constexpr double kBetaFloor = 1e-7;
}  // namespace

Model::Model(const TrainingConfig& cfg, int vocab_size)
    : cfg_(cfg), vocab_size_(vocab_size) {
  cfg_.validate();
  if (vocab_size_ <= Vocabulary::kReserved) throw std::invalid_argument("vocab too small");
  const int E = cfg_.embedding_dim;
  const int H = cfg_.hidden_dim;
  const int HH = 2 * H;
  const int D = HH;  // decoder state size, keeps dec_init square
  const int A = HH;  // attention hidden size
  const int G = cfg_.effective_goal_dim();
  const int NF = cfg_.n_filters;
  const int FW = cfg_.filter_width;

  add_param("embedding", E, vocab_size_);
  add_param("enc_doc_fwd.W", 4 * H, E + H);
  add_param("enc_doc_fwd.b", 4 * H, 1);
  add_param("enc_doc_bwd.W", 4 * H, E + H);
  add_param("enc_doc_bwd.b", 4 * H, 1);
  add_param("enc_com_fwd.W", 4 * H, E + H);
  add_param("enc_com_fwd.b", 4 * H, 1);
  add_param("enc_com_bwd.W", 4 * H, E + H);
  add_param("enc_com_bwd.b", 4 * H, 1);
  add_param("salience.W", 1, HH + HH);
  add_param("salience.b", 1, 1);
  add_param("dec_init.W", D, HH);
  add_param("dec_init.b", D, 1);
  add_param("dec_lstm.W", 4 * D, HH + E + D);
  add_param("dec_lstm.b", 4 * D, 1);
  add_param("attn.Ws", A, D);
  add_param("attn.Wh", A, HH);
  add_param("attn.v", A, 1);
  add_param("proj.W", vocab_size_, D + G + HH);
  add_param("proj.b", vocab_size_, 1);
  add_param("ptr.wf", HH, 1);
  add_param("ptr.ws", D, 1);
  add_param("ptr.wx", E, 1);
  add_param("ptr.b", 1, 1);
  add_param("goal.W", 4 * G, NF + HH + G);
  add_param("goal.b", 4 * G, 1);
  add_param("disc.conv", NF, FW);
  add_param("disc.Wf", 1, NF);
  add_param("disc.bf", 1, 1);

  for (const auto& p : params_) {
    if (p->name.rfind("disc.", 0) == 0) {
      disc_names_.push_back(p->name);
    } else {
      gen_names_.push_back(p->name);
    }
  }
  init_params(cfg_.seed);
}

ad::Param& Model::add_param(const std::string& name, int rows, int cols) {
  params_.push_back(std::make_unique<ad::Param>(name, rows, cols));
  return *params_.back();
}

ad::Param& Model::param(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return *p;
  }
  throw std::out_of_range("no such parameter: " + name);
}

std::vector<ad::Param*> Model::parameters() {
  std::vector<ad::Param*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const ad::Param*> Model::parameters() const {
  std::vector<const ad::Param*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<ad::Param*> Model::generation_parameters() {
  std::vector<ad::Param*> out;
  for (auto& p : params_) {
    if (p->name.rfind("disc.", 0) != 0) out.push_back(p.get());
  }
  return out;
}

std::vector<ad::Param*> Model::discriminator_parameters() {
  std::vector<ad::Param*> out;
  for (auto& p : params_) {
    if (p->name.rfind("disc.", 0) == 0) out.push_back(p.get());
  }
  return out;
}

void Model::init_params(std::uint64_t seed) {
  Rng rng(Rng::mix(seed, 0x6d6f64656cULL));
  for (auto& p : params_) {
    const bool is_bias =
        p->name.size() >= 2 &&
        (p->name.compare(p->name.size() - 2, 2, ".b") == 0 || p->name == "disc.bf");
    if (is_bias) {
      p->value.setZero();
    } else {
      for (int c = 0; c < p->value.cols(); ++c) {
        for (int r = 0; r < p->value.rows(); ++r) {
          p->value(r, c) = rng.uniform(-cfg_.init_scale, cfg_.init_scale);
        }
      }
    }
    p->grad.setZero();
    p->accum.setConstant(cfg_.accum_init);
  }
}

bool Model::has_reader() const { return cfg_.baseline_kind() != Baseline::kS2s; }

bool Model::has_denoiser() const {
  return has_reader() && cfg_.ablation_kind() != Ablation::kDm;
}

bool Model::has_gap_content() const {
  if (cfg_.baseline_kind() != Baseline::kNone) return false;
  return cfg_.ablation_kind() != Ablation::kG;
}

bool Model::has_goal_tracker() const {
  if (cfg_.baseline_kind() != Baseline::kNone) return false;
  const Ablation a = cfg_.ablation_kind();
  return a == Ablation::kNone || a == Ablation::kDm || a == Ablation::kG;
}

bool Model::has_discriminator() const {
  if (cfg_.baseline_kind() != Baseline::kNone) return false;
  return cfg_.ablation_kind() != Ablation::kGtd;
}

ad::Var Model::embed_tokens(ad::Tape& t, const std::vector<int>& ids) {
  std::vector<int> base(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    base[i] = (ids[i] >= 0 && ids[i] < vocab_size_) ? ids[i] : Vocabulary::kUnk;
  }
  return t.gather_cols(t.param(param("embedding")), std::move(base));
}

std::vector<ad::Var> Model::encode_sequence(ad::Tape& t, ad::Var emb, ad::Param& wf,
                                            ad::Param& bf, ad::Param& wb,
                                            ad::Param& bb) {
  const int len = static_cast<int>(emb.val().cols());
  const int H = cfg_.hidden_dim;
  ad::Var w_fwd = t.param(wf);
  ad::Var b_fwd = t.param(bf);
  ad::Var w_bwd = t.param(wb);
  ad::Var b_bwd = t.param(bb);
  std::vector<ad::Var> fwd(len), bwd(len);
  LstmState st{t.zeros(H, 1), t.zeros(H, 1)};
  for (int i = 0; i < len; ++i) {
    st = lstm_cell(t, w_fwd, b_fwd, t.gather_cols(emb, {i}), st);
    fwd[i] = st.h;
  }
  st = {t.zeros(H, 1), t.zeros(H, 1)};
  for (int i = len - 1; i >= 0; --i) {
    st = lstm_cell(t, w_bwd, b_bwd, t.gather_cols(emb, {i}), st);
    bwd[i] = st.h;
  }
  std::vector<ad::Var> states(len);
  for (int i = 0; i < len; ++i) states[i] = t.vstack(fwd[i], bwd[i]);
  return states;
}

Model::DocState Model::encode_document(ad::Tape& t, const std::vector<int>& doc_base) {
  if (doc_base.empty()) throw std::invalid_argument("encode_document: empty document");
  ad::Var emb = embed_tokens(t, doc_base);
  std::vector<ad::Var> states =
      encode_sequence(t, emb, param("enc_doc_fwd.W"), param("enc_doc_fwd.b"),
                      param("enc_doc_bwd.W"), param("enc_doc_bwd.b"));
  DocState out;
  out.matrix = t.hstack(states);
  out.final = states.back();
  out.states = std::move(states);
  return out;
}

std::vector<std::vector<ad::Var>> Model::encode_comments(
    ad::Tape& t, const std::vector<std::vector<int>>& comments) {
  std::vector<std::vector<ad::Var>> out;
  out.reserve(comments.size());
  for (const auto& ids : comments) {
    if (ids.empty()) throw std::invalid_argument("encode_comments: empty comment");
    ad::Var emb = embed_tokens(t, ids);
    out.push_back(encode_sequence(t, emb, param("enc_com_fwd.W"), param("enc_com_fwd.b"),
                                  param("enc_com_bwd.W"), param("enc_com_bwd.b")));
  }
  return out;
}

ad::Var Model::comment_salience(ad::Tape& t,
                                const std::vector<std::vector<ad::Var>>& comment_states,
                                ad::Var doc_final) {
  if (comment_states.empty()) throw std::invalid_argument("comment_salience: no comments");
  ad::Var w = t.param(param("salience.W"));
  ad::Var b = t.param(param("salience.b"));
  std::vector<ad::Var> scores;
  scores.reserve(comment_states.size());
  for (const auto& states : comment_states) {
    std::vector<double> coef(states.size(), 1.0 / static_cast<double>(states.size()));
    ad::Var pooled = t.lincomb(states, coef);
    ad::Var z = t.add(t.matmul(w, t.vstack(pooled, doc_final)), b);
    scores.push_back(t.sigmoid(z));
  }
  return t.transpose(t.hstack(scores));  // (T^c x 1)
}

ad::Var Model::denoising_loss_sum(ad::Tape& t, ad::Var beta_hat,
                                  const std::vector<int>& labels) {
  const int n = static_cast<int>(beta_hat.val().rows());
  if (static_cast<int>(labels.size()) != n) {
    throw std::invalid_argument("denoising_loss: label count mismatch");
  }
  ad::Mat y(n, 1), yc(n, 1);
  for (int i = 0; i < n; ++i) {
    y(i, 0) = labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    yc(i, 0) = 1.0 - y(i, 0);
  }
  ad::Var ones = t.input(ad::Mat::Ones(n, 1));
  ad::Var cb = t.clamp(beta_hat, kBetaFloor, 1.0 - kBetaFloor);
  ad::Var log_pos = t.log(cb);
  ad::Var log_neg = t.log(t.clamp(t.sub(ones, cb), kBetaFloor, 1.0 - kBetaFloor));
  ad::Var pos = t.matmul_ta(t.input(std::move(y)), log_pos);
  ad::Var neg = t.matmul_ta(t.input(std::move(yc)), log_neg);
  return t.lincomb({pos, neg}, {-1.0, -1.0});
}

ad::Var Model::reader_attention(ad::Tape& t, const EncodedExample& exe,
                                ad::Var beta_hat) {
  const int len = static_cast<int>(exe.doc_base.size());
  if (exe.comments.empty()) {
    return t.softmax_col(t.zeros(len, 1));
  }
  ad::Var doc_emb = embed_tokens(t, exe.doc_base);
  std::vector<ad::Var> delta_cols;
  delta_cols.reserve(exe.comments.size());
  for (const auto& ids : exe.comments) {
    ad::Var com_emb = embed_tokens(t, ids);
    ad::Var gamma = alignment_scores(t, doc_emb, com_emb, cfg_.cosine_alignment);
    delta_cols.push_back(comment_max(t, gamma));
  }
  ad::Var delta = t.hstack(delta_cols);
  return reader_attention_eps(t, delta, beta_hat);
}

// Everything one decoding step needs from the example-level forward pass.
struct Model::StepCtx {
  const EncodedExample* exe = nullptr;
  DocState doc;
  ad::Var wh_hd;
  ad::Var hd_for_m;  // doc matrix, detached when adversarial encoder grads are cut
  ad::Var eps;
  ad::Var u;
  int n_ext = 0;
  bool use_reader = false;
  bool need_supervisor = false;
  bool need_gap = false;
  bool need_goal = false;
  bool need_disc = false;
};

struct Model::StepState {
  ad::Var s, c;             // decoder LSTM
  ad::Var f;                // context emitted by this step
  ad::Var goal_h, goal_c;   // goal tracker LSTM
  std::deque<ad::Var> alpha_window;  // last k attention vectors
  // per-step outputs
  ad::Var alpha;
  ad::Var P;
  ad::Var p_gen;
  ad::Var tau_m;
  ad::Var nu, m, zeta, d;
};

Model::StepState Model::initial_state(ad::Tape& t, const StepCtx& ctx) {
  StepState st;
  st.s = t.add(t.matmul(t.param(param("dec_init.W")), ctx.doc.final),
               t.param(param("dec_init.b")));
  st.c = t.zeros(2 * cfg_.hidden_dim, 1);
  st.f = t.zeros(2 * cfg_.hidden_dim, 1);
  st.goal_h = t.zeros(cfg_.effective_goal_dim(), 1);
  st.goal_c = t.zeros(cfg_.effective_goal_dim(), 1);
  return st;
}

Model::StepState Model::advance(ad::Tape& t, StepCtx& ctx, const StepState& prev,
                                int y_prev, bool discriminator_pass,
                                bool want_projection) {
  StepState st;
  st.goal_h = prev.goal_h;
  st.goal_c = prev.goal_c;

  ad::Var e_prev = embed_tokens(t, {y_prev});
  LstmState dec = lstm_cell(t, t.param(param("dec_lstm.W")), t.param(param("dec_lstm.b")),
                            t.vstack(prev.f, e_prev), {prev.s, prev.c});
  st.s = dec.h;
  st.c = dec.c;

  AttentionOut att = attention_step(t, t.param(param("attn.Ws")), ctx.wh_hd,
                                    t.param(param("attn.v")), st.s, ctx.doc.matrix);
  st.alpha = att.alpha;
  st.f = att.f;
  if (cfg_.baseline_kind() == Baseline::kS2sr && ctx.use_reader) {
    st.alpha = s2sr_mix_attention(t, att.alpha, ctx.eps, cfg_.s2sr_mix);
    st.f = t.matmul(ctx.doc.matrix, st.alpha);
  }

  st.alpha_window = prev.alpha_window;
  st.alpha_window.push_back(st.alpha);
  while (static_cast<int>(st.alpha_window.size()) > cfg_.k) st.alpha_window.pop_front();

  ad::Var feature;  // F(m_t), shared by the discriminator and the goal tracker
  if (ctx.need_supervisor) {
    std::vector<ad::Var> window(st.alpha_window.begin(), st.alpha_window.end());
    FocusOut focus = decoder_focus(t, window, cfg_.k, ctx.hd_for_m, cfg_.renormalize_focus);
    st.nu = focus.nu;
    st.m = focus.m;
    ad::Var m_use = discriminator_pass ? t.detach(st.m) : st.m;
    if (ctx.need_disc || (ctx.need_goal && !discriminator_pass)) {
      feature = cnn_feature(t, m_use, t.param(param("disc.conv")));
    }
    if (ctx.need_disc) {
      st.tau_m = discriminate(t, feature, t.param(param("disc.Wf")), t.param(param("disc.bf")));
    }
    if (ctx.need_gap && !discriminator_pass) {
      GapOut gap = attention_gap(t, ctx.eps, st.nu, ctx.doc.matrix);
      st.zeta = gap.zeta;
      st.d = gap.d;
    }
  }

  if (want_projection) {
    const int HH = 2 * cfg_.hidden_dim;
    ad::Var d_in = st.d.ok() ? st.d : t.zeros(HH, 1);
    ad::Var g_in;
    if (ctx.need_goal) {
      LstmState goal = lstm_cell(t, t.param(param("goal.W")), t.param(param("goal.b")),
                                 t.vstack(feature, d_in), {prev.goal_h, prev.goal_c});
      st.goal_h = goal.h;
      st.goal_c = goal.c;
      g_in = goal.h;
    } else {
      g_in = t.zeros(cfg_.effective_goal_dim(), 1);
    }
    ad::Var logits = t.add(t.matmul(t.param(param("proj.W")), t.vstack(st.s, g_in, d_in)),
                           t.param(param("proj.b")));
    ad::Var pv = t.softmax_col(logits);
    ad::Var gate_in =
        t.add(t.add(t.matmul_ta(t.param(param("ptr.wf")), st.f),
                    t.matmul_ta(t.param(param("ptr.ws")), st.s)),
              t.add(t.matmul_ta(t.param(param("ptr.wx")), e_prev), t.param(param("ptr.b"))));
    st.p_gen = t.sigmoid(gate_in);
    ad::Var gen_part = t.pad_rows(pv, ctx.n_ext);
    ad::Var copy_part = t.copy_dist(st.alpha, ctx.exe->doc_ext, ctx.n_ext);
    st.P = t.mix(st.p_gen, gen_part, copy_part);
  }
  return st;
}

Model::TrainGraph Model::build_graph(ad::Tape& t, const EncodedExample& exe,
                                     bool discriminator_pass,
                                     std::uint64_t dropout_seed) {
  if (exe.summary_ext.empty()) throw std::invalid_argument("build_graph: empty summary");
  TrainGraph out;

  StepCtx ctx;
  ctx.exe = &exe;
  ctx.doc = encode_document(t, exe.doc_base);
  if (cfg_.dropout > 0.0 && t.grad_enabled()) {
    Rng drop_rng(Rng::mix(dropout_seed, 0xd50u));
    const double keep = 1.0 - cfg_.dropout;
    std::vector<ad::Var> dropped(ctx.doc.states.size());
    for (std::size_t i = 0; i < ctx.doc.states.size(); ++i) {
      ad::Mat mask(ctx.doc.states[i].val().rows(), 1);
      for (int r = 0; r < mask.rows(); ++r) {
        mask(r, 0) = drop_rng.uniform() < keep ? 1.0 / keep : 0.0;
      }
      dropped[i] = t.hadamard(ctx.doc.states[i], t.input(std::move(mask)));
    }
    ctx.doc.states = std::move(dropped);
    ctx.doc.matrix = t.hstack(ctx.doc.states);
    ctx.doc.final = ctx.doc.states.back();
  }
  ctx.wh_hd = t.matmul(t.param(param("attn.Wh")), ctx.doc.matrix);
  ctx.hd_for_m = cfg_.stop_adv_encoder_grad ? t.detach(ctx.doc.matrix) : ctx.doc.matrix;
  ctx.n_ext = vocab_size_ + exe.n_oov();
  ctx.use_reader = has_reader();
  ctx.need_gap = has_gap_content();
  ctx.need_goal = has_goal_tracker() && !discriminator_pass;
  ctx.need_disc = has_discriminator();
  ctx.need_supervisor = ctx.need_gap || ctx.need_goal || ctx.need_disc;

  ad::Var beta;
  const bool have_comments = !exe.comments.empty();
  if (has_denoiser() && have_comments) {
    auto comment_states = encode_comments(t, exe.comments);
    beta = comment_salience(t, comment_states, ctx.doc.final);
    out.beta_hat = beta.val().col(0);
    if (!discriminator_pass && !exe.labels.empty()) {
      out.denoise_sum = denoising_loss_sum(t, beta, exe.labels);
      out.n_comments = static_cast<int>(exe.comments.size());
    }
  }
  if (ctx.use_reader) {
    ad::Var beta_eps;
    if (!have_comments) {
      beta_eps = ad::Var{};
    } else if (!has_denoiser()) {
      beta_eps = t.input(ad::Mat::Ones(static_cast<int>(exe.comments.size()), 1));
    } else {
      beta_eps = cfg_.couple_salience ? beta : t.detach(beta);
    }
    ctx.eps = reader_attention(t, exe, beta_eps);
    ctx.u = reader_aspect(t, ctx.doc.matrix, ctx.eps);
    out.epsilon = ctx.eps.val().col(0);
  }

  const int steps = static_cast<int>(exe.summary_ext.size()) + 1;
  out.n_steps = steps;
  StepState st = initial_state(t, ctx);
  std::vector<ad::Var> nll_terms;
  std::vector<ad::Var> taus;
  for (int i = 0; i < steps; ++i) {
    const int y_prev = (i == 0) ? Vocabulary::kStart : exe.summary_ext[static_cast<std::size_t>(i - 1)];
    const int y_gold = (i == steps - 1) ? Vocabulary::kStop : exe.summary_ext[static_cast<std::size_t>(i)];
    st = advance(t, ctx, st, y_prev, discriminator_pass, !discriminator_pass);
    out.alphas.push_back(st.alpha.val().col(0));
    if (!discriminator_pass) {
      ad::Var py = t.block_rows(st.P, y_gold, 1);
      nll_terms.push_back(t.log(t.clamp(py, kProbFloor, 2.0)));
    }
    if (ctx.need_disc) taus.push_back(st.tau_m);
    if (i == steps - 1 && st.nu.ok()) out.nu_last = st.nu.val().col(0);
  }
  if (ctx.need_disc) {
    for (ad::Var tau : taus) out.tau_m.push_back(tau.scalar());
  }
  if (!discriminator_pass) {
    out.nll_sum = t.lincomb(nll_terms, std::vector<double>(nll_terms.size(), -1.0));
    if (ctx.need_disc) out.adv_gen = generator_adv_loss(t, taus, cfg_.phi);
  } else {
    ad::Var tau_u = discriminate(t, cnn_feature(t, t.detach(ctx.u), t.param(param("disc.conv"))),
                                 t.param(param("disc.Wf")), t.param(param("disc.bf")));
    out.adv_disc = discriminator_loss(t, tau_u, taus, cfg_.phi);
  }
  if (out.nu_last.size() == 0 && !out.alphas.empty()) {
    // nu is not built for baselines; reconstruct the window average for the
    // diagnostics from raw attention values.
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(out.alphas.back().size());
    const int take = std::min<int>(cfg_.k, static_cast<int>(out.alphas.size()));
    for (int i = 0; i < take; ++i) nu += out.alphas[out.alphas.size() - 1 - static_cast<std::size_t>(i)];
    out.nu_last = nu / static_cast<double>(cfg_.renormalize_focus ? take : cfg_.k);
  }
  return out;
}

Eigen::VectorXd Model::predict_salience(const EncodedExample& exe) {
  if (!has_denoiser() || exe.comments.empty()) return {};
  ad::Tape t(false);
  DocState doc = encode_document(t, exe.doc_base);
  auto states = encode_comments(t, exe.comments);
  ad::Var beta = comment_salience(t, states, doc.final);
  return beta.val().col(0);
}

namespace {

struct Hyp {
  Model::Decoded trace;  // ids + alphas so far
  double logp_sum = 0.0;
  int steps_taken = 0;
  bool done = false;
  int state_slot = -1;  // index into the per-round state vector
};

}  // namespace

Model::Decoded Model::decode(const EncodedExample& exe, int beam_size, int max_len) {
  if (beam_size < 1) throw std::invalid_argument("decode: beam_size >= 1");
  if (max_len < 1) throw std::invalid_argument("decode: max_len >= 1");
  ad::Tape t(false);

  StepCtx ctx;
  ctx.exe = &exe;
  ctx.doc = encode_document(t, exe.doc_base);
  ctx.wh_hd = t.matmul(t.param(param("attn.Wh")), ctx.doc.matrix);
  ctx.hd_for_m = ctx.doc.matrix;
  ctx.n_ext = vocab_size_ + exe.n_oov();
  ctx.use_reader = has_reader();
  ctx.need_gap = has_gap_content();
  ctx.need_goal = has_goal_tracker();
  ctx.need_disc = false;
  ctx.need_supervisor = ctx.need_gap || ctx.need_goal;

  Eigen::VectorXd beta_values;
  if (ctx.use_reader) {
    ad::Var beta_eps;
    if (!exe.comments.empty()) {
      if (has_denoiser()) {
        auto comment_states = encode_comments(t, exe.comments);
        ad::Var beta = comment_salience(t, comment_states, ctx.doc.final);
        beta_values = beta.val().col(0);
        beta_eps = beta;
      } else {
        beta_eps = t.input(ad::Mat::Ones(static_cast<int>(exe.comments.size()), 1));
      }
    }
    ctx.eps = reader_attention(t, exe, beta_eps);
    ctx.u = reader_aspect(t, ctx.doc.matrix, ctx.eps);
  }

  struct Cand {
    double score;
    int hyp;
    int token;
  };

  std::vector<StepState> states{initial_state(t, ctx)};
  std::vector<Hyp> active(1);
  active[0].state_slot = 0;
  std::vector<Hyp> finished;

  for (int step = 0; step < max_len && !active.empty(); ++step) {
    std::vector<StepState> next_states(active.size());
    std::vector<Cand> pool;
    for (std::size_t h = 0; h < active.size(); ++h) {
      Hyp& hyp = active[h];
      const int y_prev = hyp.trace.ids.empty() ? Vocabulary::kStart : hyp.trace.ids.back();
      StepState st = advance(t, ctx, states[static_cast<std::size_t>(hyp.state_slot)],
                             y_prev, false, true);
      next_states[h] = st;
      const Eigen::VectorXd p = st.P.val().col(0);
      // rank this hypothesis' continuations, keep the top beam_size
      std::vector<Cand> local;
      for (int id = 0; id < p.size(); ++id) {
        if (id == Vocabulary::kPad || id == Vocabulary::kStart) continue;
        if (id == Vocabulary::kStop && hyp.trace.ids.empty()) continue;
        const double lp = std::log(std::max(p(id), kProbFloor));
        local.push_back({hyp.logp_sum + lp, static_cast<int>(h), id});
      }
      std::sort(local.begin(), local.end(), [](const Cand& a, const Cand& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.token < b.token;
      });
      if (static_cast<int>(local.size()) > beam_size) local.resize(static_cast<std::size_t>(beam_size));
      pool.insert(pool.end(), local.begin(), local.end());
    }
    std::sort(pool.begin(), pool.end(), [](const Cand& a, const Cand& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.hyp != b.hyp) return a.hyp < b.hyp;
      return a.token < b.token;
    });
    if (static_cast<int>(pool.size()) > beam_size) pool.resize(static_cast<std::size_t>(beam_size));

    std::vector<Hyp> survivors;
    std::vector<StepState> survivor_states;
    for (const Cand& c : pool) {
      Hyp hyp = active[static_cast<std::size_t>(c.hyp)];
      const StepState& st = next_states[static_cast<std::size_t>(c.hyp)];
      hyp.logp_sum = c.score;
      hyp.steps_taken += 1;
      hyp.trace.alphas.push_back(st.alpha.val().col(0));
      if (c.token == Vocabulary::kStop) {
        hyp.done = true;
        finished.push_back(std::move(hyp));
        continue;
      }
      hyp.trace.ids.push_back(c.token);
      hyp.state_slot = static_cast<int>(survivor_states.size());
      survivor_states.push_back(st);
      survivors.push_back(std::move(hyp));
    }
    active = std::move(survivors);
    states = std::move(survivor_states);
  }

  for (Hyp& hyp : active) finished.push_back(std::move(hyp));
  if (finished.empty()) throw std::logic_error("decode: no hypotheses");
  const Hyp* best = &finished[0];
  double best_score = best->logp_sum / std::max(1, best->steps_taken);
  for (const Hyp& h : finished) {
    const double s = h.logp_sum / std::max(1, h.steps_taken);
    if (s > best_score) {
      best = &h;
      best_score = s;
    }
  }
  Decoded out = best->trace;
  out.mean_logp = best_score;
  if (ctx.use_reader) out.epsilon = ctx.eps.val().col(0);
  out.beta_hat = beta_values;
  return out;
}

std::vector<std::string> ids_to_tokens(const std::vector<int>& ids,
                                       const Vocabulary& vocab,
                                       const EncodedExample& exe) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id < vocab.size()) {
      out.push_back(vocab.token(id));
    } else {
      const int j = id - vocab.size();
      if (j < 0 || j >= exe.n_oov()) throw std::out_of_range("extended id out of range");
      out.push_back(exe.oov_tokens[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

}  // namespace rasg
