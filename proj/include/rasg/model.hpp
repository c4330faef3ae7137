#pragma once

#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "rasg/config.hpp"
#include "rasg/corpus.hpp"
#include "rasg/graph.hpp"
#include "rasg/layers.hpp"

namespace rasg {

// RASG: pointer-generator summarizer steered by comment-derived reader
// attention, an adversarial supervisor, and a goal tracker. One instance owns
// every parameter block; ablations and baselines only change which blocks the
// forward graph touches.
class Model {
 public:
  Model(const TrainingConfig& cfg, int vocab_size);

  const TrainingConfig& config() const { return cfg_; }
  int vocab_size() const { return vocab_size_; }

  std::vector<ad::Param*> parameters();
  std::vector<const ad::Param*> parameters() const;
  std::vector<ad::Param*> generation_parameters();
  std::vector<ad::Param*> discriminator_parameters();
  ad::Param& param(const std::string& name);

  bool has_reader() const;
  bool has_denoiser() const;
  bool has_gap_content() const;
  bool has_goal_tracker() const;
  bool has_discriminator() const;

  struct DocState {
    std::vector<ad::Var> states;  // (2H x 1) each
    ad::Var matrix;               // (2H x T^d)
    ad::Var final;                // (2H x 1)
  };
  DocState encode_document(ad::Tape& t, const std::vector<int>& doc_base);
  std::vector<std::vector<ad::Var>> encode_comments(
      ad::Tape& t, const std::vector<std::vector<int>>& comments);

  // beta_hat column (T^c x 1) from mean-pooled comment states and the final
  // document state.
  ad::Var comment_salience(ad::Tape& t,
                           const std::vector<std::vector<ad::Var>>& comment_states,
                           ad::Var doc_final);
  // Binary cross entropy against 0/1 labels, summed over comments.
  ad::Var denoising_loss_sum(ad::Tape& t, ad::Var beta_hat,
                             const std::vector<int>& labels);

  // epsilon over document positions; beta_hat may be invalid (no comments ->
  // uniform) or an all-ones input (denoiser ablated).
  ad::Var reader_attention(ad::Tape& t, const EncodedExample& exe, ad::Var beta_hat);

  ad::Var embed_tokens(ad::Tape& t, const std::vector<int>& ids);

  struct TrainGraph {
    ad::Var nll_sum;      // -sum_t log P_t(y_t)
    int n_steps = 0;
    ad::Var denoise_sum;  // invalid when unused
    int n_comments = 0;
    ad::Var adv_gen;      // invalid when unused
    ad::Var adv_disc;     // invalid except on discriminator passes
    Eigen::VectorXd epsilon;   // empty when reader attention is off
    Eigen::VectorXd beta_hat;  // empty when denoiser is off
    Eigen::VectorXd nu_last;
    std::vector<double> tau_m;
    std::vector<Eigen::VectorXd> alphas;
  };
  // discriminator_pass: detaches m_t/u ahead of the feature extractor and
  // skips the projection head; only adv_disc is produced.
  TrainGraph build_graph(ad::Tape& t, const EncodedExample& exe,
                         bool discriminator_pass, std::uint64_t dropout_seed = 0);

  struct Decoded {
    std::vector<int> ids;  // extended ids, STOP stripped
    double mean_logp = 0.0;
    std::vector<Eigen::VectorXd> alphas;  // one per decoding step taken
    Eigen::VectorXd epsilon;
    Eigen::VectorXd beta_hat;
  };
  Decoded decode(const EncodedExample& exe, int beam_size, int max_len);

  // Salience forward pass only; empty when the model has no denoiser or the
  // example has no comments.
  Eigen::VectorXd predict_salience(const EncodedExample& exe);

  void init_params(std::uint64_t seed);

 private:
  struct StepCtx;
  struct StepState;
  StepState initial_state(ad::Tape& t, const StepCtx& ctx);
  StepState advance(ad::Tape& t, StepCtx& ctx, const StepState& prev, int y_prev,
                    bool discriminator_pass, bool want_projection);

  ad::Param& add_param(const std::string& name, int rows, int cols);
  std::vector<ad::Var> encode_sequence(ad::Tape& t, ad::Var emb, ad::Param& wf,
                                       ad::Param& bf, ad::Param& wb, ad::Param& bb);

  TrainingConfig cfg_;
  int vocab_size_;
  std::vector<std::unique_ptr<ad::Param>> params_;
  std::vector<std::string> gen_names_;
  std::vector<std::string> disc_names_;
};

// Decoded extended ids back to tokens (extended ids index exe.oov_tokens).
std::vector<std::string> ids_to_tokens(const std::vector<int>& ids,
                                       const Vocabulary& vocab,
                                       const EncodedExample& exe);

}  // namespace rasg
