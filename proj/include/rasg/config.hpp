#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace rasg {

enum class Ablation { kNone, kDm, kG, kGt, kGtd };
enum class Baseline { kNone, kS2s, kS2sr };

Ablation ablation_from_string(const std::string& s);
Baseline baseline_from_string(const std::string& s);
std::string to_string(Ablation a);
std::string to_string(Baseline b);

struct TrainingConfig {
  int embedding_dim = 64;   // 256 at paper scale
  int hidden_dim = 32;      // per direction; 2H is the state size everywhere
  int k = 5;                // attention history window of the supervisor
  double phi = 0.5;         // adversarial discount
  int beam_size = 5;
  double learning_rate = 0.15;
  double accum_init = 0.1;
  double init_scale = 0.05;  // uniform init range for weights
  double dropout = 0.0;      // encoder output dropout, off by default
  int batch_size = 16;
  int max_steps = 1000;
  std::uint64_t seed = 1;
  int eval_every = 500;
  int max_decode_len = 40;
  int vocab_size = 5000;
  int n_filters = 64;
  int filter_width = 3;
  int goal_dim = 0;  // 0 means 2H
  int disc_ratio = 1;
  std::string ablation = "none";  // none|dm|g|gt|gtd
  std::string baseline = "none";  // none|s2s|s2sr
  double s2sr_mix = 1.0;
  double weight_g = 1.0;
  double weight_d = 1.0;
  double weight_cg = 1.0;
  bool couple_salience = false;      // let summary loss reach the denoiser through epsilon
  bool cosine_alignment = false;     // normalized embedding dots in gamma
  bool stop_adv_encoder_grad = false;  // cut adversarial gradient at attention weights
  bool renormalize_focus = false;      // nu_t divides by min(t,k) instead of k

  Ablation ablation_kind() const { return ablation_from_string(ablation); }
  Baseline baseline_kind() const { return baseline_from_string(baseline); }
  int effective_goal_dim() const { return goal_dim > 0 ? goal_dim : 2 * hidden_dim; }

  void validate() const;

  std::string to_json() const;
  static TrainingConfig from_json(const std::string& text);
  static TrainingConfig load(const std::filesystem::path& path);
  std::string hash() const;
};

}  // namespace rasg
