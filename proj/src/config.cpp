#include "rasg/config.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

#include "rasg/util.hpp"

using json = nlohmann::json;

namespace rasg {

Ablation ablation_from_string(const std::string& s) {
  if (s == "none") return Ablation::kNone;
  if (s == "dm") return Ablation::kDm;
  if (s == "g") return Ablation::kG;
  if (s == "gt") return Ablation::kGt;
  if (s == "gtd") return Ablation::kGtd;
  throw std::invalid_argument("unknown ablation: " + s);
}

Baseline baseline_from_string(const std::string& s) {
  if (s == "none") return Baseline::kNone;
  if (s == "s2s") return Baseline::kS2s;
  if (s == "s2sr") return Baseline::kS2sr;
  throw std::invalid_argument("unknown baseline: " + s);
}

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::kNone: return "none";
    case Ablation::kDm: return "dm";
    case Ablation::kG: return "g";
    case Ablation::kGt: return "gt";
    case Ablation::kGtd: return "gtd";
  }
  return "none";
}

std::string to_string(Baseline b) {
  switch (b) {
    case Baseline::kNone: return "none";
    case Baseline::kS2s: return "s2s";
    case Baseline::kS2sr: return "s2sr";
  }
  return "none";
}

void TrainingConfig::validate() const {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (phi <= 0.0 || phi > 1.0) throw std::invalid_argument("phi must be in (0,1]");
  if (beam_size < 1) throw std::invalid_argument("beam_size must be >= 1");
  if (embedding_dim < 1 || hidden_dim < 1) throw std::invalid_argument("bad dimensions");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (n_filters < 1) throw std::invalid_argument("n_filters must be >= 1");
  if (filter_width < 1 || filter_width > 2 * hidden_dim) {
    throw std::invalid_argument("filter_width must be in [1, 2H]");
  }
  if (disc_ratio < 0) throw std::invalid_argument("disc_ratio must be >= 0");
  ablation_from_string(ablation);
  baseline_from_string(baseline);
  if (baseline_kind() != Baseline::kNone && ablation_kind() != Ablation::kNone) {
    throw std::invalid_argument("--baseline and --ablation are mutually exclusive");
  }
}

std::string TrainingConfig::to_json() const {
  json j;
  j["embedding_dim"] = embedding_dim;
  j["hidden_dim"] = hidden_dim;
  j["k"] = k;
  j["phi"] = phi;
  j["beam_size"] = beam_size;
  j["learning_rate"] = learning_rate;
  j["accum_init"] = accum_init;
  j["init_scale"] = init_scale;
  j["dropout"] = dropout;
  j["batch_size"] = batch_size;
  j["max_steps"] = max_steps;
  j["seed"] = seed;
  j["eval_every"] = eval_every;
  j["max_decode_len"] = max_decode_len;
  j["vocab_size"] = vocab_size;
  j["n_filters"] = n_filters;
  j["filter_width"] = filter_width;
  j["goal_dim"] = goal_dim;
  j["disc_ratio"] = disc_ratio;
  j["ablation"] = ablation;
  j["baseline"] = baseline;
  j["s2sr_mix"] = s2sr_mix;
  j["weight_g"] = weight_g;
  j["weight_d"] = weight_d;
  j["weight_cg"] = weight_cg;
  j["couple_salience"] = couple_salience;
  j["cosine_alignment"] = cosine_alignment;
  j["stop_adv_encoder_grad"] = stop_adv_encoder_grad;
  j["renormalize_focus"] = renormalize_focus;
  return j.dump(2);
}

TrainingConfig TrainingConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  TrainingConfig c;
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.k = j.value("k", c.k);
  c.phi = j.value("phi", c.phi);
  c.beam_size = j.value("beam_size", c.beam_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.accum_init = j.value("accum_init", c.accum_init);
  c.init_scale = j.value("init_scale", c.init_scale);
  c.dropout = j.value("dropout", c.dropout);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.seed = j.value("seed", c.seed);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.max_decode_len = j.value("max_decode_len", c.max_decode_len);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.n_filters = j.value("n_filters", c.n_filters);
  c.filter_width = j.value("filter_width", c.filter_width);
  c.goal_dim = j.value("goal_dim", c.goal_dim);
  c.disc_ratio = j.value("disc_ratio", c.disc_ratio);
  c.ablation = j.value("ablation", c.ablation);
  c.baseline = j.value("baseline", c.baseline);
  c.s2sr_mix = j.value("s2sr_mix", c.s2sr_mix);
  c.weight_g = j.value("weight_g", c.weight_g);
  c.weight_d = j.value("weight_d", c.weight_d);
  c.weight_cg = j.value("weight_cg", c.weight_cg);
  c.couple_salience = j.value("couple_salience", c.couple_salience);
  c.cosine_alignment = j.value("cosine_alignment", c.cosine_alignment);
  c.stop_adv_encoder_grad = j.value("stop_adv_encoder_grad", c.stop_adv_encoder_grad);
  c.renormalize_focus = j.value("renormalize_focus", c.renormalize_focus);
  return c;
}

TrainingConfig TrainingConfig::load(const std::filesystem::path& path) {
  return from_json(read_file(path));
}

std::string TrainingConfig::hash() const { return sha256_hex(to_json()); }

}  // namespace rasg
