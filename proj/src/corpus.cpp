#include "rasg/corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "rasg/rng.hpp"
#include "rasg/util.hpp"

using json = nlohmann::json;

namespace rasg {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (unsigned char ch : text) {
    if (std::isspace(ch)) {
      flush();
    } else if (std::ispunct(ch)) {
      flush();
      out.push_back(std::string(1, static_cast<char>(ch)));
    } else {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    }
  }
  flush();
  return out;
}

bool is_punct_token(const std::string& token) {
  if (token.empty()) return true;
  for (unsigned char ch : token) {
    if (!std::ispunct(ch)) return false;
  }
  return true;
}

const TokenSet& default_stopwords() {
  static const TokenSet kStopwords = {
      "a",    "an",   "the",  "this", "that",  "these", "those", "i",
      "you",  "he",   "she",  "it",   "we",    "they",  "is",    "are",
      "was",  "were", "be",   "been", "am",    "do",    "does",  "did",
      "to",   "of",   "in",   "on",   "at",    "for",   "with",  "and",
      "or",   "but",  "not",  "no",   "so",    "if",    "then",  "my",
      "your", "its",  "his",  "her",  "our",   "their", "as",    "by",
      "from", "into", "over", "out",  "up",    "down",  "about", "after",
      "before"};
  return kStopwords;
}

TokenSet load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stopword file: " + path.string());
  TokenSet out;
  std::string word;
  while (in >> word) out.insert(word);
  return out;
}

std::vector<int> label_comments(const std::vector<std::string>& summary,
                                const std::vector<std::vector<std::string>>& comments,
                                const TokenSet& stopwords) {
  TokenSet content;
  for (const std::string& tok : summary) {
    if (!is_punct_token(tok) && stopwords.count(tok) == 0) content.insert(tok);
  }
  std::vector<int> labels;
  labels.reserve(comments.size());
  for (const auto& comment : comments) {
    int label = 0;
    for (const std::string& tok : comment) {
      if (content.count(tok) != 0) {
        label = 1;
        break;
      }
    }
    labels.push_back(label);
  }
  return labels;
}

namespace {

const std::vector<std::string>& verb_pool() {
  static const std::vector<std::string> kVerbs = {
      "acquires", "launches", "recalls",  "expands",  "sues",     "approves",
      "rejects",  "unveils",  "delays",   "cancels",  "funds",    "tests",
      "ships",    "builds",   "wins",     "postpones", "secures", "denies",
      "confirms", "abandons"};
  return kVerbs;
}

const std::vector<std::string>& object_pool() {
  static const std::vector<std::string> kObjects = {
      "factory",  "satellite", "drug",     "engine",   "network",  "tablet",
      "vaccine",  "pipeline",  "stadium",  "refinery", "turbine",  "chipset",
      "airline",  "foundry",   "reactor",  "freighter", "orchard", "quarry",
      "brewery",  "shipyard",  "studio",   "terminal", "observatory", "prototype"};
  return kObjects;
}

const std::vector<std::string>& opinion_pool() {
  static const std::vector<std::string> kOpinions = {
      "great",    "terrible", "wise",   "risky",    "exciting", "doubtful",
      "brilliant", "shady",   "promising", "reckless", "bold",  "clever",
      "foolish",  "solid",    "weak",   "smart"};
  return kOpinions;
}

const std::vector<std::string>& chatter_noun_pool() {
  static const std::vector<std::string> kNouns = {
      "lunch",    "weather",  "coffee",  "traffic",  "homework", "garden",
      "bicycle",  "playlist", "recipe",  "puppy",    "holiday",  "laundry",
      "haircut",  "neighbor", "grandma", "backyard", "sofa",     "pancake",
      "jogging",  "crossword", "kitten", "balcony",  "scarf",    "teapot",
      "umbrella", "notebook", "camping", "painting", "chess",    "piano"};
  return kNouns;
}

const std::vector<std::string>& chatter_adj_pool() {
  static const std::vector<std::string> kAdjs = {
      "sunny",  "rainy", "tasty",   "boring", "cozy",  "noisy", "messy",
      "quiet",  "chilly", "warm",   "slow",   "fast",  "crowded", "empty",
      "fresh",  "stale"};
  return kAdjs;
}

std::string make_entity(int i) {
  static const std::vector<std::string> kSyllables = {
      "vor", "tek", "min", "lor", "zan", "bel", "cru", "dex", "fal", "gor",
      "hul", "jin", "kov", "lum", "mar", "nix", "oru", "pel", "qua", "rud",
      "sil", "tor", "ule", "vex", "wol", "xen", "yal", "zem"};
  const int n = static_cast<int>(kSyllables.size());
  if (i < n * n) return kSyllables[i / n] + kSyllables[i % n];
  const int j = i - n * n;
  return kSyllables[(j / (n * n)) % n] + kSyllables[(j / n) % n] + kSyllables[j % n];
}

std::string make_number(int i) { return std::to_string(10 + 3 * i); }

struct Aspect {
  std::string entity;
  std::string verb;
  std::string object;
  std::string number;
};

// Pick m distinct indices out of [0, pool).
std::vector<int> pick_distinct(Rng& rng, int pool, int m) {
  std::vector<int> out;
  out.reserve(m);
  while (static_cast<int>(out.size()) < m) {
    const int v = rng.uniform_int(0, pool - 1);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

std::vector<std::string> doc_sentence(Rng& rng, const Aspect& a, bool compact) {
  if (compact) {
    switch (rng.uniform_int(0, 2)) {
      case 0:
        return {"the", a.entity, "firm", a.verb, "a", a.object, "for", a.number, "million", "."};
      case 1:
        return {a.entity, "group", a.verb, "its", a.object, "at", a.number, "million", "."};
      default:
        return {"the", a.entity, "company", a.verb, "the", a.object, "worth", a.number, "million", "."};
    }
  }
  switch (rng.uniform_int(0, 2)) {
    case 0:
      return {"the",  a.entity, "company", a.verb,   "the",    "new",    a.object,
              "worth", a.number, "million", "dollars", "this",  "week",  "."};
    case 1:
      return {"on",    "monday", "the",    a.entity, "group",  "officially", a.verb,
              "its",   a.object, "valued", "at",     a.number, "million",    "."};
    default:
      return {"sources", "report", "the",    a.entity, "firm",    a.verb,   "one",
              "major",   a.object, "costing", a.number, "million", "overall", "."};
  }
}

std::vector<std::string> summary_sentence(Rng& rng, const Aspect& a, bool compact) {
  if (compact) {
    switch (rng.uniform_int(0, 1)) {
      case 0:
        return {a.entity, a.verb, a.object, "for", a.number, "million"};
      default:
        return {a.entity, a.verb, "the", a.object, "at", a.number, "million"};
    }
  }
  switch (rng.uniform_int(0, 1)) {
    case 0:
      return {"report", "confirms", a.entity,  "company", a.verb,   "the",
              a.object, "worth",    a.number,  "million", "dollars", "overall",
              "today"};
    default:
      return {"officials", "confirm", a.entity, "group",   a.verb,    "one",
              "major",     a.object,  "valued", "at",      a.number,  "million",
              "dollars",   "today"};
  }
}

std::vector<std::string> helpful_comment(Rng& rng, const Aspect& a, bool compact) {
  const auto& op = opinion_pool();
  const std::string o1 = op[rng.uniform_int(0, static_cast<int>(op.size()) - 1)];
  const std::string o2 = op[rng.uniform_int(0, static_cast<int>(op.size()) - 1)];
  if (compact) {
    switch (rng.uniform_int(0, 2)) {
      case 0:
        return {o1, "that", a.entity, a.verb, a.object};
      case 1:
        return {"i", "think", a.entity, a.object, "deal", "is", o1};
      default:
        return {a.entity, a.object, "news", "sounds", o1};
    }
  }
  switch (rng.uniform_int(0, 2)) {
    case 0:
      return {"i",  "think", "the", a.entity,  a.object, "deal", "is",   o1,
              "and", o2,     "honestly", "speaking", "my", "friends", "agree"};
    case 1:
      return {o1,   "move", "by",  a.entity, "everyone", "here", "supports",
              "the", a.object, "plan", "strongly", "now", "indeed"};
    default:
      return {"wow", "the", a.entity, "news", "sounds", o1, "to", "me",
              "and", "the", a.object, "plan", "seems",  o2, "too"};
  }
}

std::vector<std::string> chatter_comment(Rng& rng, bool compact) {
  const auto& nouns = chatter_noun_pool();
  const auto& adjs = chatter_adj_pool();
  const std::string n1 = nouns[rng.uniform_int(0, static_cast<int>(nouns.size()) - 1)];
  const std::string n2 = nouns[rng.uniform_int(0, static_cast<int>(nouns.size()) - 1)];
  const std::string a1 = adjs[rng.uniform_int(0, static_cast<int>(adjs.size()) - 1)];
  const std::string a2 = adjs[rng.uniform_int(0, static_cast<int>(adjs.size()) - 1)];
  if (compact) {
    return {"my", n1, "felt", a1, "yesterday", "really"};
  }
  return {"my", n1, "was", a1, "yesterday", "and",  "the", n2,
          "felt", a2, "all", "afternoon", "somehow", "again"};
}

}  // namespace

std::string GeneratorConfig::to_json() const {
  json j;
  j["n_aspects"] = n_aspects;
  j["comments_mean"] = comments_mean;
  j["comment_jitter"] = comment_jitter;
  j["noise_fraction"] = noise_fraction;
  j["distractor_fraction"] = distractor_fraction;
  j["entity_pool"] = entity_pool;
  j["number_pool"] = number_pool;
  j["compact"] = compact;
  j["train_frac"] = train_frac;
  j["dev_frac"] = dev_frac;
  return j.dump(2);
}

GeneratorConfig GeneratorConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  GeneratorConfig c;
  c.n_aspects = j.value("n_aspects", c.n_aspects);
  c.comments_mean = j.value("comments_mean", c.comments_mean);
  c.comment_jitter = j.value("comment_jitter", c.comment_jitter);
  c.noise_fraction = j.value("noise_fraction", c.noise_fraction);
  c.distractor_fraction = j.value("distractor_fraction", c.distractor_fraction);
  c.entity_pool = j.value("entity_pool", c.entity_pool);
  c.number_pool = j.value("number_pool", c.number_pool);
  c.compact = j.value("compact", c.compact);
  c.train_frac = j.value("train_frac", c.train_frac);
  c.dev_frac = j.value("dev_frac", c.dev_frac);
  return c;
}

std::string GeneratorConfig::hash() const { return sha256_hex(to_json()); }

std::vector<Example> make_synthetic_corpus(std::uint64_t seed, int n_examples,
                                           const GeneratorConfig& config) {
  if (config.n_aspects < 2) {
    throw std::invalid_argument("generator config needs at least 2 aspects");
  }
  if (n_examples < 0) throw std::invalid_argument("negative corpus size");
  if (config.noise_fraction < 0.0 || config.noise_fraction > 1.0) {
    throw std::invalid_argument("noise_fraction outside [0,1]");
  }
  const int n_verbs = static_cast<int>(verb_pool().size());
  const int n_objects = static_cast<int>(object_pool().size());
  if (config.n_aspects > n_verbs || config.n_aspects > n_objects ||
      config.n_aspects > config.entity_pool || config.n_aspects > config.number_pool) {
    throw std::invalid_argument("n_aspects exceeds a template pool");
  }

  Rng rng(Rng::mix(seed, 0x5261534721ULL));
  std::vector<Example> corpus;
  corpus.reserve(n_examples);
  for (int n = 0; n < n_examples; ++n) {
    const auto ent = pick_distinct(rng, config.entity_pool, config.n_aspects);
    const auto vrb = pick_distinct(rng, n_verbs, config.n_aspects);
    const auto obj = pick_distinct(rng, n_objects, config.n_aspects);
    const auto num = pick_distinct(rng, config.number_pool, config.n_aspects);
    std::vector<Aspect> aspects(config.n_aspects);
    for (int i = 0; i < config.n_aspects; ++i) {
      aspects[i] = {make_entity(ent[i]), verb_pool()[vrb[i]], object_pool()[obj[i]],
                    make_number(num[i])};
    }
    const int main_idx = rng.uniform_int(0, config.n_aspects - 1);

    Example ex;
    for (const Aspect& a : aspects) {
      const auto sent = doc_sentence(rng, a, config.compact);
      ex.document.insert(ex.document.end(), sent.begin(), sent.end());
    }
    ex.summary = summary_sentence(rng, aspects[main_idx], config.compact);

    const int lo = std::max(0, config.comments_mean - config.comment_jitter);
    const int hi = config.comments_mean + config.comment_jitter;
    const int n_comments = rng.uniform_int(lo, hi);
    for (int ci = 0; ci < n_comments; ++ci) {
      const bool helpful = rng.uniform() >= config.noise_fraction;
      if (helpful) {
        ex.comments.push_back(helpful_comment(rng, aspects[main_idx], config.compact));
      } else if (config.n_aspects >= 2 && rng.uniform() < config.distractor_fraction) {
        int di = rng.uniform_int(0, config.n_aspects - 2);
        if (di >= main_idx) ++di;
        ex.comments.push_back(helpful_comment(rng, aspects[di], config.compact));
      } else {
        ex.comments.push_back(chatter_comment(rng, config.compact));
      }
    }
    ex.comment_labels = label_comments(ex.summary, ex.comments);
    corpus.push_back(std::move(ex));
  }
  return corpus;
}

Vocabulary::Vocabulary() {
  id_to_token_ = {"<pad>", "<unk>", "<s>", "</s>"};
  for (int i = 0; i < kReserved; ++i) token_to_id_[id_to_token_[i]] = i;
}

Vocabulary Vocabulary::build(const std::vector<Example>& corpus, int max_size) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  if (max_size <= kReserved) throw std::invalid_argument("max_size too small");
  std::map<std::string, long long> counts;
  auto add = [&](const std::vector<std::string>& toks) {
    for (const auto& t : toks) ++counts[t];
  };
  for (const Example& ex : corpus) {
    add(ex.document);
    add(ex.summary);
    for (const auto& c : ex.comments) add(c);
  }
  std::vector<std::pair<std::string, long long>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (const auto& [tok, cnt] : items) {
    if (v.size() >= max_size) break;
    v.token_to_id_[tok] = v.size();
    v.id_to_token_.push_back(tok);
  }
  return v;
}

int Vocabulary::id(const std::string& token) const {
  const auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("token id out of range");
  return id_to_token_[id];
}

bool Vocabulary::contains(const std::string& token) const {
  return token_to_id_.count(token) != 0;
}

std::string Vocabulary::to_json() const {
  json j;
  j["tokens"] = std::vector<std::string>(id_to_token_.begin() + kReserved, id_to_token_.end());
  return j.dump();
}

Vocabulary Vocabulary::from_json(const std::string& text) {
  const json j = json::parse(text);
  Vocabulary v;
  for (const auto& tok : j.at("tokens")) {
    const std::string t = tok.get<std::string>();
    v.token_to_id_[t] = v.size();
    v.id_to_token_.push_back(t);
  }
  return v;
}

EncodedExample encode_example(const Example& example, const Vocabulary& vocab) {
  EncodedExample enc;
  std::unordered_map<std::string, int> oov_ids;
  for (const std::string& tok : example.document) {
    const int base = vocab.id(tok);
    enc.doc_base.push_back(base);
    if (base != Vocabulary::kUnk || vocab.contains(tok)) {
      enc.doc_ext.push_back(base);
    } else {
      const auto it = oov_ids.find(tok);
      int ext;
      if (it == oov_ids.end()) {
        ext = vocab.size() + static_cast<int>(enc.oov_tokens.size());
        oov_ids[tok] = ext;
        enc.oov_tokens.push_back(tok);
      } else {
        ext = it->second;
      }
      enc.doc_ext.push_back(ext);
    }
  }
  for (const auto& comment : example.comments) {
    std::vector<int> ids;
    ids.reserve(comment.size());
    for (const std::string& tok : comment) ids.push_back(vocab.id(tok));
    enc.comments.push_back(std::move(ids));
  }
  for (const std::string& tok : example.summary) {
    const int base = vocab.id(tok);
    if (base != Vocabulary::kUnk || vocab.contains(tok)) {
      enc.summary_ext.push_back(base);
    } else {
      const auto it = oov_ids.find(tok);
      enc.summary_ext.push_back(it == oov_ids.end() ? Vocabulary::kUnk : it->second);
    }
  }
  enc.labels = example.comment_labels;
  return enc;
}

namespace {

std::string join_tokens(const std::vector<std::string>& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out.push_back(' ');
    out += toks[i];
  }
  return out;
}

}  // namespace

std::string corpus_to_jsonl(const std::vector<Example>& corpus) {
  std::string out;
  for (const Example& ex : corpus) {
    json j;
    j["document"] = join_tokens(ex.document);
    std::vector<std::string> comments;
    comments.reserve(ex.comments.size());
    for (const auto& c : ex.comments) comments.push_back(join_tokens(c));
    j["comments"] = comments;
    j["summary"] = join_tokens(ex.summary);
    if (!ex.comment_labels.empty()) j["comment_labels"] = ex.comment_labels;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<Example> corpus_from_jsonl(const std::string& text) {
  std::vector<Example> corpus;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    Example ex;
    ex.document = tokenize(j.at("document").get<std::string>());
    for (const auto& c : j.at("comments")) ex.comments.push_back(tokenize(c.get<std::string>()));
    ex.summary = tokenize(j.at("summary").get<std::string>());
    if (j.contains("comment_labels")) {
      ex.comment_labels = j.at("comment_labels").get<std::vector<int>>();
      if (ex.comment_labels.size() != ex.comments.size()) {
        throw std::runtime_error("comment_labels count mismatch");
      }
    }
    if (ex.document.empty() || ex.summary.empty()) {
      throw std::runtime_error("corpus record with empty document or summary");
    }
    corpus.push_back(std::move(ex));
  }
  return corpus;
}

void save_corpus(const std::filesystem::path& path, const std::vector<Example>& corpus) {
  write_file_atomic(path, corpus_to_jsonl(corpus));
}

std::vector<Example> load_corpus(const std::filesystem::path& path) {
  return corpus_from_jsonl(read_file(path));
}

}  // namespace rasg
