#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace rasg {

// One document / comments / summary record. All fields are token sequences.
struct Example {
  std::vector<std::string> document;
  std::vector<std::vector<std::string>> comments;
  std::vector<std::string> summary;
  std::vector<int> comment_labels;  // empty or one 0/1 per comment
};

using TokenSet = std::set<std::string>;

// Lowercases and splits on whitespace; punctuation characters become
// standalone tokens.
std::vector<std::string> tokenize(const std::string& text);

bool is_punct_token(const std::string& token);

const TokenSet& default_stopwords();
TokenSet load_stopwords(const std::filesystem::path& path);

// beta_i = 1 iff comment i and the summary share at least one token after
// dropping stopwords and punctuation tokens.
std::vector<int> label_comments(const std::vector<std::string>& summary,
                                const std::vector<std::vector<std::string>>& comments,
                                const TokenSet& stopwords = default_stopwords());

// Synthetic corpus: every example has one main aspect realized by the
// summary, distractor aspects in the document, and comments that either
// discuss the main aspect (helpful) or not (noise).
struct GeneratorConfig {
  int n_aspects = 5;
  int comments_mean = 9;
  int comment_jitter = 3;
  double noise_fraction = 0.3;
  double distractor_fraction = 0.5;  // portion of noise comments about a distractor aspect
  int entity_pool = 60;
  int number_pool = 400;
  bool compact = false;  // short templates for small-budget experiments
  double train_frac = 0.8;
  double dev_frac = 0.1;

  std::string to_json() const;
  static GeneratorConfig from_json(const std::string& text);
  std::string hash() const;
};

std::vector<Example> make_synthetic_corpus(std::uint64_t seed, int n_examples,
                                           const GeneratorConfig& config);

// Token <-> id map with fixed reserved ids.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kStart = 2;
  static constexpr int kStop = 3;
  static constexpr int kReserved = 4;

  // Keeps the most frequent tokens, ties broken lexicographically.
  // max_size bounds the total table size including reserved ids.
  static Vocabulary build(const std::vector<Example>& corpus, int max_size);

  int id(const std::string& token) const;  // kUnk when absent
  const std::string& token(int id) const;
  bool contains(const std::string& token) const;
  int size() const { return static_cast<int>(id_to_token_.size()); }

  std::string to_json() const;
  static Vocabulary from_json(const std::string& text);

 private:
  Vocabulary();
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
};

// Id-encoded example plus the per-example vocabulary extension used by the
// copy mechanism: distinct document OOV tokens get ids V, V+1, ...
struct EncodedExample {
  std::vector<int> doc_ext;                 // base id or extended id per position
  std::vector<int> doc_base;                // OOV -> kUnk, for embedding lookups
  std::vector<std::vector<int>> comments;   // base ids
  std::vector<int> summary_ext;             // extended ids where copyable, else kUnk
  std::vector<int> labels;                  // empty if absent
  std::vector<std::string> oov_tokens;      // extended id V+j -> token

  int n_oov() const { return static_cast<int>(oov_tokens.size()); }
};

EncodedExample encode_example(const Example& example, const Vocabulary& vocab);

// JSONL round trip. One object per line with fields document, comments,
// summary and optional comment_labels.
std::string corpus_to_jsonl(const std::vector<Example>& corpus);
std::vector<Example> corpus_from_jsonl(const std::string& text);
void save_corpus(const std::filesystem::path& path, const std::vector<Example>& corpus);
std::vector<Example> load_corpus(const std::filesystem::path& path);

}  // namespace rasg
