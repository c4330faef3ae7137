#include "rasg/rouge.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "rasg/corpus.hpp"

namespace rasg {

namespace {

RougeScore from_counts(double overlap, double n_cand, double n_ref) {
  RougeScore s;
  if (n_cand <= 0.0 || n_ref <= 0.0) return s;
  s.precision = overlap / n_cand;
  s.recall = overlap / n_ref;
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& toks,
                                                     int n) {
  std::map<std::vector<std::string>, int> counts;
  if (static_cast<int>(toks.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    ++counts[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  }
  return counts;
}

}  // namespace

RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference, int n) {
  if (n < 1) throw std::invalid_argument("rouge_n: n must be >= 1");
  const auto cand = ngram_counts(candidate, n);
  const auto ref = ngram_counts(reference, n);
  double n_cand = 0.0, n_ref = 0.0, overlap = 0.0;
  for (const auto& [g, c] : cand) n_cand += c;
  for (const auto& [g, c] : ref) n_ref += c;
  for (const auto& [g, c] : ref) {
    const auto it = cand.find(g);
    if (it != cand.end()) overlap += std::min(c, it->second);
  }
  return from_counts(overlap, n_cand, n_ref);
}

int lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

RougeScore rouge_l(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference) {
  const double l = lcs_length(candidate, reference);
  return from_counts(l, static_cast<double>(candidate.size()),
                     static_cast<double>(reference.size()));
}

std::vector<std::string> lead1(const std::vector<std::string>& document) {
  static const std::vector<std::string> kTerminals = {".", "!", "?"};
  std::vector<std::string> sentence;
  for (const std::string& tok : document) {
    const bool terminal =
        std::find(kTerminals.begin(), kTerminals.end(), tok) != kTerminals.end();
    if (terminal) {
      if (!sentence.empty()) return sentence;
      continue;  // skip leading punctuation-only segment
    }
    if (is_punct_token(tok) && sentence.empty()) continue;
    sentence.push_back(tok);
  }
  return sentence.empty() ? document : sentence;
}

}  // namespace rasg
