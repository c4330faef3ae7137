#pragma once

#include <string>
#include <vector>

namespace rasg {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Clipped n-gram overlap. Empty n-gram sets on either side score zero.
RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference, int n);

// Longest common subsequence.
RougeScore rouge_l(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference);

int lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

// First sentence up to a terminal punctuation token (". ! ?"); skips leading
// punctuation-only segments; whole document when no boundary exists.
std::vector<std::string> lead1(const std::vector<std::string>& document);

}  // namespace rasg
