#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "acrodis/textproc.hpp"

namespace acrodis {

namespace detail {

struct MatchBlock {
  std::size_t a_pos = 0;
  std::size_t b_pos = 0;
  std::size_t len = 0;
};

/// Longest common substring of a and b via a rolling DP row. Ties resolve to
/// the smallest start in a, then the smallest start in b — this tie-break is
/// part of the sequence_ratio contract.
inline MatchBlock longest_common_block(std::string_view a, std::string_view b) {
  MatchBlock best;
  if (a.empty() || b.empty()) return best;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (a[i] == b[j]) {
        cur[j + 1] = prev[j] + 1;
        if (cur[j + 1] > best.len) {
          best.len = cur[j + 1];
          best.a_pos = i + 1 - best.len;
          best.b_pos = j + 1 - best.len;
        }
      } else {
        cur[j + 1] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

/// Total matched length of the recursive Ratcliff/Obershelp decomposition:
/// take the longest common block, then recurse on the pieces to its left and
/// to its right.
inline std::size_t gestalt_match_total(std::string_view a, std::string_view b) {
  MatchBlock block = longest_common_block(a, b);
  if (block.len == 0) return 0;
  std::size_t total = block.len;
  total += gestalt_match_total(a.substr(0, block.a_pos), b.substr(0, block.b_pos));
  total += gestalt_match_total(a.substr(block.a_pos + block.len),
                               b.substr(block.b_pos + block.len));
  return total;
}

}  // namespace detail

/// Ratcliff/Obershelp similarity 2M / (|a| + |b|), the algorithm behind
/// Python's difflib ratio, computed on normalize()d inputs. Two empty
/// strings compare equal by convention.
inline double sequence_ratio(std::string_view a, std::string_view b) {
  const std::string na = normalize(a);
  const std::string nb = normalize(b);
  if (na.empty() && nb.empty()) return 1.0;
  const std::size_t m = detail::gestalt_match_total(na, nb);
  return 2.0 * static_cast<double>(m) / static_cast<double>(na.size() + nb.size());
}

/// Prediction verification: the predicted expansion counts as correct when
/// its sequence similarity to the gold expansion reaches the threshold.
inline bool is_correct(std::string_view predicted, std::string_view gold,
                       double threshold = 0.9) {
  return sequence_ratio(predicted, gold) >= threshold;
}

}  // namespace acrodis
