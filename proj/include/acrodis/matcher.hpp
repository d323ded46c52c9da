#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "acrodis/errors.hpp"
#include "acrodis/textproc.hpp"
#include "acrodis/types.hpp"

namespace acrodis {

struct MatchRuleConfig {
  bool allow_stopword_skips = true;
  /// Maximum words a candidate phrase may span. 0 means "derive from the
  /// acronym": twice its letter count, which leaves room for one stop word
  /// per matched initial while keeping the corpus scan linear.
  std::size_t max_candidate_words = 0;

  std::size_t effective_max_words(std::size_t acronym_len) const {
    return max_candidate_words ? max_candidate_words : 2 * acronym_len;
  }
};

/// One place in the corpus where a candidate expansion occurs. The document
/// slice [char_start, char_end) equals the matched surface text.
struct ExpansionOccurrence {
  std::string expansion;
  std::string doc_id;
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  bool operator==(const ExpansionOccurrence&) const = default;
};

namespace detail {

/// Matching core over pre-split words. Rule 1: each acronym character, in
/// order, matches the first letter of a distinct word, in order. Rule 3:
/// every word not consumed by rule 1 must be a stop word (applied at the
/// edges too, not just "in between"). Case-insensitive throughout. When
/// `anchored` is set the first and last words must be consumed by acronym
/// letters — the span-scanning semantics, where edge stop words belong to
/// the surrounding context rather than the expansion.
inline bool words_match_acronym(std::string_view acronym_lower,
                                const std::vector<std::string>& words,
                                const StopwordList& stopwords,
                                bool allow_stopword_skips, bool anchored = false) {
  const std::size_t n = acronym_lower.size();
  const std::size_t m = words.size();
  // reach[i][j]: the first i acronym chars can be produced by the first j
  // words with all unconsumed words so far being stop words.
  std::vector<char> reach((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> char& { return reach[i * (m + 1) + j]; };
  at(0, 0) = 1;
  for (std::size_t j = 0; j < m; ++j) {
    const std::string& word = words[j];
    const char first = ascii_lower(word[0]);
    const bool edge = anchored && (j == 0 || j + 1 == m);
    const bool skippable =
        !edge && allow_stopword_skips && stopwords.contains(ascii_lower_copy(word));
    for (std::size_t i = 0; i <= n; ++i) {
      if (!at(i, j)) continue;
      if (i < n && first == acronym_lower[i]) at(i + 1, j + 1) = 1;
      if (skippable) at(i, j + 1) = 1;
    }
  }
  return at(n, m) != 0;
}

struct WordSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

/// Segment a document body into words using the same three separators the
/// phrase splitter recognizes, so any word-window substring re-splits into
/// exactly the covered words.
inline std::vector<WordSpan> segment_words(std::string_view body) {
  std::vector<WordSpan> spans;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i == body.size() || is_phrase_separator(body[i])) {
      if (i > start) spans.push_back({start, i});
      start = i + 1;
    }
  }
  return spans;
}

}  // namespace detail

/// Decide whether a phrase is a valid expansion of an acronym under the
/// three matching rules. A single-word phrase equal to the acronym itself is
/// never an expansion.
inline bool matches_expansion(std::string_view acronym, std::string_view phrase,
                              const StopwordList& stopwords,
                              const MatchRuleConfig& cfg = {}) {
  const std::string acr = ascii_lower_copy(canonical_acronym(acronym));
  const std::vector<std::string> words = split_phrase_words(phrase);
  if (words.empty()) return false;
  if (words.size() > cfg.effective_max_words(acr.size())) return false;
  if (words.size() == 1 && ascii_lower_copy(words[0]) == acr) return false;
  return detail::words_match_acronym(acr, words, stopwords, cfg.allow_stopword_skips);
}

/// Span-level predicate used when scanning a corpus: like
/// matches_expansion, but the first and last words must be consumed by
/// acronym letters so a reported occurrence never drags edge stop words out
/// of the surrounding text into the expansion surface.
inline bool matches_expansion_anchored(std::string_view acronym, std::string_view phrase,
                                       const StopwordList& stopwords,
                                       const MatchRuleConfig& cfg = {}) {
  const std::string acr = ascii_lower_copy(canonical_acronym(acronym));
  const std::vector<std::string> words = split_phrase_words(phrase);
  if (words.empty()) return false;
  if (words.size() > cfg.effective_max_words(acr.size())) return false;
  if (words.size() == 1 && ascii_lower_copy(words[0]) == acr) return false;
  return detail::words_match_acronym(acr, words, stopwords, cfg.allow_stopword_skips,
                                     /*anchored=*/true);
}

/// Scan every document with a sliding window of up to
/// cfg.effective_max_words words and report each matching span. Overlapping
/// candidates at the same start resolve to the longest match; output is
/// sorted by (doc_id, char_start).
inline std::vector<ExpansionOccurrence> find_expansions(
    std::string_view acronym, const std::vector<Document>& corpus,
    const StopwordList& stopwords, const MatchRuleConfig& cfg = {}) {
  const std::string acr = canonical_acronym(acronym);
  const std::size_t max_words = cfg.effective_max_words(acr.size());
  std::vector<ExpansionOccurrence> out;
  for (const Document& doc : corpus) {
    const std::vector<detail::WordSpan> words = detail::segment_words(doc.body);
    for (std::size_t i = 0; i < words.size(); ++i) {
      const std::size_t j_hi = std::min(words.size() - 1, i + max_words - 1);
      for (std::size_t j = j_hi + 1; j-- > i;) {
        std::string_view span(doc.body.data() + words[i].start,
                              words[j].end - words[i].start);
        if (matches_expansion_anchored(acr, span, stopwords, cfg)) {
          out.push_back({std::string(span), doc.doc_id, words[i].start, words[j].end});
          break;  // longest match at this start wins
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const ExpansionOccurrence& a, const ExpansionOccurrence& b) {
    return std::tie(a.doc_id, a.char_start) < std::tie(b.doc_id, b.char_start);
  });
  return out;
}

/// Cut the context window around one occurrence: the requested character
/// budget on each side, clipped to the document and pulled inward to word
/// boundaries so no word is ever split. The window always covers the
/// occurrence itself.
namespace detail {
inline ContextWindow cut_window(const Document& doc, const ExpansionOccurrence& occ,
                                std::size_t before_chars, std::size_t after_chars) {
  const std::string& body = doc.body;
  std::size_t left = occ.char_start >= before_chars ? occ.char_start - before_chars : 0;
  while (left < occ.char_start && left > 0 &&
         !std::isspace(static_cast<unsigned char>(body[left - 1]))) {
    ++left;
  }
  std::size_t right = std::min(body.size(), occ.char_end + after_chars);
  while (right > occ.char_end && right < body.size() &&
         !std::isspace(static_cast<unsigned char>(body[right]))) {
    --right;
  }
  return ContextWindow{body.substr(left, right - left), doc.doc_id, left, right};
}
}  // namespace detail

/// Group harvested windows into an AcronymRecord. Expansion surfaces merge
/// case-insensitively (first-seen spelling wins) so the record satisfies the
/// loader's uniqueness invariant as built; duplicate (expansion, window)
/// pairs are retained on purpose.
inline AcronymRecord harvest_contexts(std::string_view acronym,
                                      const std::vector<ExpansionOccurrence>& occurrences,
                                      const std::vector<Document>& corpus,
                                      std::size_t before_chars = 1000,
                                      std::size_t after_chars = 1000) {
  std::unordered_map<std::string, const Document*> by_id;
  for (const Document& d : corpus) by_id.emplace(d.doc_id, &d);

  AcronymRecord record;
  record.acronym = canonical_acronym(acronym);
  std::unordered_map<std::string, std::size_t> entry_index;
  for (const ExpansionOccurrence& occ : occurrences) {
    auto it = by_id.find(occ.doc_id);
    if (it == by_id.end()) {
      throw UnknownDocError("occurrence references unknown document: " + occ.doc_id);
    }
    ContextWindow window = detail::cut_window(*it->second, occ, before_chars, after_chars);
    const std::string key = ascii_lower_copy(occ.expansion);
    auto [pos, inserted] = entry_index.emplace(key, record.entries.size());
    if (inserted) record.entries.push_back(ExpansionEntry{occ.expansion, {}});
    record.entries[pos->second].contexts.push_back(std::move(window));
  }
  return record;
}

}  // namespace acrodis
