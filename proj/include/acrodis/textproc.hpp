#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "acrodis/errors.hpp"
#include "acrodis/types.hpp"

namespace acrodis {

/// One training word: lowercased, alphanumeric, flagged by stop-word
/// membership. These are the w_t fed to the embedding objective.
struct Token {
  std::string surface;
  bool is_stopword = false;

  bool operator==(const Token&) const = default;
};

/// The 13 words every stop-word list must contain. Matching rule 3 depends
/// on at least these being skippable.
inline const std::vector<std::string>& required_stopwords() {
  static const std::vector<std::string> kRequired = {
      "a", "an", "the", "of", "and", "or", "for", "in", "on", "to", "at", "by", "with"};
  return kRequired;
}

class StopwordList {
 public:
  StopwordList() = default;

  /// Built-in list: the required core plus ~50 common English function
  /// words. There is no canonical inventory for this task, so this is a
  /// fixed default, overridable via from_file.
  static const StopwordList& builtin() {
    static const StopwordList kBuiltin = [] {
      StopwordList sw;
      static const char* kWords[] = {
          "a",     "about", "above",   "after", "again",  "all",   "am",    "an",
          "and",   "any",   "are",     "as",    "at",     "be",    "because", "been",
          "before", "being", "below",  "between", "both", "but",   "by",    "can",
          "did",   "do",    "does",    "down",  "during", "each",  "few",   "for",
          "from",  "had",   "has",     "have",  "he",     "her",   "here",  "his",
          "how",   "if",    "in",      "into",  "is",     "it",    "its",   "more",
          "most",  "no",    "nor",     "not",   "now",    "of",    "off",   "on",
          "once",  "only",  "or",      "our",   "out",    "over",  "she",   "so",
          "some",  "such",  "than",    "that",  "the",    "their", "them",  "then",
          "there", "these", "they",    "this",  "those",  "through", "to",  "under",
          "until", "up",    "very",    "was",   "we",     "were",  "what",  "when",
          "where", "which", "while",   "who",   "why",    "will",  "with",  "you",
          "your"};
      for (const char* w : kWords) sw.words_.insert(w);
      return sw;
    }();
    return kBuiltin;
  }

  /// Load an override list: one lowercase word per line. The required core
  /// words are always unioned in so the type invariant holds.
  static StopwordList from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stop-word file: " + path.string());
    StopwordList sw;
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (line.empty()) continue;
      sw.words_.insert(ascii_lower_copy(line));
    }
    for (const auto& w : required_stopwords()) sw.words_.insert(w);
    return sw;
  }

  static StopwordList from_words(const std::vector<std::string>& words) {
    StopwordList sw;
    for (const auto& w : words) sw.words_.insert(ascii_lower_copy(w));
    return sw;
  }

  /// Membership test; the word is expected in lowercase.
  bool contains(std::string_view word) const {
    return words_.count(std::string(word)) > 0;
  }

  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// Lowercase, collapse whitespace runs to single spaces, trim. Total and
/// idempotent. Bytes outside ASCII pass through unchanged.
inline std::string normalize(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(ascii_lower(c));
  }
  return out;
}

/// Split on every non-alphanumeric character, normalize each fragment, flag
/// stop words. Aggressive splitting is for corpus text; expansion phrases go
/// through split_phrase_words instead.
inline std::vector<Token> tokenize(std::string_view text, const StopwordList& stopwords) {
  std::vector<Token> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    bool stop = stopwords.contains(cur);
    out.push_back(Token{std::move(cur), stop});
    cur.clear();
  };
  for (char c : text) {
    if (is_ascii_alnum(c)) {
      cur.push_back(ascii_lower(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

inline bool is_phrase_separator(char c) { return c == ' ' || c == '_' || c == '-'; }

/// Split an expansion phrase on the three separators the matching rules
/// recognize: space, underscore, dash. Original spellings are preserved;
/// empty fragments are dropped.
inline std::vector<std::string> split_phrase_words(std::string_view phrase) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= phrase.size(); ++i) {
    if (i == phrase.size() || is_phrase_separator(phrase[i])) {
      if (i > start) out.emplace_back(phrase.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace acrodis
