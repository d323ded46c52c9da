#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "acrodis/errors.hpp"

namespace acrodis {

/// One source document. Bodies range from a few hundred characters to tens
/// of thousands; empty bodies are legal but yield no contexts.
struct Document {
  std::string doc_id;
  std::string title;
  std::string body;

  bool operator==(const Document&) const = default;
};

/// A text span surrounding one occurrence of one expansion: the unit that
/// gets embedded. Offsets index into the source document body and always
/// satisfy char_start < char_end and char_end - char_start == text.size().
struct ContextWindow {
  std::string text;
  std::string source_doc_id;
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  bool operator==(const ContextWindow&) const = default;
};

/// One candidate expansion with every harvested context it occurred in.
/// Duplicate (expansion, context) pairs are deliberately retained.
struct ExpansionEntry {
  std::string expansion;
  std::vector<ContextWindow> contexts;

  bool operator==(const ExpansionEntry&) const = default;
};

/// An acronym with its candidate expansions. Expansion strings are unique
/// within a record (case-insensitively) after load/harvest merging.
struct AcronymRecord {
  std::string acronym;
  std::vector<ExpansionEntry> entries;

  bool operator==(const AcronymRecord&) const = default;
};

inline bool is_ascii_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

inline char ascii_upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c; }

inline std::string ascii_lower_copy(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = ascii_lower(c);
  return out;
}

/// Uppercase canonical form of an acronym. Throws InvariantError when the
/// input is empty or contains anything but letters and digits.
inline std::string canonical_acronym(std::string_view raw) {
  if (raw.empty()) throw InvariantError("acronym is empty");
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (!is_ascii_alnum(c)) {
      throw InvariantError("acronym contains non-alphanumeric character: '" +
                           std::string(raw) + "'");
    }
    out.push_back(ascii_upper(c));
  }
  return out;
}

/// Check the ContextWindow invariants that do not require the source corpus.
inline void validate_context_window(const ContextWindow& w) {
  if (w.text.empty()) throw InvariantError("context window text is empty");
  if (w.char_start >= w.char_end) {
    throw InvariantError("context window offsets are not a valid span");
  }
  if (w.char_end - w.char_start != w.text.size()) {
    throw InvariantError("context window length does not match its offsets");
  }
}

}  // namespace acrodis
