#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "acrodis/embedding.hpp"
#include "acrodis/errors.hpp"
#include "acrodis/matcher.hpp"
#include "acrodis/textproc.hpp"
#include "acrodis/types.hpp"

namespace acrodis {

struct DatasetLoadOptions {
  /// Accept expansions that fail the matching rules (externally supplied
  /// ones such as irregular "Et Cetera"-style entries).
  bool allow_external_expansions = false;
  const StopwordList* stopwords = nullptr;  // nullptr -> builtin
  MatchRuleConfig match_cfg{};
};

namespace detail {

inline bool is_blank(std::string_view line) {
  for (char c : line) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

inline nlohmann::json parse_json_line(const std::string& line, std::size_t line_no) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw FormatError("not a JSON object", line_no);
  }
  return j;
}

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw FormatError(std::string("missing or non-string field \"") + key + "\"", line_no);
  }
  return it->get<std::string>();
}

inline std::uint64_t require_uint(const nlohmann::json& j, const char* key,
                                  std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_unsigned()) {
    throw FormatError(std::string("missing or non-integer field \"") + key + "\"", line_no);
  }
  return it->get<std::uint64_t>();
}

}  // namespace detail

/// Parse a corpus file: one JSON document per line, streamed. Blank lines
/// are skipped; any malformed line aborts the load with its line number and
/// a repeated doc_id rejects the whole file.
inline std::vector<Document> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path.string());
  std::vector<Document> docs;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    nlohmann::json j = detail::parse_json_line(line, line_no);
    Document doc;
    doc.doc_id = detail::require_string(j, "doc_id", line_no);
    doc.body = detail::require_string(j, "body", line_no);
    if (auto it = j.find("title"); it != j.end()) {
      if (!it->is_string()) throw FormatError("non-string field \"title\"", line_no);
      doc.title = it->get<std::string>();
    }
    if (doc.doc_id.empty()) throw FormatError("empty doc_id", line_no);
    if (!seen_ids.insert(doc.doc_id).second) {
      throw DuplicateIdError("duplicate doc_id: " + doc.doc_id);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

inline void save_corpus(const std::vector<Document>& docs,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open corpus file for writing: " + path.string());
  for (const Document& doc : docs) {
    nlohmann::json j{{"doc_id", doc.doc_id}, {"title", doc.title}, {"body", doc.body}};
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

namespace detail {

inline nlohmann::json record_to_json(const AcronymRecord& record) {
  nlohmann::json entries = nlohmann::json::array();
  for (const ExpansionEntry& entry : record.entries) {
    nlohmann::json contexts = nlohmann::json::array();
    for (const ContextWindow& ctx : entry.contexts) {
      contexts.push_back({{"text", ctx.text},
                          {"source_doc_id", ctx.source_doc_id},
                          {"char_start", ctx.char_start},
                          {"char_end", ctx.char_end}});
    }
    entries.push_back({{"expansion", entry.expansion}, {"contexts", std::move(contexts)}});
  }
  return {{"acronym", record.acronym}, {"entries", std::move(entries)}};
}

inline AcronymRecord record_from_json(const nlohmann::json& j, std::size_t line_no,
                                      const DatasetLoadOptions& opts) {
  AcronymRecord record;
  try {
    record.acronym = canonical_acronym(require_string(j, "acronym", line_no));
  } catch (const InvariantError& e) {
    throw InvariantError(std::string(e.what()) + " (line " + std::to_string(line_no) + ")");
  }
  auto entries_it = j.find("entries");
  if (entries_it == j.end() || !entries_it->is_array()) {
    throw FormatError("missing or non-array field \"entries\"", line_no);
  }
  const StopwordList& stopwords = opts.stopwords ? *opts.stopwords : StopwordList::builtin();
  std::unordered_map<std::string, std::size_t> merged_index;
  for (const nlohmann::json& je : *entries_it) {
    if (!je.is_object()) throw FormatError("entry is not a JSON object", line_no);
    const std::string expansion = require_string(je, "expansion", line_no);
    if (expansion.empty()) throw InvariantError("empty expansion string");
    if (!opts.allow_external_expansions &&
        !matches_expansion(record.acronym, expansion, stopwords, opts.match_cfg)) {
      throw InvariantError("expansion \"" + expansion +
                           "\" does not satisfy the matching rules for acronym " +
                           record.acronym);
    }
    std::vector<ContextWindow> contexts;
    auto ctx_it = je.find("contexts");
    if (ctx_it != je.end()) {
      if (!ctx_it->is_array()) throw FormatError("non-array field \"contexts\"", line_no);
      for (const nlohmann::json& jc : *ctx_it) {
        if (!jc.is_object()) throw FormatError("context is not a JSON object", line_no);
        ContextWindow ctx;
        ctx.text = require_string(jc, "text", line_no);
        ctx.source_doc_id = require_string(jc, "source_doc_id", line_no);
        ctx.char_start = require_uint(jc, "char_start", line_no);
        ctx.char_end = require_uint(jc, "char_end", line_no);
        validate_context_window(ctx);
        contexts.push_back(std::move(ctx));
      }
    }
    // Case-insensitive merge of repeated expansion strings; the first
    // surface spelling wins and context lists concatenate in order.
    const std::string key = ascii_lower_copy(expansion);
    auto [pos, inserted] = merged_index.emplace(key, record.entries.size());
    if (inserted) {
      record.entries.push_back(ExpansionEntry{expansion, std::move(contexts)});
    } else {
      auto& dst = record.entries[pos->second].contexts;
      dst.insert(dst.end(), std::make_move_iterator(contexts.begin()),
                 std::make_move_iterator(contexts.end()));
    }
  }
  return record;
}

}  // namespace detail

inline void save_dataset(const AcronymRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open dataset file for writing: " + path.string());
  out << detail::record_to_json(record).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline void save_dataset_all(const std::vector<AcronymRecord>& records,
                             const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open dataset file for writing: " + path.string());
  for (const AcronymRecord& record : records) {
    out << detail::record_to_json(record).dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

/// Load a multi-record dataset file (one AcronymRecord per line).
inline std::vector<AcronymRecord> load_dataset_all(const std::filesystem::path& path,
                                                   const DatasetLoadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path.string());
  std::vector<AcronymRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    records.push_back(
        detail::record_from_json(detail::parse_json_line(line, line_no), line_no, opts));
  }
  return records;
}

/// Load a single-record dataset file; more than one record is an error.
inline AcronymRecord load_dataset(const std::filesystem::path& path,
                                  const DatasetLoadOptions& opts = {}) {
  std::vector<AcronymRecord> records = load_dataset_all(path, opts);
  if (records.size() != 1) {
    throw FormatError("expected exactly one record, found " +
                      std::to_string(records.size()));
  }
  return std::move(records.front());
}

// ---------------------------------------------------------------------------
// Model persistence: magic "ACRD", version byte, config block, vocabulary
// block, word-vector block, output-weight block, doc-vector block with
// context tags. All floats are little-endian 32-bit for bit-exact round
// trips of the cosine ranking inputs.

inline constexpr char kModelMagic[4] = {'A', 'C', 'R', 'D'};
inline constexpr std::uint8_t kModelVersion = 1;

namespace detail {

struct ByteWriter {
  std::string buf;

  void u8(std::uint8_t v) { buf.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf.append(s);
  }
};

struct ByteReader {
  std::string_view buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (n > buf.size() - pos) throw FormatError("truncated model file");
  }
  /// Overflow-safe form of need(count * bytes_each) for untrusted counts.
  void need_each(std::uint64_t count, std::size_t bytes_each) const {
    if (count > (buf.size() - pos) / bytes_each) {
      throw FormatError("truncated model file");
    }
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(buf[pos++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(buf.substr(pos, n));
    pos += n;
    return s;
  }
  bool done() const { return pos == buf.size(); }
};

inline void write_matrix(ByteWriter& w, const Mat<float>& m) {
  for (float v : m.data()) w.f32(v);
}

inline void read_matrix(ByteReader& r, Mat<float>& m) {
  for (float& v : m.data()) v = r.f32();
}

}  // namespace detail

inline void save_model(const EmbeddingModel& model, const std::filesystem::path& path) {
  if (!model.word_vectors.all_finite() || !model.output_weights.all_finite() ||
      !model.doc_vectors.all_finite()) {
    throw InvariantError("refusing to save a model with non-finite parameters");
  }
  if (model.doc_tags.size() != model.doc_vectors.rows()) {
    throw InvariantError("doc tag count does not match doc vector count");
  }
  detail::ByteWriter w;
  w.buf.append(kModelMagic, sizeof(kModelMagic));
  w.u8(kModelVersion);
  w.u8(static_cast<std::uint8_t>(model.config.mode));
  w.u8(static_cast<std::uint8_t>(model.config.objective));
  w.u32(static_cast<std::uint32_t>(model.config.n_negatives));
  w.u32(static_cast<std::uint32_t>(model.config.dim));
  w.u32(static_cast<std::uint32_t>(model.config.window_k));
  w.u32(static_cast<std::uint32_t>(model.config.epochs));
  w.u32(static_cast<std::uint32_t>(model.config.min_count));
  w.f32(model.config.learning_rate);
  w.u64(model.config.seed);
  w.u32(static_cast<std::uint32_t>(model.config.threads));

  const std::size_t vocab_size = model.vocab.size();
  w.u64(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    w.str(model.vocab.tokens[i]);
    w.u64(model.vocab.counts[i]);
  }
  detail::write_matrix(w, model.word_vectors);
  detail::write_matrix(w, model.output_weights);
  w.u64(model.doc_vectors.rows());
  for (std::size_t d = 0; d < model.doc_vectors.rows(); ++d) {
    w.str(model.doc_tags[d].expansion);
    w.u32(model.doc_tags[d].context_index);
    for (float v : model.doc_vectors.row(d)) w.f32(v);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open model file for writing: " + path.string());
  out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline EmbeddingModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();

  detail::ByteReader r{bytes};
  r.need(sizeof(kModelMagic));
  if (bytes.compare(0, sizeof(kModelMagic), kModelMagic, sizeof(kModelMagic)) != 0) {
    throw FormatError("bad magic: not a model file");
  }
  r.pos = sizeof(kModelMagic);
  const std::uint8_t version = r.u8();
  if (version != kModelVersion) {
    throw VersionError("unsupported model format version " + std::to_string(version));
  }

  EmbeddingModel model;
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw FormatError("invalid model mode byte");
  model.config.mode = static_cast<ModelMode>(mode);
  const std::uint8_t objective = r.u8();
  if (objective > 2) throw FormatError("invalid objective byte");
  model.config.objective = static_cast<Objective>(objective);
  model.config.n_negatives = r.u32();
  model.config.dim = r.u32();
  model.config.window_k = r.u32();
  model.config.epochs = r.u32();
  model.config.min_count = r.u32();
  model.config.learning_rate = r.f32();
  model.config.seed = r.u64();
  model.config.threads = r.u32();

  const std::uint64_t vocab_size = r.u64();
  // Each vocabulary entry needs at least its length prefix and count, so a
  // corrupt size field fails fast instead of over-allocating.
  r.need_each(vocab_size, 12);
  model.vocab.tokens.reserve(vocab_size);
  model.vocab.counts.reserve(vocab_size);
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    std::string token = r.str();
    const std::uint64_t count = r.u64();
    if (!model.vocab.index.emplace(token, static_cast<std::uint32_t>(i)).second) {
      throw InvariantError("duplicate vocabulary token: " + token);
    }
    model.vocab.tokens.push_back(std::move(token));
    model.vocab.counts.push_back(count);
  }
  const std::size_t dim = model.config.dim;
  if (dim == 0) throw FormatError("model dimension is zero");
  r.need_each(vocab_size, 2 * dim * 4);
  model.word_vectors = Mat<float>(vocab_size, dim);
  model.output_weights = Mat<float>(vocab_size, dim);
  detail::read_matrix(r, model.word_vectors);
  detail::read_matrix(r, model.output_weights);
  const std::uint64_t n_docs = r.u64();
  r.need_each(n_docs, 8 + dim * 4);
  model.doc_vectors = Mat<float>(n_docs, dim);
  model.doc_tags.reserve(n_docs);
  for (std::uint64_t d = 0; d < n_docs; ++d) {
    DocTag tag;
    tag.expansion = r.str();
    tag.context_index = r.u32();
    model.doc_tags.push_back(std::move(tag));
    for (float& v : model.doc_vectors.row(d)) v = r.f32();
  }
  if (!r.done()) throw FormatError("trailing bytes after model payload");
  return model;
}

/// Cross-check a dataset against its source corpus: every context offset
/// pair must reproduce the stored text exactly.
inline void verify_against_corpus(const AcronymRecord& record,
                                  const std::vector<Document>& corpus) {
  std::unordered_map<std::string, const Document*> by_id;
  for (const Document& d : corpus) by_id.emplace(d.doc_id, &d);
  for (const ExpansionEntry& entry : record.entries) {
    for (const ContextWindow& ctx : entry.contexts) {
      auto it = by_id.find(ctx.source_doc_id);
      if (it == by_id.end()) {
        throw UnknownDocError("context references unknown document: " + ctx.source_doc_id);
      }
      const std::string& body = it->second->body;
      if (ctx.char_end > body.size() ||
          body.compare(ctx.char_start, ctx.char_end - ctx.char_start, ctx.text) != 0) {
        throw InvariantError("context offsets do not reproduce the stored text");
      }
    }
  }
}

}  // namespace acrodis
