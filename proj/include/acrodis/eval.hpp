#pragma once

#include <atomic>
#include <cassert>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "acrodis/disambiguator.hpp"
#include "acrodis/embedding.hpp"
#include "acrodis/errors.hpp"
#include "acrodis/pca.hpp"
#include "acrodis/rng.hpp"
#include "acrodis/seqmatch.hpp"
#include "acrodis/types.hpp"

namespace acrodis {

/// One grid point of a hyperparameter sweep. context_chars, when set,
/// truncates training context texts (at a word boundary) to that many
/// characters, mirroring the experiment table's context-length column.
struct GridEntry {
  ModelMode mode = ModelMode::DM;
  std::size_t dim = 0;
  std::size_t epochs = 12;
  std::optional<std::size_t> context_chars;
};

struct EvalConfig {
  TrainConfig train_cfg;
  double threshold = 0.9;
  std::optional<std::size_t> max_queries_per_acronym;
  /// Include single-expansion records; they cannot be wrong and are
  /// excluded from accuracy by default.
  bool include_trivial = false;
  QueryEmbedding query_embedding = QueryEmbedding::Retrain;
  std::size_t threads = 1;
  std::vector<GridEntry> grid;
};

struct AcronymStats {
  std::string acronym;
  std::size_t n_queries = 0;
  std::size_t n_correct = 0;
};

struct EvalReport {
  std::vector<AcronymStats> per_acronym;
  double overall_accuracy = 0.0;
  EvalConfig config_echo;
};

/// Instrumentation hook: called with the reduced training record and the
/// query before each disambiguation step.
using EvalObserver = std::function<void(const AcronymRecord&, const Query&)>;

namespace detail {

/// Deterministic per-record seed, independent of dataset order.
inline std::uint64_t record_seed(std::uint64_t base_seed, std::string_view acronym) {
  return base_seed ^ fnv1a64(acronym);
}

struct QueryRef {
  std::size_t entry = 0;
  std::size_t context = 0;
};

inline AcronymStats evaluate_record(const AcronymRecord& record, const EvalConfig& cfg,
                                    const StopwordList& stopwords,
                                    const EvalObserver& observer) {
  AcronymStats stats{record.acronym, 0, 0};
  std::vector<QueryRef> queries;
  for (std::size_t e = 0; e < record.entries.size(); ++e) {
    for (std::size_t c = 0; c < record.entries[e].contexts.size(); ++c) {
      queries.push_back(QueryRef{e, c});
    }
  }
  const std::uint64_t seed = record_seed(cfg.train_cfg.seed, record.acronym);
  if (cfg.max_queries_per_acronym && *cfg.max_queries_per_acronym < queries.size()) {
    // Seeded Fisher-Yates prefix; canonical query order is restored below
    // so subsampling cannot change per-query seeds.
    SplitMix64 rng(mix_seed(seed, fnv1a64("subsample")));
    for (std::size_t i = 0; i < *cfg.max_queries_per_acronym; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.next_below(queries.size() - i));
      std::swap(queries[i], queries[j]);
    }
    queries.resize(*cfg.max_queries_per_acronym);
  }

  for (const QueryRef& q : queries) {
    const ExpansionEntry& gold_entry = record.entries[q.entry];
    const ContextWindow& held_out = gold_entry.contexts[q.context];

    AcronymRecord reduced;
    reduced.acronym = record.acronym;
    reduced.entries.reserve(record.entries.size());
    std::size_t ordinal = 0, query_ordinal = 0, scoreable = 0;
    for (std::size_t e = 0; e < record.entries.size(); ++e) {
      ExpansionEntry entry{record.entries[e].expansion, {}};
      for (std::size_t c = 0; c < record.entries[e].contexts.size(); ++c, ++ordinal) {
        if (e == q.entry && c == q.context) {
          query_ordinal = ordinal;
          continue;
        }
        entry.contexts.push_back(record.entries[e].contexts[c]);
      }
      if (!entry.contexts.empty()) ++scoreable;
      reduced.entries.push_back(std::move(entry));
    }

    Query query{record.acronym, held_out.text, gold_entry.expansion};
    if (observer) observer(reduced, query);
#ifndef NDEBUG
    // The held-out window must be gone from training: duplicates are legal,
    // so compare multiplicities of the exact window.
    const auto count_window = [&held_out](const AcronymRecord& rec) {
      std::size_t n = 0;
      for (const ExpansionEntry& entry : rec.entries) {
        for (const ContextWindow& ctx : entry.contexts) {
          if (ctx == held_out) ++n;
        }
      }
      return n;
    };
    assert(count_window(reduced) + 1 == count_window(record));
#endif

    ++stats.n_queries;
    if (scoreable == 0) {
      // Only reachable for single-expansion records under include_trivial:
      // the lone candidate is trivially the prediction.
      ++stats.n_correct;
      continue;
    }
    TrainConfig train_cfg = cfg.train_cfg;
    train_cfg.seed = mix_seed(seed, query_ordinal);
    const DisambiguationResult result =
        disambiguate(reduced, query, train_cfg, stopwords, cfg.query_embedding);
    if (is_correct(result.selected, gold_entry.expansion, cfg.threshold)) {
      ++stats.n_correct;
    }
  }
  return stats;
}

}  // namespace detail

/// Leave-one-out evaluation: each stored context becomes the query once,
/// with its window removed from that step's training contexts. Records are
/// seeded individually, so accuracy is invariant to dataset order; with
/// threads > 1 records are evaluated by a worker pool and the report is
/// still byte-identical to the serial one.
inline EvalReport evaluate(const std::vector<AcronymRecord>& dataset, const EvalConfig& cfg,
                           const StopwordList& stopwords = StopwordList::builtin(),
                           const EvalObserver& observer = {}) {
  if (dataset.empty()) throw EmptyDatasetError("dataset is empty");

  std::vector<const AcronymRecord*> eligible;
  for (const AcronymRecord& record : dataset) {
    std::size_t with_contexts = 0;
    for (const ExpansionEntry& entry : record.entries) {
      if (!entry.contexts.empty()) ++with_contexts;
    }
    const std::size_t needed = cfg.include_trivial ? 1 : 2;
    if (with_contexts >= needed) {
      eligible.push_back(&record);
    } else {
      std::cerr << "acrodis: notice: skipping record " << record.acronym << " ("
                << with_contexts << " expansion(s) with contexts)\n";
    }
  }
  if (eligible.empty()) throw EmptyDatasetError("no evaluable record in dataset");

  EvalReport report;
  report.config_echo = cfg;
  report.per_acronym.resize(eligible.size());
  if (cfg.threads <= 1 || eligible.size() < 2) {
    for (std::size_t i = 0; i < eligible.size(); ++i) {
      report.per_acronym[i] = detail::evaluate_record(*eligible[i], cfg, stopwords, observer);
    }
  } else {
    std::atomic<std::size_t> next{0};
    const std::size_t n_threads = std::min(cfg.threads, eligible.size());
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < eligible.size(); i = next.fetch_add(1)) {
          report.per_acronym[i] =
              detail::evaluate_record(*eligible[i], cfg, stopwords, observer);
        }
      });
    }
    for (auto& t : workers) t.join();
  }

  std::size_t total_queries = 0, total_correct = 0;
  for (const AcronymStats& s : report.per_acronym) {
    total_queries += s.n_queries;
    total_correct += s.n_correct;
  }
  if (total_queries == 0) throw EmptyDatasetError("no evaluable query in dataset");
  report.overall_accuracy =
      static_cast<double>(total_correct) / static_cast<double>(total_queries);
  return report;
}

struct SweepRow {
  GridEntry entry;
  TrainConfig train_cfg;
  EvalReport report;
};

namespace detail {

/// Truncate a context text to at most max_chars, cutting back to the last
/// whitespace so no word is split. Offsets shrink with the text to keep the
/// window invariants intact.
inline ContextWindow truncate_context(const ContextWindow& ctx, std::size_t max_chars) {
  if (ctx.text.size() <= max_chars) return ctx;
  std::size_t cut = max_chars;
  while (cut > 0 && !std::isspace(static_cast<unsigned char>(ctx.text[cut]))) --cut;
  if (cut == 0) cut = max_chars;  // one giant word: hard cut
  ContextWindow out;
  out.text = ctx.text.substr(0, cut);
  out.source_doc_id = ctx.source_doc_id;
  out.char_start = ctx.char_start;
  out.char_end = ctx.char_start + cut;
  return out;
}

}  // namespace detail

/// Run evaluate once per grid point, overriding mode, dimension, epochs and
/// (optionally) context length. Rows come back in grid order.
inline std::vector<SweepRow> grid_sweep(const std::vector<AcronymRecord>& dataset,
                                        const EvalConfig& cfg,
                                        const StopwordList& stopwords = StopwordList::builtin()) {
  if (cfg.grid.empty()) throw InvariantError("grid_sweep requires a non-empty grid");
  std::vector<SweepRow> rows;
  rows.reserve(cfg.grid.size());
  for (const GridEntry& entry : cfg.grid) {
    EvalConfig point = cfg;
    point.grid.clear();
    point.train_cfg.mode = entry.mode;
    point.train_cfg.dim = entry.dim;
    point.train_cfg.epochs = entry.epochs;
    const std::vector<AcronymRecord>* data = &dataset;
    std::vector<AcronymRecord> truncated;
    if (entry.context_chars) {
      truncated.reserve(dataset.size());
      for (const AcronymRecord& record : dataset) {
        AcronymRecord copy{record.acronym, {}};
        copy.entries.reserve(record.entries.size());
        for (const ExpansionEntry& e : record.entries) {
          ExpansionEntry entry_copy{e.expansion, {}};
          entry_copy.contexts.reserve(e.contexts.size());
          for (const ContextWindow& ctx : e.contexts) {
            entry_copy.contexts.push_back(detail::truncate_context(ctx, *entry.context_chars));
          }
          copy.entries.push_back(std::move(entry_copy));
        }
        truncated.push_back(std::move(copy));
      }
      data = &truncated;
    }
    rows.push_back(SweepRow{entry, point.train_cfg, evaluate(*data, point, stopwords)});
  }
  return rows;
}

/// The standard nine-configuration experiment grid: both modes, embedding
/// sizes 200/500/750, context lengths -/2000/5000, epochs 12/15.
inline std::vector<GridEntry> table1_grid() {
  return {
      {ModelMode::DBOW, 500, 12, std::nullopt},
      {ModelMode::DBOW, 500, 12, std::nullopt},
      {ModelMode::DBOW, 500, 12, 2000},
      {ModelMode::DBOW, 500, 12, 2000},
      {ModelMode::DBOW, 200, 12, 2000},
      {ModelMode::DM, 200, 12, 5000},
      {ModelMode::DM, 750, 15, 2000},
      {ModelMode::DM, 200, 15, 5000},
      {ModelMode::DM, 500, 15, 5000},
  };
}

inline std::string format_sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "mode\tdim\tcontext_chars\tepochs\taccuracy\n";
  for (const SweepRow& row : rows) {
    out << (row.entry.mode == ModelMode::DM ? "dm" : "dbow") << '\t' << row.entry.dim << '\t';
    if (row.entry.context_chars) {
      out << *row.entry.context_chars;
    } else {
      out << '-';
    }
    out << '\t' << row.entry.epochs << '\t';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", row.report.overall_accuracy);
    out << buf << '\n';
  }
  return out.str();
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += "\"\"";
    else quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace detail

/// Write 2-D PCA projections of all doc vectors with their expansion tags,
/// one CSV row per context, for external plotting.
inline void emit_plot_data(const EmbeddingModel& model, std::ostream& out) {
  if (model.doc_vectors.rows() < 2) {
    throw DegenerateInputError("plot data needs at least 2 doc vectors");
  }
  const Mat<double> projected = pca_project(model.doc_vectors, 2);
  out << "x,y,expansion,context_index\n";
  char buf[64];
  for (std::size_t d = 0; d < projected.rows(); ++d) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g", projected(d, 0), projected(d, 1));
    out << buf << ',' << detail::csv_field(model.doc_tags[d].expansion) << ','
        << model.doc_tags[d].context_index << '\n';
  }
}

inline void emit_plot_data(const EmbeddingModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open plot file for writing: " + path.string());
  emit_plot_data(model, out);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace acrodis
