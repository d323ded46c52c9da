#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "acrodis/embedding.hpp"
#include "acrodis/errors.hpp"
#include "acrodis/seqmatch.hpp"
#include "acrodis/textproc.hpp"
#include "acrodis/types.hpp"

namespace acrodis {

/// One disambiguation request: an acronym plus the passage it appears in.
/// gold_expansion is only present during evaluation.
struct Query {
  std::string acronym;
  std::string context_text;
  std::optional<std::string> gold_expansion;
};

struct ScoredExpansion {
  std::string expansion;
  double best_similarity = 0.0;

  bool operator==(const ScoredExpansion&) const = default;
};

struct ContextScore {
  std::string expansion;
  std::uint32_t context_index = 0;
  double similarity = 0.0;
};

/// Ranked candidate expansions. `ranked` covers every expansion that had at
/// least one stored context, sorted by descending best similarity with ties
/// broken toward the lexicographically smaller expansion; `selected` is the
/// front of that ranking.
struct DisambiguationResult {
  std::vector<ScoredExpansion> ranked;
  std::string selected;
  std::vector<ContextScore> per_context_scores;
};

/// How the query context gets its vector: retrained as one more tagged
/// document, or inferred against a model trained without it (cheaper when
/// serving many queries per acronym).
enum class QueryEmbedding { Retrain, Infer };

/// Train a per-acronym model over all harvested contexts, score every
/// stored context against the query by cosine similarity, and select the
/// expansion owning the best-scoring context. Deterministic given cfg.seed.
inline DisambiguationResult disambiguate(const AcronymRecord& record, const Query& query,
                                         const TrainConfig& cfg,
                                         const StopwordList& stopwords = StopwordList::builtin(),
                                         QueryEmbedding embedding = QueryEmbedding::Retrain) {
  if (canonical_acronym(query.acronym) != canonical_acronym(record.acronym)) {
    throw InvariantError("query acronym does not match the record");
  }
  if (query.context_text.empty()) throw InvariantError("empty context");

  std::vector<ContextWindow> contexts;
  std::vector<DocTag> tags;
  for (const ExpansionEntry& entry : record.entries) {
    for (std::uint32_t i = 0; i < entry.contexts.size(); ++i) {
      contexts.push_back(entry.contexts[i]);
      tags.push_back(DocTag{entry.expansion, i});
    }
  }
  if (contexts.empty()) {
    throw EmptyRecordError("record has no expansion with a stored context");
  }
  const std::size_t n_stored = contexts.size();

  std::vector<float> query_vec;
  EmbeddingModel model;
  if (embedding == QueryEmbedding::Retrain) {
    contexts.push_back(ContextWindow{query.context_text, "query", 0,
                                     query.context_text.size()});
    tags.push_back(DocTag{"", 0});
    model = train<float>(contexts, stopwords, cfg, tags);
    std::span<const float> row = model.doc_vectors.row(n_stored);
    query_vec.assign(row.begin(), row.end());
  } else {
    model = train<float>(contexts, stopwords, cfg, tags);
    query_vec = infer_vector(model, query.context_text);
  }

  DisambiguationResult result;
  result.per_context_scores.reserve(n_stored);
  std::vector<ScoredExpansion> best;
  for (std::size_t d = 0; d < n_stored; ++d) {
    const double sim = cosine_similarity(std::span<const float>(query_vec),
                                         model.doc_vectors.row(d));
    const DocTag& tag = model.doc_tags[d];
    result.per_context_scores.push_back(ContextScore{tag.expansion, tag.context_index, sim});
    auto it = std::find_if(best.begin(), best.end(), [&](const ScoredExpansion& s) {
      return s.expansion == tag.expansion;
    });
    if (it == best.end()) {
      best.push_back(ScoredExpansion{tag.expansion, sim});
    } else {
      it->best_similarity = std::max(it->best_similarity, sim);
    }
  }
  std::sort(best.begin(), best.end(), [](const ScoredExpansion& a, const ScoredExpansion& b) {
    if (a.best_similarity != b.best_similarity) return a.best_similarity > b.best_similarity;
    return a.expansion < b.expansion;
  });
  result.ranked = std::move(best);
  result.selected = result.ranked.front().expansion;
  return result;
}

}  // namespace acrodis
