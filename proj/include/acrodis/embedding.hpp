#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "acrodis/errors.hpp"
#include "acrodis/matrix.hpp"
#include "acrodis/rng.hpp"
#include "acrodis/textproc.hpp"
#include "acrodis/types.hpp"

namespace acrodis {

/// DM predicts a center word from the paragraph vector averaged with the
/// surrounding word vectors; DBOW predicts it from the paragraph vector
/// alone, ignoring the surrounding context.
enum class ModelMode : std::uint8_t { DM = 0, DBOW = 1 };

/// Auto resolves at training time: exact softmax while the vocabulary is
/// small enough to afford it, negative sampling above.
enum class Objective : std::uint8_t { Auto = 0, ExactSoftmax = 1, NegativeSampling = 2 };

inline constexpr double kFinalLearningRate = 1e-4;
inline constexpr std::size_t kExactSoftmaxMaxVocab = 5000;
inline constexpr std::size_t kValidatedEpochsMin = 10;
inline constexpr std::size_t kValidatedEpochsMax = 15;
inline constexpr double kNoiseDistributionPower = 0.75;

struct TrainConfig {
  ModelMode mode = ModelMode::DM;
  /// Embedding size M. 0 picks the per-mode default: 500 for DM, 200 for
  /// DBOW.
  std::size_t dim = 0;
  /// Context half-width k of the prediction window.
  std::size_t window_k = 5;
  std::size_t epochs = 12;
  /// Initial SGD step size, linearly decayed to kFinalLearningRate across
  /// all epoch-position steps.
  float learning_rate = 0.025f;
  std::size_t min_count = 1;
  Objective objective = Objective::Auto;
  std::size_t n_negatives = 5;
  std::uint64_t seed = 1;
  /// 1 = deterministic single-threaded training. >1 enables the lock-free
  /// parallel throughput mode, which is documented as non-deterministic.
  std::size_t threads = 1;

  std::size_t effective_dim() const {
    if (dim) return dim;
    return mode == ModelMode::DM ? 500 : 200;
  }

  Objective resolve_objective(std::size_t vocab_size) const {
    if (objective != Objective::Auto) return objective;
    return vocab_size <= kExactSoftmaxMaxVocab ? Objective::ExactSoftmax
                                               : Objective::NegativeSampling;
  }

  bool operator==(const TrainConfig&) const = default;
};

/// Token inventory with deterministic ids: descending count, lexicographic
/// tie-break.
struct Vocabulary {
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  std::unordered_map<std::string, std::uint32_t> index;

  std::size_t size() const { return tokens.size(); }

  std::optional<std::uint32_t> lookup(std::string_view token) const {
    auto it = index.find(std::string(token));
    if (it == index.end()) return std::nullopt;
    return it->second;
  }

  bool operator==(const Vocabulary& other) const {
    return tokens == other.tokens && counts == other.counts;
  }
};

/// Label of one document (context) vector: which expansion it belongs to and
/// its index within that expansion's context list.
struct DocTag {
  std::string expansion;
  std::uint32_t context_index = 0;

  bool operator==(const DocTag&) const = default;
};

/// A trained paragraph-vector model for one acronym. Storage scalar is a
/// template parameter: persisted models use float (little-endian 32-bit on
/// disk, bit-exact round trips), verification suites instantiate double.
template <typename Scalar>
struct BasicEmbeddingModel {
  Vocabulary vocab;
  Mat<Scalar> word_vectors;    // V x dim input embeddings
  Mat<Scalar> output_weights;  // V x dim softmax / sampling output layer
  Mat<Scalar> doc_vectors;     // one row per training context window
  std::vector<DocTag> doc_tags;
  TrainConfig config;

  bool operator==(const BasicEmbeddingModel&) const = default;
};

using EmbeddingModel = BasicEmbeddingModel<float>;

/// Count tokens over all windows, drop those below min_count, order by
/// descending count then lexicographically. Stop words are ordinary
/// vocabulary members; only the expansion matcher treats them specially.
inline Vocabulary build_vocab(const std::vector<ContextWindow>& contexts,
                              const StopwordList& stopwords, const TrainConfig& cfg) {
  if (contexts.empty()) throw EmptyVocabError("no context windows to build a vocabulary from");
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const ContextWindow& ctx : contexts) {
    for (const Token& tok : tokenize(ctx.text, stopwords)) ++counts[tok.surface];
  }
  const std::uint64_t min_count = std::max<std::uint64_t>(1, cfg.min_count);
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  kept.reserve(counts.size());
  for (auto& [token, count] : counts) {
    if (count >= min_count) kept.emplace_back(token, count);
  }
  if (kept.empty()) throw EmptyVocabError("no token meets min_count");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary vocab;
  vocab.tokens.reserve(kept.size());
  vocab.counts.reserve(kept.size());
  for (std::uint32_t id = 0; id < kept.size(); ++id) {
    vocab.tokens.push_back(kept[id].first);
    vocab.counts.push_back(kept[id].second);
    vocab.index.emplace(kept[id].first, id);
  }
  return vocab;
}

namespace detail {

/// In-vocabulary token ids of a text, in order; out-of-vocabulary tokens are
/// dropped before window positions are assigned.
inline std::vector<std::uint32_t> tokenize_to_ids(const Vocabulary& vocab,
                                                  std::string_view text) {
  static const StopwordList kNone;  // flags are irrelevant for id lookup
  std::vector<std::uint32_t> ids;
  for (const Token& tok : tokenize(text, kNone)) {
    if (auto id = vocab.lookup(tok.surface)) ids.push_back(*id);
  }
  return ids;
}

inline std::vector<std::vector<std::uint32_t>> docs_to_ids(
    const Vocabulary& vocab, const std::vector<ContextWindow>& contexts) {
  std::vector<std::vector<std::uint32_t>> docs;
  docs.reserve(contexts.size());
  for (const ContextWindow& ctx : contexts) docs.push_back(tokenize_to_ids(vocab, ctx.text));
  return docs;
}

/// Center positions eligible as prediction targets. DM needs the full
/// window of k tokens on both sides (the summation bounds of the average
/// log-likelihood objective); DBOW uses every position.
inline std::pair<std::size_t, std::size_t> eligible_range(ModelMode mode, std::size_t n_tokens,
                                                          std::size_t window_k) {
  if (mode == ModelMode::DBOW) return {0, n_tokens};
  if (n_tokens < 2 * window_k + 1) return {0, 0};
  return {window_k, n_tokens - window_k};
}

inline std::size_t eligible_count(ModelMode mode, std::size_t n_tokens, std::size_t window_k) {
  auto [lo, hi] = eligible_range(mode, n_tokens, window_k);
  return hi - lo;
}

/// h = (doc vector + sum of window word vectors) / (1 + window size), all in
/// double. An empty window reduces to the doc vector itself (DBOW).
template <typename Scalar>
void input_vector(const Mat<Scalar>& word_vectors, std::span<const Scalar> doc_row,
                  std::span<const std::uint32_t> window, std::vector<double>& h) {
  const std::size_t dim = doc_row.size();
  h.assign(dim, 0.0);
  for (std::size_t c = 0; c < dim; ++c) h[c] = static_cast<double>(doc_row[c]);
  for (std::uint32_t w : window) {
    std::span<const Scalar> row = word_vectors.row(w);
    for (std::size_t c = 0; c < dim; ++c) h[c] += static_cast<double>(row[c]);
  }
  const double inv = 1.0 / static_cast<double>(window.size() + 1);
  for (double& v : h) v *= inv;
}

/// Numerically stable softmax of the output logits; probs sums to 1.
template <typename Scalar>
void softmax_over_vocab(const Mat<Scalar>& output_weights, const std::vector<double>& h,
                        std::vector<double>& probs) {
  const std::size_t vocab_size = output_weights.rows();
  const std::size_t dim = output_weights.cols();
  probs.resize(vocab_size);
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vocab_size; ++i) {
    std::span<const Scalar> row = output_weights.row(i);
    double z = 0.0;
    for (std::size_t c = 0; c < dim; ++c) z += static_cast<double>(row[c]) * h[c];
    probs[i] = z;
    max_logit = std::max(max_logit, z);
  }
  double sum = 0.0;
  for (double& p : probs) {
    p = std::exp(p - max_logit);
    sum += p;
  }
  const double inv = 1.0 / sum;
  for (double& p : probs) p *= inv;
}

/// Cumulative unigram^0.75 table for negative sampling draws.
inline std::vector<double> noise_cumulative(const std::vector<std::uint64_t>& counts) {
  std::vector<double> cum(counts.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    acc += std::pow(static_cast<double>(counts[i]), kNoiseDistributionPower);
    cum[i] = acc;
  }
  return cum;
}

inline std::uint32_t sample_noise(const std::vector<double>& cum, SplitMix64& rng) {
  const double r = rng.next_double() * cum.back();
  auto it = std::upper_bound(cum.begin(), cum.end(), r);
  if (it == cum.end()) --it;
  return static_cast<std::uint32_t>(it - cum.begin());
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Exact-softmax backward pass at one position: accumulates dL/dh into dh
/// and reports (id, p_id - [id == target]) through on_output so the caller
/// can either apply an SGD step to the output row or accumulate a gradient.
/// The dh read of each output row happens before on_output touches it.
template <typename Scalar, typename OutputFn>
void exact_softmax_backward(const Mat<Scalar>& output_weights, const std::vector<double>& h,
                            std::uint32_t target, std::vector<double>& probs,
                            std::vector<double>& dh, OutputFn&& on_output) {
  softmax_over_vocab(output_weights, h, probs);
  const std::size_t vocab_size = output_weights.rows();
  const std::size_t dim = output_weights.cols();
  dh.assign(dim, 0.0);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    const double err = probs[i] - (i == target ? 1.0 : 0.0);
    std::span<const Scalar> row = output_weights.row(i);
    for (std::size_t c = 0; c < dim; ++c) dh[c] += err * static_cast<double>(row[c]);
    on_output(static_cast<std::uint32_t>(i), err);
  }
}

/// Negative-sampling backward pass: the observed word against n draws from
/// the noise distribution. Draws equal to the target are skipped but still
/// consume randomness, keeping seeded runs reproducible.
template <typename Scalar, typename OutputFn>
void negative_sampling_backward(const Mat<Scalar>& output_weights, const std::vector<double>& h,
                                std::uint32_t target, std::size_t n_negatives,
                                const std::vector<double>& noise_cum, SplitMix64& rng,
                                std::vector<double>& dh, OutputFn&& on_output) {
  const std::size_t dim = output_weights.cols();
  dh.assign(dim, 0.0);
  auto update_one = [&](std::uint32_t id, double label) {
    std::span<const Scalar> row = output_weights.row(id);
    double z = 0.0;
    for (std::size_t c = 0; c < dim; ++c) z += static_cast<double>(row[c]) * h[c];
    const double err = sigmoid(z) - label;
    for (std::size_t c = 0; c < dim; ++c) dh[c] += err * static_cast<double>(row[c]);
    on_output(id, err);
  };
  update_one(target, 1.0);
  for (std::size_t s = 0; s < n_negatives; ++s) {
    const std::uint32_t neg = sample_noise(noise_cum, rng);
    if (neg == target) continue;
    update_one(neg, 0.0);
  }
}

template <typename Scalar>
void check_finite(const BasicEmbeddingModel<Scalar>& model) {
  if (!model.word_vectors.all_finite() || !model.output_weights.all_finite() ||
      !model.doc_vectors.all_finite()) {
    throw NonFiniteError("training produced a non-finite parameter");
  }
}

/// Exact-softmax negative average log likelihood over precomputed id
/// sequences; always computed with the exact objective so losses are
/// comparable across training modes. Returns 0 when no position is
/// eligible.
template <typename Scalar>
double loss_on_ids(const BasicEmbeddingModel<Scalar>& model,
                   const std::vector<std::vector<std::uint32_t>>& docs) {
  if (docs.size() != model.doc_vectors.rows()) {
    throw InvariantError("document count does not match the model's doc vectors");
  }
  const std::size_t window_k = model.config.window_k;
  const ModelMode mode = model.config.mode;
  std::vector<double> h, probs;
  std::vector<std::uint32_t> window;
  double total = 0.0;
  std::size_t n_positions = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const std::vector<std::uint32_t>& ids = docs[d];
    auto [lo, hi] = eligible_range(mode, ids.size(), window_k);
    for (std::size_t t = lo; t < hi; ++t) {
      window.clear();
      if (mode == ModelMode::DM) {
        for (std::size_t j = t - window_k; j <= t + window_k; ++j) {
          if (j != t) window.push_back(ids[j]);
        }
      }
      input_vector(model.word_vectors, model.doc_vectors.row(d), window, h);
      softmax_over_vocab(model.output_weights, h, probs);
      total -= std::log(probs[ids[t]]);
      ++n_positions;
    }
  }
  return n_positions ? total / static_cast<double>(n_positions) : 0.0;
}

}  // namespace detail

/// Predicted distribution over the vocabulary for one position. DM averages
/// the doc vector with the given context word vectors; DBOW uses the doc
/// vector alone and ignores context_word_ids.
template <typename Scalar>
std::vector<double> softmax_predict(const BasicEmbeddingModel<Scalar>& model,
                                    const std::vector<std::uint32_t>& context_word_ids,
                                    std::size_t doc_index) {
  if (doc_index >= model.doc_vectors.rows()) throw IndexError("doc index out of range");
  for (std::uint32_t id : context_word_ids) {
    if (id >= model.vocab.size()) throw IndexError("word id out of range");
  }
  std::vector<double> h;
  if (model.config.mode == ModelMode::DM) {
    detail::input_vector(model.word_vectors, model.doc_vectors.row(doc_index),
                         context_word_ids, h);
  } else {
    detail::input_vector(model.word_vectors, model.doc_vectors.row(doc_index),
                         std::span<const std::uint32_t>{}, h);
  }
  std::vector<double> probs;
  detail::softmax_over_vocab(model.output_weights, h, probs);
  return probs;
}

/// Negative average log likelihood of the model on the given contexts,
/// which must be the model's training contexts in order (one per doc
/// vector).
template <typename Scalar>
double loss(const BasicEmbeddingModel<Scalar>& model,
            const std::vector<ContextWindow>& contexts) {
  return detail::loss_on_ids(model, detail::docs_to_ids(model.vocab, contexts));
}

/// Same objective over pre-tokenized id sequences (one per doc vector).
template <typename Scalar>
double loss(const BasicEmbeddingModel<Scalar>& model,
            const std::vector<std::vector<std::uint32_t>>& docs) {
  return detail::loss_on_ids(model, docs);
}

/// Full-batch analytic gradients of the exact-softmax loss, for gradient
/// verification against finite differences.
struct ModelGradients {
  Mat<double> word_vectors;
  Mat<double> output_weights;
  Mat<double> doc_vectors;
};

template <typename Scalar>
ModelGradients objective_gradients(const BasicEmbeddingModel<Scalar>& model,
                                   const std::vector<std::vector<std::uint32_t>>& docs) {
  if (docs.size() != model.doc_vectors.rows()) {
    throw InvariantError("document count does not match the model's doc vectors");
  }
  const std::size_t dim = model.word_vectors.cols();
  const std::size_t window_k = model.config.window_k;
  const ModelMode mode = model.config.mode;
  ModelGradients grads{Mat<double>(model.word_vectors.rows(), dim),
                       Mat<double>(model.vocab.size(), dim),
                       Mat<double>(model.doc_vectors.rows(), dim)};
  std::size_t n_positions = 0;
  for (const auto& ids : docs) n_positions += detail::eligible_count(mode, ids.size(), window_k);
  if (n_positions == 0) return grads;
  const double inv_n = 1.0 / static_cast<double>(n_positions);

  std::vector<double> h, probs, dh;
  std::vector<std::uint32_t> window;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const std::vector<std::uint32_t>& ids = docs[d];
    auto [lo, hi] = detail::eligible_range(mode, ids.size(), window_k);
    for (std::size_t t = lo; t < hi; ++t) {
      window.clear();
      if (mode == ModelMode::DM) {
        for (std::size_t j = t - window_k; j <= t + window_k; ++j) {
          if (j != t) window.push_back(ids[j]);
        }
      }
      detail::input_vector(model.word_vectors, model.doc_vectors.row(d), window, h);
      detail::exact_softmax_backward(model.output_weights, h, ids[t], probs, dh,
                                     [&](std::uint32_t id, double err) {
                                       std::span<double> g = grads.output_weights.row(id);
                                       for (std::size_t c = 0; c < dim; ++c) {
                                         g[c] += inv_n * err * h[c];
                                       }
                                     });
      const double scale = inv_n / static_cast<double>(window.size() + 1);
      std::span<double> gdoc = grads.doc_vectors.row(d);
      for (std::size_t c = 0; c < dim; ++c) gdoc[c] += scale * dh[c];
      for (std::uint32_t w : window) {
        std::span<double> gword = grads.word_vectors.row(w);
        for (std::size_t c = 0; c < dim; ++c) gword[c] += scale * dh[c];
      }
    }
  }
  return grads;
}

using ProgressFn = std::function<void(std::size_t epoch, double loss)>;

namespace detail {

/// One SGD pass over a span of documents. Returns nothing; parameters are
/// updated in place. `step` is the global position counter driving the
/// linear learning-rate decay.
template <typename Scalar>
void sgd_sweep(BasicEmbeddingModel<Scalar>& model,
               const std::vector<std::vector<std::uint32_t>>& docs, std::size_t doc_begin,
               std::size_t doc_end, Objective objective, std::size_t n_negatives,
               const std::vector<double>& noise_cum, SplitMix64& rng, double lr0,
               std::size_t total_steps, std::atomic<std::size_t>& step) {
  const std::size_t dim = model.word_vectors.cols();
  const std::size_t window_k = model.config.window_k;
  const ModelMode mode = model.config.mode;
  std::vector<double> h, probs, dh;
  std::vector<std::uint32_t> window;
  for (std::size_t d = doc_begin; d < doc_end; ++d) {
    const std::vector<std::uint32_t>& ids = docs[d];
    auto [lo, hi] = eligible_range(mode, ids.size(), window_k);
    for (std::size_t t = lo; t < hi; ++t) {
      const std::size_t s = step.fetch_add(1, std::memory_order_relaxed);
      const double progress = static_cast<double>(s) / static_cast<double>(total_steps);
      const double lr = lr0 + (kFinalLearningRate - lr0) * progress;
      window.clear();
      if (mode == ModelMode::DM) {
        for (std::size_t j = t - window_k; j <= t + window_k; ++j) {
          if (j != t) window.push_back(ids[j]);
        }
      }
      input_vector(model.word_vectors, std::as_const(model.doc_vectors).row(d), window, h);
      auto apply_output = [&](std::uint32_t id, double err) {
        std::span<Scalar> row = model.output_weights.row(id);
        const double delta = lr * err;
        for (std::size_t c = 0; c < dim; ++c) {
          row[c] = static_cast<Scalar>(static_cast<double>(row[c]) - delta * h[c]);
        }
      };
      if (objective == Objective::ExactSoftmax) {
        exact_softmax_backward(model.output_weights, h, ids[t], probs, dh, apply_output);
      } else {
        negative_sampling_backward(model.output_weights, h, ids[t], n_negatives, noise_cum,
                                   rng, dh, apply_output);
      }
      const double scale = lr / static_cast<double>(window.size() + 1);
      std::span<Scalar> doc_row = model.doc_vectors.row(d);
      for (std::size_t c = 0; c < dim; ++c) {
        doc_row[c] = static_cast<Scalar>(static_cast<double>(doc_row[c]) - scale * dh[c]);
      }
      for (std::uint32_t w : window) {
        std::span<Scalar> word_row = model.word_vectors.row(w);
        for (std::size_t c = 0; c < dim; ++c) {
          word_row[c] = static_cast<Scalar>(static_cast<double>(word_row[c]) - scale * dh[c]);
        }
      }
    }
  }
}

}  // namespace detail

/// Train a paragraph-vector model over tagged context windows by SGD.
/// Deterministic given cfg.seed when cfg.threads == 1. Input vectors start
/// uniform in [-0.5/dim, +0.5/dim], output weights at zero. `tags` labels
/// each context (defaults to an untagged running index); `progress`, when
/// set, receives the exact-softmax loss after each epoch.
template <typename Scalar = float>
BasicEmbeddingModel<Scalar> train(const std::vector<ContextWindow>& contexts,
                                  const StopwordList& stopwords, const TrainConfig& cfg,
                                  std::vector<DocTag> tags = {},
                                  const ProgressFn& progress = {}) {
  if (!tags.empty() && tags.size() != contexts.size()) {
    throw InvariantError("tag count does not match context count");
  }
  if (cfg.window_k < 1) throw InvariantError("window_k must be at least 1");
  if (!(cfg.learning_rate > 0.0f)) throw InvariantError("learning_rate must be positive");
  if (cfg.epochs < kValidatedEpochsMin || cfg.epochs > kValidatedEpochsMax) {
    std::cerr << "acrodis: warning: epochs=" << cfg.epochs
              << " is outside the validated range [" << kValidatedEpochsMin << ", "
              << kValidatedEpochsMax << "]\n";
  }

  BasicEmbeddingModel<Scalar> model;
  model.vocab = build_vocab(contexts, stopwords, cfg);
  const std::size_t vocab_size = model.vocab.size();
  const std::size_t dim = cfg.effective_dim();
  const Objective objective = cfg.resolve_objective(vocab_size);

  model.config = cfg;
  model.config.dim = dim;
  model.config.objective = objective;

  if (tags.empty()) {
    tags.reserve(contexts.size());
    for (std::uint32_t i = 0; i < contexts.size(); ++i) tags.push_back(DocTag{"", i});
  }
  model.doc_tags = std::move(tags);

  const std::vector<std::vector<std::uint32_t>> docs =
      detail::docs_to_ids(model.vocab, contexts);

  model.word_vectors = Mat<Scalar>(vocab_size, dim);
  model.output_weights = Mat<Scalar>(vocab_size, dim);
  model.doc_vectors = Mat<Scalar>(contexts.size(), dim);
  SplitMix64 init_rng(cfg.seed);
  const double half_span = 0.5 / static_cast<double>(dim);
  for (Scalar& v : model.word_vectors.data()) {
    v = static_cast<Scalar>(init_rng.uniform(-half_span, half_span));
  }
  for (Scalar& v : model.doc_vectors.data()) {
    v = static_cast<Scalar>(init_rng.uniform(-half_span, half_span));
  }

  std::vector<double> noise_cum;
  if (objective == Objective::NegativeSampling) {
    noise_cum = detail::noise_cumulative(model.vocab.counts);
  }

  std::size_t steps_per_epoch = 0;
  for (const auto& ids : docs) {
    steps_per_epoch += detail::eligible_count(cfg.mode, ids.size(), cfg.window_k);
  }
  const std::size_t total_steps = cfg.epochs * steps_per_epoch;
  const double lr0 = static_cast<double>(cfg.learning_rate);

  std::atomic<std::size_t> step{0};
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.threads <= 1 || docs.size() < 2) {
      SplitMix64 rng(mix_seed(cfg.seed, 1 + epoch));
      detail::sgd_sweep(model, docs, 0, docs.size(), objective, cfg.n_negatives, noise_cum,
                        rng, lr0, std::max<std::size_t>(total_steps, 1), step);
    } else {
      const std::size_t n_threads = std::min(cfg.threads, docs.size());
      std::vector<std::thread> workers;
      const std::size_t chunk = (docs.size() + n_threads - 1) / n_threads;
      for (std::size_t w = 0; w < n_threads; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(docs.size(), begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([&, begin, end, w] {
          SplitMix64 rng(mix_seed(cfg.seed, 1 + epoch * n_threads + w));
          detail::sgd_sweep(model, docs, begin, end, objective, cfg.n_negatives, noise_cum,
                            rng, lr0, std::max<std::size_t>(total_steps, 1), step);
        });
      }
      for (auto& t : workers) t.join();
    }
    detail::check_finite(model);
    if (progress) progress(epoch, detail::loss_on_ids(model, docs));
  }
  detail::check_finite(model);
  return model;
}

/// Embed a new text against a trained model: word vectors and output
/// weights stay frozen while a fresh doc vector is optimized by the model's
/// own objective. Deterministic given model.config.seed. infer_epochs of 0
/// returns the seeded initialization; leaving it unset trains for
/// config.epochs.
template <typename Scalar>
std::vector<Scalar> infer_vector(const BasicEmbeddingModel<Scalar>& model,
                                 std::string_view text,
                                 std::optional<std::size_t> infer_epochs = std::nullopt) {
  const std::vector<std::uint32_t> ids = detail::tokenize_to_ids(model.vocab, text);
  if (ids.empty()) throw NoKnownTokensError("text has no in-vocabulary token");
  const std::size_t dim = model.word_vectors.cols();
  const std::size_t window_k = model.config.window_k;
  const ModelMode mode = model.config.mode;
  const std::size_t epochs = infer_epochs.value_or(model.config.epochs);

  SplitMix64 rng(mix_seed(model.config.seed, fnv1a64("infer")));
  std::vector<Scalar> vec(dim);
  const double half_span = 0.5 / static_cast<double>(dim);
  for (Scalar& v : vec) v = static_cast<Scalar>(rng.uniform(-half_span, half_span));

  std::vector<double> noise_cum;
  if (model.config.objective == Objective::NegativeSampling) {
    noise_cum = detail::noise_cumulative(model.vocab.counts);
  }
  const std::size_t per_epoch = detail::eligible_count(mode, ids.size(), window_k);
  const std::size_t total_steps = std::max<std::size_t>(1, epochs * per_epoch);
  const double lr0 = static_cast<double>(model.config.learning_rate);

  std::vector<double> h, probs, dh;
  std::vector<std::uint32_t> window;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    auto [lo, hi] = detail::eligible_range(mode, ids.size(), window_k);
    for (std::size_t t = lo; t < hi; ++t) {
      const double progress = static_cast<double>(step++) / static_cast<double>(total_steps);
      const double lr = lr0 + (kFinalLearningRate - lr0) * progress;
      window.clear();
      if (mode == ModelMode::DM) {
        for (std::size_t j = t - window_k; j <= t + window_k; ++j) {
          if (j != t) window.push_back(ids[j]);
        }
      }
      detail::input_vector(model.word_vectors, std::span<const Scalar>(vec), window, h);
      auto ignore_output = [](std::uint32_t, double) {};
      if (model.config.objective == Objective::NegativeSampling) {
        detail::negative_sampling_backward(model.output_weights, h, ids[t],
                                           model.config.n_negatives, noise_cum, rng, dh,
                                           ignore_output);
      } else {
        detail::exact_softmax_backward(model.output_weights, h, ids[t], probs, dh,
                                       ignore_output);
      }
      const double scale = lr / static_cast<double>(window.size() + 1);
      for (std::size_t c = 0; c < dim; ++c) {
        vec[c] = static_cast<Scalar>(static_cast<double>(vec[c]) - scale * dh[c]);
      }
    }
  }
  for (Scalar v : vec) {
    if (!std::isfinite(static_cast<double>(v))) {
      throw NonFiniteError("inference produced a non-finite vector");
    }
  }
  return vec;
}

namespace detail {

template <typename Scalar>
double cosine_impl(std::span<const Scalar> a, std::span<const Scalar> b) {
  if (a.size() != b.size()) throw InvariantError("cosine similarity dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = static_cast<double>(a[i]);
    const double y = static_cast<double>(b[i]);
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw ZeroVectorError("cosine similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace detail

inline double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  return detail::cosine_impl(a, b);
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  return detail::cosine_impl(a, b);
}

}  // namespace acrodis
