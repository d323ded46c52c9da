#include "acrodis/embedding.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "acrodis/rng.hpp"
#include "generators.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace acrodis;

namespace {

const StopwordList& sw() { return StopwordList::builtin(); }

std::vector<ContextWindow> windows(const std::vector<std::string>& texts) {
  std::vector<ContextWindow> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.push_back(gen::make_context(texts[i], "w" + std::to_string(i)));
  }
  return out;
}

bool bits_equal(const Mat<float>& a, const Mat<float>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data().data(), b.data().data(), a.data().size() * sizeof(float)) == 0;
}

TrainConfig toy_config(ModelMode mode, std::size_t dim, std::size_t epochs,
                       std::uint64_t seed, std::size_t window_k = 1) {
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.dim = dim;
  cfg.epochs = epochs;
  cfg.window_k = window_k;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(BuildVocab, CountOrderingWithLexTieBreak) {
  const auto vocab = build_vocab(windows({"a b b"}), sw(), TrainConfig{});
  ASSERT_EQ(vocab.size(), 2u);
  EXPECT_EQ(vocab.tokens[0], "b");
  EXPECT_EQ(vocab.counts[0], 2u);
  EXPECT_EQ(vocab.tokens[1], "a");
  EXPECT_EQ(vocab.counts[1], 1u);
  EXPECT_EQ(vocab.lookup("b"), std::uint32_t{0});
  EXPECT_EQ(vocab.lookup("missing"), std::nullopt);
}

TEST(BuildVocab, HandTally) {
  const auto vocab = build_vocab(
      windows({"apple banana apple", "banana cherry", "apple"}), sw(), TrainConfig{});
  ASSERT_EQ(vocab.size(), 3u);
  EXPECT_EQ(vocab.tokens, (std::vector<std::string>{"apple", "banana", "cherry"}));
  EXPECT_EQ(vocab.counts, (std::vector<std::uint64_t>{3, 2, 1}));
}

TEST(BuildVocab, MinCountCanEmptyTheVocabulary) {
  TrainConfig cfg;
  cfg.min_count = 2;
  EXPECT_THROW(build_vocab(windows({"x"}), sw(), cfg), EmptyVocabError);
  EXPECT_THROW(build_vocab({}, sw(), TrainConfig{}), EmptyVocabError);
}

TEST(SoftmaxPredict, UniformUnderZeroLogits) {
  // Zero output weights force uniform predictions whatever the inputs are.
  auto model = train<float>(windows({"a b a b"}), sw(), toy_config(ModelMode::DM, 4, 0, 9));
  const auto probs = softmax_predict(model, {0, 1}, 0);
  ASSERT_EQ(probs.size(), 2u);
  EXPECT_DOUBLE_EQ(probs[0], 0.5);
  EXPECT_DOUBLE_EQ(probs[1], 0.5);
}

TEST(SoftmaxPredict, SymmetricLogits) {
  SplitMix64 rng(3);
  auto model = gen::random_tiny_model(rng, ModelMode::DBOW, 3, 2, 1, 1);
  // Identical output rows give identical logits.
  for (int i = 0; i < 3; ++i) {
    model.output_weights(i, 0) = 0.7;
    model.output_weights(i, 1) = -0.2;
  }
  const auto probs = softmax_predict(model, {}, 0);
  EXPECT_NEAR(probs[0], 1.0 / 3, 1e-15);
  EXPECT_NEAR(probs[1], 1.0 / 3, 1e-15);
  EXPECT_NEAR(probs[2], 1.0 / 3, 1e-15);
}

TEST(SoftmaxPredict, ClosedFormLogits) {
  // Logits (0, ln 2, ln 4) against a unit doc vector: probabilities are
  // (1/7, 2/7, 4/7).
  BasicEmbeddingModel<double> model;
  model.config.mode = ModelMode::DBOW;
  model.config.dim = 2;
  for (int i = 0; i < 3; ++i) {
    model.vocab.tokens.push_back(std::string(1, static_cast<char>('a' + i)));
    model.vocab.counts.push_back(1);
    model.vocab.index.emplace(model.vocab.tokens.back(), i);
  }
  model.word_vectors = Mat<double>(3, 2);
  model.output_weights = Mat<double>(3, 2);
  model.doc_vectors = Mat<double>(1, 2);
  model.doc_tags.push_back({"", 0});
  model.doc_vectors(0, 0) = 1.0;
  model.output_weights(1, 0) = std::log(2.0);
  model.output_weights(2, 0) = std::log(4.0);
  const auto probs = softmax_predict(model, {}, 0);
  EXPECT_NEAR(probs[0], 1.0 / 7, 1e-12);
  EXPECT_NEAR(probs[1], 2.0 / 7, 1e-12);
  EXPECT_NEAR(probs[2], 4.0 / 7, 1e-12);
}

TEST(SoftmaxPredict, SumsToOneAndStrictlyPositive) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const ModelMode mode = trial % 2 ? ModelMode::DM : ModelMode::DBOW;
    auto model = gen::random_model(rng);
    model.config.mode = mode;
    std::vector<std::uint32_t> ctx;
    for (int j = 0; j < 4; ++j) {
      ctx.push_back(static_cast<std::uint32_t>(rng.next_below(model.vocab.size())));
    }
    const auto probs =
        softmax_predict(model, ctx, rng.next_below(model.doc_vectors.rows()));
    double sum = 0.0;
    for (double p : probs) {
      EXPECT_GT(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(SoftmaxPredict, OutOfRangeIdsThrow) {
  auto model = train<float>(windows({"a b a b"}), sw(), toy_config(ModelMode::DM, 4, 0, 9));
  EXPECT_THROW(softmax_predict(model, {99}, 0), IndexError);
  EXPECT_THROW(softmax_predict(model, {0}, 99), IndexError);
}

TEST(Loss, UniformModelGivesLogVocabSize) {
  // Output weights start at zero, so the untrained model predicts uniformly
  // over V = 2 and the loss is exactly ln 2.
  const auto contexts = windows({"a b a b a"});
  auto model = train<float>(contexts, sw(), toy_config(ModelMode::DM, 4, 0, 42));
  EXPECT_NEAR(loss(model, contexts), std::log(2.0), 1e-12);
  auto dbow = train<float>(contexts, sw(), toy_config(ModelMode::DBOW, 4, 0, 42));
  EXPECT_NEAR(loss(dbow, contexts), std::log(2.0), 1e-12);
}

TEST(Loss, MatchesStraightLineOracle) {
  SplitMix64 rng(20240);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelMode mode = trial % 2 ? ModelMode::DM : ModelMode::DBOW;
    const std::size_t vocab_size = 2 + rng.next_below(7);
    const std::size_t dim = 1 + rng.next_below(5);
    const std::size_t n_docs = 1 + rng.next_below(3);
    const std::size_t window_k = 1 + rng.next_below(2);
    auto model = gen::random_tiny_model(rng, mode, vocab_size, dim, n_docs, window_k);
    const auto docs = gen::random_id_docs(rng, vocab_size, n_docs, 2, 12);
    EXPECT_NEAR(loss(model, docs), oracles::straight_line_loss(model, docs), 1e-10);
  }
}

TEST(Loss, SingleWindowAgainstOracle) {
  // Single tiny window at k=1.
  const auto contexts = windows({"a b a b a"});
  auto model = train<float>(contexts, sw(), toy_config(ModelMode::DM, 3, 2, 77));
  const auto docs = detail::docs_to_ids(model.vocab, contexts);
  EXPECT_NEAR(loss(model, contexts), oracles::straight_line_loss(model, docs), 1e-10);
}

TEST(Loss, TrainingDescends) {
  const auto contexts =
      windows({"red green red green red", "green blue green blue", "blue red blue red",
               "red red green blue", "green green blue red"});
  int descended = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto before = train<float>(contexts, sw(), toy_config(ModelMode::DM, 8, 0, seed));
    const auto after = train<float>(contexts, sw(), toy_config(ModelMode::DM, 8, 12, seed));
    if (loss(after, contexts) <= loss(before, contexts)) ++descended;
  }
  EXPECT_GE(descended, 9);
}

TEST(Gradients, MatchFiniteDifferences) {
  SplitMix64 rng(314);
  for (int trial = 0; trial < 10; ++trial) {
    const ModelMode mode = trial % 2 ? ModelMode::DM : ModelMode::DBOW;
    const std::size_t vocab_size = 2 + rng.next_below(7);
    const std::size_t dim = 1 + rng.next_below(6);
    const std::size_t window_k = 1 + rng.next_below(2);
    const std::size_t n_docs = 1 + rng.next_below(3);
    auto model = gen::random_tiny_model(rng, mode, vocab_size, dim, n_docs, window_k);
    const auto docs =
        gen::random_id_docs(rng, vocab_size, n_docs, 2 * window_k + 1, 2 * window_k + 6);
    EXPECT_LT(gradcheck::max_gradient_error(model, docs), 1e-4)
        << "mode " << static_cast<int>(mode) << " trial " << trial;
  }
}

TEST(Train, ZeroEpochsEqualsInitialization) {
  const auto contexts = windows({"a b c d e f g", "c d e f g h"});
  const auto cfg = toy_config(ModelMode::DM, 6, 0, 2024);
  const auto model = train<float>(contexts, sw(), cfg);
  // Replay the seeded initialization.
  SplitMix64 rng(cfg.seed);
  const double half_span = 0.5 / 6.0;
  for (float v : model.word_vectors.data()) {
    EXPECT_EQ(v, static_cast<float>(rng.uniform(-half_span, half_span)));
  }
  for (float v : model.doc_vectors.data()) {
    EXPECT_EQ(v, static_cast<float>(rng.uniform(-half_span, half_span)));
  }
  for (float v : model.output_weights.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Train, DeterministicGivenSeed) {
  const auto contexts =
      windows({"alpha beta gamma delta epsilon", "beta gamma delta epsilon zeta",
               "gamma delta epsilon zeta eta"});
  for (ModelMode mode : {ModelMode::DM, ModelMode::DBOW}) {
    const auto cfg = toy_config(mode, 8, 12, 555);
    const auto a = train<float>(contexts, sw(), cfg);
    const auto b = train<float>(contexts, sw(), cfg);
    EXPECT_TRUE(bits_equal(a.word_vectors, b.word_vectors));
    EXPECT_TRUE(bits_equal(a.output_weights, b.output_weights));
    EXPECT_TRUE(bits_equal(a.doc_vectors, b.doc_vectors));
    EXPECT_EQ(a.vocab.tokens, b.vocab.tokens);
  }
}

TEST(Train, SeparatesDisjointVocabularies) {
  // Two documents with disjoint vocabularies move apart; a third sharing
  // doc0's vocabulary stays close to it. Docs are long enough that 12
  // epochs of SGD dominate the initialization noise.
  auto repeat = [](const std::string& base, int n) {
    std::string out;
    for (int i = 0; i < n; ++i) out += base;
    return out;
  };
  const auto contexts =
      windows({repeat("red crimson scarlet ruby ", 12), repeat("blue azure navy cobalt ", 12),
               repeat("crimson red ruby scarlet ", 9)});
  int separated = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto model = train<float>(contexts, sw(), toy_config(ModelMode::DM, 8, 12, seed));
    const double cross = cosine_similarity(model.doc_vectors.row(0), model.doc_vectors.row(1));
    const double same = cosine_similarity(model.doc_vectors.row(0), model.doc_vectors.row(2));
    if (cross < same) ++separated;
  }
  EXPECT_GE(separated, 9);
}

TEST(Train, ResolvesAutoDefaults) {
  const auto contexts = windows({"a b c a b c a b c"});
  TrainConfig cfg = toy_config(ModelMode::DM, 0, 0, 5);
  auto model = train<float>(contexts, sw(), cfg);
  EXPECT_EQ(model.config.dim, 500u);
  EXPECT_EQ(model.config.objective, Objective::ExactSoftmax);
  EXPECT_EQ(model.word_vectors.cols(), 500u);
  cfg.mode = ModelMode::DBOW;
  model = train<float>(contexts, sw(), cfg);
  EXPECT_EQ(model.config.dim, 200u);
}

TEST(Train, NegativeSamplingDescendsExactLoss) {
  const auto contexts =
      windows({"red green red green red", "green blue green blue", "blue red blue red",
               "red red green blue", "green green blue red"});
  int descended = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto cfg = toy_config(ModelMode::DBOW, 8, 12, seed);
    cfg.objective = Objective::NegativeSampling;
    cfg.n_negatives = 5;
    const auto before = [&] {
      auto c = cfg;
      c.epochs = 0;
      return train<float>(contexts, sw(), c);
    }();
    const auto after = train<float>(contexts, sw(), cfg);
    if (loss(after, contexts) < loss(before, contexts)) ++descended;
  }
  EXPECT_GE(descended, 9);
}

TEST(Train, RejectsInvalidConfig) {
  const auto contexts = windows({"a b a b a"});
  auto cfg = toy_config(ModelMode::DM, 4, 12, 1);
  cfg.window_k = 0;
  EXPECT_THROW(train<float>(contexts, sw(), cfg), InvariantError);
  cfg = toy_config(ModelMode::DM, 4, 12, 1);
  cfg.learning_rate = 0.0f;
  EXPECT_THROW(train<float>(contexts, sw(), cfg), InvariantError);
  cfg = toy_config(ModelMode::DM, 4, 12, 1);
  EXPECT_THROW(train<float>(contexts, sw(), cfg, {DocTag{"x", 0}, DocTag{"y", 0}}),
               InvariantError);
}

TEST(Train, DivergenceRaisesNonFiniteError) {
  const auto contexts = windows({"a b c d e f g h i j", "b c d e f g h i j k"});
  auto cfg = toy_config(ModelMode::DM, 4, 12, 1);
  cfg.learning_rate = 1e30f;
  EXPECT_THROW(train<float>(contexts, sw(), cfg), NonFiniteError);
}

TEST(Train, ProgressCallbackReportsPerEpochLoss) {
  const auto contexts = windows({"a b a b a b", "b a b a b a"});
  std::vector<std::pair<std::size_t, double>> log;
  train<float>(contexts, sw(), toy_config(ModelMode::DM, 4, 12, 3), {},
               [&](std::size_t epoch, double l) { log.emplace_back(epoch, l); });
  ASSERT_EQ(log.size(), 12u);
  EXPECT_EQ(log.front().first, 0u);
  EXPECT_EQ(log.back().first, 11u);
  for (const auto& [epoch, l] : log) EXPECT_TRUE(std::isfinite(l));
}

TEST(Train, ParallelModeStaysFinite) {
  std::vector<std::string> texts;
  for (int i = 0; i < 16; ++i) {
    texts.push_back("alpha beta gamma delta epsilon zeta eta theta");
  }
  auto cfg = toy_config(ModelMode::DM, 8, 12, 9);
  cfg.threads = 4;
  const auto model = train<float>(windows(texts), sw(), cfg);
  EXPECT_TRUE(model.word_vectors.all_finite());
  EXPECT_TRUE(model.doc_vectors.all_finite());
  EXPECT_EQ(model.doc_vectors.rows(), 16u);
}

TEST(InferVector, SelfSimilarityOnTrainingText) {
  auto repeat = [](const std::string& base, int n) {
    std::string out;
    for (int i = 0; i < n; ++i) out += base;
    return out;
  };
  const auto contexts = windows({repeat("red crimson scarlet ruby ", 30),
                                 repeat("blue azure navy cobalt ", 30)});
  int close = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto model = train<float>(contexts, sw(), toy_config(ModelMode::DM, 8, 12, seed));
    const auto inferred = infer_vector(model, contexts[0].text);
    const double sim = cosine_similarity(std::span<const float>(inferred),
                                         model.doc_vectors.row(0));
    if (sim > 0.9) ++close;
  }
  EXPECT_GE(close, 9);
}

TEST(InferVector, UnknownTextThrows) {
  const auto contexts = windows({"a b a b a"});
  const auto model = train<float>(contexts, sw(), toy_config(ModelMode::DM, 4, 12, 8));
  EXPECT_THROW(infer_vector(model, "zzz qqq"), NoKnownTokensError);
  EXPECT_THROW(infer_vector(model, ""), NoKnownTokensError);
}

TEST(InferVector, ZeroEpochsReturnsSeededInitialization) {
  const auto contexts = windows({"a b a b a"});
  const auto model = train<float>(contexts, sw(), toy_config(ModelMode::DM, 4, 12, 8));
  const auto v0 = infer_vector(model, "a b", 0);
  const auto v0_again = infer_vector(model, "b a", 0);  // text-independent init
  EXPECT_EQ(v0, v0_again);
  SplitMix64 rng(mix_seed(model.config.seed, fnv1a64("infer")));
  for (float v : v0) {
    EXPECT_EQ(v, static_cast<float>(rng.uniform(-0.5 / 4, 0.5 / 4)));
  }
}

TEST(CosineSimilarity, KnownValuesAndErrors) {
  const std::vector<float> a{3.0f, 4.0f};
  EXPECT_DOUBLE_EQ(cosine_similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(std::vector<float>{1, 0}, std::vector<float>{0, 1}),
                   0.0);
  EXPECT_NEAR(cosine_similarity(std::vector<float>{1, 0}, std::vector<float>{1, 1}),
              1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_THROW(cosine_similarity(std::vector<float>{0, 0}, std::vector<float>{1, 1}),
               ZeroVectorError);
  EXPECT_THROW(cosine_similarity(std::vector<float>{1, 0}, std::vector<float>{1, 1, 1}),
               InvariantError);
}

TEST(CosineSimilarity, ScaleInvarianceAndSymmetry) {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(5), b(5);
    for (auto& v : a) v = rng.uniform(-1, 1);
    for (auto& v : b) v = rng.uniform(-1, 1);
    const double scale = rng.uniform(0.01, 100.0);
    std::vector<double> scaled = a;
    for (auto& v : scaled) v *= scale;
    EXPECT_NEAR(cosine_similarity(a, scaled), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(cosine_similarity(a, b), cosine_similarity(b, a));
    const double c = cosine_similarity(a, b);
    EXPECT_GE(c, -1.0);
    EXPECT_LE(c, 1.0);
  }
}
