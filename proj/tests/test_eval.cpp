#include "acrodis/eval.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "acrodis/rng.hpp"
#include "generators.hpp"

using namespace acrodis;

namespace {

EvalConfig fast_eval_cfg(std::uint64_t seed) {
  EvalConfig cfg;
  cfg.train_cfg.mode = ModelMode::DM;
  cfg.train_cfg.dim = 32;
  cfg.train_cfg.window_k = 1;
  cfg.train_cfg.epochs = 12;
  cfg.train_cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(Evaluate, DisjointVocabulariesScoreHighly) {
  gen::SyntheticSpec spec;
  spec.n_acronyms = 1;
  spec.min_expansions = 2;
  spec.max_expansions = 2;
  spec.contexts_per_expansion = 2;
  spec.seed = 42;
  const auto dataset = gen::disjoint_vocab_dataset(spec);
  int perfect = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const EvalReport report = evaluate(dataset, fast_eval_cfg(seed));
    if (report.overall_accuracy == 1.0) ++perfect;
  }
  EXPECT_GE(perfect, 9);
}

TEST(Evaluate, ReportArithmetic) {
  // Property over arbitrary generated datasets: the overall accuracy is the
  // ratio of summed counts and each stored context becomes a query once.
  for (std::uint64_t dataset_seed : {7u, 19u, 23u, 31u}) {
    gen::SyntheticSpec spec;
    spec.n_acronyms = 1 + dataset_seed % 4;
    spec.contexts_per_expansion = 2 + dataset_seed % 2;
    spec.tokens_per_context = 15;
    spec.seed = dataset_seed;
    const auto dataset = gen::disjoint_vocab_dataset(spec);
    const EvalReport report = evaluate(dataset, fast_eval_cfg(5));
    std::size_t queries = 0, correct = 0;
    for (const AcronymStats& s : report.per_acronym) {
      EXPECT_LE(s.n_correct, s.n_queries);
      queries += s.n_queries;
      correct += s.n_correct;
    }
    EXPECT_GT(queries, 0u);
    EXPECT_DOUBLE_EQ(report.overall_accuracy,
                     static_cast<double>(correct) / static_cast<double>(queries));
    std::size_t expected_queries = 0;
    for (const auto& record : dataset) {
      for (const auto& entry : record.entries) expected_queries += entry.contexts.size();
    }
    EXPECT_EQ(queries, expected_queries);
  }
}

TEST(Evaluate, OrderInvariance) {
  gen::SyntheticSpec spec;
  spec.n_acronyms = 3;
  spec.contexts_per_expansion = 2;
  spec.tokens_per_context = 12;
  spec.seed = 99;
  auto dataset = gen::disjoint_vocab_dataset(spec);
  const EvalReport forward = evaluate(dataset, fast_eval_cfg(3));
  std::reverse(dataset.begin(), dataset.end());
  const EvalReport backward = evaluate(dataset, fast_eval_cfg(3));
  EXPECT_DOUBLE_EQ(forward.overall_accuracy, backward.overall_accuracy);
  for (const AcronymStats& f : forward.per_acronym) {
    const auto it = std::find_if(
        backward.per_acronym.begin(), backward.per_acronym.end(),
        [&](const AcronymStats& b) { return b.acronym == f.acronym; });
    ASSERT_NE(it, backward.per_acronym.end());
    EXPECT_EQ(it->n_queries, f.n_queries);
    EXPECT_EQ(it->n_correct, f.n_correct);
  }
}

TEST(Evaluate, NeverTrainsOnTheQueryWindow) {
  gen::SyntheticSpec spec;
  spec.n_acronyms = 2;
  spec.contexts_per_expansion = 3;
  spec.tokens_per_context = 10;
  spec.seed = 17;
  const auto dataset = gen::disjoint_vocab_dataset(spec);
  std::size_t observed = 0;
  evaluate(dataset, fast_eval_cfg(2), StopwordList::builtin(),
           [&](const AcronymRecord& reduced, const Query& query) {
             ++observed;
             ASSERT_TRUE(query.gold_expansion.has_value());
             std::size_t full = 0;
             for (const auto& record : dataset) {
               if (record.acronym != reduced.acronym) continue;
               for (const auto& entry : record.entries) full += entry.contexts.size();
             }
             std::size_t kept = 0;
             for (const auto& entry : reduced.entries) {
               for (const auto& ctx : entry.contexts) {
                 (void)ctx;
                 ++kept;
               }
             }
             EXPECT_EQ(kept, full - 1);
             // The held-out text must not appear among the gold entry's
             // training contexts at its own offsets.
             for (const auto& entry : reduced.entries) {
               if (entry.expansion != *query.gold_expansion) continue;
               for (const auto& ctx : entry.contexts) {
                 EXPECT_FALSE(ctx.text == query.context_text &&
                              ctx.source_doc_id == reduced.acronym);
               }
             }
           });
  EXPECT_GT(observed, 0u);
}

TEST(Evaluate, MaxQueriesSubsampling) {
  gen::SyntheticSpec spec;
  spec.n_acronyms = 4;
  spec.contexts_per_expansion = 3;
  spec.tokens_per_context = 10;
  spec.seed = 5;
  const auto dataset = gen::disjoint_vocab_dataset(spec);
  EvalConfig cfg = fast_eval_cfg(8);
  cfg.max_queries_per_acronym = 1;
  const EvalReport report = evaluate(dataset, cfg);
  std::size_t total = 0;
  for (const AcronymStats& s : report.per_acronym) {
    EXPECT_EQ(s.n_queries, 1u);
    total += s.n_queries;
  }
  EXPECT_EQ(total, report.per_acronym.size());
}

TEST(Evaluate, SkipsSingleExpansionRecordsByDefault) {
  AcronymRecord trivial;
  trivial.acronym = "QQQ";
  trivial.entries.push_back(
      {"Quick Quiet Quorum", {gen::make_context("quick quiet quorum words here")}});

  gen::SyntheticSpec spec;
  spec.n_acronyms = 1;
  spec.contexts_per_expansion = 2;
  spec.tokens_per_context = 10;
  spec.seed = 77;
  auto dataset = gen::disjoint_vocab_dataset(spec);
  dataset.push_back(trivial);

  const EvalReport without = evaluate(dataset, fast_eval_cfg(1));
  EXPECT_EQ(without.per_acronym.size(), 1u);

  EvalConfig with = fast_eval_cfg(1);
  with.include_trivial = true;
  const EvalReport report = evaluate(dataset, with);
  EXPECT_EQ(report.per_acronym.size(), 2u);
  const auto it = std::find_if(report.per_acronym.begin(), report.per_acronym.end(),
                               [](const AcronymStats& s) { return s.acronym == "QQQ"; });
  ASSERT_NE(it, report.per_acronym.end());
  EXPECT_EQ(it->n_correct, it->n_queries);  // trivially correct
}

TEST(Evaluate, EmptyDatasetThrows) {
  EXPECT_THROW(evaluate({}, fast_eval_cfg(1)), EmptyDatasetError);
  AcronymRecord bare;
  bare.acronym = "AB";
  bare.entries.push_back({"Alpha Beta", {}});
  EXPECT_THROW(evaluate({bare}, fast_eval_cfg(1)), EmptyDatasetError);
}

TEST(Evaluate, ParallelReportMatchesSerial) {
  gen::SyntheticSpec spec;
  spec.n_acronyms = 4;
  spec.contexts_per_expansion = 2;
  spec.tokens_per_context = 12;
  spec.seed = 55;
  const auto dataset = gen::disjoint_vocab_dataset(spec);
  const EvalReport serial = evaluate(dataset, fast_eval_cfg(6));
  EvalConfig parallel_cfg = fast_eval_cfg(6);
  parallel_cfg.threads = 4;
  const EvalReport parallel = evaluate(dataset, parallel_cfg);
  ASSERT_EQ(serial.per_acronym.size(), parallel.per_acronym.size());
  for (std::size_t i = 0; i < serial.per_acronym.size(); ++i) {
    EXPECT_EQ(serial.per_acronym[i].acronym, parallel.per_acronym[i].acronym);
    EXPECT_EQ(serial.per_acronym[i].n_queries, parallel.per_acronym[i].n_queries);
    EXPECT_EQ(serial.per_acronym[i].n_correct, parallel.per_acronym[i].n_correct);
  }
  EXPECT_DOUBLE_EQ(serial.overall_accuracy, parallel.overall_accuracy);
}

TEST(GridSweep, RunsEveryPointInOrder) {
  gen::SyntheticSpec spec;
  spec.n_acronyms = 2;
  spec.contexts_per_expansion = 2;
  spec.tokens_per_context = 10;
  spec.seed = 21;
  const auto dataset = gen::disjoint_vocab_dataset(spec);
  EvalConfig cfg = fast_eval_cfg(4);
  cfg.grid = {GridEntry{ModelMode::DM, 8, 12, std::nullopt},
              GridEntry{ModelMode::DBOW, 8, 12, 40}};
  const auto rows = grid_sweep(dataset, cfg);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].train_cfg.mode, ModelMode::DM);
  EXPECT_EQ(rows[1].train_cfg.mode, ModelMode::DBOW);
  EXPECT_EQ(rows[1].train_cfg.dim, 8u);

  // Duplicate grid entries with equal seeds give identical reports.
  cfg.grid = {GridEntry{ModelMode::DM, 8, 12, std::nullopt},
              GridEntry{ModelMode::DM, 8, 12, std::nullopt}};
  const auto dup = grid_sweep(dataset, cfg);
  EXPECT_DOUBLE_EQ(dup[0].report.overall_accuracy, dup[1].report.overall_accuracy);

  cfg.grid.clear();
  EXPECT_THROW(grid_sweep(dataset, cfg), InvariantError);
}

TEST(GridSweep, Table1GridShapeAndFormatting) {
  const auto grid = table1_grid();
  ASSERT_EQ(grid.size(), 9u);
  std::multiset<std::size_t> dims;
  for (const auto& entry : grid) dims.insert(entry.dim);
  EXPECT_TRUE(dims.count(200) && dims.count(500) && dims.count(750));
  std::size_t dbow = 0, dm = 0;
  for (const auto& entry : grid) (entry.mode == ModelMode::DBOW ? dbow : dm)++;
  EXPECT_EQ(dbow, 5u);
  EXPECT_EQ(dm, 4u);
}

TEST(GridSweep, ContextTruncationRespectsWordBoundaries) {
  ContextWindow ctx = gen::make_context("alpha beta gamma delta", "doc", 10);
  const ContextWindow cut = acrodis::detail::truncate_context(ctx, 13);
  EXPECT_EQ(cut.text, "alpha beta");
  EXPECT_EQ(cut.char_start, 10u);
  EXPECT_EQ(cut.char_end, 20u);
  validate_context_window(cut);
  const ContextWindow same = acrodis::detail::truncate_context(ctx, 1000);
  EXPECT_EQ(same, ctx);
}

TEST(EmitPlotData, RowsAndDegenerateInput) {
  gen::SyntheticSpec spec;
  spec.n_acronyms = 1;
  spec.contexts_per_expansion = 3;
  spec.tokens_per_context = 12;
  spec.seed = 31;
  const auto dataset = gen::disjoint_vocab_dataset(spec);
  const AcronymRecord& record = dataset[0];
  std::vector<ContextWindow> contexts;
  std::vector<DocTag> tags;
  for (const auto& entry : record.entries) {
    for (std::uint32_t i = 0; i < entry.contexts.size(); ++i) {
      contexts.push_back(entry.contexts[i]);
      tags.push_back({entry.expansion, i});
    }
  }
  TrainConfig cfg = fast_eval_cfg(9).train_cfg;
  const EmbeddingModel model = train<float>(contexts, StopwordList::builtin(), cfg, tags);
  std::ostringstream out;
  emit_plot_data(model, out);
  std::istringstream in(out.str());
  std::string line;
  ASSERT_TRUE(std::getline(in, line));
  EXPECT_EQ(line, "x,y,expansion,context_index");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, contexts.size());

  // Identical doc vectors cannot be projected.
  EmbeddingModel degenerate = model;
  for (std::size_t d = 0; d < degenerate.doc_vectors.rows(); ++d) {
    for (std::size_t c = 0; c < degenerate.doc_vectors.cols(); ++c) {
      degenerate.doc_vectors(d, c) = 0.25f;
    }
  }
  std::ostringstream sink;
  EXPECT_THROW(emit_plot_data(degenerate, sink), DegenerateInputError);
}

TEST(EmitPlotData, SeparatedClustersStaySeparatedIn2d) {
  gen::SyntheticSpec spec;
  spec.n_acronyms = 1;
  spec.min_expansions = 2;
  spec.max_expansions = 2;
  spec.contexts_per_expansion = 4;
  spec.seed = 61;
  const auto dataset = gen::disjoint_vocab_dataset(spec);
  const AcronymRecord& record = dataset[0];
  std::vector<ContextWindow> contexts;
  std::vector<DocTag> tags;
  for (const auto& entry : record.entries) {
    for (std::uint32_t i = 0; i < entry.contexts.size(); ++i) {
      contexts.push_back(entry.contexts[i]);
      tags.push_back({entry.expansion, i});
    }
  }
  TrainConfig cfg = fast_eval_cfg(3).train_cfg;
  cfg.dim = 32;
  const EmbeddingModel model = train<float>(contexts, StopwordList::builtin(), cfg, tags);
  std::ostringstream out;
  emit_plot_data(model, out);

  // Parse the emitted file and compare centroid distance against mean
  // within-cluster spread.
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);  // header
  struct Pt { double x, y; std::string label; };
  std::vector<Pt> pts;
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const auto c3 = line.rfind(',');
    pts.push_back(Pt{std::stod(line.substr(0, c1)), std::stod(line.substr(c1 + 1, c2 - c1 - 1)),
                     line.substr(c2 + 1, c3 - c2 - 1)});
  }
  ASSERT_EQ(pts.size(), 8u);
  auto centroid = [&](const std::string& label) {
    double x = 0, y = 0;
    int n = 0;
    for (const auto& p : pts) {
      if (p.label == label) {
        x += p.x;
        y += p.y;
        ++n;
      }
    }
    return std::pair<double, double>{x / n, y / n};
  };
  const std::string label_a = record.entries[0].expansion;
  const std::string label_b = record.entries[1].expansion;
  const auto [ax, ay] = centroid(label_a);
  const auto [bx, by] = centroid(label_b);
  const double between = std::hypot(ax - bx, ay - by);
  double within = 0.0;
  for (const auto& p : pts) {
    const auto [cx, cy] = p.label == label_a ? std::pair{ax, ay} : std::pair{bx, by};
    within += std::hypot(p.x - cx, p.y - cy);
  }
  within /= static_cast<double>(pts.size());
  EXPECT_GT(between, within);
}
