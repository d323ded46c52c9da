// acrodis: acronym disambiguation from corpus to answer.
//
//   harvest       discover candidate expansions in a corpus and cut the
//                 surrounding context windows into a dataset
//   train         train a paragraph-vector model over a dataset
//   disambiguate  rank a dataset's expansions against a query context
//   evaluate      leave-one-out accuracy over a multi-record dataset
//   sweep         run the nine-point hyperparameter grid
//   plot          emit 2-D PCA projections of a model's context vectors
//
// Results go to stdout, diagnostics to stderr. Exit codes: 0 success,
// 1 empty result, 2 error. ACRODIS_STOPWORDS points at an override
// stop-word file (one word per line).

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "acrodis/acrodis.hpp"

namespace {

using namespace acrodis;

struct GlobalOpts {
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string log_level = "info";
};

struct TrainFlags {
  std::string mode = "dm";
  std::size_t dim = 0;  // 0 = per-mode default
  std::size_t epochs = 12;
  double lr = 0.025;
  std::size_t window = 5;
  std::size_t min_count = 1;
  std::string objective = "auto";
  std::size_t negatives = 5;
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--mode", flags.mode, "model variant")
      ->check(CLI::IsMember({"dm", "dbow"}))
      ->capture_default_str();
  cmd->add_option("--dim", flags.dim, "embedding size (0 = per-mode default)")
      ->capture_default_str();
  cmd->add_option("--epochs", flags.epochs, "training epochs")->capture_default_str();
  cmd->add_option("--lr", flags.lr, "initial learning rate")->capture_default_str();
  cmd->add_option("--window", flags.window, "context half-width k")->capture_default_str();
  cmd->add_option("--min-count", flags.min_count, "minimum token frequency")
      ->capture_default_str();
  cmd->add_option("--objective", flags.objective, "softmax objective")
      ->check(CLI::IsMember({"auto", "exact", "ns"}))
      ->capture_default_str();
  cmd->add_option("--negatives", flags.negatives, "negative samples per position")
      ->capture_default_str();
}

TrainConfig to_train_config(const TrainFlags& flags, const GlobalOpts& global) {
  TrainConfig cfg;
  cfg.mode = flags.mode == "dbow" ? ModelMode::DBOW : ModelMode::DM;
  cfg.dim = flags.dim;
  cfg.epochs = flags.epochs;
  cfg.learning_rate = static_cast<float>(flags.lr);
  cfg.window_k = flags.window;
  cfg.min_count = flags.min_count;
  if (flags.objective == "exact") cfg.objective = Objective::ExactSoftmax;
  else if (flags.objective == "ns") cfg.objective = Objective::NegativeSampling;
  else cfg.objective = Objective::Auto;
  cfg.n_negatives = flags.negatives;
  cfg.seed = global.seed;
  return cfg;
}

StopwordList load_stopwords() {
  if (const char* path = std::getenv("ACRODIS_STOPWORDS")) {
    return StopwordList::from_file(path);
  }
  return StopwordList::builtin();
}

void debug_echo_config(const GlobalOpts& global, const TrainConfig& cfg) {
  if (global.log_level != "debug") return;
  std::cerr << "config: mode=" << (cfg.mode == ModelMode::DM ? "dm" : "dbow")
            << " dim=" << cfg.effective_dim() << " window=" << cfg.window_k
            << " epochs=" << cfg.epochs << " lr=" << cfg.learning_rate
            << " min_count=" << cfg.min_count << " negatives=" << cfg.n_negatives
            << " seed=" << cfg.seed << " threads=" << global.threads << '\n';
}

/// Flatten a record into training contexts tagged (expansion, index).
void collect_contexts(const AcronymRecord& record, std::vector<ContextWindow>& contexts,
                      std::vector<DocTag>& tags) {
  for (const ExpansionEntry& entry : record.entries) {
    for (std::uint32_t i = 0; i < entry.contexts.size(); ++i) {
      contexts.push_back(entry.contexts[i]);
      tags.push_back(DocTag{entry.expansion, i});
    }
  }
}

nlohmann::json result_to_json(const std::string& acronym, const DisambiguationResult& result) {
  nlohmann::json ranked = nlohmann::json::array();
  for (const ScoredExpansion& s : result.ranked) {
    ranked.push_back({{"expansion", s.expansion}, {"similarity", s.best_similarity}});
  }
  return {{"acronym", acronym}, {"selected", result.selected}, {"ranked", std::move(ranked)}};
}

/// Parse a grid file: one JSON object per line with "mode", "dim",
/// "epochs", and optional "context_chars".
std::vector<GridEntry> load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open grid file: " + path);
  std::vector<GridEntry> grid;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw FormatError("grid line is not a JSON object", line_no);
    }
    GridEntry entry;
    const std::string mode = j.value("mode", "dm");
    if (mode != "dm" && mode != "dbow") throw FormatError("mode must be dm or dbow", line_no);
    entry.mode = mode == "dbow" ? ModelMode::DBOW : ModelMode::DM;
    entry.dim = j.value("dim", std::size_t{0});
    entry.epochs = j.value("epochs", std::size_t{12});
    if (j.contains("context_chars")) entry.context_chars = j["context_chars"].get<std::size_t>();
    grid.push_back(entry);
  }
  if (grid.empty()) throw FormatError("grid file has no entries");
  return grid;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  for (const AcronymStats& s : report.per_acronym) {
    const double acc =
        s.n_queries ? static_cast<double>(s.n_correct) / static_cast<double>(s.n_queries) : 0.0;
    out << nlohmann::json{{"acronym", s.acronym},
                          {"n_queries", s.n_queries},
                          {"n_correct", s.n_correct},
                          {"accuracy", acc}}
               .dump()
        << '\n';
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", report.overall_accuracy);
  out << "accuracy=" << buf << '\n';
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open report file for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acronym disambiguation via paragraph-vector context embeddings"};
  app.require_subcommand(1);

  GlobalOpts global;
  app.add_option("--seed", global.seed, "base seed for all randomness")->capture_default_str();
  app.add_option("--threads", global.threads,
                 "worker threads (1 = deterministic)")
      ->capture_default_str();
  app.add_option("--log-level", global.log_level, "quiet|info|debug")
      ->check(CLI::IsMember({"quiet", "info", "debug"}))
      ->capture_default_str();

  int rc = 0;

  // ---- harvest ------------------------------------------------------------
  auto* harvest = app.add_subcommand(
      "harvest", "discover expansions of an acronym and harvest context windows");
  harvest->fallthrough();
  std::string h_acronym, h_corpus, h_dataset;
  std::size_t h_before = 1000, h_after = 1000;
  harvest->add_option("--acronym", h_acronym, "acronym to search for")->required();
  harvest->add_option("--corpus", h_corpus, "corpus file (one JSON document per line)")
      ->required();
  harvest->add_option("--dataset", h_dataset, "output dataset path")->required();
  harvest->add_option("--before-chars", h_before, "context budget before the expansion")
      ->capture_default_str();
  harvest->add_option("--after-chars", h_after, "context budget after the expansion")
      ->capture_default_str();
  harvest->callback([&] {
    const StopwordList stopwords = load_stopwords();
    const std::vector<Document> corpus = load_corpus(h_corpus);
    const auto occurrences = find_expansions(h_acronym, corpus, stopwords);
    if (occurrences.empty()) {
      std::cerr << "no expansions found\n";
      rc = 1;
      return;
    }
    const AcronymRecord record =
        harvest_contexts(h_acronym, occurrences, corpus, h_before, h_after);
    save_dataset(record, h_dataset);
    std::size_t n_contexts = 0;
    for (const auto& entry : record.entries) n_contexts += entry.contexts.size();
    std::cout << "expansions=" << record.entries.size() << " contexts=" << n_contexts
              << '\n';
  });

  // ---- train ----------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train a model over one dataset record");
  train_cmd->fallthrough();
  std::string t_dataset, t_model;
  TrainFlags t_flags;
  bool t_allow_external = false;
  train_cmd->add_option("--dataset", t_dataset, "input dataset (single record)")->required();
  train_cmd->add_option("--model", t_model, "output model path")->required();
  train_cmd->add_flag("--allow-external-expansions", t_allow_external,
                      "accept expansions that fail the matching rules");
  add_train_flags(train_cmd, t_flags);
  train_cmd->callback([&] {
    const StopwordList stopwords = load_stopwords();
    DatasetLoadOptions opts;
    opts.allow_external_expansions = t_allow_external;
    opts.stopwords = &stopwords;
    const AcronymRecord record = load_dataset(t_dataset, opts);
    std::vector<ContextWindow> contexts;
    std::vector<DocTag> tags;
    collect_contexts(record, contexts, tags);
    if (contexts.empty()) throw EmptyRecordError("dataset has no contexts to train on");
    TrainConfig cfg = to_train_config(t_flags, global);
    cfg.threads = global.threads;
    debug_echo_config(global, cfg);
    ProgressFn progress;
    if (global.log_level != "quiet") {
      progress = [](std::size_t epoch, double loss_value) {
        std::cerr << "epoch=" << epoch << " loss=" << loss_value << '\n';
      };
    }
    const EmbeddingModel model = train<float>(contexts, stopwords, cfg, tags, progress);
    save_model(model, t_model);
    std::cout << "trained acronym=" << record.acronym << " vocab=" << model.vocab.size()
              << " docs=" << model.doc_vectors.rows() << " dim=" << model.config.dim << '\n';
  });

  // ---- disambiguate -----------------------------------------------------------
  auto* dis = app.add_subcommand("disambiguate", "select the expansion for a query context");
  dis->fallthrough();
  std::string d_dataset, d_context;
  bool d_infer = false, d_allow_external = false;
  TrainFlags d_flags;
  dis->add_option("--dataset", d_dataset, "input dataset (single record)")->required();
  dis->add_option("--context", d_context, "query context (stdin when omitted)");
  dis->add_flag("--infer", d_infer, "embed the query by inference instead of retraining");
  dis->add_flag("--allow-external-expansions", d_allow_external,
                "accept expansions that fail the matching rules");
  add_train_flags(dis, d_flags);
  dis->callback([&] {
    const StopwordList stopwords = load_stopwords();
    DatasetLoadOptions opts;
    opts.allow_external_expansions = d_allow_external;
    opts.stopwords = &stopwords;
    const AcronymRecord record = load_dataset(d_dataset, opts);
    std::string context = d_context;
    if (context.empty()) {
      std::ostringstream ss;
      ss << std::cin.rdbuf();
      context = ss.str();
      while (!context.empty() && (context.back() == '\n' || context.back() == '\r')) {
        context.pop_back();
      }
    }
    if (context.empty()) throw InvariantError("empty context");
    const TrainConfig cfg = to_train_config(d_flags, global);
    debug_echo_config(global, cfg);
    const Query query{record.acronym, context, std::nullopt};
    const DisambiguationResult result =
        disambiguate(record, query, cfg, stopwords,
                     d_infer ? QueryEmbedding::Infer : QueryEmbedding::Retrain);
    std::cout << result_to_json(record.acronym, result).dump() << '\n';
  });

  // ---- evaluate ---------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("evaluate", "leave-one-out accuracy over a dataset");
  eval_cmd->fallthrough();
  std::string e_dataset, e_report;
  double e_threshold = 0.9;
  bool e_include_trivial = false, e_infer = false, e_allow_external = false;
  std::size_t e_max_queries = 0;
  TrainFlags e_flags;
  eval_cmd->add_option("--dataset", e_dataset, "input dataset (one record per line)")
      ->required();
  eval_cmd->add_option("--report", e_report, "also write the report to this file");
  eval_cmd->add_option("--threshold", e_threshold, "sequence-match verification threshold")
      ->capture_default_str();
  eval_cmd->add_flag("--include-trivial", e_include_trivial,
                     "include single-expansion records in accuracy");
  eval_cmd->add_flag("--infer", e_infer, "embed queries by inference instead of retraining");
  eval_cmd->add_flag("--allow-external-expansions", e_allow_external,
                     "accept expansions that fail the matching rules");
  eval_cmd->add_option("--max-queries", e_max_queries,
                       "cap leave-one-out queries per acronym (0 = all)");
  add_train_flags(eval_cmd, e_flags);
  eval_cmd->callback([&] {
    const StopwordList stopwords = load_stopwords();
    DatasetLoadOptions opts;
    opts.allow_external_expansions = e_allow_external;
    opts.stopwords = &stopwords;
    const std::vector<AcronymRecord> dataset = load_dataset_all(e_dataset, opts);
    EvalConfig cfg;
    cfg.train_cfg = to_train_config(e_flags, global);
    cfg.threshold = e_threshold;
    cfg.include_trivial = e_include_trivial;
    cfg.query_embedding = e_infer ? QueryEmbedding::Infer : QueryEmbedding::Retrain;
    cfg.threads = global.threads;
    debug_echo_config(global, cfg.train_cfg);
    if (e_max_queries) cfg.max_queries_per_acronym = e_max_queries;
    const EvalReport report = evaluate(dataset, cfg, stopwords);
    const std::string text = format_report(report);
    std::cout << text;
    if (!e_report.empty()) write_text_file(e_report, text);
  });

  // ---- sweep ------------------------------------------------------------------
  auto* sweep_cmd =
      app.add_subcommand("sweep", "run a hyperparameter grid (default: the nine-row table)");
  sweep_cmd->fallthrough();
  std::string s_dataset, s_report, s_grid;
  bool s_allow_external = false;
  double s_threshold = 0.9;
  std::size_t s_max_queries = 0;
  TrainFlags s_flags;
  sweep_cmd->add_option("--dataset", s_dataset, "input dataset (one record per line)")
      ->required();
  sweep_cmd->add_option("--grid", s_grid,
                        "grid file (one JSON object per line: mode, dim, epochs, "
                        "context_chars)");
  sweep_cmd->add_option("--report", s_report, "also write the table to this file");
  sweep_cmd->add_option("--threshold", s_threshold, "sequence-match verification threshold")
      ->capture_default_str();
  sweep_cmd->add_option("--max-queries", s_max_queries,
                        "cap leave-one-out queries per acronym (0 = all)");
  sweep_cmd->add_flag("--allow-external-expansions", s_allow_external,
                      "accept expansions that fail the matching rules");
  add_train_flags(sweep_cmd, s_flags);
  sweep_cmd->callback([&] {
    const StopwordList stopwords = load_stopwords();
    DatasetLoadOptions opts;
    opts.allow_external_expansions = s_allow_external;
    opts.stopwords = &stopwords;
    const std::vector<AcronymRecord> dataset = load_dataset_all(s_dataset, opts);
    EvalConfig cfg;
    cfg.train_cfg = to_train_config(s_flags, global);
    cfg.threshold = s_threshold;
    cfg.threads = global.threads;
    if (s_max_queries) cfg.max_queries_per_acronym = s_max_queries;
    cfg.grid = s_grid.empty() ? table1_grid() : load_grid(s_grid);
    const auto rows = grid_sweep(dataset, cfg, stopwords);
    const std::string table = format_sweep_table(rows);
    std::cout << table;
    if (!s_report.empty()) write_text_file(s_report, table);
  });

  // ---- plot -------------------------------------------------------------------
  auto* plot_cmd = app.add_subcommand("plot", "emit 2-D PCA plot data for a trained model");
  plot_cmd->fallthrough();
  std::string p_model, p_out;
  plot_cmd->add_option("--model", p_model, "input model file")->required();
  plot_cmd->add_option("--out", p_out, "output CSV path")->required();
  plot_cmd->callback([&] {
    const EmbeddingModel model = load_model(p_model);
    emit_plot_data(model, std::filesystem::path(p_out));
    std::cout << "rows=" << model.doc_vectors.rows() << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return rc;
}
