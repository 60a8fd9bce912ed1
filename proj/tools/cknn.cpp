// cknn: ingest, recommend, evaluate, sweep, bench and generate.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 data error,
// 4 empty result (no neighbor shares an item with the prefix).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cknn/cknn.hpp"
#include "json.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitEmpty = 4;

struct InputOptions {
  std::string path;
  std::string kind = "log";
  std::string delimiter = "\\t";
  bool no_header = false;
  std::size_t session_column = 0;
  std::size_t item_column = 1;
  std::size_t time_column = 2;
  double max_malformed = 0.01;
  std::size_t total_days = 31;
  std::size_t min_session_length = 0;
  std::size_t min_item_support = 0;
};

struct SplitOptions {
  std::size_t train_days = 0;
  std::size_t test_days = 1;
  std::size_t windows = 0;
  std::size_t window_days = 91;
  cknn::Timestamp day_length = 86'400;
};

struct PipelineOptions {
  std::size_t k_recent = 1000;
  std::size_t k_top = 500;
  std::string strategy = "epcsr";
  std::string preset;
  double lambda = 0.5;
  double beta = 0.5;
  std::string form = "full";
  std::size_t list_length = 20;
  bool exclude_seen = false;
  std::string recommender = "cknn";
};

struct Globals {
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

char parse_delimiter(const std::string& text) {
  if (text == "\\t" || text == "tab") return '\t';
  if (text.size() == 1) return text[0];
  throw cknn::Error(cknn::ErrorKind::kInvalidArgument, "delimiter must be a single character or 'tab'");
}

void add_input(CLI::App& cmd, InputOptions& in) {
  cmd.add_option("-i,--input", in.path, "Interaction log or playlist file")->required()->check(CLI::ExistingFile);
  cmd.add_option("--input-kind", in.kind, "Input layout")->check(CLI::IsMember({"log", "playlist"}))->capture_default_str();
  cmd.add_option("--delimiter", in.delimiter, "Field delimiter (single character or 'tab')")->capture_default_str();
  cmd.add_flag("--no-header", in.no_header, "The log has no header row");
  cmd.add_option("--session-column", in.session_column, "0-based session id column")->capture_default_str();
  cmd.add_option("--item-column", in.item_column, "0-based item id column")->capture_default_str();
  cmd.add_option("--time-column", in.time_column, "0-based timestamp column")->capture_default_str();
  cmd.add_option("--max-malformed", in.max_malformed, "Abort when malformed rows exceed this fraction")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd.add_option("--total-days", in.total_days, "Days over which playlists are spread")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--min-session-length", in.min_session_length, "Drop shorter sessions (0 disables)")
      ->capture_default_str();
  cmd.add_option("--min-item-support", in.min_item_support, "Drop items seen in fewer sessions (0 disables)")
      ->capture_default_str();
}

void add_split(CLI::App& cmd, SplitOptions& s) {
  cmd.add_option("--train-days", s.train_days, "Training days before the test days (0 = all earlier days)")
      ->capture_default_str();
  cmd.add_option("--test-days", s.test_days, "Trailing days used as the test set")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--windows", s.windows, "Number of rolling windows (0 = single day split)")->capture_default_str();
  cmd.add_option("--window-days", s.window_days, "Days per rolling window; the last one is the test day")
      ->capture_default_str();
  cmd.add_option("--day-length", s.day_length, "Timestamp units per day")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void add_pipeline(CLI::App& cmd, PipelineOptions& p) {
  cmd.add_option("--k-recent", p.k_recent, "Candidate sessions kept by recency")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--k-top", p.k_top, "Nearest neighbors kept")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--strategy", p.strategy, "Candidate selection: original, epcs or epcsr")->capture_default_str();
  cmd.add_option("--preset", p.preset, "Similarity preset: cosine, md, hc, mdhc (uses --lambda) or dsm");
  cmd.add_option("--lambda", p.lambda, "Session-degree balance in [0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd.add_option("--beta", p.beta, "Item-popularity damping in [0, 1]")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cmd.add_option("--form", p.form, "Similarity form: full or simplified")
      ->check(CLI::IsMember({"full", "simplified"}))
      ->capture_default_str();
  cmd.add_option("-L,--list-length", p.list_length, "Recommendation list length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_flag("--exclude-seen", p.exclude_seen, "Remove already clicked items from the list");
  cmd.add_option("--recommender", p.recommender, "cknn or iknn")->capture_default_str();
}

cknn::PipelineConfig pipeline_config(const PipelineOptions& p) {
  cknn::PipelineConfig cfg;
  cfg.k_recent = p.k_recent;
  cfg.k_top = p.k_top;
  cfg.strategy = cknn::parse_strategy(p.strategy);
  if (p.preset.empty()) {
    cfg.similarity.lambda = p.lambda;
    cfg.similarity.beta = p.beta;
  } else {
    cfg.similarity = cknn::preset(p.preset, p.lambda);
  }
  cfg.similarity.form = p.form == "simplified" ? cknn::SimilarityForm::kSimplified : cknn::SimilarityForm::kFull;
  cfg.list_length = p.list_length;
  cfg.exclude_seen = p.exclude_seen;
  cfg.validate();
  return cfg;
}

cknn::InteractionLog load_input(const InputOptions& in, const Globals& g) {
  std::ifstream file(in.path);
  if (!file) throw cknn::Error(cknn::ErrorKind::kIo, "cannot open " + in.path);
  cknn::InteractionLog log;
  cknn::LoadStats stats;
  if (in.kind == "playlist") {
    cknn::PlaylistFormat format;
    format.delimiter = parse_delimiter(in.delimiter);
    format.total_days = in.total_days;
    format.seed = g.seed;
    log = cknn::load_playlists(file, format, &stats);
  } else {
    cknn::LogFormat format;
    format.delimiter = parse_delimiter(in.delimiter);
    format.header = !in.no_header;
    format.session_column = in.session_column;
    format.item_column = in.item_column;
    format.time_column = in.time_column;
    format.max_malformed_fraction = in.max_malformed;
    log = cknn::load_timestamped_log(file, format, &stats);
  }
  if (in.min_session_length > 0 || in.min_item_support > 0) {
    log.rows = cknn::filter_interactions(log.rows, in.min_session_length, in.min_item_support);
  }
  if (log.rows.empty()) throw cknn::Error(cknn::ErrorKind::kEmptyDataset, in.path + " contains no interactions");
  cknn::logging::info("loaded " + std::to_string(log.rows.size()) + " interactions from " + in.path);
  return log;
}

std::vector<cknn::Split> make_splits(const cknn::InteractionLog& log, const SplitOptions& s) {
  if (s.windows > 0) return cknn::rolling_windows(log.rows, s.window_days, s.windows, s.day_length);
  return {cknn::split_by_days(log.rows, {s.train_days, s.test_days, s.day_length})};
}

struct Fold {
  cknn::BipartiteIndex index;
  std::vector<cknn::PrefixTask> tasks;
};

std::vector<Fold> make_folds(const cknn::InteractionLog& log, const SplitOptions& s) {
  std::vector<Fold> folds;
  for (const auto& split : make_splits(log, s)) {
    auto index = cknn::BipartiteIndex::build(split.train);
    auto tasks = cknn::make_prefix_tasks(cknn::group_sessions(split.test), index);
    if (tasks.empty()) {
      throw cknn::Error(cknn::ErrorKind::kEmptyTestSet, "no test session has two or more items known to training");
    }
    folds.push_back({std::move(index), std::move(tasks)});
  }
  return folds;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cknn::Error(cknn::ErrorKind::kIo, "cannot write " + path);
  out << content;
  if (!out) throw cknn::Error(cknn::ErrorKind::kIo, "failed writing " + path);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      out.push_back(v);
    } catch (const std::exception&) {
      throw cknn::Error(cknn::ErrorKind::kInvalidArgument, "not a number: '" + part + "'");
    }
  }
  if (out.empty()) throw cknn::Error(cknn::ErrorKind::kInvalidArgument, "empty value list");
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

int run_ingest(const InputOptions& in, const std::string& output, const Globals& g) {
  auto log = load_input(in, g);
  const auto index = cknn::BipartiteIndex::build(log.rows);
  if (!output.empty()) {
    std::ofstream out(output, std::ios::binary);
    if (!out) throw cknn::Error(cknn::ErrorKind::kIo, "cannot write " + output);
    cknn::write_snapshot(out, {index, log.sessions, log.items});
  }
  char avg[32];
  std::snprintf(avg, sizeof avg, "%.2f", static_cast<double>(index.num_edges()) / static_cast<double>(index.num_sessions()));
  std::cout << "sessions\t" << index.num_sessions() << '\n'
            << "items\t" << index.num_items() << '\n'
            << "edges\t" << index.num_edges() << '\n'
            << "avg_length\t" << avg << '\n';
  return 0;
}

int run_recommend(const std::string& index_path, const std::string& prefix, const PipelineOptions& p,
                  const std::string& format, const Globals& g) {
  std::ifstream file(index_path, std::ios::binary);
  if (!file) throw cknn::Error(cknn::ErrorKind::kIo, "cannot open " + index_path);
  const auto snapshot = cknn::read_snapshot(file);
  const auto cfg = pipeline_config(p);
  const auto kind = cknn::parse_recommender(p.recommender);

  cknn::SessionState state;
  for (const auto& name : split_names(prefix)) {
    const auto id = snapshot.items.find(name);
    if (!id) {
      cknn::logging::warn("item '" + name + "' is not in the index");
      state.advance(snapshot.index, cknn::ItemId::invalid(), cfg.k_recent);
      continue;
    }
    state.advance(snapshot.index, cknn::ItemId{*id}, cfg.k_recent);
  }
  if (state.empty()) throw cknn::Error(cknn::ErrorKind::kInvalidArgument, "empty prefix");
  state.set_rng_seed(cknn::derive_seed(g.seed, 0, state.items().size()));
  const auto rec = kind == cknn::RecommenderKind::kCknn ? cknn::recommend_cknn(snapshot.index, state, cfg)
                                                         : cknn::recommend_iknn(snapshot.index, state, cfg);
  if (format == "json") {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& s : rec.items) j.push_back({{"item", snapshot.items.name(s.item.value)}, {"score", s.score}});
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "rank\titem\tscore\n";
    for (std::size_t k = 0; k < rec.items.size(); ++k) {
      std::cout << k + 1 << '\t' << snapshot.items.name(rec.items[k].item.value) << '\t'
                << cknn::format_metric(rec.items[k].score) << '\n';
    }
  }
  if (rec.empty()) {
    cknn::logging::warn("no neighbor session shares an item with the prefix");
    return kExitEmpty;
  }
  return 0;
}

cknn::EvalReport evaluate_folds(const std::vector<Fold>& folds, const cknn::PipelineConfig& cfg,
                                const cknn::EvalOptions& options) {
  std::vector<cknn::EvalReport> reports;
  for (const auto& f : folds) reports.push_back(cknn::evaluate(f.index, f.tasks, cfg, options));
  return reports.size() == 1 ? reports.front() : cknn::average_reports(reports);
}

int run_evaluate(const InputOptions& in, const SplitOptions& s, const PipelineOptions& p, const std::string& output,
                 const std::string& report_format, bool wall_clock, const Globals& g) {
  const auto cfg = pipeline_config(p);
  const auto kind = cknn::parse_recommender(p.recommender);
  const auto log = load_input(in, g);
  const auto folds = make_folds(log, s);
  const auto report = evaluate_folds(folds, cfg, {kind, g.seed, g.threads});

  cknn::write_report_tsv(std::cout, report);
  if (!output.empty()) {
    std::ostringstream out;
    if (report_format == "tsv") {
      cknn::write_report_tsv(out, report);
    } else {
      cknn::write_report_json(out, report, {cfg, kind, g.seed, in.path, folds.size()}, wall_clock);
    }
    write_file(output, out.str());
  }
  return 0;
}

int run_sweep(const InputOptions& in, const SplitOptions& s, const PipelineOptions& p, const std::string& lambdas,
              const std::string& betas, const std::string& output, const Globals& g) {
  const auto cfg = pipeline_config(p);
  const auto kind = cknn::parse_recommender(p.recommender);
  const auto ls = parse_list(lambdas);
  const auto bs = parse_list(betas);
  for (const double v : ls) cknn::SimilarityConfig{v, 0.5}.validate();
  for (const double v : bs) cknn::SimilarityConfig{0.5, v}.validate();
  const auto log = load_input(in, g);
  const auto folds = make_folds(log, s);

  std::vector<std::vector<cknn::SweepRow>> per_fold;
  for (const auto& f : folds) per_fold.push_back(cknn::sweep(f.index, f.tasks, ls, bs, cfg, {kind, g.seed, g.threads}));
  auto rows = per_fold.front();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::vector<cknn::EvalReport> reports;
    for (const auto& fold_rows : per_fold) reports.push_back(fold_rows[k].report);
    rows[k].report = cknn::average_reports(reports);
  }
  std::ostringstream table;
  cknn::write_sweep_tsv(table, rows);
  std::cout << table.str();
  if (!output.empty()) write_file(output, table.str());
  return 0;
}

int run_bench(const InputOptions& in, const SplitOptions& s, const PipelineOptions& p, const std::string& strategies,
              std::size_t max_tasks, const std::string& output, bool wall_clock, const Globals& g) {
  const auto cfg = pipeline_config(p);
  std::vector<cknn::Strategy> list;
  for (const auto& name : split_names(strategies)) list.push_back(cknn::parse_strategy(name));
  if (list.empty()) throw cknn::Error(cknn::ErrorKind::kInvalidArgument, "no strategies given");
  const auto log = load_input(in, g);
  auto folds = make_folds(log, s);
  auto& fold = folds.front();
  if (max_tasks > 0 && fold.tasks.size() > max_tasks) fold.tasks.resize(max_tasks);
  const auto rows = cknn::bench_selection(fold.index, fold.tasks, list, cfg, g.seed);

  cknn::write_bench_tsv(std::cout, rows, true);
  if (!output.empty()) {
    std::ostringstream out;
    cknn::write_bench_tsv(out, rows, wall_clock);
    write_file(output, out.str());
  }
  return 0;
}

int run_generate(const cknn::SyntheticSpec& spec, const std::string& output) {
  const auto log = cknn::gen_synthetic(spec);
  std::ostringstream out;
  cknn::write_log(out, log);
  if (output.empty() || output == "-") {
    std::cout << out.str();
  } else {
    write_file(output, out.str());
  }
  return 0;
}

int exit_code(cknn::ErrorKind kind) {
  switch (kind) {
    case cknn::ErrorKind::kInvalidArgument: return kExitUsage;
    default: return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Session-based nearest-neighbor recommendation with diffusion similarity"};
  app.set_config("--config", "", "TOML/INI file with option values; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Global random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();

  InputOptions in;
  SplitOptions split;
  PipelineOptions pipe;
  std::string output;
  std::string report_format = "json";
  bool wall_clock = false;

  auto* ingest = app.add_subcommand("ingest", "Build an index snapshot and print dataset statistics");
  add_input(*ingest, in);
  ingest->add_option("-o,--output", output, "Index snapshot path");

  std::string index_path;
  std::string prefix;
  std::string rec_format = "tsv";
  auto* recommend = app.add_subcommand("recommend", "Recommend items for a session prefix");
  recommend->add_option("--index", index_path, "Index snapshot written by ingest")->required();
  recommend->add_option("-p,--prefix", prefix, "Comma-separated item ids, oldest first")->required();
  recommend->add_option("--format", rec_format, "tsv or json")->check(CLI::IsMember({"tsv", "json"}))->capture_default_str();
  add_pipeline(*recommend, pipe);

  auto* evaluate = app.add_subcommand("evaluate", "Run the prefix-prediction protocol and report HR, MRR, Coverage");
  add_input(*evaluate, in);
  add_split(*evaluate, split);
  add_pipeline(*evaluate, pipe);
  evaluate->add_option("-o,--output", output, "Report file");
  evaluate->add_option("--report-format", report_format, "json or tsv")
      ->check(CLI::IsMember({"json", "tsv"}))
      ->capture_default_str();
  evaluate->add_flag("--wall-clock", wall_clock, "Include wall-clock seconds in the report file");

  std::string lambdas = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  std::string betas = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  auto* sweep = app.add_subcommand("sweep", "Evaluate a lambda x beta grid");
  add_input(*sweep, in);
  add_split(*sweep, split);
  add_pipeline(*sweep, pipe);
  sweep->add_option("--lambdas", lambdas, "Comma-separated lambda values")->capture_default_str();
  sweep->add_option("--betas", betas, "Comma-separated beta values")->capture_default_str();
  sweep->add_option("-o,--output", output, "Grid table file");

  std::string strategies = "original,epcs,epcsr";
  std::size_t max_tasks = 0;
  auto* bench = app.add_subcommand("bench", "Compare candidate selection strategies on one task stream");
  add_input(*bench, in);
  add_split(*bench, split);
  add_pipeline(*bench, pipe);
  bench->add_option("--strategies", strategies, "Comma-separated strategies")->capture_default_str();
  bench->add_option("--max-tasks", max_tasks, "Use at most this many tasks (0 = all)")->capture_default_str();
  bench->add_option("-o,--output", output, "Counter table file");
  bench->add_flag("--wall-clock", wall_clock, "Include wall-clock columns in the table file");

  cknn::SyntheticSpec spec;
  auto* generate = app.add_subcommand("generate", "Write a synthetic interaction log");
  generate->add_option("--sessions", spec.num_sessions, "Number of sessions")->capture_default_str();
  generate->add_option("--items", spec.catalog_size, "Catalog size")->capture_default_str();
  generate->add_option("--mean-length", spec.mean_length, "Mean session length (at least 2)")->capture_default_str();
  generate->add_option("--skew", spec.popularity_skew, "Zipf exponent of item popularity")->capture_default_str();
  generate->add_option("--days", spec.day_span, "Days spanned by session start times")->capture_default_str();
  generate->add_option("--day-length", spec.day_length, "Timestamp units per day")->capture_default_str();
  generate->add_option("-o,--output", output, "Output log path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ingest) return run_ingest(in, output, g);
    if (*recommend) return run_recommend(index_path, prefix, pipe, rec_format, g);
    if (*evaluate) return run_evaluate(in, split, pipe, output, report_format, wall_clock, g);
    if (*sweep) return run_sweep(in, split, pipe, lambdas, betas, output, g);
    if (*bench) return run_bench(in, split, pipe, strategies, max_tasks, output, wall_clock, g);
    if (*generate) {
      spec.seed = g.seed;
      return run_generate(spec, output);
    }
  } catch (const cknn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
