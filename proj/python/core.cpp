#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <optional>
#include <sstream>

#include "cknn/cknn.hpp"

namespace py = pybind11;

namespace {

using cknn::IndexSnapshot;
using cknn::InteractionLog;

IndexSnapshot build_snapshot(const InteractionLog& log) {
  return {cknn::BipartiteIndex::build(log.rows), log.sessions, log.items};
}

InteractionLog log_from_rows(const std::vector<std::tuple<std::string, std::string, cknn::Timestamp>>& rows) {
  InteractionLog log;
  for (const auto& [s, i, t] : rows) {
    log.rows.push_back({cknn::SessionId{log.sessions.intern(s)}, cknn::ItemId{log.items.intern(i)}, t});
  }
  return log;
}

std::vector<std::tuple<std::string, std::string, cknn::Timestamp>> rows_of(const InteractionLog& log) {
  std::vector<std::tuple<std::string, std::string, cknn::Timestamp>> out;
  out.reserve(log.rows.size());
  for (const auto& e : log.rows) {
    out.emplace_back(log.sessions.name(e.session.value), log.items.name(e.item.value), e.timestamp);
  }
  return out;
}

cknn::ItemId item_id(const IndexSnapshot& s, const std::string& name) {
  const auto id = s.items.find(name);
  return id ? cknn::ItemId{*id} : cknn::ItemId::invalid();
}

cknn::SessionId session_id(const IndexSnapshot& s, const std::string& name) {
  const auto id = s.sessions.find(name);
  if (!id) throw cknn::Error(cknn::ErrorKind::kUnknownSession, "unknown session '" + name + "'");
  return cknn::SessionId{*id};
}

cknn::PipelineConfig make_config(std::size_t k_recent, std::size_t k_top, const std::string& strategy, double lambda,
                                 double beta, const std::string& form, std::size_t list_length, bool exclude_seen,
                                 const std::optional<std::string>& preset) {
  cknn::PipelineConfig cfg;
  cfg.k_recent = k_recent;
  cfg.k_top = k_top;
  cfg.strategy = cknn::parse_strategy(strategy);
  cfg.similarity = preset ? cknn::preset(*preset, lambda) : cknn::SimilarityConfig{lambda, beta};
  if (form == "simplified") {
    cfg.similarity.form = cknn::SimilarityForm::kSimplified;
  } else if (form != "full") {
    throw cknn::Error(cknn::ErrorKind::kInvalidArgument, "form must be 'full' or 'simplified'");
  }
  cfg.list_length = list_length;
  cfg.exclude_seen = exclude_seen;
  cfg.validate();
  return cfg;
}

py::dict report_dict(const cknn::EvalReport& r) {
  py::dict d;
  d["hr"] = r.hr_at_l;
  d["mrr"] = r.mrr_at_l;
  d["coverage"] = r.coverage_at_l;
  d["num_samples"] = r.num_samples;
  d["recommended_union_size"] = r.recommended_union_size;
  d["catalog_size"] = r.catalog_size;
  d["list_length"] = r.list_length;
  py::dict work;
  for (const auto& [label, t] : r.per_strategy_timing) {
    work[py::str(label)] = py::dict(py::arg("examined") = t.work.examined, py::arg("sorted") = t.work.sorted,
                                    py::arg("wall_seconds") = t.wall_seconds);
  }
  d["work"] = work;
  return d;
}

struct Fold {
  cknn::BipartiteIndex index;
  std::vector<cknn::PrefixTask> tasks;
};

std::vector<Fold> folds_of(const InteractionLog& log, std::size_t train_days, std::size_t test_days, std::size_t windows,
                           std::size_t window_days, cknn::Timestamp day_length) {
  std::vector<cknn::Split> splits;
  if (windows > 0) {
    splits = cknn::rolling_windows(log.rows, window_days, windows, day_length);
  } else {
    splits.push_back(cknn::split_by_days(log.rows, {train_days, test_days, day_length}));
  }
  std::vector<Fold> out;
  for (const auto& s : splits) {
    auto index = cknn::BipartiteIndex::build(s.train);
    auto tasks = cknn::make_prefix_tasks(cknn::group_sessions(s.test), index);
    if (tasks.empty()) throw cknn::Error(cknn::ErrorKind::kEmptyTestSet, "empty test set");
    out.push_back({std::move(index), std::move(tasks)});
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Session-based nearest-neighbor recommendation with diffusion similarity";

  py::register_exception<cknn::Error>(m, "CknnError", PyExc_ValueError);

  py::class_<InteractionLog>(m, "Dataset", "Interactions with their session and item names")
      .def_static("from_rows", &log_from_rows, py::arg("rows"), "Build from (session, item, timestamp) tuples")
      .def_static(
          "load_log",
          [](const std::string& path, const std::string& delimiter, bool header) {
            std::ifstream in(path);
            if (!in) throw cknn::Error(cknn::ErrorKind::kIo, "cannot open " + path);
            cknn::LogFormat format;
            if (delimiter.size() != 1) throw cknn::Error(cknn::ErrorKind::kInvalidArgument, "delimiter must be one character");
            format.delimiter = delimiter[0];
            format.header = header;
            return cknn::load_timestamped_log(in, format);
          },
          py::arg("path"), py::arg("delimiter") = "\t", py::arg("header") = true)
      .def_static(
          "load_playlists",
          [](const std::string& path, std::size_t total_days, std::uint64_t seed) {
            std::ifstream in(path);
            if (!in) throw cknn::Error(cknn::ErrorKind::kIo, "cannot open " + path);
            cknn::PlaylistFormat format;
            format.total_days = total_days;
            format.seed = seed;
            return cknn::load_playlists(in, format);
          },
          py::arg("path"), py::arg("total_days") = 31, py::arg("seed") = 0)
      .def_static(
          "synthetic",
          [](std::size_t num_sessions, std::size_t catalog_size, double mean_length, double popularity_skew,
             std::uint64_t seed, std::size_t day_span) {
            cknn::SyntheticSpec spec;
            spec.num_sessions = num_sessions;
            spec.catalog_size = catalog_size;
            spec.mean_length = mean_length;
            spec.popularity_skew = popularity_skew;
            spec.seed = seed;
            spec.day_span = day_span;
            return cknn::gen_synthetic(spec);
          },
          py::arg("num_sessions") = 1000, py::arg("catalog_size") = 500, py::arg("mean_length") = 4.0,
          py::arg("popularity_skew") = 1.0, py::arg("seed") = 7, py::arg("day_span") = 31)
      .def("rows", &rows_of)
      .def("write_log",
           [](const InteractionLog& log) {
             std::ostringstream out;
             cknn::write_log(out, log);
             return out.str();
           })
      .def("__len__", [](const InteractionLog& log) { return log.rows.size(); });

  py::class_<IndexSnapshot>(m, "Index", "Session-item bipartite index")
      .def_static("build", &build_snapshot, py::arg("dataset"))
      .def_static(
          "load",
          [](const std::string& path) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw cknn::Error(cknn::ErrorKind::kIo, "cannot open " + path);
            return cknn::read_snapshot(in);
          },
          py::arg("path"))
      .def(
          "save",
          [](const IndexSnapshot& s, const std::string& path) {
            std::ofstream out(path, std::ios::binary);
            if (!out) throw cknn::Error(cknn::ErrorKind::kIo, "cannot write " + path);
            cknn::write_snapshot(out, s);
          },
          py::arg("path"))
      .def_property_readonly("num_sessions", [](const IndexSnapshot& s) { return s.index.num_sessions(); })
      .def_property_readonly("num_items", [](const IndexSnapshot& s) { return s.index.num_items(); })
      .def_property_readonly("num_edges", [](const IndexSnapshot& s) { return s.index.num_edges(); })
      .def(
          "sessions_of_item",
          [](const IndexSnapshot& s, const std::string& item) {
            std::vector<std::pair<std::string, cknn::Timestamp>> out;
            for (const auto& p : s.index.sessions_of_item(item_id(s, item))) {
              out.emplace_back(s.sessions.name(p.session.value), p.timestamp);
            }
            return out;
          },
          py::arg("item"))
      .def(
          "items_of_session",
          [](const IndexSnapshot& s, const std::string& session) {
            std::vector<std::pair<std::string, cknn::Timestamp>> out;
            for (const auto& p : s.index.items_of_session(session_id(s, session))) {
              out.emplace_back(s.items.name(p.item.value), p.timestamp);
            }
            return out;
          },
          py::arg("session"))
      .def(
          "item_degree", [](const IndexSnapshot& s, const std::string& item) { return s.index.item_degree(item_id(s, item)); },
          py::arg("item"))
      .def(
          "similarity",
          [](const IndexSnapshot& s, const std::vector<std::string>& items, const std::string& session, double lambda,
             double beta, const std::string& form) {
            std::vector<cknn::ItemId> x;
            for (const auto& name : items) x.push_back(item_id(s, name));
            const auto cfg = make_config(1, 1, "original", lambda, beta, form, 1, false, std::nullopt).similarity;
            return cknn::sim_dsm(s.index, x, session_id(s, session), cfg);
          },
          py::arg("items"), py::arg("session"), py::arg("lam") = 0.5, py::arg("beta") = 0.5, py::arg("form") = "full")
      .def(
          "recommend",
          [](const IndexSnapshot& s, const std::vector<std::string>& prefix, std::size_t k_recent, std::size_t k_top,
             const std::string& strategy, double lambda, double beta, const std::string& form, std::size_t list_length,
             bool exclude_seen, const std::optional<std::string>& preset, const std::string& recommender,
             std::uint64_t seed) {
            const auto cfg = make_config(k_recent, k_top, strategy, lambda, beta, form, list_length, exclude_seen, preset);
            if (prefix.empty()) throw cknn::Error(cknn::ErrorKind::kInvalidArgument, "empty prefix");
            cknn::SessionState state;
            for (const auto& name : prefix) state.advance(s.index, item_id(s, name), cfg.k_recent);
            state.set_rng_seed(cknn::derive_seed(seed, 0, state.items().size()));
            const auto rec = cknn::parse_recommender(recommender) == cknn::RecommenderKind::kCknn
                                 ? cknn::recommend_cknn(s.index, state, cfg)
                                 : cknn::recommend_iknn(s.index, state, cfg);
            std::vector<std::pair<std::string, double>> out;
            for (const auto& r : rec.items) out.emplace_back(s.items.name(r.item.value), r.score);
            return out;
          },
          py::arg("prefix"), py::arg("k_recent") = 1000, py::arg("k_top") = 500, py::arg("strategy") = "epcsr",
          py::arg("lam") = 0.5, py::arg("beta") = 0.5, py::arg("form") = "full", py::arg("list_length") = 20,
          py::arg("exclude_seen") = false, py::arg("preset") = py::none(), py::arg("recommender") = "cknn",
          py::arg("seed") = 0);

  m.def(
      "preset",
      [](const std::string& name, double lambda) {
        const auto c = cknn::preset(name, lambda);
        return std::pair{c.lambda, c.beta};
      },
      py::arg("name"), py::arg("lam") = 0.5, "(lambda, beta) of a named similarity preset");

  m.def(
      "evaluate",
      [](const InteractionLog& log, std::size_t k_recent, std::size_t k_top, const std::string& strategy, double lambda,
         double beta, const std::string& form, std::size_t list_length, bool exclude_seen,
         const std::optional<std::string>& preset, const std::string& recommender, std::uint64_t seed,
         std::size_t threads, std::size_t train_days, std::size_t test_days, std::size_t windows,
         std::size_t window_days, cknn::Timestamp day_length) {
        const auto cfg = make_config(k_recent, k_top, strategy, lambda, beta, form, list_length, exclude_seen, preset);
        const cknn::EvalOptions options{cknn::parse_recommender(recommender), seed, threads};
        const auto folds = folds_of(log, train_days, test_days, windows, window_days, day_length);
        std::vector<cknn::EvalReport> reports;
        {
          py::gil_scoped_release release;
          for (const auto& f : folds) reports.push_back(cknn::evaluate(f.index, f.tasks, cfg, options));
        }
        return report_dict(reports.size() == 1 ? reports.front() : cknn::average_reports(reports));
      },
      py::arg("dataset"), py::arg("k_recent") = 1000, py::arg("k_top") = 500, py::arg("strategy") = "epcsr",
      py::arg("lam") = 0.5, py::arg("beta") = 0.5, py::arg("form") = "full", py::arg("list_length") = 20,
      py::arg("exclude_seen") = false, py::arg("preset") = py::none(), py::arg("recommender") = "cknn",
      py::arg("seed") = 0, py::arg("threads") = 1, py::arg("train_days") = 0, py::arg("test_days") = 1,
      py::arg("windows") = 0, py::arg("window_days") = 91, py::arg("day_length") = 86'400,
      "Day split (or rolling windows) of the dataset, then HR, MRR and Coverage at list_length");

  m.def(
      "sweep",
      [](const InteractionLog& log, const std::vector<double>& lambdas, const std::vector<double>& betas,
         std::size_t k_recent, std::size_t k_top, const std::string& strategy, std::size_t list_length,
         std::uint64_t seed, std::size_t threads, std::size_t test_days) {
        const auto cfg = make_config(k_recent, k_top, strategy, 0.5, 0.5, "full", list_length, false, std::nullopt);
        const auto folds = folds_of(log, 0, test_days, 0, 91, 86'400);
        std::vector<cknn::SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = cknn::sweep(folds[0].index, folds[0].tasks, lambdas, betas, cfg,
                             {cknn::RecommenderKind::kCknn, seed, threads});
        }
        py::list out;
        for (const auto& r : rows) {
          auto d = report_dict(r.report);
          d["lambda"] = r.lambda;
          d["beta"] = r.beta;
          out.append(d);
        }
        return out;
      },
      py::arg("dataset"), py::arg("lambdas"), py::arg("betas"), py::arg("k_recent") = 1000, py::arg("k_top") = 500,
      py::arg("strategy") = "epcsr", py::arg("list_length") = 20, py::arg("seed") = 0, py::arg("threads") = 1,
      py::arg("test_days") = 1);

  m.def(
      "bench",
      [](const InteractionLog& log, const std::vector<std::string>& strategies, std::size_t k_recent, std::size_t k_top,
         std::size_t max_tasks, std::uint64_t seed) {
        const auto cfg = make_config(k_recent, k_top, "original", 0.5, 0.5, "full", 20, false, std::nullopt);
        std::vector<cknn::Strategy> list;
        for (const auto& s : strategies) list.push_back(cknn::parse_strategy(s));
        auto folds = folds_of(log, 0, 1, 0, 91, 86'400);
        auto& tasks = folds[0].tasks;
        if (max_tasks > 0 && tasks.size() > max_tasks) tasks.resize(max_tasks);
        std::vector<cknn::BenchRow> rows;
        {
          py::gil_scoped_release release;
          rows = cknn::bench_selection(folds[0].index, tasks, list, cfg, seed);
        }
        py::list out;
        for (const auto& r : rows) {
          out.append(py::dict(py::arg("strategy") = std::string(cknn::to_string(r.strategy)), py::arg("tasks") = r.tasks,
                              py::arg("examined") = r.work.examined, py::arg("sorted") = r.work.sorted,
                              py::arg("wall_seconds") = r.wall_seconds));
        }
        return out;
      },
      py::arg("dataset"), py::arg("strategies") = std::vector<std::string>{"original", "epcs", "epcsr"},
      py::arg("k_recent") = 1000, py::arg("k_top") = 500, py::arg("max_tasks") = 0, py::arg("seed") = 0);
}
