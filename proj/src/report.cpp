#include "cknn/report.hpp"

#include <cstdio>
#include <ostream>

#include "cknn/error.hpp"
#include "json.hpp"

namespace cknn {

std::string format_metric(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

void write_report_json(std::ostream& out, const EvalReport& report, const ReportMeta& meta, bool include_wall_clock) {
  nlohmann::ordered_json j;
  j["recommender"] = std::string(to_string(meta.recommender));
  j["dataset"] = meta.dataset;
  j["seed"] = meta.seed;
  j["windows"] = meta.windows;
  j["config"] = {
      {"k_recent", meta.cfg.k_recent},
      {"k_top", meta.cfg.k_top},
      {"strategy", std::string(to_string(meta.cfg.strategy))},
      {"lambda", meta.cfg.similarity.lambda},
      {"beta", meta.cfg.similarity.beta},
      {"form", meta.cfg.similarity.form == SimilarityForm::kFull ? "full" : "simplified"},
      {"list_length", meta.cfg.list_length},
      {"exclude_seen", meta.cfg.exclude_seen},
  };
  const auto l = std::to_string(report.list_length);
  j["metrics"] = {
      {"HR@" + l, report.hr_at_l},
      {"MRR@" + l, report.mrr_at_l},
      {"Coverage@" + l, report.coverage_at_l},
  };
  j["num_samples"] = report.num_samples;
  j["recommended_union_size"] = report.recommended_union_size;
  j["catalog_size"] = report.catalog_size;
  auto& timing = j["work"];
  timing = nlohmann::ordered_json::object();
  for (const auto& [label, t] : report.per_strategy_timing) {
    nlohmann::ordered_json entry = {{"examined", t.work.examined}, {"sorted", t.work.sorted}};
    if (include_wall_clock) entry["wall_seconds"] = t.wall_seconds;
    timing[label] = entry;
  }
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "failed to write report");
}

void write_report_tsv(std::ostream& out, const EvalReport& report) {
  const auto l = std::to_string(report.list_length);
  out << "metric\tvalue\n";
  out << "HR@" << l << '\t' << format_metric(report.hr_at_l) << '\n';
  out << "MRR@" << l << '\t' << format_metric(report.mrr_at_l) << '\n';
  out << "Coverage@" << l << '\t' << format_metric(report.coverage_at_l) << '\n';
  out << "num_samples\t" << report.num_samples << '\n';
  out << "recommended_union_size\t" << report.recommended_union_size << '\n';
  out << "catalog_size\t" << report.catalog_size << '\n';
  if (!out) throw Error(ErrorKind::kIo, "failed to write report");
}

void write_sweep_tsv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "lambda\tbeta\tHR\tMRR\tCoverage\n";
  for (const auto& r : rows) {
    out << format_metric(r.lambda) << '\t' << format_metric(r.beta) << '\t' << format_metric(r.report.hr_at_l) << '\t'
        << format_metric(r.report.mrr_at_l) << '\t' << format_metric(r.report.coverage_at_l) << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "failed to write sweep table");
}

void write_bench_tsv(std::ostream& out, std::span<const BenchRow> rows, bool include_wall_clock) {
  out << "strategy\ttasks\texamined\tsorted";
  if (include_wall_clock) out << "\twall_seconds\trecs_per_second";
  out << '\n';
  for (const auto& r : rows) {
    out << to_string(r.strategy) << '\t' << r.tasks << '\t' << r.work.examined << '\t' << r.work.sorted;
    if (include_wall_clock) {
      const double rate = r.wall_seconds > 0.0 ? static_cast<double>(r.tasks) / r.wall_seconds : 0.0;
      out << '\t' << format_metric(r.wall_seconds) << '\t' << format_metric(rate);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "failed to write bench table");
}

}  // namespace cknn
