#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include "cknn/evaluation.hpp"

namespace cknn {

/// Run parameters echoed into report files.
struct ReportMeta {
  PipelineConfig cfg;
  RecommenderKind recommender = RecommenderKind::kCknn;
  std::uint64_t seed = 0;
  std::string dataset;
  std::size_t windows = 1;
};

/// Structured-text summary (JSON). Wall-clock times are omitted unless
/// requested so that files are reproducible byte for byte.
void write_report_json(std::ostream& out, const EvalReport& report, const ReportMeta& meta,
                       bool include_wall_clock = false);

/// metric<TAB>value rows.
void write_report_tsv(std::ostream& out, const EvalReport& report);

/// lambda, beta, HR, MRR, Coverage per grid point.
void write_sweep_tsv(std::ostream& out, std::span<const SweepRow> rows);

/// strategy, tasks, examined, sorted and (optionally) wall-clock seconds.
void write_bench_tsv(std::ostream& out, std::span<const BenchRow> rows, bool include_wall_clock = true);

/// Fixed-precision decimal used in all tables.
std::string format_metric(double value);

}  // namespace cknn
