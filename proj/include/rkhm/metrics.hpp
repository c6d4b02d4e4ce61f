#pragma once

// Per-run metric tables. A MetricsLog holds only deterministic values so that
// equal seeds give byte-identical files; wall-clock time goes to the separate
// training log.

#include <fstream>
#include <string>
#include <vector>

#include "rkhm/serialize.hpp"

namespace rkhm {

struct MetricsLog {
  std::vector<std::string> columns;       // columns[0] is "epoch"
  std::vector<std::vector<double>> rows;
  Json info = Json::object();             // run facts: label, seed, stop reason, ...

  explicit MetricsLog(std::vector<std::string> cols = {"epoch"});

  /// Rejects rows of the wrong width and non-increasing epochs.
  void add_row(std::vector<double> row);
  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  /// Last row's value; NaN when empty.
  double final_value(const std::string& name) const;

  /// info plus, per column, its final value and median over rows.
  Json summary() const;
};

double median(std::vector<double> values);

/// %.17g formatting, so parsing restores every double exactly.
std::string format_double(double v);

/// Writes the CSV to path and the summary to path with ".csv" replaced by
/// ".summary.json".
void emit_metrics(const MetricsLog& log, const std::string& path);
MetricsLog read_metrics_csv(const std::string& path);
std::string summary_path_for(const std::string& csv_path);

/// Per-epoch CSV: epoch,loss,reg_pf,reg_norm,total,grad_norm,wall_ms.
class TrainLog {
 public:
  TrainLog() = default;
  explicit TrainLog(const std::string& path);
  void write(long epoch, double loss, double reg_pf, double reg_norm, double total, double grad_norm,
             double wall_ms);
  bool is_open() const { return out_.is_open(); }

 private:
  std::ofstream out_;
};

}  // namespace rkhm
