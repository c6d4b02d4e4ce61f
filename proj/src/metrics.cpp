#include "rkhm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace rkhm {

MetricsLog::MetricsLog(std::vector<std::string> cols) : columns(std::move(cols)) {
  if (columns.empty() || columns.front() != "epoch") {
    throw Error(ErrorCode::InvalidInput, "the first metrics column must be 'epoch'");
  }
}

void MetricsLog::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw Error(ErrorCode::ShapeMismatch, "metrics row has the wrong width");
  if (!rows.empty() && !(row.front() > rows.back().front())) {
    throw Error(ErrorCode::InvalidInput, "metrics rows must be increasing in epoch");
  }
  rows.push_back(std::move(row));
}

std::size_t MetricsLog::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(ErrorCode::InvalidInput, "no metrics column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> MetricsLog::column(const std::string& name) const {
  const std::size_t k = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

double MetricsLog::final_value(const std::string& name) const {
  const std::size_t k = column_index(name);
  return rows.empty() ? std::numeric_limits<double>::quiet_NaN() : rows.back()[k];
}

Json MetricsLog::summary() const {
  Json s = info;
  s["rows"] = rows.size();
  Json cols = Json::object();
  for (const auto& name : columns) {
    const auto values = column(name);
    const double last = final_value(name);
    cols[name] = Json{{"final", std::isfinite(last) ? Json(last) : Json(nullptr)},
                      {"median", values.empty() ? Json(nullptr) : Json(median(values))}};
  }
  s["columns"] = std::move(cols);
  return s;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidInput, "median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string summary_path_for(const std::string& csv_path) {
  const std::string ext = ".csv";
  if (csv_path.size() >= ext.size() && csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0) {
    return csv_path.substr(0, csv_path.size() - ext.size()) + ".summary.json";
  }
  return csv_path + ".summary.json";
}

void emit_metrics(const MetricsLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  for (std::size_t k = 0; k < log.columns.size(); ++k) out << (k ? "," : "") << log.columns[k];
  out << '\n';
  for (const auto& row : log.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_double(row[k]);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
  write_json_file(summary_path_for(path), log.summary());
}

MetricsLog read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::TruncatedFile, path + ": missing header");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
  }
  MetricsLog log(cols);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    log.add_row(std::move(row));
  }
  return log;
}

TrainLog::TrainLog(const std::string& path) : out_(path) {
  if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path);
  out_ << "epoch,loss,reg_pf,reg_norm,total,grad_norm,wall_ms\n";
}

void TrainLog::write(long epoch, double loss, double reg_pf, double reg_norm, double total, double grad_norm,
                     double wall_ms) {
  if (!out_.is_open()) return;
  out_ << epoch << ',' << format_double(loss) << ',' << format_double(reg_pf) << ',' << format_double(reg_norm)
       << ',' << format_double(total) << ',' << format_double(grad_norm) << ',' << format_double(wall_ms) << '\n';
}

}  // namespace rkhm
