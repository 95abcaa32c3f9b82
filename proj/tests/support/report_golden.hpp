#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "corpusforge/eval.hpp"

namespace cftest {

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<corpusforge::eval::ReportRow> golden_rows() {
  return {{"GPC-50", "whisper-small", "-", 31.4},        {"GPC-50", "whisper-small", "GPC-50", 14.25},
          {"GPC-50", "whisper-medium", "-", 22.0},       {"GPC-50", "whisper-medium", "GPC-50", 11.87},
          {"Common Voice", "whisper-small", "-", 40.333}, {"Common Voice", "whisper-small", "GPC-50", 35.0}};
}

inline std::vector<corpusforge::eval::DomainSeries> golden_series() {
  return {{"whisper-small", {{"News", 10.0}, {"Sports", 12.5}, {"Comedy", 8.0}}},
          {"whisper-small (GPC-50)", {{"News", 5.25}, {"Sports", 7.1}, {"Comedy", 3.0}}}};
}

inline std::vector<corpusforge::eval::CurvePoint> golden_curve() {
  return {{32.0, 30.0}, {80.0, 25.5}, {160.0, 20.25}, {320.0, 17.0}, {623.0, 14.75}};
}

/// Names of golden files whose emitted counterpart differs.
inline std::vector<std::string> report_golden_mismatches(const std::string& golden_dir) {
  using namespace corpusforge::eval;
  std::vector<std::string> bad;
  auto check = [&](const std::string& file, const std::string& emitted) {
    if (slurp(golden_dir + "/" + file) != emitted) bad.push_back(file);
  };
  check("table.txt", format_table(golden_rows()));
  check("rows.jsonl", format_rows_jsonl(golden_rows(), "greek-basic-v1"));
  check("per_domain.tsv", format_per_domain(golden_series()));
  check("scaling_curve.tsv", format_scaling_curve(golden_curve(), "whisper-small", Baseline{"whisper-large-v2", 15.5}));
  check("scaling_curve_empty.tsv", format_scaling_curve({}, "whisper-small", std::nullopt));
  return bad;
}

}  // namespace cftest
