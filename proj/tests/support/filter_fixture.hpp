#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "corpusforge/records.hpp"

namespace cftest {

struct LabeledSegment {
  corpusforge::TranscribedSegment segment;
  std::string label;  // keep | hallucination | codeswitch | empty
};

inline std::vector<LabeledSegment> load_labeled_segments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<LabeledSegment> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    LabeledSegment l;
    l.segment.episode_id = j.at("episode_id").get<std::string>();
    l.segment.span.start_s = j.at("start_s").get<double>();
    l.segment.span.end_s = j.at("end_s").get<double>();
    l.segment.category = j.at("category").get<std::string>();
    l.segment.transcript = j.at("transcript").get<std::string>();
    l.label = j.at("label").get<std::string>();
    out.push_back(std::move(l));
  }
  return out;
}

struct DropScore {
  std::size_t true_pos = 0, false_pos = 0, false_neg = 0;
  double precision() const { return true_pos + false_pos == 0 ? 1.0 : double(true_pos) / double(true_pos + false_pos); }
  double recall() const { return true_pos + false_neg == 0 ? 1.0 : double(true_pos) / double(true_pos + false_neg); }
};

}  // namespace cftest
