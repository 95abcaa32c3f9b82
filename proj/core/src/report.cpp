#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>

#include "corpusforge/corpus.hpp"
#include "corpusforge/error.hpp"
#include "corpusforge/eval.hpp"
#include "corpusforge/io.hpp"
#include "jsonl.hpp"

namespace corpusforge::eval {
namespace {

using jsonl::Json;

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// Display width in code points (all our labels are single-width scripts).
std::size_t width(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string pad(std::string_view s, std::size_t w, bool right = false) {
  const std::string fill(w > width(s) ? w - width(s) : 0, ' ');
  return right ? fill + std::string(s) : std::string(s) + fill;
}

std::string series_name(const EvalReport& r) {
  const auto& row = r.rows.front();
  return row.finetune_corpus == "-" ? row.model : row.model + " (" + row.finetune_corpus + ")";
}

}  // namespace

std::string format_percent(double wer_percent) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", wer_percent);
  return buf;
}

std::string format_table(const std::vector<ReportRow>& rows) {
  const std::vector<std::string> head = {"Dataset", "Model", "Finetuning corpus", "WER"};
  std::vector<std::vector<std::string>> cells;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const bool repeat = i > 0 && rows[i - 1].dataset == r.dataset;
    cells.push_back({repeat ? "" : r.dataset, r.model, r.finetune_corpus, format_percent(r.wer_percent)});
  }
  std::vector<std::size_t> w(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) {
    w[c] = width(head[c]);
    for (const auto& row : cells) w[c] = std::max(w[c], width(row[c]));
  }
  auto line = [&](const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const bool last = c + 1 == row.size();
      out += last ? pad(row[c], w[c], true) : pad(row[c], w[c]) + "  ";
    }
    return out + '\n';
  };
  std::string out = line(head);
  std::size_t total = 0;
  for (auto x : w) total += x;
  out += std::string(total + 2 * (w.size() - 1), '-') + '\n';
  for (const auto& row : cells) out += line(row);
  return out;
}

std::string format_rows_jsonl(const std::vector<ReportRow>& rows, std::string_view profile_id) {
  std::vector<Json> out;
  for (const auto& r : rows) {
    Json j;
    j["dataset"] = r.dataset;
    j["model"] = r.model;
    j["finetuning_corpus"] = r.finetune_corpus;
    j["wer"] = r.wer_percent;
    j["profile"] = std::string(profile_id);
    out.push_back(std::move(j));
  }
  return jsonl::dump(out);
}

std::string format_per_domain(const std::vector<DomainSeries>& series) {
  std::string out = "x\ty\tseries\n";
  for (const auto& s : series)
    for (const auto& [cat, wer] : s.per_domain) out += cat + '\t' + format_percent(wer) + '\t' + s.series + '\n';
  return out;
}

std::string format_scaling_curve(const std::vector<CurvePoint>& points, std::string_view series,
                                 const std::optional<Baseline>& baseline) {
  std::string out = "x\ty\tseries\tbaseline\n";
  for (const auto& p : points)
    out += shortest(p.train_hours) + '\t' + format_percent(p.wer_percent) + '\t' + std::string(series) + "\t0\n";
  if (baseline) out += '\t' + format_percent(baseline->wer_percent) + '\t' + baseline->label + "\t1\n";
  return out;
}

std::vector<Hypothesis> read_hypotheses(const std::filesystem::path& path) {
  std::vector<Hypothesis> out;
  const auto ctx = path.string();
  for (const auto& j : jsonl::read(path)) {
    Hypothesis h;
    h.segment_ref = jsonl::get<std::string>(j, "segment_ref", ctx);
    h.text = jsonl::get<std::string>(j, "hypothesis", ctx);
    h.model = jsonl::get<std::string>(j, "model", ctx);
    h.finetune_corpus = jsonl::get_opt<std::string>(j, "finetune").value_or("-");
    if (h.finetune_corpus.empty()) h.finetune_corpus = "-";
    out.push_back(std::move(h));
  }
  return out;
}

EvaluateResult evaluate(const std::filesystem::path& manifest_path, const std::vector<Hypothesis>& hyps,
                        const EvaluateOptions& options) {
  const auto manifest = corpus::read_manifest(manifest_path);
  auto it = manifest.splits.find(options.split);
  require(it != manifest.splits.end(), manifest_path.string() + " has no split '" + options.split + "'");
  const auto& refs = it->second;

  std::vector<Hypothesis> effective = hyps;
  if (effective.empty())
    for (const auto& r : refs)
      effective.push_back({r.transcript_ref, clean_reference(r.transcript, options.cleaning), "reference", "-"});

  // (model, finetune) groups in first-seen order
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::string>> texts;
  std::set<std::string> known;
  for (const auto& r : refs) known.insert(r.transcript_ref);

  EvaluateResult result;
  std::size_t unknown = 0, duplicate = 0;
  for (const auto& h : effective) {
    const auto key = std::make_pair(h.model, h.finetune_corpus);
    if (!texts.count(key)) order.push_back(key);
    auto& group = texts[key];
    if (!known.count(h.segment_ref)) {
      ++unknown;
      continue;
    }
    if (!group.emplace(h.segment_ref, h.text).second) ++duplicate;
  }
  if (unknown) result.warnings.push_back(std::to_string(unknown) + " hypothesis record(s) reference segments outside the split");
  if (duplicate) result.warnings.push_back(std::to_string(duplicate) + " duplicate hypothesis record(s) ignored");

  for (const auto& key : order) {
    const auto& group = texts[key];
    std::vector<ScoredSegment> scored;
    std::size_t missing = 0;
    for (const auto& r : refs) {
      auto h = group.find(r.transcript_ref);
      if (h == group.end()) ++missing;
      const auto ref = normalize(clean_reference(r.transcript, options.cleaning), options.profile);
      const auto hyp = normalize(h == group.end() ? std::string() : h->second, options.profile);
      scored.push_back({r.category, wer(ref, hyp)});
    }
    auto report = aggregate(scored, {manifest.corpus_name, key.first, key.second, options.profile.id});
    if (missing)
      report.warnings.push_back(std::to_string(missing) + " segment(s) without a hypothesis from " + key.first +
                                " / " + key.second + " scored as empty");
    for (const auto& w : report.warnings) result.warnings.push_back(w);
    result.reports.push_back(std::move(report));
  }

  std::vector<std::pair<double, EvalReport>> curve;
  for (const auto& r : result.reports)
    if (auto c = options.curve_hours.find(r.rows.front().finetune_corpus); c != options.curve_hours.end())
      curve.emplace_back(c->second, r);
  std::sort(curve.begin(), curve.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  result.curve = scaling_curve(curve);
  if (!curve.empty()) result.curve_series = curve.front().second.rows.front().model;
  if (options.baseline_model) {
    for (const auto& r : result.reports)
      if (r.rows.front().model == *options.baseline_model && r.rows.front().finetune_corpus == "-")
        result.baseline = Baseline{*options.baseline_model, r.rows.front().wer_percent};
    if (!result.baseline) result.warnings.push_back("baseline model '" + *options.baseline_model + "' not found");
  }
  for (auto& r : result.reports) r.scaling_curve = result.curve;
  return result;
}

void write_outputs(const std::filesystem::path& dir, const EvaluateResult& result) {
  std::filesystem::create_directories(dir);
  std::vector<ReportRow> rows;
  std::vector<DomainSeries> series;
  std::string profile = result.reports.empty() ? "greek-basic-v1" : result.reports.front().profile_id;
  for (const auto& r : result.reports) {
    rows.insert(rows.end(), r.rows.begin(), r.rows.end());
    series.push_back({series_name(r), r.per_domain});
  }
  write_file_atomic(dir / "report.txt", format_table(rows) + "\nnormalization profile: " + profile + "\n");

  std::string records = format_rows_jsonl(rows, profile);
  std::vector<Json> extra;
  for (const auto& r : result.reports)
    for (const auto& [cat, wer] : r.per_domain)
      extra.push_back(Json{{"type", "domain"}, {"model", r.rows.front().model},
                           {"finetuning_corpus", r.rows.front().finetune_corpus}, {"category", cat}, {"wer", wer}});
  for (const auto& w : result.warnings) extra.push_back(Json{{"type", "warning"}, {"message", w}});
  write_file_atomic(dir / "report.jsonl", records + jsonl::dump(extra));

  write_file_atomic(dir / "per_domain.tsv", format_per_domain(series));
  write_file_atomic(dir / "scaling_curve.tsv", format_scaling_curve(result.curve, result.curve_series, result.baseline));
}

}  // namespace corpusforge::eval
