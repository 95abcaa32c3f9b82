#include "corpusforge/eval.hpp"

#include <algorithm>

#include "corpusforge/error.hpp"
#include "corpusforge/text.hpp"

namespace corpusforge::eval {

NormalizationProfile profile_by_id(std::string_view id) {
  if (id == "greek-basic-v1") return {};
  raise(ErrorCode::ConfigInvalid, "unknown normalization profile '" + std::string(id) + "'");
}

std::string NormalizedText::joined() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

NormalizedText normalize(std::string_view input, const NormalizationProfile& profile) {
  auto s = text::lower(text::nfc(input));
  if (profile.fold_final_sigma) {
    auto cps = text::to_utf32(s);
    std::replace(cps.begin(), cps.end(), U'ς', U'σ');
    s = text::to_utf8(cps);
  }
  if (profile.strip_marks) s = text::strip_combining_marks(s);
  auto cps = text::to_utf32(s);
  for (auto& cp : cps)
    if (!text::is_letter(cp) && !text::is_digit(cp)) cp = U' ';
  return {text::split_whitespace(text::to_utf8(cps))};
}

std::string clean_reference(std::string_view text, const CleaningRules& rules) {
  if (!rules.remove_event_markers) return std::string(text);
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '<') {
      const auto close = text.find_first_of("<>", i + 1);
      if (close != std::string_view::npos && text[close] == '>') {
        i = close + 1;
        continue;
      }
    }
    out += text[i++];
  }
  return out;
}

WerBreakdown wer(const NormalizedText& reference, const NormalizedText& hypothesis) {
  const auto& r = reference.tokens;
  const auto& h = hypothesis.tokens;
  const std::size_t n = r.size(), m = h.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      at(i, j) = std::min({at(i - 1, j - 1) + (r[i - 1] != h[j - 1]), at(i, j - 1) + 1, at(i - 1, j) + 1});

  WerBreakdown out;
  out.reference_len = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (r[i - 1] != h[j - 1])) {
      if (r[i - 1] != h[j - 1]) ++out.substitutions;
      --i, --j;
    } else if (j > 0 && at(i, j) == at(i, j - 1) + 1) {
      ++out.insertions;
      --j;
    } else {
      ++out.deletions;
      --i;
    }
  }
  if (n > 0)
    out.wer = static_cast<double>(out.errors()) / static_cast<double>(n);
  else
    out.wer = m == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return out;
}

namespace {

struct Pool {
  std::size_t errors = 0;
  std::size_t words = 0;
  double percent() const { return words == 0 ? 0.0 : 100.0 * static_cast<double>(errors) / static_cast<double>(words); }
};

}  // namespace

EvalReport aggregate(const std::vector<ScoredSegment>& per_segment, const Labels& labels) {
  EvalReport report;
  report.profile_id = labels.profile_id;
  Pool overall;
  std::map<std::string, Pool> domains;
  for (const auto& s : per_segment) {
    ++report.segments;
    if (!s.breakdown.defined()) {
      ++report.undefined_excluded;
      continue;
    }
    overall.errors += s.breakdown.errors();
    overall.words += s.breakdown.reference_len;
    auto& p = domains[s.category];
    p.errors += s.breakdown.errors();
    p.words += s.breakdown.reference_len;
  }
  if (report.undefined_excluded > 0)
    report.warnings.push_back(std::to_string(report.undefined_excluded) +
                              " segment(s) with an empty reference and a non-empty hypothesis excluded from " +
                              labels.model + " / " + labels.finetune_corpus);
  for (const auto& [cat, p] : domains) report.per_domain[cat] = p.percent();
  report.rows.push_back({labels.dataset, labels.model, labels.finetune_corpus, overall.percent()});
  return report;
}

std::vector<CurvePoint> scaling_curve(const std::vector<std::pair<double, EvalReport>>& results) {
  std::vector<CurvePoint> out;
  for (const auto& [hours, report] : results) {
    require(out.empty() || hours > out.back().train_hours, "scaling curve hours must be strictly increasing");
    require(!report.rows.empty(), "report without rows");
    out.push_back({hours, report.rows.front().wer_percent});
  }
  return out;
}

}  // namespace corpusforge::eval
