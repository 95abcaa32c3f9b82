#include "corpusforge/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include "corpusforge/error.hpp"
#include "corpusforge/prng.hpp"
#include "jsonl.hpp"

namespace corpusforge::corpus {
namespace {

using jsonl::Json;

struct EpisodeGroup {
  std::string id;
  double seconds = 0.0;
  std::vector<SegmentRef> segments;
};

// category -> episodes sorted by id
using Grouped = std::map<std::string, std::vector<EpisodeGroup>>;

Grouped group(const std::vector<SegmentRef>& refs) {
  std::map<std::string, std::map<std::string, EpisodeGroup>> tmp;
  for (const auto& r : refs) {
    auto& g = tmp[r.category][r.episode_id];
    g.id = r.episode_id;
    g.seconds += r.duration();
    g.segments.push_back(r);
  }
  Grouped out;
  for (auto& [cat, eps] : tmp)
    for (auto& [id, g] : eps) out[cat].push_back(std::move(g));
  return out;
}

double available(const std::vector<EpisodeGroup>& eps) {
  double s = 0.0;
  for (const auto& e : eps) s += e.seconds;
  return s;
}

bool ref_order(const SegmentRef& a, const SegmentRef& b) {
  return std::tie(a.category, a.episode_id, a.start_s, a.end_s) < std::tie(b.category, b.episode_id, b.start_s, b.end_s);
}

std::string hours_text(double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f h", seconds / 3600.0);
  return buf;
}

struct Deficits {
  std::vector<std::string> lines;

  void add(const std::string& category, double have_s, double need_s) {
    lines.push_back("'" + category + "' has " + hours_text(have_s) + ", needs " + hours_text(need_s));
  }
  void throw_if_any(const std::string& what) const {
    if (lines.empty()) return;
    std::string msg = what + ": ";
    for (std::size_t i = 0; i < lines.size(); ++i) msg += (i ? "; " : "") + lines[i];
    raise(ErrorCode::InsufficientCategoryData, msg);
  }
};

/// Seeded shuffle of the (id-sorted) episodes, then whole episodes until the
/// total first reaches the budget. Returns the chosen indices, or nullopt if
/// the budget cannot be reached.
std::optional<std::vector<std::size_t>> take_until(const std::vector<EpisodeGroup>& eps, double budget_s,
                                                   std::uint64_t seed) {
  std::vector<std::size_t> order(eps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Xoshiro256 rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> chosen;
  double total = 0.0;
  for (auto i : order) {
    if (total >= budget_s) break;
    chosen.push_back(i);
    total += eps[i].seconds;
  }
  if (total < budget_s) return std::nullopt;
  return chosen;
}

void append(std::vector<SegmentRef>& out, const EpisodeGroup& g) { out.insert(out.end(), g.segments.begin(), g.segments.end()); }

void finish(CorpusManifest& m) {
  for (auto& [name, refs] : m.splits) std::sort(refs.begin(), refs.end(), ref_order);
  m.recompute();
}

std::string seed_label(std::string_view purpose, const std::string& category) {
  return std::string(purpose) + '|' + category;
}

std::vector<SegmentRef> all_refs(const CorpusManifest& m) {
  std::vector<SegmentRef> out;
  for (const auto& [name, refs] : m.splits) out.insert(out.end(), refs.begin(), refs.end());
  return out;
}

}  // namespace

std::string_view to_string(SplitKind kind) {
  switch (kind) {
    case SplitKind::Train: return "TRAIN";
    case SplitKind::Validation: return "VALIDATION";
    case SplitKind::Test: return "TEST";
  }
  return "TRAIN";
}

SplitKind split_kind_from_string(std::string_view text) {
  if (text == "TRAIN") return SplitKind::Train;
  if (text == "VALIDATION") return SplitKind::Validation;
  if (text == "TEST") return SplitKind::Test;
  raise(ErrorCode::Io, "unknown split kind '" + std::string(text) + "'");
}

void SplitSpec::validate() const {
  require(!name.empty(), "split name is empty");
  require(per_category_budget_s > 0.0 && std::isfinite(per_category_budget_s), "split budget must be positive");
}

std::string make_transcript_ref(std::string_view episode_id, double start_s, double end_s) {
  return std::string(episode_id) + ':' + std::to_string(std::llround(start_s * 1000.0)) + '-' +
         std::to_string(std::llround(end_s * 1000.0));
}

SegmentRef to_ref(const TranscribedSegment& s) {
  return {s.episode_id, s.span.start_s, s.span.end_s, make_transcript_ref(s.episode_id, s.span.start_s, s.span.end_s),
          s.transcript, s.category};
}

void CorpusManifest::recompute() {
  per_category_actual_s.clear();
  for (const auto& [name, refs] : splits)
    for (const auto& r : refs) per_category_actual_s[{name, r.category}] += r.duration();
}

bool CorpusManifest::consistent() const {
  std::set<std::tuple<std::string, double, double>> seen;
  for (const auto& [name, refs] : splits)
    for (const auto& r : refs)
      if (!seen.emplace(r.episode_id, r.start_s, r.end_s).second) return false;
  auto copy = *this;
  copy.recompute();
  return copy.per_category_actual_s == per_category_actual_s;
}

std::string corpus_label(double hours) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, hours);
  return "GPC-" + std::string(buf, end);
}

CorpusManifest build_stratified(const std::vector<TranscribedSegment>& segments,
                                const std::vector<std::string>& categories, double hours_per_category,
                                std::uint64_t seed, std::string corpus_name) {
  require(hours_per_category > 0.0, "hours_per_category must be positive");
  require(!categories.empty(), "category list is empty");
  const double budget_s = hours_per_category * 3600.0;
  const std::set<std::string> wanted(categories.begin(), categories.end());

  std::vector<SegmentRef> refs;
  for (const auto& s : segments)
    if (wanted.count(s.category)) refs.push_back(to_ref(s));
  auto grouped = group(refs);

  Deficits deficits;
  for (const auto& cat : categories) {
    const double have = grouped.count(cat) ? available(grouped[cat]) : 0.0;
    if (have < budget_s) deficits.add(cat, have, budget_s);
  }
  deficits.throw_if_any("stratified sampling");

  CorpusManifest m;
  m.corpus_name = corpus_name.empty() ? corpus_label(hours_per_category) : std::move(corpus_name);
  m.sampling_seed = seed;
  m.prng = std::string(Xoshiro256::kAlgorithm);
  m.budgets = {{std::string(kPoolSplit), budget_s, SplitKind::Train}};
  auto& pool = m.splits[std::string(kPoolSplit)];
  for (const auto& cat : categories) {
    const auto& eps = grouped[cat];
    const auto chosen = take_until(eps, budget_s, derive_seed(seed, seed_label("pool", cat)));
    for (auto i : *chosen) append(pool, eps[i]);
  }
  finish(m);
  return m;
}

CorpusManifest carve_splits(const CorpusManifest& manifest, double test_s_per_cat, double val_s_per_cat,
                            std::uint64_t seed) {
  require(test_s_per_cat > 0.0, "test budget must be positive");
  require(val_s_per_cat >= 0.0, "validation budget must be non-negative");
  auto grouped = group(all_refs(manifest));

  Deficits deficits;
  for (const auto& [cat, eps] : grouped)
    if (available(eps) < test_s_per_cat + val_s_per_cat) deficits.add(cat, available(eps), test_s_per_cat + val_s_per_cat);
  deficits.throw_if_any("carving splits");

  CorpusManifest m;
  m.corpus_name = manifest.corpus_name;
  m.sampling_seed = seed;
  m.parent_corpus = manifest.parent_corpus;
  m.prng = std::string(Xoshiro256::kAlgorithm);
  m.budgets = manifest.budgets;
  m.budgets.push_back({std::string(kTestSplit), test_s_per_cat, SplitKind::Test});
  if (val_s_per_cat > 0.0) m.budgets.push_back({std::string(kValidationSplit), val_s_per_cat, SplitKind::Validation});

  auto& test = m.splits[std::string(kTestSplit)];
  auto& train = m.splits[std::string(kTrainSplit)];
  std::vector<SegmentRef>* val = val_s_per_cat > 0.0 ? &m.splits[std::string(kValidationSplit)] : nullptr;

  for (const auto& [cat, eps] : grouped) {
    const auto t = take_until(eps, test_s_per_cat, derive_seed(seed, seed_label("test", cat)));
    std::vector<bool> used(eps.size(), false);
    for (auto i : *t) {
      used[i] = true;
      append(test, eps[i]);
    }
    std::vector<EpisodeGroup> rest;
    for (std::size_t i = 0; i < eps.size(); ++i)
      if (!used[i]) rest.push_back(eps[i]);
    std::vector<bool> in_val(rest.size(), false);
    if (val) {
      const auto v = take_until(rest, val_s_per_cat, derive_seed(seed, seed_label("validation", cat)));
      if (!v) {
        deficits.add(cat, available(rest), val_s_per_cat);
        continue;
      }
      for (auto i : *v) {
        in_val[i] = true;
        append(*val, rest[i]);
      }
    }
    for (std::size_t i = 0; i < rest.size(); ++i)
      if (!in_val[i]) append(train, rest[i]);
  }
  deficits.throw_if_any("carving validation split");
  finish(m);
  return m;
}

std::vector<CorpusManifest> nest_subsets(const CorpusManifest& manifest, const std::vector<double>& budgets_h,
                                         std::uint64_t seed, std::string_view train_split) {
  for (std::size_t i = 0; i < budgets_h.size(); ++i) {
    require(budgets_h[i] > 0.0, "subset budgets must be positive");
    require(i == 0 || budgets_h[i] < budgets_h[i - 1], "subset budgets must be strictly decreasing");
  }
  auto it = manifest.splits.find(std::string(train_split));
  require(it != manifest.splits.end(), "manifest has no split '" + std::string(train_split) + "'");

  std::vector<CorpusManifest> out;
  std::vector<SegmentRef> source = it->second;
  std::string parent = manifest.corpus_name + ":" + std::string(train_split);
  for (double h : budgets_h) {
    const double budget_s = h * 3600.0;
    auto grouped = group(source);
    Deficits deficits;
    for (const auto& [cat, eps] : grouped)
      if (available(eps) < budget_s) deficits.add(cat, available(eps), budget_s);
    deficits.throw_if_any("nested subset " + corpus_label(h));

    CorpusManifest m;
    m.corpus_name = corpus_label(h);
    m.sampling_seed = seed;
    m.parent_corpus = parent;
    m.prng = std::string(Xoshiro256::kAlgorithm);
    m.nested = true;
    m.budgets = {{std::string(kTrainSplit), budget_s, SplitKind::Train}};
    auto& train = m.splits[std::string(kTrainSplit)];
    for (const auto& [cat, eps] : grouped) {
      const auto chosen = take_until(eps, budget_s, derive_seed(seed, seed_label("subset|" + m.corpus_name, cat)));
      for (auto i : *chosen) append(train, eps[i]);
    }
    finish(m);
    source = train;
    parent = m.corpus_name;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<StatsRow> manifest_stats(const CorpusManifest& manifest) {
  std::vector<StatsRow> rows;
  for (const auto& [name, refs] : manifest.splits) {
    std::map<std::string, std::pair<StatsRow, std::set<std::string>>> by_cat;
    for (const auto& r : refs) {
      auto& [row, eps] = by_cat[r.category];
      row.split = name;
      row.category = r.category;
      ++row.segments;
      row.seconds += r.duration();
      eps.insert(r.episode_id);
    }
    for (auto& [cat, entry] : by_cat) {
      entry.first.episodes = entry.second.size();
      rows.push_back(std::move(entry.first));
    }
  }
  return rows;
}

std::string format_stats(const std::vector<StatsRow>& rows) {
  std::size_t w_split = 5, w_cat = 8;
  for (const auto& r : rows) {
    w_split = std::max(w_split, r.split.size());
    w_cat = std::max(w_cat, r.category.size());
  }
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-*s  %-*s  %8s  %8s  %10s\n", static_cast<int>(w_split), "split",
                static_cast<int>(w_cat), "category", "segments", "episodes", "hours");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %-*s  %8zu  %8zu  %10.4f\n", static_cast<int>(w_split), r.split.c_str(),
                  static_cast<int>(w_cat), r.category.c_str(), r.segments, r.episodes, r.hours());
    out += buf;
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const CorpusManifest& m) {
  std::vector<Json> out;
  Json h;
  h["type"] = "header";
  h["corpus_name"] = m.corpus_name;
  h["sampling_seed"] = m.sampling_seed;
  h["parent"] = jsonl::opt(m.parent_corpus);
  h["prng"] = m.prng;
  h["nested"] = m.nested;
  Json budgets = Json::array();
  for (const auto& b : m.budgets)
    budgets.push_back(Json{{"name", b.name}, {"kind", std::string(to_string(b.kind))}, {"per_category_budget_s", b.per_category_budget_s}});
  h["budgets"] = std::move(budgets);
  out.push_back(std::move(h));
  for (const auto& [name, refs] : m.splits) {
    for (const auto& r : refs) {
      Json j;
      j["type"] = "segment";
      j["episode_id"] = r.episode_id;
      j["start_s"] = r.start_s;
      j["end_s"] = r.end_s;
      j["transcript_ref"] = r.transcript_ref;
      j["category"] = r.category;
      j["split"] = name;
      j["transcript"] = r.transcript;
      out.push_back(std::move(j));
    }
  }
  jsonl::write(path, out);
}

CorpusManifest read_manifest(const std::filesystem::path& path) {
  const auto records = jsonl::read(path);
  const auto ctx = path.string();
  if (records.empty() || records.front().value("type", "") != "header") raise(ErrorCode::Io, ctx + ": missing manifest header");
  const auto& h = records.front();
  CorpusManifest m;
  m.corpus_name = jsonl::get<std::string>(h, "corpus_name", ctx);
  m.sampling_seed = jsonl::get<std::uint64_t>(h, "sampling_seed", ctx);
  m.parent_corpus = jsonl::get_opt<std::string>(h, "parent");
  m.prng = jsonl::get<std::string>(h, "prng", ctx);
  m.nested = jsonl::get<bool>(h, "nested", ctx);
  for (const auto& b : h.at("budgets"))
    m.budgets.push_back({jsonl::get<std::string>(b, "name", ctx), jsonl::get<double>(b, "per_category_budget_s", ctx),
                         split_kind_from_string(jsonl::get<std::string>(b, "kind", ctx))});
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& j = records[i];
    SegmentRef r{jsonl::get<std::string>(j, "episode_id", ctx), jsonl::get<double>(j, "start_s", ctx),
                 jsonl::get<double>(j, "end_s", ctx),         jsonl::get<std::string>(j, "transcript_ref", ctx),
                 jsonl::get<std::string>(j, "transcript", ctx), jsonl::get<std::string>(j, "category", ctx)};
    m.splits[jsonl::get<std::string>(j, "split", ctx)].push_back(std::move(r));
  }
  m.recompute();
  return m;
}

}  // namespace corpusforge::corpus
