#include "corpusforge/feeds.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "corpusforge/hash.hpp"
#include "corpusforge/io.hpp"
#include "corpusforge/text.hpp"
#include "corpusforge/url.hpp"
#include "feed_xml.hpp"
#include "jsonl.hpp"

namespace corpusforge::feeds {

const std::vector<std::string>& default_categories() {
  static const std::vector<std::string> kCategories = {
      "Arts",    "Business", "Comedy",         "Education", "HealthFitness", "History",
      "KidsFamily", "Leisure", "Music",        "News",      "Science",       "SocietyCulture",
      "Sports",  "Technology", "TrueCrime",    "TVFilm"};
  return kCategories;
}

void validate(const FeedSource& source, std::span<const std::string> categories) {
  require(is_absolute_http_url(source.feed_url), "feed_url is not an absolute http(s) URL: " + source.feed_url);
  require(std::ranges::find(categories, source.category) != categories.end(),
          "category '" + source.category + "' is not in the configured category set");
  require(!source.language_tag.empty(), "language_tag is empty");
}

std::string make_episode_id(std::string_view feed_url, std::string_view guid, std::string_view enclosure_url) {
  std::string key;
  key.reserve(feed_url.size() + guid.size() + enclosure_url.size() + 2);
  key.append(feed_url).push_back('\x1f');
  key.append(guid).push_back('\x1f');
  key.append(enclosure_url);
  const auto digest = sha256(key);
  return to_hex(std::span(digest).first(16));
}

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::ranges::transform(out, out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_audio_enclosure(std::string_view type, std::string_view url) {
  const auto t = lower_ascii(type);
  if (!t.empty()) return t.starts_with("audio/");
  // No declared type: fall back to the file extension.
  auto path = url.substr(0, url.find_first_of("?#"));
  const auto dot = path.rfind('.');
  if (dot == std::string_view::npos) return false;
  static constexpr std::string_view kExts[] = {"mp3", "m4a", "aac", "ogg", "oga", "opus", "wav", "flac"};
  const auto ext = lower_ascii(path.substr(dot + 1));
  return std::ranges::find(kExts, ext) != std::end(kExts);
}

std::optional<std::string> declared_sha256(const xml::Node& item) {
  auto scan = [](const xml::Node& n) -> std::optional<std::string> {
    for (const auto* h : n.children_local("hash")) {
      const auto algo = lower_ascii(h->attr("algo"));
      auto value = lower_ascii(h->trimmed_text());
      if ((algo == "sha-256" || algo == "sha256") && value.size() == 64 &&
          std::ranges::all_of(value, [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); }))
        return value;
    }
    return std::nullopt;
  };
  if (auto v = scan(item)) return v;
  for (const auto* content : item.children_local("content"))
    if (auto v = scan(*content)) return v;
  return std::nullopt;
}

struct Candidate {
  std::string guid;
  std::string title;
  std::string enclosure_url;
  std::string enclosure_type;
  std::optional<double> duration;
  std::optional<std::int64_t> published;
  std::optional<std::string> digest;
};

void collect_rss(const xml::Node& channel, std::vector<Candidate>& out) {
  for (const auto* item : channel.children_local("item")) {
    Candidate c;
    if (const auto* t = item->child("title")) c.title = t->trimmed_text();
    if (const auto* g = item->child("guid")) c.guid = g->trimmed_text();
    if (const auto* e = item->child("enclosure")) {
      c.enclosure_url = e->attr("url");
      c.enclosure_type = e->attr("type");
    }
    if (const auto* d = item->child("itunes:duration")) c.duration = parse_itunes_duration(d->trimmed_text());
    if (const auto* p = item->child("pubDate")) c.published = parse_rfc822_date(p->trimmed_text());
    c.digest = declared_sha256(*item);
    out.push_back(std::move(c));
  }
}

void collect_atom(const xml::Node& feed, std::vector<Candidate>& out) {
  for (const auto* entry : feed.children_local("entry")) {
    Candidate c;
    if (const auto* t = entry->child_local("title")) c.title = t->trimmed_text();
    if (const auto* id = entry->child_local("id")) c.guid = id->trimmed_text();
    for (const auto* link : entry->children_local("link")) {
      if (link->attr("rel") != "enclosure") continue;
      c.enclosure_url = link->attr("href");
      c.enclosure_type = link->attr("type");
      if (is_audio_enclosure(c.enclosure_type, c.enclosure_url)) break;
    }
    if (const auto* d = entry->child("itunes:duration")) c.duration = parse_itunes_duration(d->trimmed_text());
    const xml::Node* date = entry->child_local("published");
    if (date == nullptr) date = entry->child_local("updated");
    if (date != nullptr) c.published = parse_rfc3339_date(date->trimmed_text());
    c.digest = declared_sha256(*entry);
    out.push_back(std::move(c));
  }
}

}  // namespace

ParsedFeed parse_feed(std::string_view xml_bytes, const FeedSource& source) {
  const auto root = xml::parse(xml_bytes);
  ParsedFeed feed;
  std::vector<Candidate> candidates;

  if (root->local_name() == "rss") {
    feed.format = FeedFormat::Rss2;
    if (const auto* channel = root->child_local("channel")) {
      if (const auto* t = channel->child("title")) feed.podcast_name = t->trimmed_text();
      collect_rss(*channel, candidates);
    }
  } else if (root->local_name() == "feed") {
    feed.format = FeedFormat::Atom;
    if (const auto* t = root->child_local("title")) feed.podcast_name = t->trimmed_text();
    collect_atom(*root, candidates);
  } else {
    raise(ErrorCode::UnsupportedFeedFormat, "root element <" + root->name + "> is neither RSS nor Atom");
  }

  feed.item_count = candidates.size();
  if (candidates.empty()) raise(ErrorCode::EmptyFeed, source.feed_url + " has no items");

  std::set<std::string> seen;
  for (auto& c : candidates) {
    if (c.enclosure_url.empty() || !is_audio_enclosure(c.enclosure_type, c.enclosure_url) ||
        !is_absolute_http_url(c.enclosure_url)) {
      ++feed.skipped_without_audio;
      continue;
    }
    const std::string& guid = c.guid.empty() ? c.enclosure_url : c.guid;
    Episode ep;
    ep.episode_id = make_episode_id(source.feed_url, guid, c.enclosure_url);
    if (!seen.insert(ep.episode_id).second) {
      ++feed.duplicates;
      continue;
    }
    ep.feed_url = source.feed_url;
    ep.podcast_name = feed.podcast_name;
    ep.title = std::move(c.title);
    ep.enclosure_url = std::move(c.enclosure_url);
    ep.category = source.category;
    ep.language_tag = source.language_tag;
    ep.declared_duration_s = c.duration;
    ep.publish_time = c.published;
    ep.enclosure_sha256 = std::move(c.digest);
    feed.episodes.push_back(std::move(ep));
  }
  return feed;
}

// ---------------------------------------------------------------------------
// Dates and durations

namespace {

std::optional<int> to_int(std::string_view s) {
  int v = 0;
  if (s.empty()) return std::nullopt;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> make_utc(int y, int mo, int d, int h, int mi, int s, int offset_s) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + s - offset_s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::optional<int> zone_offset(std::string_view zone) {
  if (zone.empty()) return 0;
  if ((zone[0] == '+' || zone[0] == '-') && zone.size() == 5) {
    const auto hh = to_int(zone.substr(1, 2));
    const auto mm = to_int(zone.substr(3, 2));
    if (!hh || !mm) return std::nullopt;
    const int off = *hh * 3600 + *mm * 60;
    return zone[0] == '-' ? -off : off;
  }
  static const std::pair<std::string_view, int> kNamed[] = {
      {"GMT", 0},      {"UT", 0},       {"UTC", 0},      {"Z", 0},        {"EST", -5 * 3600},
      {"EDT", -4 * 3600}, {"CST", -6 * 3600}, {"CDT", -5 * 3600}, {"MST", -7 * 3600}, {"MDT", -6 * 3600},
      {"PST", -8 * 3600}, {"PDT", -7 * 3600}};
  for (const auto& [name, off] : kNamed)
    if (zone == name) return off;
  return std::nullopt;
}

}  // namespace

std::optional<std::int64_t> parse_rfc822_date(std::string_view text) {
  std::vector<std::string_view> tok;
  for (auto piece : split(text, ' '))
    if (!piece.empty()) tok.push_back(piece);
  if (!tok.empty() && tok[0].ends_with(',')) tok.erase(tok.begin());
  if (tok.size() < 4) return std::nullopt;

  const auto d = to_int(tok[0]);
  static constexpr std::string_view kMonths[] = {"jan", "feb", "mar", "apr", "may", "jun",
                                                 "jul", "aug", "sep", "oct", "nov", "dec"};
  const auto mon_name = lower_ascii(tok[1].substr(0, 3));
  const auto mon_it = std::ranges::find(kMonths, mon_name);
  auto y = to_int(tok[2]);
  if (!d || mon_it == std::end(kMonths) || !y) return std::nullopt;
  if (tok[2].size() == 2) *y += *y < 50 ? 2000 : 1900;

  const auto hms = split(tok[3], ':');
  if (hms.size() < 2 || hms.size() > 3) return std::nullopt;
  const auto h = to_int(hms[0]);
  const auto mi = to_int(hms[1]);
  const auto s = hms.size() == 3 ? to_int(hms[2]) : std::optional<int>(0);
  const auto off = zone_offset(tok.size() > 4 ? tok[4] : std::string_view{});
  if (!h || !mi || !s || !off) return std::nullopt;
  return make_utc(*y, static_cast<int>(mon_it - std::begin(kMonths)) + 1, *d, *h, *mi, *s, *off);
}

std::optional<std::int64_t> parse_rfc3339_date(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SS[.frac](Z|+hh:mm|-hh:mm)
  if (text.size() < 20 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != 't') ||
      text[13] != ':' || text[16] != ':')
    return std::nullopt;
  const auto y = to_int(text.substr(0, 4));
  const auto mo = to_int(text.substr(5, 2));
  const auto d = to_int(text.substr(8, 2));
  const auto h = to_int(text.substr(11, 2));
  const auto mi = to_int(text.substr(14, 2));
  const auto s = to_int(text.substr(17, 2));
  if (!y || !mo || !d || !h || !mi || !s) return std::nullopt;
  auto rest = text.substr(19);
  if (!rest.empty() && rest[0] == '.') {
    std::size_t i = 1;
    while (i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]))) ++i;
    rest = rest.substr(i);
  }
  int offset = 0;
  if (rest == "Z" || rest == "z") {
    offset = 0;
  } else if (rest.size() == 6 && (rest[0] == '+' || rest[0] == '-') && rest[3] == ':') {
    const auto oh = to_int(rest.substr(1, 2));
    const auto om = to_int(rest.substr(4, 2));
    if (!oh || !om) return std::nullopt;
    offset = (*oh * 3600 + *om * 60) * (rest[0] == '-' ? -1 : 1);
  } else {
    return std::nullopt;
  }
  return make_utc(*y, *mo, *d, *h, *mi, *s, offset);
}

std::optional<double> parse_itunes_duration(std::string_view text) {
  if (text.empty()) return std::nullopt;
  const auto parts = split(text, ':');
  if (parts.size() > 3) return std::nullopt;
  double total = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    double v = 0.0;
    const auto part = parts[i];
    if (part.empty()) return std::nullopt;
    const auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || p != part.data() + part.size() || !(v >= 0.0) || !std::isfinite(v)) return std::nullopt;
    if (i + 1 < parts.size() && v != std::floor(v)) return std::nullopt;
    total = total * 60.0 + v;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Catalog

bool FeedCatalog::add(Episode episode) {
  if (!ids_.insert(episode.episode_id).second) return false;
  auto& st = stats_[episode.category];
  ++st.episode_count;
  if (episode.declared_duration_s) {
    st.declared_hours += *episode.declared_duration_s / 3600.0;
  } else {
    ++st.unknown_duration_count;
  }
  auto& feeds = podcasts_[episode.category];
  feeds.insert(episode.feed_url);
  st.podcast_count = feeds.size();
  episodes_.push_back(std::move(episode));
  return true;
}

std::map<std::string, CategoryStats> FeedCatalog::recompute_stats(std::span<const Episode> episodes) {
  std::map<std::string, CategoryStats> stats;
  std::map<std::string, std::set<std::string>> feeds;
  for (const auto& ep : episodes) {
    auto& st = stats[ep.category];
    ++st.episode_count;
    if (ep.declared_duration_s) {
      st.declared_hours += *ep.declared_duration_s / 3600.0;
    } else {
      ++st.unknown_duration_count;
    }
    feeds[ep.category].insert(ep.feed_url);
  }
  for (auto& [cat, st] : stats) st.podcast_count = feeds[cat].size();
  return stats;
}

bool FeedCatalog::consistent() const {
  const auto fresh = recompute_stats(episodes_);
  if (fresh.size() != stats_.size()) return false;
  for (const auto& [cat, st] : fresh) {
    const auto it = stats_.find(cat);
    if (it == stats_.end()) return false;
    const auto& s = it->second;
    if (s.episode_count != st.episode_count || s.podcast_count != st.podcast_count ||
        s.unknown_duration_count != st.unknown_duration_count ||
        std::abs(s.declared_hours - st.declared_hours) > 1e-9)
      return false;
  }
  return true;
}

CatalogTable catalog_stats(const FeedCatalog& catalog) {
  CatalogTable table;
  for (const auto& [cat, st] : catalog.per_category_stats()) {  // std::map: sorted by name
    StatsRow row{cat, st.declared_hours, st.podcast_count, st.episode_count, st.unknown_duration_count};
    table.total.hours += row.hours;
    table.total.podcasts += row.podcasts;
    table.total.episodes += row.episodes;
    table.total.unknown_duration_episodes += row.unknown_duration_episodes;
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_catalog_table(const CatalogTable& table) {
  std::size_t width = std::string_view("Domain").size();
  for (const auto& r : table.rows) width = std::max(width, r.category.size());
  std::ostringstream os;
  auto line = [&](std::string_view a, std::string_view b, std::string_view c, std::string_view d, std::string_view e) {
    os << std::left << std::setw(static_cast<int>(width)) << a << "  " << std::right << std::setw(12) << b << "  "
       << std::setw(10) << c << "  " << std::setw(10) << d << "  " << std::setw(16) << e << '\n';
  };
  auto fmt_hours = [](double h) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << h;
    return s.str();
  };
  line("Domain", "Total hours", "#podcasts", "#episodes", "#unknown-length");
  for (const auto& r : table.rows)
    line(r.category, fmt_hours(r.hours), std::to_string(r.podcasts), std::to_string(r.episodes),
         std::to_string(r.unknown_duration_episodes));
  const auto& t = table.total;
  line(t.category, fmt_hours(t.hours), std::to_string(t.podcasts), std::to_string(t.episodes),
       std::to_string(t.unknown_duration_episodes));
  return os.str();
}

// ---------------------------------------------------------------------------
// Files

std::vector<FeedSource> read_feed_list(const std::filesystem::path& path, std::string_view default_language) {
  const auto text = read_file(path);
  require(text::is_valid_utf8(text), path.string() + " is not valid UTF-8");
  std::vector<FeedSource> out;
  std::size_t lineno = 0;
  for (const auto& raw : split_lines(text)) {
    ++lineno;
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos || raw[first] == '#') continue;
    const auto cols = split(raw, '\t');
    require(cols.size() >= 2 && cols.size() <= 3,
            path.string() + ":" + std::to_string(lineno) + ": expected url<TAB>category[<TAB>language]");
    FeedSource src;
    src.feed_url.assign(cols[0]);
    src.category.assign(cols[1]);
    src.language_tag.assign(cols.size() == 3 ? cols[2] : default_language);
    out.push_back(std::move(src));
  }
  return out;
}

void write_catalog(const std::filesystem::path& path, const FeedCatalog& catalog) {
  std::vector<jsonl::Json> records;
  records.reserve(catalog.size());
  for (const auto& ep : catalog.episodes()) {
    jsonl::Json j;
    j["episode_id"] = ep.episode_id;
    j["category"] = ep.category;
    j["podcast_name"] = ep.podcast_name;
    j["title"] = ep.title;
    j["feed_url"] = ep.feed_url;
    j["enclosure_url"] = ep.enclosure_url;
    j["language_tag"] = ep.language_tag;
    j["declared_duration_s"] = jsonl::opt(ep.declared_duration_s);
    j["publish_time"] = jsonl::opt(ep.publish_time);
    j["enclosure_sha256"] = jsonl::opt(ep.enclosure_sha256);
    records.push_back(std::move(j));
  }
  jsonl::write(path, records);
}

FeedCatalog read_catalog(const std::filesystem::path& path) {
  FeedCatalog catalog;
  const auto ctx = path.string();
  for (const auto& j : jsonl::read(path)) {
    Episode ep;
    ep.episode_id = jsonl::get<std::string>(j, "episode_id", ctx);
    ep.category = jsonl::get<std::string>(j, "category", ctx);
    ep.podcast_name = jsonl::get<std::string>(j, "podcast_name", ctx);
    ep.title = jsonl::get<std::string>(j, "title", ctx);
    ep.feed_url = jsonl::get<std::string>(j, "feed_url", ctx);
    ep.enclosure_url = jsonl::get<std::string>(j, "enclosure_url", ctx);
    ep.language_tag = jsonl::get<std::string>(j, "language_tag", ctx);
    ep.declared_duration_s = jsonl::get_opt<double>(j, "declared_duration_s");
    ep.publish_time = jsonl::get_opt<std::int64_t>(j, "publish_time");
    ep.enclosure_sha256 = jsonl::get_opt<std::string>(j, "enclosure_sha256");
    if (!catalog.add(std::move(ep))) raise(ErrorCode::Io, ctx + ": duplicate episode_id");
  }
  return catalog;
}

}  // namespace corpusforge::feeds
