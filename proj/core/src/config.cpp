#include "corpusforge/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "corpusforge/corpus.hpp"
#include "corpusforge/error.hpp"
#include "corpusforge/io.hpp"

namespace corpusforge {
namespace {

namespace fs = std::filesystem;

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
  raise(ErrorCode::ConfigInvalid, key + ": " + why);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto t = trim(v);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || p != t.data() + t.size() || t.empty()) invalid(key, "not a number: '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto t = trim(v);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || p != t.data() + t.size() || t.empty()) invalid(key, "not a non-negative integer: '" + v + "'");
  return out;
}

std::chrono::milliseconds to_ms(const std::string& key, const std::string& v) {
  return std::chrono::milliseconds(static_cast<std::int64_t>(to_uint(key, v)));
}

bool to_bool(const std::string& key, const std::string& v) {
  const auto t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  invalid(key, "not a boolean: '" + v + "'");
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? std::string(1, sep) : "") + items[i];
  return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string& key, const std::string& value, const fs::path& base)>;

struct Key {
  std::string name;  // "section.key"
  std::string fallback;
  Setter set;
};

fs::path resolve(const fs::path& base, const std::string& v) {
  const auto t = trim(v);
  if (t.empty()) return {};
  fs::path p(t);
  if (!p.is_relative()) return p;
  auto out = (base / p).lexically_normal();
  if (!out.has_filename() && out != out.root_path()) out = out.parent_path();  // "dir/." -> "dir"
  return out;
}

const std::vector<Key>& keys() {
  using C = PipelineConfig;
  using S = const std::string&;
  using B = const fs::path&;
  static const std::vector<Key> table = {
      {"workspace.path", ".", [](C& c, S, S v, B b) { c.workspace = resolve(b, v); }},
      {"workspace.categories", join(feeds::default_categories(), ','),
       [](C& c, S, S v, B) { c.categories = split_list(v, ','); }},

      {"crawl.feeds", "", [](C& c, S, S v, B b) { c.feed_list = resolve(b, v); }},
      {"crawl.max_inflight", "4", [](C& c, S k, S v, B) { c.crawl.max_inflight = to_uint(k, v); }},
      {"crawl.per_host_delay_ms", "1000", [](C& c, S k, S v, B) { c.crawl.per_host_delay = to_ms(k, v); }},
      {"crawl.max_retries", "2", [](C& c, S k, S v, B) { c.crawl.max_retries = static_cast<int>(to_uint(k, v)); }},
      {"crawl.connect_timeout_ms", "5000", [](C& c, S k, S v, B) { c.crawl.connect_timeout = to_ms(k, v); }},
      {"crawl.read_timeout_ms", "30000", [](C& c, S k, S v, B) { c.crawl.read_timeout = to_ms(k, v); }},

      {"fetch.cap_hours_per_category", "",
       [](C& c, S k, S v, B) {
         c.fetch.cap_hours_per_category.reset();
         if (!trim(v).empty()) c.fetch.cap_hours_per_category = to_double(k, v);
       }},
      {"fetch.max_retries", "3", [](C& c, S k, S v, B) { c.fetch.retry.max_retries = static_cast<int>(to_uint(k, v)); }},
      {"fetch.backoff_ms", "200", [](C& c, S k, S v, B) { c.fetch.retry.backoff = to_ms(k, v); }},
      {"fetch.connect_timeout_ms", "5000", [](C& c, S k, S v, B) { c.fetch.retry.connect_timeout = to_ms(k, v); }},
      {"fetch.read_timeout_ms", "30000", [](C& c, S k, S v, B) { c.fetch.retry.read_timeout = to_ms(k, v); }},
      {"fetch.workers", "0", [](C& c, S k, S v, B) { c.fetch.workers = to_uint(k, v); }},
      {"fetch.decoder", "", [](C& c, S, S v, B) { c.fetch.decoder_program = trim(v); }},

      {"segment.t0_s", "30", [](C& c, S k, S v, B) { c.segmenter.t0_s = to_double(k, v); }},
      {"segment.onset", "0.5", [](C& c, S k, S v, B) { c.segmenter.onset_threshold = to_double(k, v); }},
      {"segment.offset", "0.363", [](C& c, S k, S v, B) { c.segmenter.offset_threshold = to_double(k, v); }},
      {"segment.min_region_s", "0.25", [](C& c, S k, S v, B) { c.segmenter.min_region_s = to_double(k, v); }},
      {"segment.max_merge_gap_s", "0.5", [](C& c, S k, S v, B) { c.segmenter.max_merge_gap_s = to_double(k, v); }},
      {"segment.min_cut_piece_s", "1", [](C& c, S k, S v, B) { c.segmenter.min_cut_piece_s = to_double(k, v); }},

      {"backend.command", "", [](C& c, S, S v, B) { c.backend.command = trim(v); }},
      {"backend.vad_command", "", [](C& c, S, S v, B) { c.backend.vad_command = trim(v); }},
      {"backend.transcribe_command", "", [](C& c, S, S v, B) { c.backend.transcribe_command = trim(v); }},
      {"backend.align_command", "", [](C& c, S, S v, B) { c.backend.align_command = trim(v); }},
      {"backend.call_timeout_ms", "120000", [](C& c, S k, S v, B) { c.backend.options.call_timeout = to_ms(k, v); }},
      {"backend.startup_timeout_ms", "30000",
       [](C& c, S k, S v, B) { c.backend.options.startup_timeout = to_ms(k, v); }},
      {"backend.restart_on_crash", "true",
       [](C& c, S k, S v, B) { c.backend.options.restart_on_crash = to_bool(k, v); }},
      {"backend.workers", "1", [](C& c, S k, S v, B) { c.backend.workers = to_uint(k, v); }},

      {"filter.patterns", std::string(filter::kDefaultHallucinationPattern),
       [](C& c, S, S v, B) { c.filter.hallucination_patterns = split_list(v, '|'); }},
      {"filter.latin_run_min_chars", "4",
       [](C& c, S k, S v, B) { c.filter.codeswitch.latin_run_min_chars = to_uint(k, v); }},
      {"filter.boundary_window_words", "5",
       [](C& c, S k, S v, B) { c.filter.codeswitch.boundary_window_words = to_uint(k, v); }},

      {"sample.hours_per_category", "50", [](C& c, S k, S v, B) { c.sample.hours_per_category = to_double(k, v); }},
      {"sample.test_s", "3600", [](C& c, S k, S v, B) { c.sample.test_s_per_category = to_double(k, v); }},
      {"sample.val_s", "900", [](C& c, S k, S v, B) { c.sample.val_s_per_category = to_double(k, v); }},
      {"sample.subsets", "20,10,5,2",
       [](C& c, S k, S v, B) {
         c.sample.subsets_h.clear();
         for (const auto& item : split_list(v, ',')) c.sample.subsets_h.push_back(to_double(k, item));
       }},
      {"sample.seed", "0", [](C& c, S k, S v, B) { c.sample.seed = to_uint(k, v); }},
      {"sample.corpus_name", "", [](C& c, S, S v, B) { c.sample.corpus_name = trim(v); }},

      {"evaluate.hyps", "", [](C& c, S, S v, B b) { c.evaluate.hyps = resolve(b, v); }},
      {"evaluate.profile", "greek-basic-v1", [](C& c, S, S v, B) { c.evaluate.profile = trim(v); }},
      {"evaluate.split", "test", [](C& c, S, S v, B) { c.evaluate.split = trim(v); }},
      {"evaluate.curve_hours", "",
       [](C& c, S k, S v, B) {
         c.evaluate.curve_hours.clear();
         for (const auto& item : split_list(v, ',')) {
           const auto eq = item.rfind('=');
           if (eq == std::string::npos) invalid(k, "expected label=hours, got '" + item + "'");
           c.evaluate.curve_hours[trim(item.substr(0, eq))] = to_double(k, item.substr(eq + 1));
         }
       }},
      {"evaluate.baseline_model", "",
       [](C& c, S, S v, B) {
         c.evaluate.baseline_model.reset();
         if (!trim(v).empty()) c.evaluate.baseline_model = trim(v);
       }},
  };
  return table;
}

std::string env_name(const std::string& dotted) {
  std::string out = "CORPUSFORGE_";
  for (char ch : dotted) out += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

void validate(const PipelineConfig& c) {
  if (c.categories.empty()) invalid("workspace.categories", "empty");
  try {
    c.segmenter.validate();
  } catch (const Error& e) {
    invalid("segment", e.what());
  }
  if (c.crawl.max_inflight == 0) invalid("crawl.max_inflight", "must be at least 1");
  if (c.fetch.cap_hours_per_category && !(*c.fetch.cap_hours_per_category >= 0.0))
    invalid("fetch.cap_hours_per_category", "must be non-negative");
  if (c.backend.workers == 0) invalid("backend.workers", "must be at least 1");
  if (c.filter.hallucination_patterns.empty()) invalid("filter.patterns", "empty");
  if (c.filter.codeswitch.latin_run_min_chars == 0) invalid("filter.latin_run_min_chars", "must be positive");
  if (!(c.sample.hours_per_category > 0.0)) invalid("sample.hours_per_category", "must be positive");
  if (!(c.sample.test_s_per_category > 0.0)) invalid("sample.test_s", "must be positive");
  if (c.sample.val_s_per_category < 0.0) invalid("sample.val_s", "must be non-negative");
  for (std::size_t i = 0; i < c.sample.subsets_h.size(); ++i) {
    if (!(c.sample.subsets_h[i] > 0.0)) invalid("sample.subsets", "budgets must be positive");
    if (i > 0 && !(c.sample.subsets_h[i] < c.sample.subsets_h[i - 1]))
      invalid("sample.subsets", "budgets must be strictly decreasing");
  }
  eval::profile_by_id(c.evaluate.profile);
}

}  // namespace

std::string SampleParams::effective_name() const {
  return corpus_name.empty() ? corpus::corpus_label(hours_per_category) : corpus_name;
}

const std::string& BackendParams::for_op(backend::Op op) const {
  const std::string* specific = nullptr;
  switch (op) {
    case backend::Op::Vad: specific = &vad_command; break;
    case backend::Op::Transcribe: specific = &transcribe_command; break;
    case backend::Op::Align: specific = &align_command; break;
  }
  return specific->empty() ? command : *specific;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string PipelineConfig::settings_text(const std::vector<std::string>& sections) const {
  std::string out;
  for (const auto& [k, v] : settings)
    for (const auto& s : sections)
      if (k == s || k.starts_with(s + ".")) out += k + "=" + v + "\n";
  return out;
}

PipelineConfig parse_config(const std::string& text, const fs::path& base_dir, const Environment* env) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    raise(ErrorCode::ConfigInvalid, std::string("syntax: ") + e.what());
  }

  std::map<std::string, std::string> values;
  for (const auto& k : keys()) values[k.name] = k.fallback;
  for (const auto& [section, body] : tree) {
    const bool known = std::ranges::any_of(keys(), [&](const Key& k) { return k.name.starts_with(section + "."); });
    if (!known || !body.data().empty()) invalid(section, "unknown section or key outside a section");
    for (const auto& [key, value] : body) {
      const auto dotted = section + "." + key;
      if (!values.count(dotted)) invalid(dotted, "unknown key");
      values[dotted] = value.get_value<std::string>();
    }
  }
  for (auto& [dotted, value] : values) {
    const auto name = env_name(dotted);
    if (env) {
      if (auto it = env->find(name); it != env->end()) value = it->second;
    } else if (const char* v = std::getenv(name.c_str())) {
      value = v;
    }
  }

  PipelineConfig c;
  for (const auto& k : keys()) k.set(c, k.name, values[k.name], base_dir);
  c.settings = std::move(values);
  validate(c);
  return c;
}

PipelineConfig load_config(const fs::path& path, const Environment* env) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    raise(ErrorCode::ConfigInvalid, e.what());
  }
  return parse_config(text, fs::absolute(path).parent_path(), env);
}

}  // namespace corpusforge
