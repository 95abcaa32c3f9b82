#include "corpusforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "corpusforge/corpus.hpp"
#include "corpusforge/error.hpp"
#include "corpusforge/hash.hpp"
#include "corpusforge/io.hpp"
#include "corpusforge/records.hpp"
#include "corpusforge/text.hpp"
#include "jsonl.hpp"

namespace corpusforge::pipeline {
namespace {

using jsonl::Json;
using backend::Op;

/// Runs fn(worker, item) for every item on `workers` threads; rethrows the
/// first failure after all threads have stopped.
void parallel_for(std::size_t items, std::size_t workers, const std::function<void(std::size_t, std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, items));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = next++; i < items && !failed; i = next++) {
          try {
            fn(w, i);
          } catch (...) {
            std::lock_guard lk(mu);
            if (!first) first = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (first) std::rethrow_exception(first);
}

// One backend per op for a worker; ops with the same command share a process.
struct BackendSet {
  std::vector<std::unique_ptr<backend::Backend>> owned;
  std::map<Op, backend::Backend*> by_op;

  BackendSet(const BackendParams& params, std::initializer_list<Op> ops) {
    std::map<std::string, backend::Backend*> by_command;
    for (auto op : ops) {
      const auto& cmd = params.for_op(op);
      if (cmd.empty()) raise(ErrorCode::ConfigInvalid, "no backend command for " + std::string(backend::to_string(op)));
      auto& slot = by_command[cmd];
      if (!slot) {
        owned.push_back(backend::make_backend(cmd, params.options));
        slot = owned.back().get();
      }
      if (!slot->handshake().supports(op))
        raise(ErrorCode::PreconditionViolation, "backend '" + cmd + "' does not advertise " + std::string(backend::to_string(op)));
      by_op[op] = slot;
    }
  }
  backend::Backend& operator[](Op op) { return *by_op.at(op); }
};

std::vector<BackendSet> make_sets(const BackendParams& params, std::size_t n, std::initializer_list<Op> ops) {
  std::vector<BackendSet> sets;
  for (std::size_t i = 0; i < std::max<std::size_t>(1, n); ++i) sets.emplace_back(params, ops);
  return sets;
}

std::map<std::string, ingest::AudioAsset> asset_map(const fs::path& assets_dir) {
  std::map<std::string, ingest::AudioAsset> out;
  for (auto& a : ingest::read_asset_index(assets_dir / "assets.jsonl")) out.emplace(a.episode_id, std::move(a));
  return out;
}

}  // namespace

StageReport crawl_stage(const fs::path& feed_list, const fs::path& catalog_out, const feeds::CrawlPolicy& policy) {
  const auto sources = feeds::read_feed_list(feed_list);
  auto result = feeds::crawl(sources, policy);
  feeds::write_catalog(catalog_out, result.catalog);
  StageReport r;
  r.records = result.catalog.size();
  for (const auto& f : result.failures) r.notes.push_back(f.feed_url + ": " + f.message);
  if (result.skipped_items) r.notes.push_back(std::to_string(result.skipped_items) + " item(s) without a usable audio enclosure");
  return r;
}

StageReport fetch_stage(const fs::path& catalog_path, const fs::path& out_dir, const FetchParams& params) {
  const auto catalog = feeds::read_catalog(catalog_path);
  const auto index = out_dir / "assets.jsonl";
  ingest::AutoDecoder decoder(params.decoder_program.empty() ? std::nullopt : std::optional(params.decoder_program));
  ingest::IngestOptions opts;
  opts.raw_dir = out_dir / "raw";
  opts.wav_dir = out_dir / "wav";
  opts.cap_hours_per_category = params.cap_hours_per_category;
  opts.retry = params.retry;
  opts.workers = params.workers;
  opts.decoder = &decoder;
  if (fs::exists(index)) opts.previous = ingest::read_asset_index(index);
  auto result = ingest::ingest_catalog(catalog, opts);
  if (result.assets.empty() && !catalog.empty()) {
    std::string why = result.failures.empty() ? "no episodes selected" : result.failures.front().message;
    raise(ErrorCode::FetchFailed, "no episode could be ingested: " + why);
  }
  ingest::write_asset_index(index, result.assets);
  StageReport r;
  r.records = result.assets.size();
  for (const auto& f : result.failures) r.notes.push_back(f.episode_id + ": " + f.message);
  return r;
}

StageReport vad_stage(const fs::path& assets_dir, const fs::path& traces_dir, const BackendParams& params) {
  const auto assets = ingest::read_asset_index(assets_dir / "assets.jsonl");
  fs::create_directories(traces_dir);
  auto sets = make_sets(params, std::min(params.workers, assets.size()), {Op::Vad});
  parallel_for(assets.size(), sets.size(), [&](std::size_t w, std::size_t i) {
    backend::BackendRequest req;
    req.op = Op::Vad;
    req.audio_path = assets[i].path;
    const auto resp = sets[w][Op::Vad].call(req);
    segment::write_trace(traces_dir / (assets[i].episode_id + ".trace"), resp.vad());
  });
  return {assets.size(), {}};
}

StageReport segment_stage(const fs::path& traces_dir, const fs::path& spans_out, const segment::SegmenterConfig& cfg) {
  cfg.validate();
  std::vector<fs::path> traces;
  for (const auto& e : fs::directory_iterator(traces_dir))
    if (e.is_regular_file() && e.path().extension() == ".trace") traces.push_back(e.path());
  std::sort(traces.begin(), traces.end());
  std::vector<segment::SpanRecord> records;
  for (const auto& t : traces)
    for (const auto& span : segment::segment_audio(segment::read_trace(t), cfg))
      records.push_back({t.stem().string(), span});
  segment::write_span_records(spans_out, records);
  return {records.size(), {}};
}

StageReport transcribe_stage(const fs::path& assets_dir, const fs::path& spans_path, const BackendParams& params,
                             const fs::path& out) {
  const auto assets = asset_map(assets_dir);
  const auto spans = segment::read_span_records(spans_path);
  for (const auto& s : spans)
    require(assets.count(s.episode_id), "span for unknown episode " + s.episode_id);
  std::vector<TranscribedSegment> result(spans.size());
  auto sets = make_sets(params, std::min(params.workers, spans.size()), {Op::Transcribe, Op::Align});
  parallel_for(spans.size(), sets.size(), [&](std::size_t w, std::size_t i) {
    const auto& s = spans[i];
    const auto& asset = assets.at(s.episode_id);
    backend::BackendRequest req;
    req.op = Op::Transcribe;
    req.audio_path = asset.path;
    req.span = backend::TimeSpan{s.span.start_s, s.span.end_s};
    const auto text = sets[w][Op::Transcribe].call(req).transcription().transcript;
    auto& seg = result[i];
    seg.episode_id = s.episode_id;
    seg.span = s.span;
    seg.transcript = text;
    seg.category = asset.category;
    if (!text::split_whitespace(text).empty()) {
      req.op = Op::Align;
      req.transcript = text;
      seg.word_timings = sets[w][Op::Align].call(req).words();
    }
  });
  std::stable_sort(result.begin(), result.end(), segment_order);
  write_segments(out, result);
  return {result.size(), {}};
}

StageReport filter_stage(const fs::path& in, const fs::path& out, const fs::path& report_out,
                         const filter::FilterConfig& config) {
  auto result = filter::apply_filters(read_segments(in), config);
  write_segments(out, result.kept);
  filter::write_report(report_out, result.report);
  return {result.kept.size(), {}};
}

StageReport sample_stage(const fs::path& segments_path, const fs::path& out_dir, const SampleParams& params,
                         const std::vector<std::string>& categories) {
  const auto segments = read_segments(segments_path);
  const auto pool = corpus::build_stratified(segments, categories, params.hours_per_category, params.seed,
                                             params.effective_name());
  const auto carved = corpus::carve_splits(pool, params.test_s_per_category, params.val_s_per_category, params.seed);
  const auto subsets = corpus::nest_subsets(carved, params.subsets_h, params.seed);
  fs::create_directories(out_dir);
  corpus::write_manifest(out_dir / (carved.corpus_name + ".jsonl"), carved);
  std::string stats = corpus::format_stats(corpus::manifest_stats(carved));
  std::size_t records = 0;
  for (const auto& [name, refs] : carved.splits) records += refs.size();
  for (const auto& s : subsets) {
    corpus::write_manifest(out_dir / (s.corpus_name + ".jsonl"), s);
    stats += "\n" + s.corpus_name + " (parent " + s.parent_corpus.value_or("-") + ")\n";
    stats += corpus::format_stats(corpus::manifest_stats(s));
  }
  write_file_atomic(out_dir / "stats.txt", carved.corpus_name + "\n" + stats);
  return {records, {}};
}

StageReport evaluate_stage(const fs::path& manifest, const fs::path& out_dir, const EvaluateParams& params) {
  eval::EvaluateOptions opts;
  opts.profile = eval::profile_by_id(params.profile);
  opts.split = params.split;
  opts.curve_hours = params.curve_hours;
  opts.baseline_model = params.baseline_model;
  const auto hyps = params.hyps.empty() ? std::vector<eval::Hypothesis>{} : eval::read_hypotheses(params.hyps);
  auto result = eval::evaluate(manifest, hyps, opts);
  eval::write_outputs(out_dir, result);
  return {result.reports.size(), result.warnings};
}

std::vector<std::string> parse_stages(const std::string& text) {
  const auto items = split_list(text, ',');
  if (items.size() == 1 && items.front() == "all") return {std::begin(kStages), std::end(kStages)};
  if (items.empty()) raise(ErrorCode::ConfigInvalid, "no stages given");
  std::vector<std::string> out;
  for (auto s : kStages)
    if (std::ranges::find(items, s) != items.end()) out.emplace_back(s);
  for (const auto& i : items)
    if (std::ranges::find(kStages, i) == std::end(kStages)) raise(ErrorCode::ConfigInvalid, "unknown stage '" + i + "'");
  return out;
}

namespace {

std::string digest_paths(const std::vector<fs::path>& paths, const fs::path& root) {
  Sha256 h;
  for (const auto& p : paths) {
    h.update(p.lexically_proximate(root).string()).update(std::string_view("\n", 1));
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(p))
        if (e.is_regular_file()) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) h.update(f.lexically_proximate(root).string() + "=" + sha256_file_hex(f) + "\n");
    } else if (fs::exists(p)) {
      h.update(sha256_file_hex(p) + "\n");
    } else {
      h.update(std::string_view("<missing>\n"));
    }
  }
  const auto d = h.finish();
  return to_hex(d);
}

struct StageDef {
  std::string name;
  std::vector<fs::path> inputs;
  std::vector<std::string> settings;
  std::vector<fs::path> outputs;
  std::vector<fs::path> cleared;  // stage-owned directories emptied before a run
  std::function<StageReport()> run;
};

std::vector<StageDef> define(const PipelineConfig& c) {
  const auto ws = c.workspace;
  const auto audio = ws / "audio";
  const auto manifest = ws / "corpus" / (c.sample.effective_name() + ".jsonl");
  auto policy = c.crawl;
  policy.categories = c.categories;
  std::vector<fs::path> eval_inputs{manifest};
  if (!c.evaluate.hyps.empty()) eval_inputs.push_back(c.evaluate.hyps);
  return {
      {"crawl", {c.feed_list}, {"workspace.categories", "crawl"}, {ws / "catalog.jsonl"}, {},
       [=] { return crawl_stage(c.feed_list, ws / "catalog.jsonl", policy); }},
      {"fetch", {ws / "catalog.jsonl"}, {"fetch"}, {audio / "assets.jsonl", audio / "wav"}, {},
       [=, &c] { return fetch_stage(ws / "catalog.jsonl", audio, c.fetch); }},
      {"segment", {audio / "assets.jsonl"}, {"segment", "backend"}, {ws / "vad", ws / "spans.jsonl"}, {ws / "vad"},
       [=, &c] {
         vad_stage(audio, ws / "vad", c.backend);
         return segment_stage(ws / "vad", ws / "spans.jsonl", c.segmenter);
       }},
      {"transcribe", {audio / "assets.jsonl", ws / "spans.jsonl"}, {"backend"}, {ws / "segments.jsonl"}, {},
       [=, &c] { return transcribe_stage(audio, ws / "spans.jsonl", c.backend, ws / "segments.jsonl"); }},
      {"filter", {ws / "segments.jsonl"}, {"filter"}, {ws / "filtered.jsonl", ws / "filter_report.json"}, {},
       [=, &c] { return filter_stage(ws / "segments.jsonl", ws / "filtered.jsonl", ws / "filter_report.json", c.filter); }},
      {"sample", {ws / "filtered.jsonl"}, {"workspace.categories", "sample"}, {ws / "corpus"}, {ws / "corpus"},
       [=, &c] { return sample_stage(ws / "filtered.jsonl", ws / "corpus", c.sample, c.categories); }},
      {"evaluate", eval_inputs, {"evaluate"}, {ws / "eval"}, {ws / "eval"},
       [=, &c] { return evaluate_stage(manifest, ws / "eval", c.evaluate); }},
  };
}

void check_config(const PipelineConfig& c, const std::vector<std::string>& stages) {
  auto has = [&](std::string_view s) { return std::ranges::find(stages, s) != stages.end(); };
  if (c.workspace.empty()) raise(ErrorCode::ConfigInvalid, "workspace.path: empty");
  if (has("crawl") && c.feed_list.empty()) raise(ErrorCode::ConfigInvalid, "crawl.feeds: required by the crawl stage");
  if (has("segment") && c.backend.for_op(Op::Vad).empty())
    raise(ErrorCode::ConfigInvalid, "backend.command: required by the segment stage");
  if (has("transcribe") && (c.backend.for_op(Op::Transcribe).empty() || c.backend.for_op(Op::Align).empty()))
    raise(ErrorCode::ConfigInvalid, "backend.command: required by the transcribe stage");
}

}  // namespace

RunSummary run_pipeline(const PipelineConfig& config, const std::vector<std::string>& stages) {
  check_config(config, stages);
  const auto& ws = config.workspace;
  const auto markers = ws / ".stages";
  fs::create_directories(markers);
  RunSummary summary;
  const auto run_start = std::chrono::steady_clock::now();

  for (auto& def : define(config)) {
    if (std::ranges::find(stages, def.name) == stages.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    StageSummary s{def.name};
    for (const auto& in : def.inputs)
      if (!fs::exists(in))
        raise(ErrorCode::StageFailed, "stage '" + def.name + "': missing input " + in.string());
    const auto input_digest = sha256_hex(config.settings_text(def.settings) + digest_paths(def.inputs, ws));
    const auto marker = markers / (def.name + ".done");

    bool skip = false;
    if (fs::exists(marker)) {
      try {
        const auto j = jsonl::read(marker).at(0);
        skip = j.at("input_digest") == input_digest && j.at("output_digest") == digest_paths(def.outputs, ws);
        if (skip) s.records = j.value("records", std::size_t{0});
      } catch (const std::exception&) {
        skip = false;
      }
    }
    if (!skip) {
      fs::remove(marker);
      try {
        for (const auto& d : def.cleared) fs::remove_all(d);
        const auto report = def.run();
        s.records = report.records;
      } catch (const Error& e) {
        raise(ErrorCode::StageFailed, "stage '" + def.name + "': " + e.what());
      } catch (const std::exception& e) {
        raise(ErrorCode::StageFailed, "stage '" + def.name + "': " + e.what());
      }
      Json j;
      j["stage"] = def.name;
      j["input_digest"] = input_digest;
      j["output_digest"] = digest_paths(def.outputs, ws);
      j["records"] = s.records;
      jsonl::write(marker, {j});
    }
    s.skipped = skip;
    s.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    summary.stages.push_back(s);
  }
  summary.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start).count();

  Json j;
  Json arr = Json::array();
  for (const auto& s : summary.stages)
    arr.push_back(Json{{"stage", s.stage}, {"status", s.skipped ? "skipped" : "completed"}, {"duration_s", s.duration_s},
                       {"records", s.records}});
  j["stages"] = std::move(arr);
  j["duration_s"] = summary.duration_s;
  write_file_atomic(ws / "run_summary.json", j.dump(2) + "\n");
  return summary;
}

}  // namespace corpusforge::pipeline
