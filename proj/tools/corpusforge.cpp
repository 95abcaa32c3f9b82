#include <CLI11.hpp>

#include <iostream>
#include <set>

#include "corpusforge/config.hpp"
#include "corpusforge/corpus.hpp"
#include "corpusforge/error.hpp"
#include "corpusforge/feeds.hpp"
#include "corpusforge/pipeline.hpp"
#include "corpusforge/records.hpp"

namespace fs = std::filesystem;
using namespace corpusforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

void print_notes(const pipeline::StageReport& r, std::string_view what) {
  for (const auto& n : r.notes) std::cerr << "warning: " << n << '\n';
  std::cout << r.records << ' ' << what << '\n';
}

std::map<std::string, double> parse_curve(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.rfind('=');
    if (eq == std::string::npos) raise(ErrorCode::ConfigInvalid, "--curve-hours expects label=hours, got '" + item + "'");
    try {
      out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      raise(ErrorCode::ConfigInvalid, "--curve-hours: bad hours in '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpusforge: podcast feeds to a stratified pseudo-labelled ASR corpus"};
  app.require_subcommand(1);

  // crawl
  auto* crawl = app.add_subcommand("crawl", "Crawl feeds into an episode catalog");
  fs::path feeds_file, catalog_out;
  feeds::CrawlPolicy policy;
  long delay_ms = 1000;
  std::string categories_text;
  crawl->add_option("--feeds", feeds_file, "Feed list: <url> TAB <category> [TAB <language>]")->required();
  crawl->add_option("--out", catalog_out, "Catalog file")->required();
  crawl->add_option("--max-inflight", policy.max_inflight);
  crawl->add_option("--per-host-delay-ms", delay_ms);
  crawl->add_option("--max-retries", policy.max_retries);
  crawl->add_option("--categories", categories_text, "Comma-separated category set");

  // fetch
  auto* fetch = app.add_subcommand("fetch", "Download and normalize episode audio");
  fs::path catalog_in, fetch_out;
  FetchParams fetch_params;
  std::optional<double> cap_hours;
  fetch->add_option("--catalog", catalog_in)->required();
  fetch->add_option("--out", fetch_out, "Asset directory (raw/, wav/, assets.jsonl)")->required();
  fetch->add_option("--cap-hours-per-category", cap_hours);
  fetch->add_option("--workers", fetch_params.workers);
  fetch->add_option("--decoder", fetch_params.decoder_program, "External converter for non-WAV media");

  // vad
  auto* vad = app.add_subcommand("vad", "Score assets with a backend's VAD into trace files");
  fs::path vad_assets, vad_out;
  BackendParams vad_backend;
  vad->add_option("--assets", vad_assets)->required();
  vad->add_option("--backend-cmd", vad_backend.command, "\"mock:<seed>\" or a shell command")->required();
  vad->add_option("--out", vad_out, "Trace directory")->required();
  vad->add_option("--workers", vad_backend.workers);

  // segment
  auto* seg = app.add_subcommand("segment", "Cut and merge VAD traces into spans");
  fs::path traces_dir, spans_out;
  segment::SegmenterConfig seg_cfg;
  seg->add_option("--traces", traces_dir)->required();
  seg->add_option("--out", spans_out)->required();
  seg->add_option("--t0", seg_cfg.t0_s);
  seg->add_option("--onset", seg_cfg.onset_threshold);
  seg->add_option("--offset", seg_cfg.offset_threshold);
  seg->add_option("--min-region", seg_cfg.min_region_s);
  seg->add_option("--merge-gap", seg_cfg.max_merge_gap_s);
  seg->add_option("--min-cut-piece", seg_cfg.min_cut_piece_s);

  // transcribe
  auto* tr = app.add_subcommand("transcribe", "Transcribe and align spans through a backend");
  fs::path tr_assets, tr_spans, tr_out;
  BackendParams tr_backend;
  long timeout_ms = 120000;
  tr->add_option("--assets", tr_assets)->required();
  tr->add_option("--spans", tr_spans)->required();
  tr->add_option("--backend-cmd", tr_backend.command)->required();
  tr->add_option("--align-cmd", tr_backend.align_command, "Separate aligner backend");
  tr->add_option("--out", tr_out)->required();
  tr->add_option("--workers", tr_backend.workers);
  tr->add_option("--timeout-ms", timeout_ms);

  // filter
  auto* flt = app.add_subcommand("filter", "Drop hallucinated and code-switched segments");
  fs::path flt_in, flt_out, flt_report;
  std::vector<std::string> patterns;
  filter::FilterConfig flt_cfg;
  flt->add_option("--in", flt_in)->required();
  flt->add_option("--out", flt_out)->required();
  flt->add_option("--report", flt_report)->required();
  flt->add_option("--pattern", patterns, "Hallucination literal (repeatable)");
  flt->add_option("--latin-run-min-chars", flt_cfg.codeswitch.latin_run_min_chars);
  flt->add_option("--boundary-window-words", flt_cfg.codeswitch.boundary_window_words);

  // sample
  auto* smp = app.add_subcommand("sample", "Build stratified splits and nested subsets");
  fs::path smp_in, smp_out;
  SampleParams sp;
  std::string subsets_text = "20,10,5,2", smp_categories;
  smp->add_option("--in", smp_in)->required();
  smp->add_option("--hours-per-cat", sp.hours_per_category);
  smp->add_option("--test-s", sp.test_s_per_category);
  smp->add_option("--val-s", sp.val_s_per_category);
  smp->add_option("--subsets", subsets_text);
  smp->add_option("--seed", sp.seed);
  smp->add_option("--name", sp.corpus_name);
  smp->add_option("--categories", smp_categories, "Default: every category present in the input");
  smp->add_option("--out", smp_out)->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score hypotheses against a manifest split");
  fs::path ev_manifest, ev_out;
  EvaluateParams ep;
  std::vector<std::string> curve;
  std::string baseline;
  ev->add_option("--manifest", ev_manifest)->required();
  ev->add_option("--hyps", ep.hyps, "Hypothesis records; omit to score references against themselves");
  ev->add_option("--profile", ep.profile);
  ev->add_option("--split", ep.split);
  ev->add_option("--curve-hours", curve, "<finetune label>=<train hours> (repeatable)");
  ev->add_option("--baseline-model", baseline);
  ev->add_option("--out", ev_out)->required();

  // run
  auto* run = app.add_subcommand("run", "Run pipeline stages from a config file");
  fs::path config_path;
  std::string stages_text = "all";
  run->add_option("--config", config_path)->required();
  run->add_option("--stages", stages_text, "Comma-separated subset of crawl,fetch,segment,transcribe,filter,sample,evaluate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*crawl) {
      policy.per_host_delay = std::chrono::milliseconds(delay_ms);
      if (!categories_text.empty()) policy.categories = split_list(categories_text, ',');
      const auto r = pipeline::crawl_stage(feeds_file, catalog_out, policy);
      print_notes(r, "episodes");
      std::cout << feeds::format_catalog_table(feeds::catalog_stats(feeds::read_catalog(catalog_out)));
    } else if (*fetch) {
      fetch_params.cap_hours_per_category = cap_hours;
      print_notes(pipeline::fetch_stage(catalog_in, fetch_out, fetch_params), "assets");
    } else if (*vad) {
      print_notes(pipeline::vad_stage(vad_assets, vad_out, vad_backend), "traces");
    } else if (*seg) {
      print_notes(pipeline::segment_stage(traces_dir, spans_out, seg_cfg), "spans");
    } else if (*tr) {
      tr_backend.options.call_timeout = std::chrono::milliseconds(timeout_ms);
      print_notes(pipeline::transcribe_stage(tr_assets, tr_spans, tr_backend, tr_out), "segments");
    } else if (*flt) {
      if (!patterns.empty()) flt_cfg.hallucination_patterns = patterns;
      print_notes(pipeline::filter_stage(flt_in, flt_out, flt_report, flt_cfg), "segments kept");
    } else if (*smp) {
      sp.subsets_h.clear();
      for (const auto& s : split_list(subsets_text, ',')) {
        try {
          sp.subsets_h.push_back(std::stod(s));
        } catch (const std::exception&) {
          raise(ErrorCode::ConfigInvalid, "--subsets: bad budget '" + s + "'");
        }
      }
      std::vector<std::string> cats = split_list(smp_categories, ',');
      if (cats.empty()) {
        std::set<std::string> present;
        for (const auto& s : read_segments(smp_in)) present.insert(s.category);
        cats.assign(present.begin(), present.end());
      }
      print_notes(pipeline::sample_stage(smp_in, smp_out, sp, cats), "segments sampled");
    } else if (*ev) {
      ep.curve_hours = parse_curve(curve);
      if (!baseline.empty()) ep.baseline_model = baseline;
      print_notes(pipeline::evaluate_stage(ev_manifest, ev_out, ep), "report rows");
    } else if (*run) {
      const auto config = load_config(config_path);
      const auto stages = pipeline::parse_stages(stages_text);
      const auto summary = pipeline::run_pipeline(config, stages);
      for (const auto& s : summary.stages)
        std::cout << s.stage << '\t' << (s.skipped ? "skipped" : "completed") << '\t' << s.records << '\t'
                  << s.duration_s << "s\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigInvalid ? kExitConfig : kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStage;
  }
  return kExitOk;
}
