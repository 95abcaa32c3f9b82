#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "corpusforge/corpus.hpp"
#include "corpusforge/error.hpp"
#include "corpusforge/eval.hpp"
#include "edit_distance.hpp"
#include "temp_dir.hpp"

using namespace corpusforge;
using namespace corpusforge::eval;

namespace {

NormalizedText toks(std::vector<std::string> t) { return {std::move(t)}; }

std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t max_len) {
  static const char* vocab[] = {"α", "β", "γ", "δ", "ε"};
  std::uniform_int_distribution<std::size_t> len(0, max_len), pick(0, 4);
  std::vector<std::string> out(len(rng));
  for (auto& t : out) t = vocab[pick(rng)];
  return out;
}

corpus::SegmentRef ref(std::string ep, double a, std::string text, std::string cat) {
  TranscribedSegment s;
  s.episode_id = std::move(ep);
  s.span = {a, a + 5.0, segment::Provenance::Passthrough};
  s.transcript = std::move(text);
  s.category = std::move(cat);
  return corpus::to_ref(s);
}

std::filesystem::path write_test_manifest(const cftest::TempDir& dir) {
  corpus::CorpusManifest m;
  m.corpus_name = "GPC-50";
  m.splits["test"] = {ref("e1", 0, "Καλημέρα, κόσμε!", "News"), ref("e1", 10, "ναι <cough> ναι", "News"),
                      ref("e2", 0, "ο αγώνας τελείωσε", "Sports")};
  m.splits["train"] = {ref("e3", 0, "άλλο", "News")};
  m.recompute();
  const auto path = dir / "m.jsonl";
  corpus::write_manifest(path, m);
  return path;
}

}  // namespace

TEST(Normalize, GreekGreeting) {
  EXPECT_EQ(normalize("Καλημέρα, κόσμε!").tokens, (std::vector<std::string>{"καλημερα", "κοσμε"}));
}

TEST(Normalize, EmptyAndPunctuationOnly) {
  EXPECT_TRUE(normalize("").tokens.empty());
  EXPECT_TRUE(normalize(" ,.;!? «» ").tokens.empty());
}

TEST(Normalize, FinalSigmaDiaeresisAndDigits) {
  EXPECT_EQ(normalize("ΟΔΟΣ Ϊ ΐ 2023").tokens, (std::vector<std::string>{"οδοσ", "ι", "ι", "2023"}));
  EXPECT_EQ(normalize("λόγος-λόγοι").tokens, (std::vector<std::string>{"λογοσ", "λογοι"}));
}

TEST(Normalize, DecomposedInputMatchesComposed) {
  EXPECT_EQ(normalize("κο\xCC\x81σμε"), normalize("κόσμε"));
}

TEST(Normalize, IdempotentOnRandomStrings) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> pieces = {"Α", "ά", "ς", "Σ", " ", ",", "!", "x", "Ö", "9", "\xCC\x81", "ϊ", "\xE2\x80\x94", "\t"};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1), len(0, 20);
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (std::size_t k = len(rng); k > 0; --k) s += pieces[pick(rng)];
    const auto once = normalize(s);
    EXPECT_EQ(normalize(once.joined()), once) << s;
    for (const auto& t : once.tokens) EXPECT_FALSE(t.empty());
  }
}

TEST(Normalize, UnknownProfileIsConfigInvalid) {
  EXPECT_EQ(profile_by_id("greek-basic-v1").id, "greek-basic-v1");
  try {
    profile_by_id("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
  }
}

TEST(Clean, RemovesEventMarkers) {
  EXPECT_EQ(clean_reference("ναι <cough> ναι"), "ναι  ναι");
  EXPECT_EQ(clean_reference("<laugh>αρχή"), "αρχή");
}

TEST(Clean, LeavesMalformedMarkers) {
  EXPECT_EQ(clean_reference("a <b c"), "a <b c");
  EXPECT_EQ(clean_reference("καμία σήμανση"), "καμία σήμανση");
  EXPECT_EQ(clean_reference("a <b <c> d"), "a <b  d");
  EXPECT_EQ(clean_reference("ναι <cough> ναι", {false}), "ναι <cough> ναι");
}

TEST(Wer, Identical) {
  const auto b = wer(toks({"a", "b"}), toks({"a", "b"}));
  EXPECT_EQ(b.errors(), 0u);
  EXPECT_EQ(b.wer, 0.0);
}

TEST(Wer, WorkedExample) {
  const auto b = wer(toks({"a", "b", "c"}), toks({"a", "x", "c", "d"}));
  EXPECT_EQ(b.substitutions, 1u);
  EXPECT_EQ(b.insertions, 1u);
  EXPECT_EQ(b.deletions, 0u);
  EXPECT_EQ(b.reference_len, 3u);
  EXPECT_DOUBLE_EQ(b.wer, 2.0 / 3.0);
}

TEST(Wer, TieBreakPrefersSubstitution) {
  // "a" vs "b": one substitution, not one insertion plus one deletion.
  const auto b = wer(toks({"a"}), toks({"b"}));
  EXPECT_EQ(b.substitutions, 1u);
  EXPECT_EQ(b.insertions + b.deletions, 0u);
}

TEST(Wer, EmptyReference) {
  EXPECT_EQ(wer(toks({}), toks({})).wer, 0.0);
  const auto b = wer(toks({}), toks({"x"}));
  EXPECT_FALSE(b.defined());
  EXPECT_EQ(b.insertions, 1u);
  EXPECT_TRUE(wer(toks({"x"}), toks({})).defined());
}

TEST(Wer, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(20240101);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 1000; ++i) {
    const auto r = random_tokens(rng, 12), h = random_tokens(rng, 12);
    const auto b = wer(toks(r), toks(h));
    ASSERT_EQ(b.errors(), oracle::edit_distance(r, h)) << i;
    // The split must be a real alignment: I - D accounts for the length change, S + D fits the reference.
    EXPECT_EQ(static_cast<long>(b.insertions) - static_cast<long>(b.deletions),
              static_cast<long>(h.size()) - static_cast<long>(r.size()));
    EXPECT_LE(b.substitutions + b.deletions, r.size());
    if (!r.empty()) {
      EXPECT_LE(b.wer, static_cast<double>(r.size() + h.size()) / r.size());
    }
  }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 10.0);
}

TEST(Aggregate, PooledCounts) {
  WerBreakdown a, b;
  a.substitutions = 10, a.reference_len = 100, a.wer = 0.1;
  b.deletions = 30, b.reference_len = 100, b.wer = 0.3;
  const auto r = aggregate({{"News", a}, {"Sports", b}}, {"GPC-50", "whisper-small"});
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_DOUBLE_EQ(r.rows[0].wer_percent, 20.0);
  EXPECT_DOUBLE_EQ(r.per_domain.at("News"), 10.0);
  EXPECT_DOUBLE_EQ(r.per_domain.at("Sports"), 30.0);
  EXPECT_EQ(r.rows[0].finetune_corpus, "-");
}

TEST(Aggregate, PooledDiffersFromSegmentMean) {
  // 1/1 and 0/9: mean of segment WERs is 50 %, pooled is 10 %.
  const auto x = wer(toks({"a"}), toks({"b"}));
  const auto y = wer(toks({"a", "b", "c", "d", "e", "f", "g", "h", "i"}), toks({"a", "b", "c", "d", "e", "f", "g", "h", "i"}));
  const auto r = aggregate({{"News", x}, {"News", y}}, {"d", "m"});
  const double mean = 100.0 * (x.wer + y.wer) / 2.0;
  EXPECT_DOUBLE_EQ(mean, 50.0);
  EXPECT_DOUBLE_EQ(r.rows[0].wer_percent, 10.0);
}

TEST(Aggregate, UndefinedExcludedWithWarning) {
  const auto undefined = wer(toks({}), toks({"x"}));
  const auto ok = wer(toks({"a", "b"}), toks({"a", "c"}));
  const auto r = aggregate({{"News", undefined}, {"News", ok}}, {"d", "m"});
  EXPECT_EQ(r.undefined_excluded, 1u);
  EXPECT_EQ(r.segments, 2u);
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_DOUBLE_EQ(r.rows[0].wer_percent, 50.0);
}

TEST(Aggregate, AllPerfect) {
  const auto p = wer(toks({"a"}), toks({"a"}));
  const auto r = aggregate({{"A", p}, {"B", p}}, {"d", "m"});
  EXPECT_EQ(r.rows[0].wer_percent, 0.0);
  for (const auto& [cat, w] : r.per_domain) EXPECT_EQ(w, 0.0) << cat;
}

TEST(ScalingCurve, RequiresIncreasingHours) {
  EvalReport r;
  r.rows.push_back({"d", "m", "GPC-2", 30.0});
  EXPECT_EQ(scaling_curve({{2.0, r}, {5.0, r}}).size(), 2u);
  EXPECT_THROW(scaling_curve({{5.0, r}, {2.0, r}}), Error);
  EXPECT_THROW(scaling_curve({{5.0, r}, {5.0, r}}), Error);
  EXPECT_TRUE(scaling_curve({}).empty());
}

TEST(Evaluate, SelfEvaluationIsZero) {
  cftest::TempDir dir;
  const auto result = evaluate(write_test_manifest(dir), {}, {});
  ASSERT_EQ(result.reports.size(), 1u);
  const auto& r = result.reports[0];
  EXPECT_EQ(r.rows[0].dataset, "GPC-50");
  EXPECT_EQ(r.rows[0].wer_percent, 0.0);
  EXPECT_EQ(r.per_domain.size(), 2u);
  for (const auto& [cat, w] : r.per_domain) EXPECT_EQ(w, 0.0) << cat;
  EXPECT_EQ(r.segments, 3u);
}

TEST(Evaluate, HypothesesGroupedAndMissingCountAsEmpty) {
  cftest::TempDir dir;
  const auto manifest = write_test_manifest(dir);
  const std::vector<Hypothesis> hyps = {
      {"e1:0-5000", "καλημέρα κόσμε", "whisper-small", "-"},
      {"e1:10000-15000", "ναι ναι", "whisper-small", "-"},
      {"e2:0-5000", "ο αγώνας", "whisper-small", "-"},
      {"e1:0-5000", "καλημέρα", "whisper-small", "GPC-2"},
      {"nowhere:0-1", "x", "whisper-small", "GPC-2"},
  };
  EvaluateOptions opt;
  opt.curve_hours = {{"GPC-2", 32.0}};
  opt.baseline_model = "whisper-small";
  const auto result = evaluate(manifest, hyps, opt);
  ASSERT_EQ(result.reports.size(), 2u);
  // 1 deletion over 2 + 2 + 3 reference words.
  EXPECT_NEAR(result.reports[0].rows[0].wer_percent, 100.0 / 7.0, 1e-9);
  EXPECT_DOUBLE_EQ(result.reports[0].per_domain.at("News"), 0.0);
  // GPC-2: 1 deletion, then two empty hypotheses: 1 + 2 + 3 = 6 errors over 7.
  EXPECT_NEAR(result.reports[1].rows[0].wer_percent, 600.0 / 7.0, 1e-9);
  ASSERT_EQ(result.curve.size(), 1u);
  EXPECT_EQ(result.curve[0].train_hours, 32.0);
  ASSERT_TRUE(result.baseline.has_value());
  EXPECT_NEAR(result.baseline->wer_percent, 100.0 / 7.0, 1e-9);
  bool outside = false, missing = false;
  for (const auto& w : result.warnings) {
    outside |= w.find("outside the split") != std::string::npos;
    missing |= w.find("scored as empty") != std::string::npos;
  }
  EXPECT_TRUE(outside);
  EXPECT_TRUE(missing);
}

TEST(Evaluate, UnknownSplitIsPrecondition) {
  cftest::TempDir dir;
  EvaluateOptions opt;
  opt.split = "dev";
  EXPECT_THROW(evaluate(write_test_manifest(dir), {}, opt), Error);
}

TEST(Evaluate, ReadsHypothesisRecords) {
  cftest::TempDir dir;
  {
    std::ofstream out(dir / "h.jsonl");
    out << R"({"segment_ref": "e1:0-5000", "hypothesis": "γεια", "model": "m", "finetune": "GPC-5"})" << '\n'
        << R"({"segment_ref": "e1:0-5000", "hypothesis": "γεια", "model": "m", "finetune": null})" << '\n';
  }
  const auto h = read_hypotheses(dir / "h.jsonl");
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[0].finetune_corpus, "GPC-5");
  EXPECT_EQ(h[1].finetune_corpus, "-");
}
