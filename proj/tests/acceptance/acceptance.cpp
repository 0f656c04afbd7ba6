// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every tolerance and time budget is pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "conflens_cli.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"
#include "tempdir.hpp"

using namespace conflens;

namespace {

constexpr double oracle_tolerance = 1e-9;
constexpr double worked_tolerance = 1e-6;
constexpr double normalization_tolerance = 1e-9;
constexpr double rounding_half_unit = 5e-6;
constexpr double oracle_budget_seconds = 10.0;
constexpr double pq2_budget_seconds = 30.0;
constexpr int normalization_samples = 1000;
constexpr int reconstruction_samples = 1000;

using Tokens = std::vector<std::string>;

// Collects the first few failure messages of a criterion.
struct Check {
  int failures = 0;
  std::string first;

  void expect(bool ok, const std::string &what) {
    if (ok)
      return;
    if (failures++ == 0)
      first = what;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Tokens> random_corpus(std::mt19937 &rng, unsigned vocab, unsigned streams,
                                  unsigned max_len) {
  std::vector<Tokens> out(1 + rng() % streams);
  for (auto &s : out) {
    const auto len = rng() % (max_len + 1);
    for (unsigned i = 0; i < len; ++i)
      s.push_back(std::string(1, static_cast<char>('a' + rng() % vocab)));
  }
  return out;
}

const TrainOptions closed{1};

// 1. Cross-entropy agrees with the brute-force scorer.
Check oracle_equivalence() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(2024);
  for (int corpus_no = 0; corpus_no < 100; ++corpus_no) {
    const auto corpus = random_corpus(rng, 5, 10, 30);
    const auto probe = random_corpus(rng, 5, 1, 30)[0];
    for (int n = 1; n <= 4; ++n) {
      const auto counts = count_ngrams(corpus, n);
      if (counts.vocabulary().empty())
        continue;
      const oracle::Corpus oc{corpus, n};
      const auto mle = train(counts, Smoothing::mle(), closed);
      for (const auto &s : corpus) {
        const double want = oracle::cross_entropy(
            oc, s, [&](const auto &ctx, const auto &w) { return oracle::p_mle(oc, ctx, w); });
        const double got = cross_entropy(mle, s).bits_per_token;
        c.expect(std::fabs(got - want) <= oracle_tolerance,
                 "mle corpus " + std::to_string(corpus_no) + " order " + std::to_string(n) +
                     ": " + fmt(got) + " vs " + fmt(want));
      }
      Tokens known;
      for (const auto &t : probe)
        if (counts.vocabulary().count(t))
          known.push_back(t);
      for (double delta : {0.1, 1.0}) {
        const auto m = train(counts, Smoothing::additive(delta), closed);
        for (const Tokens *s : {static_cast<const Tokens *>(&known), &corpus.front()}) {
          const double want = oracle::cross_entropy(oc, *s, [&](const auto &ctx, const auto &w) {
            return oracle::p_additive(oc, ctx, w, delta);
          });
          const double got = cross_entropy(m, *s).bits_per_token;
          c.expect(std::fabs(got - want) <= oracle_tolerance,
                   "additive " + fmt(delta) + " corpus " + std::to_string(corpus_no) +
                       " order " + std::to_string(n) + ": " + fmt(got) + " vs " + fmt(want));
        }
      }
    }
  }
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < oracle_budget_seconds, "took " + fmt(elapsed) + " s");
  return c;
}

// 2. Hand-computed values.
Check worked_examples() {
  Check c;
  const auto m = train(count_ngrams({{"a", "b", "a", "a"}}, 2), Smoothing::mle(), closed);
  const double p = probability(m, {"a"}, "b");
  c.expect(std::fabs(p - 1.0 / 3.0) <= worked_tolerance, "P(b|a) = " + fmt(p));
  const double h = cross_entropy(m, Tokens{"a", "b", "a", "a"}).bits_per_token;
  c.expect(std::fabs(h - 0.950977) <= worked_tolerance, "H = " + fmt(h));
  const auto kw = kruskal_wallis({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  c.expect(std::fabs(kw.h - 7.2) <= worked_tolerance, "Kruskal-Wallis H = " + fmt(kw.h));
  // With two degrees of freedom the chi-square tail is exp(-H/2). The
  // published 0.02732 is that value rounded to four significant figures.
  c.expect(std::fabs(kw.p_value - std::exp(-3.6)) <= worked_tolerance,
           "Kruskal-Wallis p = " + fmt(kw.p_value));
  c.expect(std::fabs(kw.p_value - 0.02732) <= rounding_half_unit,
           "Kruskal-Wallis p = " + fmt(kw.p_value) + " does not round to 0.02732");
  return c;
}

// 3. Smoothed conditionals sum to one, including backed-off contexts.
Check normalization() {
  Check c;
  std::mt19937 rng(77);
  const Smoothing smoothings[] = {Smoothing::additive(0.1), Smoothing::additive(1.0),
                                  Smoothing::modified_kneser_ney()};
  int sampled = 0, backed_off = 0;
  while (sampled < normalization_samples) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const auto counts = count_ngrams(random_corpus(rng, 5, 10, 30), n);
    if (counts.vocabulary().empty())
      continue;
    const auto &sm = smoothings[rng() % 3];
    const auto m = train(counts, sm, rng() % 2 ? TrainOptions{1} : TrainOptions{2});
    const auto observed = m.observed_contexts();
    for (int k = 0; k < 10 && sampled < normalization_samples; ++k) {
      NGram ctx;
      if (k % 2 == 0 && !observed.empty()) {
        ctx = observed[rng() % observed.size()];
      } else {
        // Random context over the vocabulary and start marker; most of these
        // were never observed at full length and must back off.
        static const char *alphabet[] = {"a", "b", "c", "d", "e", "<s>", "zz"};
        for (int j = 0; j < n - 1; ++j)
          ctx.push_back(alphabet[rng() % 7]);
        if (std::find(observed.begin(), observed.end(), ctx) == observed.end())
          ++backed_off;
      }
      double sum = 0;
      for (const auto &t : m.support())
        sum += m.probability(ctx, t);
      c.expect(std::fabs(sum - 1.0) <= normalization_tolerance,
               sm.to_string() + " order " + std::to_string(n) + " sum " + fmt(sum));
      ++sampled;
    }
  }
  c.expect(backed_off > 100, "only " + std::to_string(backed_off) + " backed-off contexts");
  return c;
}

// 4. Version reconstruction and archive round trip.
Check reconstruction() {
  Check c;
  std::mt19937 rng(4);
  for (int i = 0; i < reconstruction_samples; ++i) {
    const auto d = fixtures::random_diff(rng, "f" + std::to_string(i) + ".py");
    const auto [pre, post] = reconstruct_versions(d);
    std::vector<std::string> want_pre, want_post;
    for (const auto &l : d.lines) {
      if (l.op == LineOp::unchanged || l.op == LineOp::removed)
        want_pre.push_back(l.text);
      if (l.op == LineOp::unchanged || l.op == LineOp::added)
        want_post.push_back(l.text);
    }
    c.expect(pre.lines == want_pre && post.lines == want_post,
             "diff " + std::to_string(i) + " reconstructs wrongly");
  }
  std::vector<ReviewRecord> records;
  for (int i = 0; i < 200; ++i)
    records.push_back(fixtures::random_record(rng, i));
  const auto text = serialize_review_archive(records);
  const auto once = parse_review_archive(text, MalformedPolicy::fail_fast);
  const auto twice =
      parse_review_archive(serialize_review_archive(once.records), MalformedPolicy::fail_fast);
  c.expect(once.records == records, "parse(serialize(records)) differs");
  c.expect(twice.records == once.records, "parse-serialize-parse is not identity");
  return c;
}

ExperimentConfig full_sweep() {
  ExperimentConfig cfg;
  cfg.min_order = 3;
  cfg.max_order = 9;
  return cfg;
}

// 5. Grammar-generated code is more predictable than random prose, and
// becomes more predictable with longer contexts.
Check pq2_property() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto curve = entropy_by_kind(fixtures::pq2_records(), full_sweep());
  double prev = INFINITY;
  for (int n = 3; n <= 9; ++n) {
    const auto *prog = curve.find("programming", "", n);
    const auto *doc = curve.find("documentation", "", n);
    if (!prog || !doc) {
      c.expect(false, "missing cell at order " + std::to_string(n));
      continue;
    }
    c.expect(prog->bits_per_token < doc->bits_per_token,
             "order " + std::to_string(n) + ": programming " + fmt(prog->bits_per_token) +
                 " >= documentation " + fmt(doc->bits_per_token));
    c.expect(prog->bits_per_token <= prev, "programming entropy rises at order " +
                                               std::to_string(n) + ": " +
                                               fmt(prog->bits_per_token));
    prev = prog->bits_per_token;
  }
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < pq2_budget_seconds, "took " + fmt(elapsed) + " s");
  return c;
}

double group_mean(const EntropyCurve &curve, const std::string &group, int order) {
  double sum = 0;
  int k = 0;
  for (const auto &cell : curve.cells)
    if (cell.group == group && cell.order == order) {
      sum += cell.bits_per_token;
      ++k;
    }
  return k ? sum / k : NAN;
}

// 6. Reviewed code moves toward the project's idioms; accepted patches
// conform more than abandoned ones. Scoring runs the leakage guard on every
// model it builds, so a leak surfaces as an exception.
Check rq_properties() {
  Check c;
  try {
    const auto cfg = full_sweep();
    const auto rq1 = pre_vs_post_entropy(fixtures::rq1_records(), cfg);
    const auto rq2 = accepted_vs_abandoned(fixtures::rq2_records(), cfg);
    for (int n = 3; n <= 9; ++n) {
      const double pre = group_mean(rq1, "pre", n), post = group_mean(rq1, "post", n);
      c.expect(post < pre, "rq1 order " + std::to_string(n) + ": post " + fmt(post) +
                               " >= pre " + fmt(pre));
      const double acc = group_mean(rq2, "accepted", n), ab = group_mean(rq2, "abandoned", n);
      c.expect(acc < ab, "rq2 order " + std::to_string(n) + ": accepted " + fmt(acc) +
                             " >= abandoned " + fmt(ab));
    }
  } catch (const LeakageError &e) {
    c.expect(false, std::string("leakage: ") + e.what());
  }
  // The guard itself must fire when a review is in its own training data.
  const auto reviews = lex_reviews(fixtures::rq1_records(), full_sweep());
  NGramCounts leaked(3);
  for (const auto &r : reviews)
    for (const auto &s : r.post)
      leaked.add_stream(s.texts(), r.source_tag());
  bool fired = false;
  try {
    check_no_leakage(leaked, reviews[0]);
  } catch (const LeakageError &) {
    fired = true;
  }
  c.expect(fired, "leakage guard did not fire on a leaked corpus");
  return c;
}

Language language_named(const std::string &s) {
  if (s == "python")
    return Language::python;
  if (s == "javascript")
    return Language::javascript;
  if (s == "shell")
    return Language::shell;
  return Language::generic;
}

// 7. The shipped token-set files drive the classifications.
Check lexer_conformance() {
  Check c;
  const std::string data = CONFLENS_DATA_DIR;
  const auto py = load_token_sets(data + "/tokens/python.tokens");
  const auto js = load_token_sets(data + "/tokens/javascript.tokens");
  const auto sh = load_token_sets(data + "/tokens/shell.tokens");
  auto cls_of = [](const std::string &src, Language lang, const TokenSets &sets) {
    const auto toks = tokenize(src, lang, sets);
    return toks.size() == 1 ? toks[0].cls : TokenClass::other;
  };
  c.expect(cls_of(".", Language::python, py) == TokenClass::separator, "'.' in .py");
  c.expect(cls_of("=", Language::python, py) == TokenClass::operator_, "'=' in .py");
  c.expect(cls_of("def", Language::python, py) == TokenClass::keyword, "'def' in .py");
  c.expect(cls_of("/", Language::shell, sh) == TokenClass::operator_, "'/' in .sh");
  c.expect(cls_of("=", Language::shell, sh) == TokenClass::operator_, "'=' in .sh");
  c.expect(sh.separators.empty(), "shell separator class not empty");

  std::ifstream in(data + "/fixtures/lexer_golden.json");
  const auto golden = nlohmann::json::parse(in);
  c.expect(golden.size() == 50, "golden corpus has " + std::to_string(golden.size()));
  for (const auto &e : golden) {
    const auto lang = language_named(e["language"]);
    const auto &sets = lang == Language::python ? py : lang == Language::shell ? sh : js;
    const auto src = e["source"].get<std::string>();
    try {
      const auto toks = lang == Language::generic ? tokenize(src, lang) : tokenize(src, lang, sets);
      bool same = toks.size() == e["tokens"].size();
      for (std::size_t i = 0; same && i < toks.size(); ++i)
        same = toks[i].text == e["tokens"][i][0].get<std::string>() &&
               to_string(toks[i].cls) == e["tokens"][i][1].get<std::string>();
      c.expect(same, "golden mismatch: " + src);
      const auto once = strip_comments(src, lang);
      c.expect(once == e["stripped"].get<std::string>(), "strip mismatch: " + src);
      c.expect(strip_comments(once, lang) == once, "strip not idempotent: " + src);
    } catch (const LexError &err) {
      c.expect(false, "lex error on golden snippet: " + src + ": " + err.what());
    }
  }
  return c;
}

// 8. Two identical experiment runs give identical bytes.
Check determinism() {
  Check c;
  testing_support::TempDir cache, a, b;
  setenv("CONFLENS_CACHE", cache.path().c_str(), 1);
  const std::string archive = std::string(CONFLENS_DATA_DIR) + "/fixtures/rq1.jsonl";
  auto run_into = [&](const testing_support::TempDir &dir) {
    std::ostringstream out, err;
    const int code = cli::run({"conflens", "experiment", archive, "rq1", "--format", "both",
                               "--no-cache", "--out-dir", dir.path().string()},
                              out, err);
    c.expect(code == cli::exit_ok, "exit " + std::to_string(code) + ": " + err.str());
  };
  run_into(a);
  run_into(b);
  auto output = [](const testing_support::TempDir &dir, const std::string &suffix) {
    for (const auto &e : std::filesystem::directory_iterator(dir.path())) {
      const auto name = e.path().filename().string();
      if (name.find(".manifest") == std::string::npos && name.size() > suffix.size() &&
          name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
        return testing_support::slurp(e.path());
    }
    return std::string{};
  };
  for (const std::string suffix : {".csv", ".json"}) {
    const auto x = output(a, suffix), y = output(b, suffix);
    c.expect(!x.empty(), "no " + suffix + " written");
    c.expect(x == y, suffix + " differs between runs");
  }
  unsetenv("CONFLENS_CACHE");
  return c;
}

} // namespace

int main() {
  const std::pair<const char *, std::function<Check()>> criteria[] = {
      {"entropy oracle equivalence", oracle_equivalence},
      {"worked numeric checks", worked_examples},
      {"normalization", normalization},
      {"reconstruction and archive round trip", reconstruction},
      {"grammar code vs random text (pq2)", pq2_property},
      {"pre/post and accepted/abandoned (rq1, rq2) with leakage guard", rq_properties},
      {"lexer conformance", lexer_conformance},
      {"experiment determinism", determinism},
  };
  int failed = 0, index = 0;
  for (const auto &[name, fn] : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = fn();
    } catch (const std::exception &e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", seconds_since(t0));
    std::cout << (c.failures ? "FAIL" : "PASS") << " criterion " << index << ": " << name
              << " (" << timing << ")";
    if (c.failures)
      std::cout << " - " << c.failures << " failure(s), first: " << c.first;
    std::cout << std::endl;
    failed += c.failures ? 1 : 0;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << (8 - failed) << "/8" << std::endl;
  return failed ? 1 : 0;
}
