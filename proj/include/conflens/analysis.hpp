#ifndef CONFLENS_ANALYSIS_HPP_
#define CONFLENS_ANALYSIS_HPP_

// Review-level experiments: churn by file kind, entropy curves by kind,
// pre- vs post-review entropy, accepted vs abandoned entropy, syntax class
// proportions and top changed syntax tokens.
//
// Conformance is always measured against models trained on the final
// post-review versions of accepted reviews. The review being scored never
// contributes to its own model; every training corpus carries per-review
// source tags and scoring refuses to run if the scored review is among them.

#include <algorithm>
#include <array>
#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "conflens/kruskal_wallis.hpp"
#include "conflens/lexer.hpp"
#include "conflens/ngram.hpp"
#include "conflens/review.hpp"

namespace conflens {

class PreconditionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class LeakageError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

enum class TrainPolicy { loo_accepted, chronological };
enum class Aggregation { token_weighted, file_mean };

inline const char *to_string(TrainPolicy p) {
  return p == TrainPolicy::loo_accepted ? "loo" : "chrono";
}
inline const char *to_string(SelectionMode m) {
  return m == SelectionMode::first_vs_last ? "first_vs_last" : "diff_sides";
}
inline const char *to_string(Aggregation a) {
  return a == Aggregation::token_weighted ? "token_weighted" : "file_mean";
}

inline const std::vector<std::string> &programming_extensions() {
  static const std::vector<std::string> exts{".js", ".py", ".sh"};
  return exts;
}

struct ExperimentConfig {
  int min_order = 3;
  int max_order = 9;
  /// Restricts analyses to these extensions (lower-case, with dot).
  std::vector<std::string> extensions;
  /// Restricts analyses to these kinds.
  std::vector<FileKind> kinds;
  SelectionMode mode = SelectionMode::first_vs_last;
  TrainPolicy policy = TrainPolicy::loo_accepted;
  Smoothing smoothing = Smoothing::modified_kneser_ney();
  TrainOptions train{};
  Aggregation aggregation = Aggregation::token_weighted;
  unsigned jobs = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (min_order < 1 || max_order > max_order_limit() || min_order > max_order)
      throw std::invalid_argument("orders must be a non-empty range within 1.." +
                                  std::to_string(max_order_limit()));
  }
  static int max_order_limit() { return conflens::max_order; }

  std::vector<int> orders() const {
    std::vector<int> out;
    for (int n = min_order; n <= max_order; ++n)
      out.push_back(n);
    return out;
  }

  bool extension_selected(const std::string &ext,
                          const std::vector<std::string> &fallback) const {
    const auto &list = extensions.empty() ? fallback : extensions;
    if (list.empty())
      return true;
    return std::find(list.begin(), list.end(), ext) != list.end();
  }

  bool kind_selected(FileKind k) const {
    return kinds.empty() || std::find(kinds.begin(), kinds.end(), k) != kinds.end();
  }
};

namespace detail {

template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn &&fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  const auto n = std::min<std::size_t>(jobs, count);
  for (std::size_t t = 0; t < n; ++t)
    threads.emplace_back(worker);
  for (auto &t : threads)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
}

} // namespace detail

/// One review with every file version lexed once.
struct LexedReview {
  std::size_t index = 0;
  std::string review_id;
  ReviewStatus status = ReviewStatus::accepted;
  Timestamp created{};
  std::vector<TokenStream> pre;        // pre side under the selection mode
  std::vector<TokenStream> post;       // post side under the selection mode
  std::vector<TokenStream> final_post; // final revision, post side

  /// Unique training-source tag for this review.
  std::string source_tag() const {
    return std::to_string(index) + ":" + review_id;
  }
};

inline std::vector<LexedReview> lex_reviews(const std::vector<ReviewRecord> &records,
                                            const ExperimentConfig &config) {
  std::vector<LexedReview> out(records.size());
  detail::parallel_for(records.size(), config.jobs, [&](std::size_t i) {
    const auto &rec = records[i];
    auto &lr = out[i];
    lr.index = i;
    lr.review_id = rec.review_id;
    lr.status = rec.status;
    lr.created = review_created(rec);
    const auto versions = select_review_versions(rec, config.mode);
    const int first = rec.revisions.front().revision_number;
    const int last = rec.revisions.back().revision_number;
    auto lex_all = [&](const std::vector<FileVersion> &files, int revision) {
      std::vector<TokenStream> streams;
      for (const auto &f : files) {
        auto ts = lex_file(f);
        ts.review_id = rec.review_id;
        ts.revision_number = revision;
        streams.push_back(std::move(ts));
      }
      return streams;
    };
    lr.pre = lex_all(versions.pre_files,
                     config.mode == SelectionMode::first_vs_last ? first : last);
    lr.post = lex_all(versions.post_files, last);
    // Both selection modes take the post side from the final revision.
    lr.final_post = lr.post;
  });
  return out;
}

/// One aggregated entropy value.
struct EntropyCell {
  std::string label; // extension or kind
  std::string group; // side, decision, or empty
  int order = 0;
  double bits_per_token = 0.0; // per the configured aggregation
  double token_weighted_bits = 0.0;
  double file_mean_bits = 0.0;
  std::uint64_t token_count = 0;
  std::size_t file_count = 0;
};

struct EntropyCurve {
  std::vector<EntropyCell> cells;
  std::vector<std::string> warnings;

  const EntropyCell *find(const std::string &label, const std::string &group,
                          int order) const {
    for (const auto &c : cells)
      if (c.label == label && c.group == group && c.order == order)
        return &c;
    return nullptr;
  }
};

/// A file version to be scored: which review it belongs to, the model it is
/// scored against (label) and the output group it reports into.
struct ScoringItem {
  std::size_t review = 0;
  std::string label;
  std::string group;
  const TokenStream *stream = nullptr;
};

/// Training source: which review a stream comes from and the model it feeds.
struct TrainingItem {
  std::size_t review = 0;
  std::string label;
  const TokenStream *stream = nullptr;
};

namespace detail {

struct CellAccumulator {
  double total_bits = 0.0;
  std::uint64_t tokens = 0;
  double file_bits_sum = 0.0;
  std::size_t files = 0;
};

struct TrainingCounts {
  // per label: counts of every accepted review combined
  std::map<std::string, NGramCounts> total;
  // per review index, per label
  std::map<std::size_t, std::map<std::string, NGramCounts>> own;
};

inline TrainingCounts count_training(const std::vector<TrainingItem> &items,
                                     const std::vector<LexedReview> &reviews,
                                     int order) {
  TrainingCounts tc;
  for (const auto &it : items) {
    const auto tokens = it.stream->texts();
    auto &own = tc.own[it.review].try_emplace(it.label, order).first->second;
    own.add_stream(tokens, reviews[it.review].source_tag());
  }
  for (const auto &[r, by_label] : tc.own)
    for (const auto &[label, c] : by_label)
      tc.total.try_emplace(label, order).first->second.merge(c);
  return tc;
}

} // namespace detail

/// Throws LeakageError when the review contributed to the training counts.
inline void check_no_leakage(const NGramCounts &counts, const LexedReview &review) {
  if (counts.has_source(review.source_tag()))
    throw LeakageError("review " + review.review_id +
                       " is part of its own training corpus");
}

/// Scores every item against a model built from the training items under the
/// configured policy, for every configured order.
inline EntropyCurve score_items(const std::vector<LexedReview> &reviews,
                                const std::vector<TrainingItem> &training,
                                const std::vector<ScoringItem> &items,
                                const ExperimentConfig &config) {
  config.validate();
  EntropyCurve curve;
  std::set<std::string> warned;
  auto warn = [&](std::string w) {
    if (warned.insert(w).second)
      curve.warnings.push_back(std::move(w));
  };

  // Tasks: one per (review, label) pair that has something to score.
  std::map<std::pair<std::size_t, std::string>, std::vector<std::size_t>> task_map;
  std::size_t empty_files = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].stream->tokens.empty()) {
      ++empty_files;
      continue;
    }
    task_map[{items[i].review, items[i].label}].push_back(i);
  }
  if (empty_files)
    warn(std::to_string(empty_files) + " empty file versions not scored");
  std::vector<std::pair<std::pair<std::size_t, std::string>, std::vector<std::size_t>>>
      tasks(task_map.begin(), task_map.end());

  // Accepted reviews ordered by creation time, for the chronological policy.
  std::vector<std::size_t> by_time;
  for (const auto &r : reviews)
    if (r.status == ReviewStatus::accepted)
      by_time.push_back(r.index);
  std::stable_sort(by_time.begin(), by_time.end(), [&](std::size_t a, std::size_t b) {
    return reviews[a].created < reviews[b].created;
  });

  std::map<std::tuple<std::string, std::string, int>, detail::CellAccumulator> cells;

  for (int order : config.orders()) {
    const auto tc = detail::count_training(training, reviews, order);

    auto training_counts = [&](std::size_t review,
                               const std::string &label) -> std::optional<NGramCounts> {
      NGramCounts counts(order);
      if (config.policy == TrainPolicy::loo_accepted) {
        auto tot = tc.total.find(label);
        if (tot == tc.total.end())
          return std::nullopt;
        counts = tot->second;
        auto own = tc.own.find(review);
        if (own != tc.own.end()) {
          auto c = own->second.find(label);
          if (c != own->second.end())
            counts.subtract(c->second);
        }
      } else {
        const auto cutoff = reviews[review].created;
        for (auto r : by_time) {
          if (!(reviews[r].created < cutoff))
            break;
          auto own = tc.own.find(r);
          if (own == tc.own.end())
            continue;
          auto c = own->second.find(label);
          if (c != own->second.end())
            counts.merge(c->second);
        }
      }
      if (counts.empty())
        return std::nullopt;
      return counts;
    };

    struct TaskResult {
      std::vector<std::pair<std::size_t, EntropyReport>> scores;
      std::optional<std::string> warning;
    };
    std::vector<TaskResult> results(tasks.size());
    detail::parallel_for(tasks.size(), config.jobs, [&](std::size_t t) {
      const auto &[key, item_ids] = tasks[t];
      const auto &[review, label] = key;
      auto counts = training_counts(review, label);
      if (!counts) {
        results[t].warning = "no training data for " + label + " (review " +
                             reviews[review].review_id + "); not scored";
        return;
      }
      check_no_leakage(*counts, reviews[review]);
      const NGramModel model(*counts, config.smoothing, config.train);
      for (auto i : item_ids)
        results[t].scores.emplace_back(i, cross_entropy(model, items[i].stream->texts()));
    });

    for (const auto &res : results) {
      if (res.warning)
        warn(*res.warning);
      for (const auto &[i, rep] : res.scores) {
        auto &acc = cells[{items[i].label, items[i].group, order}];
        acc.total_bits += rep.total_bits;
        acc.tokens += rep.token_count;
        acc.file_bits_sum += rep.bits_per_token;
        ++acc.files;
      }
    }
  }

  for (const auto &[key, acc] : cells) {
    EntropyCell c;
    std::tie(c.label, c.group, c.order) = key;
    c.token_count = acc.tokens;
    c.file_count = acc.files;
    c.token_weighted_bits = acc.total_bits / static_cast<double>(acc.tokens);
    c.file_mean_bits = acc.file_bits_sum / static_cast<double>(acc.files);
    c.bits_per_token = config.aggregation == Aggregation::token_weighted
                           ? c.token_weighted_bits
                           : c.file_mean_bits;
    curve.cells.push_back(std::move(c));
  }
  std::stable_sort(curve.cells.begin(), curve.cells.end(),
                   [](const EntropyCell &a, const EntropyCell &b) {
                     return std::tie(a.label, a.group, a.order) <
                            std::tie(b.label, b.group, b.order);
                   });
  return curve;
}

namespace detail {

inline void note_fallbacks(const std::vector<LexedReview> &reviews, EntropyCurve &curve) {
  std::size_t n = 0;
  for (const auto &r : reviews)
    for (const auto *side : {&r.pre, &r.post, &r.final_post})
      for (const auto &s : *side)
        n += s.lex_fallback ? 1 : 0;
  if (n)
    curve.warnings.push_back(std::to_string(n) +
                             " file versions fell back to generic tokenization");
}

} // namespace detail

/// Entropy per (kind, order): the post-review versions of each review are
/// scored against a model pooling every file of the same kind.
inline EntropyCurve entropy_by_kind(const std::vector<ReviewRecord> &records,
                                    const ExperimentConfig &config) {
  config.validate();
  const auto reviews = lex_reviews(records, config);
  auto kind_of = [&](const TokenStream &s) -> std::optional<std::string> {
    const auto kind = classify_file(s.path);
    if (kind == FileKind::other || !config.kind_selected(kind) ||
        !config.extension_selected(file_extension(s.path), {}))
      return std::nullopt;
    return to_string(kind);
  };
  std::vector<TrainingItem> training;
  std::vector<ScoringItem> items;
  for (const auto &r : reviews) {
    if (r.status == ReviewStatus::accepted)
      for (const auto &s : r.final_post)
        if (auto k = kind_of(s))
          training.push_back({r.index, *k, &s});
    for (const auto &s : r.post)
      if (auto k = kind_of(s))
        items.push_back({r.index, *k, "", &s});
  }
  auto curve = score_items(reviews, training, items, config);
  for (auto kind : {FileKind::programming, FileKind::configuration,
                    FileKind::documentation}) {
    if (!config.kind_selected(kind))
      continue;
    const bool present = std::any_of(curve.cells.begin(), curve.cells.end(),
                                     [&](const auto &c) { return c.label == to_string(kind); });
    if (!present)
      curve.warnings.push_back(std::string("no scored files of kind ") +
                               to_string(kind) + "; omitted");
  }
  detail::note_fallbacks(reviews, curve);
  return curve;
}

/// Entropy per (extension, side, order) of the pre- and post-review versions.
inline EntropyCurve pre_vs_post_entropy(const std::vector<ReviewRecord> &records,
                                        const ExperimentConfig &config) {
  config.validate();
  const auto reviews = lex_reviews(records, config);
  auto selected = [&](const TokenStream &s) {
    const auto ext = file_extension(s.path);
    return config.extension_selected(ext, programming_extensions()) &&
           config.kind_selected(classify_extension(ext));
  };
  std::vector<TrainingItem> training;
  std::vector<ScoringItem> items;
  std::size_t empty_sides = 0;
  for (const auto &r : reviews) {
    if (r.status == ReviewStatus::accepted)
      for (const auto &s : r.final_post)
        if (selected(s))
          training.push_back({r.index, file_extension(s.path), &s});
    std::set<std::string> pre_exts, post_exts;
    for (const auto &s : r.pre)
      if (selected(s)) {
        items.push_back({r.index, file_extension(s.path), "pre", &s});
        pre_exts.insert(file_extension(s.path));
      }
    for (const auto &s : r.post)
      if (selected(s)) {
        items.push_back({r.index, file_extension(s.path), "post", &s});
        post_exts.insert(file_extension(s.path));
      }
    if (pre_exts != post_exts)
      ++empty_sides;
  }
  auto curve = score_items(reviews, training, items, config);
  if (empty_sides)
    curve.warnings.push_back(std::to_string(empty_sides) +
                             " reviews have an extension on only one side");
  detail::note_fallbacks(reviews, curve);
  return curve;
}

/// Entropy per (extension, decision, order) of final post-review versions.
inline EntropyCurve accepted_vs_abandoned(const std::vector<ReviewRecord> &records,
                                          const ExperimentConfig &config) {
  config.validate();
  const auto reviews = lex_reviews(records, config);
  auto selected = [&](const TokenStream &s) {
    const auto ext = file_extension(s.path);
    return config.extension_selected(ext, programming_extensions()) &&
           config.kind_selected(classify_extension(ext));
  };
  std::vector<TrainingItem> training;
  std::vector<ScoringItem> items;
  bool any_accepted = false, any_abandoned = false;
  for (const auto &r : reviews) {
    (r.status == ReviewStatus::accepted ? any_accepted : any_abandoned) = true;
    for (const auto &s : r.final_post) {
      if (!selected(s))
        continue;
      if (r.status == ReviewStatus::accepted)
        training.push_back({r.index, file_extension(s.path), &s});
      items.push_back({r.index, file_extension(s.path), to_string(r.status), &s});
    }
  }
  auto curve = score_items(reviews, training, items, config);
  if (!any_accepted)
    curve.warnings.push_back("no accepted reviews; accepted curve absent");
  if (!any_abandoned)
    curve.warnings.push_back("no abandoned reviews; abandoned curve absent");
  detail::note_fallbacks(reviews, curve);
  return curve;
}

// ---------------------------------------------------------------------------
// Churn

struct ReviewChurnRow {
  std::string review_id;
  std::size_t total_churn = 0;
  double programming = 0.0;
  double configuration = 0.0;
  double documentation = 0.0;
  double other = 0.0;

  double proportion(FileKind k) const {
    switch (k) {
    case FileKind::programming:
      return programming;
    case FileKind::configuration:
      return configuration;
    case FileKind::documentation:
      return documentation;
    case FileKind::other:
      return other;
    }
    return 0.0;
  }
};

struct ChurnByKindResult {
  std::vector<ReviewChurnRow> rows;
  std::map<FileKind, double> mean_proportion;
  std::vector<FileKind> tested_kinds;
  GroupTestResult test;
  std::vector<std::string> skipped; // reviews with zero churn
};

/// Per-review churn proportions by kind (denominator includes "other"), and a
/// Kruskal-Wallis test across the kinds that have any churn at all.
inline ChurnByKindResult churn_by_kind(const std::vector<ReviewRecord> &records) {
  if (records.empty())
    throw PreconditionError("churn_by_kind needs at least one review");
  ChurnByKindResult res;
  std::map<FileKind, std::size_t> kind_total;
  for (const auto &rec : records) {
    std::map<FileKind, std::size_t> churn;
    std::size_t total = 0;
    for (const auto &rev : rec.revisions)
      for (const auto &f : rev.files) {
        const auto c = compute_churn(f).churn();
        churn[classify_file(f.path)] += c;
        total += c;
      }
    if (total == 0) {
      res.skipped.push_back(rec.review_id);
      continue;
    }
    ReviewChurnRow row;
    row.review_id = rec.review_id;
    row.total_churn = total;
    const auto t = static_cast<double>(total);
    row.programming = static_cast<double>(churn[FileKind::programming]) / t;
    row.configuration = static_cast<double>(churn[FileKind::configuration]) / t;
    row.documentation = static_cast<double>(churn[FileKind::documentation]) / t;
    row.other = static_cast<double>(churn[FileKind::other]) / t;
    for (const auto &[k, c] : churn)
      kind_total[k] += c;
    res.rows.push_back(row);
  }
  for (auto k : {FileKind::programming, FileKind::configuration,
                 FileKind::documentation, FileKind::other}) {
    double sum = 0.0;
    for (const auto &r : res.rows)
      sum += r.proportion(k);
    res.mean_proportion[k] = res.rows.empty() ? 0.0 : sum / static_cast<double>(res.rows.size());
  }
  std::vector<std::vector<double>> groups;
  for (auto k : {FileKind::programming, FileKind::configuration, FileKind::documentation}) {
    if (kind_total[k] == 0)
      continue;
    res.tested_kinds.push_back(k);
    std::vector<double> g;
    for (const auto &r : res.rows)
      g.push_back(r.proportion(k));
    groups.push_back(std::move(g));
  }
  if (groups.size() < 2)
    throw PreconditionError("churn_by_kind needs churn in at least two file kinds, found " +
                            std::to_string(groups.size()));
  res.test = kruskal_wallis(groups);
  return res;
}

// ---------------------------------------------------------------------------
// Syntax tables

struct SyntaxProportionRow {
  std::string extension;
  std::string side;
  TokenClass cls = TokenClass::other;
  std::uint64_t count = 0;
  std::uint64_t total = 0;
  std::optional<double> percent;
};

inline std::vector<TokenClass> reported_classes(const std::string &ext) {
  std::vector<TokenClass> out;
  for (auto c : all_token_classes) {
    if (c == TokenClass::word)
      continue;
    if (c == TokenClass::separator && language_for_extension(ext) == Language::shell)
      continue;
    out.push_back(c);
  }
  return out;
}

/// Percent of each token class among all tokens of an (extension, side).
inline std::vector<SyntaxProportionRow>
syntax_proportions(const std::vector<TokenStream> &streams) {
  std::map<std::pair<std::string, std::string>, std::map<TokenClass, std::uint64_t>> counts;
  std::map<std::pair<std::string, std::string>, std::uint64_t> totals;
  for (const auto &s : streams) {
    const std::pair key{file_extension(s.path), std::string(to_string(s.side))};
    auto &tot = totals[key];
    auto &m = counts[key];
    for (const auto &t : s.tokens) {
      ++m[t.cls];
      ++tot;
    }
  }
  std::vector<SyntaxProportionRow> rows;
  for (const auto &[key, m] : counts) {
    const auto total = totals[key];
    for (auto c : reported_classes(key.first)) {
      SyntaxProportionRow row{key.first, key.second, c, 0, total, std::nullopt};
      auto it = m.find(c);
      row.count = it == m.end() ? 0 : it->second;
      if (total > 0)
        row.percent = 100.0 * static_cast<double>(row.count) / static_cast<double>(total);
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::vector<SyntaxProportionRow>
syntax_proportions(const std::vector<ReviewRecord> &records, const ExperimentConfig &config) {
  const auto reviews = lex_reviews(records, config);
  std::vector<TokenStream> streams;
  for (const auto &r : reviews)
    for (const auto *side : {&r.pre, &r.post})
      for (const auto &s : *side) {
        const auto ext = file_extension(s.path);
        if (config.extension_selected(ext, programming_extensions()))
          streams.push_back(s);
      }
  return syntax_proportions(streams);
}

struct ChangedTokenRow {
  std::string extension;
  std::string side; // "added" or "removed"
  TokenClass cls = TokenClass::other;
  int rank = 0;
  std::string token;
  std::uint64_t count = 0;
  double percent = 0.0;
  bool stable = false;
};

/// Tokens gained (added) or lost (removed) by each file diff, as the multiset
/// difference between the post and pre versions, then ranked per class.
/// Percentages are relative to all added (resp. removed) tokens of the
/// extension. A token is stable when it is in the top k of its class on both
/// sides.
inline std::vector<ChangedTokenRow>
top_changed_tokens(const std::vector<ReviewRecord> &records, int k,
                   const ExperimentConfig &config = {}) {
  if (k < 1)
    throw std::invalid_argument("k must be >= 1");
  using Key = std::pair<TokenClass, std::string>;
  struct SideCounts {
    std::map<Key, std::uint64_t> counts;
    std::uint64_t total = 0;
  };
  std::map<std::string, std::array<SideCounts, 2>> by_ext; // 0 added, 1 removed
  for (const auto &rec : records)
    for (const auto &rev : rec.revisions)
      for (const auto &f : rev.files) {
        const auto ext = file_extension(f.path);
        if (!config.extension_selected(ext, programming_extensions()))
          continue;
        const auto [pre, post] = reconstruct_versions(f);
        std::map<Key, std::int64_t> delta;
        for (const auto &t : lex_file(post).tokens)
          ++delta[{t.cls, t.text}];
        for (const auto &t : lex_file(pre).tokens)
          --delta[{t.cls, t.text}];
        auto &sides = by_ext[ext];
        for (const auto &[key, d] : delta) {
          if (d == 0)
            continue;
          auto &side = sides[d > 0 ? 0 : 1];
          const auto n = static_cast<std::uint64_t>(d > 0 ? d : -d);
          side.counts[key] += n;
          side.total += n;
        }
      }

  std::vector<ChangedTokenRow> rows;
  static constexpr TokenClass syntax[] = {TokenClass::separator, TokenClass::operator_,
                                          TokenClass::keyword};
  for (const auto &[ext, sides] : by_ext) {
    std::array<std::map<TokenClass, std::vector<std::pair<std::string, std::uint64_t>>>, 2>
        ranked;
    for (int s = 0; s < 2; ++s) {
      for (auto cls : syntax) {
        std::vector<std::pair<std::string, std::uint64_t>> list;
        for (const auto &[key, n] : sides[static_cast<std::size_t>(s)].counts)
          if (key.first == cls)
            list.emplace_back(key.second, n);
        std::sort(list.begin(), list.end(), [](const auto &a, const auto &b) {
          return a.second != b.second ? a.second > b.second : a.first < b.first;
        });
        if (list.size() > static_cast<std::size_t>(k))
          list.resize(static_cast<std::size_t>(k));
        ranked[static_cast<std::size_t>(s)][cls] = std::move(list);
      }
    }
    for (int s = 0; s < 2; ++s) {
      const auto &other = ranked[static_cast<std::size_t>(1 - s)];
      for (auto cls : syntax) {
        const auto &list = ranked[static_cast<std::size_t>(s)].at(cls);
        const auto &other_list = other.at(cls);
        for (std::size_t i = 0; i < list.size(); ++i) {
          ChangedTokenRow row;
          row.extension = ext;
          row.side = s == 0 ? "added" : "removed";
          row.cls = cls;
          row.rank = static_cast<int>(i + 1);
          row.token = list[i].first;
          row.count = list[i].second;
          row.percent = 100.0 * static_cast<double>(list[i].second) /
                        static_cast<double>(sides[static_cast<std::size_t>(s)].total);
          row.stable = std::any_of(other_list.begin(), other_list.end(),
                                   [&](const auto &p) { return p.first == row.token; });
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

} // namespace conflens

#endif // CONFLENS_ANALYSIS_HPP_
