#ifndef CONFLENS_NGRAM_HPP_
#define CONFLENS_NGRAM_HPP_

// N-gram counting, smoothed language models and cross-entropy scoring.
//
// Every stream is one "sentence": it is padded with (order - 1) start markers
// and a single end marker before counting or scoring. Cross-entropy is the
// mean of -log2 P(token | previous order-1 tokens) over every real token plus
// the end marker.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace conflens {

inline constexpr std::string_view start_marker = "<s>";
inline constexpr std::string_view end_marker = "</s>";
inline constexpr std::string_view unknown_token = "<unk>";
inline constexpr int max_order = 9;

using NGram = std::vector<std::string>;

/// Raw n-gram counts for all lengths 1..order over padded streams.
class NGramCounts {
public:
  explicit NGramCounts(int order) : order_(order) {
    if (order < 1)
      throw std::invalid_argument("n-gram order must be >= 1");
    by_length_.resize(static_cast<std::size_t>(order));
  }

  int order() const { return order_; }

  /// Counts of all tuples of length k (1 <= k <= order).
  const std::map<NGram, std::uint64_t> &counts(int k) const {
    check_length(k);
    return by_length_[static_cast<std::size_t>(k - 1)];
  }

  std::uint64_t count(const NGram &g) const {
    if (g.empty() || static_cast<int>(g.size()) > order_)
      return 0;
    const auto &m = by_length_[g.size() - 1];
    auto it = m.find(g);
    return it == m.end() ? 0 : it->second;
  }

  /// Number of times the tuple occurs followed by another token. For
  /// contexts not ending in the end marker this equals count(c).
  std::uint64_t context_count(const NGram &c) const {
    if (c.empty()) {
      std::uint64_t total = 0;
      for (const auto &[g, n] : by_length_[0])
        if (g[0] != start_marker)
          total += n;
      return total;
    }
    if (static_cast<int>(c.size()) >= order_)
      throw std::invalid_argument("context longer than order - 1");
    std::uint64_t total = 0;
    const auto &m = by_length_[c.size()];
    for (auto it = m.lower_bound(c); it != m.end(); ++it) {
      if (!std::equal(c.begin(), c.end(), it->first.begin()))
        break;
      total += it->second;
    }
    return total;
  }

  /// Distinct token texts, excluding the boundary markers.
  std::set<std::string> vocabulary() const {
    std::set<std::string> v;
    for (const auto &[g, n] : by_length_[0])
      if (g[0] != start_marker && g[0] != end_marker)
        v.insert(g[0]);
    return v;
  }

  bool empty() const { return by_length_[0].empty(); }

  std::size_t stream_count() const { return streams_; }

  /// Streams tagged with a non-empty source id, with multiplicity.
  const std::map<std::string, std::uint64_t> &sources() const {
    return sources_;
  }
  bool has_source(const std::string &id) const { return sources_.count(id) > 0; }

  void add_stream(std::span<const std::string> tokens,
                  const std::string &source = {}) {
    NGram padded(static_cast<std::size_t>(order_ - 1), std::string(start_marker));
    padded.insert(padded.end(), tokens.begin(), tokens.end());
    padded.emplace_back(end_marker);
    for (std::size_t i = 0; i < padded.size(); ++i) {
      for (int k = 1; k <= order_ && i + static_cast<std::size_t>(k) <= padded.size(); ++k)
        ++by_length_[static_cast<std::size_t>(k - 1)]
                    [NGram(padded.begin() + static_cast<std::ptrdiff_t>(i),
                           padded.begin() + static_cast<std::ptrdiff_t>(i) + k)];
    }
    ++streams_;
    if (!source.empty())
      ++sources_[source];
  }

  void add_stream(const std::vector<std::string> &tokens,
                  const std::string &source = {}) {
    add_stream(std::span<const std::string>(tokens), source);
  }

  /// Adds a count directly; used by deserialization and vocabulary mapping.
  void add(const NGram &g, std::uint64_t n) {
    if (g.empty() || static_cast<int>(g.size()) > order_)
      throw std::invalid_argument("n-gram length out of range");
    if (n)
      by_length_[g.size() - 1][g] += n;
  }

  void merge(const NGramCounts &other) {
    if (other.order_ != order_)
      throw std::invalid_argument("cannot merge counts of order " +
                                  std::to_string(other.order_) + " into order " +
                                  std::to_string(order_));
    for (std::size_t k = 0; k < by_length_.size(); ++k)
      for (const auto &[g, n] : other.by_length_[k])
        by_length_[k][g] += n;
    streams_ += other.streams_;
    for (const auto &[s, n] : other.sources_)
      sources_[s] += n;
  }

  /// Removes counts previously merged in. Throws if `other` is not contained.
  void subtract(const NGramCounts &other) {
    if (other.order_ != order_)
      throw std::invalid_argument("cannot subtract counts of a different order");
    for (std::size_t k = 0; k < by_length_.size(); ++k) {
      for (const auto &[g, n] : other.by_length_[k]) {
        auto it = by_length_[k].find(g);
        if (it == by_length_[k].end() || it->second < n)
          throw std::invalid_argument("subtracting counts that are not present");
        if ((it->second -= n) == 0)
          by_length_[k].erase(it);
      }
    }
    if (other.streams_ > streams_)
      throw std::invalid_argument("subtracting more streams than present");
    streams_ -= other.streams_;
    for (const auto &[s, n] : other.sources_) {
      auto it = sources_.find(s);
      if (it == sources_.end() || it->second < n)
        throw std::invalid_argument("subtracting unknown source '" + s + "'");
      if ((it->second -= n) == 0)
        sources_.erase(it);
    }
  }

  friend bool operator==(const NGramCounts &a, const NGramCounts &b) {
    return a.order_ == b.order_ && a.by_length_ == b.by_length_;
  }

private:
  void check_length(int k) const {
    if (k < 1 || k > order_)
      throw std::out_of_range("n-gram length out of range");
  }

  int order_;
  std::vector<std::map<NGram, std::uint64_t>> by_length_;
  std::size_t streams_ = 0;
  std::map<std::string, std::uint64_t> sources_;
};

inline NGramCounts count_ngrams(std::span<const std::vector<std::string>> streams,
                                int order) {
  NGramCounts c(order);
  for (const auto &s : streams)
    c.add_stream(s);
  return c;
}

inline NGramCounts count_ngrams(const std::vector<std::vector<std::string>> &streams,
                                int order) {
  return count_ngrams(std::span<const std::vector<std::string>>(streams), order);
}

inline NGramCounts merge_counts(const NGramCounts &a, const NGramCounts &b) {
  NGramCounts out = a;
  out.merge(b);
  return out;
}

struct Smoothing {
  enum class Kind { mle, additive, modified_kneser_ney };
  Kind kind = Kind::modified_kneser_ney;
  double delta = 0.0;

  static Smoothing mle() { return {Kind::mle, 0.0}; }
  static Smoothing additive(double delta) { return {Kind::additive, delta}; }
  static Smoothing modified_kneser_ney() { return {Kind::modified_kneser_ney, 0.0}; }

  /// "mle", "mkn" or "additive=<delta>".
  static Smoothing parse(std::string_view s) {
    if (s == "mle")
      return mle();
    if (s == "mkn" || s == "modified_kneser_ney")
      return modified_kneser_ney();
    if (s.starts_with("additive=")) {
      const std::string num(s.substr(9));
      std::size_t used = 0;
      double d = 0;
      try {
        d = std::stod(num, &used);
      } catch (const std::exception &) {
        used = 0;
      }
      if (used != num.size() || num.empty())
        throw std::invalid_argument("bad additive delta '" + num + "'");
      return additive(d);
    }
    throw std::invalid_argument("unknown smoothing '" + std::string(s) + "'");
  }

  std::string to_string() const {
    switch (kind) {
    case Kind::mle:
      return "mle";
    case Kind::modified_kneser_ney:
      return "mkn";
    case Kind::additive: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "additive=%.17g", delta);
      return buf;
    }
    }
    return "mkn";
  }

  friend bool operator==(const Smoothing &, const Smoothing &) = default;
};

class ZeroProbabilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnseenContextError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct EntropyReport {
  double bits_per_token = 0.0;
  double total_bits = 0.0;
  std::size_t token_count = 0;

  // Grouping metadata, filled in by callers that aggregate reports.
  std::string extension;
  std::string kind;
  std::string side;
  std::string decision;
  int order = 0;
};

struct TrainOptions {
  /// Tokens seen fewer times than this are mapped to <unk>. With 1 the
  /// vocabulary is closed and has no <unk> entry.
  int min_count = 2;
};

namespace detail {

using Ids = std::vector<std::uint32_t>;

struct IdsHash {
  std::size_t operator()(const Ids &v) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (auto x : v) {
      h ^= x;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

struct ContextTable {
  double total = 0.0; // sum of (adjusted) counts
  double gamma = 0.0; // interpolation weight of the lower order
  std::unordered_map<std::uint32_t, double> mass;
};

} // namespace detail

class NGramModel {
public:
  static constexpr std::uint32_t start_id = 0;
  static constexpr std::uint32_t end_id = 1;
  static constexpr std::uint32_t missing_id = 0xffffffffu;

  NGramModel(const NGramCounts &raw, Smoothing smoothing, TrainOptions options = {})
      : order_(raw.order()), smoothing_(smoothing), options_(options),
        counts_(raw.order()) {
    if (options_.min_count < 1)
      throw std::invalid_argument("min_count must be >= 1");
    if (smoothing_.kind == Smoothing::Kind::additive && !(smoothing_.delta > 0))
      throw std::invalid_argument("additive smoothing needs delta > 0");
    if (raw.empty())
      throw std::invalid_argument("cannot train on empty counts");
    map_vocabulary(raw);
    build_tables();
  }

  int order() const { return order_; }
  const Smoothing &smoothing() const { return smoothing_; }
  const TrainOptions &options() const { return options_; }
  bool open_vocabulary() const { return options_.min_count > 1; }

  /// Counts after rare tokens were mapped to <unk>.
  const NGramCounts &counts() const { return counts_; }

  /// Predictable tokens: the vocabulary (with <unk> when open) plus </s>.
  std::vector<std::string> support() const {
    return {id_to_text_.begin() + 1, id_to_text_.end()};
  }
  std::size_t support_size() const { return id_to_text_.size() - 1; }

  /// Contexts observed at the highest order.
  std::vector<NGram> observed_contexts() const {
    std::vector<NGram> out;
    for (const auto &[ids, t] : tables_.back()) {
      NGram g;
      for (auto id : ids)
        g.push_back(id_to_text_[id]);
      out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Maps a token text to its vocabulary id, applying <unk>.
  std::uint32_t token_id(std::string_view text) const {
    auto it = text_to_id_.find(std::string(text));
    if (it != text_to_id_.end())
      return it->second;
    return unk_id_;
  }

  /// P(token | context); context holds exactly order-1 tokens and may use
  /// the start marker.
  double probability(std::span<const std::string> context,
                     std::string_view token) const {
    if (static_cast<int>(context.size()) != order_ - 1)
      throw std::invalid_argument("context must have order-1 tokens");
    detail::Ids ctx;
    ctx.reserve(context.size());
    for (const auto &c : context)
      ctx.push_back(token_id(c));
    const auto w = token_id(token);
    if (w == missing_id || w == start_id)
      throw std::out_of_range("token '" + std::string(token) +
                              "' is not in the closed vocabulary");
    return probability_ids(ctx, w);
  }

  double probability(const NGram &context, std::string_view token) const {
    return probability(std::span<const std::string>(context), token);
  }

  double probability_ids(const detail::Ids &ctx, std::uint32_t w) const {
    const double uniform = 1.0 / static_cast<double>(support_size());
    switch (smoothing_.kind) {
    case Smoothing::Kind::mle: {
      const auto *t = find(order_, ctx);
      if (!t)
        throw UnseenContextError("unseen context under MLE");
      auto it = t->mass.find(w);
      return it == t->mass.end() ? 0.0 : it->second / t->total;
    }
    case Smoothing::Kind::additive: {
      const auto *t = find(order_, ctx);
      if (!t)
        return uniform;
      auto it = t->mass.find(w);
      const double c = it == t->mass.end() ? 0.0 : it->second;
      return (c + smoothing_.delta) /
             (t->total + smoothing_.delta * static_cast<double>(support_size()));
    }
    case Smoothing::Kind::modified_kneser_ney: {
      double p = uniform;
      for (int k = 1; k <= order_; ++k) {
        const auto *t = find(k, ctx);
        if (!t)
          continue;
        auto it = t->mass.find(w);
        const double m = it == t->mass.end() ? 0.0 : it->second;
        p = m / t->total + t->gamma * p;
      }
      return p;
    }
    }
    return 0.0;
  }

  /// Per-order discounts (D1, D2, D3+) used by modified Kneser-Ney.
  const std::array<double, 3> &discounts(int k) const {
    return discounts_.at(static_cast<std::size_t>(k - 1));
  }

private:
  void map_vocabulary(const NGramCounts &raw) {
    const bool open = options_.min_count > 1;
    std::set<std::string> kept;
    for (const auto &[g, n] : raw.counts(1)) {
      if (g[0] == start_marker || g[0] == end_marker)
        continue;
      if (n >= static_cast<std::uint64_t>(options_.min_count) || g[0] == unknown_token)
        kept.insert(g[0]);
    }
    if (open)
      kept.insert(std::string(unknown_token));
    id_to_text_ = {std::string(start_marker), std::string(end_marker)};
    for (const auto &t : kept)
      id_to_text_.push_back(t);
    for (std::uint32_t i = 0; i < id_to_text_.size(); ++i)
      text_to_id_.emplace(id_to_text_[i], i);
    unk_id_ = open ? text_to_id_.at(std::string(unknown_token)) : missing_id;

    auto map_text = [&](const std::string &t) -> const std::string & {
      static const std::string unk(unknown_token);
      return text_to_id_.count(t) ? t : unk;
    };
    for (int k = 1; k <= order_; ++k) {
      for (const auto &[g, n] : raw.counts(k)) {
        NGram mapped;
        mapped.reserve(g.size());
        for (const auto &t : g)
          mapped.push_back(map_text(t));
        counts_.add(mapped, n);
      }
    }
  }

  detail::Ids to_ids(const NGram &g) const {
    detail::Ids ids;
    ids.reserve(g.size());
    for (const auto &t : g)
      ids.push_back(text_to_id_.at(t));
    return ids;
  }

  const detail::ContextTable *find(int k, const detail::Ids &ctx) const {
    const auto &table = tables_[static_cast<std::size_t>(k - 1)];
    const auto len = static_cast<std::size_t>(k - 1);
    detail::Ids key(ctx.end() - static_cast<std::ptrdiff_t>(len), ctx.end());
    auto it = table.find(key);
    return it == table.end() ? nullptr : &it->second;
  }

  void build_tables() {
    tables_.assign(static_cast<std::size_t>(order_), {});
    discounts_.assign(static_cast<std::size_t>(order_), {0.0, 0.0, 0.0});
    if (smoothing_.kind != Smoothing::Kind::modified_kneser_ney) {
      auto &table = tables_.back();
      for (const auto &[g, n] : counts_.counts(order_)) {
        auto ids = to_ids(g);
        const auto w = ids.back();
        ids.pop_back();
        auto &t = table[ids];
        t.total += static_cast<double>(n);
        t.mass[w] += static_cast<double>(n);
      }
      return;
    }

    // Adjusted counts: raw counts at the highest order, continuation counts
    // (number of distinct left extensions) below it. N-grams that have no
    // left extension keep their raw count.
    std::vector<std::unordered_map<detail::Ids, double, detail::IdsHash>> adjusted(
        static_cast<std::size_t>(order_));
    for (int k = order_; k >= 1; --k) {
      auto &adj = adjusted[static_cast<std::size_t>(k - 1)];
      if (k < order_) {
        for (const auto &[g, n] : counts_.counts(k + 1)) {
          auto ids = to_ids(g);
          ids.erase(ids.begin());
          if (ids.back() != start_id)
            adj[ids] += 1.0;
        }
      }
      for (const auto &[g, n] : counts_.counts(k)) {
        auto ids = to_ids(g);
        if (ids.back() == start_id)
          continue;
        auto it = adj.find(ids);
        if (it == adj.end())
          adj.emplace(std::move(ids), static_cast<double>(n));
      }
    }

    for (int k = 1; k <= order_; ++k) {
      const auto &adj = adjusted[static_cast<std::size_t>(k - 1)];
      std::array<std::uint64_t, 5> coc{}; // count-of-counts n1..n4
      for (const auto &[ids, a] : adj) {
        const auto c = static_cast<std::uint64_t>(a);
        if (c >= 1 && c <= 4)
          ++coc[c];
      }
      auto &d = discounts_[static_cast<std::size_t>(k - 1)];
      if (coc[1] == 0 || coc[2] == 0 || coc[3] == 0) {
        d = {0.5, 0.5, 0.5};
      } else {
        const double n1 = static_cast<double>(coc[1]), n2 = static_cast<double>(coc[2]),
                     n3 = static_cast<double>(coc[3]), n4 = static_cast<double>(coc[4]);
        const double y = n1 / (n1 + 2.0 * n2);
        d[0] = std::clamp(1.0 - 2.0 * y * n2 / n1, 0.0, 1.0);
        d[1] = std::clamp(2.0 - 3.0 * y * n3 / n2, 0.0, 2.0);
        d[2] = std::clamp(3.0 - 4.0 * y * n4 / n3, 0.0, 3.0);
      }

      auto &table = tables_[static_cast<std::size_t>(k - 1)];
      // Iterate in a fixed order so floating-point sums are reproducible.
      std::vector<std::pair<detail::Ids, double>> sorted(adj.begin(), adj.end());
      std::sort(sorted.begin(), sorted.end());
      for (const auto &[ids, a] : sorted) {
        detail::Ids ctx(ids.begin(), ids.end() - 1);
        auto &t = table[ctx];
        const double disc = a >= 3.0 ? d[2] : a >= 2.0 ? d[1] : d[0];
        t.total += a;
        t.gamma += disc;
        t.mass[ids.back()] = std::max(a - disc, 0.0);
      }
      for (auto &[ctx, t] : table)
        t.gamma /= t.total;
    }
  }

  int order_;
  Smoothing smoothing_;
  TrainOptions options_;
  NGramCounts counts_;
  std::vector<std::string> id_to_text_;
  std::unordered_map<std::string, std::uint32_t> text_to_id_;
  std::uint32_t unk_id_ = missing_id;
  std::vector<std::unordered_map<detail::Ids, detail::ContextTable, detail::IdsHash>>
      tables_;
  std::vector<std::array<double, 3>> discounts_;
};

inline NGramModel train(const NGramCounts &counts, Smoothing smoothing,
                        TrainOptions options = {}) {
  return NGramModel(counts, smoothing, options);
}

inline double probability(const NGramModel &model, const NGram &context,
                          std::string_view token) {
  return model.probability(context, token);
}

/// Cross-entropy in bits per scored event (every token plus the end marker).
inline EntropyReport cross_entropy(const NGramModel &model,
                                   std::span<const std::string> tokens) {
  const auto n = static_cast<std::size_t>(model.order());
  detail::Ids padded(n - 1, NGramModel::start_id);
  padded.reserve(padded.size() + tokens.size() + 1);
  for (const auto &t : tokens) {
    const auto id = model.token_id(t);
    if (id == NGramModel::missing_id)
      throw std::out_of_range("token '" + t + "' is not in the closed vocabulary");
    padded.push_back(id);
  }
  padded.push_back(NGramModel::end_id);

  EntropyReport r;
  r.order = model.order();
  detail::Ids ctx(n - 1);
  for (std::size_t i = n - 1; i < padded.size(); ++i) {
    std::copy(padded.begin() + static_cast<std::ptrdiff_t>(i - (n - 1)),
              padded.begin() + static_cast<std::ptrdiff_t>(i), ctx.begin());
    const double p = model.probability_ids(ctx, padded[i]);
    if (!(p > 0.0)) {
      std::string gram;
      const auto support = model.support();
      for (std::size_t j = i - (n - 1); j <= i; ++j) {
        if (!gram.empty())
          gram += ' ';
        gram += padded[j] == NGramModel::start_id ? std::string(start_marker)
                                                  : support[padded[j] - 1];
      }
      throw ZeroProbabilityError("zero probability for n-gram '" + gram + "'");
    }
    r.total_bits -= std::log2(p);
    ++r.token_count;
  }
  r.bits_per_token = r.total_bits / static_cast<double>(r.token_count);
  // -log2(1) can round to -0.0.
  if (r.bits_per_token <= 0.0)
    r.bits_per_token = 0.0;
  return r;
}

inline EntropyReport cross_entropy(const NGramModel &model,
                                   const std::vector<std::string> &tokens) {
  return cross_entropy(model, std::span<const std::string>(tokens));
}

} // namespace conflens

#endif // CONFLENS_NGRAM_HPP_
