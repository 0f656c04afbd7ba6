#ifndef CONFLENS_CORPUS_STATS_HPP_
#define CONFLENS_CORPUS_STATS_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "conflens/lexer.hpp"

namespace conflens {

struct CorpusStatsRow {
  std::string extension;
  std::size_t revisions = 0;
  std::size_t files = 0;
  std::size_t unique_tokens = 0;
  std::uint64_t tokens = 0;

  friend bool operator==(const CorpusStatsRow &, const CorpusStatsRow &) = default;
};

/// Per-extension corpus size. A revision is a distinct (review, revision)
/// pair that contributed at least one file of the extension.
inline std::vector<CorpusStatsRow>
corpus_stats(const std::vector<TokenStream> &streams) {
  struct Acc {
    std::set<std::pair<std::string, int>> revisions;
    std::size_t files = 0;
    std::set<std::string> unique;
    std::uint64_t tokens = 0;
  };
  std::map<std::string, Acc> by_ext;
  for (const auto &s : streams) {
    auto &a = by_ext[file_extension(s.path)];
    a.revisions.emplace(s.review_id, s.revision_number);
    ++a.files;
    for (const auto &t : s.tokens)
      a.unique.insert(t.text);
    a.tokens += s.tokens.size();
  }
  std::vector<CorpusStatsRow> rows;
  for (auto &[ext, a] : by_ext)
    rows.push_back({ext, a.revisions.size(), a.files, a.unique.size(), a.tokens});
  return rows;
}

} // namespace conflens

#endif // CONFLENS_CORPUS_STATS_HPP_
