#ifndef CONFLENS_REVIEW_HPP_
#define CONFLENS_REVIEW_HPP_

#include <chrono>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace conflens {

using Timestamp = std::chrono::sys_seconds;

enum class ReviewStatus { accepted, abandoned };
enum class LineOp { added, removed, unchanged };
enum class Side { pre, post };

inline const char *to_string(ReviewStatus s) {
  return s == ReviewStatus::accepted ? "accepted" : "abandoned";
}

inline const char *to_string(LineOp op) {
  switch (op) {
  case LineOp::added:
    return "added";
  case LineOp::removed:
    return "removed";
  case LineOp::unchanged:
    return "unchanged";
  }
  return "unchanged";
}

inline const char *to_string(Side s) { return s == Side::pre ? "pre" : "post"; }

struct DiffLine {
  LineOp op = LineOp::unchanged;
  std::string text;

  friend bool operator==(const DiffLine &, const DiffLine &) = default;
};

struct FileDiff {
  std::string path;
  std::vector<DiffLine> lines;

  friend bool operator==(const FileDiff &, const FileDiff &) = default;
};

struct PatchRevision {
  int revision_number = 1;
  Timestamp created{};
  std::vector<FileDiff> files;

  friend bool operator==(const PatchRevision &, const PatchRevision &) = default;
};

struct ReviewRecord {
  std::string review_id;
  ReviewStatus status = ReviewStatus::accepted;
  std::vector<PatchRevision> revisions;

  friend bool operator==(const ReviewRecord &, const ReviewRecord &) = default;
};

struct FileVersion {
  std::string path;
  Side side = Side::post;
  std::vector<std::string> lines;

  /// Joins the lines with '\n'; no trailing terminator.
  std::string text() const {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (i)
        out += '\n';
      out += lines[i];
    }
    return out;
  }

  friend bool operator==(const FileVersion &, const FileVersion &) = default;
};

struct ChurnStats {
  std::string path;
  std::size_t added = 0;
  std::size_t removed = 0;

  std::size_t churn() const { return added + removed; }
};

inline FileVersion side_of(const FileDiff &diff, Side side) {
  const LineOp keep = side == Side::pre ? LineOp::removed : LineOp::added;
  FileVersion v{diff.path, side, {}};
  for (const auto &l : diff.lines)
    if (l.op == LineOp::unchanged || l.op == keep)
      v.lines.push_back(l.text);
  return v;
}

/// Splits an annotated diff into the version before and after the edit.
/// Removed lines go only to the pre side, added lines only to the post side,
/// unchanged lines to both.
inline std::pair<FileVersion, FileVersion>
reconstruct_versions(const FileDiff &diff) {
  return {side_of(diff, Side::pre), side_of(diff, Side::post)};
}

inline ChurnStats compute_churn(const FileDiff &diff) {
  ChurnStats s{diff.path, 0, 0};
  for (const auto &l : diff.lines) {
    if (l.op == LineOp::added)
      ++s.added;
    else if (l.op == LineOp::removed)
      ++s.removed;
  }
  return s;
}

enum class SelectionMode {
  /// pre = post side of the first revision, post = post side of the last.
  first_vs_last,
  /// pre/post = the two sides of the final revision's diffs.
  diff_sides_of_final,
};

struct ReviewVersions {
  std::vector<FileVersion> pre_files;
  std::vector<FileVersion> post_files;
};

inline ReviewVersions select_review_versions(const ReviewRecord &record,
                                             SelectionMode mode) {
  if (record.revisions.empty())
    throw std::invalid_argument("review '" + record.review_id +
                                "' has no revisions");
  ReviewVersions out;
  const auto &last = record.revisions.back();
  if (mode == SelectionMode::first_vs_last) {
    for (const auto &f : record.revisions.front().files) {
      auto v = side_of(f, Side::post);
      v.side = Side::pre;
      out.pre_files.push_back(std::move(v));
    }
    for (const auto &f : last.files)
      out.post_files.push_back(side_of(f, Side::post));
  } else {
    for (const auto &f : last.files) {
      auto [pre, post] = reconstruct_versions(f);
      out.pre_files.push_back(std::move(pre));
      out.post_files.push_back(std::move(post));
    }
  }
  return out;
}

/// Creation time of the review, taken from its first revision.
inline Timestamp review_created(const ReviewRecord &record) {
  return record.revisions.empty() ? Timestamp{}
                                  : record.revisions.front().created;
}

} // namespace conflens

#endif // CONFLENS_REVIEW_HPP_
