#ifndef CONFLENS_ARCHIVE_HPP_
#define CONFLENS_ARCHIVE_HPP_

// Line-delimited review archive: one JSON object per line.
//
//   {"review_id": str, "status": "accepted"|"abandoned",
//    "revisions": [{"revision_number": int, "created": "<ISO-8601 UTC>",
//                   "files": [{"path": str,
//                              "lines": [{"op": "added"|"removed"|"unchanged",
//                                         "text": str}]}]}]}
//
// Blank lines are ignored and do not count as records.

#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "conflens/review.hpp"

namespace conflens {

class ArchiveError : public std::runtime_error {
public:
  ArchiveError(std::size_t record_index, const std::string &reason)
      : std::runtime_error(reason + " at record " +
                           std::to_string(record_index)),
        record_index_(record_index), reason_(reason) {}

  std::size_t record_index() const { return record_index_; }
  const std::string &reason() const { return reason_; }

private:
  std::size_t record_index_;
  std::string reason_;
};

enum class MalformedPolicy { skip_and_log, fail_fast };

struct SkippedRecord {
  std::size_t record_index = 0;
  std::string reason;
};

struct ArchiveParseResult {
  std::vector<ReviewRecord> records;
  std::vector<SkippedRecord> skipped;
};

namespace detail {

inline bool parse_fixed_int(const std::string &s, std::size_t pos,
                            std::size_t len, int &out) {
  if (pos + len > s.size())
    return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9')
      return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

} // namespace detail

/// Parses "YYYY-MM-DDTHH:MM:SS[.frac][Z|+HH:MM|-HH:MM]" (a space is accepted
/// in place of 'T'). Fractional seconds are truncated.
inline bool parse_timestamp(const std::string &s, Timestamp &out) {
  int y, mo, d, h, mi, se;
  using detail::parse_fixed_int;
  if (!parse_fixed_int(s, 0, 4, y) || s.size() < 19 || s[4] != '-' ||
      !parse_fixed_int(s, 5, 2, mo) || s[7] != '-' ||
      !parse_fixed_int(s, 8, 2, d) || (s[10] != 'T' && s[10] != ' ') ||
      !parse_fixed_int(s, 11, 2, h) || s[13] != ':' ||
      !parse_fixed_int(s, 14, 2, mi) || s[16] != ':' ||
      !parse_fixed_int(s, 17, 2, se))
    return false;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9')
      ++pos;
  }
  int offset_minutes = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      // UTC
    } else if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 &&
               s[pos + 3] == ':') {
      int oh, om;
      if (!parse_fixed_int(s, pos + 1, 2, oh) ||
          !parse_fixed_int(s, pos + 4, 2, om))
        return false;
      offset_minutes = (oh * 60 + om) * (s[pos] == '-' ? -1 : 1);
    } else {
      return false;
    }
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || se > 60)
    return false;
  out = sys_days{ymd} + hours{h} + minutes{mi} + seconds{se} -
        minutes{offset_minutes};
  return true;
}

inline std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

namespace detail {

using nlohmann::json;

inline const json &require(const json &obj, const char *key,
                           std::size_t index) {
  if (!obj.is_object())
    throw ArchiveError(index, "expected object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw ArchiveError(index, std::string("missing field '") + key + "'");
  return *it;
}

inline const std::string &require_string(const json &obj, const char *key,
                                         std::size_t index) {
  const auto &v = require(obj, key, index);
  if (!v.is_string())
    throw ArchiveError(index, std::string("field '") + key +
                                  "' must be a string");
  return v.get_ref<const std::string &>();
}

inline ReviewRecord record_from_json(const json &j, std::size_t index) {
  ReviewRecord rec;
  rec.review_id = require_string(j, "review_id", index);
  if (rec.review_id.empty())
    throw ArchiveError(index, "empty review_id");

  const auto &status = require_string(j, "status", index);
  if (status == "accepted")
    rec.status = ReviewStatus::accepted;
  else if (status == "abandoned")
    rec.status = ReviewStatus::abandoned;
  else
    throw ArchiveError(index, "unknown status");

  const auto &revs = require(j, "revisions", index);
  if (!revs.is_array() || revs.empty())
    throw ArchiveError(index, "revisions must be a non-empty array");

  int previous = 0;
  for (const auto &r : revs) {
    PatchRevision rev;
    const auto &num = require(r, "revision_number", index);
    if (!num.is_number_integer())
      throw ArchiveError(index, "revision_number must be an integer");
    rev.revision_number = num.get<int>();
    if (rev.revision_number < 1)
      throw ArchiveError(index, "revision_number must be >= 1");
    if (rev.revision_number <= previous)
      throw ArchiveError(index, "non-monotonic revision numbers");
    previous = rev.revision_number;

    if (!parse_timestamp(require_string(r, "created", index), rev.created))
      throw ArchiveError(index, "invalid created timestamp");

    const auto &files = require(r, "files", index);
    if (!files.is_array())
      throw ArchiveError(index, "files must be an array");
    std::set<std::string> seen;
    for (const auto &f : files) {
      FileDiff diff;
      diff.path = require_string(f, "path", index);
      if (diff.path.empty())
        throw ArchiveError(index, "empty file path");
      if (!seen.insert(diff.path).second)
        throw ArchiveError(index, "duplicate file path '" + diff.path + "'");
      const auto &lines = require(f, "lines", index);
      if (!lines.is_array())
        throw ArchiveError(index, "lines must be an array");
      diff.lines.reserve(lines.size());
      for (const auto &l : lines) {
        const auto &op = require_string(l, "op", index);
        DiffLine line;
        if (op == "added")
          line.op = LineOp::added;
        else if (op == "removed")
          line.op = LineOp::removed;
        else if (op == "unchanged")
          line.op = LineOp::unchanged;
        else
          throw ArchiveError(index, "unknown line op '" + op + "'");
        line.text = require_string(l, "text", index);
        diff.lines.push_back(std::move(line));
      }
      rev.files.push_back(std::move(diff));
    }
    rec.revisions.push_back(std::move(rev));
  }
  return rec;
}

} // namespace detail

inline nlohmann::ordered_json to_json(const ReviewRecord &rec) {
  nlohmann::ordered_json revs = nlohmann::ordered_json::array();
  for (const auto &r : rec.revisions) {
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto &f : r.files) {
      nlohmann::ordered_json lines = nlohmann::ordered_json::array();
      for (const auto &l : f.lines)
        lines.push_back({{"op", to_string(l.op)}, {"text", l.text}});
      files.push_back({{"path", f.path}, {"lines", std::move(lines)}});
    }
    revs.push_back({{"revision_number", r.revision_number},
                    {"created", format_timestamp(r.created)},
                    {"files", std::move(files)}});
  }
  return {{"review_id", rec.review_id},
          {"status", to_string(rec.status)},
          {"revisions", std::move(revs)}};
}

/// Parses one archive line. Throws ArchiveError on any schema violation.
inline ReviewRecord parse_review_line(const std::string &line,
                                      std::size_t index) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error &e) {
    throw ArchiveError(index, std::string("invalid JSON (") + e.what() + ")");
  }
  return detail::record_from_json(j, index);
}

inline ArchiveParseResult
parse_review_archive(std::istream &in,
                     MalformedPolicy policy = MalformedPolicy::skip_and_log) {
  ArchiveParseResult out;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos)
      continue;
    try {
      out.records.push_back(parse_review_line(line, index));
    } catch (const ArchiveError &e) {
      if (policy == MalformedPolicy::fail_fast)
        throw;
      out.skipped.push_back({e.record_index(), e.what()});
    }
    ++index;
  }
  return out;
}

inline ArchiveParseResult
parse_review_archive(const std::string &text,
                     MalformedPolicy policy = MalformedPolicy::skip_and_log) {
  std::istringstream in(text);
  return parse_review_archive(in, policy);
}

inline void write_review_archive(std::ostream &out,
                                 const std::vector<ReviewRecord> &records) {
  for (const auto &r : records)
    out << to_json(r).dump() << '\n';
}

inline std::string
serialize_review_archive(const std::vector<ReviewRecord> &records) {
  std::ostringstream out;
  write_review_archive(out, records);
  return out.str();
}

} // namespace conflens

#endif // CONFLENS_ARCHIVE_HPP_
