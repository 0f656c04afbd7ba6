#ifndef CONFLENS_GERRIT_HPP_
#define CONFLENS_GERRIT_HPP_

// Fetches decided changes from a Gerrit REST endpoint and converts them to
// the review archive format.
//
// Requests:
//   GET <prefix>/changes/?q=<query>&n=<page_size>&S=<start>&o=ALL_REVISIONS&o=ALL_FILES
//   GET <prefix>/changes/<id>/revisions/<rev>/files/<path>/diff?context=ALL
// Every response starts with the XSSI guard ")]}'", which is stripped.
// MERGED changes become "accepted", ABANDONED become "abandoned"; open
// changes are skipped.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "conflens/archive.hpp"
#include "conflens/review.hpp"

namespace conflens {

class FetchError : public std::runtime_error {
public:
  FetchError(const std::string &what, bool retriable, int http_status = 0)
      : std::runtime_error(what), retriable_(retriable), http_status_(http_status) {}
  bool retriable() const { return retriable_; }
  int http_status() const { return http_status_; }

private:
  bool retriable_;
  int http_status_;
};

struct GerritFetchOptions {
  /// Base URL, e.g. "https://review.opendev.org" or "http://127.0.0.1:8080/a".
  std::string endpoint;
  std::string query = "status:merged OR status:abandoned";
  int page_size = 100;
  int max_retries = 3;
  std::chrono::milliseconds retry_delay{500};
  std::chrono::seconds timeout{30};
  /// Extra request headers, e.g. {"Authorization", "Bearer ..."}.
  std::vector<std::pair<std::string, std::string>> headers;
};

inline std::string percent_encode(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

inline std::string strip_xssi_prefix(std::string body) {
  static constexpr std::string_view guard = ")]}'";
  if (body.rfind(guard, 0) == 0) {
    body.erase(0, guard.size());
    const auto nl = body.find('\n');
    if (nl != std::string::npos && body.find_first_not_of(" \r\t") == nl)
      body.erase(0, nl + 1);
  }
  return body;
}

namespace detail {

struct SplitUrl {
  std::string scheme_host_port;
  std::string prefix;
};

inline SplitUrl split_endpoint(const std::string &endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw std::invalid_argument("endpoint must start with http:// or https://");
  const auto path_start = endpoint.find('/', scheme_end + 3);
  SplitUrl u;
  u.scheme_host_port = endpoint.substr(0, path_start);
  if (path_start != std::string::npos)
    u.prefix = endpoint.substr(path_start);
  while (!u.prefix.empty() && u.prefix.back() == '/')
    u.prefix.pop_back();
  return u;
}

/// Converts a Gerrit diff "content" array into annotated lines.
inline std::vector<DiffLine> diff_lines_from_gerrit(const nlohmann::json &diff) {
  std::vector<DiffLine> lines;
  const auto content = diff.find("content");
  if (content == diff.end() || !content->is_array())
    return lines;
  for (const auto &chunk : *content) {
    auto emit = [&](const char *key, LineOp op) {
      auto it = chunk.find(key);
      if (it != chunk.end() && it->is_array())
        for (const auto &l : *it)
          lines.push_back({op, l.get<std::string>()});
    };
    emit("ab", LineOp::unchanged);
    emit("a", LineOp::removed);
    emit("b", LineOp::added);
  }
  return lines;
}

} // namespace detail

class GerritClient {
public:
  explicit GerritClient(GerritFetchOptions options)
      : options_(std::move(options)),
        url_(detail::split_endpoint(options_.endpoint)),
        client_(url_.scheme_host_port) {
    if (options_.page_size < 1)
      throw std::invalid_argument("page_size must be positive");
    client_.set_connection_timeout(options_.timeout);
    client_.set_read_timeout(options_.timeout);
    for (const auto &[k, v] : options_.headers)
      headers_.emplace(k, v);
  }

  /// GET with retries; returns the JSON body with the XSSI guard removed.
  nlohmann::json get_json(const std::string &path_and_query) {
    const auto path = url_.prefix + path_and_query;
    std::string last_error;
    int last_status = 0;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
      if (attempt > 0 && options_.retry_delay.count() > 0)
        std::this_thread::sleep_for(options_.retry_delay * attempt);
      auto res = client_.Get(path, headers_);
      if (!res) {
        last_error = "network error: " + httplib::to_string(res.error());
        last_status = 0;
        continue;
      }
      if (res->status >= 400) {
        last_error = "HTTP " + std::to_string(res->status);
        last_status = res->status;
        continue;
      }
      try {
        return nlohmann::json::parse(strip_xssi_prefix(res->body));
      } catch (const nlohmann::json::parse_error &e) {
        last_error = std::string("malformed JSON: ") + e.what();
      }
    }
    throw FetchError("GET " + path + " failed after " +
                         std::to_string(options_.max_retries + 1) + " attempts: " + last_error,
                     true, last_status);
  }

  /// Retrieves all decided changes matching the query, converted to records.
  std::vector<ReviewRecord> fetch() {
    std::vector<ReviewRecord> records;
    std::set<std::string> seen;
    int start = 0;
    while (true) {
      const auto page = get_json("/changes/?q=" + percent_encode(options_.query) +
                                 "&n=" + std::to_string(options_.page_size) +
                                 "&S=" + std::to_string(start) +
                                 "&o=ALL_REVISIONS&o=ALL_FILES");
      if (!page.is_array())
        throw FetchError("change query did not return a list (start " +
                             std::to_string(start) + ")",
                         true);
      bool more = false;
      for (const auto &change : page) {
        const auto id = change_key(change);
        if (!seen.insert(id).second)
          throw FetchError("pagination loop: change " + id + " returned twice (start " +
                               std::to_string(start) + ")",
                           true);
        if (auto rec = convert_change(change))
          records.push_back(std::move(*rec));
        more = change.value("_more_changes", false);
      }
      if (!more || page.empty())
        break;
      start += static_cast<int>(page.size());
    }
    return records;
  }

private:
  static std::string change_key(const nlohmann::json &change) {
    if (change.contains("_number"))
      return std::to_string(change["_number"].get<long long>());
    return change.value("id", std::string{});
  }

  std::optional<ReviewRecord> convert_change(const nlohmann::json &change) {
    ReviewRecord rec;
    const auto status = change.value("status", std::string{});
    if (status == "MERGED")
      rec.status = ReviewStatus::accepted;
    else if (status == "ABANDONED")
      rec.status = ReviewStatus::abandoned;
    else
      return std::nullopt;
    rec.review_id = change_key(change);
    const auto api_id = change.value("id", rec.review_id);

    const auto revs = change.find("revisions");
    if (revs == change.end() || !revs->is_object())
      return std::nullopt;
    std::vector<std::pair<int, std::string>> order;
    for (auto it = revs->begin(); it != revs->end(); ++it)
      order.emplace_back(it.value().value("_number", 0), it.key());
    std::sort(order.begin(), order.end());

    for (const auto &[number, sha] : order) {
      const auto &rev = (*revs)[sha];
      PatchRevision pr;
      pr.revision_number = number;
      if (!parse_timestamp(rev.value("created", std::string{}), pr.created))
        throw FetchError("change " + rec.review_id + " revision " + std::to_string(number) +
                             ": bad created timestamp",
                         false);
      auto files = rev.find("files");
      if (files != rev.end() && files->is_object()) {
        for (auto f = files->begin(); f != files->end(); ++f) {
          const auto &path = f.key();
          if (!path.empty() && path.front() == '/')
            continue; // /COMMIT_MSG, /MERGE_LIST, ...
          if (f.value().value("binary", false))
            continue;
          const auto diff = get_json("/changes/" + percent_encode(api_id) + "/revisions/" +
                                     percent_encode(sha) + "/files/" + percent_encode(path) +
                                     "/diff?context=ALL");
          pr.files.push_back({path, detail::diff_lines_from_gerrit(diff)});
        }
      }
      rec.revisions.push_back(std::move(pr));
    }
    if (rec.revisions.empty())
      return std::nullopt;
    return rec;
  }

  GerritFetchOptions options_;
  detail::SplitUrl url_;
  httplib::Client client_;
  httplib::Headers headers_;
};

/// Fetches reviews and returns them in the archive format.
inline std::string fetch_reviews(const GerritFetchOptions &options) {
  GerritClient client(options);
  return serialize_review_archive(client.fetch());
}

} // namespace conflens

#endif // CONFLENS_GERRIT_HPP_
