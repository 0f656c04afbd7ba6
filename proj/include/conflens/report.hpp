#ifndef CONFLENS_REPORT_HPP_
#define CONFLENS_REPORT_HPP_

// Tabular experiment reports, rendered as CSV (one row per cell) or JSON.
//
// JSON layout (schema_version 1):
//   {"schema_version": 1, "experiment": str, "config": {...},
//    "summary": {...}, "columns": [str], "rows": [{column: value}],
//    "warnings": [str]}
// Absent values are empty in CSV and null in JSON.

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "conflens/analysis.hpp"
#include "conflens/corpus_stats.hpp"

namespace conflens {

inline constexpr int report_schema_version = 1;

using Cell = std::variant<std::monostate, std::string, std::int64_t, double>;

struct Report {
  std::string experiment;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::vector<std::string> warnings;

  std::string to_csv() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < columns.size(); ++i)
      out << (i ? "," : "") << csv_field(columns[i]);
    out << '\n';
    for (const auto &row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out << (i ? "," : "") << csv_cell(row[i]);
      out << '\n';
    }
    return out.str();
  }

  nlohmann::ordered_json json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = report_schema_version;
    j["experiment"] = experiment;
    j["config"] = config;
    j["summary"] = summary;
    j["columns"] = columns;
    auto rows_json = nlohmann::ordered_json::array();
    for (const auto &row : rows) {
      nlohmann::ordered_json r = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < row.size(); ++i)
        r[columns[i]] = cell_json(row[i]);
      rows_json.push_back(std::move(r));
    }
    j["rows"] = std::move(rows_json);
    j["warnings"] = warnings;
    return j;
  }

  std::string to_json() const { return json().dump(2) + "\n"; }

private:
  static std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos)
      return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"')
        out += '"';
      out += c;
    }
    return out + "\"";
  }

  static std::string csv_cell(const Cell &c) {
    if (std::holds_alternative<std::monostate>(c))
      return {};
    if (const auto *s = std::get_if<std::string>(&c))
      return csv_field(*s);
    if (const auto *i = std::get_if<std::int64_t>(&c))
      return std::to_string(*i);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", std::get<double>(c));
    return buf;
  }

  static nlohmann::ordered_json cell_json(const Cell &c) {
    if (std::holds_alternative<std::monostate>(c))
      return nullptr;
    if (const auto *s = std::get_if<std::string>(&c))
      return *s;
    if (const auto *i = std::get_if<std::int64_t>(&c))
      return *i;
    return std::get<double>(c);
  }
};

inline nlohmann::ordered_json config_json(const ExperimentConfig &c) {
  nlohmann::ordered_json j;
  j["orders"] = {c.min_order, c.max_order};
  j["extensions"] = c.extensions;
  auto kinds = nlohmann::ordered_json::array();
  for (auto k : c.kinds)
    kinds.push_back(to_string(k));
  j["kinds"] = kinds;
  j["mode"] = to_string(c.mode);
  j["train_policy"] = to_string(c.policy);
  j["smoothing"] = c.smoothing.to_string();
  j["min_count"] = c.train.min_count;
  j["aggregation"] = to_string(c.aggregation);
  j["seed"] = c.seed;
  return j;
}

inline Report make_entropy_report(const std::string &experiment, const EntropyCurve &curve,
                                  const std::string &label_column,
                                  const std::string &group_column) {
  Report r;
  r.experiment = experiment;
  r.columns = {label_column};
  if (!group_column.empty())
    r.columns.push_back(group_column);
  for (const char *c : {"order", "bits_per_token", "token_weighted_bits", "file_mean_bits",
                        "tokens", "files"})
    r.columns.emplace_back(c);
  for (const auto &c : curve.cells) {
    std::vector<Cell> row{c.label};
    if (!group_column.empty())
      row.emplace_back(c.group);
    row.emplace_back(std::int64_t{c.order});
    row.emplace_back(c.bits_per_token);
    row.emplace_back(c.token_weighted_bits);
    row.emplace_back(c.file_mean_bits);
    row.emplace_back(static_cast<std::int64_t>(c.token_count));
    row.emplace_back(static_cast<std::int64_t>(c.file_count));
    r.rows.push_back(std::move(row));
  }
  r.warnings = curve.warnings;
  return r;
}

inline Report make_churn_report(const ChurnByKindResult &res) {
  Report r;
  r.experiment = "pq1";
  r.columns = {"review_id",     "total_churn",   "programming",
               "configuration", "documentation", "other"};
  for (const auto &row : res.rows)
    r.rows.push_back({row.review_id, static_cast<std::int64_t>(row.total_churn),
                      row.programming, row.configuration, row.documentation, row.other});
  auto means = nlohmann::ordered_json::object();
  for (const auto &[k, v] : res.mean_proportion)
    means[to_string(k)] = v;
  auto kinds = nlohmann::ordered_json::array();
  for (auto k : res.tested_kinds)
    kinds.push_back(to_string(k));
  r.summary["mean_proportion"] = means;
  r.summary["kruskal_wallis"] = {{"kinds", kinds},
                                 {"h", res.test.h},
                                 {"df", res.test.degrees_of_freedom},
                                 {"p_value", res.test.p_value},
                                 {"group_sizes", res.test.group_sizes}};
  for (const auto &id : res.skipped)
    r.warnings.push_back("review " + id + " has zero churn; no proportion row");
  return r;
}

inline Report make_syntax_report(const std::vector<SyntaxProportionRow> &rows) {
  Report r;
  r.experiment = "table3";
  r.columns = {"extension", "side", "class", "count", "total", "percent"};
  for (const auto &row : rows) {
    std::vector<Cell> cells{row.extension, row.side, std::string(to_string(row.cls)),
                            static_cast<std::int64_t>(row.count),
                            static_cast<std::int64_t>(row.total)};
    if (row.percent)
      cells.emplace_back(*row.percent);
    else
      cells.emplace_back(std::monostate{});
    r.rows.push_back(std::move(cells));
  }
  return r;
}

inline Report make_changed_tokens_report(const std::vector<ChangedTokenRow> &rows, int k) {
  Report r;
  r.experiment = "table4";
  r.columns = {"extension", "side", "class", "rank", "token", "count", "percent", "stability"};
  for (const auto &row : rows)
    r.rows.push_back({row.extension, row.side, std::string(to_string(row.cls)),
                      std::int64_t{row.rank}, row.token, static_cast<std::int64_t>(row.count),
                      row.percent, std::string(row.stable ? "stable" : "changed")});
  r.summary["k"] = k;
  return r;
}

inline Report make_corpus_report(const std::vector<CorpusStatsRow> &rows) {
  Report r;
  r.experiment = "table1";
  r.columns = {"extension", "revisions", "files", "unique_tokens", "tokens"};
  for (const auto &row : rows)
    r.rows.push_back({row.extension, static_cast<std::int64_t>(row.revisions),
                      static_cast<std::int64_t>(row.files),
                      static_cast<std::int64_t>(row.unique_tokens),
                      static_cast<std::int64_t>(row.tokens)});
  return r;
}

} // namespace conflens

#endif // CONFLENS_REPORT_HPP_
