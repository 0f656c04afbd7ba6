#ifndef CONFLENS_TOOLS_CLI_HPP_
#define CONFLENS_TOOLS_CLI_HPP_

// Command-line front end. Exit codes: 0 ok, 1 I/O, 2 domain precondition,
// 64 usage.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "conflens/conflens.hpp"

namespace conflens::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_io = 1;
inline constexpr int exit_domain = 2;
inline constexpr int exit_usage = 64;

namespace fs = std::filesystem;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

inline std::string read_file(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw IoError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path &p, std::string_view data) {
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot write '" + p.string() + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out)
    throw IoError("write failed for '" + p.string() + "'");
}

inline std::string utc_now(bool compact) {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  auto s = format_timestamp(now);
  if (!compact)
    return s;
  std::string out;
  for (char c : s)
    if (c != '-' && c != ':')
      out += c;
  return out;
}

inline fs::path cache_dir() {
  if (const char *env = std::getenv("CONFLENS_CACHE"); env && *env)
    return env;
  if (const char *xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg)
    return fs::path(xdg) / "conflens";
  if (const char *home = std::getenv("HOME"); home && *home)
    return fs::path(home) / ".cache" / "conflens";
  return fs::temp_directory_path() / "conflens-cache";
}

/// Records what produced a set of outputs. Outputs are a function of
/// (archive digest, config hash, tool version).
struct RunManifest {
  std::string command;
  nlohmann::ordered_json config;
  std::string archive_digest;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> outputs;
  bool cache_hit = false;

  std::string config_hash() const { return sha256_hex(config.dump()); }

  std::string cache_key() const {
    return sha256_hex(command + '\n' + archive_digest + '\n' + config_hash() + '\n' +
                      version_string);
  }

  std::string to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config"] = config;
    j["config_hash"] = config_hash();
    j["archive_digest"] = archive_digest;
    j["tool_version"] = version_string;
    j["cache_key"] = cache_key();
    j["cache_hit"] = cache_hit;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["outputs"] = outputs;
    return j.dump(2) + "\n";
  }
};

inline std::optional<std::string> cache_lookup(const std::string &bucket, const std::string &key,
                                               const std::string &suffix) {
  const auto p = cache_dir() / bucket / (key + suffix);
  std::error_code ec;
  if (!fs::exists(p, ec))
    return std::nullopt;
  try {
    return read_file(p);
  } catch (const IoError &) {
    return std::nullopt;
  }
}

inline void cache_store(const std::string &bucket, const std::string &key,
                        const std::string &suffix, std::string_view data, std::ostream &err) {
  try {
    write_file(cache_dir() / bucket / (key + suffix), data);
  } catch (const IoError &e) {
    err << "warning: cache not updated: " << e.what() << '\n';
  }
}

struct LoadedArchive {
  std::vector<ReviewRecord> records;
  std::size_t skipped = 0;
  std::string digest;
};

inline LoadedArchive load_archive(const std::string &path, bool fail_fast, std::ostream &err) {
  const auto text = read_file(path);
  LoadedArchive a;
  a.digest = sha256_hex(text);
  auto res = parse_review_archive(text, fail_fast ? MalformedPolicy::fail_fast
                                                  : MalformedPolicy::skip_and_log);
  for (const auto &s : res.skipped)
    err << "skipped: " << s.reason << '\n';
  a.records = std::move(res.records);
  a.skipped = res.skipped.size();
  return a;
}

/// Parses "A..B" or a single order "N".
inline std::pair<int, int> parse_order_range(const std::string &s) {
  auto to_int = [&](const std::string &t) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(t, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (t.empty() || used != t.size())
      throw UsageError("bad order range '" + s + "'");
    return v;
  };
  const auto dots = s.find("..");
  const int lo = to_int(dots == std::string::npos ? s : s.substr(0, dots));
  const int hi = dots == std::string::npos ? lo : to_int(s.substr(dots + 2));
  if (lo < 1 || hi > max_order || lo > hi)
    throw UsageError("order range must lie within 1.." + std::to_string(max_order));
  return {lo, hi};
}

inline FileKind parse_kind(const std::string &s) {
  if (s == "programming" || s == "prog")
    return FileKind::programming;
  if (s == "configuration" || s == "conf")
    return FileKind::configuration;
  if (s == "documentation" || s == "doc")
    return FileKind::documentation;
  if (s == "other")
    return FileKind::other;
  throw UsageError("unknown kind '" + s + "'");
}

inline std::string normalize_ext(std::string e) {
  for (auto &c : e)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (!e.empty() && e.front() != '.')
    e.insert(e.begin(), '.');
  return e;
}

struct CommonFlags {
  std::string order = "3..9";
  std::string smoothing = "mkn";
  std::string mode = "first_vs_last";
  std::string policy = "loo";
  std::string aggregation = "token_weighted";
  std::vector<std::string> exts;
  std::vector<std::string> kinds;
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  int min_count = 2;

  ExperimentConfig to_config() const {
    ExperimentConfig c;
    std::tie(c.min_order, c.max_order) = parse_order_range(order);
    try {
      c.smoothing = Smoothing::parse(smoothing);
    } catch (const std::invalid_argument &e) {
      throw UsageError(e.what());
    }
    if (c.smoothing.kind == Smoothing::Kind::additive && !(c.smoothing.delta > 0))
      throw UsageError("additive delta must be positive");
    if (mode == "first_vs_last")
      c.mode = SelectionMode::first_vs_last;
    else if (mode == "diff_sides")
      c.mode = SelectionMode::diff_sides_of_final;
    else
      throw UsageError("unknown mode '" + mode + "'");
    if (policy == "loo")
      c.policy = TrainPolicy::loo_accepted;
    else if (policy == "chrono")
      c.policy = TrainPolicy::chronological;
    else
      throw UsageError("unknown train policy '" + policy + "'");
    if (aggregation == "token_weighted")
      c.aggregation = Aggregation::token_weighted;
    else if (aggregation == "file_mean")
      c.aggregation = Aggregation::file_mean;
    else
      throw UsageError("unknown aggregation '" + aggregation + "'");
    for (const auto &e : exts)
      c.extensions.push_back(normalize_ext(e));
    for (const auto &k : kinds)
      c.kinds.push_back(parse_kind(k));
    if (min_count < 1)
      throw UsageError("--min-count must be >= 1");
    c.train.min_count = min_count;
    c.jobs = std::max(1u, jobs);
    c.seed = seed;
    return c;
  }
};

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string input;
  std::string output;
  bool fail_fast = false;
  std::string endpoint;
  std::string query = "status:merged OR status:abandoned";
  int page_size = 100;
  int retries = 3;
  int retry_delay_ms = 500;
  std::vector<std::string> headers;
};

inline int cmd_ingest(const IngestArgs &a, std::ostream &out, std::ostream &err) {
  RunManifest m;
  m.command = "ingest";
  m.started_at = utc_now(false);
  std::vector<ReviewRecord> records;
  std::size_t skipped = 0;
  if (!a.endpoint.empty()) {
    GerritFetchOptions opt;
    opt.endpoint = a.endpoint;
    opt.query = a.query;
    opt.page_size = a.page_size;
    opt.max_retries = a.retries;
    opt.retry_delay = std::chrono::milliseconds(a.retry_delay_ms);
    for (const auto &h : a.headers) {
      const auto colon = h.find(':');
      if (colon == std::string::npos)
        throw UsageError("header must be 'Name: value'");
      auto value = h.substr(colon + 1);
      value.erase(0, value.find_first_not_of(' '));
      opt.headers.emplace_back(h.substr(0, colon), value);
    }
    try {
      GerritClient client(opt);
      records = client.fetch();
    } catch (const FetchError &e) {
      throw IoError(e.what());
    }
    m.config = {{"endpoint", a.endpoint}, {"query", a.query}, {"page_size", a.page_size}};
    m.archive_digest = "";
  } else {
    if (a.input.empty())
      throw UsageError("ingest needs an input file or --endpoint");
    auto loaded = load_archive(a.input, a.fail_fast, err);
    records = std::move(loaded.records);
    skipped = loaded.skipped;
    m.archive_digest = loaded.digest;
    m.config = {{"fail_fast", a.fail_fast}};
  }
  const auto text = serialize_review_archive(records);
  write_file(a.output, text);
  m.outputs = {a.output};
  m.finished_at = utc_now(false);
  write_file(a.output + ".manifest.json", m.to_json());
  out << records.size() << " records, " << skipped << " skipped\n";
  return exit_ok;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string archive;
  std::string output;
  int order = 3;
  std::string smoothing = "mkn";
  std::vector<std::string> exts;
  std::vector<std::string> kinds;
  int min_count = 2;
  bool use_cache = true;
};

inline int cmd_train(const TrainArgs &a, std::ostream &out, std::ostream &err) {
  CommonFlags flags;
  flags.order = std::to_string(a.order);
  flags.smoothing = a.smoothing;
  flags.exts = a.exts;
  flags.kinds = a.kinds;
  flags.min_count = a.min_count;
  const auto config = flags.to_config();

  RunManifest m;
  m.command = "train";
  m.started_at = utc_now(false);
  const auto archive = load_archive(a.archive, false, err);
  m.archive_digest = archive.digest;
  m.config = config_json(config);

  std::string model_text;
  if (auto hit = a.use_cache ? cache_lookup("models", m.cache_key(), ".model") : std::nullopt) {
    model_text = *hit;
    m.cache_hit = true;
  } else {
    NGramCounts counts(a.order);
    std::size_t streams = 0;
    for (const auto &rec : archive.records) {
      if (rec.status != ReviewStatus::accepted)
        continue;
      for (const auto &v : select_review_versions(rec, config.mode).post_files) {
        const auto ext = file_extension(v.path);
        if (!config.extension_selected(ext, {}) || !config.kind_selected(classify_extension(ext)))
          continue;
        counts.add_stream(lex_file(v).texts(), rec.review_id);
        ++streams;
      }
    }
    if (streams == 0 || counts.empty())
      throw PreconditionError("empty training corpus");
    try {
      model_text = serialize_model(NGramModel(counts, config.smoothing, config.train));
    } catch (const std::invalid_argument &e) {
      throw PreconditionError(e.what());
    }
    if (a.use_cache)
      cache_store("models", m.cache_key(), ".model", model_text, err);
  }
  write_file(a.output, model_text);
  m.outputs = {a.output};
  m.finished_at = utc_now(false);
  write_file(a.output + ".manifest.json", m.to_json());
  out << "model written to " << a.output << (m.cache_hit ? " (cached)" : "") << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
  std::string archive;
  std::string experiment;
  std::string out_dir = ".";
  std::string format = "both";
  int k = 3;
  bool use_cache = true;
  CommonFlags flags;
};

inline Report run_experiment(const std::string &name, const std::vector<ReviewRecord> &records,
                             const ExperimentConfig &config, int k) {
  Report r;
  auto require_cells = [&](const EntropyCurve &c) {
    if (c.cells.empty())
      throw PreconditionError(name + ": nothing could be scored");
  };
  if (name == "pq1") {
    r = make_churn_report(churn_by_kind(records));
  } else if (name == "pq2") {
    const auto c = entropy_by_kind(records, config);
    require_cells(c);
    r = make_entropy_report("pq2", c, "kind", "");
  } else if (name == "rq1") {
    const auto c = pre_vs_post_entropy(records, config);
    require_cells(c);
    r = make_entropy_report("rq1", c, "extension", "side");
  } else if (name == "rq2") {
    bool acc = false, abn = false;
    for (const auto &rec : records)
      (rec.status == ReviewStatus::accepted ? acc : abn) = true;
    if (!acc || !abn)
      throw PreconditionError("rq2 needs both accepted and abandoned reviews");
    const auto c = accepted_vs_abandoned(records, config);
    require_cells(c);
    r = make_entropy_report("rq2", c, "extension", "decision");
  } else if (name == "table1") {
    std::vector<TokenStream> streams;
    for (const auto &lr : lex_reviews(records, config))
      for (const auto *side : {&lr.pre, &lr.post})
        for (const auto &s : *side)
          if (config.extension_selected(file_extension(s.path), {}))
            streams.push_back(s);
    r = make_corpus_report(corpus_stats(streams));
  } else if (name == "table3") {
    r = make_syntax_report(syntax_proportions(records, config));
  } else if (name == "table4") {
    r = make_changed_tokens_report(top_changed_tokens(records, k, config), k);
  } else {
    throw UsageError("unknown experiment '" + name + "'");
  }
  r.config = config_json(config);
  if (name == "table4")
    r.config["k"] = k;
  return r;
}

inline int cmd_experiment(const ExperimentArgs &a, std::ostream &out, std::ostream &err) {
  const auto config = a.flags.to_config();
  if (a.format != "csv" && a.format != "json" && a.format != "both")
    throw UsageError("--format must be csv, json or both");
  if (a.k < 1)
    throw UsageError("--k must be >= 1");

  RunManifest m;
  m.command = "experiment " + a.experiment;
  m.started_at = utc_now(false);
  const auto archive = load_archive(a.archive, false, err);
  m.archive_digest = archive.digest;
  m.config = config_json(config);
  m.config["experiment"] = a.experiment;
  m.config["k"] = a.k;

  std::string csv, json;
  const auto key = m.cache_key();
  auto cached_csv = a.use_cache ? cache_lookup("reports", key, ".csv") : std::nullopt;
  auto cached_json = a.use_cache ? cache_lookup("reports", key, ".json") : std::nullopt;
  if (cached_csv && cached_json) {
    csv = *cached_csv;
    json = *cached_json;
    m.cache_hit = true;
  } else {
    const auto report = run_experiment(a.experiment, archive.records, config, a.k);
    for (const auto &w : report.warnings)
      err << "warning: " << w << '\n';
    csv = report.to_csv();
    json = report.to_json();
    if (a.use_cache) {
      cache_store("reports", key, ".csv", csv, err);
      cache_store("reports", key, ".json", json, err);
    }
  }

  const auto stamp = utc_now(true);
  const fs::path dir(a.out_dir);
  const auto base = a.experiment + "_" + stamp;
  if (a.format != "json") {
    write_file(dir / (base + ".csv"), csv);
    m.outputs.push_back((dir / (base + ".csv")).string());
  }
  if (a.format != "csv") {
    write_file(dir / (base + ".json"), json);
    m.outputs.push_back((dir / (base + ".json")).string());
  }
  m.finished_at = utc_now(false);
  write_file(dir / (base + ".manifest.json"), m.to_json());
  for (const auto &o : m.outputs)
    out << o << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
  std::string model;
  std::vector<std::string> files;
};

inline int cmd_score(const ScoreArgs &a, std::ostream &out, std::ostream &) {
  const auto model = deserialize_model(read_file(a.model));
  for (const auto &f : a.files) {
    const auto ts = lex_file(f, Side::post, read_file(f));
    try {
      const auto rep = cross_entropy(model, ts.texts());
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", rep.bits_per_token);
      out << f << '\t' << buf << '\t' << rep.token_count << '\n';
    } catch (const std::exception &e) {
      throw PreconditionError(f + ": " + e.what());
    }
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------

/// Runs the CLI on argv-style arguments (args[0] is the program name).
inline int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Measure coding-pattern conformance of code review patches"};
  app.name("conflens");
  app.set_version_flag("--version", std::string(version_string));
  app.require_subcommand(1);

  IngestArgs ingest;
  auto *ingest_cmd = app.add_subcommand("ingest", "Validate or fetch a review archive");
  ingest_cmd->add_option("input", ingest.input, "Archive file to validate");
  ingest_cmd->add_option("-o,--output", ingest.output, "Validated archive path")->required();
  ingest_cmd->add_flag("--fail-fast", ingest.fail_fast, "Stop at the first malformed record");
  ingest_cmd->add_option("--endpoint", ingest.endpoint, "Gerrit base URL to fetch from");
  ingest_cmd->add_option("--query", ingest.query, "Gerrit change query");
  ingest_cmd->add_option("--page-size", ingest.page_size)->check(CLI::PositiveNumber);
  ingest_cmd->add_option("--retries", ingest.retries)->check(CLI::NonNegativeNumber);
  ingest_cmd->add_option("--retry-delay-ms", ingest.retry_delay_ms)->check(CLI::NonNegativeNumber);
  ingest_cmd->add_option("--header", ingest.headers, "Extra request header 'Name: value'");

  TrainArgs train;
  auto *train_cmd = app.add_subcommand("train", "Train an n-gram model on accepted reviews");
  train_cmd->add_option("archive", train.archive)->required();
  train_cmd->add_option("-o,--output", train.output, "Model path")->required();
  train_cmd->add_option("--order", train.order)->check(CLI::Range(1, max_order));
  train_cmd->add_option("--smoothing", train.smoothing, "mkn | additive=<delta> | mle");
  train_cmd->add_option("--ext", train.exts);
  train_cmd->add_option("--kind", train.kinds);
  train_cmd->add_option("--min-count", train.min_count);
  bool train_no_cache = false;
  train_cmd->add_flag("--no-cache", train_no_cache);

  ExperimentArgs exp;
  auto *exp_cmd = app.add_subcommand("experiment", "Run an experiment and write reports");
  exp_cmd->add_option("archive", exp.archive)->required();
  exp_cmd->add_option("experiment", exp.experiment, "pq1|pq2|rq1|rq2|table1|table3|table4")
      ->required()
      ->check(CLI::IsMember({"pq1", "pq2", "rq1", "rq2", "table1", "table3", "table4"}));
  exp_cmd->add_option("--out-dir", exp.out_dir);
  exp_cmd->add_option("--format", exp.format, "csv | json | both");
  exp_cmd->add_option("--k", exp.k, "Ranks per class for table4");
  exp_cmd->add_option("--order", exp.flags.order, "Order range A..B");
  exp_cmd->add_option("--smoothing", exp.flags.smoothing);
  exp_cmd->add_option("--mode", exp.flags.mode, "first_vs_last | diff_sides");
  exp_cmd->add_option("--train-policy", exp.flags.policy, "loo | chrono");
  exp_cmd->add_option("--aggregation", exp.flags.aggregation, "token_weighted | file_mean");
  exp_cmd->add_option("--ext", exp.flags.exts);
  exp_cmd->add_option("--kind", exp.flags.kinds);
  exp_cmd->add_option("--jobs", exp.flags.jobs);
  exp_cmd->add_option("--seed", exp.flags.seed);
  exp_cmd->add_option("--min-count", exp.flags.min_count);
  bool exp_no_cache = false;
  exp_cmd->add_flag("--no-cache", exp_no_cache);

  ScoreArgs score;
  auto *score_cmd = app.add_subcommand("score", "Cross-entropy of files under a model");
  score_cmd->add_option("model", score.model)->required();
  score_cmd->add_option("files", score.files)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty())
    reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForVersion &) {
    out << version_string << '\n';
    return exit_ok;
  } catch (const CLI::Success &) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError &e) {
    err << "usage error: " << e.what() << '\n';
    return exit_usage;
  }

  try {
    if (*ingest_cmd)
      return cmd_ingest(ingest, out, err);
    if (*train_cmd) {
      train.use_cache = !train_no_cache;
      return cmd_train(train, out, err);
    }
    if (*exp_cmd) {
      exp.use_cache = !exp_no_cache;
      return cmd_experiment(exp, out, err);
    }
    if (*score_cmd)
      return cmd_score(score, out, err);
  } catch (const UsageError &e) {
    err << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const IoError &e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const ArchiveError &e) {
    err << "error: " << e.what() << '\n';
    return exit_domain;
  } catch (const PreconditionError &e) {
    err << "error: " << e.what() << '\n';
    return exit_domain;
  } catch (const ModelFormatError &e) {
    err << "error: " << e.what() << '\n';
    return exit_domain;
  }
  return exit_usage;
}

} // namespace conflens::cli

#endif // CONFLENS_TOOLS_CLI_HPP_
