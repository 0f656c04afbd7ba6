#ifndef CONFLENS_TESTS_FIXTURES_HPP_
#define CONFLENS_TESTS_FIXTURES_HPP_

// Synthetic review corpora with known shape. The shipped files under
// data/fixtures are produced by these generators (see make_fixtures.cpp).

#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "conflens/review.hpp"

namespace fixtures {

using namespace conflens;

inline Timestamp day(int n) {
  using namespace std::chrono;
  return sys_days{year{2016} / January / 1} + days{n} + hours{9};
}

inline FileDiff new_file(const std::string &path, const std::vector<std::string> &lines) {
  FileDiff f{path, {}};
  for (const auto &l : lines)
    f.lines.push_back({LineOp::added, l});
  return f;
}

inline std::string num(int i) { return std::to_string(i); }

// Code that follows the project's shared idioms. Only a version string
// differs between reviews.
inline std::vector<std::string> idiomatic(const std::string &ext, int i) {
  if (ext == ".py")
    return {"import json",
            "import sys",
            "VERSION = \"1." + num(i) + "\"",
            "def load_config(path):",
            "    with open(path) as handle:",
            "        return json.load(handle)",
            "class Handler(object):",
            "    def __init__(self, conf):",
            "        self.conf = conf",
            "    def run(self, args):",
            "        if args.verbose:",
            "            print(self.conf)",
            "        return 0",
            "def main(argv):",
            "    conf = load_config(argv[0])",
            "    return Handler(conf).run(argv)",
            "if __name__ == \"__main__\":",
            "    sys.exit(main(sys.argv[1:]))"};
  if (ext == ".js")
    return {"'use strict';",
            "const VERSION = '1." + num(i) + "';",
            "function loadConfig(path) {",
            "  return JSON.parse(fs.readFileSync(path, 'utf8'));",
            "}",
            "class Handler {",
            "  constructor(conf) {",
            "    this.conf = conf;",
            "  }",
            "  run(args) {",
            "    if (args.verbose) {",
            "      console.log(this.conf);",
            "    }",
            "    return 0;",
            "  }",
            "}",
            "module.exports = { loadConfig, Handler };"};
  return {"#!/bin/bash",
          "set -euo pipefail",
          "VERSION=1." + num(i),
          "CONF_DIR=/etc/service/conf",
          "if [ -f \"$CONF_DIR/service.conf\" ]; then",
          "  source \"$CONF_DIR/service.conf\"",
          "fi",
          "for f in \"$CONF_DIR\"/*.d; do",
          "  echo \"loading $f\"",
          "done",
          "exit 0"};
}

// Working code written without the idioms: fresh names everywhere.
inline std::vector<std::string> unidiomatic(const std::string &ext, int i) {
  const auto s = num(i);
  if (ext == ".py")
    return {"def calc" + s + "_go(p" + s + ", q" + s + "):",
            "  t" + s + " = p" + s + " + q" + s + " * " + num(i + 7),
            "  for k" + s + " in range(q" + s + "): t" + s + " -= k" + s,
            "  return t" + s,
            "z" + s + "_items = [calc" + s + "_go(a" + s + ", " + num(i * 3 + 1) + ") for a" + s +
                " in range(" + num(i + 2) + ")]",
            "print(sum(z" + s + "_items), 'done" + s + "')"};
  if (ext == ".js")
    return {"var tmp" + s + " = require('./lib" + s + "')",
            "var out" + s + " = tmp" + s + ".make" + s + "(" + num(i + 5) + ")",
            "for (var j" + s + " = 0; j" + s + " < out" + s + ".length; j" + s + "++) out" + s +
                "[j" + s + "] *= " + num(i + 1),
            "exports.res" + s + " = out" + s};
  return {"D" + s + "=/opt/x" + s,
          "mkdir -p $D" + s + "/cache" + s,
          "cp -r build" + s + "/* $D" + s + "/",
          "ls $D" + s + " | wc -l > /tmp/n" + s};
}

/// Ten accepted reviews. Revision 1 of each file ignores the idioms;
/// the final revision adopts them.
inline std::vector<ReviewRecord> rq1_records() {
  std::vector<ReviewRecord> out;
  for (int i = 0; i < 10; ++i) {
    ReviewRecord r{"rq1-" + num(i + 1), ReviewStatus::accepted, {}};
    PatchRevision first{1, day(2 * i), {}};
    PatchRevision last{2, day(2 * i + 1), {}};
    for (const std::string ext : {".py", ".js", ".sh"}) {
      const auto dir = ext == ".py" ? "svc/" : ext == ".js" ? "web/" : "tools/";
      const auto path = dir + std::string("mod") + num(i) + ext;
      first.files.push_back(new_file(path, unidiomatic(ext, i)));
      last.files.push_back(new_file(path, idiomatic(ext, i)));
    }
    r.revisions = {first, last};
    out.push_back(std::move(r));
  }
  return out;
}

/// Six accepted reviews that follow the idioms and four abandoned ones that
/// do not.
inline std::vector<ReviewRecord> rq2_records() {
  std::vector<ReviewRecord> out;
  for (int i = 0; i < 10; ++i) {
    const bool accepted = i % 5 < 3;
    ReviewRecord r{"rq2-" + num(i + 1),
                   accepted ? ReviewStatus::accepted : ReviewStatus::abandoned, {}};
    PatchRevision rev{1, day(i), {}};
    for (const std::string ext : {".py", ".js"}) {
      const auto path = "src/part" + num(i) + ext;
      rev.files.push_back(new_file(path, accepted ? idiomatic(ext, i) : unidiomatic(ext, i)));
    }
    r.revisions = {rev};
    out.push_back(std::move(r));
  }
  return out;
}

// The ten production rules of the deterministic grammar, applied in cycle.
inline const std::vector<std::string> &grammar_rules() {
  static const std::vector<std::string> rules{
      "value = read_input(stream)",
      "if value > limit:",
      "    value = limit",
      "total = total + value",
      "count = count + 1",
      "while count < size:",
      "    count = step(count)",
      "result.append(total)",
      "log.debug(result)",
      "stream = next_stream(stream)"};
  return rules;
}

/// Expands the grammar from its first rule; files differ only in length.
inline std::vector<std::string> grammar_program(int lines) {
  std::vector<std::string> out;
  const auto &rules = grammar_rules();
  for (int k = 0; k < lines; ++k)
    out.push_back(rules[static_cast<std::size_t>(k % 10)]);
  return out;
}

inline std::vector<std::string> random_text(std::uint32_t seed, int words) {
  static const char *vocab[] = {
      "the",     "service", "config",   "user",    "deploy",  "node",    "cluster", "network",
      "storage", "volume",  "image",    "policy",  "quota",   "tenant",  "project", "region",
      "zone",    "backup",  "restore",  "upgrade", "release", "note",    "install", "guide",
      "example", "option",  "default",  "value",   "setting", "driver",  "plugin",  "agent",
      "server",  "client",  "request",  "response", "token",  "auth",    "role",    "group",
      "metric",  "alarm",   "event",    "queue",   "worker",  "task",    "job",     "log",
      "debug",   "error",   "warning",  "info",    "see",     "also",    "when",    "then",
      "must",    "should",  "may",      "never"};
  constexpr std::uint32_t vocab_size = sizeof vocab / sizeof vocab[0];
  std::mt19937 rng(seed);
  std::vector<std::string> lines;
  std::string line;
  for (int w = 0; w < words; ++w) {
    if (!line.empty())
      line += ' ';
    line += vocab[rng() % vocab_size];
    if (w % 12 == 11) {
      lines.push_back(line);
      line.clear();
    }
  }
  if (!line.empty())
    lines.push_back(line);
  return lines;
}

/// Eight accepted reviews, each adding one grammar-generated .py file and one
/// 200-word random .txt document.
inline std::vector<ReviewRecord> pq2_records() {
  std::vector<ReviewRecord> out;
  for (int i = 0; i < 8; ++i) {
    ReviewRecord r{"pq2-" + num(i + 1), ReviewStatus::accepted, {}};
    PatchRevision rev{1, day(i), {}};
    rev.files.push_back(new_file("app/gen" + num(i) + ".py", grammar_program(40 + 5 * i)));
    rev.files.push_back(
        new_file("doc/notes" + num(i) + ".txt", random_text(1000u + static_cast<unsigned>(i), 200)));
    r.revisions = {rev};
    out.push_back(std::move(r));
  }
  return out;
}

/// Ten accepted reviews whose single Python diff replaces one set of
/// constructs with another. Each syntax class keeps at least three distinct
/// tokens on both the added and the removed side.
inline std::vector<ReviewRecord> rewrite_records() {
  std::vector<ReviewRecord> out;
  for (int i = 0; i < 10; ++i) {
    ReviewRecord r{"rewrite-" + num(i + 1), ReviewStatus::accepted, {}};
    FileDiff f{"lib/unit" + num(i) + ".py", {{LineOp::unchanged, "VERSION = " + num(i)}}};
    for (const char *l : {"for k in range(n): total -= k * 2", "while x < y: x += 1; y = y % 3",
                          "assert a[0], b[1:2]; del c[3]", "lambda q: q ** 2 // 5"})
      f.lines.push_back({LineOp::removed, l});
    for (const char *l : {"def run(self): return self.conf.value", "import os.path as osp",
                          "class A(B): pass", "if x == y and not z: y != z"})
      f.lines.push_back({LineOp::added, l});
    r.revisions = {{1, day(i), {f}}};
    out.push_back(std::move(r));
  }
  return out;
}

inline FileDiff edited_file(const std::string &path, int added, int removed, int unchanged) {
  FileDiff f{path, {}};
  for (int k = 0; k < unchanged; ++k)
    f.lines.push_back({LineOp::unchanged, "keep " + num(k)});
  for (int k = 0; k < removed; ++k)
    f.lines.push_back({LineOp::removed, "old " + num(k)});
  for (int k = 0; k < added; ++k)
    f.lines.push_back({LineOp::added, "new " + num(k)});
  return f;
}

/// Twelve reviews where programming files take most of the churn.
inline std::vector<ReviewRecord> churn_records() {
  std::vector<ReviewRecord> out;
  for (int i = 0; i < 12; ++i) {
    ReviewRecord r{"churn-" + num(i + 1), ReviewStatus::accepted, {}};
    PatchRevision rev{1, day(i), {}};
    rev.files.push_back(edited_file("nova/api" + num(i) + ".py", 20 + 3 * i, 5 + i % 4, 10));
    if (i % 3 != 2)
      rev.files.push_back(edited_file("etc/conf" + num(i) + ".yaml", 2 + i % 3, 1, 4));
    if (i % 2 == 0)
      rev.files.push_back(edited_file("doc/guide" + num(i) + ".rst", 1 + i % 5, 0, 3));
    if (i % 4 == 0)
      rev.files.push_back(edited_file("Makefile", 1, 1, 2));
    r.revisions = {rev};
    if (i % 3 == 0) {
      PatchRevision second{2, day(i) + std::chrono::hours(5), {}};
      second.files.push_back(edited_file("nova/api" + num(i) + ".py", 3, 2, 30));
      r.revisions.push_back(second);
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random generators for property tests.

inline std::string random_line(std::mt19937 &rng) {
  static const char *pieces[] = {"x", "=", "1", " ", "\t", "\"q\"", "\\", "é", "{", "}", "#c",
                                 "/*", "*/", "'", "def", "ünï", "\r", "", "a b", "%"};
  std::string s;
  const auto n = rng() % 6;
  for (unsigned k = 0; k < n; ++k)
    s += pieces[rng() % (sizeof pieces / sizeof pieces[0])];
  return s;
}

inline FileDiff random_diff(std::mt19937 &rng, const std::string &path) {
  FileDiff f{path, {}};
  const auto n = rng() % 40;
  for (unsigned k = 0; k < n; ++k)
    f.lines.push_back({static_cast<LineOp>(rng() % 3), random_line(rng)});
  return f;
}

inline ReviewRecord random_record(std::mt19937 &rng, int index) {
  static const char *exts[] = {".py", ".js", ".sh", ".yaml", ".rst", ".txt", ""};
  ReviewRecord r{"r" + num(index) + "-" + num(static_cast<int>(rng() % 1000)),
                 rng() % 2 ? ReviewStatus::accepted : ReviewStatus::abandoned, {}};
  int number = 0;
  const auto revs = 1 + rng() % 3;
  for (unsigned k = 0; k < revs; ++k) {
    number += 1 + static_cast<int>(rng() % 3);
    PatchRevision rev{number, day(static_cast<int>(rng() % 3000)) +
                                  std::chrono::seconds(rng() % 86400),
                      {}};
    const auto files = rng() % 4;
    for (unsigned f = 0; f < files; ++f)
      rev.files.push_back(random_diff(rng, "dir" + num(static_cast<int>(f)) + "/file" +
                                               exts[rng() % 7]));
    r.revisions.push_back(std::move(rev));
  }
  return r;
}

} // namespace fixtures

#endif // CONFLENS_TESTS_FIXTURES_HPP_
