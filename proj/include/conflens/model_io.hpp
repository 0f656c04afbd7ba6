#ifndef CONFLENS_MODEL_IO_HPP_
#define CONFLENS_MODEL_IO_HPP_

// Text serialization of trained models.
//
//   conflens-ngram-model 1
//   order <n>
//   smoothing <mle|mkn|additive=delta>
//   min_count <k>
//   ngrams <total lines that follow>
//   <tok> <tok> ...\t<count>
//
// N-gram lines hold the vocabulary-mapped counts, sorted by length and then
// lexicographically. Tokens are escaped: "\\" backslash, "\s" space,
// "\t" tab, "\n" newline, "\r" carriage return. Reading a file and writing it
// back reproduces it byte for byte.

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "conflens/ngram.hpp"

namespace conflens {

class ModelFormatError : public std::runtime_error {
public:
  ModelFormatError(const std::string &what, int line)
      : std::runtime_error("model file: " + what + " at line " +
                           std::to_string(line)) {}
};

inline std::string escape_token(std::string_view t) {
  std::string out;
  out.reserve(t.size());
  for (char c : t) {
    switch (c) {
    case '\\':
      out += "\\\\";
      break;
    case ' ':
      out += "\\s";
      break;
    case '\t':
      out += "\\t";
      break;
    case '\n':
      out += "\\n";
      break;
    case '\r':
      out += "\\r";
      break;
    default:
      out += c;
    }
  }
  return out;
}

inline std::string unescape_token(std::string_view t) {
  std::string out;
  out.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] != '\\' || i + 1 == t.size()) {
      out += t[i];
      continue;
    }
    switch (t[++i]) {
    case 's':
      out += ' ';
      break;
    case 't':
      out += '\t';
      break;
    case 'n':
      out += '\n';
      break;
    case 'r':
      out += '\r';
      break;
    default:
      out += t[i];
    }
  }
  return out;
}

inline void write_model(std::ostream &out, const NGramModel &model) {
  const auto &counts = model.counts();
  std::size_t lines = 0;
  for (int k = 1; k <= model.order(); ++k)
    lines += counts.counts(k).size();
  out << "conflens-ngram-model 1\n"
      << "order " << model.order() << '\n'
      << "smoothing " << model.smoothing().to_string() << '\n'
      << "min_count " << model.options().min_count << '\n'
      << "ngrams " << lines << '\n';
  for (int k = 1; k <= model.order(); ++k) {
    for (const auto &[g, n] : counts.counts(k)) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (i)
          out << ' ';
        out << escape_token(g[i]);
      }
      out << '\t' << n << '\n';
    }
  }
}

inline std::string serialize_model(const NGramModel &model) {
  std::ostringstream out;
  write_model(out, model);
  return out.str();
}

inline NGramModel read_model(std::istream &in) {
  std::string line;
  int lineno = 0;
  auto next = [&](const char *what) {
    if (!std::getline(in, line))
      throw ModelFormatError(std::string("missing ") + what, lineno + 1);
    ++lineno;
  };
  auto value_of = [&](const std::string &key) {
    next(key.c_str());
    if (line.rfind(key + ' ', 0) != 0)
      throw ModelFormatError("expected '" + key + "'", lineno);
    return line.substr(key.size() + 1);
  };

  next("header");
  if (line != "conflens-ngram-model 1")
    throw ModelFormatError("unsupported header", lineno);
  int order = 0, min_count = 0;
  std::size_t total = 0;
  Smoothing smoothing;
  try {
    order = std::stoi(value_of("order"));
    smoothing = Smoothing::parse(value_of("smoothing"));
    min_count = std::stoi(value_of("min_count"));
    total = std::stoull(value_of("ngrams"));
  } catch (const ModelFormatError &) {
    throw;
  } catch (const std::exception &e) {
    throw ModelFormatError(e.what(), lineno);
  }
  if (order < 1 || order > max_order)
    throw ModelFormatError("order out of range", 2);

  NGramCounts counts(order);
  for (std::size_t i = 0; i < total; ++i) {
    next("n-gram line");
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos)
      throw ModelFormatError("missing count", lineno);
    NGram g;
    std::istringstream toks(line.substr(0, tab));
    std::string t;
    while (toks >> t)
      g.push_back(unescape_token(t));
    const auto digits = line.substr(tab + 1);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw ModelFormatError("bad count", lineno);
    std::uint64_t n = 0;
    try {
      n = std::stoull(digits);
    } catch (const std::exception &) {
      throw ModelFormatError("bad count", lineno);
    }
    if (g.empty() || static_cast<int>(g.size()) > order || n == 0)
      throw ModelFormatError("bad n-gram", lineno);
    counts.add(g, n);
  }
  if (std::getline(in, line) && !line.empty())
    throw ModelFormatError("trailing data", lineno + 1);
  try {
    return NGramModel(counts, smoothing, TrainOptions{min_count});
  } catch (const std::invalid_argument &e) {
    throw ModelFormatError(e.what(), 1);
  }
}

inline NGramModel deserialize_model(const std::string &text) {
  std::istringstream in(text);
  return read_model(in);
}

} // namespace conflens

#endif // CONFLENS_MODEL_IO_HPP_
