#ifndef CONFLENS_TOKEN_SETS_HPP_
#define CONFLENS_TOKEN_SETS_HPP_

// Keyword / operator / separator lists per language.
//
// The same lists ship as plain-text files under data/tokens/ and can be
// loaded at run time with load_token_sets(). File format:
//
//   # comment line
//   [keywords]
//   if then else
//   [operators]
//   = - /
//   [separators]
//
// Entries are whitespace separated. A line is a comment only when its first
// non-blank character is '#', so '#' may still appear as an entry mid-line.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conflens {

enum class Language { python, javascript, shell, generic };

inline const char *to_string(Language l) {
  switch (l) {
  case Language::python:
    return "python";
  case Language::javascript:
    return "javascript";
  case Language::shell:
    return "shell";
  case Language::generic:
    return "generic";
  }
  return "generic";
}

struct TokenSets {
  std::set<std::string> keywords;
  std::set<std::string> operators;
  std::set<std::string> separators;

  bool empty() const {
    return keywords.empty() && operators.empty() && separators.empty();
  }

  /// All entries that are not identifier-shaped, longest first. The lexers
  /// use this for maximal-munch punctuation scanning.
  std::vector<std::string> punctuation() const {
    std::vector<std::string> out;
    auto add = [&](const std::set<std::string> &s) {
      for (const auto &t : s) {
        const auto c = static_cast<unsigned char>(t.front());
        if (!(std::isalnum(c) || c == '_'))
          out.push_back(t);
      }
    };
    add(keywords);
    add(operators);
    add(separators);
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
      return a.size() != b.size() ? a.size() > b.size() : a < b;
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  friend bool operator==(const TokenSets &, const TokenSets &) = default;
};

inline TokenSets parse_token_sets(std::istream &in) {
  TokenSets sets;
  std::set<std::string> *current = nullptr;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#')
      continue;
    // A header is a whole line "[name]"; entries such as "[[" stay entries.
    const auto last = line.find_last_not_of(" \t\r");
    const auto body = line.substr(first, last - first + 1);
    if (body.size() > 2 && body.front() == '[' && body.back() == ']' &&
        std::all_of(body.begin() + 1, body.end() - 1,
                    [](char c) { return std::isalpha(static_cast<unsigned char>(c)); })) {
      const auto name = body.substr(1, body.size() - 2);
      if (name == "keywords")
        current = &sets.keywords;
      else if (name == "operators")
        current = &sets.operators;
      else if (name == "separators")
        current = &sets.separators;
      else
        throw std::runtime_error("token sets: unknown section '" + name +
                                 "' at line " + std::to_string(lineno));
      continue;
    }
    if (!current)
      throw std::runtime_error("token sets: entry outside a section at line " +
                               std::to_string(lineno));
    std::istringstream words(line);
    std::string w;
    while (words >> w)
      current->insert(w);
  }
  return sets;
}

inline TokenSets parse_token_sets(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_token_sets(in);
}

inline TokenSets load_token_sets(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open token set file '" + path + "'");
  return parse_token_sets(in);
}

namespace builtin_tokens {

// Keep these in sync with data/tokens/*.tokens (checked by the test suite).

inline constexpr std::string_view python = R"(# Python 3 token classes.
# and/in/is/not/or are classified as operators, not keywords.
[keywords]
False None True as assert async await break class continue def del elif else
except finally for from global if import lambda nonlocal pass raise return try
while with yield
[operators]
and in is not or
+ - * ** / // % @ << >> & | ^ ~ < > <= >= == != <>
= += -= *= /= //= %= @= &= |= ^= >>= <<= **= :=
[separators]
( ) [ ] { } , : . ; -> ...
)";

inline constexpr std::string_view javascript = R"(# JavaScript (ES2020) token classes.
[keywords]
await break case catch class const continue debugger default delete do else
enum export extends false finally for function if import in instanceof let new
null return static super switch this throw true try typeof var void while with
yield
[operators]
= == === != !== < > <= >= + - * / % ** ++ -- << >> >>> & | ^ ! ~ && || ?? ?
+= -= *= /= %= **= <<= >>= >>>= &= |= ^= &&= ||= ??= =>
[separators]
( ) [ ] { } ; , . ... : ?.
)";

inline constexpr std::string_view shell = R"(# POSIX/bash shell token classes.
# Shell has no separator class. Braces, [[ ]] and ! are reserved words.
[keywords]
if then else elif fi case esac for select while until do done in function
time coproc { } [[ ]] !
[operators]
| || & && ; ;; ;& ;;& < > >> << <<< <<- <& >& &> &>> <> >| |& ( )
$ = == != += =~ - + * / % . , : ~ @ ? ^ [ ] ` #
[separators]
)";

} // namespace builtin_tokens

inline const TokenSets &default_token_sets(Language lang) {
  static const TokenSets py = parse_token_sets(builtin_tokens::python);
  static const TokenSets js = parse_token_sets(builtin_tokens::javascript);
  static const TokenSets sh = parse_token_sets(builtin_tokens::shell);
  static const TokenSets generic{};
  switch (lang) {
  case Language::python:
    return py;
  case Language::javascript:
    return js;
  case Language::shell:
    return sh;
  case Language::generic:
    return generic;
  }
  return generic;
}

} // namespace conflens

#endif // CONFLENS_TOKEN_SETS_HPP_
