#ifndef CONFLENS_LEXER_HPP_
#define CONFLENS_LEXER_HPP_

// Hand-written lexers for Python, JavaScript and shell plus a generic
// word/punctuation splitter. The grammars are described in docs/lexers.md.
//
// Each language lexer is a single scanner that reports both tokens and comment
// spans, so strip_comments() and tokenize() always agree on what a comment is.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "conflens/review.hpp"
#include "conflens/token_sets.hpp"

namespace conflens {

enum class TokenClass {
  separator,
  operator_,
  keyword,
  identifier,
  literal,
  word,
  other
};

inline constexpr TokenClass all_token_classes[] = {
    TokenClass::separator,  TokenClass::operator_, TokenClass::keyword,
    TokenClass::identifier, TokenClass::literal,   TokenClass::word,
    TokenClass::other};

inline const char *to_string(TokenClass c) {
  switch (c) {
  case TokenClass::separator:
    return "separator";
  case TokenClass::operator_:
    return "operator";
  case TokenClass::keyword:
    return "keyword";
  case TokenClass::identifier:
    return "identifier";
  case TokenClass::literal:
    return "literal";
  case TokenClass::word:
    return "word";
  case TokenClass::other:
    return "other";
  }
  return "other";
}

struct Token {
  std::string text;
  TokenClass cls = TokenClass::other;

  friend bool operator==(const Token &, const Token &) = default;
};

struct TokenStream {
  std::string path;
  Side side = Side::post;
  Language language = Language::generic;
  std::vector<Token> tokens;
  /// Set when the language lexer failed and generic tokenization was used.
  bool lex_fallback = false;
  // Provenance, when the stream comes from a review archive.
  std::string review_id;
  int revision_number = 0;

  std::vector<std::string> texts() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto &t : tokens)
      out.push_back(t.text);
    return out;
  }
};

class LexError : public std::runtime_error {
public:
  LexError(const std::string &what, int line)
      : std::runtime_error(what + " at line " + std::to_string(line)),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

enum class FileKind { programming, configuration, documentation, other };

inline const char *to_string(FileKind k) {
  switch (k) {
  case FileKind::programming:
    return "programming";
  case FileKind::configuration:
    return "configuration";
  case FileKind::documentation:
    return "documentation";
  case FileKind::other:
    return "other";
  }
  return "other";
}

/// Lower-cased extension including the dot ("a/B.PY" -> ".py"), or "" when
/// the final path component has none.
inline std::string file_extension(std::string_view path) {
  const auto slash = path.find_last_of("/\\");
  const auto name =
      slash == std::string_view::npos ? path : path.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  if (dot == std::string_view::npos || dot == 0)
    return {};
  std::string ext(name.substr(dot));
  for (auto &c : ext)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

inline FileKind classify_extension(std::string_view ext) {
  static constexpr std::string_view conf[] = {".yml", ".json", ".xml", ".pp",
                                              ".yaml"};
  static constexpr std::string_view prog[] = {".sh", ".py", ".js"};
  static constexpr std::string_view doc[] = {".rst", ".php", ".html", ".txt"};
  auto in = [&](const auto &list) {
    return std::find(std::begin(list), std::end(list), ext) != std::end(list);
  };
  if (in(conf))
    return FileKind::configuration;
  if (in(prog))
    return FileKind::programming;
  if (in(doc))
    return FileKind::documentation;
  return FileKind::other;
}

inline FileKind classify_file(std::string_view path) {
  return classify_extension(file_extension(path));
}

inline Language language_for_extension(std::string_view ext) {
  if (ext == ".py")
    return Language::python;
  if (ext == ".js")
    return Language::javascript;
  if (ext == ".sh")
    return Language::shell;
  return Language::generic;
}

inline Language language_for_path(std::string_view path) {
  return language_for_extension(file_extension(path));
}

namespace detail {

enum class LexemeKind { name, number, string, regex, punct, other };

struct Lexeme {
  LexemeKind kind;
  std::size_t begin;
  std::size_t end;
};

struct Span {
  std::size_t begin;
  std::size_t end;
  bool line_comment;
};

struct ScanResult {
  std::vector<Lexeme> lexemes;
  std::vector<Span> comments;
};

inline bool is_ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}
inline bool is_ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c >= 0x80;
}
inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

class Scanner {
public:
  Scanner(std::string_view src, const TokenSets &sets)
      : src_(src), punct_(sets.punctuation()) {}

protected:
  char at(std::size_t i) const { return i < src_.size() ? src_[i] : '\0'; }

  int line_of(std::size_t pos) const {
    return 1 + static_cast<int>(
                   std::count(src_.begin(), src_.begin() + static_cast<std::ptrdiff_t>(
                                                               std::min(pos, src_.size())),
                              '\n'));
  }

  /// Longest punctuation entry starting at pos, else one character.
  std::size_t punct_length(std::size_t pos, bool &known) const {
    for (const auto &p : punct_) {
      if (src_.compare(pos, p.size(), p) == 0) {
        known = true;
        return p.size();
      }
    }
    known = false;
    return 1;
  }

  void emit(LexemeKind k, std::size_t b, std::size_t e) {
    out_.lexemes.push_back({k, b, e});
  }

  void emit_punct(std::size_t &pos) {
    bool known = false;
    const auto len = punct_length(pos, known);
    emit(known ? LexemeKind::punct : LexemeKind::other, pos, pos + len);
    pos += len;
  }

  std::size_t scan_number(std::size_t pos) const {
    const bool hex = at(pos) == '0' && (at(pos + 1) == 'x' || at(pos + 1) == 'X');
    while (pos < src_.size()) {
      const auto c = static_cast<unsigned char>(src_[pos]);
      if (std::isalnum(c) || c == '_' || c == '.') {
        ++pos;
        if ((c == 'e' || c == 'E') && !hex &&
            (at(pos) == '+' || at(pos) == '-') &&
            std::isdigit(static_cast<unsigned char>(at(pos + 1))))
          ++pos;
      } else {
        break;
      }
    }
    return pos;
  }

  std::string_view src_;
  std::vector<std::string> punct_;
  ScanResult out_;
};

class PythonScanner : public Scanner {
public:
  using Scanner::Scanner;

  ScanResult run() {
    std::size_t pos = 0;
    while (pos < src_.size()) {
      const char c = src_[pos];
      if (is_space(c)) {
        ++pos;
      } else if (c == '\\' && (at(pos + 1) == '\n' || at(pos + 1) == '\r')) {
        pos += 2;
      } else if (c == '#') {
        const auto e = src_.find('\n', pos);
        const auto end = e == std::string_view::npos ? src_.size() : e;
        out_.comments.push_back({pos, end, true});
        pos = end;
      } else if (c == '"' || c == '\'') {
        pos = scan_string(pos, pos);
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' &&
                  std::isdigit(static_cast<unsigned char>(at(pos + 1))))) {
        const auto e = scan_number(pos);
        emit(LexemeKind::number, pos, e);
        pos = e;
      } else if (is_ident_start(static_cast<unsigned char>(c))) {
        auto e = pos;
        while (e < src_.size() && is_ident_char(static_cast<unsigned char>(src_[e])))
          ++e;
        if ((at(e) == '"' || at(e) == '\'') && is_string_prefix(pos, e)) {
          pos = scan_string(pos, e);
        } else {
          emit(LexemeKind::name, pos, e);
          pos = e;
        }
      } else {
        emit_punct(pos);
      }
    }
    return std::move(out_);
  }

private:
  bool is_string_prefix(std::size_t b, std::size_t e) const {
    if (e - b > 2)
      return false;
    std::string p;
    for (auto i = b; i < e; ++i)
      p += static_cast<char>(std::tolower(static_cast<unsigned char>(src_[i])));
    return p == "r" || p == "u" || p == "b" || p == "f" || p == "br" ||
           p == "rb" || p == "fr" || p == "rf";
  }

  std::size_t scan_string(std::size_t begin, std::size_t quote_pos) {
    const char q = src_[quote_pos];
    const bool triple = at(quote_pos + 1) == q && at(quote_pos + 2) == q;
    std::size_t pos = quote_pos + (triple ? 3 : 1);
    while (true) {
      if (pos >= src_.size())
        throw LexError("unterminated string literal", line_of(begin));
      const char c = src_[pos];
      if (c == '\\') {
        pos += 2;
        continue;
      }
      if (!triple && c == '\n')
        throw LexError("unterminated string literal", line_of(begin));
      if (c == q) {
        if (!triple) {
          ++pos;
          break;
        }
        if (at(pos + 1) == q && at(pos + 2) == q) {
          pos += 3;
          break;
        }
      }
      ++pos;
    }
    emit(LexemeKind::string, begin, pos);
    return pos;
  }
};

class JavaScriptScanner : public Scanner {
public:
  using Scanner::Scanner;

  ScanResult run() {
    std::size_t pos = 0;
    while (pos < src_.size()) {
      const char c = src_[pos];
      if (is_space(c)) {
        ++pos;
      } else if (c == '/' && at(pos + 1) == '/') {
        const auto e = src_.find('\n', pos);
        const auto end = e == std::string_view::npos ? src_.size() : e;
        out_.comments.push_back({pos, end, true});
        pos = end;
      } else if (c == '/' && at(pos + 1) == '*') {
        const auto e = src_.find("*/", pos + 2);
        if (e == std::string_view::npos)
          throw LexError("unterminated block comment", line_of(pos));
        out_.comments.push_back({pos, e + 2, false});
        pos = e + 2;
      } else if (c == '"' || c == '\'') {
        const auto e = skip_quoted(pos);
        emit(LexemeKind::string, pos, e);
        pos = e;
      } else if (c == '`') {
        const auto e = skip_template(pos);
        emit(LexemeKind::string, pos, e);
        pos = e;
      } else if (c == '/' && regex_allowed()) {
        const auto e = try_regex(pos);
        if (e) {
          emit(LexemeKind::regex, pos, e);
          pos = e;
        } else {
          emit_punct(pos);
        }
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' &&
                  std::isdigit(static_cast<unsigned char>(at(pos + 1))))) {
        const auto e = scan_number(pos);
        emit(LexemeKind::number, pos, e);
        pos = e;
      } else if (is_ident_start(static_cast<unsigned char>(c)) || c == '$') {
        auto e = pos;
        while (e < src_.size() &&
               (is_ident_char(static_cast<unsigned char>(src_[e])) || src_[e] == '$'))
          ++e;
        emit(LexemeKind::name, pos, e);
        pos = e;
      } else {
        emit_punct(pos);
      }
    }
    return std::move(out_);
  }

private:
  bool regex_allowed() const {
    if (out_.lexemes.empty())
      return true;
    const auto &prev = out_.lexemes.back();
    const auto text = src_.substr(prev.begin, prev.end - prev.begin);
    switch (prev.kind) {
    case LexemeKind::number:
    case LexemeKind::string:
    case LexemeKind::regex:
      return false;
    case LexemeKind::name: {
      static constexpr std::string_view kws[] = {
          "return", "typeof", "instanceof", "in",   "of",    "new",  "delete",
          "void",   "throw",  "case",       "do",   "else",  "yield", "await"};
      return std::find(std::begin(kws), std::end(kws), text) != std::end(kws);
    }
    default:
      return !(text == ")" || text == "]" || text == "}");
    }
  }

  /// End of a regex literal starting at pos, or 0 when the line ends first.
  std::size_t try_regex(std::size_t pos) const {
    bool in_class = false;
    std::size_t i = pos + 1;
    if (at(i) == '*' || at(i) == '/')
      return 0;
    for (; i < src_.size(); ++i) {
      const char c = src_[i];
      if (c == '\n')
        return 0;
      if (c == '\\') {
        ++i;
      } else if (c == '[') {
        in_class = true;
      } else if (c == ']') {
        in_class = false;
      } else if (c == '/' && !in_class) {
        ++i;
        while (i < src_.size() && std::isalpha(static_cast<unsigned char>(src_[i])))
          ++i;
        return i;
      }
    }
    return 0;
  }

  std::size_t skip_quoted(std::size_t pos) const {
    const char q = src_[pos];
    std::size_t i = pos + 1;
    while (true) {
      if (i >= src_.size() || src_[i] == '\n')
        throw LexError("unterminated string literal", line_of(pos));
      if (src_[i] == '\\') {
        i += 2;
        continue;
      }
      if (src_[i] == q)
        return i + 1;
      ++i;
    }
  }

  std::size_t skip_template(std::size_t pos) const {
    std::size_t i = pos + 1;
    while (true) {
      if (i >= src_.size())
        throw LexError("unterminated template literal", line_of(pos));
      const char c = src_[i];
      if (c == '\\') {
        i += 2;
      } else if (c == '`') {
        return i + 1;
      } else if (c == '$' && at(i + 1) == '{') {
        i = skip_substitution(i + 2, pos);
      } else {
        ++i;
      }
    }
  }

  // Skips a ${ ... } body, honoring nested braces, strings and templates.
  std::size_t skip_substitution(std::size_t i, std::size_t tmpl_begin) const {
    int depth = 1;
    while (i < src_.size()) {
      const char c = src_[i];
      if (c == '"' || c == '\'') {
        i = skip_quoted(i);
      } else if (c == '`') {
        i = skip_template(i);
      } else if (c == '{') {
        ++depth;
        ++i;
      } else if (c == '}') {
        if (--depth == 0)
          return i + 1;
        ++i;
      } else {
        ++i;
      }
    }
    throw LexError("unterminated template literal", line_of(tmpl_begin));
  }
};

class ShellScanner : public Scanner {
public:
  using Scanner::Scanner;

  ScanResult run() {
    std::size_t pos = 0;
    while (pos < src_.size()) {
      const char c = src_[pos];
      if (is_space(c)) {
        ++pos;
      } else if (c == '\\') {
        if (at(pos + 1) == '\n') {
          pos += 2;
        } else if (pos + 1 < src_.size()) {
          emit(LexemeKind::other, pos, pos + 2);
          pos += 2;
        } else {
          emit(LexemeKind::other, pos, pos + 1);
          ++pos;
        }
      } else if (c == '#' && starts_word(pos)) {
        const auto e = src_.find('\n', pos);
        const auto end = e == std::string_view::npos ? src_.size() : e;
        out_.comments.push_back({pos, end, true});
        pos = end;
      } else if (c == '\'') {
        const auto e = src_.find('\'', pos + 1);
        if (e == std::string_view::npos)
          throw LexError("unterminated string literal", line_of(pos));
        emit(LexemeKind::string, pos, e + 1);
        pos = e + 1;
      } else if (c == '"') {
        auto i = pos + 1;
        while (true) {
          if (i >= src_.size())
            throw LexError("unterminated string literal", line_of(pos));
          if (src_[i] == '\\') {
            i += 2;
            continue;
          }
          if (src_[i] == '"')
            break;
          ++i;
        }
        emit(LexemeKind::string, pos, i + 1);
        pos = i + 1;
      } else if (is_ident_char(static_cast<unsigned char>(c))) {
        auto e = pos;
        bool digits = true;
        while (e < src_.size() && is_ident_char(static_cast<unsigned char>(src_[e]))) {
          digits = digits && std::isdigit(static_cast<unsigned char>(src_[e]));
          ++e;
        }
        emit(digits ? LexemeKind::number : LexemeKind::name, pos, e);
        pos = e;
      } else {
        emit_punct(pos);
      }
    }
    return std::move(out_);
  }

private:
  bool starts_word(std::size_t pos) const {
    if (pos == 0)
      return true;
    const char p = src_[pos - 1];
    return is_space(p) || p == ';' || p == '&' || p == '|' || p == '(' ||
           p == ')';
  }
};

class GenericScanner : public Scanner {
public:
  using Scanner::Scanner;

  ScanResult run() {
    std::size_t pos = 0;
    while (pos < src_.size()) {
      const auto c = static_cast<unsigned char>(src_[pos]);
      if (is_space(static_cast<char>(c))) {
        ++pos;
      } else if (is_ident_char(c)) {
        auto e = pos;
        while (e < src_.size() && is_ident_char(static_cast<unsigned char>(src_[e])))
          ++e;
        emit(LexemeKind::name, pos, e);
        pos = e;
      } else {
        emit(LexemeKind::other, pos, pos + 1);
        ++pos;
      }
    }
    return std::move(out_);
  }
};

inline ScanResult scan(std::string_view src, Language lang,
                       const TokenSets &sets) {
  switch (lang) {
  case Language::python:
    return PythonScanner(src, sets).run();
  case Language::javascript:
    return JavaScriptScanner(src, sets).run();
  case Language::shell:
    return ShellScanner(src, sets).run();
  case Language::generic:
    break;
  }
  return GenericScanner(src, sets).run();
}

inline TokenClass class_of(LexemeKind kind, const std::string &text,
                           Language lang, const TokenSets &sets) {
  if (lang == Language::generic)
    return TokenClass::word;
  switch (kind) {
  case LexemeKind::number:
  case LexemeKind::string:
  case LexemeKind::regex:
    return TokenClass::literal;
  case LexemeKind::name:
    if (sets.keywords.count(text))
      return TokenClass::keyword;
    if (sets.operators.count(text))
      return TokenClass::operator_;
    return TokenClass::identifier;
  case LexemeKind::punct:
    if (sets.operators.count(text))
      return TokenClass::operator_;
    if (sets.separators.count(text))
      return TokenClass::separator;
    if (sets.keywords.count(text))
      return TokenClass::keyword;
    return TokenClass::other;
  case LexemeKind::other:
    return TokenClass::other;
  }
  return TokenClass::other;
}

} // namespace detail

/// Removes comments. String contents are left untouched; each removed block
/// comment is replaced by the newlines it spanned, and a line comment also
/// takes the blanks before it.
inline std::string strip_comments(std::string_view source, Language lang,
                                  const TokenSets &sets) {
  if (lang == Language::generic)
    return std::string(source);
  const auto result = detail::scan(source, lang, sets);
  std::string out;
  out.reserve(source.size());
  std::size_t pos = 0;
  for (const auto &span : result.comments) {
    out.append(source.substr(pos, span.begin - pos));
    if (span.line_comment) {
      while (!out.empty() && (out.back() == ' ' || out.back() == '\t'))
        out.pop_back();
    } else {
      const auto body = source.substr(span.begin, span.end - span.begin);
      out.append(static_cast<std::size_t>(std::count(body.begin(), body.end(), '\n')),
                 '\n');
    }
    pos = span.end;
  }
  out.append(source.substr(pos));
  return out;
}

inline std::string strip_comments(std::string_view source, Language lang) {
  return strip_comments(source, lang, default_token_sets(lang));
}

/// Tokenizes source text. Comments never produce tokens, so stripping first
/// is optional.
inline std::vector<Token> tokenize(std::string_view source, Language lang,
                                   const TokenSets &sets) {
  const auto result = detail::scan(source, lang, sets);
  std::vector<Token> out;
  out.reserve(result.lexemes.size());
  for (const auto &lx : result.lexemes) {
    std::string text(source.substr(lx.begin, lx.end - lx.begin));
    const auto cls = detail::class_of(lx.kind, text, lang, sets);
    out.push_back({std::move(text), cls});
  }
  return out;
}

inline std::vector<Token> tokenize(std::string_view source, Language lang) {
  return tokenize(source, lang, default_token_sets(lang));
}

/// Classifies a token text produced by tokenize() for the same language.
inline TokenClass classify_token(const std::string &text, Language lang,
                                 const TokenSets &sets) {
  if (lang == Language::generic || text.empty())
    return lang == Language::generic ? TokenClass::word : TokenClass::other;
  if (sets.keywords.count(text))
    return TokenClass::keyword;
  if (sets.operators.count(text))
    return TokenClass::operator_;
  if (sets.separators.count(text))
    return TokenClass::separator;
  const auto c0 = static_cast<unsigned char>(text[0]);
  if (std::isdigit(c0) ||
      (c0 == '.' && text.size() > 1 &&
       std::isdigit(static_cast<unsigned char>(text[1])))) {
    // Shell words may start with a digit; only all-digit words are numbers.
    if (lang == Language::shell &&
        !std::all_of(text.begin(), text.end(), [](char c) {
          return std::isdigit(static_cast<unsigned char>(c));
        }))
      return TokenClass::identifier;
    return TokenClass::literal;
  }
  if (c0 == '"' || c0 == '\'' || (lang == Language::javascript && c0 == '`'))
    return TokenClass::literal;
  if (lang == Language::javascript && c0 == '/' && text.size() > 1)
    return TokenClass::literal;
  if (detail::is_ident_start(c0) || (lang == Language::javascript && c0 == '$')) {
    // Python string prefixes: r"...", b'...'.
    if (text.back() == '"' || text.back() == '\'')
      return TokenClass::literal;
    return TokenClass::identifier;
  }
  return TokenClass::other;
}

inline TokenClass classify_token(const std::string &text, Language lang) {
  return classify_token(text, lang, default_token_sets(lang));
}

/// Strips comments and tokenizes one file version. On a lex error the file
/// is tokenized generically and flagged instead of dropped.
inline TokenStream lex_file(const std::string &path, Side side,
                            std::string_view text, const TokenSets *sets = nullptr) {
  TokenStream ts;
  ts.path = path;
  ts.side = side;
  ts.language = language_for_path(path);
  const TokenSets &s = sets ? *sets : default_token_sets(ts.language);
  try {
    ts.tokens = tokenize(text, ts.language, s);
  } catch (const LexError &) {
    ts.lex_fallback = true;
    ts.tokens = tokenize(text, Language::generic, default_token_sets(Language::generic));
  }
  return ts;
}

inline TokenStream lex_file(const FileVersion &v, const TokenSets *sets = nullptr) {
  return lex_file(v.path, v.side, v.text(), sets);
}

} // namespace conflens

#endif // CONFLENS_LEXER_HPP_
