#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "xorproto/protocol.hpp"
#include "xorproto/term.hpp"
#include "xorproto/unify_elementary.hpp"

// Protocol description language.
//
//   protocol nsl_xor;
//   var A, B : Agent;
//   var NA, NB : Nonce;
//   fresh NA, NB;
//   secret NA, NB;
//   1. A -> B : penc([1, NA, A], pk(B))
//   2. B -> A : penc([2, NA xor B, NB], pk(A))
//   3. A -> B : penc([3, NB], pk(B))
//
// Numerals are Tag constants, `eps` is the attacker and `zero` the XOR
// unity. `#` starts a comment.

namespace xorproto {

class DslError : public std::runtime_error {
 public:
  DslError(const std::string& kind, int line, int col, const std::string& msg)
      : std::runtime_error(kind + " at " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        kind_(kind),
        line_(line),
        col_(col) {}
  const std::string& kind() const { return kind_; }
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  std::string kind_;
  int line_;
  int col_;
};

class SyntaxError : public DslError {
 public:
  SyntaxError(int line, int col, const std::string& msg) : DslError("SyntaxError", line, col, msg) {}
};

class UndeclaredIdentifier : public DslError {
 public:
  UndeclaredIdentifier(int line, int col, const std::string& id)
      : DslError("UndeclaredIdentifier", line, col, "'" + id + "' is not declared"), id_(id) {}
  const std::string& identifier() const { return id_; }

 private:
  std::string id_;
};

class SortMismatch : public DslError {
 public:
  SortMismatch(int line, int col, const std::string& msg) : DslError("SortMismatch", line, col, msg) {}
};

namespace dsl {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int col = 1;
};

inline bool ident_start(unsigned char ch) { return std::isalpha(ch) || ch == '_' || ch >= 0x80; }
inline bool ident_char(unsigned char ch) { return std::isalnum(ch) || ch == '_' || ch == '\'' || ch >= 0x80; }

inline std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    unsigned char ch = static_cast<unsigned char>(src[i]);
    if (std::isspace(ch)) {
      advance(1);
      continue;
    }
    if (ch == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (ident_start(ch)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
    } else if (std::isdigit(ch)) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Number;
      t.text = src.substr(i, j - i);
      advance(j - i);
    } else if (src.compare(i, 2, "->") == 0) {
      t.kind = Tok::Punct;
      t.text = "->";
      advance(2);
    } else if (std::string("()[]{},;:.=").find(static_cast<char>(ch)) != std::string::npos) {
      t.kind = Tok::Punct;
      t.text = std::string(1, static_cast<char>(ch));
      advance(1);
    } else {
      throw SyntaxError(line, col, std::string("unexpected character '") + static_cast<char>(ch) + "'");
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

/// How identifiers without a declaration are resolved.
enum class Undeclared { Reject, Guess };

/// Sort guess for undeclared names: capitalized names are variables, names
/// starting with n/N are nonces, numerals are tags, everything else is an
/// agent.
inline Term guess_identifier(const std::string& id) {
  bool upper = std::isupper(static_cast<unsigned char>(id[0])) != 0;
  bool nonce = (id[0] == 'n' || id[0] == 'N') && id.size() > 1;
  bool key = (id[0] == 'k' || id[0] == 'K');
  std::string sort = nonce ? sorts::kNonce : key ? sorts::kKey : sorts::kAgent;
  return upper ? make_var(id, sort) : make_const(id, sort);
}

class Parser {
 public:
  Parser(const std::string& src, Undeclared mode) : toks_(lex(src)), mode_(mode) {}

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_punct(const std::string& p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool is_keyword(const std::string& w) const { return peek().kind == Tok::Ident && peek().text == w; }
  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const { throw SyntaxError(t.line, t.col, msg); }

  Token expect_punct(const std::string& p) {
    if (!is_punct(p)) fail(peek(), "expected '" + p + "' but found " + describe(peek()));
    return take();
  }
  Token expect_ident() {
    if (peek().kind != Tok::Ident) fail(peek(), "expected identifier but found " + describe(peek()));
    return take();
  }
  void optional_semicolon() {
    if (is_punct(";")) take();
  }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    return "'" + t.text + "'";
  }

  void declare(const Term& t, const Token& at) {
    if (symbols_.count(t.name())) fail(at, "'" + t.name() + "' declared twice");
    symbols_.emplace(t.name(), t);
  }

  std::optional<Term> symbol(const std::string& id) const {
    auto it = symbols_.find(id);
    if (it == symbols_.end()) return std::nullopt;
    return it->second;
  }

  Term resolve(const Token& t) {
    if (t.kind == Tok::Number) return make_const(t.text, sorts::kTag);
    if (auto s = symbol(t.text)) return *s;
    if (t.text == kAttackerName) return attacker();
    if (t.text == "zero") return zero();
    if (mode_ == Undeclared::Guess) {
      Term g = guess_identifier(t.text);
      symbols_.emplace(t.text, g);
      return g;
    }
    throw UndeclaredIdentifier(t.line, t.col, t.text);
  }

  // term := primary ('xor' primary)*
  Term term() {
    std::vector<Term> parts{primary()};
    while (is_keyword("xor") && !is_punct("(", 1)) {
      take();
      parts.push_back(primary());
    }
    return parts.size() == 1 ? parts.front() : xor_of(std::move(parts));
  }

  std::vector<Term> term_list(const std::string& close) {
    std::vector<Term> out;
    if (is_punct(close)) return out;
    out.push_back(term());
    while (is_punct(",")) {
      take();
      out.push_back(term());
    }
    return out;
  }

  void require_agent(const Term& t, const Token& at, const std::string& op) {
    if (t.is_var() || t.is_const()) {
      if (t.declared_type() != TypeExpr::sort(sorts::kAgent)) {
        throw SortMismatch(at.line, at.col,
                           op + " expects an Agent but " + t.to_string() + " has sort " + t.declared_type().to_string());
      }
      return;
    }
    throw SortMismatch(at.line, at.col, op + " expects an Agent name but got " + t.to_string());
  }

  Term primary() {
    const Token t = peek();
    if (is_punct("[")) {
      take();
      auto elems = term_list("]");
      expect_punct("]");
      return seq(std::move(elems));
    }
    if (is_punct("(")) {
      take();
      Term inner = term();
      expect_punct(")");
      return inner;
    }
    if (t.kind == Tok::Number) return resolve(take());
    if (t.kind != Tok::Ident) fail(t, "expected a term but found " + describe(t));
    take();
    if (!is_punct("(")) return resolve(t);
    take();
    auto args = term_list(")");
    expect_punct(")");
    auto arity = [&](std::size_t n) {
      if (args.size() != n) {
        fail(t, t.text + " takes " + std::to_string(n) + " argument(s), got " + std::to_string(args.size()));
      }
    };
    const std::string& f = t.text;
    if (f == "penc") {
      arity(2);
      return penc(args[0], args[1]);
    }
    if (f == "senc") {
      arity(2);
      return senc(args[0], args[1]);
    }
    if (f == "sig") {
      arity(2);
      return sig(args[0], args[1]);
    }
    if (f == "h" || f == "hash") {
      arity(1);
      return hash_of(args[0]);
    }
    if (f == "pk") {
      arity(1);
      require_agent(args[0], t, "pk");
      return pk(args[0]);
    }
    if (f == "sh") {
      arity(2);
      require_agent(args[0], t, "sh");
      require_agent(args[1], t, "sh");
      return sh(args[0], args[1]);
    }
    if (f == "xor") {
      if (args.empty()) fail(t, "xor needs at least one argument");
      return xor_of(std::move(args));
    }
    fail(t, "unknown function symbol '" + f + "'");
  }

  // `var`/`const` declarations; returns true if one was consumed.
  bool declaration(std::vector<Term>* vars, std::vector<Term>* consts) {
    if (!is_keyword("var") && !is_keyword("const")) return false;
    bool is_var = take().text == "var";
    std::vector<Token> names;
    do {
      if (!names.empty()) take();
      if (peek().kind == Tok::Number && !is_var) {
        names.push_back(take());
      } else {
        names.push_back(expect_ident());
      }
    } while (is_punct(","));
    expect_punct(":");
    Token sort = expect_ident();
    optional_semicolon();
    for (const auto& n : names) {
      if (n.text == kAttackerName || n.text == "zero" || n.text == "xor") fail(n, "'" + n.text + "' is reserved");
      if (n.kind == Tok::Number && sort.text != sorts::kTag) {
        throw SortMismatch(n.line, n.col, "numeral " + n.text + " must have sort Tag");
      }
      Term t = is_var ? make_var(n.text, sort.text) : make_const(n.text, sort.text);
      declare(t, n);
      (is_var ? vars : consts)->push_back(t);
    }
    return true;
  }

  std::map<std::string, Term> symbols_;

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Undeclared mode_;
};

}  // namespace dsl

inline Protocol parse_protocol(const std::string& text) {
  dsl::Parser ps(text, dsl::Undeclared::Reject);
  Protocol p;
  p.name = "protocol";
  int expected = 1;
  while (!ps.at_end()) {
    if (ps.declaration(&p.variables, &p.constants)) continue;
    if (ps.is_keyword("protocol")) {
      ps.take();
      p.name = ps.expect_ident().text;
      ps.optional_semicolon();
      continue;
    }
    if (ps.is_keyword("fresh") || ps.is_keyword("secret")) {
      bool secret = ps.take().text == "secret";
      do {
        if (ps.is_punct(",")) ps.take();
        auto id = ps.expect_ident();
        auto sym = ps.symbol(id.text);
        if (!sym) throw UndeclaredIdentifier(id.line, id.col, id.text);
        if (!sym->is_var()) {
          throw SortMismatch(id.line, id.col, "'" + id.text + "' must be a variable to be " +
                                                  (secret ? "secret" : "fresh"));
        }
        if (secret) {
          if (!p.fresh.count(*sym)) {
            throw SortMismatch(id.line, id.col, "secret '" + id.text + "' must be declared fresh first");
          }
          p.secret.insert(*sym);
        } else {
          p.fresh.insert(*sym);
        }
      } while (ps.is_punct(","));
      ps.optional_semicolon();
      continue;
    }
    if (ps.is_keyword("ltkey")) {
      ps.take();
      do {
        if (ps.is_punct(",")) ps.take();
        p.ltkeys_declared.push_back(ps.term());
      } while (ps.is_punct(","));
      ps.optional_semicolon();
      continue;
    }
    if (ps.peek().kind == dsl::Tok::Number) {
      auto num = ps.take();
      if (std::stoi(num.text) != expected) {
        ps.fail(num, "message numbers must be contiguous from 1; expected " + std::to_string(expected));
      }
      ps.expect_punct(".");
      auto agent = [&]() {
        auto id = ps.expect_ident();
        auto sym = ps.symbol(id.text);
        if (!sym) throw UndeclaredIdentifier(id.line, id.col, id.text);
        if (sym->declared_type() != TypeExpr::sort(sorts::kAgent)) {
          throw SortMismatch(id.line, id.col, "role '" + id.text + "' must be an Agent");
        }
        return id.text;
      };
      Message m;
      m.number = expected++;
      m.sender = agent();
      ps.expect_punct("->");
      m.receiver = agent();
      ps.expect_punct(":");
      m.term = ps.term();
      ps.optional_semicolon();
      p.messages.push_back(std::move(m));
      continue;
    }
    ps.fail(ps.peek(), "expected a declaration or a message but found " + dsl::Parser::describe(ps.peek()));
  }
  return p;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Protocol load_protocol(const std::string& path) { return parse_protocol(read_file(path)); }

/// Prints `p` in the description language; parse_protocol inverts it.
inline std::string print_protocol(const Protocol& p) {
  std::ostringstream out;
  out << "protocol " << p.name << ";\n";
  auto decls = [&](const char* kw, const std::vector<Term>& ts) {
    for (std::size_t i = 0; i < ts.size();) {
      std::size_t j = i;
      std::string names;
      while (j < ts.size() && ts[j].declared_type() == ts[i].declared_type()) {
        names += (j > i ? ", " : "") + ts[j].name();
        ++j;
      }
      out << kw << " " << names << " : " << ts[i].declared_type().to_string() << ";\n";
      i = j;
    }
  };
  decls("var", p.variables);
  decls("const", p.constants);
  auto names = [](const std::set<Term>& ts) {
    std::string s;
    for (const auto& t : ts) s += (s.empty() ? "" : ", ") + t.name();
    return s;
  };
  if (!p.fresh.empty()) out << "fresh " << names(p.fresh) << ";\n";
  if (!p.secret.empty()) out << "secret " << names(p.secret) << ";\n";
  for (const auto& k : p.ltkeys_declared) out << "ltkey " << k.to_string() << ";\n";
  for (const auto& m : p.messages) {
    out << m.number << ". " << m.sender << " -> " << m.receiver << " : " << m.term.to_string() << "\n";
  }
  return out.str();
}

/// Equation files: optional declarations, then one `lhs = rhs` per line.
/// Undeclared names are typed by `guess_identifier`.
inline UnificationProblem parse_equations(const std::string& text) {
  dsl::Parser ps(text, dsl::Undeclared::Guess);
  UnificationProblem p;
  std::vector<Term> vs, cs;
  while (!ps.at_end()) {
    if (ps.declaration(&vs, &cs)) continue;
    Term l = ps.term();
    ps.expect_punct("=");
    Term r = ps.term();
    ps.optional_semicolon();
    p.equations.push_back({l, r});
  }
  return p;
}

struct ParsedConstraint {
  Term target;
  std::vector<Term> terms;
};

/// Sequence files: optional declarations, then `target : { t1, t2, ... }`
/// lines in order.
inline std::vector<ParsedConstraint> parse_constraints(const std::string& text) {
  dsl::Parser ps(text, dsl::Undeclared::Guess);
  std::vector<ParsedConstraint> out;
  std::vector<Term> vs, cs;
  while (!ps.at_end()) {
    if (ps.declaration(&vs, &cs)) continue;
    ParsedConstraint c;
    c.target = ps.term();
    ps.expect_punct(":");
    ps.expect_punct("{");
    c.terms = ps.term_list("}");
    ps.expect_punct("}");
    ps.optional_semicolon();
    out.push_back(std::move(c));
  }
  return out;
}

/// Parses a single term, guessing sorts of undeclared names.
inline Term parse_term(const std::string& text) {
  dsl::Parser ps(text, dsl::Undeclared::Guess);
  Term t = ps.term();
  if (!ps.at_end()) ps.fail(ps.peek(), "trailing input after term");
  return t;
}

}  // namespace xorproto
