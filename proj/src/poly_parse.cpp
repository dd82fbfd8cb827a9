#include "nhtori/poly_parse.hpp"

#include <cctype>
#include <stdexcept>

namespace nhtori {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& declared)
      : text_(text), strict_(!declared.empty()), names_(declared) {}

  MultiPoly run() {
    MultiPoly p = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return p.remap(make_vars(names_));
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("parse error at " + std::to_string(pos_) + " in \"" + std::string(text_) + "\": " + msg);
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  MultiPoly expr() {
    MultiPoly acc = term();
    for (;;) {
      if (accept('+')) {
        acc += term();
      } else if (accept('-')) {
        acc -= term();
      } else {
        return acc;
      }
    }
  }

  MultiPoly term() {
    MultiPoly acc = unary();
    for (;;) {
      if (accept('*')) {
        acc *= unary();
      } else if (accept('/')) {
        MultiPoly d = unary();
        if (d.is_zero()) fail("division by zero");
        if (d.size() != 1) fail("division by a non-monomial");
        acc *= d.inverse_monomial();
      } else {
        return acc;
      }
    }
  }

  MultiPoly unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  static Rational as_rational(const MultiPoly& p, const char* what) {
    if (!p.is_constant()) throw std::invalid_argument(std::string(what) + " must be a constant");
    return p.constant_term().to_rational();
  }

  MultiPoly power() {
    MultiPoly base = primary();
    if (!accept('^')) return base;
    Rational e = as_rational(unary(), "exponent");
    return raise(base, e);
  }

  MultiPoly raise(const MultiPoly& base, const Rational& e) {
    if (e.get_den() != 1) {
      if (!base.is_constant()) fail("fractional power of a non-constant");
      return MultiPoly::constant(base.constant_term().pow(e));
    }
    long k = e.get_num().get_si();
    if (k >= 0) return base.pow(static_cast<unsigned>(k));
    if (base.size() != 1) fail("negative power of a non-monomial");
    return base.inverse_monomial().pow(static_cast<unsigned>(-k));
  }

  MultiPoly primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      MultiPoly p = expr();
      expect(')');
      return p;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id = identifier();
      if (id == "pi") return MultiPoly::constant(ConstScalar::pi());
      if (id == "Gamma") {
        expect('(');
        Rational z = as_rational(expr(), "Gamma argument");
        expect(')');
        return MultiPoly::constant(ConstScalar::gamma(z));
      }
      if (id == "sqrt") {
        expect('(');
        MultiPoly arg = expr();
        expect(')');
        return raise(arg, frac(1, 2));
      }
      return variable(id);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  MultiPoly number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    return MultiPoly::constant(ConstScalar(parse_rational(text_.substr(start, pos_ - start))));
  }

  std::string identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  MultiPoly variable(const std::string& id) {
    if (std::find(names_.begin(), names_.end(), id) == names_.end()) {
      if (strict_) fail("undeclared variable " + id);
      names_.push_back(id);
    }
    return MultiPoly::variable(make_vars({id}), id);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  bool strict_;
  std::vector<std::string> names_;
};

}  // namespace

MultiPoly parse_poly(std::string_view text, const std::vector<std::string>& vars) { return Parser(text, vars).run(); }

RatPoly parse_rat_poly(std::string_view text, const std::vector<std::string>& vars) {
  return to_rational_poly(parse_poly(text, vars));
}

ConstScalar parse_const(std::string_view text) {
  MultiPoly p = parse_poly(text);
  if (!p.is_constant()) throw std::invalid_argument("expected a constant: " + std::string(text));
  return p.constant_term();
}

}  // namespace nhtori
