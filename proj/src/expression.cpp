#include "strata/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "strata/dataset.hpp"
#include "strata/error.hpp"

namespace strata {

std::string_view to_string(Function f) {
  switch (f) {
    case Function::min: return "min";
    case Function::max: return "max";
    case Function::mean: return "mean";
    case Function::abs: return "abs";
    case Function::log10: return "log10";
  }
  return "min";
}

Expression Expression::literal(double v) {
  Expression e;
  e.op = Op::literal;
  e.value = v;
  return e;
}

Expression Expression::column(std::string id) {
  Expression e;
  e.op = Op::column;
  e.name = std::move(id);
  return e;
}

Expression Expression::negate(Expression operand) {
  Expression e;
  e.op = Op::negate;
  e.args.push_back(std::move(operand));
  return e;
}

Expression Expression::binary(Op op, Expression lhs, Expression rhs) {
  Expression e;
  e.op = op;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  return e;
}

Expression Expression::call(Function f, std::vector<Expression> args) {
  Expression e;
  e.op = Op::call;
  e.function = f;
  e.args = std::move(args);
  return e;
}

namespace {

std::optional<Function> function_named(std::string_view name) {
  if (name == "min") return Function::min;
  if (name == "max") return Function::max;
  if (name == "mean") return Function::mean;
  if (name == "abs") return Function::abs;
  if (name == "log10") return Function::log10;
  return std::nullopt;
}

bool unary_function(Function f) { return f == Function::abs || f == Function::log10; }

class Parser {
 public:
  Parser(std::string_view src, const IdentifierCheck& known) : src_(src), known_(known) {}

  Expression parse() {
    Expression e = expr();
    skip_space();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ScriptError(what, pos_); }
  [[noreturn]] void fail_at(const std::string& what, std::size_t at) const {
    throw ScriptError(what, at);
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' but input ended");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expression expr() {
    Expression lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = Expression::binary(Expression::Op::add, std::move(lhs), term());
      } else if (accept('-')) {
        lhs = Expression::binary(Expression::Op::subtract, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  Expression term() {
    Expression lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = Expression::binary(Expression::Op::multiply, std::move(lhs), factor());
      } else if (accept('/')) {
        lhs = Expression::binary(Expression::Op::divide, std::move(lhs), factor());
      } else {
        return lhs;
      }
    }
  }

  Expression factor() {
    skip_space();
    if (pos_ >= src_.size()) fail("expected an expression but input ended");
    const char c = src_[pos_];
    if (c == '-') {
      ++pos_;
      return Expression::negate(factor());
    }
    if (c == '(') {
      ++pos_;
      Expression inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expression number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) fail_at("malformed number", start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail("malformed exponent");
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc{} || ptr != src_.data() + pos_ || !std::isfinite(v)) {
      fail_at("number out of range", start);
    }
    return Expression::literal(v);
  }

  Expression identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    std::string name(src_.substr(start, pos_ - start));
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      const auto f = function_named(name);
      if (!f) fail_at("unknown function '" + name + "'", start);
      ++pos_;
      std::vector<Expression> args;
      args.push_back(expr());
      while (accept(',')) args.push_back(expr());
      expect(')');
      if (unary_function(*f) && args.size() != 1) {
        fail_at("function '" + name + "' takes exactly one argument, got " +
                    std::to_string(args.size()),
                start);
      }
      return Expression::call(*f, std::move(args));
    }
    if (known_ && !known_(name)) fail_at("unknown identifier '" + name + "'", start);
    return Expression::column(std::move(name));
  }

  std::string_view src_;
  const IdentifierCheck& known_;
  std::size_t pos_ = 0;
};

int precedence(Expression::Op op) {
  switch (op) {
    case Expression::Op::add:
    case Expression::Op::subtract: return 1;
    case Expression::Op::multiply:
    case Expression::Op::divide: return 2;
    case Expression::Op::negate: return 3;
    default: return 4;
  }
}

void write(const Expression& e, std::string& out) {
  using Op = Expression::Op;
  switch (e.op) {
    case Op::literal: {
      char buf[64];
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, e.value);
      out.append(buf, ptr);
      return;
    }
    case Op::column:
      out += e.name;
      return;
    case Op::negate: {
      out += '-';
      const bool wrap = precedence(e.args[0].op) < precedence(Op::negate);
      if (wrap) out += '(';
      write(e.args[0], out);
      if (wrap) out += ')';
      return;
    }
    case Op::call:
      out += to_string(e.function);
      out += '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i > 0) out += ", ";
        write(e.args[i], out);
      }
      out += ')';
      return;
    default: {
      const int p = precedence(e.op);
      const bool wrap_lhs = precedence(e.args[0].op) < p;
      // Left associativity: an equal-precedence right operand needs parentheses.
      const bool wrap_rhs = precedence(e.args[1].op) <= p;
      if (wrap_lhs) out += '(';
      write(e.args[0], out);
      if (wrap_lhs) out += ')';
      switch (e.op) {
        case Op::add: out += " + "; break;
        case Op::subtract: out += " - "; break;
        case Op::multiply: out += " * "; break;
        default: out += " / "; break;
      }
      if (wrap_rhs) out += '(';
      write(e.args[1], out);
      if (wrap_rhs) out += ')';
      return;
    }
  }
}

double finite_or_missing(double v, EvalDiagnostics* d) {
  if (std::isfinite(v)) return v;
  if (!is_missing(v) && d) ++d->invalid_domain;
  return kMissing;
}

}  // namespace

Expression parse_script(std::string_view source, const IdentifierCheck& known) {
  return Parser(source, known).parse();
}

std::string to_source(const Expression& expr) {
  std::string out;
  write(expr, out);
  return out;
}

void collect_columns(const Expression& expr, std::vector<std::string>& out) {
  if (expr.op == Expression::Op::column) {
    if (std::find(out.begin(), out.end(), expr.name) == out.end()) out.push_back(expr.name);
    return;
  }
  for (const auto& a : expr.args) collect_columns(a, out);
}

double eval_script(const Expression& e, const Environment& env, EvalDiagnostics* d) {
  using Op = Expression::Op;
  switch (e.op) {
    case Op::literal: return e.value;
    case Op::column: return finite_or_missing(env(e.name), nullptr);
    case Op::negate: {
      const double v = eval_script(e.args[0], env, d);
      return is_missing(v) ? kMissing : -v;
    }
    case Op::add:
    case Op::subtract:
    case Op::multiply:
    case Op::divide: {
      const double a = eval_script(e.args[0], env, d);
      const double b = eval_script(e.args[1], env, d);
      if (is_missing(a) || is_missing(b)) return kMissing;
      switch (e.op) {
        case Op::add: return finite_or_missing(a + b, d);
        case Op::subtract: return finite_or_missing(a - b, d);
        case Op::multiply: return finite_or_missing(a * b, d);
        default:
          if (b == 0.0) {
            if (d) ++d->division_by_zero;
            return kMissing;
          }
          return finite_or_missing(a / b, d);
      }
    }
    case Op::call: {
      if (e.function == Function::abs || e.function == Function::log10) {
        const double v = eval_script(e.args[0], env, d);
        if (is_missing(v)) return kMissing;
        if (e.function == Function::abs) return std::fabs(v);
        if (v <= 0.0) {
          if (d) ++d->invalid_domain;
          return kMissing;
        }
        return std::log10(v);
      }
      double acc = 0.0;
      std::size_t n = 0;
      for (const auto& a : e.args) {
        const double v = eval_script(a, env, d);
        if (is_missing(v)) continue;
        if (n == 0) {
          acc = v;
        } else if (e.function == Function::min) {
          acc = std::min(acc, v);
        } else if (e.function == Function::max) {
          acc = std::max(acc, v);
        } else {
          acc += v;
        }
        ++n;
      }
      if (n == 0) return kMissing;
      if (e.function == Function::mean) return finite_or_missing(acc / static_cast<double>(n), d);
      return acc;
    }
  }
  return kMissing;
}

}  // namespace strata
