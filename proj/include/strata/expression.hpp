#pragma once

// Expression language for scripted columns.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//   ident  := [A-Za-z_][A-Za-z0-9_]*
//
// Identifiers name columns. Functions: min, max, mean (one or more
// arguments), abs and log10 (exactly one).

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace strata {

enum class Function { min, max, mean, abs, log10 };

std::string_view to_string(Function f);

struct Expression {
  enum class Op { literal, column, negate, add, subtract, multiply, divide, call };

  Op op = Op::literal;
  double value = 0.0;      // literal
  std::string name;        // column id
  Function function = Function::min;  // call
  std::vector<Expression> args;

  static Expression literal(double v);
  static Expression column(std::string id);
  static Expression negate(Expression operand);
  static Expression binary(Op op, Expression lhs, Expression rhs);
  static Expression call(Function f, std::vector<Expression> args);

  bool operator==(const Expression&) const = default;
};

// Returns true when an identifier names a usable column.
using IdentifierCheck = std::function<bool(std::string_view)>;

// Throws ScriptError for syntax errors, unknown functions, arity errors and,
// when `known` is given, identifiers it rejects.
Expression parse_script(std::string_view source, const IdentifierCheck& known = {});

// Minimal-parenthesis rendering that parses back to the same tree.
std::string to_source(const Expression& expr);

void collect_columns(const Expression& expr, std::vector<std::string>& out);

struct EvalDiagnostics {
  std::size_t division_by_zero = 0;
  std::size_t invalid_domain = 0;  // log10 of a non-positive value, overflow
};

// Column value lookup; NaN means missing.
using Environment = std::function<double(std::string_view)>;

// Does not throw unless `env` does. Arithmetic on a missing operand is missing; min/max/mean skip
// missing arguments; division by zero and non-finite results are missing.
double eval_script(const Expression& expr, const Environment& env,
                   EvalDiagnostics* diagnostics = nullptr);

}  // namespace strata
