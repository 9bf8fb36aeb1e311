#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "strata/expression.hpp"

namespace script_cases {

struct Case {
  const char* source;
  double expected;  // NaN means missing
};

// Environment: a = 2, b = 3, c = 4, z = missing.
inline double env(std::string_view name) {
  if (name == "a") return 2;
  if (name == "b") return 3;
  if (name == "c") return 4;
  return std::nan("");
}

inline const std::vector<Case>& precedence() {
  static const std::vector<Case> cases = {
      {"1+2*3", 7},
      {"(1+2)*3", 9},
      {"1*2+3", 5},
      {"10-4-3", 3},
      {"10-(4-3)", 9},
      {"24/4/2", 3},
      {"24/(4/2)", 12},
      {"2*3/4", 1.5},
      {"2/4*3", 1.5},
      {"1-2+3", 2},
      {"1+2-3", 0},
      {"-2*3", -6},
      {"-(2*3)", -6},
      {"--2", 2},
      {"1--2", 3},
      {"2*-3", -6},
      {"-2+5", 3},
      {"-(2+5)", -7},
      {"a+b*c", 14},
      {"(a+b)*c", 20},
      {"a*b-c", 2},
      {"a-b*c", -10},
      {"c/a/a", 1},
      {"a-b-c", -5},
      {"max(a,b)*2", 6},
      {"min(a,b)+max(b,c)", 6},
      {"mean(a,b,c)", 3},
      {"mean(a,z,c)", 3},
      {"max(z,z)", NAN},
      {"a+z", NAN},
      {"a/0", NAN},
      {"abs(a-c)", 2},
      {"log10(100)*a", 4},
      {"log10(0)", NAN},
      {"1.5e1+a", 17},
      {"  a *\t(b + c) ", 14},
      {"max(1,2,3,4)-min(4,3,2,1)", 3},
      {"-max(a,b)", -3},
      {"mean(a)/mean(b,c)*7", 4},
      {"2*(3+(4-1))/3", 4},
  };
  return cases;
}

inline const std::vector<const char*>& syntax_errors() {
  static const std::vector<const char*> cases = {"max(", "1+", "(1", "1)", "*2", "foo(1)",
                                                 "abs(1,2)", "log10()", "1 2", "a..b", ""};
  return cases;
}

// Random trees over the grammar's constructs. Literals are non-negative
// because a leading minus is the negation operator.
inline strata::Expression random_ast(std::mt19937_64& rng, int depth) {
  using strata::Expression;
  using Op = Expression::Op;
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  if (depth <= 0 || pick(4) == 0) {
    if (pick(2) == 0) {
      static const char* names[] = {"a", "b", "c", "x_1", "Value"};
      return Expression::column(names[pick(5)]);
    }
    static const double literals[] = {0, 1, 2.5, 10, 0.125, 1e21, 3e-7, 42};
    return Expression::literal(literals[pick(8)]);
  }
  switch (pick(7)) {
    case 0: return Expression::negate(random_ast(rng, depth - 1));
    case 1: return Expression::binary(Op::add, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    case 2: return Expression::binary(Op::subtract, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    case 3: return Expression::binary(Op::multiply, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    case 4: return Expression::binary(Op::divide, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    case 5: {
      const auto f = static_cast<strata::Function>(pick(3));
      std::vector<Expression> args;
      const int n = 1 + pick(3);
      for (int i = 0; i < n; ++i) args.push_back(random_ast(rng, depth - 1));
      return Expression::call(f, std::move(args));
    }
    default: {
      const auto f = pick(2) == 0 ? strata::Function::abs : strata::Function::log10;
      return Expression::call(f, {random_ast(rng, depth - 1)});
    }
  }
}

}  // namespace script_cases
