#include <gtest/gtest.h>

#include <random>

#include "strata/combinators.hpp"
#include "strata/encoding.hpp"
#include "strata/error.hpp"
#include "strata/expression.hpp"
#include "support/script_cases.hpp"

using namespace strata;

namespace {

bool same_value(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::fabs(a - b) <= 1e-12;
}

}  // namespace

TEST(Script, PrecedenceSuite) {
  for (const auto& c : script_cases::precedence()) {
    const auto expr = parse_script(c.source);
    EXPECT_TRUE(same_value(eval_script(expr, script_cases::env), c.expected)) << c.source;
  }
}

TEST(Script, TreeShape) {
  const auto e = parse_script("max(a,b)*2");
  const auto want = Expression::binary(
      Expression::Op::multiply,
      Expression::call(Function::max, {Expression::column("a"), Expression::column("b")}),
      Expression::literal(2));
  EXPECT_EQ(e, want);
}

TEST(Script, SyntaxErrorOffset) {
  try {
    parse_script("max(");
    FAIL();
  } catch (const ScriptError& e) {
    EXPECT_EQ(e.offset(), 4U);
  }
  for (const char* s : script_cases::syntax_errors()) {
    EXPECT_THROW(parse_script(s), ScriptError) << s;
  }
}

TEST(Script, UnknownIdentifierRejected) {
  const IdentifierCheck known = [](std::string_view id) { return id == "a"; };
  EXPECT_NO_THROW(parse_script("a*2", known));
  EXPECT_THROW(parse_script("a*b", known), ScriptError);
}

TEST(Script, EvalExamples) {
  auto env = [](std::string_view n) {
    if (n == "a") return 1.0;
    if (n == "b") return 2.0;
    return kMissing;
  };
  EXPECT_EQ(eval_script(parse_script("a+b"), env), 3);
  EvalDiagnostics d;
  EXPECT_TRUE(std::isnan(eval_script(parse_script("a/0"), env, &d)));
  EXPECT_EQ(d.division_by_zero, 1U);
  auto env2 = [](std::string_view n) {
    if (n == "a") return 2.0;
    if (n == "c") return 4.0;
    return kMissing;
  };
  EXPECT_EQ(eval_script(parse_script("mean(a,b,c)"), env2), 3);
}

TEST(Script, RoundTripRandomTrees) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    const auto ast = script_cases::random_ast(rng, 5);
    const auto text = to_source(ast);
    EXPECT_EQ(parse_script(text), ast) << text;
  }
}

TEST(Script, CollectColumns) {
  std::vector<std::string> cols;
  collect_columns(parse_script("a + max(b, a) * c"), cols);
  EXPECT_EQ(cols, (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Weights, Normalize) {
  const double w1[] = {100, 300};
  EXPECT_EQ(normalize_weights(w1), (std::vector<double>{0.25, 0.75}));
  const double w2[] = {1, 1, 1};
  for (double w : normalize_weights(w2)) EXPECT_DOUBLE_EQ(w, 1.0 / 3.0);
  const double bad[] = {1, 0};
  EXPECT_THROW(normalize_weights(bad), StateError);
  EXPECT_THROW(normalize_weights(std::span<const double>{}), StateError);
}

TEST(Stacked, Examples) {
  const double v[] = {0.2, 0.6};
  const double w[] = {0.5, 0.5};
  const auto s = eval_stacked(v, w);
  EXPECT_DOUBLE_EQ(s.score, 0.4);
  ASSERT_EQ(s.segments.size(), 2U);
  EXPECT_DOUBLE_EQ(s.segments[0].contribution, 0.1);
  const double w10[] = {1, 0};
  EXPECT_EQ(eval_stacked(v, w10).score, 0.2);
  const double vm[] = {kMissing, 0.6};
  const auto m = eval_stacked(vm, w);
  EXPECT_TRUE(m.segments[0].missing);
  EXPECT_DOUBLE_EQ(m.score, 0.3);
  EXPECT_EQ(stacked_score(v, w), s.score);
  const double w3[] = {1, 1, 1};
  EXPECT_THROW(eval_stacked(v, w3), StateError);
}

TEST(Reducer, Examples) {
  const double a[] = {0.3, 0.9};
  EXPECT_EQ(eval_reducer(Reducer::max, a), 0.9);
  const double b[] = {1, kMissing, 3};
  EXPECT_EQ(eval_reducer(Reducer::mean, b), 2);
  const double c[] = {kMissing};
  EXPECT_TRUE(std::isnan(eval_reducer(Reducer::min, c)));
}

TEST(Encoding, Defaults) {
  EXPECT_EQ(default_encoding(ColumnKind::numerical, false), EncodingKind::bar);
  EXPECT_EQ(default_encoding(ColumnKind::numerical, true), EncodingKind::histogram);
  EXPECT_EQ(default_encoding(ColumnKind::categorical, false), EncodingKind::color_cell);
  EXPECT_EQ(default_encoding(ColumnKind::categorical, true), EncodingKind::stacked_bar);
  EXPECT_EQ(default_encoding(ColumnKind::text, false), EncodingKind::string);
  EXPECT_EQ(default_encoding(ColumnKind::text, true), EncodingKind::examples);
  EXPECT_EQ(default_encoding(ColumnKind::matrix, false), EncodingKind::heatmap);
  EXPECT_EQ(default_encoding(ColumnKind::matrix, true), EncodingKind::boxplot);
}

TEST(Encoding, LegalSets) {
  EXPECT_TRUE(is_legal({CellKind::numerical, false, false}, EncodingKind::proportional_symbol));
  EXPECT_FALSE(is_legal({CellKind::numerical, false, false}, EncodingKind::histogram));
  EXPECT_TRUE(is_legal({CellKind::numerical, true, false}, EncodingKind::boxplot));
  EXPECT_TRUE(is_legal({CellKind::categorical, true, false}, EncodingKind::brightness_matrix));
  EXPECT_TRUE(is_legal({CellKind::matrix, true, false}, EncodingKind::envelope_sparkline));
  EXPECT_FALSE(is_legal({CellKind::text, false, false}, EncodingKind::bar));
  for (int k = 0; k <= static_cast<int>(EncodingKind::envelope_sparkline); ++k) {
    const auto kind = static_cast<EncodingKind>(k);
    EXPECT_EQ(encoding_from_string(to_string(kind)), kind);
  }
}

TEST(Encoding, CompactVariants) {
  EXPECT_EQ(compact_variant(EncodingKind::boxplot, 20), RenderDirective::full);
  EXPECT_EQ(compact_variant(EncodingKind::boxplot, 4), RenderDirective::compact);
  EXPECT_EQ(compact_variant(EncodingKind::string, 3), RenderDirective::omit);
  EXPECT_EQ(compact_variant(EncodingKind::bar, 1), RenderDirective::compact);
  EXPECT_EQ(compact_variant(EncodingKind::dot, 2), RenderDirective::omit);
  EXPECT_EQ(compact_variant(EncodingKind::heatmap, 1), RenderDirective::compact);
  EXPECT_EQ(compact_variant(EncodingKind::string, 13.9), RenderDirective::compact);
}
