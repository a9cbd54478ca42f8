#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "insfem/expression.hpp"
#include "insfem/hit.hpp"

using namespace insfem;

TEST_CASE("dollar bracket substitution") {
  const std::string text = "mu=4e-3\nrho=1\n[Materials]\n  vals = '${rho} ${mu}'\n[]\n";
  const std::string out = substitute_dbe(text);
  CHECK(out.find("'1 4e-3'") != std::string::npos);
  CHECK(out.find("${") == std::string::npos);

  // no substitutions: unchanged
  const std::string plain = "[A]\n  k = v\n[]\n";
  CHECK(substitute_dbe(plain) == plain);

  // undefined name: error carries the name
  try {
    substitute_dbe("[A]\n  k = ${nope}\n[]\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("nope") != std::string::npos);
    CHECK(e.line == 2);
  }

  // idempotent once nothing remains
  CHECK(substitute_dbe(out) == out);
}

TEST_CASE("parse_hit: kernels listing structure") {
  const std::string text = R"([Kernels]
  # continuity equation
  [./mass]
    type = INSMass
    variable = p
  [../]

  [./x_time]
    type = INSMomentumTimeDerivative
    variable = vel_x
  [../]
  [./x_momentum_space]
    type = INSMomentumLaplaceForm
    variable = vel_x
    component = 0
  [../]
[]
)";
  const ParamTree tree = parse_hit(text);
  const ParamNode* kernels = tree.section("Kernels");
  REQUIRE(kernels != nullptr);
  REQUIRE(kernels->children.size() == 3);
  CHECK(kernels->children[0].name == "mass");
  CHECK(*kernels->children[0].find("type") == "INSMass");
  CHECK(*kernels->children[2].find("component") == "0");
}

TEST_CASE("parse_hit: edge cases and errors") {
  CHECK(parse_hit("").sections.empty());

  const ParamTree t = parse_hit("[G]\n  gravity = '0 0 0'\n[]\n");
  const auto list = split_list(*t.section("G")->find("gravity"));
  REQUIRE(list.size() == 3);
  CHECK(list[0] == "0");

  CHECK_THROWS_AS(parse_hit("[A]\n  k = 1\n"), ParseError);          // unclosed
  CHECK_THROWS_AS(parse_hit("[A]\n k = 1\n k = 2\n[]\n"), ParseError);  // dup key
  CHECK_THROWS_AS(parse_hit("[A]\n[]\n[A]\n[]\n"), ParseError);      // dup section
  CHECK_THROWS_AS(parse_hit("stray token\n"), ParseError);
  CHECK_THROWS_AS(parse_hit("[../]\n"), ParseError);
  CHECK_THROWS_AS(parse_hit("[./sub]\n[../]\n"), ParseError);  // nested at top level
}

TEST_CASE("parse_hit line numbers in errors") {
  try {
    parse_hit("[A]\n  good = 1\n  bad bad\n[]\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }
}

TEST_CASE("hit render round-trip on fuzzed trees") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> nkeys(0, 4), nchil(0, 3), len(1, 8), chr(0, 25);
  std::uniform_int_distribution<int> with_space(0, 3);

  auto name = [&](const char* prefix, int i) { return std::string(prefix) + std::to_string(i); };
  auto value = [&]() {
    std::string v;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) v += static_cast<char>('a' + chr(rng));
    if (with_space(rng) == 0) v += " tail";
    return v;
  };

  for (int trial = 0; trial < 200; ++trial) {
    ParamTree t;
    const int ntop = nchil(rng) + 1;
    for (int k = 0; k < nkeys(rng); ++k) t.toplevel.emplace_back(name("var", k), value());
    for (int s = 0; s < ntop; ++s) {
      ParamNode sec{name("Sec", s), {}, {}};
      for (int k = 0; k < nkeys(rng); ++k) sec.params.emplace_back(name("key", k), value());
      const int nc = nchil(rng);
      for (int c = 0; c < nc; ++c) {
        ParamNode child{name("sub", c), {}, {}};
        for (int k = 0; k < nkeys(rng); ++k) child.params.emplace_back(name("ck", k), value());
        if (c == 0) {
          ParamNode grand{name("deep", 0), {}, {}};
          grand.params.emplace_back("k", value());
          child.children.push_back(grand);
        }
        sec.children.push_back(child);
      }
      t.sections.push_back(sec);
    }
    const ParamTree round = parse_hit(render_hit(t));
    CHECK(round == t);
  }
}

TEST_CASE("expression: inlet function from the channel-flow setup") {
  const Expression e = Expression::parse("sqrt((x-2)^2 * (x+2)^2 * (y-2)^2 * (y+2)^2) / 16");
  CHECK(e.eval(0, 0) == doctest::Approx(1.0));
  CHECK(e.eval(2, 0.3) == doctest::Approx(0.0));
  CHECK(e.eval(0, 2) == doctest::Approx(0.0));
}

TEST_CASE("expression: lid profile and basics") {
  const Expression lid = Expression::parse("4*x*(1-x)");
  CHECK(lid.eval(0.5, 0) == doctest::Approx(1.0));
  CHECK(lid.eval(0, 0) == doctest::Approx(0.0));

  CHECK(Expression::parse("2^3^2").eval(0) == doctest::Approx(512.0));  // right assoc
  CHECK(Expression::parse("-2^2").eval(0) == doctest::Approx(-4.0));
  CHECK(Expression::parse("min(3, max(1, 2))").eval(0) == doctest::Approx(2.0));
  CHECK(Expression::parse("coth(1)").eval(0) == doctest::Approx(1.0 / std::tanh(1.0)));
  CHECK(Expression::parse("pi").eval(0) == doctest::Approx(3.14159265358979));
  CHECK(Expression::parse("exp(log(7))").eval(0) == doctest::Approx(7.0));

  CHECK_THROWS_AS(Expression::parse("2 +"), ParseError);
  CHECK_THROWS_AS(Expression::parse("bogus(3)"), ParseError);
  CHECK_THROWS_AS(Expression::parse("x + q"), ParseError);
  CHECK_THROWS_AS(Expression::parse("sqrt(0-1)").eval(0), EvalError);
  CHECK_THROWS_AS(Expression::parse("log(0)").eval(0), EvalError);
  CHECK_THROWS_AS(Expression::parse("1/(x-1)").eval(1), EvalError);
}

// Random AST fuzz: build a tree, print it, parse the print, compare against
// the direct evaluation of the tree (the reference evaluator).
namespace {

struct RandomExpr {
  std::string text;
  std::function<double(double, double, double, double)> eval;
};

RandomExpr gen(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> kind(0, depth <= 0 ? 1 : 6);
  std::uniform_real_distribution<double> num(0.1, 5.0);
  switch (kind(rng)) {
    case 0: {
      const double v = num(rng);
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return {buf, [v](double, double, double, double) { return v; }};
    }
    case 1: {
      std::uniform_int_distribution<int> which(0, 3);
      const int w = which(rng);
      const char* names[4] = {"x", "y", "z", "t"};
      return {names[w], [w](double x, double y, double z, double t) {
                const double v[4] = {x, y, z, t};
                return v[w];
              }};
    }
    case 2: {
      auto a = gen(rng, depth - 1);
      auto b = gen(rng, depth - 1);
      return {"(" + a.text + " + " + b.text + ")",
              [a, b](double x, double y, double z, double t) {
                return a.eval(x, y, z, t) + b.eval(x, y, z, t);
              }};
    }
    case 3: {
      auto a = gen(rng, depth - 1);
      auto b = gen(rng, depth - 1);
      return {"(" + a.text + " - " + b.text + ")",
              [a, b](double x, double y, double z, double t) {
                return a.eval(x, y, z, t) - b.eval(x, y, z, t);
              }};
    }
    case 4: {
      auto a = gen(rng, depth - 1);
      auto b = gen(rng, depth - 1);
      return {"(" + a.text + " * " + b.text + ")",
              [a, b](double x, double y, double z, double t) {
                return a.eval(x, y, z, t) * b.eval(x, y, z, t);
              }};
    }
    case 5: {
      auto a = gen(rng, depth - 1);
      return {"sin(" + a.text + ")", [a](double x, double y, double z, double t) {
                return std::sin(a.eval(x, y, z, t));
              }};
    }
    default: {
      auto a = gen(rng, depth - 1);
      return {"sqrt(abs(" + a.text + "))", [a](double x, double y, double z, double t) {
                return std::sqrt(std::abs(a.eval(x, y, z, t)));
              }};
    }
  }
}

}  // namespace

TEST_CASE("expression fuzz against reference evaluator") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> pt(-2.0, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const RandomExpr re = gen(rng, 4);
    const Expression e = Expression::parse(re.text);
    const double x = pt(rng), y = pt(rng), z = pt(rng), t = pt(rng);
    const double a = e.eval(x, y, z, t);
    const double b = re.eval(x, y, z, t);
    CHECK(a == doctest::Approx(b).epsilon(1e-13));
  }
}
