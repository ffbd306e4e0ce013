#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>
#include <string>

#include "radphi/expr.hpp"

using radphi::EvalError;
using radphi::ParseError;
using radphi::expr::parse;

TEST_CASE("parse honours precedence and associativity", "[expr]") {
  SECTION("u^2*v at u=2, v=3 is 12") {
    const auto e = parse("u^2*v", {"u", "v"});
    CHECK(e(2.0, 3.0) == 12.0);
  }
  SECTION("identity") { CHECK(parse("r", {"r"})(5.0) == 5.0); }
  SECTION("power is right-associative") { CHECK(parse("2^3^2", {})(std::span<const double>{}) == 512.0); }
  SECTION("unary minus binds looser than ^") { CHECK(parse("-2^2", {})(std::span<const double>{}) == -4.0); }
  SECTION("exponent may start with unary minus") {
    CHECK(parse("(1+r)^(-2)", {"r"})(1.0) == 0.25);
    CHECK(parse("2^-1", {})(std::span<const double>{}) == 0.5);
  }
  SECTION("subtraction and division are left-associative") {
    CHECK(parse("8-4-2", {})(std::span<const double>{}) == 2.0);
    CHECK(parse("8/4/2", {})(std::span<const double>{}) == 1.0);
  }
  SECTION("functions") {
    CHECK(parse("exp(0)", {})(std::span<const double>{}) == 1.0);
    CHECK(parse("ln(1+t)", {"t"})(0.0) == 0.0);
    CHECK(parse("sqrt(t)", {"t"})(9.0) == 3.0);
    CHECK(parse("pow(t, 3)", {"t"})(2.0) == 8.0);
    CHECK(parse("min(u, v) + max(u, v)", {"u", "v"})(1.0, 4.0) == 5.0);
    CHECK(parse("asinh(sinh(t))", {"t"})(0.5) == Catch::Approx(0.5).epsilon(1e-15));
  }
  SECTION("scientific literals") { CHECK(parse("1.5e3*t", {"t"})(2.0) == 3000.0); }
}

TEST_CASE("named evaluation", "[expr]") {
  const auto e = parse("u - 2*v", {"u", "v"});
  CHECK(e.eval({{"u", 5.0}, {"v", 1.0}}) == 3.0);
  CHECK_THROWS_AS(e.eval({{"u", 5.0}}), EvalError);
}

TEST_CASE("constants fold at parse time", "[expr]") {
  const std::map<std::string, double> params{{"gamma", 3.0}};
  const auto e = parse("(1+r)^(-gamma)", {"r"}, &params);
  CHECK(e(1.0) == 0.125);
  CHECK(e.to_string().find("gamma") == std::string::npos);
}

TEST_CASE("malformed input is rejected with a position", "[expr]") {
  auto position_of = [](const std::string& text) -> long {
    try {
      parse(text, {"u", "v"});
    } catch (const ParseError& e) {
      return static_cast<long>(e.position());
    }
    return -1;
  };
  CHECK(position_of("u +") == 3);
  CHECK(position_of("") == 0);
  CHECK(position_of("u * * v") == 4);
  CHECK(position_of("w") == 0);
  CHECK(position_of("exp(u, v)") >= 0);
  CHECK(position_of("min(u)") >= 0);
  CHECK(position_of("(u + v") == 6);
  CHECK(position_of("u v") == 2);
  CHECK(position_of("foo(u)") == 0);
  CHECK(position_of("2u") >= 0);
}

TEST_CASE("domain violations raise EvalError", "[expr]") {
  const std::span<const double> none{};
  CHECK_THROWS_AS(parse("ln(0)", {})(none), EvalError);
  CHECK_THROWS_AS(parse("ln(-1)", {})(none), EvalError);
  CHECK_THROWS_AS(parse("sqrt(-1)", {})(none), EvalError);
  CHECK_THROWS_AS(parse("1/0", {})(none), EvalError);
  CHECK_THROWS_AS(parse("0^(-1)", {})(none), EvalError);
  CHECK_THROWS_AS(parse("(-2)^0.5", {})(none), EvalError);
  CHECK(parse("(-2)^3", {})(none) == -8.0);
  CHECK_THROWS_AS(parse("t", {"t"})(std::span<const double>{}), EvalError);
}

TEST_CASE("printing round-trips bit-exactly", "[expr]") {
  const char* sources[] = {"-(u - v)^2", "u - (v - 1)", "u / (v * 2)", "(u^v)^2", "-u^2", "2^-u", "-(-u)",
                           "min(u, v)^(1/3)", "u*v/(u+v)", "exp(-u) * (1 + v)^(-2.5)"};
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(0.1, 3.0);
  for (const char* src : sources) {
    const auto e = parse(src, {"u", "v"});
    const auto minimal = parse(e.to_string(), {"u", "v"});
    const auto full = parse(e.to_string(true), {"u", "v"});
    INFO(src << " -> " << e.to_string() << " | " << e.to_string(true));
    for (int j = 0; j < 100; ++j) {
      const double u = d(rng);
      const double v = d(rng);
      CHECK(minimal(u, v) == e(u, v));
      CHECK(full(u, v) == e(u, v));
    }
  }
}
