#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geogasket/errors.hpp"
#include "geogasket/expr.hpp"

using geogasket::Expression;
using geogasket::ParseError;

TEST_CASE("arithmetic and precedence") {
    CHECK(Expression::parse("1 + 2*3")(0, 0) == 7.0);
    CHECK(Expression::parse("(1 + 2)*3")(0, 0) == 9.0);
    CHECK(Expression::parse("2^3^2")(0, 0) == 512.0);
    CHECK(Expression::parse("-u^2")(3, 0) == -9.0);
    CHECK(Expression::parse("2^-1")(0, 0) == 0.5);
    CHECK(Expression::parse("8/4/2")(0, 0) == 1.0);
    CHECK(Expression::parse("u - v - 1")(5, 2) == 2.0);
    CHECK(Expression::parse("2e-3 + .5")(0, 0) == doctest::Approx(0.502));
}

TEST_CASE("functions, constants and typographic operators") {
    CHECK(Expression::parse("pow(u, 2) + sqrt(v)")(3, 16) == 13.0);
    CHECK(Expression::parse("exp(log(2))")(0, 0) == doctest::Approx(2.0));
    CHECK(Expression::parse("sin(pi/2) + cos(0)")(0, 0) == doctest::Approx(2.0));
    CHECK(Expression::parse("cosh(u)^2 - sinh(u)^2")(0.7, 0) == doctest::Approx(1.0));
    CHECK(Expression::parse("tanh(0) + tan(0)")(0, 0) == 0.0);
    CHECK(Expression::parse("e")(0, 0) == std::numbers::e);
    CHECK(Expression::parse("6 \xc3\xb7 2 \xc3\x97 u \xe2\x88\x92 1")(2, 0) == 5.0);
    CHECK(Expression::parse("4/(1+u^2+v^2)^2").source() == "4/(1+u^2+v^2)^2");
}

TEST_CASE("errors carry line and column") {
    try {
        Expression::parse("1 +\n  * 2");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 3);
    }
    CHECK_THROWS_AS(Expression::parse("w + 1"), ParseError);
    CHECK_THROWS_AS(Expression::parse("foo(1)"), ParseError);
    CHECK_THROWS_AS(Expression::parse("pow(1)"), ParseError);
    CHECK_THROWS_AS(Expression::parse("sin(1, 2)"), ParseError);
    CHECK_THROWS_AS(Expression::parse("(1 + 2"), ParseError);
    CHECK_THROWS_AS(Expression::parse("1 2"), ParseError);
    CHECK_THROWS_AS(Expression::parse(""), ParseError);
}
