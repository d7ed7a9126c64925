#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>

#include "tilingaf/field.hpp"

using tilingaf::FieldElem;
using tilingaf::Rat;

static FieldElem fe(const char* s) { return FieldElem::parse(s); }

TEST_CASE("square-free predicate") {
    CHECK(tilingaf::is_square_free(1));
    CHECK(tilingaf::is_square_free(2));
    CHECK(tilingaf::is_square_free(3));
    CHECK(tilingaf::is_square_free(5));
    CHECK(tilingaf::is_square_free(6));
    CHECK(tilingaf::is_square_free(30));
    CHECK_FALSE(tilingaf::is_square_free(4));
    CHECK_FALSE(tilingaf::is_square_free(8));
    CHECK_FALSE(tilingaf::is_square_free(12));
    CHECK_FALSE(tilingaf::is_square_free(18));
    CHECK_FALSE(tilingaf::is_square_free(0));
    CHECK_FALSE(tilingaf::is_square_free(-2));
}

TEST_CASE("construction and normalization") {
    CHECK(FieldElem().is_zero());
    CHECK(FieldElem(3).str() == "3");
    CHECK(FieldElem::ratio(-7, 4).str() == "-7/4");

    // b == 0 collapses to the rational field regardless of requested d.
    FieldElem z(Rat(5), Rat(0), 2);
    CHECK(z.is_rational());
    CHECK(z.d() == 0);
    CHECK(z == FieldElem(5));

    // sqrt(1) folds into the rational part.
    FieldElem one = FieldElem(Rat(2), Rat(3), 1);
    CHECK(one.is_rational());
    CHECK(one == FieldElem(5));

    // Non-square-free or negative radicands are rejected.
    CHECK_THROWS_AS(FieldElem(Rat(0), Rat(1), 8), tilingaf::ParseError);
    CHECK_THROWS_AS(FieldElem(Rat(0), Rat(1), -2), tilingaf::ParseError);
    CHECK_THROWS_AS(FieldElem(Rat(0), Rat(1), 0), tilingaf::ParseError);
}

TEST_CASE("arithmetic in Q") {
    FieldElem a = FieldElem::ratio(1, 2);
    FieldElem b = FieldElem::ratio(1, 3);
    CHECK((a + b).str() == "5/6");
    CHECK((a - b).str() == "1/6");
    CHECK((a * b).str() == "1/6");
    CHECK((a / b).str() == "3/2");
    CHECK((-a).str() == "-1/2");
    CHECK(a.pow(3).str() == "1/8");
    CHECK(a.pow(0).str() == "1");
}

TEST_CASE("arithmetic in Q(sqrt(2))") {
    FieldElem s2 = FieldElem::sqrt_of(2);
    // (1+sqrt2)^2 = 3 + 2 sqrt2
    FieldElem u = FieldElem(1) + s2;
    CHECK((u * u).str() == "3+2*sqrt(2)");
    CHECK(u.pow(2) == u * u);
    // (1+sqrt2)(1-sqrt2) = -1
    CHECK((u * (FieldElem(1) - s2)) == FieldElem(-1));
    // inverse: 1/(1+sqrt2) = -1 + sqrt2
    CHECK(u.inverse().str() == "-1+1*sqrt(2)");
    CHECK((u * u.inverse()) == FieldElem(1));
    // surd part cancels back to a rational
    FieldElem diff = u - s2;
    CHECK(diff.is_rational());
    CHECK(diff == FieldElem(1));
}

TEST_CASE("mixing distinct quadratic fields throws") {
    FieldElem s2 = FieldElem::sqrt_of(2);
    FieldElem s3 = FieldElem::sqrt_of(3);
    CHECK_THROWS_AS(s2 + s3, tilingaf::FieldMismatch);
    CHECK_THROWS_AS(s2 * s3, tilingaf::FieldMismatch);
    // ... but rationals combine with anything.
    CHECK((s2 + FieldElem(1)).str() == "1+1*sqrt(2)");
    CHECK((FieldElem(2) * s3).str() == "2*sqrt(3)");
}

TEST_CASE("exact sign — all branches") {
    // rational only
    CHECK(FieldElem(3).sign() == 1);
    CHECK(FieldElem(-3).sign() == -1);
    CHECK(FieldElem(0).sign() == 0);
    // surd only
    CHECK(FieldElem::sqrt_of(2).sign() == 1);
    CHECK((-FieldElem::sqrt_of(2)).sign() == -1);
    // same signs
    CHECK(fe("1+1*sqrt(2)").sign() == 1);
    CHECK(fe("-1-1*sqrt(2)").sign() == -1);
    // a > 0, b < 0: sign decided by a^2 vs d b^2
    CHECK(fe("3/2-1*sqrt(2)").sign() == 1);    // 9/4 > 2
    CHECK(fe("7/5-1*sqrt(2)").sign() == -1);   // 49/25 < 2
    // a < 0, b > 0
    CHECK(fe("-3/2+1*sqrt(2)").sign() == -1);
    CHECK(fe("-7/5+1*sqrt(2)").sign() == 1);
}

TEST_CASE("ordering against rationals") {
    // 1 + sqrt(2) = 2.414...
    FieldElem u = fe("1+1*sqrt(2)");
    CHECK(u < fe("5/2"));
    CHECK(u > fe("12/5"));
    CHECK(u <= u);
    CHECK(u >= u);
    CHECK(u.abs() == u);
    CHECK((-u).abs() == u);
    // sqrt(2) vs 3/2: 2 < 9/4
    CHECK(FieldElem::sqrt_of(2) < FieldElem::ratio(3, 2));
    CHECK(FieldElem::sqrt_of(2) > FieldElem::ratio(7, 5));
}

TEST_CASE("serialization round-trips") {
    const char* cases[] = {
        "0",       "7",          "-7",
        "7/4",     "-7/4",       "1*sqrt(2)",
        "-1*sqrt(2)",            "3/2*sqrt(5)",
        "1+1*sqrt(2)",           "-1/2-3/4*sqrt(3)",
        "2-1*sqrt(2)",           "-5+2/7*sqrt(10)",
    };
    for (const char* c : cases) {
        CAPTURE(c);
        FieldElem v = FieldElem::parse(c);
        CHECK(v.str() == c);
        CHECK(FieldElem::parse(v.str()) == v);
    }
    // lenient whitespace, canonical output
    CHECK(fe(" 1 + 1 * sqrt( 2 )").str() == "1+1*sqrt(2)");
    CHECK(fe("sqrt(2)").str() == "1*sqrt(2)");
    CHECK(fe("2+sqrt(2)").str() == "2+1*sqrt(2)");
    // non-canonical but meaningful inputs normalize
    CHECK(fe("0*sqrt(2)").str() == "0");
    CHECK(fe("1+0*sqrt(2)").str() == "1");
    CHECK(fe("1*sqrt(1)").str() == "1");
    // surd-first order is accepted
    CHECK(fe("1*sqrt(2)+1").str() == "1+1*sqrt(2)");
}

TEST_CASE("parse rejects malformed input") {
    const char* bad[] = {
        "",       "+",        "1//2",    "1/0",      "1.5",
        "sqrt()", "sqrt(x)",  "1*sqrt(2)*2",          "1+2+3",
        "sqrt(2)+sqrt(2)",    "one",     "1*sqrt(8)", "--1",
    };
    for (const char* c : bad) {
        CAPTURE(c);
        CHECK_THROWS_AS(FieldElem::parse(c), tilingaf::ParseError);
    }
}

TEST_CASE("division by zero throws") {
    CHECK_THROWS_AS(FieldElem(1) / FieldElem(0), std::domain_error);
    CHECK_THROWS_AS(FieldElem(0).inverse(), std::domain_error);
}

TEST_CASE("to_double approximates the exact value") {
    CHECK(FieldElem::ratio(1, 4).to_double() == doctest::Approx(0.25));
    CHECK(fe("1+1*sqrt(2)").to_double() == doctest::Approx(2.41421356237));
    CHECK(fe("-3/2*sqrt(5)").to_double() == doctest::Approx(-3.35410196625));
}

TEST_CASE("key_less is a usable strict weak order over mixed fields") {
    std::map<FieldElem, int, bool (*)(const FieldElem&, const FieldElem&)> m(FieldElem::key_less);
    m[fe("1")] = 1;
    m[fe("1*sqrt(2)")] = 2;
    m[fe("1*sqrt(3)")] = 3;
    m[fe("1+1*sqrt(2)")] = 4;
    m[fe("1")] = 10;  // overwrite, not duplicate
    CHECK(m.size() == 4);
    CHECK(m[fe("1")] == 10);
    CHECK(m[fe("1*sqrt(2)")] == 2);
}

TEST_CASE("equality is exact structural equality") {
    CHECK(fe("1/2") == fe("2/4"));
    CHECK(fe("1+1*sqrt(2)") != fe("1+1*sqrt(3)"));
    CHECK(fe("1+1*sqrt(2)") != fe("1"));
}
