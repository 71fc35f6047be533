#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qsolve/binarize.hpp>
#include <qsolve/model.hpp>

#include "instances.hpp"

#include <random>
#include <set>

using namespace qsolve;
using qtest::make_row;

TEST_CASE("rational parsing and printing") {
    CHECK(rat_parse("1.5") == Rational(3, 2));
    CHECK(rat_parse("-0.25") == Rational(-1, 4));
    CHECK(rat_parse("42") == Rational(42));
    CHECK(rat_parse("3/4") == Rational(3, 4));
    CHECK(rat_parse("1e2") == Rational(100));
    CHECK(rat_parse("2.5e-1") == Rational(1, 4));
    CHECK(rat_str(Rational(3, 2)) == "3/2");
    CHECK(rat_str(Rational(-7)) == "-7");
    CHECK(rat_fixed(Rational(-1), 6) == "-1.000000");
    CHECK(rat_fixed(Rational(1, 3), 3) == "0.333");
    CHECK(rat_fixed(Rational(0), 6) == "0.000000");
    CHECK(rat_floor(Rational(-3, 2)) == -2);
    CHECK(rat_ceil(Rational(-3, 2)) == -1);
}

TEST_CASE("extended value ordering and folds") {
    auto mi = ExtendedValue::minus_inf();
    auto pi = ExtendedValue::plus_inf();
    auto un = ExtendedValue::unknown();
    auto two = ExtendedValue::finite(Rational(2));
    auto three = ExtendedValue::finite(Rational(3));
    CHECK(mi < two);
    CHECK(two < three);
    CHECK(three < pi);
    CHECK(ev_max(two, three) == three);
    CHECK(ev_min(mi, two) == mi);
    // unknown is dropped unless everything is unknown
    CHECK(ev_max(un, two) == two);
    CHECK(ev_min(un, pi) == pi);
    CHECK(ev_min(un, un).is_unknown());
    CHECK(ev_max(un, mi) == mi);
}

TEST_CASE("validate accepts the intro instance") {
    CHECK(validate(qtest::intro_instance()).empty());
}

TEST_CASE("validate flags continuous universal variable") {
    auto p = qtest::intro_instance();
    p.quant[2] = Quantifier::Forall;
    auto report = validate(p);
    REQUIRE(!report.empty());
    bool found = false;
    for (auto& v : report) found |= v.rule == "continuous in universal block";
    CHECK(found);
}

TEST_CASE("validate flags empty uncertainty set") {
    QuantifiedProgram p;
    p.n = 2;
    p.names = {"x1", "x2"};
    p.objective = {Rational(1), Rational(0)};
    p.quant = {Quantifier::Forall, Quantifier::Exists};
    p.kind.assign(2, VarKind::Integer);
    p.lower.assign(2, Rational(0));
    p.upper.assign(2, Rational(1));
    p.uni_rows = {make_row({{0, -1}}, -2)};  // x1 >= 2 impossible over {0,1}
    auto report = validate(p);
    REQUIRE(!report.empty());
    CHECK(report[0].rule == "universal system infeasible over D");
}

TEST_CASE("normalize_sense flips minimize and is idempotent") {
    auto p = qtest::appendix_instance();
    auto q = normalize_sense(p);
    CHECK(q.sense == Sense::Maximize);
    CHECK(q.objective_negated);
    CHECK(q.objective[2] == Rational(5));
    auto q2 = normalize_sense(q);
    CHECK(q2.objective == q.objective);
    CHECK(q2.objective_negated == q.objective_negated);

    auto m = qtest::intro_instance();
    auto m2 = normalize_sense(m);
    CHECK(m2.objective == m.objective);
    CHECK(!m2.objective_negated);
}

TEST_CASE("binarize domain {1,2,3}") {
    QuantifiedProgram p;
    p.n = 1;
    p.names = {"x"};
    p.objective = {Rational(1)};
    p.quant = {Quantifier::Exists};
    p.kind = {VarKind::Integer};
    p.lower = {Rational(1)};
    p.upper = {Rational(3)};
    auto b = binarize(p);
    REQUIRE(b.groups.size() == 1);
    CHECK(b.groups[0].bit_count == 2);
    CHECK(b.groups[0].shift == Rational(1));
    CHECK(b.objective_offset == Rational(1));
    // bound row b0 + 2 b1 <= 2 in both systems
    REQUIRE(b.prog.ex_rows.size() == 1);
    REQUIRE(b.prog.uni_rows.size() == 1);
    CHECK(b.prog.ex_rows[0].rhs == Rational(2));
    CHECK(b.prog.ex_rows[0].coef_of(0) == Rational(1));
    CHECK(b.prog.ex_rows[0].coef_of(1) == Rational(2));
    // decode covers exactly {1,2,3} over the legal patterns
    std::set<Rational> decoded;
    for (int b0 = 0; b0 <= 1; ++b0)
        for (int b1 = 0; b1 <= 1; ++b1)
            if (b0 + 2 * b1 <= 2) decoded.insert(b.decode({Rational(b0), Rational(b1)})[0]);
    CHECK(decoded == std::set<Rational>{Rational(1), Rational(2), Rational(3)});
}

TEST_CASE("binarize binary variable is the identity") {
    auto p = qtest::example48_instance();
    auto b = binarize(p);
    CHECK(b.prog.n == 3);
    CHECK(b.prog.ex_rows.size() == p.ex_rows.size());
    CHECK(b.prog.uni_rows.empty());
    CHECK(b.objective_offset == Rational(0));
    for (auto& g : b.groups) CHECK(g.bit_count == 1);
}

TEST_CASE("binarize keeps continuous pass-through") {
    auto b = binarize(qtest::intro_instance());
    CHECK(b.prog.n == 3);
    CHECK(b.groups[2].bit_count == 0);
    CHECK(b.prog.kind[2] == VarKind::Continuous);
    CHECK(b.prog.lower[2] == Rational(-2));
}

TEST_CASE("encode/decode round trip on random domains") {
    std::mt19937 rng(7);
    for (int iter = 0; iter < 200; ++iter) {
        auto p = qtest::random_instance(rng);
        auto b = binarize(p);
        std::vector<Rational> x(p.n);
        for (int i = 0; i < p.n; ++i) {
            if (p.kind[i] == VarKind::Continuous) {
                x[i] = p.lower[i];
            } else {
                long lo = to_long(rat_floor(p.lower[i]));
                long hi = to_long(rat_floor(p.upper[i]));
                x[i] = Rational(std::uniform_int_distribution<long>(lo, hi)(rng));
            }
        }
        CHECK(b.decode(b.encode(x)) == x);
        // objective consistency of the encoding
        Rational orig = normalize_sense(p).objective_of(x);
        Rational bits = b.prog.objective_of(b.encode(x)) + b.objective_offset;
        CHECK(orig == bits);
    }
}

TEST_CASE("integer_system_feasible basics") {
    std::vector<Rational> lo = {Rational(0), Rational(0)};
    std::vector<Rational> up = {Rational(1), Rational(1)};
    CHECK(integer_system_feasible({}, lo, up));
    CHECK(integer_system_feasible({make_row({{0, 1}, {1, 1}}, 1)}, lo, up));
    CHECK(!integer_system_feasible({make_row({{0, -1}, {1, -1}}, -3)}, lo, up));
    std::vector<std::optional<Rational>> fixed(2);
    fixed[0] = Rational(1);
    // x0=1 forces x1 >= 1 via x0-x1 <= 0 but x1 <= 0 forbids it
    CHECK(!integer_system_feasible({make_row({{0, 1}, {1, -1}}, 0), make_row({{1, 1}}, 0)},
                                   lo, up, fixed));
    CHECK(integer_system_feasible({make_row({{0, 1}, {1, -1}}, 0), make_row({{1, 1}}, 1)},
                                  lo, up, fixed));
}
