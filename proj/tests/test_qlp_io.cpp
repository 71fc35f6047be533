#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qsolve/binarize.hpp>
#include <qsolve/oracle.hpp>
#include <qsolve/qlp_io.hpp>

#include "instances.hpp"

#include <map>
#include <random>

using namespace qsolve;

namespace {

const char* kExampleQlp = R"(MINIMIZE
x1 +2x2 -5x3 +x4
SUBJECT TO
 x1 -2x2 +x3 -x4 <= 1
-x1 + x2 +x3 -x4 <= 1
UNCERTAINTY SUBJECT TO
x1 - x3 <= 1
BOUNDS
0 <= x1 <= 2
0 <= x2 <= 1
0 <= x3 <= 1
0 <= x4 <= 1
BINARIES
x2 x3
GENERAL
x1
EXISTS
x1 x2 x4
ALL
x3
ORDER
x1 x2 x3 x4
END
)";

// order-insensitive row form for structural comparison
std::pair<std::map<int, Rational>, Rational> canon_row(const Row& r) {
    std::map<int, Rational> m;
    for (const auto& t : r.terms)
        if (t.coef != 0) m[t.var] += t.coef;
    for (auto it = m.begin(); it != m.end();)
        it = it->second == 0 ? m.erase(it) : std::next(it);
    return {m, r.rhs};
}

bool same_rows(const std::vector<Row>& a, const std::vector<Row>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (canon_row(a[i]) != canon_row(b[i])) return false;
    return true;
}

bool structurally_equal(const QuantifiedProgram& pa, const QuantifiedProgram& pb) {
    QuantifiedProgram a = normalize_sense(pa), b = normalize_sense(pb);
    if (a.n != b.n || a.names != b.names || a.quant != b.quant || a.kind != b.kind) return false;
    if (a.lower != b.lower || a.upper != b.upper) return false;
    if (a.objective != b.objective) return false;
    return same_rows(a.ex_rows, b.ex_rows) && same_rows(a.uni_rows, b.uni_rows);
}

}  // namespace

TEST_CASE("parse of the worked four-variable file") {
    auto p = parse_qlp(kExampleQlp, "Example.qlp");
    CHECK(p.n == 4);
    CHECK(p.names == std::vector<std::string>({"x1", "x2", "x3", "x4"}));
    CHECK(p.sense == Sense::Minimize);
    CHECK(p.quant == std::vector<Quantifier>({Quantifier::Exists, Quantifier::Exists,
                                              Quantifier::Forall, Quantifier::Exists}));
    CHECK(p.kind == std::vector<VarKind>({VarKind::Integer, VarKind::Integer, VarKind::Integer,
                                          VarKind::Continuous}));
    CHECK(p.lower == std::vector<Rational>(4, Rational(0)));
    CHECK(p.upper == std::vector<Rational>({Rational(2), Rational(1), Rational(1), Rational(1)}));
    CHECK(p.objective ==
          std::vector<Rational>({Rational(1), Rational(2), Rational(-5), Rational(1)}));
    REQUIRE(p.ex_rows.size() == 2);
    REQUIRE(p.uni_rows.size() == 1);
    auto blocks = p.blocks();
    REQUIRE(blocks.size() == 3);
    CHECK(blocks[0].begin == 0);
    CHECK(blocks[0].end == 2);
    CHECK(blocks[1].begin == 2);
    CHECK(blocks[2].begin == 3);
    CHECK(structurally_equal(p, qtest::appendix_instance()));
}

TEST_CASE("parsed file solves to the documented optimum") {
    auto p = parse_qlp(kExampleQlp);
    auto res = extended_minimax(p);
    REQUIRE(res.value.is_finite());
    CHECK(res.value.value() == Rational(-1));
    CHECK(res.pv == std::vector<Rational>({Rational(2), Rational(1), Rational(1), Rational(0)}));
}

TEST_CASE("omitted uncertainty section leaves the universal system empty") {
    std::string text = "MAXIMIZE\nx1\nSUBJECT TO\n x1 + x2 <= 1\nBINARIES\nx1 x2\n"
                       "EXISTS\nx1\nALL\nx2\nORDER\nx1 x2\nEND\n";
    auto p = parse_qlp(text);
    CHECK(p.uni_rows.empty());
    CHECK(p.ex_rows.size() == 1);
    CHECK(p.sense == Sense::Maximize);
    CHECK(p.lower == std::vector<Rational>(2, Rational(0)));
    CHECK(p.upper == std::vector<Rational>(2, Rational(1)));
}

TEST_CASE("relations >= and = are normalized to <= rows") {
    std::string text = "MINIMIZE\nx1\nSUBJECT TO\n x1 + x2 >= 1\n x1 - x2 = 0\nBINARIES\n"
                       "x1 x2\nEXISTS\nx1 x2\nORDER\nx1 x2\nEND\n";
    auto p = parse_qlp(text);
    REQUIRE(p.ex_rows.size() == 3);
    CHECK(canon_row(p.ex_rows[0]) ==
          canon_row(qtest::make_row({{0, -1}, {1, -1}}, -1)));
    CHECK(canon_row(p.ex_rows[1]) == canon_row(qtest::make_row({{0, 1}, {1, -1}}, 0)));
    CHECK(canon_row(p.ex_rows[2]) == canon_row(qtest::make_row({{0, -1}, {1, 1}}, 0)));
    // the writer re-merges the adjacent complementary pair into one equality
    std::string out = write_qlp(p);
    CHECK(out.find("=") != std::string::npos);
    auto back = parse_qlp(out);
    CHECK(structurally_equal(p, back));
}

TEST_CASE("row labels, wrapped expressions and keyword case are accepted") {
    std::string text = "minimize\n x1 +\n   2x2\nsubject to\n c1 : x1\n  + x2 <= 1\nbinaries\n"
                       "x1 x2\nexists\nx1 x2\norder\nx1\n x2\nend\n";
    auto p = parse_qlp(text);
    CHECK(p.objective == std::vector<Rational>({Rational(1), Rational(2)}));
    REQUIRE(p.ex_rows.size() == 1);
    CHECK(canon_row(p.ex_rows[0]) == canon_row(qtest::make_row({{0, 1}, {1, 1}}, 1)));
}

TEST_CASE("error reporting") {
    auto expect_kind = [](const std::string& text, const std::string& kind) {
        try {
            parse_qlp(text);
            FAIL_CHECK("expected ", kind);
        } catch (const ParseError& e) {
            CHECK(e.kind == kind);
            CHECK(e.line >= 1);
            CHECK(e.column >= 1);
        }
    };
    expect_kind("MINIMIZE\nx1\nSUBJECT TO\n x1 + y9 <= 1\nBINARIES\nx1\nEXISTS\nx1\n"
                "ORDER\nx1\nEND\n",
                "UnknownVariable");
    expect_kind("MINIMIZE\nx1\nBINARIES\nx1\nEXISTS\nx1\nORDER\nx1 x1\nEND\n", "DuplicateInOrder");
    expect_kind("MINIMIZE\nx1\nBINARIES\nx1\nEXISTS\nx1\nEND\n", "MissingSection");
    expect_kind("MINIMIZE\nx1\nSUBJECT TO\n x1 <=\nBINARIES\nx1\nEXISTS\nx1\nORDER\nx1\nEND\n",
                "SyntaxError");
    expect_kind("MINIMIZE\nx1\nGENERAL\nx1\nEXISTS\nx1\nORDER\nx1\nEND\n", "MissingBounds");
    expect_kind("x1 <= 1\n", "SyntaxError");
    // a validation failure surfaces as a parse-stage error too
    expect_kind("MAXIMIZE\nx1\nUNCERTAINTY SUBJECT TO\n x2 >= 2\nBINARIES\nx1 x2\nEXISTS\nx1\n"
                "ALL\nx2\nORDER\nx1 x2\nEND\n",
                "InvalidProgram");
}

TEST_CASE("write and reparse is the identity on golden instances") {
    for (const auto& p :
         {qtest::intro_instance(), qtest::example26_instance(), qtest::fig4_instance(),
          qtest::example46_instance(), qtest::example48_instance(), qtest::appendix_instance()}) {
        auto back = parse_qlp(write_qlp(p), p.name);
        CHECK(structurally_equal(p, back));
    }
}

TEST_CASE("write and reparse is the identity on random programs") {
    std::mt19937 rng(71);
    for (int iter = 0; iter < 500; ++iter) {
        auto p = qtest::random_instance(rng);
        auto back = parse_qlp(write_qlp(p), p.name);
        CHECK(structurally_equal(p, back));
        // normalized programs round-trip as well
        auto norm = normalize_sense(p);
        CHECK(structurally_equal(norm, parse_qlp(write_qlp(norm), p.name)));
    }
}

TEST_CASE("fractional coefficients survive the round trip") {
    QuantifiedProgram p;
    p.n = 2;
    p.names = {"a", "b"};
    p.objective = {Rational(1, 3), Rational(-5, 4)};
    p.quant = {Quantifier::Exists, Quantifier::Forall};
    p.kind = {VarKind::Integer, VarKind::Integer};
    p.lower = {Rational(-1), Rational(0)};
    p.upper = {Rational(2), Rational(1)};
    p.ex_rows = {qtest::make_row({{0, Rational(7, 2)}, {1, Rational(-1, 3)}}, Rational(5, 6))};
    p.sense = Sense::Maximize;
    p.name = "fractions";
    auto back = parse_qlp(write_qlp(p), p.name);
    CHECK(structurally_equal(p, back));
}

TEST_CASE("solution xml for the worked example") {
    auto p = parse_qlp(kExampleQlp, "Example.qlp");
    auto b = binarize(p);
    std::vector<Rational> pv = {Rational(2), Rational(1), Rational(1), Rational(0)};
    SolutionDocument doc;
    doc.problem_name = "Example.qlp";
    doc.solution_name = "Example.qlp.sol";
    doc.objective_value = rat_fixed(Rational(-1), 6);
    doc.runtime_seconds = 0.03;
    doc.decision_nodes = 8;
    doc.propagation_steps = 11;
    doc.learnt_constraints = 5;
    doc.variables = solution_variables(b, pv);
    std::string xml = write_solution_xml(doc);
    CHECK(xml.find("<?xml version = \"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>") !=
          std::string::npos);
    CHECK(xml.find("<YasolSolution version=\"1\">") != std::string::npos);
    CHECK(xml.find("ProblemName=\"Example.qlp\"") != std::string::npos);
    CHECK(xml.find("SolutionName=\"Example.qlp.sol\"") != std::string::npos);
    CHECK(xml.find("ObjectiveValue=\"-1.000000\"") != std::string::npos);
    CHECK(xml.find("Runtime=\"0.030seconds\"") != std::string::npos);
    CHECK(xml.find("RuntimeSeconds=\"0.030000\"") != std::string::npos);
    CHECK(xml.find("DecisionNodes=\"8\"") != std::string::npos);
    CHECK(xml.find("PropagationSteps=\"11\"") != std::string::npos);
    CHECK(xml.find("LearntConstraints=\"5\"") != std::string::npos);
    CHECK(xml.find("SolutionStatus=\"OPTIMAL\"") != std::string::npos);
    CHECK(xml.find("Gap=\"0.000000\"") != std::string::npos);
    // the two-bit general variable reports a spanned index and decoded value
    CHECK(xml.find("<variable name=\"x1\" index=\"0-1\" value=\"2\" block=\"1\"/>") !=
          std::string::npos);
    CHECK(xml.find("<variable name=\"x2\" index=\"2\" value=\"1\" block=\"1\"/>") !=
          std::string::npos);
    CHECK(xml.find("<variable name=\"x3\" index=\"3\" value=\"1\" block=\"2\"/>") !=
          std::string::npos);
    CHECK(xml.find("<variable name=\"x4\" index=\"4\" value=\"0.000000\" block=\"3\"/>") !=
          std::string::npos);
    CHECK(xml.find("</YasolSolution>") != std::string::npos);
    // infeasible reports carry no variables
    SolutionDocument inf;
    inf.problem_name = "p";
    inf.solution_name = "p.sol";
    inf.objective_value = "-infinity";
    inf.status = "INFEASIBLE";
    std::string xml2 = write_solution_xml(inf);
    CHECK(xml2.find("<variable ") == std::string::npos);
    CHECK(xml2.find("SolutionStatus=\"INFEASIBLE\"") != std::string::npos);
}
