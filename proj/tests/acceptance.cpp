// Acceptance suite: nine checks, one pass/fail line each, nonzero exit on
// any failure.

#include <qsolve/binarize.hpp>
#include <qsolve/mcn.hpp>
#include <qsolve/oracle.hpp>
#include <qsolve/qlp_io.hpp>
#include <qsolve/relaxation.hpp>
#include <qsolve/scp.hpp>
#include <qsolve/search.hpp>

#include "instances.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

using namespace qsolve;
using qtest::make_row;

namespace {

int failures = 0;

void criterion(int number, const std::string& label, const std::function<bool()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string note;
    try {
        ok = body();
    } catch (const std::exception& e) {
        note = std::string(" (") + e.what() + ")";
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1fs", dt);
    std::cout << "criterion " << number << " [" << buf << "] " << label << ": "
              << (ok ? "PASS" : "FAIL") << note << "\n"
              << std::flush;
    if (!ok) ++failures;
}

SolverConfig cfg_with(bool scp, RelaxationMode mode, bool exact = false) {
    SolverConfig c;
    c.scp = scp;
    c.relaxation = mode;
    c.exact_lp = exact;
    return c;
}

bool value_is(const SolveResult& r, const Rational& v) {
    return r.status == SolveStatus::Optimal && r.value == ExtendedValue::finite(v);
}

bool matches_oracle(const QuantifiedProgram& p, const SolverConfig& cfg,
                    const OracleResult& oracle) {
    auto res = solve(p, cfg);
    if (res.value.tag() != oracle.value.tag()) return false;
    if (oracle.value.is_finite()) {
        if (res.value.value() != oracle.value.value()) return false;
        if (res.status != SolveStatus::Optimal) return false;
        if (static_cast<int>(res.pv.size()) != p.n) return false;
        if (p.objective_of(res.pv) != oracle.value.value()) return false;
        if (!p.system_satisfied(p.ex_rows, res.pv)) return false;
        if (!p.system_satisfied(p.uni_rows, res.pv)) return false;
    }
    return true;
}

// ----- criterion 7 helper: combinatorial critical-node oracle -----
//
// A node ends up infected when it is attacked while unvaccinated, or when an
// infected in-neighbor spreads to it and it is neither vaccinated nor
// protected. The value is the saved-node count under optimal play
// max over vaccinations, min over attacks, max over protections.

int saved_nodes(const Graph& g, unsigned z, unsigned y, unsigned x) {
    unsigned infected = y & ~z;
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& [u, v] : g.arcs) {
            if ((infected >> u & 1u) && !(infected >> v & 1u) && !(z >> v & 1u) &&
                !(x >> v & 1u)) {
                infected |= 1u << v;
                grew = true;
            }
        }
    }
    return g.n - __builtin_popcount(infected);
}

std::vector<unsigned> budget_subsets(int n, int budget) {
    std::vector<unsigned> out;
    for (unsigned s = 0; s < (1u << n); ++s)
        if (__builtin_popcount(s) <= budget) out.push_back(s);
    return out;
}

int mcn_brute_force(const Graph& g, int omega, int phi, int lambda) {
    auto zs = budget_subsets(g.n, omega);
    auto ys = budget_subsets(g.n, phi);
    auto xs = budget_subsets(g.n, lambda);
    int best = 0;
    for (unsigned z : zs) {
        int worst = g.n;
        for (unsigned y : ys) {
            int best_protect = 0;
            for (unsigned x : xs) best_protect = std::max(best_protect, saved_nodes(g, z, y, x));
            worst = std::min(worst, best_protect);
        }
        best = std::max(best, worst);
    }
    return best;
}

// ----- criterion 9 helper -----

const char* kAppendixQlp = R"(MINIMIZE
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

}  // namespace

int main() {
    criterion(1, "golden worked examples solve exactly", [] {
        struct Golden {
            QuantifiedProgram p;
            ExtendedValue value;
            std::vector<Rational> pv;  // empty = not checked
        };
        std::vector<Golden> goldens;
        goldens.push_back({qtest::intro_instance(), ExtendedValue::finite(Rational(1)),
                           {Rational(0), Rational(1), Rational(0)}});
        goldens.push_back({qtest::example26_instance(), ExtendedValue::finite(Rational(2)),
                           {Rational(1), Rational(1), Rational(0)}});
        goldens.push_back({qtest::fig4_instance(), ExtendedValue::finite(Rational(-2)), {}});
        goldens.push_back({qtest::nosuicide_instance(), ExtendedValue::minus_inf(), {}});
        goldens.push_back({qtest::nosuicide_instance(true), ExtendedValue::plus_inf(), {}});
        goldens.push_back({qtest::example46_instance(), ExtendedValue::finite(Rational(1)), {}});
        goldens.push_back({qtest::example48_instance(), ExtendedValue::finite(Rational(-2)),
                           {Rational(0), Rational(1), Rational(1)}});
        for (const auto& g : goldens) {
            auto t0 = std::chrono::steady_clock::now();
            auto r = solve(g.p);
            double dt =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (dt >= 1.0) return false;
            if (r.value != g.value) return false;
            if (!g.pv.empty() && r.pv != g.pv) return false;
        }
        // first-stage decision of the four-variable alternation instance
        auto r46 = solve(qtest::example46_instance());
        return r46.pv.size() == 4 && r46.pv[0] == Rational(1);
    });

    criterion(2, "dominance row flips the three-variable game to infeasible", [] {
        auto r = solve(qtest::example48_instance(true));
        return r.status == SolveStatus::Infeasible && r.value.is_minus_inf();
    });

    criterion(3, "oracle equivalence on 500 random instances under 8 configurations", [] {
        std::mt19937 rng(771133);
        int checked = 0;
        for (int iter = 0; checked < 500 && iter < 2000; ++iter) {
            qtest::RandomInstanceOptions opt;
            if (iter % 3 == 2) {
                opt.max_vars = 7;
                opt.max_domain = 4;
            }
            QuantifiedProgram p = qtest::random_instance(rng, opt);
            OracleResult oracle;
            try {
                oracle = extended_minimax(p);
            } catch (const TooLarge&) {
                continue;
            }
            for (bool scp : {false, true}) {
                if (!matches_oracle(p, cfg_with(scp, RelaxationMode::None), oracle)) return false;
                if (!matches_oracle(p, cfg_with(scp, RelaxationMode::FixedScenario), oracle))
                    return false;
                if (!matches_oracle(p, cfg_with(scp, RelaxationMode::SRelaxation), oracle))
                    return false;
                if (!matches_oracle(p, cfg_with(scp, RelaxationMode::FixedScenario, true), oracle))
                    return false;
            }
            ++checked;
        }
        return checked >= 500;
    });

    criterion(4, "relaxation bounds dominate exact values and match the worked numbers", [] {
        auto p = qtest::example46_instance();
        std::vector<std::optional<Rational>> fixed(p.n);
        auto scen = [](int x2, int x4) {
            return std::vector<Rational>{Rational(0), Rational(x2), Rational(0), Rational(x4)};
        };
        auto out1 = solve_lp_exact(fixed_scenario_relaxation(p, scen(1, 0), fixed));
        auto out2 = solve_lp_exact(fixed_scenario_relaxation(p, scen(1, 1), fixed));
        if (!out1.feasible || out1.objective != Rational(2)) return false;
        if (!out2.feasible || out2.objective != Rational(2)) return false;
        std::vector<Scenario> scens(2);
        scens[0].values = scen(1, 0);
        scens[1].values = scen(1, 1);
        auto dep = solve_lp_exact(s_relaxation_dep(p, scens, fixed).lp);
        if (!dep.feasible || dep.objective != Rational(1)) return false;

        // every root relaxation value upper-bounds the exact value
        std::mt19937 rng(771134);
        qtest::RandomInstanceOptions opt;
        opt.allow_decision_dependent = false;
        opt.allow_continuous = false;
        for (int it = 0; it < 120; ++it) {
            QuantifiedProgram q = qtest::random_instance(rng, opt);
            OracleResult oracle;
            try {
                oracle = extended_minimax(q);
            } catch (const TooLarge&) {
                continue;
            }
            if (!oracle.value.is_finite()) continue;
            Rational exact = oracle.value.value();
            std::vector<std::optional<Rational>> none(q.n);
            std::vector<Scenario> pool;
            std::vector<Rational> values(q.n, Rational(0));
            std::function<bool(int)> rec = [&](int j) -> bool {
                while (j < q.n && q.quant[j] != Quantifier::Forall) ++j;
                if (j == q.n) {
                    if (!scenario_in_uncertainty_set(q, values)) return true;
                    auto out = solve_lp_exact(fixed_scenario_relaxation(q, values, none));
                    if (!out.feasible || out.objective < exact) return false;
                    if (pool.size() < 4) pool.push_back({values, 0.0, 0});
                    return true;
                }
                for (Rational v = q.lower[j]; v <= q.upper[j]; v += 1) {
                    values[j] = v;
                    if (!rec(j + 1)) return false;
                }
                return true;
            };
            if (!rec(0)) return false;
            if (pool.size() >= 2) {
                auto out = solve_lp_exact(s_relaxation_dep(q, pool, none).lp);
                if (!out.feasible || out.objective < exact) return false;
            }
        }
        return true;
    });

    criterion(5, "alpha-beta best-case leaf counts on uniform trees", [] {
        for (int d : {2, 4, 6, 8}) {
            QuantifiedProgram p;
            p.n = d;
            for (int i = 0; i < d; ++i) {
                p.names.push_back("x" + std::to_string(i + 1));
                p.objective.push_back(Rational(0));
                p.quant.push_back(i % 2 == 0 ? Quantifier::Exists : Quantifier::Forall);
                p.kind.push_back(VarKind::Integer);
                p.lower.push_back(Rational(0));
                p.upper.push_back(Rational(1));
            }
            auto res = solve(p, cfg_with(false, RelaxationMode::None));
            long want = (1L << (d / 2)) + (1L << (d - d / 2)) - 1;
            if (res.stats.leaf_evals != want) return false;
        }
        return true;
    });

    criterion(6, "copy-pruning inspects exactly the rows containing each variable", [] {
        QuantifiedProgram p;
        p.n = 3;
        p.names = {"x1", "y1", "y2"};
        p.objective = {Rational(1), Rational(0), Rational(0)};
        p.quant = {Quantifier::Exists, Quantifier::Forall, Quantifier::Forall};
        p.kind.assign(3, VarKind::Integer);
        p.lower.assign(3, Rational(0));
        p.upper.assign(3, Rational(1));
        p.ex_rows = {make_row({{0, 1}, {1, 1}, {2, 1}}, 3), make_row({{1, 1}}, 1)};
        ScpState scp(p);
        scp.mark_from_leaf({Rational(1), Rational(1), Rational(1)});
        if (scp.mark(1) != ScpMark::PotentiallyFinished) return false;
        if (scp.mark(2) != ScpMark::PotentiallyFinished) return false;
        long expected = 0;
        for (int j = 0; j < p.n; ++j)
            if (p.quant[j] == Quantifier::Forall) expected += scp.row_count(j);
        if (scp.rows_inspected() != expected) return false;
        // per-variable: the second walk alone inspects m_k rows for each
        // checked universal variable again
        scp.reset_counter();
        scp.mark_from_leaf({Rational(1), Rational(1), Rational(1)});
        return scp.rows_inspected() == expected;
    });

    criterion(7, "both critical-node formulations agree on 30 random graphs", [] {
        int graphs = 0;
        auto run_pair = [&](const Graph& g, int budget) -> bool {
            McnSpec s;
            s.graph = g;
            s.omega = s.phi = s.lambda = budget;
            s.variant = McnVariant::P;
            auto rp = solve(build_mcn(s));
            s.variant = McnVariant::DD;
            auto rdd = solve(build_mcn(s));
            if (!rp.value.is_finite() || rp.value != rdd.value) return false;
            if (g.n == 8 &&
                rp.value != ExtendedValue::finite(Rational(mcn_brute_force(g, budget, budget,
                                                                           budget))))
                return false;
            return true;
        };
        // 30 graphs, weighted toward the sizes the desk budget can afford;
        // both budget vectors appear at every size
        struct Slice {
            int n;
            int seeds;
            int budget;
        };
        std::vector<Slice> plan = {{8, 12, 1}, {8, 6, 2}, {10, 4, 1}, {10, 2, 2},
                                   {12, 4, 1}, {12, 2, 2}};
        unsigned long seed = 1;
        for (const auto& sl : plan)
            for (int i = 0; i < sl.seeds; ++i, ++graphs)
                if (!run_pair(gen_graph(sl.n, 0.15, seed++), sl.budget)) return false;
        return graphs == 30;
    });

    criterion(8, "conflict analysis reproduces the worked trail", [] {
        const int n = 22;
        std::vector<int8_t> value(n, -1);
        std::vector<int> level(n, 0), reason(n, -1);
        std::vector<Quantifier> quant(n, Quantifier::Exists);
        std::vector<DbRow> db(2);
        db[0].row = make_row({{1, -3}, {7, -5}, {9, -6}, {15, 3}, {21, 3}}, -6);
        db[1].row = make_row({{2, -1}, {3, -1}, {9, -1}}, -1);
        value[1] = 1;
        level[1] = 1;
        value[7] = 0;
        level[7] = 12;
        value[9] = 0;
        level[9] = 16;
        reason[9] = 1;
        value[2] = 0;
        level[2] = 14;
        value[3] = 0;
        level[3] = 15;
        value[15] = 1;
        level[15] = 20;
        value[21] = 0;
        level[21] = 10;
        AnalysisContext ctx{value, level, reason, quant, db, false, nullptr, nullptr};
        auto res = analyze_conflict(ctx, 0);
        if (!res.asserting || res.top_var != 15 || res.top_value != 0) return false;
        if (res.target_level != 15) return false;
        std::vector<ClauseLit> want = {{2, 1}, {3, 1}, {7, 1}, {15, 0}};
        if (res.lits != want) return false;
        Row learnt = clause_to_row(res.lits);
        return learnt.rhs == Rational(0) && learnt.coef_of(2) == Rational(-1) &&
               learnt.coef_of(3) == Rational(-1) && learnt.coef_of(7) == Rational(-1) &&
               learnt.coef_of(15) == Rational(1);
    });

    criterion(9, "file-format fidelity on the worked mixed-integer instance", [] {
        QuantifiedProgram p = parse_qlp(kAppendixQlp, "Example.qlp");
        BinarizedProgram bp = binarize(p);
        detail::Searcher searcher(bp, SolverConfig{});
        SolveResult r = searcher.run();
        if (!value_is(r, Rational(-1))) return false;
        SolutionDocument doc;
        doc.problem_name = "Example.qlp";
        doc.solution_name = "Example.qlp.sol";
        doc.objective_value = rat_fixed(r.value.value(), 6);
        doc.runtime_seconds = r.stats.seconds;
        doc.decision_nodes = r.stats.decision_nodes;
        doc.propagation_steps = r.stats.propagations;
        doc.learnt_constraints = r.stats.learnt_constraints;
        doc.variables = solution_variables(bp, r.pv);
        std::string xml = write_solution_xml(doc);
        // every field of the reference file except runtime and statistics
        for (const char* needle :
             {"<?xml version = \"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>",
              "<YasolSolution version=\"1\">", "ProblemName=\"Example.qlp\"",
              "SolutionName=\"Example.qlp.sol\"", "ObjectiveValue=\"-1.000000\"",
              "SolutionStatus=\"OPTIMAL\"", "Gap=\"0.000000\"",
              "<variable name=\"x1\" index=\"0-1\" value=\"2\" block=\"1\"/>",
              "<variable name=\"x2\" index=\"2\" value=\"1\" block=\"1\"/>",
              "<variable name=\"x3\" index=\"3\" value=\"1\" block=\"2\"/>",
              "<variable name=\"x4\" index=\"4\" value=\"0.000000\" block=\"3\"/>",
              "</YasolSolution>"})
            if (xml.find(needle) == std::string::npos) return false;
        return true;
    });

    std::cout << (failures == 0 ? "acceptance: all criteria passed"
                                : "acceptance: FAILURES present")
              << "\n";
    return failures == 0 ? 0 : 1;
}
