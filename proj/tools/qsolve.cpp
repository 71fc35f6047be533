// Batch driver: parse a QLP file, solve it, report the value and principal
// variation, and write the solution XML next to the input. Also generates
// critical-node instances, offers a brute-force oracle for small files, and
// runs a built-in selftest.

#include <CLI11.hpp>

#include <qsolve/binarize.hpp>
#include <qsolve/mcn.hpp>
#include <qsolve/oracle.hpp>
#include <qsolve/qlp_io.hpp>
#include <qsolve/search.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

using namespace qsolve;

namespace {

enum class LogLevel { Quiet, Info, Trace };

LogLevel log_level() {
    const char* env = std::getenv("QSOLVE_LOG");
    if (env == nullptr) return LogLevel::Info;
    std::string v(env);
    if (v == "quiet") return LogLevel::Quiet;
    if (v == "trace") return LogLevel::Trace;
    return LogLevel::Info;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string value_string(const ExtendedValue& v) {
    if (v.is_finite()) return rat_fixed(v.value(), 6);
    if (v.is_minus_inf()) return "-INFTY";
    if (v.is_plus_inf()) return "+INFTY";
    return "UNKNOWN";
}

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "OPTIMAL";
        case SolveStatus::Infeasible: return "INFEASIBLE";
        case SolveStatus::UnboundedWin: return "UNBOUNDED-WIN";
        default: return "TIMEOUT";
    }
}

int exit_code(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal:
        case SolveStatus::UnboundedWin: return 0;
        case SolveStatus::Infeasible: return 3;
        default: return 2;
    }
}

void print_stats(const SolveStats& st) {
    std::cout << "stats"
              << " decision_nodes=" << st.decision_nodes << " propagations=" << st.propagations
              << " learnt_constraints=" << st.learnt_constraints << " conflicts=" << st.conflicts
              << " leaf_evals=" << st.leaf_evals << " relaxation_calls=" << st.relaxation_calls
              << " scp_prunes=" << st.scp_prunes << " relaxation_prunes=" << st.relaxation_prunes
              << " enumeration_fallbacks=" << st.enumeration_fallbacks << " seconds=" << st.seconds
              << "\n";
}

int run_solve(const std::string& path, const SolverConfig& cfg) {
    QuantifiedProgram p = parse_qlp(read_file(path), path);
    LogLevel lvl = log_level();
    if (lvl == LogLevel::Trace)
        std::cerr << "trace: " << p.n << " variables, " << p.ex_rows.size() << "+"
                  << p.uni_rows.size() << " rows, scp=" << cfg.scp
                  << " relaxation=" << static_cast<int>(cfg.relaxation) << "\n";

    BinarizedProgram bp = binarize(p);
    detail::Searcher searcher(bp, cfg);
    SolveResult r = searcher.run();

    std::cout << "status " << status_name(r.status) << "\n";
    std::cout << "objective " << value_string(r.value) << "\n";
    if (r.value.is_finite()) {
        std::cout << "pv";
        for (const auto& v : r.pv) std::cout << " " << rat_str(v);
        std::cout << "\n";
    } else if (r.status == SolveStatus::Timeout && r.incumbent) {
        std::cout << "incumbent " << rat_fixed(*r.incumbent, 6) << "\n";
    }
    if (lvl != LogLevel::Quiet) print_stats(r.stats);

    SolutionDocument doc;
    doc.problem_name = p.name;
    doc.solution_name = "qsolve";
    doc.objective_value = value_string(r.status == SolveStatus::Timeout && r.incumbent
                                           ? ExtendedValue::finite(*r.incumbent)
                                           : r.value);
    doc.runtime_seconds = r.stats.seconds;
    doc.decision_nodes = r.stats.decision_nodes;
    doc.propagation_steps = r.stats.propagations;
    doc.learnt_constraints = r.stats.learnt_constraints;
    doc.status = status_name(r.status);
    if (r.status == SolveStatus::Timeout && r.incumbent) doc.status = "INCUMBENT";
    if (r.value.is_finite()) doc.variables = solution_variables(bp, r.pv);
    std::string out_path = cfg.output_path.empty() ? path + ".sol" : cfg.output_path;
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << write_solution_xml(doc);
    if (lvl != LogLevel::Quiet) std::cout << "solution " << out_path << "\n";
    return exit_code(r.status);
}

int run_oracle(const std::string& path) {
    QuantifiedProgram p = parse_qlp(read_file(path), path);
    OracleResult r = extended_minimax(p);
    std::cout << "value " << value_string(r.value) << "\n";
    if (r.value.is_finite()) {
        std::cout << "pv";
        for (const auto& v : r.pv) std::cout << " " << rat_str(v);
        std::cout << "\n";
    }
    if (r.value.is_minus_inf()) return 3;
    return 0;
}

// Small built-in instances with hand-checked values, each cross-checked
// against the brute-force oracle.
int run_selftest() {
    int failures = 0;
    auto check = [&](const std::string& name, const QuantifiedProgram& p,
                     const ExtendedValue& expect) {
        auto r = solve(p);
        auto o = extended_minimax(p);
        bool ok = r.value == expect && o.value == expect;
        std::cout << (ok ? "pass " : "FAIL ") << name << ": solver " << value_string(r.value)
                  << ", oracle " << value_string(o.value) << ", expected " << value_string(expect)
                  << "\n";
        if (!ok) ++failures;
    };

    auto mk = [](int n, std::vector<Rational> obj, std::vector<Quantifier> quant,
                 std::vector<Row> ex, std::vector<Row> uni) {
        QuantifiedProgram p;
        p.n = n;
        p.objective = std::move(obj);
        p.quant = std::move(quant);
        for (int i = 0; i < n; ++i) {
            p.names.push_back("x" + std::to_string(i + 1));
            p.kind.push_back(VarKind::Integer);
            p.lower.push_back(Rational(0));
            p.upper.push_back(Rational(1));
        }
        p.ex_rows = std::move(ex);
        p.uni_rows = std::move(uni);
        return p;
    };
    using Q = Quantifier;

    // max 2x1-x2+x3+x4, E A E A, rows x1+x2+x3+x4 <= 3 and -x2-x3+x4 <= 0
    check("alternating budget game",
          mk(4, {Rational(2), Rational(-1), Rational(1), Rational(1)},
             {Q::Exists, Q::Forall, Q::Exists, Q::Forall},
             {{{{0, Rational(1)}, {1, Rational(1)}, {2, Rational(1)}, {3, Rational(1)}},
               Rational(3)},
              {{{1, Rational(-1)}, {2, Rational(-1)}, {3, Rational(1)}}, Rational(0)}},
             {}),
          ExtendedValue::finite(Rational(1)));

    // max -x1-x2-x3, E A E, rows -3x1+2x2-2x3 <= 0 and x1-2x2+x3 <= 0
    auto pair_rows = std::vector<Row>{
        {{{0, Rational(-3)}, {1, Rational(2)}, {2, Rational(-2)}}, Rational(0)},
        {{{0, Rational(1)}, {1, Rational(-2)}, {2, Rational(1)}}, Rational(0)}};
    check("counterexample to dominance",
          mk(3, {Rational(-1), Rational(-1), Rational(-1)}, {Q::Exists, Q::Forall, Q::Exists},
             pair_rows, {}),
          ExtendedValue::finite(Rational(-2)));

    // the same instance with the dominance row x3 <= x1 becomes infeasible
    auto dominated = pair_rows;
    dominated.push_back({{{0, Rational(-1)}, {2, Rational(1)}}, Rational(0)});
    check("dominance row flips feasibility",
          mk(3, {Rational(-1), Rational(-1), Rational(-1)}, {Q::Exists, Q::Forall, Q::Exists},
             dominated, {}),
          ExtendedValue::minus_inf());

    // universal row x2 >= 1 contradicts the shared row x1+x2 <= 1: the
    // universal player has no legal completion once x1 = 1
    check("universal system without legal moves",
          mk(2, {Rational(1), Rational(0)}, {Q::Exists, Q::Forall},
             {{{{0, Rational(1)}, {1, Rational(1)}}, Rational(1)}},
             {{{{0, Rational(1)}, {1, Rational(1)}}, Rational(1)},
              {{{1, Rational(-1)}}, Rational(-1)}}),
          ExtendedValue::plus_inf());

    std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qsolve: quantified integer program solver"};
    app.require_subcommand(1);

    SolverConfig cfg;
    std::string input;
    std::string relaxation = "fixed-scenario";

    auto add_solver_flags = [&](CLI::App* cmd) {
        cmd->add_option("--time-limit", cfg.time_limit, "time limit in seconds");
        cmd->add_flag("--simply-restricted", cfg.simply_restricted,
                      "single-row universal legality checks");
        cmd->add_flag_callback("--no-scp", [&] { cfg.scp = false; },
                               "disable strategic copy-pruning");
        cmd->add_option("--relaxation", relaxation, "none, fixed-scenario or s-relaxation")
            ->check(CLI::IsMember({"none", "fixed-scenario", "s-relaxation"}));
        cmd->add_option("--scenario-cap", cfg.scenario_cap, "scenario pool capacity");
        cmd->add_flag("--exact-lp", cfg.exact_lp, "rational simplex for node bounds");
        cmd->add_option("--seed", cfg.seed, "random seed");
        cmd->add_option("--output", cfg.output_path, "solution file path");
    };

    auto* solve_cmd = app.add_subcommand("solve", "solve a QLP file");
    solve_cmd->add_option("file", input, "QLP input file")->required();
    add_solver_flags(solve_cmd);

    auto* oracle_cmd = app.add_subcommand("oracle", "brute-force value of a small QLP file");
    oracle_cmd->add_option("file", input, "QLP input file")->required();

    int nodes = 10, omega = 1, phi = 1, lambda = 1;
    double density = 0.05;
    unsigned long graph_seed = 0;
    std::string variant = "p", graph_file, gen_output;
    auto* gen_cmd = app.add_subcommand("gen-mcn", "generate a critical-node QLP instance");
    gen_cmd->add_option("--nodes", nodes, "node count for the random graph");
    gen_cmd->add_option("--density", density, "pair inclusion probability");
    gen_cmd->add_option("--seed", graph_seed, "graph seed");
    gen_cmd->add_option("--graph", graph_file, "edge-list file instead of a random graph");
    gen_cmd->add_option("--omega", omega, "vaccination budget");
    gen_cmd->add_option("--phi", phi, "infection budget / attack stages");
    gen_cmd->add_option("--lambda", lambda, "protection budget");
    gen_cmd->add_option("--variant", variant, "p, dd, multi-p or multi-dd")
        ->check(CLI::IsMember({"p", "dd", "multi-p", "multi-dd"}));
    gen_cmd->add_option("--output", gen_output, "QLP output path (default stdout)");

    auto* selftest_cmd = app.add_subcommand("selftest", "solve built-in reference instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (solve_cmd->parsed()) {
            if (relaxation == "none") cfg.relaxation = RelaxationMode::None;
            else if (relaxation == "s-relaxation") cfg.relaxation = RelaxationMode::SRelaxation;
            else cfg.relaxation = RelaxationMode::FixedScenario;
            if (cfg.relaxation == RelaxationMode::SRelaxation && cfg.scenario_cap < 1) {
                std::cerr << "error: s-relaxation needs a scenario cap of at least 1\n";
                return 1;
            }
            return run_solve(input, cfg);
        }
        if (oracle_cmd->parsed()) return run_oracle(input);
        if (gen_cmd->parsed()) {
            McnSpec spec;
            spec.graph = graph_file.empty() ? gen_graph(nodes, density, graph_seed)
                                            : parse_edge_list(read_file(graph_file));
            spec.omega = omega;
            spec.phi = phi;
            spec.lambda = lambda;
            if (variant == "dd") spec.variant = McnVariant::DD;
            else if (variant == "multi-p") spec.variant = McnVariant::MultiP;
            else if (variant == "multi-dd") spec.variant = McnVariant::MultiDD;
            else spec.variant = McnVariant::P;
            std::string text = write_qlp(build_mcn(spec));
            if (gen_output.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(gen_output);
                if (!out) throw std::runtime_error("cannot write " + gen_output);
                out << text;
            }
            return 0;
        }
        if (selftest_cmd->parsed()) return run_selftest();
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const TooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
