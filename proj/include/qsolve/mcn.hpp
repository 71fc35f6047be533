#pragma once

// Multilevel Critical Node instances as quantified programs: a defender
// vaccinates, an attacker infects, the defender protects, and saved nodes
// are counted. Four variants: two-stage and multistage, each with either a
// purely polyhedral or a decision-dependent uncertainty set.

#include <qsolve/model.hpp>

#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qsolve {

struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> arcs;  // directed
};

// Each unordered pair is included independently with the given probability
// and contributes both arcs.
inline Graph gen_graph(int n, double density, unsigned long seed) {
    if (n < 2) throw std::invalid_argument("gen_graph: need at least two nodes");
    if (!(density > 0.0 && density <= 1.0))
        throw std::invalid_argument("gen_graph: density must be in (0,1]");
    Graph g;
    g.n = n;
    std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (coin(rng) < density) {
                g.arcs.emplace_back(u, v);
                g.arcs.emplace_back(v, u);
            }
    return g;
}

// Plain edge-list files: one edge per line, whitespace-separated endpoints,
// undirected edges expanded to both arcs.
inline Graph parse_edge_list(std::istream& in) {
    Graph g;
    int u, v;
    while (in >> u >> v) {
        if (u < 0 || v < 0) throw std::invalid_argument("edge list: negative node id");
        g.n = std::max(g.n, std::max(u, v) + 1);
        g.arcs.emplace_back(u, v);
        g.arcs.emplace_back(v, u);
    }
    return g;
}

inline Graph parse_edge_list(const std::string& text) {
    std::istringstream in(text);
    return parse_edge_list(in);
}

enum class McnVariant { P, DD, MultiP, MultiDD };

struct McnSpec {
    Graph graph;
    int omega = 1;   // vaccination budget
    int phi = 1;     // infection budget / number of attack stages
    int lambda = 1;  // protection budget
    McnVariant variant = McnVariant::P;
};

namespace detail {

inline QuantifiedProgram build_mcn_two_stage(const McnSpec& spec) {
    const Graph& g = spec.graph;
    int n = g.n;
    QuantifiedProgram p;
    p.n = 3 * n + n;
    p.name = spec.variant == McnVariant::DD ? "mcn_dd" : "mcn_p";
    auto z = [&](int v) { return v; };
    auto y = [&](int v) { return n + v; };
    auto x = [&](int v) { return 2 * n + v; };
    auto a = [&](int v) { return 3 * n + v; };
    for (int v = 0; v < n; ++v) p.names.push_back("z" + std::to_string(v + 1));
    for (int v = 0; v < n; ++v) p.names.push_back("y" + std::to_string(v + 1));
    for (int v = 0; v < n; ++v) p.names.push_back("x" + std::to_string(v + 1));
    for (int v = 0; v < n; ++v) p.names.push_back("a" + std::to_string(v + 1));
    p.objective.assign(p.n, Rational(0));
    p.quant.assign(p.n, Quantifier::Exists);
    p.kind.assign(p.n, VarKind::Integer);
    p.lower.assign(p.n, Rational(0));
    p.upper.assign(p.n, Rational(1));
    for (int v = 0; v < n; ++v) {
        p.quant[y(v)] = Quantifier::Forall;
        p.kind[a(v)] = VarKind::Continuous;
        p.objective[a(v)] = Rational(1);
    }

    Row ybudget;
    for (int v = 0; v < n; ++v) ybudget.terms.push_back({y(v), Rational(1)});
    ybudget.rhs = Rational(spec.phi);
    p.uni_rows.push_back(ybudget);
    if (spec.variant == McnVariant::DD)
        for (int v = 0; v < n; ++v)
            p.uni_rows.push_back({{{y(v), Rational(1)}, {z(v), Rational(1)}}, Rational(1)});

    Row zbudget, xbudget;
    for (int v = 0; v < n; ++v) {
        zbudget.terms.push_back({z(v), Rational(1)});
        xbudget.terms.push_back({x(v), Rational(1)});
    }
    zbudget.rhs = Rational(spec.omega);
    xbudget.rhs = Rational(spec.lambda);
    p.ex_rows.push_back(zbudget);
    p.ex_rows.push_back(xbudget);
    for (int v = 0; v < n; ++v) {
        // infected nodes cannot be saved (unless vaccinated in the P model)
        if (spec.variant == McnVariant::DD)
            p.ex_rows.push_back({{{a(v), Rational(1)}, {y(v), Rational(1)}}, Rational(1)});
        else
            p.ex_rows.push_back(
                {{{a(v), Rational(1)}, {z(v), Rational(-1)}, {y(v), Rational(1)}}, Rational(1)});
    }
    for (const auto& [u, v] : g.arcs)
        p.ex_rows.push_back({{{a(v), Rational(1)},
                              {a(u), Rational(-1)},
                              {x(v), Rational(-1)},
                              {z(v), Rational(-1)}},
                             Rational(0)});
    return p;
}

inline QuantifiedProgram build_mcn_multistage(const McnSpec& spec) {
    const Graph& g = spec.graph;
    int n = g.n;
    int phi = spec.phi;
    QuantifiedProgram p;
    p.n = 2 * phi * n + 2 * n;
    p.name = spec.variant == McnVariant::MultiDD ? "mcn_multi_dd" : "mcn_multi_p";
    // blocks: z^1 | y^1 | ... | z^phi | y^phi | x, alpha
    auto z = [&](int t, int v) { return 2 * t * n + v; };
    auto y = [&](int t, int v) { return (2 * t + 1) * n + v; };
    auto x = [&](int v) { return 2 * phi * n + v; };
    auto a = [&](int v) { return 2 * phi * n + n + v; };
    for (int t = 0; t < phi; ++t) {
        for (int v = 0; v < n; ++v)
            p.names.push_back("z" + std::to_string(v + 1) + "s" + std::to_string(t + 1));
        for (int v = 0; v < n; ++v)
            p.names.push_back("y" + std::to_string(v + 1) + "s" + std::to_string(t + 1));
    }
    for (int v = 0; v < n; ++v) p.names.push_back("x" + std::to_string(v + 1));
    for (int v = 0; v < n; ++v) p.names.push_back("a" + std::to_string(v + 1));
    p.objective.assign(p.n, Rational(0));
    p.quant.assign(p.n, Quantifier::Exists);
    p.kind.assign(p.n, VarKind::Integer);
    p.lower.assign(p.n, Rational(0));
    p.upper.assign(p.n, Rational(1));
    for (int t = 0; t < phi; ++t)
        for (int v = 0; v < n; ++v) p.quant[y(t, v)] = Quantifier::Forall;
    for (int v = 0; v < n; ++v) {
        p.kind[a(v)] = VarKind::Continuous;
        p.objective[a(v)] = Rational(1);
    }

    // universal system: exactly one attack per stage, no node attacked twice
    for (int t = 0; t < phi; ++t) {
        Row le, ge;
        for (int v = 0; v < n; ++v) {
            le.terms.push_back({y(t, v), Rational(1)});
            ge.terms.push_back({y(t, v), Rational(-1)});
        }
        le.rhs = Rational(1);
        ge.rhs = Rational(-1);
        p.uni_rows.push_back(le);
        p.uni_rows.push_back(ge);
    }
    for (int v = 0; v < n; ++v) {
        Row once;
        for (int t = 0; t < phi; ++t) once.terms.push_back({y(t, v), Rational(1)});
        once.rhs = Rational(1);
        p.uni_rows.push_back(once);
    }
    if (spec.variant == McnVariant::MultiDD)
        for (int t = 0; t < phi; ++t)
            for (int v = 0; v < n; ++v) {
                Row r;
                r.terms.push_back({y(t, v), Rational(1)});
                for (int s = 0; s <= t; ++s) r.terms.push_back({z(s, v), Rational(1)});
                r.rhs = Rational(1);
                p.uni_rows.push_back(r);
            }

    // existential system
    Row zbudget;
    for (int t = 0; t < phi; ++t)
        for (int v = 0; v < n; ++v) zbudget.terms.push_back({z(t, v), Rational(1)});
    zbudget.rhs = Rational(spec.omega);
    p.ex_rows.push_back(zbudget);
    // vaccinating an already attacked node is pointless and forbidden
    for (int t = 0; t < phi; ++t)
        for (int v = 0; v < n; ++v) {
            Row r;
            r.terms.push_back({z(t, v), Rational(1)});
            for (int s = 0; s < t; ++s) r.terms.push_back({y(s, v), Rational(1)});
            r.rhs = Rational(1);
            p.ex_rows.push_back(r);
        }
    Row xbudget;
    for (int v = 0; v < n; ++v) xbudget.terms.push_back({x(v), Rational(1)});
    xbudget.rhs = Rational(spec.lambda);
    p.ex_rows.push_back(xbudget);
    for (int v = 0; v < n; ++v) {
        Row r;
        r.terms.push_back({a(v), Rational(1)});
        for (int t = 0; t < phi; ++t) {
            if (spec.variant != McnVariant::MultiDD) r.terms.push_back({z(t, v), Rational(-1)});
            r.terms.push_back({y(t, v), Rational(1)});
        }
        r.rhs = Rational(1);
        p.ex_rows.push_back(r);
    }
    for (const auto& [u, v] : g.arcs) {
        Row r;
        r.terms.push_back({a(v), Rational(1)});
        r.terms.push_back({a(u), Rational(-1)});
        r.terms.push_back({x(v), Rational(-1)});
        for (int t = 0; t < phi; ++t) r.terms.push_back({z(t, v), Rational(-1)});
        r.rhs = Rational(0);
        p.ex_rows.push_back(r);
    }
    return p;
}

}  // namespace detail

inline QuantifiedProgram build_mcn(const McnSpec& spec) {
    if (spec.graph.n < 1) throw std::invalid_argument("build_mcn: empty graph");
    if (spec.omega < 0 || spec.phi < 0 || spec.lambda < 0)
        throw std::invalid_argument("build_mcn: budgets must be nonnegative");
    bool multi = spec.variant == McnVariant::MultiP || spec.variant == McnVariant::MultiDD;
    if (multi && spec.phi < 2)
        throw std::invalid_argument("build_mcn: multistage variants need at least two stages");
    return multi ? detail::build_mcn_multistage(spec) : detail::build_mcn_two_stage(spec);
}

}  // namespace qsolve
