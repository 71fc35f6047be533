#pragma once

// Ground-truth engine: full game-tree enumeration of the extended minimax
// value plus explicit strategy trees. Deliberately shares no code with the
// search engine beyond the model and LP types.

#include <qsolve/lp.hpp>
#include <qsolve/model.hpp>

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qsolve {

struct TooLarge : std::runtime_error {
    TooLarge() : std::runtime_error("oracle enumeration guard exceeded") {}
};

struct StrategyNode {
    int var = -1;  // variable decided below this node; -1 at leaves
    std::vector<std::pair<Rational, std::shared_ptr<StrategyNode>>> children;
    std::vector<Rational> play;  // full assignment, leaves only
    ExtendedValue weight;        // leaf weight, leaves only

    bool is_leaf() const { return var == -1; }
};

struct OracleResult {
    ExtendedValue value;
    std::vector<Rational> pv;
    std::shared_ptr<StrategyNode> strategy;
};

struct StrategyVerdict {
    bool winning = false;
    ExtendedValue value;               // min leaf objective when winning
    std::vector<Rational> witness;     // offending partial play otherwise
    std::string reason;
};

namespace detail {

struct OracleCtx {
    const QuantifiedProgram& p;
    int first_cont;  // index of the first continuous variable, or n
    std::vector<Rational> x;
    std::vector<std::optional<Rational>> fixed;
};

// Leaf once every integer variable is assigned. Continuous tail resolved by
// an exact LP over the existential system.
inline std::pair<ExtendedValue, std::shared_ptr<StrategyNode>> oracle_leaf(OracleCtx& ctx) {
    const auto& p = ctx.p;
    bool uni_ok = true;
    for (const auto& r : p.uni_rows) {
        Rational lhs = 0;
        for (const auto& t : r.terms) lhs += t.coef * ctx.x[t.var];
        if (lhs > r.rhs) {
            uni_ok = false;
            break;
        }
    }
    bool ex_ok;
    Rational obj = 0;
    for (int j = 0; j < ctx.first_cont; ++j) obj += p.objective[j] * ctx.x[j];
    if (ctx.first_cont == p.n) {
        ex_ok = p.system_satisfied(p.ex_rows, ctx.x);
    } else {
        LpProblem lp;
        for (int j = 0; j < p.n; ++j) {
            bool fx = j < ctx.first_cont;
            lp.add_col(fx ? Rational(0) : p.objective[j], fx ? ctx.x[j] : p.lower[j],
                       fx ? ctx.x[j] : p.upper[j]);
        }
        lp.rows = p.ex_rows;
        auto out = solve_lp_exact(lp);
        ex_ok = out.feasible;
        if (ex_ok) {
            obj += out.objective;
            for (int j = ctx.first_cont; j < p.n; ++j) ctx.x[j] = out.primal[j];
        }
    }
    auto node = std::make_shared<StrategyNode>();
    node->play = ctx.x;
    if (ex_ok && uni_ok) node->weight = ExtendedValue::finite(obj);
    else if (!ex_ok && uni_ok) node->weight = ExtendedValue::minus_inf();
    else if (ex_ok && !uni_ok) node->weight = ExtendedValue::plus_inf();
    else node->weight = ExtendedValue::unknown();
    return {node->weight, node};
}

inline std::pair<ExtendedValue, std::shared_ptr<StrategyNode>> oracle_rec(OracleCtx& ctx, int i) {
    const auto& p = ctx.p;
    if (i == ctx.first_cont) return oracle_leaf(ctx);
    bool exists = p.quant[i] == Quantifier::Exists;
    ExtendedValue best = ExtendedValue::unknown();
    auto node = std::make_shared<StrategyNode>();
    node->var = i;
    std::shared_ptr<StrategyNode> best_child;
    Rational best_val;
    for (BigInt v = rat_floor(p.lower[i]); v <= rat_floor(p.upper[i]); ++v) {
        ctx.x[i] = Rational(v);
        ctx.fixed[i] = ctx.x[i];
        auto [val, child] = oracle_rec(ctx, i + 1);
        ctx.fixed[i].reset();
        if (!exists) node->children.push_back({Rational(v), child});
        ExtendedValue folded = exists ? ev_max(best, val) : ev_min(best, val);
        bool improved = best.is_unknown() ? !val.is_unknown() : folded != best;
        if (best_child == nullptr || improved) {
            best_child = child;
            best_val = Rational(v);
        }
        best = folded;
    }
    if (exists) node->children.push_back({best_val, best_child});
    node->weight = best;
    return {best, node};
}

}  // namespace detail

inline OracleResult extended_minimax(const QuantifiedProgram& program) {
    BigInt size = 1;
    for (int i = 0; i < program.n; ++i) {
        if (program.kind[i] == VarKind::Continuous) continue;
        size *= rat_floor(program.upper[i]) - rat_floor(program.lower[i]) + 1;
        if (size > (BigInt(1) << 20)) throw TooLarge();
    }
    QuantifiedProgram p = normalize_sense(program);
    int first_cont = p.n;
    for (int i = 0; i < p.n; ++i)
        if (p.kind[i] == VarKind::Continuous) {
            first_cont = i;
            break;
        }
    detail::OracleCtx ctx{p, first_cont, std::vector<Rational>(p.n, Rational(0)),
                          std::vector<std::optional<Rational>>(p.n)};
    auto [value, tree] = detail::oracle_rec(ctx, 0);
    OracleResult res;
    res.value = value;
    if (p.objective_negated && value.is_finite()) res.value = ExtendedValue::finite(-value.value());
    res.strategy = tree;
    // principal variation: follow the recorded choices
    const StrategyNode* cur = tree.get();
    while (cur != nullptr && !cur->is_leaf()) {
        const StrategyNode* next = nullptr;
        for (const auto& [val, child] : cur->children) {
            bool pick;
            if (p.quant[cur->var] == Quantifier::Exists) pick = true;  // single child
            else pick = child->weight == cur->weight || (child->weight.is_unknown() && cur->weight.is_unknown());
            if (pick) {
                next = child.get();
                break;
            }
        }
        cur = next;
    }
    if (cur != nullptr) res.pv = cur->play;
    return res;
}

// Plain minimax with infeasible leaves valued -inf; meaningful when the
// instance has no universal system (every leaf then scores a known value).
inline ExtendedValue plain_minimax(const QuantifiedProgram& program) {
    QuantifiedProgram p = normalize_sense(program);
    p.uni_rows.clear();
    auto res = extended_minimax(p);
    if (program.objective_negated != p.objective_negated && res.value.is_finite())
        return ExtendedValue::finite(-res.value.value());
    return res.value;
}

inline StrategyVerdict verify_strategy(const QuantifiedProgram& program,
                                       const std::shared_ptr<StrategyNode>& root) {
    QuantifiedProgram p = normalize_sense(program);
    StrategyVerdict verdict;
    verdict.value = ExtendedValue::plus_inf();
    bool ok = true;
    std::vector<std::optional<Rational>> fixed(p.n);
    std::vector<Rational> path;

    std::function<void(const StrategyNode*, int)> walk = [&](const StrategyNode* node, int depth) {
        if (!ok) return;
        if (node->is_leaf()) {
            if (static_cast<int>(node->play.size()) != p.n) {
                ok = false;
                verdict.reason = "shape mismatch: short leaf play";
                verdict.witness = path;
                return;
            }
            bool ex_ok = p.system_satisfied(p.ex_rows, node->play);
            if (!ex_ok) {
                ok = false;
                verdict.reason = "leaf violates the existential system";
                verdict.witness = node->play;
                return;
            }
            // leaves where the universal system broke score +inf and never
            // lower the worst case
            if (p.system_satisfied(p.uni_rows, node->play)) {
                Rational obj = p.objective_of(node->play);
                verdict.value = ev_min(verdict.value, ExtendedValue::finite(obj));
            }
            return;
        }
        int var = node->var;
        if (var < 0 || var >= p.n || depth != var) {
            ok = false;
            verdict.reason = "shape mismatch: node variable out of order";
            verdict.witness = path;
            return;
        }
        if (p.quant[var] == Quantifier::Exists) {
            if (node->children.size() != 1) {
                ok = false;
                verdict.reason = "existential node must choose exactly one child";
                verdict.witness = path;
                return;
            }
            const auto& [val, child] = node->children[0];
            if (val < p.lower[var] || val > p.upper[var]) {
                ok = false;
                verdict.reason = "existential choice outside the domain";
                verdict.witness = path;
                return;
            }
            fixed[var] = val;
            path.push_back(val);
            walk(child.get(), depth + 1);
            path.pop_back();
            fixed[var].reset();
        } else {
            // every legal universal move must be covered
            for (BigInt v = rat_floor(p.lower[var]); v <= rat_floor(p.upper[var]); ++v) {
                Rational rv(v);
                fixed[var] = rv;
                bool legal = p.uni_rows.empty() || ip_feasible(p.uni_rows, p.lower, p.upper, fixed);
                fixed[var].reset();
                if (!legal) continue;
                const StrategyNode* child = nullptr;
                for (const auto& [cv, ch] : node->children)
                    if (cv == rv) child = ch.get();
                if (child == nullptr) {
                    ok = false;
                    verdict.reason = "uncovered legal universal move";
                    path.push_back(rv);
                    verdict.witness = path;
                    path.pop_back();
                    return;
                }
                fixed[var] = rv;
                path.push_back(rv);
                walk(child, depth + 1);
                path.pop_back();
                fixed[var].reset();
                if (!ok) return;
            }
        }
    };
    walk(root.get(), 0);
    verdict.winning = ok;
    if (ok && verdict.value.is_finite() && p.objective_negated)
        verdict.value = ExtendedValue::finite(-verdict.value.value());
    return verdict;
}

}  // namespace qsolve
