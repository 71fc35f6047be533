#pragma once

#include <qsolve/extended_value.hpp>
#include <qsolve/rational.hpp>

#include <algorithm>
#include <cassert>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qsolve {

enum class Quantifier { Exists, Forall };
enum class VarKind { Integer, Continuous };
enum class Sense { Maximize, Minimize };

struct Term {
    int var;
    Rational coef;
};

// Linear row in <=-normal form: sum(coef * x) <= rhs.
struct Row {
    std::vector<Term> terms;
    Rational rhs;

    Rational coef_of(int var) const {
        for (const auto& t : terms)
            if (t.var == var) return t.coef;
        return Rational(0);
    }
};

struct Block {
    Quantifier q;
    int begin;  // first variable index
    int end;    // one past last
};

struct QuantifiedProgram {
    int n = 0;
    std::vector<std::string> names;
    std::vector<Rational> objective;
    std::vector<Quantifier> quant;
    std::vector<VarKind> kind;
    std::vector<Rational> lower, upper;
    std::vector<Row> ex_rows;   // existential system
    std::vector<Row> uni_rows;  // universal system
    Sense sense = Sense::Maximize;
    bool objective_negated = false;  // set by normalize_sense when sense flipped
    std::string name = "problem";

    std::vector<Block> blocks() const {
        std::vector<Block> out;
        for (int i = 0; i < n; ++i) {
            if (out.empty() || out.back().q != quant[i]) out.push_back({quant[i], i, i + 1});
            else out.back().end = i + 1;
        }
        return out;
    }

    int block_of(int var) const {
        int b = 0;
        for (int i = 1; i <= var; ++i)
            if (quant[i] != quant[i - 1]) ++b;
        return b;
    }

    int continuous_count() const {
        int g = 0;
        for (int i = 0; i < n; ++i)
            if (kind[i] == VarKind::Continuous) ++g;
        return g;
    }

    bool is_binary(int var) const {
        return kind[var] == VarKind::Integer && lower[var] == 0 && upper[var] == 1;
    }

    Rational objective_of(const std::vector<Rational>& x) const {
        Rational v = 0;
        for (int i = 0; i < n; ++i) v += objective[i] * x[i];
        return v;
    }

    static bool row_satisfied(const Row& row, const std::vector<Rational>& x) {
        Rational lhs = 0;
        for (const auto& t : row.terms) lhs += t.coef * x[t.var];
        return lhs <= row.rhs;
    }

    bool system_satisfied(const std::vector<Row>& rows, const std::vector<Rational>& x) const {
        for (const auto& r : rows)
            if (!row_satisfied(r, x)) return false;
        return true;
    }
};

struct Violation {
    std::string rule;
    int index = -1;
    std::string detail;
};
using ValidationReport = std::vector<Violation>;

namespace detail {

// DFS feasibility of an integer system over box [lower,upper] with optional
// fixings (entries with a value). Interval pruning on every row keeps the
// search shallow for the structured systems this is used on.
inline bool integer_system_feasible_rec(const std::vector<Row>& rows,
                                        const std::vector<Rational>& lower,
                                        const std::vector<Rational>& upper,
                                        std::vector<std::optional<Rational>>& fixed,
                                        const std::vector<int>& order, std::size_t pos) {
    for (const auto& row : rows) {
        Rational min_act = 0;
        for (const auto& t : row.terms) {
            if (fixed[t.var]) min_act += t.coef * *fixed[t.var];
            else min_act += t.coef * (t.coef > 0 ? lower[t.var] : upper[t.var]);
        }
        if (min_act > row.rhs) return false;
    }
    if (pos == order.size()) return true;
    int v = order[pos];
    if (fixed[v]) return integer_system_feasible_rec(rows, lower, upper, fixed, order, pos + 1);
    for (BigInt val = rat_floor(lower[v]); val <= rat_floor(upper[v]); ++val) {
        fixed[v] = Rational(val);
        if (integer_system_feasible_rec(rows, lower, upper, fixed, order, pos + 1)) {
            fixed[v].reset();
            return true;
        }
    }
    fixed[v].reset();
    return false;
}

}  // namespace detail

inline bool integer_system_feasible(const std::vector<Row>& rows,
                                    const std::vector<Rational>& lower,
                                    const std::vector<Rational>& upper,
                                    std::vector<std::optional<Rational>> fixed = {}) {
    int n = static_cast<int>(lower.size());
    if (fixed.empty()) fixed.assign(n, std::nullopt);
    std::vector<bool> relevant(n, false);
    for (const auto& r : rows)
        for (const auto& t : r.terms) relevant[t.var] = true;
    std::vector<int> order;
    for (int i = 0; i < n; ++i)
        if (relevant[i] && !fixed[i]) order.push_back(i);
    return detail::integer_system_feasible_rec(rows, lower, upper, fixed, order, 0);
}

inline ValidationReport validate(const QuantifiedProgram& p) {
    ValidationReport report;
    auto bad = [&](const std::string& rule, int idx, const std::string& detail) {
        report.push_back({rule, idx, detail});
    };
    if (static_cast<int>(p.objective.size()) != p.n || static_cast<int>(p.quant.size()) != p.n ||
        static_cast<int>(p.kind.size()) != p.n || static_cast<int>(p.lower.size()) != p.n ||
        static_cast<int>(p.upper.size()) != p.n) {
        bad("field length mismatch", -1, "vectors must all have length n");
        return report;
    }
    auto blocks = p.blocks();
    for (int i = 0; i < p.n; ++i) {
        if (p.lower[i] > p.upper[i]) bad("empty domain", i, "lower > upper");
        if (p.kind[i] == VarKind::Integer) {
            if (!is_integral(p.lower[i]) || !is_integral(p.upper[i]))
                bad("non-integral bound", i, "integer variable needs integer bounds");
        } else {
            if (p.quant[i] == Quantifier::Forall)
                bad("continuous in universal block", i, "continuous variables must be existential");
            else if (p.block_of(i) != static_cast<int>(blocks.size()) - 1)
                bad("continuous before final block", i, "continuous variables belong to the last block");
        }
    }
    auto check_cols = [&](const std::vector<Row>& rows, const char* which) {
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (const auto& t : rows[r].terms)
                if (t.var < 0 || t.var >= p.n)
                    bad("bad column", static_cast<int>(r), std::string(which) + " row references invalid column");
    };
    check_cols(p.ex_rows, "existential");
    check_cols(p.uni_rows, "universal");
    for (std::size_t r = 0; r < p.uni_rows.size(); ++r)
        for (const auto& t : p.uni_rows[r].terms)
            if (t.var >= 0 && t.var < p.n && p.kind[t.var] == VarKind::Continuous)
                bad("continuous in universal row", static_cast<int>(r),
                    "universal system may not reference continuous variables");
    if (!report.empty()) return report;
    if (!p.uni_rows.empty() && !integer_system_feasible(p.uni_rows, p.lower, p.upper))
        bad("universal system infeasible over D", -1, "no legal universal play exists");
    return report;
}

inline QuantifiedProgram normalize_sense(QuantifiedProgram p) {
    if (p.sense == Sense::Minimize) {
        for (auto& c : p.objective) c = -c;
        p.sense = Sense::Maximize;
        p.objective_negated = !p.objective_negated;
    }
    return p;
}

}  // namespace qsolve
