#pragma once

// Bound generation at search nodes: plain LP over the existential system,
// LP with a fixed scenario, the scenario-set DEP, and the scenario pool.

#include <qsolve/lp.hpp>
#include <qsolve/model.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qsolve {

enum class RelaxationMode { None, FixedScenario, SRelaxation };

enum class UncertaintyClass { Boxed, Polyhedral, DecisionDependent };

inline UncertaintyClass classify_uncertainty(const QuantifiedProgram& p) {
    if (p.uni_rows.empty()) return UncertaintyClass::Boxed;
    for (const auto& r : p.uni_rows)
        for (const auto& t : r.terms)
            if (p.quant[t.var] == Quantifier::Exists) return UncertaintyClass::DecisionDependent;
    return UncertaintyClass::Polyhedral;
}

// Complete universal assignment; values[j] is meaningful only where
// quant[j] == Forall.
struct Scenario {
    std::vector<Rational> values;
    double score = 0.0;
    long age = 0;
};

inline bool scenario_in_uncertainty_set(const QuantifiedProgram& p,
                                        const std::vector<Rational>& values) {
    std::vector<std::optional<Rational>> fixed(p.n);
    for (int j = 0; j < p.n; ++j)
        if (p.quant[j] == Quantifier::Forall) fixed[j] = values[j];
    return p.uni_rows.empty() || ip_feasible(p.uni_rows, p.lower, p.upper, fixed);
}

class ScenarioPool {
  public:
    explicit ScenarioPool(int cap = 8) : cap_(cap) {}

    // Inserts or bumps; rejects scenarios outside the uncertainty set.
    void add(const QuantifiedProgram& p, const std::vector<Rational>& values) {
        if (!scenario_in_uncertainty_set(p, values)) return;
        for (auto& s : items_) {
            if (s.values == values) {
                bump(s);
                return;
            }
        }
        Scenario s;
        s.values = values;
        s.score = bump_;
        s.age = counter_++;
        if (static_cast<int>(items_.size()) >= cap_) {
            auto victim = std::min_element(items_.begin(), items_.end(),
                                           [](const Scenario& a, const Scenario& b) {
                                               return a.score != b.score ? a.score < b.score
                                                                         : a.age < b.age;
                                           });
            if (victim->score > s.score) return;
            *victim = s;
        } else {
            items_.push_back(s);
        }
    }

    // Bumps every scenario matching the given universal prefix fixings.
    void bump_prefix(const QuantifiedProgram& p, const std::vector<std::optional<Rational>>& prefix) {
        for (auto& s : items_) {
            bool match = true;
            for (int j = 0; j < p.n && match; ++j)
                if (p.quant[j] == Quantifier::Forall && prefix[j] && *prefix[j] != s.values[j])
                    match = false;
            if (match) bump(s);
        }
    }

    // Highest-score scenario consistent with the trail fixings, if any.
    const Scenario* best_consistent(const QuantifiedProgram& p,
                                    const std::vector<std::optional<Rational>>& fixed) const {
        const Scenario* best = nullptr;
        for (const auto& s : items_) {
            bool match = true;
            for (int j = 0; j < p.n && match; ++j)
                if (p.quant[j] == Quantifier::Forall && fixed[j] && *fixed[j] != s.values[j])
                    match = false;
            if (!match) continue;
            if (best == nullptr || s.score > best->score ||
                (s.score == best->score && s.age < best->age))
                best = &s;
        }
        return best;
    }

    std::vector<Scenario> snapshot_consistent(const QuantifiedProgram& p,
                                              const std::vector<std::optional<Rational>>& fixed) const {
        std::vector<Scenario> out;
        for (const auto& s : items_) {
            bool match = true;
            for (int j = 0; j < p.n && match; ++j)
                if (p.quant[j] == Quantifier::Forall && fixed[j] && *fixed[j] != s.values[j])
                    match = false;
            if (match) out.push_back(s);
        }
        std::sort(out.begin(), out.end(), [](const Scenario& a, const Scenario& b) {
            return a.score != b.score ? a.score > b.score : a.age < b.age;
        });
        return out;
    }

    int size() const { return static_cast<int>(items_.size()); }
    const std::vector<Scenario>& items() const { return items_; }

  private:
    void bump(Scenario& s) {
        s.score += bump_;
        if (++events_ % 16 == 0) {
            for (auto& it : items_) it.score *= 0.9;
            bump_ *= 0.9;
            if (bump_ < 1e-9) {
                for (auto& it : items_) it.score /= bump_;
                bump_ = 1.0;
            }
        }
    }

    int cap_;
    std::vector<Scenario> items_;
    long counter_ = 0;
    long events_ = 0;
    double bump_ = 1.0;
};

// LP over the existential system with trail fixings; integrality dropped.
// When a scenario is given, universal columns are additionally fixed to it.
// With fix_all false only columns absent from the universal system are
// pinned, the safe choice when universal legality depends on existential
// variables; with fix_all true every universal column is pinned, valid for
// box and polyhedral uncertainty sets.
inline LpProblem build_node_lp(const QuantifiedProgram& p,
                               const std::vector<std::optional<Rational>>& fixed,
                               const std::vector<Rational>* scenario = nullptr,
                               bool fix_all = false) {
    std::vector<bool> in_uni(p.n, false);
    if (!fix_all)
        for (const auto& r : p.uni_rows)
            for (const auto& t : r.terms) in_uni[t.var] = true;
    LpProblem lp;
    for (int j = 0; j < p.n; ++j) {
        std::optional<Rational> pin = fixed[j];
        if (!pin && scenario != nullptr && p.quant[j] == Quantifier::Forall && !in_uni[j])
            pin = (*scenario)[j];
        lp.add_col(p.objective[j], pin ? *pin : p.lower[j], pin ? *pin : p.upper[j]);
    }
    lp.rows = p.ex_rows;
    return lp;
}

inline LpProblem fixed_scenario_relaxation(const QuantifiedProgram& p,
                                           const std::vector<Rational>& scenario,
                                           const std::vector<std::optional<Rational>>& fixed) {
    return build_node_lp(p, fixed, &scenario);
}

// Deterministic equivalent of the scenario-set relaxation: one copy of each
// existential variable per distinct universal prefix before its block, a
// scalar k maximized under per-scenario objective rows, and per-scenario
// copies of the existential constraints.
struct DepProblem {
    LpProblem lp;
    int k_col = -1;
};

inline DepProblem s_relaxation_dep(const QuantifiedProgram& p,
                                   const std::vector<Scenario>& scenarios,
                                   const std::vector<std::optional<Rational>>& fixed) {
    DepProblem dep;
    auto blocks = p.blocks();
    std::vector<int> block_of(p.n);
    for (int b = 0; b < static_cast<int>(blocks.size()); ++b)
        for (int j = blocks[b].begin; j < blocks[b].end; ++j) block_of[j] = b;

    // column per (existential variable, universal prefix before its block)
    std::map<std::pair<int, std::string>, int> copies;
    auto prefix_key = [&](const Scenario& s, int var) {
        std::string key;
        for (int j = 0; j < p.n; ++j) {
            if (block_of[j] >= block_of[var]) break;
            if (p.quant[j] == Quantifier::Forall) key += rat_str(s.values[j]) + ",";
        }
        return key;
    };
    auto copy_col = [&](const Scenario& s, int var) {
        auto key = std::make_pair(var, prefix_key(s, var));
        auto it = copies.find(key);
        if (it != copies.end()) return it->second;
        int col = dep.lp.cols;
        if (fixed[var]) dep.lp.add_col(Rational(0), *fixed[var], *fixed[var]);
        else dep.lp.add_col(Rational(0), p.lower[var], p.upper[var]);
        copies[key] = col;
        return col;
    };

    Rational big = 1;
    for (int j = 0; j < p.n; ++j) {
        Rational m = p.upper[j] > -p.lower[j] ? p.upper[j] : -p.lower[j];
        if (p.objective[j] != 0)
            big += (p.objective[j] < 0 ? -p.objective[j] : p.objective[j]) * m;
    }
    dep.k_col = 0;
    dep.lp.add_col(Rational(1), -big, big);  // maximize k

    for (const auto& s : scenarios) {
        // objective row: k - sum c_j x_copy <= sum over universal c_j s_j
        Row obj;
        obj.terms.push_back({dep.k_col, Rational(1)});
        Rational rhs = 0;
        for (int j = 0; j < p.n; ++j) {
            if (p.objective[j] == 0) continue;
            if (p.quant[j] == Quantifier::Forall) rhs += p.objective[j] * s.values[j];
            else obj.terms.push_back({copy_col(s, j), -p.objective[j]});
        }
        obj.rhs = rhs;
        dep.lp.rows.push_back(obj);
        for (const auto& r : p.ex_rows) {
            Row copy;
            Rational crhs = r.rhs;
            for (const auto& t : r.terms) {
                if (p.quant[t.var] == Quantifier::Forall) crhs -= t.coef * s.values[t.var];
                else copy.terms.push_back({copy_col(s, t.var), t.coef});
            }
            copy.rhs = crhs;
            dep.lp.rows.push_back(copy);
        }
    }
    return dep;
}

}  // namespace qsolve
