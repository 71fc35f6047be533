#pragma once

#include <qsolve/model.hpp>

#include <cassert>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qsolve {

struct NumericalBreakdown : std::runtime_error {
    NumericalBreakdown() : std::runtime_error("simplex cycling guard exceeded") {}
};

// Maximization LP over <=-rows with finite column bounds. Fix a column by
// setting lower == upper.
struct LpProblem {
    int cols = 0;
    std::vector<Rational> objective;
    std::vector<Rational> lower, upper;
    std::vector<Row> rows;

    void add_col(Rational obj, Rational lo, Rational up) {
        objective.push_back(std::move(obj));
        lower.push_back(std::move(lo));
        upper.push_back(std::move(up));
        ++cols;
    }
};

template <typename T>
struct SimplexOutcome {
    bool feasible = false;
    std::vector<T> primal;      // structural columns, when feasible
    T objective{};
    std::vector<T> duals;       // row multipliers y >= 0, when feasible
    std::vector<T> dual_rcost;  // per-column reduced costs at optimum
    std::vector<T> ray;         // Farkas row multipliers y >= 0, when infeasible
};

namespace detail {

template <typename T>
struct LpTraits;

template <>
struct LpTraits<double> {
    static constexpr double tol = 1e-9;
    static double from_rat(const Rational& r) { return to_double(r); }
};

template <>
struct LpTraits<Rational> {
    static inline const Rational tol = Rational(0);
    static Rational from_rat(const Rational& r) { return r; }
};

// Dense bounded-variable primal simplex, Bland's smallest-index rule for
// entering and leaving choices. Columns: [0,n) structural, [n,n+m) row
// slacks in [0,inf), then one artificial per initially violated row used by
// phase 1.
template <typename T>
class Simplex {
public:
    explicit Simplex(const LpProblem& p) : n(p.cols), m(static_cast<int>(p.rows.size())) {
        tol = LpTraits<T>::tol;
        total = n + m;
        lo.resize(total);
        up.resize(total);
        has_up.assign(total, true);
        cost.assign(total, T{});
        for (int j = 0; j < n; ++j) {
            lo[j] = LpTraits<T>::from_rat(p.lower[j]);
            up[j] = LpTraits<T>::from_rat(p.upper[j]);
            cost[j] = LpTraits<T>::from_rat(p.objective[j]);
        }
        for (int i = 0; i < m; ++i) {
            lo[n + i] = T{};
            has_up[n + i] = false;
        }
        tab.assign(m, std::vector<T>(total, T{}));
        rhs.assign(m, T{});
        basis.resize(m);
        status.assign(total, AtLower);
        for (int i = 0; i < m; ++i) {
            for (const auto& t : p.rows[i].terms) tab[i][t.var] += LpTraits<T>::from_rat(t.coef);
            tab[i][n + i] = T{1};
            rhs[i] = LpTraits<T>::from_rat(p.rows[i].rhs);
            basis[i] = n + i;
            status[n + i] = Basic;
        }
        // initial slack values with structural columns at lower bound
        std::vector<T> slack0 = rhs;
        for (int j = 0; j < n; ++j)
            if (!(lo[j] == T{}))
                for (int i = 0; i < m; ++i) slack0[i] -= tab[i][j] * lo[j];
        for (int i = 0; i < m; ++i) {
            if (!(slack0[i] < T{} - tol)) continue;
            int a = total;
            for (auto& row : tab) row.push_back(T{});
            // install the artificial and renormalize the row so its basic
            // column has coefficient +1
            for (int j = 0; j < total; ++j) tab[i][j] = -tab[i][j];
            rhs[i] = -rhs[i];
            tab[i][a] = T{1};
            lo.push_back(T{});
            up.push_back(-slack0[i]);
            has_up.push_back(true);
            cost.push_back(T{});
            status.push_back(Basic);
            status[basis[i]] = AtLower;  // the slack parks at 0
            basis[i] = a;
            artificials.push_back(a);
            ++total;
        }
    }

    SimplexOutcome<T> run() {
        SimplexOutcome<T> out;
        if (!artificials.empty()) {
            std::vector<T> phase1_cost(total, T{});
            for (int a : artificials) phase1_cost[a] = T{-1};
            optimize(phase1_cost);
            T infeas{};
            auto beta = basic_values();
            for (int a : artificials) {
                if (status[a] == Basic) {
                    for (int i = 0; i < m; ++i)
                        if (basis[i] == a) infeas += beta[i];
                } else {
                    infeas += nonbasic_value(a);
                }
            }
            if (infeas > tol + tol) {
                out.feasible = false;
                out.ray.assign(m, T{});
                for (int i = 0; i < m; ++i) {
                    T y{};
                    for (int r = 0; r < m; ++r) y += phase1_cost[basis[r]] * tab[r][n + i];
                    if (y < T{}) y = T{};  // tolerance noise
                    out.ray[i] = y;
                }
                return out;
            }
            for (int a : artificials) up[a] = T{};  // freeze at zero
        }
        optimize(cost);
        out.feasible = true;
        auto beta = basic_values();
        out.primal.assign(n, T{});
        for (int j = 0; j < n; ++j) out.primal[j] = nonbasic_value(j);
        for (int i = 0; i < m; ++i)
            if (basis[i] < n) out.primal[basis[i]] = beta[i];
        out.objective = T{};
        for (int j = 0; j < n; ++j) out.objective += cost[j] * out.primal[j];
        out.duals.assign(m, T{});
        for (int i = 0; i < m; ++i) {
            T y{};
            for (int r = 0; r < m; ++r) y += cost[basis[r]] * tab[r][n + i];
            out.duals[i] = y;
        }
        out.dual_rcost.assign(n, T{});
        for (int j = 0; j < n; ++j)
            out.dual_rcost[j] = status[j] == Basic ? T{} : reduced_cost(cost, j);
        return out;
    }

private:
    enum Status { AtLower, AtUpper, Basic };

    int n, m, total;
    T tol;
    std::vector<std::vector<T>> tab;
    std::vector<T> rhs, lo, up, cost;
    std::vector<bool> has_up;
    std::vector<int> basis;
    std::vector<Status> status;
    std::vector<int> artificials;

    T nonbasic_value(int j) const { return status[j] == AtUpper ? up[j] : lo[j]; }

    std::vector<T> basic_values() const {
        std::vector<T> beta = rhs;
        for (int j = 0; j < total; ++j) {
            if (status[j] == Basic) continue;
            T xv = nonbasic_value(j);
            if (!(xv == T{}))
                for (int i = 0; i < m; ++i) beta[i] -= tab[i][j] * xv;
        }
        return beta;
    }

    T reduced_cost(const std::vector<T>& c, int j) const {
        T z = c[j];
        for (int i = 0; i < m; ++i) z -= c[basis[i]] * tab[i][j];
        return z;
    }

    void pivot(int row, int col, bool leaving_to_upper) {
        T piv = tab[row][col];
        for (int j = 0; j < total; ++j) tab[row][j] /= piv;
        rhs[row] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            T f = tab[i][col];
            if (f == T{}) continue;
            for (int j = 0; j < total; ++j) tab[i][j] -= f * tab[row][j];
            rhs[i] -= f * rhs[row];
        }
        status[basis[row]] = leaving_to_upper ? AtUpper : AtLower;
        basis[row] = col;
        status[col] = Basic;
    }

    void optimize(const std::vector<T>& c) {
        long cap = 4000L * (total + 5);
        for (long iter = 0;; ++iter) {
            if (iter > cap) throw NumericalBreakdown();
            auto beta = basic_values();
            int enter = -1;
            int dir = 1;
            for (int j = 0; j < total; ++j) {
                if (status[j] == Basic) continue;
                if (has_up[j] && !(lo[j] < up[j])) continue;  // fixed column
                T z = reduced_cost(c, j);
                if (status[j] == AtLower && z > tol) {
                    enter = j;
                    dir = 1;
                    break;
                }
                if (status[j] == AtUpper && z < -tol) {
                    enter = j;
                    dir = -1;
                    break;
                }
            }
            if (enter == -1) return;
            // bounded ratio test on t >= 0, the movement of `enter`
            bool have_t = false;
            T best_t{};
            int leave_row = -1;
            bool leave_upper = false;
            if (has_up[enter]) {
                best_t = up[enter] - lo[enter];
                have_t = true;
            }
            for (int i = 0; i < m; ++i) {
                int b = basis[i];
                T delta = dir == 1 ? -tab[i][enter] : tab[i][enter];  // d beta_i / dt
                T t{};
                bool upperward;
                if (delta > tol) {
                    if (!has_up[b]) continue;
                    t = (up[b] - beta[i]) / delta;
                    upperward = true;
                } else if (delta < -tol) {
                    t = (lo[b] - beta[i]) / delta;
                    upperward = false;
                } else {
                    continue;
                }
                if (t < T{}) t = T{};
                if (!have_t || t < best_t || (t == best_t && leave_row == -1) ||
                    (t == best_t && leave_row >= 0 && b < basis[leave_row])) {
                    best_t = t;
                    have_t = true;
                    leave_row = i;
                    leave_upper = upperward;
                }
            }
            if (!have_t) throw NumericalBreakdown();  // excluded by finite structural bounds
            if (leave_row == -1) {
                status[enter] = status[enter] == AtLower ? AtUpper : AtLower;
            } else {
                pivot(leave_row, enter, leave_upper);
            }
        }
    }
};

}  // namespace detail

inline SimplexOutcome<Rational> solve_lp_exact(const LpProblem& p) {
    detail::Simplex<Rational> s(p);
    return s.run();
}

inline SimplexOutcome<double> solve_lp(const LpProblem& p) {
    try {
        detail::Simplex<double> s(p);
        return s.run();
    } catch (const NumericalBreakdown&) {
        auto exact = solve_lp_exact(p);
        SimplexOutcome<double> out;
        out.feasible = exact.feasible;
        if (exact.feasible) {
            for (auto& v : exact.primal) out.primal.push_back(to_double(v));
            out.objective = to_double(exact.objective);
            for (auto& v : exact.duals) out.duals.push_back(to_double(v));
            for (auto& v : exact.dual_rcost) out.dual_rcost.push_back(to_double(v));
        } else {
            for (auto& v : exact.ray) out.ray.push_back(to_double(v));
        }
        return out;
    }
}

// Aggregates the rows with the given nonnegative multipliers. The result is
// valid for every point of the system: agg.terms * x <= agg.rhs.
inline Row aggregate_rows(const std::vector<Row>& rows, const std::vector<Rational>& mult) {
    Row agg;
    agg.rhs = 0;
    std::map<int, Rational> coefs;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (mult[i] == 0) continue;
        assert(mult[i] > 0);
        for (const auto& t : rows[i].terms) coefs[t.var] += mult[i] * t.coef;
        agg.rhs += mult[i] * rows[i].rhs;
    }
    for (auto& [v, cf] : coefs)
        if (cf != 0) agg.terms.push_back({v, cf});
    return agg;
}

// Checks exactly that the multipliers certify infeasibility over the box:
// min over [lower,upper] of the aggregated lhs exceeds the aggregated rhs.
inline bool farkas_certifies(const std::vector<Row>& rows, const std::vector<Rational>& mult,
                             const std::vector<Rational>& lower,
                             const std::vector<Rational>& upper) {
    Row agg = aggregate_rows(rows, mult);
    Rational min_lhs = 0;
    for (const auto& t : agg.terms)
        min_lhs += t.coef * (t.coef > 0 ? lower[t.var] : upper[t.var]);
    return min_lhs > agg.rhs;
}

// Builds the feasibility cut over the fixed columns from an infeasibility
// ray: sum over fixed j of w_j x_j <= y'b - min over free box of w'x_free.
// Every point of the system satisfies the cut; the fixation that produced
// the ray violates it.
inline Row farkas_cut(const std::vector<Row>& rows, const std::vector<Rational>& mult,
                      const std::vector<bool>& fixed, const std::vector<Rational>& lower,
                      const std::vector<Rational>& upper) {
    Row agg = aggregate_rows(rows, mult);
    Row cut;
    cut.rhs = agg.rhs;
    for (const auto& t : agg.terms) {
        if (fixed[t.var]) cut.terms.push_back(t);
        else cut.rhs -= t.coef * (t.coef > 0 ? lower[t.var] : upper[t.var]);
    }
    return cut;
}

// Integer (optionally mixed) feasibility of a <=-system under fixings.
// DFS over integer columns with per-row interval pruning; continuous
// columns, if any, are checked by an exact LP once all integers are fixed.
inline bool mixed_system_feasible(const std::vector<Row>& rows, const std::vector<Rational>& lower,
                                  const std::vector<Rational>& upper,
                                  const std::vector<VarKind>& kind,
                                  std::vector<std::optional<Rational>> fixed = {}) {
    int n = static_cast<int>(lower.size());
    if (fixed.empty()) fixed.assign(n, std::nullopt);
    bool any_cont = false;
    for (int i = 0; i < n; ++i) any_cont |= kind[i] == VarKind::Continuous && !fixed[i];
    if (!any_cont) return integer_system_feasible(rows, lower, upper, fixed);

    std::vector<bool> relevant(n, false);
    for (const auto& r : rows)
        for (const auto& t : r.terms) relevant[t.var] = true;
    std::vector<int> ints;
    for (int i = 0; i < n; ++i)
        if (relevant[i] && !fixed[i] && kind[i] == VarKind::Integer) ints.push_back(i);

    std::function<bool(std::size_t)> rec = [&](std::size_t pos) -> bool {
        for (const auto& row : rows) {
            Rational min_act = 0;
            for (const auto& t : row.terms) {
                if (fixed[t.var]) min_act += t.coef * *fixed[t.var];
                else min_act += t.coef * (t.coef > 0 ? lower[t.var] : upper[t.var]);
            }
            if (min_act > row.rhs) return false;
        }
        if (pos == ints.size()) {
            LpProblem lp;
            for (int j = 0; j < n; ++j) {
                Rational l = fixed[j] ? *fixed[j] : lower[j];
                Rational u = fixed[j] ? *fixed[j] : upper[j];
                lp.add_col(Rational(0), l, u);
            }
            lp.rows = rows;
            return solve_lp_exact(lp).feasible;
        }
        int v = ints[pos];
        for (BigInt val = rat_floor(lower[v]); val <= rat_floor(upper[v]); ++val) {
            fixed[v] = Rational(val);
            if (rec(pos + 1)) {
                fixed[v].reset();
                return true;
            }
        }
        fixed[v].reset();
        return false;
    };
    return rec(0);
}

inline bool ip_feasible(const std::vector<Row>& rows, const std::vector<Rational>& lower,
                        const std::vector<Rational>& upper,
                        std::vector<std::optional<Rational>> fixed = {}) {
    std::vector<VarKind> kind(lower.size(), VarKind::Integer);
    return mixed_system_feasible(rows, lower, upper, kind, std::move(fixed));
}

}  // namespace qsolve
