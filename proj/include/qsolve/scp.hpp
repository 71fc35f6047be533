#pragma once

// Strategic copy-pruning: proving that the sibling of a closed universal
// branch admits a winning strategy of no smaller value by copying the
// existential assignments of the closed branch's best play and checking a
// worst-case objective condition and per-row worst-case feasibility.

#include <qsolve/model.hpp>

#include <vector>

namespace qsolve {

enum class ScpMark { Unmarked, PotentiallyFinished, Unfinished };

// Walks a feasible play from the last universal variable to the first,
// marking each universal variable whose flip provably cannot help the
// minimizing player. Sums are maintained incrementally so each step only
// inspects the rows containing the flipped variable.
class ScpState {
  public:
    ScpState() = default;

    explicit ScpState(const QuantifiedProgram& p) : p_(&p) {
        occ_.assign(p.n, {});
        for (std::size_t i = 0; i < p.ex_rows.size(); ++i)
            for (const auto& t : p.ex_rows[i].terms) occ_[t.var].push_back(static_cast<int>(i));
        mark_.assign(p.n, ScpMark::Unmarked);
        value_.assign(p.n, Rational(0));
    }

    // Play must satisfy the existential system. Marks are recomputed for
    // every universal variable; earlier marks are overwritten because they
    // were relative to a previous candidate play.
    void mark_from_leaf(const std::vector<Rational>& play) {
        const auto& p = *p_;
        Rational value = p.objective_of(play);
        // worst-case objective contribution of universal variables after the
        // current one, relative to their played values
        Rational future_obj = 0;
        std::vector<Rational> row_sum(p.ex_rows.size());
        for (std::size_t i = 0; i < p.ex_rows.size(); ++i) {
            Rational s = 0;
            for (const auto& t : p.ex_rows[i].terms) s += t.coef * play[t.var];
            row_sum[i] = s;
        }
        bool check = true;
        for (int k = p.n - 1; k >= 0; --k) {
            if (p.quant[k] != Quantifier::Forall) continue;
            Rational flip = play[k] == 0 ? Rational(1) : Rational(0);
            if (check) {
                bool ok = p.objective[k] * (flip - play[k]) + future_obj >= 0;
                for (int ri : occ_[k]) {
                    ++rows_inspected_;
                    const Row& r = p.ex_rows[ri];
                    Rational coef = r.coef_of(k);
                    if (row_sum[ri] + coef * (flip - play[k]) > r.rhs) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    mark_[k] = ScpMark::PotentiallyFinished;
                    value_[k] = value;
                } else {
                    check = false;
                }
            }
            if (!check) mark_[k] = ScpMark::Unfinished;
            // roll the sums past k: future universal variables now take
            // their worst case instead of the played value
            if (p.objective[k] <= 0) future_obj += p.objective[k] * (1 - play[k]);
            else future_obj -= p.objective[k] * play[k];
            for (int ri : occ_[k]) {
                Rational coef = p.ex_rows[ri].coef_of(k);
                row_sum[ri] += (coef > 0 ? coef : Rational(0)) - coef * play[k];
            }
        }
    }

    void clear(int var) { mark_[var] = ScpMark::Unmarked; }

    // True when the sibling of universal variable var may be skipped given
    // that its explored branch closed exactly with the given value.
    bool prunes(int var, const Rational& closed_value) const {
        return mark_[var] == ScpMark::PotentiallyFinished && value_[var] == closed_value;
    }

    ScpMark mark(int var) const { return mark_[var]; }
    long rows_inspected() const { return rows_inspected_; }
    void reset_counter() { rows_inspected_ = 0; }
    int row_count(int var) const { return static_cast<int>(occ_[var].size()); }

  private:
    const QuantifiedProgram* p_ = nullptr;
    std::vector<std::vector<int>> occ_;
    std::vector<ScpMark> mark_;
    std::vector<Rational> value_;
    long rows_inspected_ = 0;
};

}  // namespace qsolve
