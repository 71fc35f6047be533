#pragma once

// Solver core: alpha-beta game-tree search over the binarized program with a
// trail, constraint propagation, conflict analysis, clause learning,
// non-chronological backjumping, universal-move legality, strategic
// copy-pruning and LP-based bounds.

#include <qsolve/binarize.hpp>
#include <qsolve/extended_value.hpp>
#include <qsolve/lp.hpp>
#include <qsolve/model.hpp>
#include <qsolve/relaxation.hpp>
#include <qsolve/scp.hpp>

#include <algorithm>
#include <array>
#include <cassert>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qsolve {

struct SolverConfig {
    double time_limit = 3600.0;           // seconds
    bool simply_restricted = false;       // single-row universal legality
    bool scp = true;                      // strategic copy-pruning
    RelaxationMode relaxation = RelaxationMode::FixedScenario;
    int scenario_cap = 8;
    bool exact_lp = false;                // rational simplex for node bounds
    unsigned long seed = 0;
    std::string output_path;              // consumed by the CLI layer
};

struct SolveStats {
    long decision_nodes = 0;
    long propagations = 0;
    long learnt_constraints = 0;
    long conflicts = 0;
    long leaf_evals = 0;
    long relaxation_calls = 0;
    long scp_prunes = 0;
    long relaxation_prunes = 0;
    long enumeration_fallbacks = 0;
    double seconds = 0.0;
};

enum class SolveStatus { Optimal, Infeasible, UnboundedWin, Timeout };

struct SolveResult {
    SolveStatus status = SolveStatus::Optimal;
    ExtendedValue value;
    std::vector<Rational> pv;  // original variable space, finite values only
    std::optional<Rational> incumbent;
    SolveStats stats;
};

struct ClauseLit {
    int var;
    int value;  // the assignment this literal demands

    bool operator==(const ClauseLit& o) const { return var == o.var && value == o.value; }
    bool operator<(const ClauseLit& o) const {
        return var != o.var ? var < o.var : value < o.value;
    }
};

// Clause sum over 0-literals of x minus sum over 1-literals of x <= count0-1:
// violated exactly when every literal is falsified.
inline Row clause_to_row(const std::vector<ClauseLit>& lits) {
    Row r;
    int zeros = 0;
    for (const auto& l : lits) {
        if (l.value == 0) {
            r.terms.push_back({l.var, Rational(1)});
            ++zeros;
        } else {
            r.terms.push_back({l.var, Rational(-1)});
        }
    }
    r.rhs = Rational(zeros - 1);
    return r;
}

struct DbRow {
    Row row;
    bool universal = false;  // member of the universal system
    bool learnt = false;
    bool ex_valid = true;    // satisfied by every existentially feasible play
    std::vector<ClauseLit> lits;  // nonempty iff the row is a clause
    std::array<int, 2> watch = {-1, -1};
    double activity = 0.0;

    bool is_clause() const { return !lits.empty(); }
};

// Read-only view of trail state needed by conflict analysis; kept separate
// from the searcher so the analysis is testable in isolation.
struct AnalysisContext {
    const std::vector<int8_t>& value;   // -1 unassigned, else 0/1
    const std::vector<int>& level;
    const std::vector<int>& reason;     // -1 branch, else database row id
    const std::vector<Quantifier>& quant;
    const std::vector<DbRow>& db;
    bool allow_erasure = false;         // sound only without a universal system
    const std::vector<Rational>* lower = nullptr;  // to drop unflippable literals
    const std::vector<Rational>* upper = nullptr;
};

struct AnalysisResult {
    bool global_conflict = false;   // clause emptied without erasure
    bool empty_by_erasure = false;  // clause emptied through erasure only
    bool asserting = false;
    bool ex_valid = true;
    int target_level = 0;
    int top_var = -1;
    int top_value = 0;
    std::vector<ClauseLit> lits;
    std::vector<int> touched;  // database rows used in the derivation
};

namespace detail {

// Assigned variables whose flip relaxes the violated <=-row.
inline void contributing_literals(const Row& row, const std::vector<int8_t>& value,
                                  std::vector<ClauseLit>& out) {
    for (const auto& t : row.terms) {
        if (value[t.var] < 0) continue;
        if (t.coef > 0 && value[t.var] == 1) out.push_back({t.var, 0});
        else if (t.coef < 0 && value[t.var] == 0) out.push_back({t.var, 1});
    }
}

}  // namespace detail

// Turns a violated row into a learnt clause: contributing literals are
// collected, implied existential literals are recursively replaced by the
// contributing literals of their reason rows, and (when permitted) universal
// branch literals at the highest remaining decision level are erased.
inline AnalysisResult analyze_conflict(const AnalysisContext& ctx, int conflict_row) {
    AnalysisResult res;
    res.touched.push_back(conflict_row);
    res.ex_valid = ctx.db[conflict_row].ex_valid;

    // a pinned column cannot flip; its literal is false over the whole box
    auto pinned = [&](int var) {
        return ctx.lower != nullptr && (*ctx.lower)[var] == (*ctx.upper)[var];
    };
    std::vector<ClauseLit> work;
    detail::contributing_literals(ctx.db[conflict_row].row, ctx.value, work);
    std::set<int> seen;
    std::vector<ClauseLit> kept;
    while (!work.empty()) {
        ClauseLit lit = work.back();
        work.pop_back();
        if (!seen.insert(lit.var).second) continue;
        if (pinned(lit.var)) continue;
        int r = ctx.reason[lit.var];
        if (r >= 0 && ctx.quant[lit.var] == Quantifier::Exists) {
            res.touched.push_back(r);
            res.ex_valid = res.ex_valid && ctx.db[r].ex_valid;
            std::vector<ClauseLit> sub;
            detail::contributing_literals(ctx.db[r].row, ctx.value, sub);
            for (const auto& s : sub)
                if (s.var != lit.var) work.push_back(s);
        } else {
            kept.push_back(lit);  // branch literal, or implied via the universal system
        }
    }

    bool erased = false;
    if (ctx.allow_erasure) {
        while (!kept.empty()) {
            int top = 0;
            for (const auto& l : kept) top = std::max(top, ctx.level[l.var]);
            bool all_universal_branch = true;
            for (const auto& l : kept)
                if (ctx.level[l.var] == top &&
                    (ctx.quant[l.var] != Quantifier::Forall || ctx.reason[l.var] >= 0))
                    all_universal_branch = false;
            if (!all_universal_branch) break;
            kept.erase(std::remove_if(kept.begin(), kept.end(),
                                      [&](const ClauseLit& l) { return ctx.level[l.var] == top; }),
                       kept.end());
            erased = true;
        }
    }
    res.ex_valid = res.ex_valid && !erased;

    if (kept.empty()) {
        if (erased) res.empty_by_erasure = true;
        else res.global_conflict = true;
        return res;
    }

    res.lits = kept;
    std::sort(res.lits.begin(), res.lits.end());
    int top = 0;
    for (const auto& l : kept) top = std::max(top, ctx.level[l.var]);
    int at_top = 0;
    int below = 0;
    for (const auto& l : kept) {
        if (ctx.level[l.var] == top) {
            ++at_top;
            res.top_var = l.var;
            res.top_value = l.value;
        } else {
            below = std::max(below, ctx.level[l.var]);
        }
    }
    res.target_level = below;
    res.asserting = at_top == 1 && top > 0 && ctx.quant[res.top_var] == Quantifier::Exists;
    if (!res.asserting) res.target_level = top;
    return res;
}

namespace detail {

class Searcher {
  public:
    Searcher(const BinarizedProgram& bp, const SolverConfig& cfg)
        : bp_(bp), p_(bp.prog), cfg_(cfg), pool_(cfg.scenario_cap) {
        int n = p_.n;
        class_ = classify_uncertainty(bp.original);
        scp_on_ = cfg_.scp && p_.uni_rows.empty();
        if (scp_on_) scp_ = ScpState(p_);
        val_.assign(n, -1);
        robust_.assign(n, 0);
        play_.assign(n, Rational(0));
        fixed_.assign(n, std::nullopt);
        level_of_.assign(n, 0);
        reason_of_.assign(n, -1);
        level_finished_.assign(n + 2, 0);
        killer_.assign(n + 2, {-1, -1});
        occ_.assign(n, {});
        wl_.assign(2 * n, {});
        for (const auto& r : p_.ex_rows) add_db_row(r, false, false, true);
        for (const auto& r : p_.uni_rows) add_db_row(r, true, false, true);
        first_cont_ = n;
        for (int j = 0; j < n; ++j)
            if (p_.kind[j] == VarKind::Continuous) {
                first_cont_ = j;
                break;
            }
        auto blocks = p_.blocks();
        dep_depth_limit_ = blocks.empty() ? 0 : blocks[0].end;
        if (blocks.size() > 1) dep_depth_limit_ = blocks[1].end;
    }

    SolveResult run() {
        start_ = std::chrono::steady_clock::now();
        ExtendedValue value = ExtendedValue::minus_inf();
        std::vector<Rational> pvbits;
        // rows can force assignments before any branching happens
        for (std::size_t i = 0; i < db_.size(); ++i) pending_row_scan_.push_back(static_cast<int>(i));
        while (true) {
            int confl = -1;
            for (std::size_t i = 0; i < pending_row_scan_.size() && confl < 0; ++i)
                confl = check_row(pending_row_scan_[i], 0);
            pending_row_scan_.clear();
            if (confl < 0) confl = propagate(0);
            if (confl >= 0) {
                value = ExtendedValue::minus_inf();  // root is universally extensible
                break;
            }
            pvbits.assign(p_.n, Rational(0));
            value = search(0, ExtendedValue::minus_inf(), ExtendedValue::plus_inf(), &pvbits);
            if (global_dead_) {
                value = ExtendedValue::minus_inf();
                break;
            }
            if (timed_out_) break;
            if (backjump_waiting_ && backjump_target_ == 0) {
                backjump_waiting_ = false;
                if (++root_restarts_ > p_.n + 8) allow_backjump_ = false;
                continue;
            }
            break;
        }

        SolveResult res;
        stats_.seconds = elapsed();
        res.stats = stats_;
        if (timed_out_) {
            res.status = SolveStatus::Timeout;
            if (have_incumbent_) {
                Rational v = incumbent_ + bp_.objective_offset;
                if (bp_.original.objective_negated) v = -v;
                res.incumbent = v;
                res.value = ExtendedValue::finite(v);
                res.pv = bp_.decode(incumbent_pv_);
            } else {
                res.value = ExtendedValue::minus_inf();
            }
            return res;
        }
        assert(!value.is_unknown());
        if (value.is_minus_inf()) {
            res.status = SolveStatus::Infeasible;
            res.value = value;
        } else if (value.is_plus_inf()) {
            res.status = SolveStatus::UnboundedWin;
            res.value = value;
        } else {
            res.status = SolveStatus::Optimal;
            Rational v = value.value() + bp_.objective_offset;
            if (bp_.original.objective_negated) v = -v;
            res.value = ExtendedValue::finite(v);
            res.incumbent = v;
            res.pv = bp_.decode(pvbits);
        }
        return res;
    }

    // Test hooks.
    const std::vector<DbRow>& db() const { return db_; }
    const std::vector<std::vector<int>>& watch_lists() const { return wl_; }
    long scp_rows_inspected() const { return scp_on_ ? scp_.rows_inspected() : 0; }

  private:
    enum class ConflictOutcome { Global, Backjump, LocalFail };

    // ----- trail -----

    void assign(int var, int value, int level, int reason, bool robust = true) {
        assert(val_[var] < 0);
        val_[var] = static_cast<int8_t>(value);
        play_[var] = Rational(value);
        fixed_[var] = play_[var];
        level_of_[var] = level;
        reason_of_[var] = reason;
        robust_[var] = reason < 0 ? 1 : static_cast<char>(robust);
        trail_.push_back(var);
        if (reason >= 0) ++stats_.propagations;
    }

    void pop_to(std::size_t mark) {
        while (trail_.size() > mark) {
            int var = trail_.back();
            trail_.pop_back();
            val_[var] = -1;
            fixed_[var].reset();
            reason_of_[var] = -1;
            robust_[var] = 0;
            if (scp_on_) scp_.clear(var);
        }
        if (prop_head_ > trail_.size()) prop_head_ = trail_.size();
        while (!watch_undo_.empty() && watch_undo_.back().trail_size > mark) {
            const auto& u = watch_undo_.back();
            db_[u.clause].watch[u.slot] = u.old_pos;
            const auto& l = db_[u.clause].lits[u.old_pos];
            wl_[2 * l.var + l.value].push_back(u.clause);
            watch_undo_.pop_back();
        }
    }

    // ----- constraint database -----

    int add_db_row(const Row& r, bool universal, bool learnt, bool ex_valid) {
        DbRow d;
        d.row = r;
        d.universal = universal;
        d.learnt = learnt;
        d.ex_valid = ex_valid;
        int id = static_cast<int>(db_.size());
        db_.push_back(std::move(d));
        for (const auto& t : db_[id].row.terms) occ_[t.var].push_back(id);
        return id;
    }

    int add_clause(const std::vector<ClauseLit>& lits, bool ex_valid) {
        DbRow d;
        d.lits = lits;
        d.row = clause_to_row(lits);
        d.learnt = true;
        d.ex_valid = ex_valid;
        d.activity = act_inc_;
        int id = static_cast<int>(db_.size());
        // watch two literals, preferring unassigned ones, then highest level
        auto rank = [&](const ClauseLit& l) {
            return val_[l.var] < 0 ? 1000000 : level_of_[l.var];
        };
        int w0 = 0, w1 = lits.size() > 1 ? 1 : 0;
        for (int i = 0; i < static_cast<int>(lits.size()); ++i) {
            if (rank(lits[i]) > rank(lits[w0])) w0 = i;
        }
        for (int i = 0; i < static_cast<int>(lits.size()); ++i) {
            if (i != w0 && (w1 == w0 || rank(lits[i]) > rank(lits[w1]))) w1 = i;
        }
        d.watch = {w0, w1};
        db_.push_back(std::move(d));
        for (int w : db_[id].watch) {
            const auto& l = db_[id].lits[w];
            wl_[2 * l.var + l.value].push_back(id);
        }
        pending_.push_back(id);
        ++stats_.learnt_constraints;
        ++learnt_clauses_;
        if (learnt_clauses_ > 20000) reduce_db();
        return id;
    }

    void bump_activity(const std::vector<int>& rows) {
        for (int r : rows)
            if (db_[r].learnt) db_[r].activity += act_inc_;
        act_inc_ /= 0.95;
        if (act_inc_ > 1e100) {
            for (auto& d : db_) d.activity *= 1e-100;
            act_inc_ *= 1e-100;
        }
    }

    void reduce_db() {
        std::vector<char> keep(db_.size(), 0);
        std::vector<int> candidates;
        for (std::size_t i = 0; i < db_.size(); ++i) {
            if (!db_[i].learnt || !db_[i].is_clause()) keep[i] = 1;
            else candidates.push_back(static_cast<int>(i));
        }
        for (int var : trail_)
            if (reason_of_[var] >= 0) keep[reason_of_[var]] = 1;
        for (int id : pending_) keep[id] = 1;
        std::sort(candidates.begin(), candidates.end(),
                  [&](int a, int b) { return db_[a].activity > db_[b].activity; });
        for (std::size_t i = 0; i < candidates.size() / 2; ++i) keep[candidates[i]] = 1;
        std::vector<int> remap(db_.size(), -1);
        std::vector<DbRow> next;
        for (std::size_t i = 0; i < db_.size(); ++i) {
            if (!keep[i]) continue;
            remap[i] = static_cast<int>(next.size());
            next.push_back(std::move(db_[i]));
        }
        db_ = std::move(next);
        learnt_clauses_ = 0;
        for (const auto& d : db_)
            if (d.learnt && d.is_clause()) ++learnt_clauses_;
        for (int& r : reason_of_)
            if (r >= 0) r = remap[r];
        for (int& id : pending_) id = remap[id];
        for (auto& u : watch_undo_) u.clause = remap[u.clause];
        watch_undo_.erase(std::remove_if(watch_undo_.begin(), watch_undo_.end(),
                                         [](const WatchUndo& u) { return u.clause < 0; }),
                          watch_undo_.end());
        for (auto& o : occ_) o.clear();
        for (auto& w : wl_) w.clear();
        for (std::size_t i = 0; i < db_.size(); ++i) {
            if (db_[i].is_clause()) {
                for (int w : db_[i].watch) {
                    const auto& l = db_[i].lits[w];
                    wl_[2 * l.var + l.value].push_back(static_cast<int>(i));
                }
            } else {
                for (const auto& t : db_[i].row.terms) occ_[t.var].push_back(static_cast<int>(i));
            }
        }
    }

    // ----- propagation -----

    Rational min_activation(const Row& r) const {
        Rational m = 0;
        for (const auto& t : r.terms) {
            if (val_[t.var] >= 0) m += t.coef * play_[t.var];
            else m += t.coef * (t.coef > 0 ? p_.lower[t.var] : p_.upper[t.var]);
        }
        return m;
    }

    // Returns the id of a violated existential constraint, or -1. Universal
    // rows imply only universal variables and never signal conflicts here;
    // their violations surface as leaf weights.
    int propagate(int level) {
        // freshly learnt clauses may already be unit or violated
        std::vector<int> pend;
        pend.swap(pending_);
        for (std::size_t i = 0; i < pend.size(); ++i) {
            int c = check_clause_state(pend[i], level);
            if (c >= 0) {
                for (std::size_t k = i; k < pend.size(); ++k) pending_.push_back(pend[k]);
                return c;
            }
        }
        while (prop_head_ < trail_.size()) {
            int var = trail_[prop_head_++];
            int falsified = 2 * var + (1 - val_[var]);
            std::vector<int> watchers;
            watchers.swap(wl_[falsified]);
            for (std::size_t wi = 0; wi < watchers.size(); ++wi) {
                int cid = watchers[wi];
                int c = advance_watch(cid, falsified, level, wl_[falsified]);
                if (c >= 0) {
                    for (std::size_t k = wi + 1; k < watchers.size(); ++k)
                        wl_[falsified].push_back(watchers[k]);
                    return c;
                }
            }
            for (int ri : occ_[var]) {
                int c = check_row(ri, level);
                if (c >= 0) return c;
            }
        }
        return -1;
    }

    bool lit_true(const ClauseLit& l) const { return val_[l.var] == l.value; }
    bool lit_false(const ClauseLit& l) const { return val_[l.var] == 1 - l.value; }

    // Whether fixing `target` from this constraint is value-sound. A play
    // escaping the forced value must flip another assigned variable of the
    // constraint; that flip is accounted for when the variable sits in the
    // conforming prefix (lower index or branch decision) or is provably dead
    // in the constraint's own system (robust same-system implication chain).
    // second: whether the resulting assignment is itself robust.
    std::pair<bool, bool> implication_guard(const Row& r, int target, bool universal) const {
        bool allowed = true, robust = true;
        Quantifier sys = universal ? Quantifier::Forall : Quantifier::Exists;
        for (const auto& t : r.terms) {
            if (t.var == target || val_[t.var] < 0) continue;
            bool chain_ok =
                reason_of_[t.var] < 0 || (robust_[t.var] && p_.quant[t.var] == sys);
            if (!chain_ok) {
                robust = false;
                if (t.var > target) allowed = false;
            }
        }
        return {allowed, robust};
    }

    // Clause whose watched literal was falsified: move the watch, or detect
    // unit/conflict. The watcher keeps itself in `bucket` when not moved.
    int advance_watch(int cid, int falsified, int level, std::vector<int>& bucket) {
        DbRow& d = db_[cid];
        int slot = -1;
        for (int s = 0; s < 2; ++s) {
            const auto& l = d.lits[d.watch[s]];
            if (2 * l.var + l.value == falsified) slot = s;
        }
        if (slot < 0) {  // stale entry after a restored watch
            return -1;
        }
        const ClauseLit& other = d.lits[d.watch[1 - slot]];
        if (lit_true(other)) {
            bucket.push_back(cid);
            return -1;
        }
        for (int i = 0; i < static_cast<int>(d.lits.size()); ++i) {
            if (i == d.watch[0] || i == d.watch[1]) continue;
            if (!lit_false(d.lits[i])) {
                watch_undo_.push_back({cid, slot, d.watch[slot], trail_.size()});
                d.watch[slot] = i;
                wl_[2 * d.lits[i].var + d.lits[i].value].push_back(cid);
                return -1;
            }
        }
        bucket.push_back(cid);
        if (val_[other.var] < 0) {
            // unit on a universal variable is never forced
            if (p_.quant[other.var] == Quantifier::Exists) {
                auto [allowed, robust] = implication_guard(d.row, other.var, false);
                if (allowed) assign(other.var, other.value, level, cid, robust);
            }
            return -1;
        }
        return lit_false(other) ? cid : -1;
    }

    int check_clause_state(int cid, int level) {
        const DbRow& d = db_[cid];
        int free = -1, nfree = 0;
        for (int i = 0; i < static_cast<int>(d.lits.size()); ++i) {
            if (lit_true(d.lits[i])) return -1;
            if (!lit_false(d.lits[i])) {
                free = i;
                ++nfree;
            }
        }
        if (nfree == 0) return cid;
        if (nfree == 1 && p_.quant[d.lits[free].var] == Quantifier::Exists &&
            val_[d.lits[free].var] < 0) {
            auto [allowed, robust] = implication_guard(d.row, d.lits[free].var, false);
            if (allowed) assign(d.lits[free].var, d.lits[free].value, level, cid, robust);
        }
        return -1;
    }

    int check_row(int ri, int level) {
        const DbRow& d = db_[ri];
        Rational m = min_activation(d.row);
        if (m > d.row.rhs) return d.universal ? -1 : ri;
        Quantifier target = d.universal ? Quantifier::Forall : Quantifier::Exists;
        for (const auto& t : d.row.terms) {
            if (val_[t.var] >= 0 || p_.kind[t.var] != VarKind::Integer) continue;
            if (p_.quant[t.var] != target) continue;
            if (p_.lower[t.var] != 0 || p_.upper[t.var] != 1) continue;  // pinned column
            // contribution of t.var inside m is min(0, coef)
            Rational base = m - (t.coef > 0 ? Rational(0) : t.coef);
            for (int v = 0; v <= 1; ++v) {
                if (base + t.coef * v > d.row.rhs) {
                    auto [allowed, robust] = implication_guard(d.row, t.var, d.universal);
                    if (allowed) assign(t.var, 1 - v, level, ri, robust);
                    break;
                }
            }
        }
        return -1;
    }

    // ----- conflicts -----

    ConflictOutcome handle_conflict(int confl, int level) {
        ++stats_.conflicts;
        AnalysisContext ctx{val_,  level_of_,           reason_of_, p_.quant,
                            db_,   p_.uni_rows.empty(), &p_.lower,  &p_.upper};
        AnalysisResult an = analyze_conflict(ctx, confl);
        bump_activity(an.touched);
        if (an.global_conflict) {
            global_dead_ = true;
            return ConflictOutcome::Global;
        }
        if (an.empty_by_erasure) return ConflictOutcome::LocalFail;
        add_clause(an.lits, an.ex_valid);
        // backjumping relies on the clause re-implying its top literal at the
        // target; skip it when the implication guard would veto that
        bool will_imply = true;
        for (const auto& l : an.lits) {
            if (l.var == an.top_var) continue;
            bool chain_ok = reason_of_[l.var] < 0 ||
                            (robust_[l.var] && p_.quant[l.var] == Quantifier::Exists);
            if (!chain_ok && l.var > an.top_var) will_imply = false;
        }
        if (!have_incumbent_ && allow_backjump_ && will_imply && an.asserting &&
            an.target_level < level) {
            for (int k = an.target_level + 1; k <= level; ++k) level_finished_[k] = 1;
            backjump_waiting_ = true;
            backjump_target_ = an.target_level;
            return ConflictOutcome::Backjump;
        }
        return ConflictOutcome::LocalFail;
    }

    // Fixings defining the current game position: every assigned variable up
    // to the deepest branch decision. Assignments beyond that point (made by
    // propagation jumping ahead of the branching frontier) belong to deeper
    // positions and are folded by region_value instead.
    std::vector<std::optional<Rational>> prefix_fixings() const {
        int limit = -1;
        for (int var : trail_)
            if (reason_of_[var] < 0 && var > limit) limit = var;
        std::vector<std::optional<Rational>> fx(p_.n);
        for (int var : trail_)
            if (var <= limit) fx[var] = play_[var];
        return fx;
    }

    // Value of a node whose trail hit an existential conflict. With no
    // universal system every completion of the position is existentially
    // dead, so the node weighs -inf; otherwise the exact region fold decides
    // between -inf, +inf, unknown and (rarely) a finite value.
    ExtendedValue dead_value() {
        if (p_.uni_rows.empty()) return ExtendedValue::minus_inf();
        return enumerate_subtree();
    }

    // ----- legality -----

    bool legal_universal(int var, int value) {
        if (p_.uni_rows.empty()) return true;
        if (cfg_.simply_restricted) {
            for (int ri : occ_[var]) {
                const DbRow& d = db_[ri];
                if (!d.universal) continue;
                Rational coef = d.row.coef_of(var);
                Rational contrib = coef > 0 ? coef * p_.lower[var] : coef * p_.upper[var];
                Rational base = min_activation(d.row) - contrib;
                if (base + coef * value > d.row.rhs) return false;
            }
            return true;
        }
        // fix the conforming prefix and robust universal implications; an
        // existential implication beyond the frontier must stay free, since
        // the universal system may become satisfiable again under its flip
        std::vector<std::optional<Rational>> fx(p_.n);
        for (int w : trail_)
            if (w < var || (robust_[w] && p_.quant[w] == Quantifier::Forall))
                fx[w] = play_[w];
        fx[var] = Rational(value);
        return ip_feasible(p_.uni_rows, p_.lower, p_.upper, fx);
    }

    // ----- leaves -----

    ExtendedValue eval_leaf(std::vector<Rational>* pv) {
        ++stats_.leaf_evals;
        std::vector<Rational> play(p_.n, Rational(0));
        for (int j = 0; j < first_cont_; ++j) play[j] = play_[j];
        bool uni_ok = p_.system_satisfied(p_.uni_rows, play);
        bool ex_ok;
        Rational obj = 0;
        for (int j = 0; j < first_cont_; ++j) obj += p_.objective[j] * play[j];
        if (first_cont_ == p_.n) {
            ex_ok = p_.system_satisfied(p_.ex_rows, play);
        } else {
            LpProblem lp;
            for (int j = 0; j < p_.n; ++j) {
                bool fx = j < first_cont_;
                lp.add_col(fx ? Rational(0) : p_.objective[j], fx ? play[j] : p_.lower[j],
                           fx ? play[j] : p_.upper[j]);
            }
            lp.rows = p_.ex_rows;
            auto out = solve_lp_exact(lp);
            ex_ok = out.feasible;
            if (ex_ok) {
                obj += out.objective;
                for (int j = first_cont_; j < p_.n; ++j) play[j] = out.primal[j];
            }
        }
        if (ex_ok && uni_ok) {
            if (scp_on_) scp_.mark_from_leaf(play);
            bool any_uni = false;
            for (int j = 0; j < p_.n; ++j) any_uni |= p_.quant[j] == Quantifier::Forall;
            if (any_uni && class_ != UncertaintyClass::DecisionDependent &&
                cfg_.relaxation != RelaxationMode::None)
                pool_.add(p_, play);
            if (pv != nullptr) *pv = play;
            return ExtendedValue::finite(obj);
        }
        if (!ex_ok && uni_ok) return ExtendedValue::minus_inf();
        if (ex_ok && !uni_ok) return ExtendedValue::plus_inf();
        return ExtendedValue::unknown();
    }

    struct RegionResult {
        ExtendedValue v;
        std::vector<Rational> play;  // nonempty only when v is finite
    };

    // Exact extended minimax of the position given by fx. Regions where one
    // constraint system cannot be completed fold in one step: every leaf is
    // then dead on that side, and a fold over {-inf, unknown} (or {+inf,
    // unknown}) equals the non-unknown value under both players whenever one
    // exists. Recursion happens only where both systems stay completable.
    RegionResult region_value(std::vector<std::optional<Rational>>& fx, int from) {
        bool uni_ok =
            p_.uni_rows.empty() || ip_feasible(p_.uni_rows, p_.lower, p_.upper, fx);
        bool ex_ok = mixed_system_feasible(p_.ex_rows, p_.lower, p_.upper, p_.kind, fx);
        if (!uni_ok || !ex_ok) {
            if (uni_ok) return {ExtendedValue::minus_inf(), {}};
            if (ex_ok) return {ExtendedValue::plus_inf(), {}};
            return {ExtendedValue::unknown(), {}};
        }
        int j = -1;
        for (int i = from; i < first_cont_; ++i)
            if (!fx[i]) {
                j = i;
                break;
            }
        if (j < 0) {
            // both systems completable and every integer variable fixed
            Rational obj = 0;
            std::vector<Rational> play(p_.n, Rational(0));
            for (int i = 0; i < first_cont_; ++i) {
                play[i] = *fx[i];
                obj += p_.objective[i] * play[i];
            }
            if (first_cont_ < p_.n) {
                LpProblem lp;
                for (int i = 0; i < p_.n; ++i) {
                    bool f = i < first_cont_;
                    lp.add_col(f ? Rational(0) : p_.objective[i], f ? play[i] : p_.lower[i],
                               f ? play[i] : p_.upper[i]);
                }
                lp.rows = p_.ex_rows;
                auto out = solve_lp_exact(lp);
                obj += out.objective;
                for (int i = first_cont_; i < p_.n; ++i) play[i] = out.primal[i];
            }
            return {ExtendedValue::finite(obj), std::move(play)};
        }
        bool exists = p_.quant[j] == Quantifier::Exists;
        RegionResult best{ExtendedValue::unknown(), {}};
        int lo = p_.lower[j] == 0 ? 0 : 1, hi = p_.upper[j] == 0 ? 0 : 1;
        for (int v = lo; v <= hi; ++v) {
            fx[j] = Rational(v);
            RegionResult child = region_value(fx, j + 1);
            ExtendedValue folded = exists ? ev_max(best.v, child.v) : ev_min(best.v, child.v);
            bool improved = best.v.is_unknown() ? !child.v.is_unknown() : folded != best.v;
            if (improved) best.play = std::move(child.play);
            best.v = folded;
        }
        fx[j].reset();
        return best;
    }

    // Exact fold of the subtree at the current position. When the value is
    // finite a witness play is reported through pvout.
    ExtendedValue enumerate_subtree(std::vector<Rational>* pvout = nullptr) {
        ++stats_.enumeration_fallbacks;
        auto fx = prefix_fixings();
        RegionResult out = region_value(fx, 0);
        if (pvout != nullptr && out.v.is_finite()) *pvout = out.play;
        return out.v;
    }

    // ----- relaxations -----

    bool bound_prunes(const Rational& bound, const ExtendedValue& alpha) const {
        return alpha.is_finite() && bound <= alpha.value();
    }
    bool bound_prunes(double bound, const ExtendedValue& alpha) const {
        return alpha.is_finite() && bound + 1e-6 < to_double(alpha.value());
    }

    // Certifies a float infeasibility ray exactly over the node box.
    bool certify_infeasible(const LpProblem& lp, const std::vector<double>& ray,
                            std::vector<Rational>& mult) const {
        mult.clear();
        for (double r : ray) mult.push_back(r > 0 ? Rational(r) : Rational(0));
        return farkas_certifies(lp.rows, mult, lp.lower, lp.upper);
    }

    std::optional<Rational> make_scenario(std::vector<Rational>& values) {
        values.assign(p_.n, Rational(0));
        auto fx = fixed_;
        for (int j = 0; j < p_.n; ++j) {
            if (p_.quant[j] != Quantifier::Forall) continue;
            if (fx[j]) {
                values[j] = *fx[j];
                continue;
            }
            fx[j] = Rational(0);
            if (!p_.uni_rows.empty() && !ip_feasible(p_.uni_rows, p_.lower, p_.upper, fx)) {
                fx[j] = Rational(1);
                if (!ip_feasible(p_.uni_rows, p_.lower, p_.upper, fx)) return std::nullopt;
            }
            values[j] = *fx[j];
        }
        return Rational(0);
    }

    // Runs the LP machinery at a node. Returns a value when the node can be
    // closed immediately (dead or bound-pruned), otherwise fills the primal
    // hint for polarity selection.
    std::optional<ExtendedValue> relaxation_step(int depth, const ExtendedValue& alpha) {
        hint_.clear();
        if (cfg_.relaxation == RelaxationMode::None) return std::nullopt;
        bool prunable =
            class_ != UncertaintyClass::DecisionDependent && alpha.is_finite();

        LpProblem lp = build_node_lp(p_, fixed_);
        ++stats_.relaxation_calls;
        if (cfg_.exact_lp) {
            auto out = solve_lp_exact(lp);
            if (!out.feasible) {
                learn_farkas(lp, out.ray);
                return dead_value();
            }
            for (const auto& v : out.primal) hint_.push_back(to_double(v));
            if (prunable && bound_prunes(out.objective, alpha)) {
                ++stats_.relaxation_prunes;
                return alpha;
            }
        } else {
            auto out = solve_lp(lp);
            if (!out.feasible) {
                std::vector<Rational> mult;
                if (certify_infeasible(lp, out.ray, mult)) {
                    learn_farkas(lp, mult);
                    return dead_value();
                }
            } else {
                hint_ = out.primal;
                if (prunable && bound_prunes(out.objective, alpha)) {
                    ++stats_.relaxation_prunes;
                    return alpha;
                }
            }
        }

        bool has_universal = false;
        for (int j = 0; j < p_.n; ++j) has_universal |= p_.quant[j] == Quantifier::Forall;
        if (!has_universal || class_ == UncertaintyClass::DecisionDependent)
            return std::nullopt;

        const Scenario* s = pool_.best_consistent(p_, fixed_);
        std::vector<Rational> scratch;
        const std::vector<Rational>* scen = nullptr;
        if (s != nullptr) {
            scen = &s->values;
        } else if (make_scenario(scratch)) {
            pool_.add(p_, scratch);
            scen = &scratch;
        }
        if (scen != nullptr) {
            LpProblem lp2 = build_node_lp(p_, fixed_, scen, true);
            ++stats_.relaxation_calls;
            auto handle_infeasible = [&](const std::vector<Rational>& mult) {
                if (depth == 0 && farkas_certifies(lp2.rows, mult, lp2.lower, lp2.upper)) {
                    global_dead_ = true;  // root infeasibility transfers to the instance
                    return true;
                }
                return false;
            };
            if (cfg_.exact_lp) {
                auto out = solve_lp_exact(lp2);
                if (!out.feasible) {
                    if (handle_infeasible(out.ray)) return ExtendedValue::minus_inf();
                } else {
                    hint_.clear();
                    for (const auto& v : out.primal) hint_.push_back(to_double(v));
                    if (prunable && bound_prunes(out.objective, alpha)) {
                        ++stats_.relaxation_prunes;
                        return alpha;
                    }
                }
            } else {
                auto out = solve_lp(lp2);
                if (!out.feasible) {
                    std::vector<Rational> mult;
                    if (certify_infeasible(lp2, out.ray, mult) && handle_infeasible(mult))
                        return ExtendedValue::minus_inf();
                } else {
                    hint_ = out.primal;
                    if (prunable && bound_prunes(out.objective, alpha)) {
                        ++stats_.relaxation_prunes;
                        return alpha;
                    }
                }
            }
        }

        if (cfg_.relaxation == RelaxationMode::SRelaxation && depth <= dep_depth_limit_) {
            auto scens = pool_.snapshot_consistent(p_, fixed_);
            if (static_cast<int>(scens.size()) >= 2) {
                DepProblem dep = s_relaxation_dep(p_, scens, fixed_);
                ++stats_.relaxation_calls;
                if (cfg_.exact_lp) {
                    auto out = solve_lp_exact(dep.lp);
                    if (out.feasible && prunable && bound_prunes(out.objective, alpha)) {
                        ++stats_.relaxation_prunes;
                        return alpha;
                    }
                } else {
                    auto out = solve_lp(dep.lp);
                    if (out.feasible && prunable && bound_prunes(out.objective, alpha)) {
                        ++stats_.relaxation_prunes;
                        return alpha;
                    }
                }
            }
        }
        return std::nullopt;
    }

    void learn_farkas(const LpProblem& lp, const std::vector<Rational>& mult) {
        std::vector<bool> fixed_mask(p_.n, false);
        for (int j = 0; j < p_.n; ++j) fixed_mask[j] = fixed_[j].has_value();
        Row cut = farkas_cut(lp.rows, mult, fixed_mask, p_.lower, p_.upper);
        if (!cut.terms.empty()) {
            add_db_row(cut, false, true, true);
            ++stats_.learnt_constraints;
        }
    }

    // ----- search -----

    int pick_branch_var() const {
        for (int j = 0; j < first_cont_; ++j)
            if (val_[j] < 0) return j;
        return -1;
    }

    void check_time() {
        if (elapsed() > cfg_.time_limit) timed_out_ = true;
    }

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

    ExtendedValue search(int depth, ExtendedValue alpha, ExtendedValue beta,
                         std::vector<Rational>* pv) {
        if (++node_counter_ % 256 == 0) check_time();
        if (timed_out_ || global_dead_) return ExtendedValue::minus_inf();
        int branch = pick_branch_var();
        if (branch < 0) {
            ExtendedValue lv = eval_leaf(pv);
            if (lv.is_unknown()) {
                // implied assignments collapsed the position to one play that
                // neither player could reach; the true value folds over their
                // freed alternatives
                std::vector<Rational> epv;
                lv = enumerate_subtree(&epv);
                if (lv.is_finite() && pv != nullptr) *pv = epv;
            }
            return lv;
        }
        ++stats_.decision_nodes;
        int level = depth + 1;
        level_finished_[level] = 0;

        auto closed = relaxation_step(depth, alpha);
        if (closed) return *closed;

        bool exists = p_.quant[branch] == Quantifier::Exists;
        std::array<int, 2> order = {0, 1};
        if (exists) {
            if (branch < static_cast<int>(hint_.size()) && hint_[branch] >= 0.5)
                order = {1, 0};
        } else if (killer_[depth][0] == 1) {
            order = {1, 0};
        }

        ExtendedValue score = ExtendedValue::unknown();
        std::vector<Rational> mypv;
        bool skipped_illegal = false;
        for (int oi = 0; oi < 2; ++oi) {
            int v = order[oi];
            if (Rational(v) < p_.lower[branch] || Rational(v) > p_.upper[branch]) continue;
            if (!exists && !legal_universal(branch, v)) {
                skipped_illegal = true;
                continue;
            }
            std::size_t mark = trail_.size();
            assign(branch, v, level, -1);
            int rounds = 0;
            ExtendedValue value;
            std::vector<Rational> childpv(p_.n, Rational(0));
            bool have_value = false;
            while (true) {
                if (timed_out_ || global_dead_) {
                    pop_to(mark);
                    return ExtendedValue::minus_inf();
                }
                if (level_finished_[level]) {
                    pop_to(mark);
                    return ExtendedValue::minus_inf();
                }
                int confl = propagate(level);
                if (confl >= 0) {
                    auto outcome = handle_conflict(confl, level);
                    if (outcome != ConflictOutcome::LocalFail) {
                        pop_to(mark);
                        return ExtendedValue::minus_inf();
                    }
                    value = dead_value();
                    have_value = true;
                    break;
                }
                ExtendedValue a2 = alpha, b2 = beta;
                if (!score.is_unknown()) {
                    if (exists) a2 = ev_max(alpha, score);
                    else b2 = ev_min(beta, score);
                }
                value = search(depth + 1, a2, b2, &childpv);
                if (timed_out_ || global_dead_) {
                    pop_to(mark);
                    return ExtendedValue::minus_inf();
                }
                if (level_finished_[level]) {
                    pop_to(mark);
                    return ExtendedValue::minus_inf();
                }
                if (backjump_waiting_ && backjump_target_ == level) {
                    backjump_waiting_ = false;
                    if (++rounds > 64) allow_backjump_ = false;
                    continue;  // re-propagate; the learnt clause is now unit here
                }
                have_value = true;
                break;
            }
            // the mark for the branch variable is consulted now, before the
            // pop clears it together with the rest of the child's trail
            bool copyable = !exists && oi == 0 && scp_on_ && have_value && value.is_finite() &&
                            scp_.prunes(branch, value.value());
            pop_to(mark);
            if (!have_value || value.is_unknown()) continue;
            bool improved = score.is_unknown() || (exists ? value > score : value < score);
            if (improved) {
                score = value;
                mypv = childpv;
                if (!exists) killer_[depth] = {v, killer_[depth][0]};
                if (depth == 0 && score.is_finite()) {
                    have_incumbent_ = true;
                    incumbent_ = score.value();
                    incumbent_pv_ = mypv;
                }
            }
            if (exists && score >= beta) break;
            if (!exists && score <= alpha) break;
            if (copyable && alpha < value && value < beta) {
                ++stats_.scp_prunes;
                break;
            }
        }

        if (score.is_unknown()) {
            auto fx = prefix_fixings();
            if (!exists && skipped_illegal &&
                mixed_system_feasible(p_.ex_rows, p_.lower, p_.upper, p_.kind, fx)) {
                score = ExtendedValue::plus_inf();
            } else {
                std::vector<Rational> epv;
                score = enumerate_subtree(&epv);
                if (score.is_finite()) mypv = epv;
            }
        }
        if (pv != nullptr && !mypv.empty()) *pv = mypv;
        return score;
    }

    // ----- members -----

    const BinarizedProgram& bp_;
    const QuantifiedProgram& p_;
    SolverConfig cfg_;
    SolveStats stats_;
    UncertaintyClass class_ = UncertaintyClass::Boxed;

    std::vector<int8_t> val_;
    std::vector<char> robust_;  // implication chain stays in one system
    std::vector<Rational> play_;
    std::vector<std::optional<Rational>> fixed_;
    std::vector<int> level_of_, reason_of_;
    std::vector<int> trail_;
    std::size_t prop_head_ = 0;

    std::vector<DbRow> db_;
    std::vector<std::vector<int>> occ_;  // var -> non-clause row ids
    std::vector<std::vector<int>> wl_;   // literal (2*var+value) -> watching clauses
    std::vector<int> pending_;
    std::vector<int> pending_row_scan_;
    struct WatchUndo {
        int clause;
        int slot;
        int old_pos;
        std::size_t trail_size;
    };
    std::vector<WatchUndo> watch_undo_;
    long learnt_clauses_ = 0;
    double act_inc_ = 1.0;

    std::vector<char> level_finished_;
    bool allow_backjump_ = true;
    bool backjump_waiting_ = false;
    int backjump_target_ = 0;
    bool global_dead_ = false;
    bool timed_out_ = false;
    bool have_incumbent_ = false;
    Rational incumbent_;
    std::vector<Rational> incumbent_pv_;

    ScenarioPool pool_;
    ScpState scp_;
    bool scp_on_ = false;
    std::vector<std::array<int, 2>> killer_;
    std::vector<double> hint_;
    int first_cont_ = 0;
    int dep_depth_limit_ = 0;
    long node_counter_ = 0;
    int root_restarts_ = 0;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

inline SolveResult solve(const QuantifiedProgram& program, const SolverConfig& cfg = {}) {
    BinarizedProgram bp = binarize(program);
    detail::Searcher s(bp, cfg);
    return s.run();
}

}  // namespace qsolve
