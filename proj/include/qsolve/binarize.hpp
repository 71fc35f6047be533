#pragma once

#include <qsolve/model.hpp>

#include <cassert>
#include <vector>

namespace qsolve {

// One original variable's slice of the bit-level program. Continuous
// variables pass through with bit_count == 0 and a single column.
struct BitGroup {
    int orig_var;
    int first_col;   // first column in the bit-level program
    int bit_count;   // 0 for continuous pass-through (one column, identity)
    Rational shift;  // original lower bound; decoded value = shift + sum(2^i * bit_i)
};

struct BinarizedProgram {
    QuantifiedProgram original;  // sense-normalized source program
    QuantifiedProgram prog;      // bit-level program (all integers binary)
    std::vector<BitGroup> groups;
    std::vector<int> col_to_orig;
    Rational objective_offset;  // original objective = bit objective + offset

    int cols() const { return prog.n; }

    std::vector<Rational> decode(const std::vector<Rational>& bits) const {
        std::vector<Rational> x(original.n);
        for (const auto& g : groups) {
            if (g.bit_count == 0) {
                x[g.orig_var] = bits[g.first_col];
            } else {
                Rational v = g.shift;
                Rational w = 1;
                for (int b = 0; b < g.bit_count; ++b, w *= 2) v += w * bits[g.first_col + b];
                x[g.orig_var] = v;
            }
        }
        return x;
    }

    std::vector<Rational> encode(const std::vector<Rational>& x) const {
        std::vector<Rational> bits(prog.n);
        for (const auto& g : groups) {
            if (g.bit_count == 0) {
                bits[g.first_col] = x[g.orig_var];
            } else {
                BigInt v = rat_floor(x[g.orig_var] - g.shift);
                assert(v >= 0);
                for (int b = 0; b < g.bit_count; ++b) {
                    bits[g.first_col + b] = Rational(v & 1);
                    v >>= 1;
                }
                assert(v == 0);
            }
        }
        return bits;
    }
};

inline BinarizedProgram binarize(const QuantifiedProgram& input) {
    BinarizedProgram out;
    out.original = normalize_sense(input);
    const QuantifiedProgram& src = out.original;
    QuantifiedProgram& bp = out.prog;
    out.objective_offset = 0;

    out.groups.reserve(src.n);
    for (int j = 0; j < src.n; ++j) {
        BitGroup g{j, bp.n, 0, src.lower[j]};
        if (src.kind[j] == VarKind::Continuous) {
            g.bit_count = 0;
            bp.names.push_back(src.names[j]);
            bp.objective.push_back(src.objective[j]);
            bp.quant.push_back(src.quant[j]);
            bp.kind.push_back(VarKind::Continuous);
            bp.lower.push_back(src.lower[j]);
            bp.upper.push_back(src.upper[j]);
            out.col_to_orig.push_back(j);
            bp.n += 1;
        } else {
            BigInt span = rat_floor(src.upper[j]) - rat_floor(src.lower[j]);
            int bits = 0;
            for (BigInt cap = 1; cap - 1 < span; cap <<= 1) ++bits;
            if (bits == 0) bits = 1;  // singleton domain still gets one (forced) bit
            g.bit_count = bits;
            Rational w = 1;
            for (int b = 0; b < bits; ++b, w *= 2) {
                bp.names.push_back(src.names[j] + (bits == 1 ? "" : "#" + std::to_string(b)));
                bp.objective.push_back(src.objective[j] * w);
                bp.quant.push_back(src.quant[j]);
                bp.kind.push_back(VarKind::Integer);
                bp.lower.push_back(0);
                bp.upper.push_back(1);
                out.col_to_orig.push_back(j);
                bp.n += 1;
            }
            out.objective_offset += src.objective[j] * src.lower[j];
            if (span == 0) bp.upper[g.first_col] = 0;  // singleton domain pins its bit
        }
        out.groups.push_back(g);
    }

    auto rewrite = [&](const Row& row) {
        Row r;
        r.rhs = row.rhs;
        for (const auto& t : row.terms) {
            const BitGroup& g = out.groups[t.var];
            if (g.bit_count == 0) {
                r.terms.push_back({g.first_col, t.coef});
            } else {
                Rational w = 1;
                for (int b = 0; b < g.bit_count; ++b, w *= 2)
                    r.terms.push_back({g.first_col + b, t.coef * w});
                r.rhs -= t.coef * g.shift;
            }
        }
        return r;
    };
    for (const auto& row : src.ex_rows) bp.ex_rows.push_back(rewrite(row));
    for (const auto& row : src.uni_rows) bp.uni_rows.push_back(rewrite(row));

    // Domain rows for non power-of-two spans, kept in both systems so that
    // overflow bit patterns are illegal for either player.
    for (const auto& g : out.groups) {
        if (g.bit_count == 0) continue;
        BigInt span = rat_floor(src.upper[g.orig_var]) - rat_floor(src.lower[g.orig_var]);
        if (span == 0) continue;  // handled above
        if ((BigInt(1) << g.bit_count) - 1 == span) continue;
        Row r;
        Rational w = 1;
        for (int b = 0; b < g.bit_count; ++b, w *= 2) r.terms.push_back({g.first_col + b, w});
        r.rhs = Rational(span);
        bp.ex_rows.push_back(r);
        bp.uni_rows.push_back(r);
    }

    bp.sense = Sense::Maximize;
    bp.name = src.name;
    return out;
}

}  // namespace qsolve
