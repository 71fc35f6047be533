#pragma once

#include <qsolve/rational.hpp>

#include <cassert>
#include <string>

namespace qsolve {

// Game value: -inf < finite rationals < +inf, plus an "unknown" element for
// positions no legal play reaches. Min/max fold unknown away unless every
// operand is unknown.
class ExtendedValue {
public:
    enum class Tag { MinusInf, Finite, PlusInf, Unknown };

    ExtendedValue() : tag_(Tag::Unknown) {}
    explicit ExtendedValue(Rational v) : tag_(Tag::Finite), value_(std::move(v)) {}

    static ExtendedValue minus_inf() { return ExtendedValue(Tag::MinusInf); }
    static ExtendedValue plus_inf() { return ExtendedValue(Tag::PlusInf); }
    static ExtendedValue unknown() { return ExtendedValue(Tag::Unknown); }
    static ExtendedValue finite(Rational v) { return ExtendedValue(std::move(v)); }

    Tag tag() const { return tag_; }
    bool is_finite() const { return tag_ == Tag::Finite; }
    bool is_minus_inf() const { return tag_ == Tag::MinusInf; }
    bool is_plus_inf() const { return tag_ == Tag::PlusInf; }
    bool is_unknown() const { return tag_ == Tag::Unknown; }

    const Rational& value() const {
        assert(is_finite());
        return value_;
    }

    bool operator==(const ExtendedValue& o) const {
        if (tag_ != o.tag_) return false;
        return tag_ != Tag::Finite || value_ == o.value_;
    }
    bool operator!=(const ExtendedValue& o) const { return !(*this == o); }

    // Total order over the known values; unknown is not comparable.
    bool operator<(const ExtendedValue& o) const {
        assert(!is_unknown() && !o.is_unknown());
        if (tag_ == o.tag_) return tag_ == Tag::Finite && value_ < o.value_;
        if (tag_ == Tag::MinusInf) return true;
        if (o.tag_ == Tag::MinusInf) return false;
        return o.tag_ == Tag::PlusInf;
    }
    bool operator>(const ExtendedValue& o) const { return o < *this; }
    bool operator<=(const ExtendedValue& o) const { return !(o < *this); }
    bool operator>=(const ExtendedValue& o) const { return !(*this < o); }

    std::string str() const {
        switch (tag_) {
            case Tag::MinusInf: return "-inf";
            case Tag::PlusInf: return "+inf";
            case Tag::Unknown: return "+/-inf";
            default: return rat_str(value_);
        }
    }

private:
    explicit ExtendedValue(Tag t) : tag_(t) {}

    Tag tag_;
    Rational value_;
};

inline ExtendedValue ev_max(const ExtendedValue& a, const ExtendedValue& b) {
    if (a.is_unknown()) return b;
    if (b.is_unknown()) return a;
    return a < b ? b : a;
}

inline ExtendedValue ev_min(const ExtendedValue& a, const ExtendedValue& b) {
    if (a.is_unknown()) return b;
    if (b.is_unknown()) return a;
    return b < a ? b : a;
}

}  // namespace qsolve
