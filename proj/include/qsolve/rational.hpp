#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qsolve {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline bool is_integral(const Rational& r) {
    return boost::multiprecision::denominator(r) == 1;
}

inline BigInt rat_floor(const Rational& r) {
    BigInt num = boost::multiprecision::numerator(r);
    BigInt den = boost::multiprecision::denominator(r);
    BigInt q = num / den;
    if (num < 0 && q * den != num) --q;
    return q;
}

inline BigInt rat_ceil(const Rational& r) { return -rat_floor(-r); }

inline long to_long(const BigInt& v) { return static_cast<long>(v); }

inline double to_double(const Rational& r) { return static_cast<double>(r); }

// Parses integers, plain decimals ("-1.25") and fractions ("3/4") exactly.
inline Rational rat_parse(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty number");
    std::size_t slash = s.find('/');
    if (slash != std::string::npos) {
        BigInt num(s.substr(0, slash));
        BigInt den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator: " + s);
        return Rational(num, den);
    }
    std::size_t dot = s.find('.');
    std::size_t exp = s.find_first_of("eE");
    std::string mantissa = exp == std::string::npos ? s : s.substr(0, exp);
    long e10 = exp == std::string::npos ? 0 : std::stol(s.substr(exp + 1));
    dot = mantissa.find('.');
    std::string digits = mantissa;
    long frac_digits = 0;
    if (dot != std::string::npos) {
        digits = mantissa.substr(0, dot) + mantissa.substr(dot + 1);
        frac_digits = static_cast<long>(mantissa.size() - dot - 1);
    }
    bool neg = !digits.empty() && digits[0] == '-';
    if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) digits.erase(0, 1);
    if (digits.empty()) throw std::invalid_argument("bad number: " + s);
    BigInt num = 0;
    for (char ch : digits) {
        if (ch < '0' || ch > '9') throw std::invalid_argument("bad number: " + s);
        num = num * 10 + (ch - '0');
    }
    if (neg) num = -num;
    BigInt den = 1;
    long shift = e10 - frac_digits;
    BigInt ten = 10;
    for (long i = 0; i < shift; ++i) num *= ten;
    for (long i = 0; i < -shift; ++i) den *= ten;
    return Rational(num, den);
}

// Shortest exact text form: integer, or num/den.
inline std::string rat_str(const Rational& r) {
    if (is_integral(r)) return boost::multiprecision::numerator(r).str();
    return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

// Fixed-point decimal with the given number of fractional digits, rounded to nearest.
inline std::string rat_fixed(const Rational& r, int digits) {
    BigInt scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    Rational scaled = r * scale;
    BigInt rounded = rat_floor(scaled + Rational(1, 2));
    bool neg = rounded < 0;
    BigInt mag = neg ? BigInt(-rounded) : rounded;
    std::string s = mag.str();
    if (static_cast<long>(s.size()) <= digits) s = std::string(digits + 1 - s.size(), '0') + s;
    std::string out = (neg ? "-" : "") + s.substr(0, s.size() - digits);
    if (digits > 0) out += "." + s.substr(s.size() - digits);
    return out;
}

}  // namespace qsolve
