#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace collatz {

// Arbitrary-precision unsigned integer. GMP does the heavy lifting; the
// helpers below wrap the handful of mpz_* calls the rest of the code needs.
using Nat = mpz_class;

// Number of bits in n; 0 for n = 0. Exact (mpz_sizeinbase is exact in base 2).
inline std::size_t bit_length(const Nat& n) {
    if (n == 0) return 0;
    return mpz_sizeinbase(n.get_mpz_t(), 2);
}

// 2-adic valuation: largest m with 2^m dividing n. n must be nonzero.
inline unsigned long v2(const Nat& n) {
    return static_cast<unsigned long>(mpz_scan1(n.get_mpz_t(), 0));
}

inline bool is_odd(const Nat& n) { return mpz_odd_p(n.get_mpz_t()) != 0; }

inline Nat pow2(unsigned long e) {
    Nat r;
    mpz_setbit(r.get_mpz_t(), e);
    return r;
}

// log2(n) from the top bits; good to ~15 significant digits.
inline double log2_nat(const Nat& n) {
    if (n <= 0) throw std::invalid_argument("log2_nat: value must be positive");
    signed long exp;
    double mant = mpz_get_d_2exp(&exp, n.get_mpz_t());
    return std::log2(mant) + static_cast<double>(exp);
}

// Strict decimal parse (what the CLI accepts for integer arguments).
inline Nat parse_nat(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("not a decimal unsigned integer: '" + s + "'");
    return Nat(s, 10);
}

inline std::string to_hex(const Nat& n) { return n.get_str(16); }

inline Nat from_hex(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789abcdef") != std::string::npos)
        throw std::invalid_argument("not lowercase hex: '" + s + "'");
    return Nat(s, 16);
}

}  // namespace collatz
