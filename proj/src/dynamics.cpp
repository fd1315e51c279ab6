#include "collatz/dynamics.hpp"

#include <stdexcept>

namespace collatz {

namespace {

void require_odd(const Nat& n, const char* who) {
    if (n < 1) throw std::invalid_argument(std::string(who) + ": value must be >= 1");
    if (!is_odd(n)) throw std::invalid_argument(std::string(who) + ": value must be odd");
}

// In-place odd step on v using t as scratch: v <- (3v+1) >> v2(3v+1).
inline unsigned long odd_step_inplace(mpz_class& v, mpz_class& t) {
    mpz_mul_ui(t.get_mpz_t(), v.get_mpz_t(), 3);
    mpz_add_ui(t.get_mpz_t(), t.get_mpz_t(), 1);
    unsigned long m = static_cast<unsigned long>(mpz_scan1(t.get_mpz_t(), 0));
    mpz_tdiv_q_2exp(v.get_mpz_t(), t.get_mpz_t(), m);
    return m;
}

}  // namespace

Nat collatz_step(const Nat& n) {
    if (n < 1) throw std::invalid_argument("collatz_step: value must be >= 1");
    if (is_odd(n)) return 3 * n + 1;
    return n >> 1;
}

std::pair<Nat, unsigned long> odd_step(const Nat& n) {
    require_odd(n, "odd_step");
    Nat t = 3 * n + 1;
    unsigned long m = v2(t);
    return {t >> m, m};
}

unsigned long required_twos(unsigned long x) {
    if (x == 0) throw std::invalid_argument("required_twos: x must be >= 1");
    Nat p;
    mpz_ui_pow_ui(p.get_mpz_t(), 3, x);
    return static_cast<unsigned long>(bit_length(p));
}

std::vector<unsigned long> required_twos_table(unsigned long max_x) {
    std::vector<unsigned long> ys;
    ys.reserve(max_x);
    Nat p = 1;
    for (unsigned long x = 1; x <= max_x; ++x) {
        p *= 3;
        ys.push_back(static_cast<unsigned long>(bit_length(p)));
    }
    return ys;
}

SequenceTrace trace(const Nat& n, TraceMode mode, unsigned long cap) {
    require_odd(n, "trace");
    if (cap < 1) throw std::invalid_argument("trace: cap must be >= 1");
    SequenceTrace tr{n, mode, {}, StopOutcome::cap_exceeded(cap)};
    if (n == 1) {
        tr.outcome = (mode == TraceMode::Stopping) ? StopOutcome::trivial_cycle()
                                                   : StopOutcome::reached_one(0);
        return tr;
    }
    Nat v = n, scratch;
    Nat p3 = 1;  // 3^i, drives the required-2s column
    unsigned long accum = 0;
    for (unsigned long i = 1; i <= cap; ++i) {
        unsigned long m = odd_step_inplace(v, scratch);
        accum += m;
        p3 *= 3;
        unsigned long req = static_cast<unsigned long>(bit_length(p3));
        tr.records.push_back(
            {i, v, m, accum, req, static_cast<long>(req) - static_cast<long>(accum)});
        if (mode == TraceMode::Stopping && v < n) {
            tr.outcome = StopOutcome::stopped(i);
            return tr;
        }
        if (mode == TraceMode::Total && v == 1) {
            tr.outcome = StopOutcome::reached_one(i);
            return tr;
        }
    }
    return tr;
}

StopOutcome stopping_time(const Nat& n, unsigned long cap) {
    require_odd(n, "stopping_time");
    if (n == 1) return StopOutcome::trivial_cycle();
    Nat v = n, scratch;
    for (unsigned long i = 1; i <= cap; ++i) {
        odd_step_inplace(v, scratch);
        if (v < n) return StopOutcome::stopped(i);
    }
    return StopOutcome::cap_exceeded(cap);
}

StopOutcome total_stopping_time(const Nat& n, unsigned long cap) {
    require_odd(n, "total_stopping_time");
    if (n == 1) return StopOutcome::reached_one(0);
    Nat v = n, scratch;
    for (unsigned long i = 1; i <= cap; ++i) {
        odd_step_inplace(v, scratch);
        if (v == 1) return StopOutcome::reached_one(i);
    }
    return StopOutcome::cap_exceeded(cap);
}

StopOutcome coefficient_stopping_time(const Nat& n, unsigned long cap) {
    require_odd(n, "coefficient_stopping_time");
    if (n == 1) return StopOutcome::trivial_cycle();
    Nat v = n, scratch;
    Nat p3 = 1;
    unsigned long accum = 0;
    for (unsigned long i = 1; i <= cap; ++i) {
        accum += odd_step_inplace(v, scratch);
        p3 *= 3;
        // 3^i < 2^accum  <=>  bit_length(3^i) <= accum
        if (bit_length(p3) <= accum) return StopOutcome::stopped(i);
    }
    return StopOutcome::cap_exceeded(cap);
}

OracleDrop oracle_first_drop(const Nat& n, unsigned long cap) {
    if (n < 2) throw std::invalid_argument("oracle_first_drop: value must be >= 2");
    Nat v = n;
    for (unsigned long i = 1; i <= cap; ++i) {
        if (is_odd(v)) {
            v = 3 * v + 1;
        } else {
            v >>= 1;
        }
        if (v < n) return {true, v, i};
    }
    return {false, Nat(0), cap};
}

}  // namespace collatz
