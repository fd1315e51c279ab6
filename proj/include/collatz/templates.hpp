#pragma once

#include "collatz/dynamics.hpp"
#include "collatz/errors.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace collatz {

// Odd residues enumerated per template before build_template refuses.
// 2^21 covers steps up to x = 13.
inline constexpr std::uint64_t kDefaultBudget = 1ull << 21;

enum class Classification { Reached, Unreached };

// Whether each odd residue class mod 2^y has reached its stopping time by
// step x. Periodic by the lifting theorems, so one period describes the
// whole number line.
struct Template {
    unsigned long step = 0;              // x
    unsigned long modulus_exponent = 0;  // y = required_twos(x)
    std::uint64_t unreached_count = 0;
    // bit j = residue 2j+1, least-significant bit first; set = Unreached
    std::vector<std::uint8_t> bitmap;

    std::uint64_t total_odd() const { return 1ull << (modulus_exponent - 1); }
    bool unreached(std::uint64_t odd_residue) const;
    Classification classify(std::uint64_t odd_residue) const;

    bool operator==(const Template&) const = default;
};

// One row of the conversion-rate table.
struct RateRow {
    unsigned long step;
    std::uint64_t unreached;
    std::uint64_t total_odd;        // 2^(y-1)
    double density_pct;             // unreached/total_odd, one decimal, half even
    std::uint64_t remaining;        // classes still open after step x-1, lifted to mod 2^y
    double non_conversion_pct;      // unreached/remaining, one decimal, half even
};

struct RatePoint {
    unsigned long step;
    double pct;
};
struct RateSeries {
    std::vector<RatePoint> density;         // figure-1 data
    std::vector<RatePoint> non_conversion;  // figure-2 data
};

enum class Expectation { Equal, Greater };

// One lifting check: does sigma(n0 + k*2^y) relate to sigma(n0) as the
// lifting theorems say?
struct CheckResult {
    Nat n0;
    Nat k;
    unsigned long x = 0;
    unsigned long y = 0;
    Expectation expected = Expectation::Equal;
    StopOutcome sigma_n0;
    StopOutcome sigma_lifted;
    bool pass = false;
};

// Classify a single odd residue r mod 2^(required_twos(x)). Residue 1 is
// judged through its representative 1 + 2^y (sigma(1) is undefined, every
// larger class member behaves alike). A capped representative counts as
// Unreached: it certainly has not stopped within x < cap steps.
Classification classify_residue(std::uint64_t r, unsigned long x, unsigned long cap = kDefaultCap);

// Classify every odd residue mod 2^y(x). The parallel version partitions the
// bitmap by whole bytes, so writers never share a byte; the serial version is
// the plain reference loop kept for testing and benchmarking against.
Template build_template(unsigned long x, std::uint64_t budget = kDefaultBudget,
                        unsigned long cap = kDefaultCap);
Template build_template_serial(unsigned long x, std::uint64_t budget = kDefaultBudget,
                               unsigned long cap = kDefaultCap);

// "+ - + - + + - -" marks for the first span residues of the step-x row:
// all odds for x = 1, the 3 (mod 4) progression for x >= 2. Residues wrap
// around the period, which is what makes the string worth printing.
std::string pattern_string(unsigned long x, std::uint64_t span, unsigned long cap = kDefaultCap);

// Rate rows from already-built templates for steps 1..k (consecutive, in order).
std::vector<RateRow> conversion_rows(const std::vector<Template>& templates);

// Convenience: build templates 1..max_x and tabulate.
std::vector<RateRow> conversion_table(unsigned long max_x, std::uint64_t budget = kDefaultBudget,
                                      unsigned long cap = kDefaultCap);

RateSeries figure_series(const std::vector<RateRow>& table);

// Probe the lifting theorems for one (n0, k, x). Precondition violations
// (sigma(n0) not matching the claimed expectation) throw invalid_argument;
// a theorem violation comes back as pass = false.
CheckResult congruence_check(const Nat& n0, const Nat& k, unsigned long x, Expectation expected,
                             unsigned long cap = kDefaultCap);

// Binary cache: "CZTPL1\n", x u32 LE, y u32 LE, unreached u64 LE, bitmap.
void write_template_cache(const std::string& path, const Template& t);
Template read_template_cache(const std::string& path);

}  // namespace collatz
