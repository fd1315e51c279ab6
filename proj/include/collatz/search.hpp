#pragma once

#include "collatz/dynamics.hpp"
#include "collatz/errors.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace collatz {

// Selection-rule version stamped into checkpoints; a different boundary or
// tie-break rule must bump this string.
inline constexpr const char* kSearchRuleId = "largest-factor4/1";

// Alternate boundaries tried when no primary candidate improves sigma.
inline constexpr int kMaxFallbackAttempts = 8;

struct SearchState {
    Nat start;
    unsigned long iteration = 0;
    Nat n;
    unsigned long sigma = 0;
    // (k, y) per accepted addend k*2^y; n = start + sum of them
    std::vector<std::pair<int, unsigned long>> history;
};

struct Candidate {
    int k = 0;  // 1|2|3
    Nat n;      // state.n + k*2^y
    StopOutcome sigma;
};

struct CandidateSet {
    unsigned long base_step = 0;  // s*
    unsigned long exponent = 0;   // y(s*)
    std::array<Candidate, 3> candidates;
};

struct SearchRow {
    unsigned long iteration;
    int k;                   // candidate index of the accepted addend
    unsigned long exponent;  // 2-adic valuation of the addend: y, or y+1 when k = 2
    unsigned long sigma;
    Nat n;

    std::size_t bits() const { return bit_length(n); }
    bool operator==(const SearchRow&) const = default;
};

struct SearchReport {
    Nat start;
    std::vector<SearchRow> rows;
    std::optional<std::string> exhausted;  // set when the search gave up early
};

struct Exhausted {
    std::string diagnostic;
};

struct SlopeFit {
    double slope;
    double intercept;
    double max_abs_residual;
};

// Largest s < sigma where the template modulus jumps by a factor of 4
// (required_twos(s+1) - required_twos(s) = 2); also returns y(s*).
// Exists for every sigma >= 2 since y jumps 2 -> 4 across s = 1.
std::pair<unsigned long, unsigned long> factor4_step(unsigned long sigma);
std::pair<unsigned long, unsigned long> factor4_step(const SequenceTrace& t);

// Boundaries tried after the primary one fails: next factor-4 step below s*,
// then next at/above sigma, alternating outward, max_attempts long.
std::vector<unsigned long> fallback_boundaries(unsigned long sigma, unsigned long s_star,
                                               int max_attempts = kMaxFallbackAttempts);

// The three congruent candidates n + k*2^y(s*) with their stopping times
// (evaluated concurrently when OpenMP is on).
CandidateSet propose_candidates(const SearchState& state, unsigned long s_star,
                                unsigned long cap = kDefaultCap);

// Index into cs.candidates: a capped candidate outranks every finite sigma;
// otherwise greatest sigma wins and ties go to the smallest k.
int select_candidate(const CandidateSet& cs);

// One accepted iteration, or Exhausted when the primary boundary and every
// fallback fail to improve sigma. A selected candidate whose sigma exceeds
// the cap throws CapExceededError: that is a potential counterexample and
// must not be silently stepped over.
std::variant<SearchState, Exhausted> search_step(const SearchState& state,
                                                 unsigned long cap = kDefaultCap,
                                                 int max_fallback_attempts = kMaxFallbackAttempts);

using RowSink = std::function<void(const SearchRow&)>;

SearchState initial_search_state(const Nat& start, unsigned long cap = kDefaultCap);

// Run from scratch; each accepted row is handed to sink as it happens.
SearchReport run_search(const Nat& start, unsigned long iterations,
                        unsigned long cap = kDefaultCap, const RowSink& sink = {});

// Continue a run: state/completed come from a checkpoint; sink sees only new
// rows; the report carries all of them.
SearchReport resume_search(SearchState state, std::vector<SearchRow> completed,
                           unsigned long iterations, unsigned long cap = kDefaultCap,
                           const RowSink& sink = {});

// Least-squares sigma against log2(n) over the report rows (>= 2 required).
SlopeFit fit_slope(const SearchReport& report);

// Bits needed for a target stopping time, by inverting the slope law.
unsigned long predict_magnitude(unsigned long target_sigma);

}  // namespace collatz
