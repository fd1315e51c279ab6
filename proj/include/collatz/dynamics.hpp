#pragma once

#include "collatz/nat.hpp"

#include <utility>
#include <vector>

namespace collatz {

// Every potentially unbounded loop takes a step cap and reports CapExceeded
// instead of diverging; nothing here assumes the conjecture is true.
inline constexpr unsigned long kDefaultCap = 1000000;

enum class TraceMode { Stopping, Total };

struct StopOutcome {
    enum class Kind { Stopped, ReachedOne, CapExceeded, TrivialCycle };
    Kind kind = Kind::CapExceeded;
    unsigned long steps = 0;  // sigma / total sigma; the cap for CapExceeded

    static StopOutcome stopped(unsigned long s) { return {Kind::Stopped, s}; }
    static StopOutcome reached_one(unsigned long s) { return {Kind::ReachedOne, s}; }
    static StopOutcome cap_exceeded(unsigned long cap) { return {Kind::CapExceeded, cap}; }
    static StopOutcome trivial_cycle() { return {Kind::TrivialCycle, 0}; }

    bool stopped() const { return kind == Kind::Stopped; }
    bool reached_one() const { return kind == Kind::ReachedOne; }
    bool capped() const { return kind == Kind::CapExceeded; }
    bool finite() const { return stopped() || reached_one(); }
    bool operator==(const StopOutcome&) const = default;
};

// One row of the accumulated-2s ledger.
struct StepRecord {
    unsigned long index;          // 1-based step counter
    Nat value;                    // i-th odd-map iterate, always odd
    unsigned long twos;           // m_i: halvings bundled into this step
    unsigned long twos_accum;     // sum of m_1..m_i
    unsigned long twos_required;  // smallest y with 2^y > 3^i
    long deficit;                 // twos_required - twos_accum; <= 0 once 3^i < 2^(sum m)
};

struct SequenceTrace {
    Nat start;
    TraceMode mode = TraceMode::Stopping;
    std::vector<StepRecord> records;
    StopOutcome outcome;
};

// Raw map: 3n+1 on odd, n/2 on even. Rejects n = 0.
Nat collatz_step(const Nat& n);

// Accelerated odd map: (3n+1) / 2^m with m maximal. Rejects even input.
// Returns the next odd value and m.
std::pair<Nat, unsigned long> odd_step(const Nat& n);

// Smallest y with 2^y > 3^x, by exact integer comparison (never floating
// point): 3^x is no power of two, so y is simply its bit count. Rejects x = 0.
unsigned long required_twos(unsigned long x);

// required_twos(1..max_x) with one running power of 3.
std::vector<unsigned long> required_twos_table(unsigned long max_x);

// Full ledger trace. Stopping mode halts at the first value < n, Total mode
// at the first value = 1; CapExceeded if neither happens within cap steps.
// n = 1 is the odd map's fixed point: TrivialCycle / ReachedOne(0).
SequenceTrace trace(const Nat& n, TraceMode mode, unsigned long cap = kDefaultCap);

// Ledger-free fast paths over the same dynamics.
StopOutcome stopping_time(const Nat& n, unsigned long cap = kDefaultCap);
StopOutcome total_stopping_time(const Nat& n, unsigned long cap = kDefaultCap);

// First step i at which 3^i < 2^(m_1+...+m_i), the ledger criterion. Agrees
// with stopping_time everywhere tested; both are kept so tests can say so.
StopOutcome coefficient_stopping_time(const Nat& n, unsigned long cap = kDefaultCap);

// Independent brute-force oracle over the raw map; takes no shortcuts so it
// can vouch for the accelerated paths. Rejects n < 2.
struct OracleDrop {
    bool dropped = false;     // false: cap ran out before any iterate fell below n
    Nat value;                // first raw iterate < n (may be even)
    unsigned long raw_steps;  // raw C-steps consumed
};
OracleDrop oracle_first_drop(const Nat& n, unsigned long cap = kDefaultCap);

}  // namespace collatz
