#pragma once

#include "collatz/dynamics.hpp"

#include <map>
#include <vector>

namespace collatz {

// How often each power 2^m shows up as the divisor along one trace.
struct PowHistogram {
    Nat n;
    TraceMode mode = TraceMode::Stopping;
    std::map<unsigned long, unsigned long> counts;  // m -> occurrences
    unsigned long total_steps = 0;
};

// Display percentages of the 2^-m law, one decimal, halves away from zero.
struct GeometricReference {
    std::vector<double> percentages;  // index m-1
};

struct HistogramRow {
    unsigned long m;
    unsigned long count;
    double observed_pct;     // 100*count/total, one decimal, half even
    double theoretical_pct;  // 100*2^-m, one decimal, half away from zero
};

// Counts every observed m — no truncation at a display column. Throws
// CapExceededError when the trace does not finish within cap.
PowHistogram pow2_histogram(const Nat& n, TraceMode mode, unsigned long cap = kDefaultCap);

GeometricReference geometric_reference(unsigned long max_m);

// Side-by-side rows for m = 1..max observed m (gaps filled with zero counts).
std::vector<HistogramRow> histogram_report(const PowHistogram& h, const GeometricReference& ref);

}  // namespace collatz
