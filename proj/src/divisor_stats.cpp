#include "collatz/divisor_stats.hpp"

#include "collatz/errors.hpp"
#include "collatz/format.hpp"

#include <stdexcept>

namespace collatz {

namespace {

double theoretical_pct(unsigned long m) {
    if (m >= 63) return 0.0;
    return tenths_value(pct_tenths_half_up(1, 1ull << m));
}

}  // namespace

PowHistogram pow2_histogram(const Nat& n, TraceMode mode, unsigned long cap) {
    if (n < 3 || !is_odd(n))
        throw std::invalid_argument("pow2_histogram: n must be odd, >= 3");
    SequenceTrace t = trace(n, mode, cap);
    if (t.outcome.capped())
        throw CapExceededError("pow2_histogram: trace did not finish within cap " +
                               std::to_string(cap));
    PowHistogram h{n, mode, {}, 0};
    for (const StepRecord& r : t.records) ++h.counts[r.twos];
    h.total_steps = static_cast<unsigned long>(t.records.size());
    return h;
}

GeometricReference geometric_reference(unsigned long max_m) {
    if (max_m == 0) throw std::invalid_argument("geometric_reference: max_m must be >= 1");
    GeometricReference ref;
    ref.percentages.reserve(max_m);
    for (unsigned long m = 1; m <= max_m; ++m) ref.percentages.push_back(theoretical_pct(m));
    return ref;
}

std::vector<HistogramRow> histogram_report(const PowHistogram& h, const GeometricReference& ref) {
    std::vector<HistogramRow> rows;
    if (h.total_steps == 0) return rows;
    unsigned long max_m = h.counts.rbegin()->first;
    rows.reserve(max_m);
    for (unsigned long m = 1; m <= max_m; ++m) {
        auto it = h.counts.find(m);
        unsigned long count = (it == h.counts.end()) ? 0 : it->second;
        double theo = (m <= ref.percentages.size()) ? ref.percentages[m - 1] : theoretical_pct(m);
        rows.push_back({m, count, tenths_value(pct_tenths_half_even(count, h.total_steps)), theo});
    }
    return rows;
}

}  // namespace collatz
