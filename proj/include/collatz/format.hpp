#pragma once

#include <cstdint>
#include <string>

namespace collatz {

// Percentages are kept as exact integer counts for as long as possible and
// rendered to one decimal only at the edge. Two rounding conventions coexist:
// observed rates use banker's rounding (81.25 -> 81.2), the geometric 2^-m
// reference rounds halves away from zero (6.25 -> 6.3).

// round(1000 * num / den) in tenths of a percent, half to even.
std::uint64_t pct_tenths_half_even(std::uint64_t num, std::uint64_t den);

// Same, half away from zero.
std::uint64_t pct_tenths_half_up(std::uint64_t num, std::uint64_t den);

inline double tenths_value(std::uint64_t tenths) { return static_cast<double>(tenths) / 10.0; }

// Fixed-point renderings (snprintf-backed, deterministic for on-grid values).
std::string fixed1(double v);
std::string fixed6(double v);

}  // namespace collatz
