#include "collatz/format.hpp"

#include <cstdio>
#include <stdexcept>

namespace collatz {

namespace {

struct DivParts {
    std::uint64_t q;
    std::uint64_t r;
};

DivParts tenths_div(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw std::invalid_argument("percentage with zero denominator");
    unsigned __int128 scaled = static_cast<unsigned __int128>(num) * 1000u;
    return {static_cast<std::uint64_t>(scaled / den), static_cast<std::uint64_t>(scaled % den)};
}

}  // namespace

std::uint64_t pct_tenths_half_even(std::uint64_t num, std::uint64_t den) {
    auto [q, r] = tenths_div(num, den);
    unsigned __int128 twice = static_cast<unsigned __int128>(r) * 2u;
    if (twice > den) return q + 1;
    if (twice < den) return q;
    return (q % 2 == 0) ? q : q + 1;
}

std::uint64_t pct_tenths_half_up(std::uint64_t num, std::uint64_t den) {
    auto [q, r] = tenths_div(num, den);
    unsigned __int128 twice = static_cast<unsigned __int128>(r) * 2u;
    return (twice >= den) ? q + 1 : q;
}

std::string fixed1(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace collatz
