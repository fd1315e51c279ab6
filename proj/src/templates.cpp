#include "collatz/templates.hpp"

#include "collatz/format.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace collatz {

namespace {

double pct_of(std::uint64_t num, std::uint64_t den) {
    return tenths_value(pct_tenths_half_even(num, den));
}

// Residue sanity shared by classify_residue and Template lookups.
void require_residue(std::uint64_t r, unsigned long y) {
    if ((r & 1u) == 0) throw std::invalid_argument("residue must be odd");
    if (y >= 64 || r >= (1ull << y))
        throw std::invalid_argument("residue outside one period of the template");
}

// sigma(representative) <= x? Residue 1 stands in for 1 + 2^y.
bool unreached_one(std::uint64_t r, unsigned long x, unsigned long y, unsigned long cap) {
    Nat rep = (r == 1) ? Nat(pow2(y) + 1) : Nat(static_cast<unsigned long>(r));
    StopOutcome s = stopping_time(rep, cap);
    return !(s.stopped() && s.steps <= x);
}

struct TemplateShape {
    unsigned long y;
    std::uint64_t n_residues;
    std::size_t n_bytes;
};

TemplateShape template_shape(unsigned long x, std::uint64_t budget) {
    unsigned long y = required_twos(x);
    if (y - 1 >= 63) throw BudgetExceededError("template step " + std::to_string(x) + " is far beyond any residue budget");
    std::uint64_t n_residues = 1ull << (y - 1);
    if (n_residues > budget)
        throw BudgetExceededError("template step " + std::to_string(x) + " needs " +
                                  std::to_string(n_residues) + " residues, budget is " +
                                  std::to_string(budget));
    return {y, n_residues, static_cast<std::size_t>((n_residues + 7) / 8)};
}

// Classifications for residues 2*(8b)+1 .. 2*(8b+7)+1 packed into one byte.
std::uint8_t classify_byte(std::uint64_t byte_index, std::uint64_t n_residues, unsigned long x,
                           unsigned long y, unsigned long cap) {
    std::uint8_t out = 0;
    std::uint64_t j0 = byte_index * 8;
    for (int o = 0; o < 8; ++o) {
        std::uint64_t j = j0 + static_cast<std::uint64_t>(o);
        if (j >= n_residues) break;
        if (unreached_one(2 * j + 1, x, y, cap)) out |= static_cast<std::uint8_t>(1u << o);
    }
    return out;
}

}  // namespace

bool Template::unreached(std::uint64_t odd_residue) const {
    require_residue(odd_residue, modulus_exponent);
    std::uint64_t j = (odd_residue - 1) / 2;
    return (bitmap[j >> 3] >> (j & 7)) & 1u;
}

Classification Template::classify(std::uint64_t odd_residue) const {
    return unreached(odd_residue) ? Classification::Unreached : Classification::Reached;
}

Classification classify_residue(std::uint64_t r, unsigned long x, unsigned long cap) {
    if (x == 0) throw std::invalid_argument("classify_residue: x must be >= 1");
    unsigned long y = required_twos(x);
    require_residue(r, y);
    return unreached_one(r, x, y, cap) ? Classification::Unreached : Classification::Reached;
}

Template build_template(unsigned long x, std::uint64_t budget, unsigned long cap) {
    if (x == 0) throw std::invalid_argument("build_template: x must be >= 1");
    auto [y, n_residues, n_bytes] = template_shape(x, budget);
    Template t{x, y, 0, std::vector<std::uint8_t>(n_bytes, 0)};
    std::uint64_t count = 0;
    // Whole bytes per worker: no two threads touch the same bitmap byte.
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : count)
    for (long long b = 0; b < static_cast<long long>(n_bytes); ++b) {
        std::uint8_t byte =
            classify_byte(static_cast<std::uint64_t>(b), n_residues, x, y, cap);
        t.bitmap[static_cast<std::size_t>(b)] = byte;
        count += static_cast<std::uint64_t>(std::popcount(byte));
    }
    t.unreached_count = count;
    return t;
}

Template build_template_serial(unsigned long x, std::uint64_t budget, unsigned long cap) {
    if (x == 0) throw std::invalid_argument("build_template_serial: x must be >= 1");
    auto [y, n_residues, n_bytes] = template_shape(x, budget);
    Template t{x, y, 0, std::vector<std::uint8_t>(n_bytes, 0)};
    std::uint64_t count = 0;
    for (std::size_t b = 0; b < n_bytes; ++b) {
        std::uint8_t byte = classify_byte(b, n_residues, x, y, cap);
        t.bitmap[b] = byte;
        count += static_cast<std::uint64_t>(std::popcount(byte));
    }
    t.unreached_count = count;
    return t;
}

std::string pattern_string(unsigned long x, std::uint64_t span, unsigned long cap) {
    if (x == 0) throw std::invalid_argument("pattern_string: x must be >= 1");
    unsigned long y = required_twos(x);
    std::uint64_t period = 1ull << y;
    std::string out;
    for (std::uint64_t i = 0; i < span; ++i) {
        // Table rows: every odd for step 1, the 3 (mod 4) column for later steps.
        std::uint64_t n = (x == 1) ? 2 * i + 1 : 4 * i + 3;
        std::uint64_t r = n % period;
        if (!out.empty()) out += ' ';
        out += (classify_residue(r, x, cap) == Classification::Reached) ? '+' : '-';
    }
    return out;
}

std::vector<RateRow> conversion_rows(const std::vector<Template>& templates) {
    if (templates.empty()) throw std::invalid_argument("conversion_rows: no templates");
    std::vector<RateRow> rows;
    rows.reserve(templates.size());
    for (std::size_t i = 0; i < templates.size(); ++i) {
        const Template& t = templates[i];
        if (t.step != i + 1)
            throw std::invalid_argument("conversion_rows: templates must cover steps 1..k in order");
        std::uint64_t total = t.total_odd();
        std::uint64_t remaining;
        if (i == 0) {
            remaining = total;  // everything is still open before the first step
        } else {
            const Template& prev = templates[i - 1];
            remaining = prev.unreached_count
                        << (t.modulus_exponent - prev.modulus_exponent);
        }
        rows.push_back({t.step, t.unreached_count, total, pct_of(t.unreached_count, total),
                        remaining, pct_of(t.unreached_count, remaining)});
    }
    return rows;
}

std::vector<RateRow> conversion_table(unsigned long max_x, std::uint64_t budget,
                                      unsigned long cap) {
    if (max_x == 0) throw std::invalid_argument("conversion_table: max_x must be >= 1");
    std::vector<Template> ts;
    ts.reserve(max_x);
    for (unsigned long x = 1; x <= max_x; ++x) ts.push_back(build_template(x, budget, cap));
    return conversion_rows(ts);
}

RateSeries figure_series(const std::vector<RateRow>& table) {
    if (table.empty()) throw std::invalid_argument("figure_series: empty table");
    RateSeries s;
    for (const RateRow& r : table) {
        s.density.push_back({r.step, r.density_pct});
        s.non_conversion.push_back({r.step, r.non_conversion_pct});
    }
    return s;
}

CheckResult congruence_check(const Nat& n0, const Nat& k, unsigned long x, Expectation expected,
                             unsigned long cap) {
    if (n0 < 3 || !is_odd(n0)) throw std::invalid_argument("congruence_check: n0 must be odd, >= 3");
    if (k < 1) throw std::invalid_argument("congruence_check: k must be >= 1");
    if (x == 0) throw std::invalid_argument("congruence_check: x must be >= 1");
    if (cap <= x) throw std::invalid_argument("congruence_check: cap must exceed x");
    CheckResult res;
    res.n0 = n0;
    res.k = k;
    res.x = x;
    res.y = required_twos(x);
    res.expected = expected;
    res.sigma_n0 = stopping_time(n0, cap);
    if (expected == Expectation::Equal) {
        if (!(res.sigma_n0.stopped() && res.sigma_n0.steps == x))
            throw std::invalid_argument("congruence_check: Equal requires sigma(n0) = x");
    } else {
        bool beyond = (res.sigma_n0.stopped() && res.sigma_n0.steps > x) || res.sigma_n0.capped();
        if (!beyond)
            throw std::invalid_argument("congruence_check: Greater requires sigma(n0) > x");
    }
    Nat lifted = n0 + k * pow2(res.y);
    res.sigma_lifted = stopping_time(lifted, cap);
    if (expected == Expectation::Equal) {
        res.pass = res.sigma_lifted.stopped() && res.sigma_lifted.steps == x;
    } else {
        res.pass = (res.sigma_lifted.stopped() && res.sigma_lifted.steps > x) ||
                   res.sigma_lifted.capped();
    }
    return res;
}

// ----- binary cache ---------------------------------------------------------

namespace {

constexpr char kMagic[] = "CZTPL1\n";  // 7 bytes on disk
constexpr std::size_t kMagicLen = 7;
constexpr std::size_t kHeaderLen = kMagicLen + 4 + 4 + 8;

void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s += static_cast<char>((v >> (8 * i)) & 0xff);
}
void put_u64(std::string& s, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) s += static_cast<char>((v >> (8 * i)) & 0xff);
}
std::uint32_t get_u32(const std::string& s, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(s[at + i]);
    return v;
}
std::uint64_t get_u64(const std::string& s, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(s[at + i]);
    return v;
}

}  // namespace

void write_template_cache(const std::string& path, const Template& t) {
    std::string blob;
    blob.reserve(kHeaderLen + t.bitmap.size());
    blob.append(kMagic, kMagicLen);
    put_u32(blob, static_cast<std::uint32_t>(t.step));
    put_u32(blob, static_cast<std::uint32_t>(t.modulus_exponent));
    put_u64(blob, t.unreached_count);
    blob.append(reinterpret_cast<const char*>(t.bitmap.data()), t.bitmap.size());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    f.flush();
    if (!f) throw IoError("short write: " + path);
}

Template read_template_cache(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (blob.size() < kHeaderLen) throw FormatError("template cache truncated: " + path);
    if (blob.compare(0, kMagicLen, kMagic, kMagicLen) != 0)
        throw FormatError("template cache bad magic: " + path);
    Template t;
    t.step = get_u32(blob, kMagicLen);
    t.modulus_exponent = get_u32(blob, kMagicLen + 4);
    t.unreached_count = get_u64(blob, kMagicLen + 8);
    if (t.step == 0 || t.modulus_exponent == 0 || t.modulus_exponent > 62)
        throw FormatError("template cache implausible header: " + path);
    if (t.modulus_exponent != required_twos(t.step))
        throw FormatError("template cache modulus does not match its step: " + path);
    std::size_t n_bytes = static_cast<std::size_t>(((1ull << (t.modulus_exponent - 1)) + 7) / 8);
    if (blob.size() != kHeaderLen + n_bytes)
        throw FormatError("template cache length mismatch: " + path);
    t.bitmap.assign(blob.begin() + static_cast<std::ptrdiff_t>(kHeaderLen), blob.end());
    std::uint64_t pop = 0;
    for (std::uint8_t b : t.bitmap) pop += static_cast<std::uint64_t>(std::popcount(b));
    if (pop != t.unreached_count)
        throw FormatError("template cache bitmap disagrees with its count: " + path);
    return t;
}

}  // namespace collatz
