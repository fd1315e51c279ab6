#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "collatz/templates.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <unistd.h>

using namespace collatz;

namespace {

std::set<std::uint64_t> unreached_set(const Template& t) {
    std::set<std::uint64_t> s;
    for (std::uint64_t j = 0; j < t.total_odd(); ++j)
        if (t.unreached(2 * j + 1)) s.insert(2 * j + 1);
    return s;
}

std::string temp_file(const char* tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("collatz-templates-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return (dir / tag).string();
}

}  // namespace

TEST_CASE("classify_residue anchors") {
    CHECK(classify_residue(3, 2) == Classification::Reached);
    CHECK(classify_residue(7, 2) == Classification::Unreached);
    CHECK(classify_residue(11, 3) == Classification::Reached);
    // residue 1 is judged through 1 + 2^y
    CHECK(classify_residue(1, 1) == Classification::Reached);   // sigma(5) = 1
    CHECK(classify_residue(1, 2) == Classification::Reached);   // sigma(17) = 1
    CHECK_THROWS_AS(classify_residue(4, 2), std::invalid_argument);
    CHECK_THROWS_AS(classify_residue(17, 2), std::invalid_argument);  // outside mod 16
    CHECK_THROWS_AS(classify_residue(3, 0), std::invalid_argument);
}

TEST_CASE("small templates, exact sets") {
    Template t1 = build_template(1);
    CHECK(t1.modulus_exponent == 2);
    CHECK(t1.unreached_count == 1);
    CHECK(unreached_set(t1) == std::set<std::uint64_t>{3});

    Template t2 = build_template(2);
    CHECK(t2.modulus_exponent == 4);
    CHECK(t2.unreached_count == 3);
    CHECK(unreached_set(t2) == std::set<std::uint64_t>{7, 11, 15});

    Template t3 = build_template(3);
    CHECK(t3.modulus_exponent == 5);
    CHECK(t3.unreached_count == 4);
    CHECK(unreached_set(t3) == std::set<std::uint64_t>{7, 15, 27, 31});

    CHECK(build_template(4).unreached_count == 13);
}

TEST_CASE("template counts, steps 1..10") {
    // exact enumeration counts; independent recount in the acceptance suite
    const std::uint64_t counts[] = {1, 3, 4, 13, 19, 64, 226, 367, 1295, 2114};
    const std::uint64_t totals[] = {2, 8, 16, 64, 128, 512, 2048, 4096, 16384, 32768};
    for (unsigned long x = 1; x <= 10; ++x) {
        Template t = build_template(x);
        CHECK(t.unreached_count == counts[x - 1]);
        CHECK(t.total_odd() == totals[x - 1]);
    }
}

TEST_CASE("parallel build equals the serial reference") {
    for (unsigned long x : {1ul, 2ul, 5ul, 8ul, 10ul}) {
        Template par = build_template(x);
        Template ser = build_template_serial(x);
        CHECK(par == ser);
    }
}

TEST_CASE("budget is enforced") {
    CHECK_THROWS_AS(build_template(14), BudgetExceededError);        // needs 2^22 residues
    CHECK_THROWS_AS(build_template(10, 1000), BudgetExceededError);  // needs 2^14
    CHECK_NOTHROW(build_template(13));                               // 2^20 fits the default
}

TEST_CASE("pattern strings") {
    CHECK(pattern_string(1, 8) == "+ - + - + - + -");
    CHECK(pattern_string(2, 4) == "+ - - -");
    CHECK(pattern_string(2, 8) == "+ - - - + - - -");  // wraps one period
    CHECK(pattern_string(3, 8) == "+ - + - + + - -");
    CHECK(pattern_string(1, 1) == "+");
    CHECK(pattern_string(1, 0).empty());
}

TEST_CASE("conversion table, steps 1..10") {
    std::vector<RateRow> rows = conversion_table(10);
    REQUIRE(rows.size() == 10);

    CHECK(rows[0].unreached == 1);
    CHECK(rows[0].total_odd == 2);
    CHECK(rows[0].density_pct == doctest::Approx(50.0));
    CHECK(rows[0].remaining == 2);
    CHECK(rows[0].non_conversion_pct == doctest::Approx(50.0));

    CHECK(rows[3].unreached == 13);
    CHECK(rows[3].total_odd == 64);
    CHECK(rows[3].density_pct == doctest::Approx(20.3));
    CHECK(rows[3].remaining == 16);
    CHECK(rows[3].non_conversion_pct == doctest::Approx(81.2));  // 81.25 banker-rounds down

    CHECK(rows[6].unreached == 226);
    CHECK(rows[6].total_odd == 2048);
    CHECK(rows[6].density_pct == doctest::Approx(11.0));
    CHECK(rows[6].remaining == 256);
    CHECK(rows[6].non_conversion_pct == doctest::Approx(88.3));

    // remaining(x) = unreached(x-1) * 2^(y(x) - y(x-1)), from the enumeration
    const std::uint64_t remaining[] = {2, 4, 6, 16, 26, 76, 256, 452, 1468, 2590};
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(rows[i].remaining == remaining[i]);
        CHECK(rows[i].unreached <= rows[i].remaining);
        CHECK(rows[i].remaining <= rows[i].total_odd);
    }
}

TEST_CASE("monotone refinement: open classes come from open classes") {
    std::vector<Template> ts;
    for (unsigned long x = 1; x <= 10; ++x) ts.push_back(build_template(x));
    for (std::size_t i = 1; i < ts.size(); ++i) {
        const Template& fine = ts[i];
        const Template& coarse = ts[i - 1];
        std::uint64_t coarse_period = 1ull << coarse.modulus_exponent;
        for (std::uint64_t j = 0; j < fine.total_odd(); ++j) {
            std::uint64_t r = 2 * j + 1;
            if (fine.unreached(r)) CHECK(coarse.unreached(r % coarse_period));
        }
    }
}

TEST_CASE("figure series mirrors the table") {
    std::vector<RateRow> rows = conversion_table(3);
    RateSeries s = figure_series(rows);
    REQUIRE(s.density.size() == 3);
    REQUIRE(s.non_conversion.size() == 3);
    CHECK(s.density[0].step == 1);
    CHECK(s.density[0].pct == doctest::Approx(50.0));
    CHECK(s.density[2].pct == doctest::Approx(25.0));       // 4/16
    CHECK(s.non_conversion[2].pct == doctest::Approx(66.7));  // 4/6
    CHECK_THROWS_AS(figure_series({}), std::invalid_argument);
}

TEST_CASE("congruence_check anchors") {
    CheckResult a = congruence_check(5, 3, 1, Expectation::Equal);
    CHECK(a.y == 2);
    CHECK(a.sigma_lifted == StopOutcome::stopped(1));  // sigma(17) = 1
    CHECK(a.pass);

    CheckResult b = congruence_check(7, 1, 4, Expectation::Equal);
    CHECK(b.y == 7);
    CHECK(b.sigma_lifted == StopOutcome::stopped(4));  // sigma(135) = 4
    CHECK(b.pass);

    CheckResult c = congruence_check(27, 1, 37, Expectation::Equal);
    CHECK(c.y == 59);
    CHECK(c.sigma_lifted == StopOutcome::stopped(37));  // sigma(27 + 2^59) = 37
    CHECK(c.pass);

    CheckResult d = congruence_check(27, 2, 20, Expectation::Greater);
    CHECK(d.pass);

    // precondition violations are errors, not failures
    CHECK_THROWS_AS(congruence_check(5, 1, 2, Expectation::Equal), std::invalid_argument);
    CHECK_THROWS_AS(congruence_check(27, 1, 40, Expectation::Greater), std::invalid_argument);
    CHECK_THROWS_AS(congruence_check(4, 1, 1, Expectation::Equal), std::invalid_argument);
}

TEST_CASE("lifting theorems, randomized") {
    std::mt19937_64 rng(61803398);
    std::uniform_int_distribution<unsigned long> half(1, 499999);
    std::uniform_int_distribution<unsigned long> kd(1, 50);

    for (int trial = 0; trial < 100; ++trial) {
        unsigned long n0 = 2 * half(rng) + 1;
        StopOutcome s = stopping_time(n0);
        REQUIRE(s.stopped());
        CheckResult eq = congruence_check(n0, kd(rng), s.steps, Expectation::Equal);
        CHECK(eq.pass);
        if (s.steps >= 2) {
            std::uniform_int_distribution<unsigned long> xd(1, s.steps - 1);
            CheckResult gt = congruence_check(n0, kd(rng), xd(rng), Expectation::Greater);
            CHECK(gt.pass);
        }
    }

    // classification of n mod 2^y(x) predicts whether sigma(n) <= x
    std::uniform_int_distribution<unsigned long> small(1, 499999);
    for (int trial = 0; trial < 200; ++trial) {
        unsigned long n = 2 * small(rng) + 1;
        for (unsigned long x = 1; x <= 8; ++x) {
            unsigned long y = required_twos(x);
            std::uint64_t r = n & ((1ull << y) - 1);
            StopOutcome s = stopping_time(n);
            bool reached = s.stopped() && s.steps <= x;
            CHECK((classify_residue(r, x) == Classification::Reached) == reached);
        }
    }
}

TEST_CASE("cache round-trip, exact bytes") {
    std::string p1 = temp_file("t1.bin");
    std::string p2 = temp_file("t2.bin");

    Template t1 = build_template(1);
    write_template_cache(p1, t1);
    std::ifstream f1(p1, std::ios::binary);
    std::string blob1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    REQUIRE(blob1.size() == 24);  // 7 magic + 4 + 4 + 8 + 1 bitmap
    CHECK(blob1.substr(0, 7) == "CZTPL1\n");
    CHECK(static_cast<unsigned char>(blob1[7]) == 1);    // x = 1, little endian
    CHECK(static_cast<unsigned char>(blob1[11]) == 2);   // y = 2
    CHECK(static_cast<unsigned char>(blob1[15]) == 1);   // count = 1
    CHECK(static_cast<unsigned char>(blob1[23]) == 0x02);  // residue 3 -> bit 1

    Template t2 = build_template(2);
    write_template_cache(p2, t2);
    std::ifstream f2(p2, std::ios::binary);
    std::string blob2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    REQUIRE(blob2.size() == 24);
    // unreached {7, 11, 15} -> bits 3, 5, 7 (LSB first)
    CHECK(static_cast<unsigned char>(blob2[23]) == 0xA8);

    CHECK(read_template_cache(p1) == t1);
    CHECK(read_template_cache(p2) == t2);

    Template t8 = build_template(8);
    std::string p8 = temp_file("t8.bin");
    write_template_cache(p8, t8);
    CHECK(read_template_cache(p8) == t8);
}

TEST_CASE("cache rejects corruption") {
    std::string path = temp_file("bad.bin");
    Template t = build_template(3);
    write_template_cache(path, t);

    auto clobber = [&](std::size_t at, char c) {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(static_cast<std::streamoff>(at));
        f.put(c);
    };

    clobber(0, 'X');  // magic
    CHECK_THROWS_AS(read_template_cache(path), FormatError);

    write_template_cache(path, t);
    clobber(15, 99);  // count no longer matches the bitmap
    CHECK_THROWS_AS(read_template_cache(path), FormatError);

    write_template_cache(path, t);
    std::filesystem::resize_file(path, 20);  // truncated
    CHECK_THROWS_AS(read_template_cache(path), FormatError);

    CHECK_THROWS_AS(read_template_cache(temp_file("missing.bin")), IoError);
}
