#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

// COLLATZ_CLI_BIN is injected by the build; every case shells out to the real
// binary so exit codes and byte-level output are exercised end to end.

namespace {

struct CliResult {
    int status;
    std::string out;
    bool operator==(const CliResult&) const = default;
    friend std::ostream& operator<<(std::ostream& os, const CliResult& r) {
        return os << "[exit " << r.status << "] " << r.out;
    }
};

CliResult run_raw(const std::string& cmd) {
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t got;
    while ((got = ::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
    int rc = ::pclose(pipe);
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, out};
}

CliResult run_cli(const std::string& args, const std::string& env = "") {
    std::string cmd;
    if (!env.empty()) cmd += env + " ";
    cmd += std::string(COLLATZ_CLI_BIN) + " " + args + " 2>/dev/null";
    return run_raw(cmd);
}

CliResult run_cli_stderr(const std::string& args, const std::string& env = "") {
    std::string cmd;
    if (!env.empty()) cmd += env + " ";
    cmd += std::string(COLLATZ_CLI_BIN) + " " + args + " 2>&1 1>/dev/null";
    return run_raw(cmd);
}

std::filesystem::path temp_item(const std::string& tag) {
    return std::filesystem::temp_directory_path() /
           ("collatz-cli-" + std::to_string(::getpid()) + "-" + tag);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string cache_env(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    return "COLLATZ_LAB_CACHE='" + dir.string() + "'";
}

struct Cleanup {
    std::filesystem::path p;
    ~Cleanup() { std::filesystem::remove_all(p); }
};

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

TEST_CASE("sigma subcommand") {
    CHECK(run_cli("sigma 27") == CliResult{0, "37\n"});
    CHECK(run_cli("sigma 27 --total") == CliResult{0, "41\n"});
    CHECK(run_cli("sigma 27 --coefficient") == CliResult{0, "37\n"});
    CHECK(run_cli("sigma 1") == CliResult{0, "trivial-cycle\n"});
    CHECK(run_cli("sigma 4").status == 1);
    CHECK(run_cli("sigma 27 --total --coefficient").status == 1);

    CliResult capped = run_cli("sigma 27 --cap 10");
    CHECK(capped.status == 2);
    CHECK(capped.out.find("cap-exceeded") != std::string::npos);

    CHECK(run_cli("sigma 27 --format csv") == CliResult{0, "kind,steps\nstopped,37\n"});
}

TEST_CASE("trace subcommand emits the full ledger") {
    CliResult r = run_cli("trace 191 --format csv");
    REQUIRE(r.status == 0);
    auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 9);
    CHECK(rows[0] == "index,value,m,m_accum,required,deficit");
    CHECK(rows[1] == "1,287,1,1,2,1");
    CHECK(rows[6] == "6,1093,2,7,10,3");
    CHECK(rows[8] == "8,77,3,14,13,-1");

    CliResult pretty = run_cli("trace 191");
    CHECK(pretty.status == 0);
    CHECK(pretty.out.find("287") != std::string::npos);
    CHECK(pretty.out.find("stopped") != std::string::npos);

    CHECK(run_cli("trace 27 --cap 5").status == 2);
}

TEST_CASE("rates subcommand") {
    auto dir = temp_item("rates-cache");
    Cleanup c{dir};
    CliResult r = run_cli("rates --max-step 4 --format csv", cache_env(dir));
    REQUIRE(r.status == 0);
    auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == "step,unreached,total_odd,density_pct,remaining,non_conversion_pct");
    CHECK(rows[1] == "1,1,2,50.0,2,50.0");
    CHECK(rows[2] == "2,3,8,37.5,4,75.0");
    CHECK(rows[4] == "4,13,64,20.3,16,81.2");
}

TEST_CASE("rates prefers a valid cache over rebuilding") {
    auto dir = temp_item("planted-cache");
    Cleanup c{dir};
    std::filesystem::create_directories(dir);
    // hand-forged step-2 template claiming five unreached residues; passes all
    // structural checks, so only a cache read can produce these numbers
    const unsigned char forged[24] = {'C', 'Z', 'T', 'P', 'L', '1', '\n',  //
                                      2,   0,   0,   0,                    //
                                      4,   0,   0,   0,                    //
                                      5,   0,   0,   0,   0, 0, 0, 0,      //
                                      0x1F};
    {
        std::ofstream out(dir / "template-2.bin", std::ios::binary);
        out.write(reinterpret_cast<const char*>(forged), sizeof forged);
    }
    CliResult r = run_cli("rates --max-step 2 --format csv", cache_env(dir));
    REQUIRE(r.status == 0);
    auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[2] == "2,5,8,62.5,4,125.0");
}

TEST_CASE("rates warns and rebuilds when a cache file is broken") {
    auto dir = temp_item("broken-cache");
    Cleanup c{dir};
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "template-2.bin", std::ios::binary);
        out << "garbage";
    }
    CliResult r = run_cli("rates --max-step 2 --format csv", cache_env(dir));
    REQUIRE(r.status == 0);
    auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[2] == "2,3,8,37.5,4,75.0");
    CliResult err = run_cli_stderr("rates --max-step 2 --format csv", cache_env(dir));
    CHECK(err.out.find("rebuild") != std::string::npos);
}

TEST_CASE("pow2 subcommand") {
    CliResult r = run_cli("pow2 27 --format csv");
    REQUIRE(r.status == 0);
    auto rows = lines_of(r.out);
    REQUIRE(rows.size() >= 5);
    CHECK(rows[0] == "m,count,observed_pct,theoretical_pct");
    CHECK(rows[1] == "1,22,59.5,50.0");
    CHECK(rows[4] == "4,2,5.4,6.3");

    CliResult pretty = run_cli("pow2 27");
    CHECK(pretty.status == 0);
    CHECK(pretty.out.find("total steps: 37") != std::string::npos);

    CHECK(run_cli("pow2 4").status == 1);
}

TEST_CASE("template subcommand builds, caches on request, and validates") {
    auto dir = temp_item("tpl");
    Cleanup c{dir};
    std::filesystem::create_directories(dir);
    auto file = dir / "t2.bin";

    CliResult r = run_cli("template --step 2 --out '" + file.string() + "'");
    REQUIRE(r.status == 0);
    CHECK(r.out.find("pattern: + - - - + - - -") != std::string::npos);

    std::string blob = slurp(file);
    REQUIRE(blob.size() == 24);
    CHECK(static_cast<unsigned char>(blob[23]) == 0xA8);

    // second run hits the cache and agrees
    CliResult again = run_cli("template --step 2 --out '" + file.string() + "'");
    CHECK(again == r);

    {
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        out << "garbage";
    }
    CHECK(run_cli("template --step 2 --out '" + file.string() + "'").status == 3);

    // without --out nothing is persisted
    CliResult bare = run_cli("template --step 1 --format csv", cache_env(dir));
    CHECK(bare.status == 0);
    CHECK(bare.out.find("1,2,1,2,50.0") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "template-1.bin"));
}

TEST_CASE("search subcommand writes checkpoints and streams rows") {
    auto ckpt = temp_item("search.jsonl");
    Cleanup c{ckpt};

    CliResult r = run_cli("search --start 27 --iters 3 --checkpoint '" + ckpt.string() +
                          "' --format csv");
    REQUIRE(r.status == 0);
    auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "iteration,k,exp,sigma,bits");
    CHECK(rows[1] == "1,2,57,48,58");
    CHECK(rows[2] == "2,3,75,51,77");
    CHECK(rows[3] == "3,1,78,52,79");

    auto file_lines = lines_of(slurp(ckpt));
    REQUIRE(file_lines.size() == 4);
    CHECK(file_lines[0].find("collatz-search/1") != std::string::npos);

    CliResult slope = run_cli("slope --checkpoint '" + ckpt.string() + "' --format csv");
    REQUIRE(slope.status == 0);
    auto slope_rows = lines_of(slope.out);
    REQUIRE(slope_rows.size() == 2);
    CHECK(slope_rows[0] == "slope,intercept,max_abs_residual");
}

TEST_CASE("search reports a capped candidate with exit code 2") {
    auto ckpt = temp_item("capped.jsonl");
    Cleanup c{ckpt};
    CliResult r = run_cli("search --start 27 --iters 2 --checkpoint '" + ckpt.string() +
                          "' --cap 40");
    CHECK(r.status == 2);
    // header survives: the run is restartable after raising the cap
    CHECK(lines_of(slurp(ckpt)).size() == 1);
}

TEST_CASE("figure subcommand") {
    auto dir = temp_item("fig-cache");
    Cleanup c{dir};
    CHECK(run_cli("figure --which 1 --max-step 3", cache_env(dir)) ==
          CliResult{0, "step,density_pct\n1,50.0\n2,37.5\n3,25.0\n"});
    CHECK(run_cli("figure --which 2 --max-step 3", cache_env(dir)) ==
          CliResult{0, "step,non_conversion_pct\n1,50.0\n2,75.0\n3,66.7\n"});

    auto ckpt = temp_item("fig.jsonl");
    Cleanup c2{ckpt};
    REQUIRE(run_cli("search --start 27 --iters 3 --checkpoint '" + ckpt.string() + "'").status ==
            0);
    CHECK(run_cli("figure --which 3 --checkpoint '" + ckpt.string() + "'") ==
          CliResult{0, "iteration,sigma\n1,48\n2,51\n3,52\n"});

    CliResult f4 = run_cli("figure --which 4 --checkpoint '" + ckpt.string() + "'");
    REQUIRE(f4.status == 0);
    auto rows = lines_of(f4.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "log2_n,sigma");
    CHECK(rows[1] == "57.000000,48");

    CHECK(run_cli("figure --which 3").status == 1);
    CHECK(run_cli("figure --which 9").status == 1);
}

TEST_CASE("usage errors exit 1 and help exits 0") {
    CHECK(run_cli("sigma 27 --bogus").status == 1);
    CHECK(run_cli("nosuchcommand").status == 1);
    CHECK(run_cli("").status == 1);
    CHECK(run_cli("--help").status == 0);
    CHECK(run_cli("sigma nonsense").status == 1);
    CHECK(run_cli("template --step 40").status == 1);  // budget, not a crash
}

TEST_CASE("interrupted searches resume to a byte-identical checkpoint") {
    auto straight = temp_item("straight.jsonl");
    auto crashed = temp_item("crashed.jsonl");
    Cleanup ca{straight}, cb{crashed};

    REQUIRE(run_cli("search --start 27 --iters 12 --checkpoint '" + straight.string() +
                    "'").status == 0);

    REQUIRE(run_cli("search --start 27 --iters 7 --checkpoint '" + crashed.string() +
                    "'").status == 0);
    {
        std::ofstream out(crashed, std::ios::binary | std::ios::app);
        out << "{\"iter\":8,\"k\":3,\"ex";  // torn final write
    }

    CliResult warn = run_cli_stderr("search --start 27 --iters 12 --checkpoint '" +
                                    crashed.string() + "' --resume");
    CHECK(warn.out.find("partial") != std::string::npos);

    CliResult resumed = run_cli("search --start 27 --iters 12 --checkpoint '" +
                                crashed.string() + "' --resume --format csv");
    REQUIRE(resumed.status == 0);

    CHECK(slurp(straight) == slurp(crashed));

    // resuming under a different start value is refused
    CHECK(run_cli("search --start 31 --iters 12 --checkpoint '" + crashed.string() +
                  "' --resume").status == 3);
}
