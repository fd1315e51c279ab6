// collatz-lab: CLI over the accelerated-odd-map library. Subcommands mirror
// the library: traces, stopping times, residue templates, conversion rates,
// divisor histograms, the record search, and slope fits. Exit codes:
// 0 ok, 1 usage, 2 cap exceeded, 3 bad file.

#include <CLI11.hpp>

#include "collatz/checkpoint.hpp"
#include "collatz/divisor_stats.hpp"
#include "collatz/dynamics.hpp"
#include "collatz/errors.hpp"
#include "collatz/format.hpp"
#include "collatz/search.hpp"
#include "collatz/templates.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

namespace {

using namespace collatz;

struct Config {
    unsigned long cap = kDefaultCap;
    std::uint64_t budget = kDefaultBudget;
    std::string format = "pretty";

    bool csv() const { return format == "csv"; }
    bool json() const { return format == "json"; }
};

std::string cache_dir() {
    const char* env = std::getenv("COLLATZ_LAB_CACHE");
    return env ? std::string(env) : std::string("./.collatz-cache");
}

std::string cache_path(unsigned long x) {
    return cache_dir() + "/template-" + std::to_string(x) + ".bin";
}

const char* outcome_kind(const StopOutcome& o) {
    switch (o.kind) {
        case StopOutcome::Kind::Stopped: return "stopped";
        case StopOutcome::Kind::ReachedOne: return "reached-one";
        case StopOutcome::Kind::CapExceeded: return "cap-exceeded";
        case StopOutcome::Kind::TrivialCycle: return "trivial-cycle";
    }
    return "?";
}

// Addend as printed in run logs; row.exponent is already the addend's
// 2-adic valuation, so only the k = 3 case needs a coefficient.
std::string addend_display(const SearchRow& r) {
    return (r.k == 3 ? "3*2^" : "2^") + std::to_string(r.exponent);
}

// ----- trace ----------------------------------------------------------------

int cmd_trace(const Config& cfg, const std::string& n_str, bool total) {
    SequenceTrace t =
        trace(parse_nat(n_str), total ? TraceMode::Total : TraceMode::Stopping, cfg.cap);
    if (cfg.csv()) {
        std::printf("index,value,m,m_accum,required,deficit\n");
        for (const StepRecord& r : t.records)
            std::printf("%lu,%s,%lu,%lu,%lu,%ld\n", r.index, r.value.get_str(10).c_str(), r.twos,
                        r.twos_accum, r.twos_required, r.deficit);
    } else if (cfg.json()) {
        std::printf("{\"start\":\"%s\",\"mode\":\"%s\",\"outcome\":{\"kind\":\"%s\",\"steps\":%lu},"
                    "\"records\":[",
                    t.start.get_str(10).c_str(), total ? "total" : "stopping",
                    outcome_kind(t.outcome), t.outcome.steps);
        for (std::size_t i = 0; i < t.records.size(); ++i) {
            const StepRecord& r = t.records[i];
            std::printf("%s{\"index\":%lu,\"value\":\"%s\",\"m\":%lu,\"m_accum\":%lu,"
                        "\"required\":%lu,\"deficit\":%ld}",
                        i ? "," : "", r.index, r.value.get_str(10).c_str(), r.twos, r.twos_accum,
                        r.twos_required, r.deficit);
        }
        std::printf("]}\n");
    } else {
        std::printf("%5s  %-24s %3s  %6s  %6s  %7s\n", "step", "value", "m", "sum2s", "need2s",
                    "deficit");
        for (const StepRecord& r : t.records)
            std::printf("%5lu  %-24s %3lu  %6lu  %6lu  %7ld\n", r.index,
                        r.value.get_str(10).c_str(), r.twos, r.twos_accum, r.twos_required,
                        r.deficit);
        switch (t.outcome.kind) {
            case StopOutcome::Kind::Stopped:
                std::printf("stopped: sigma = %lu\n", t.outcome.steps);
                break;
            case StopOutcome::Kind::ReachedOne:
                std::printf("reached 1: total sigma = %lu\n", t.outcome.steps);
                break;
            case StopOutcome::Kind::TrivialCycle:
                std::printf("trivial cycle: 1 maps to 1\n");
                break;
            case StopOutcome::Kind::CapExceeded:
                std::printf("cap exceeded after %lu steps\n", t.outcome.steps);
                break;
        }
    }
    return t.outcome.capped() ? 2 : 0;
}

// ----- sigma ----------------------------------------------------------------

int cmd_sigma(const Config& cfg, const std::string& n_str, bool total, bool coefficient) {
    Nat n = parse_nat(n_str);
    StopOutcome o = total         ? total_stopping_time(n, cfg.cap)
                    : coefficient ? coefficient_stopping_time(n, cfg.cap)
                                  : stopping_time(n, cfg.cap);
    if (cfg.csv()) {
        std::printf("kind,steps\n%s,%lu\n", outcome_kind(o), o.steps);
    } else if (cfg.json()) {
        std::printf("{\"n\":\"%s\",\"kind\":\"%s\",\"steps\":%lu}\n", n.get_str(10).c_str(),
                    outcome_kind(o), o.steps);
    } else {
        if (o.finite())
            std::printf("%lu\n", o.steps);
        else
            std::printf("%s\n", outcome_kind(o));
    }
    return o.capped() ? 2 : 0;
}

// ----- template / rates -------------------------------------------------------

Template load_or_build(unsigned long x, const Config& cfg) {
    std::string path = cache_path(x);
    if (std::filesystem::exists(path)) {
        try {
            Template t = read_template_cache(path);
            if (t.step == x) return t;
            std::fprintf(stderr, "warning: %s holds step %lu, rebuilding step %lu\n", path.c_str(),
                         t.step, x);
        } catch (const FormatError& e) {
            std::fprintf(stderr, "warning: invalid cache, rebuilding (%s)\n", e.what());
        } catch (const IoError& e) {
            std::fprintf(stderr, "warning: unreadable cache, rebuilding (%s)\n", e.what());
        }
    }
    return build_template(x, cfg.budget, cfg.cap);
}

int cmd_template(const Config& cfg, unsigned long x, const std::string& out) {
    std::string path = out.empty() ? cache_path(x) : out;
    Template t;
    if (std::filesystem::exists(path)) {
        t = read_template_cache(path);  // valid cache skips the enumeration
        if (t.step != x)
            throw FormatError(path + " holds template step " + std::to_string(t.step) +
                              ", not " + std::to_string(x));
    } else {
        t = build_template(x, cfg.budget, cfg.cap);
        if (!out.empty()) write_template_cache(path, t);
    }
    double density = tenths_value(pct_tenths_half_even(t.unreached_count, t.total_odd()));
    if (cfg.csv()) {
        std::printf("step,modulus_exponent,unreached,total_odd,density_pct\n");
        std::printf("%lu,%lu,%llu,%llu,%s\n", t.step, t.modulus_exponent,
                    (unsigned long long)t.unreached_count, (unsigned long long)t.total_odd(),
                    fixed1(density).c_str());
    } else if (cfg.json()) {
        std::printf("{\"step\":%lu,\"modulus_exponent\":%lu,\"unreached\":%llu,"
                    "\"total_odd\":%llu,\"density_pct\":%s}\n",
                    t.step, t.modulus_exponent, (unsigned long long)t.unreached_count,
                    (unsigned long long)t.total_odd(), fixed1(density).c_str());
    } else {
        std::printf("step %lu: modulus 2^%lu, %llu odd residues, %llu unreached (%s%%)\n", t.step,
                    t.modulus_exponent, (unsigned long long)t.total_odd(),
                    (unsigned long long)t.unreached_count, fixed1(density).c_str());
        std::printf("pattern: %s\n", pattern_string(x, 8, cfg.cap).c_str());
    }
    return 0;
}

std::vector<RateRow> rates_for(unsigned long max_x, const Config& cfg) {
    std::vector<Template> ts;
    ts.reserve(max_x);
    for (unsigned long x = 1; x <= max_x; ++x) ts.push_back(load_or_build(x, cfg));
    return conversion_rows(ts);
}

int cmd_rates(const Config& cfg, unsigned long max_x) {
    std::vector<RateRow> rows = rates_for(max_x, cfg);
    if (cfg.csv()) {
        std::printf("step,unreached,total_odd,density_pct,remaining,non_conversion_pct\n");
        for (const RateRow& r : rows)
            std::printf("%lu,%llu,%llu,%s,%llu,%s\n", r.step, (unsigned long long)r.unreached,
                        (unsigned long long)r.total_odd, fixed1(r.density_pct).c_str(),
                        (unsigned long long)r.remaining, fixed1(r.non_conversion_pct).c_str());
    } else if (cfg.json()) {
        std::printf("[");
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const RateRow& r = rows[i];
            std::printf("%s{\"step\":%lu,\"unreached\":%llu,\"total_odd\":%llu,"
                        "\"density_pct\":%s,\"remaining\":%llu,\"non_conversion_pct\":%s}",
                        i ? "," : "", r.step, (unsigned long long)r.unreached,
                        (unsigned long long)r.total_odd, fixed1(r.density_pct).c_str(),
                        (unsigned long long)r.remaining, fixed1(r.non_conversion_pct).c_str());
        }
        std::printf("]\n");
    } else {
        std::printf("%4s  %9s  %10s  %8s  %9s  %7s\n", "step", "unreached", "total_odd",
                    "density", "remaining", "nonconv");
        for (const RateRow& r : rows)
            std::printf("%4lu  %9llu  %10llu  %7s%%  %9llu  %6s%%\n", r.step,
                        (unsigned long long)r.unreached, (unsigned long long)r.total_odd,
                        fixed1(r.density_pct).c_str(), (unsigned long long)r.remaining,
                        fixed1(r.non_conversion_pct).c_str());
    }
    return 0;
}

// ----- pow2 -------------------------------------------------------------------

int cmd_pow2(const Config& cfg, const std::string& n_str, bool total) {
    PowHistogram h =
        pow2_histogram(parse_nat(n_str), total ? TraceMode::Total : TraceMode::Stopping, cfg.cap);
    GeometricReference ref = geometric_reference(h.counts.rbegin()->first);
    std::vector<HistogramRow> rows = histogram_report(h, ref);
    if (cfg.csv()) {
        std::printf("m,count,observed_pct,theoretical_pct\n");
        for (const HistogramRow& r : rows)
            std::printf("%lu,%lu,%s,%s\n", r.m, r.count, fixed1(r.observed_pct).c_str(),
                        fixed1(r.theoretical_pct).c_str());
    } else if (cfg.json()) {
        std::printf("{\"n\":\"%s\",\"mode\":\"%s\",\"total_steps\":%lu,\"rows\":[",
                    h.n.get_str(10).c_str(), total ? "total" : "stopping", h.total_steps);
        for (std::size_t i = 0; i < rows.size(); ++i)
            std::printf("%s{\"m\":%lu,\"count\":%lu,\"observed_pct\":%s,\"theoretical_pct\":%s}",
                        i ? "," : "", rows[i].m, rows[i].count, fixed1(rows[i].observed_pct).c_str(),
                        fixed1(rows[i].theoretical_pct).c_str());
        std::printf("]}\n");
    } else {
        std::printf("%3s  %6s  %9s  %12s\n", "m", "count", "observed", "theoretical");
        for (const HistogramRow& r : rows)
            std::printf("%3lu  %6lu  %8s%%  %11s%%\n", r.m, r.count, fixed1(r.observed_pct).c_str(),
                        fixed1(r.theoretical_pct).c_str());
        std::printf("total steps: %lu\n", h.total_steps);
    }
    return 0;
}

// ----- search / slope / figure --------------------------------------------------

int cmd_search(const Config& cfg, const std::string& start_str, unsigned long iters,
               const std::string& file, bool resume) {
    Nat start = parse_nat(start_str);
    bool header_done = false;
    auto echo = [&](const SearchRow& r) {
        if (cfg.csv()) {
            if (!header_done) {
                std::printf("iteration,k,exp,sigma,bits\n");
                header_done = true;
            }
            std::printf("%lu,%d,%lu,%lu,%zu\n", r.iteration, r.k, r.exponent, r.sigma, r.bits());
        } else if (!cfg.json()) {
            std::printf("%4lu  k=%d  +%-12s  sigma %-6lu  (%zu bits)\n", r.iteration, r.k,
                        addend_display(r).c_str(), r.sigma, r.bits());
        }
        std::fflush(stdout);
    };

    SearchReport report;
    if (resume) {
        CheckpointData data = read_checkpoint(file);
        if (data.start != start)
            throw FormatError("checkpoint starts at " + data.start.get_str(10) + ", not " +
                              start.get_str(10));
        if (data.had_partial_tail)
            std::fprintf(stderr, "warning: discarded a partial trailing line in %s\n",
                         file.c_str());
        if (data.rows.size() >= iters)
            std::fprintf(stderr, "note: checkpoint already holds %zu rows\n", data.rows.size());
        SearchState state = state_from_checkpoint(data, cfg.cap);
        CheckpointWriter w = CheckpointWriter::append_to(file, data);
        report = resume_search(std::move(state), data.rows, iters, cfg.cap,
                               [&](const SearchRow& r) {
                                   w.write_row(r);
                                   echo(r);
                               });
    } else {
        CheckpointWriter w = CheckpointWriter::create(file, start);
        report = run_search(start, iters, cfg.cap, [&](const SearchRow& r) {
            w.write_row(r);
            echo(r);
        });
    }

    if (cfg.json()) {
        std::printf("{\"start\":\"%s\",\"rule\":\"%s\",\"rows\":[", report.start.get_str(10).c_str(),
                    kSearchRuleId);
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            const SearchRow& r = report.rows[i];
            std::printf("%s{\"iter\":%lu,\"k\":%d,\"exp\":%lu,\"sigma\":%lu,\"bits\":%zu}",
                        i ? "," : "", r.iteration, r.k, r.exponent, r.sigma, r.bits());
        }
        std::printf("]}\n");
    } else if (cfg.csv() && !header_done) {
        std::printf("iteration,k,exp,sigma,bits\n");  // no new rows: header only
    }
    if (report.exhausted)
        std::fprintf(stderr, "search exhausted: %s\n", report.exhausted->c_str());
    return 0;
}

int cmd_slope(const Config& cfg, const std::string& file) {
    CheckpointData data = read_checkpoint(file);
    SearchReport report{data.start, data.rows, std::nullopt};
    SlopeFit fit = fit_slope(report);
    if (cfg.csv()) {
        std::printf("slope,intercept,max_abs_residual\n%s,%s,%s\n", fixed6(fit.slope).c_str(),
                    fixed6(fit.intercept).c_str(), fixed6(fit.max_abs_residual).c_str());
    } else if (cfg.json()) {
        std::printf("{\"slope\":%s,\"intercept\":%s,\"max_abs_residual\":%s}\n",
                    fixed6(fit.slope).c_str(), fixed6(fit.intercept).c_str(),
                    fixed6(fit.max_abs_residual).c_str());
    } else {
        std::printf("slope %s\nintercept %s\nmax_abs_residual %s\n", fixed6(fit.slope).c_str(),
                    fixed6(fit.intercept).c_str(), fixed6(fit.max_abs_residual).c_str());
    }
    return 0;
}

int cmd_figure(const Config& cfg, int which, unsigned long max_x, const std::string& file) {
    if (which <= 2) {
        RateSeries s = figure_series(rates_for(max_x, cfg));
        const auto& pts = (which == 1) ? s.density : s.non_conversion;
        std::printf("%s\n", which == 1 ? "step,density_pct" : "step,non_conversion_pct");
        for (const RatePoint& p : pts) std::printf("%lu,%s\n", p.step, fixed1(p.pct).c_str());
    } else {
        if (file.empty())
            throw std::invalid_argument("figure " + std::to_string(which) +
                                        " needs --checkpoint");
        CheckpointData data = read_checkpoint(file);
        std::printf("%s\n", which == 3 ? "iteration,sigma" : "log2_n,sigma");
        for (const SearchRow& r : data.rows) {
            if (which == 3)
                std::printf("%lu,%lu\n", r.iteration, r.sigma);
            else
                std::printf("%s,%lu\n", fixed6(log2_nat(r.n)).c_str(), r.sigma);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"collatz-lab: accelerated Collatz odd-map workbench"};
    app.require_subcommand(1);

    Config cfg;
    app.add_option("--cap", cfg.cap, "step cap for iterative computations")
        ->capture_default_str();
    app.add_option("--budget", cfg.budget, "odd residues a template may enumerate")
        ->capture_default_str();
    app.add_option("--format", cfg.format, "output format")
        ->check(CLI::IsMember({"pretty", "csv", "json"}))
        ->capture_default_str();

    std::function<int()> action;

    std::string n_str;
    bool flag_total = false, flag_coefficient = false;

    auto* c_trace = app.add_subcommand("trace", "odd-map ledger trace of N");
    c_trace->fallthrough();
    c_trace->add_option("N", n_str, "odd start value")->required();
    c_trace->add_flag("--total", flag_total, "run to 1 instead of first drop");
    c_trace->callback([&] { action = [&] { return cmd_trace(cfg, n_str, flag_total); }; });

    auto* c_sigma = app.add_subcommand("sigma", "stopping time of N");
    c_sigma->fallthrough();
    c_sigma->add_option("N", n_str, "odd value")->required();
    auto* o_total = c_sigma->add_flag("--total", flag_total, "total stopping time");
    c_sigma->add_flag("--coefficient", flag_coefficient, "coefficient stopping time")
        ->excludes(o_total);
    c_sigma->callback(
        [&] { action = [&] { return cmd_sigma(cfg, n_str, flag_total, flag_coefficient); }; });

    unsigned long opt_step = 1;
    std::string opt_out;
    auto* c_template = app.add_subcommand("template", "residue template for one step");
    c_template->fallthrough();
    c_template->add_option("--step", opt_step, "step x")->required();
    c_template->add_option("--out", opt_out, "cache file to write (or reuse)");
    c_template->callback([&] { action = [&] { return cmd_template(cfg, opt_step, opt_out); }; });

    unsigned long opt_max_step = 10;
    auto* c_rates = app.add_subcommand("rates", "conversion-rate table for steps 1..X");
    c_rates->fallthrough();
    c_rates->add_option("--max-step", opt_max_step, "last step")->required();
    c_rates->callback([&] { action = [&] { return cmd_rates(cfg, opt_max_step); }; });

    auto* c_pow2 = app.add_subcommand("pow2", "divisor histogram along N's trace");
    c_pow2->fallthrough();
    c_pow2->add_option("N", n_str, "odd value")->required();
    c_pow2->add_flag("--total", flag_total, "histogram the full run to 1");
    c_pow2->callback([&] { action = [&] { return cmd_pow2(cfg, n_str, flag_total); }; });

    std::string opt_start, opt_checkpoint;
    unsigned long opt_iters = 0;
    bool opt_resume = false;
    auto* c_search = app.add_subcommand("search", "record-stopping-time search");
    c_search->fallthrough();
    c_search->add_option("--start", opt_start, "odd start value")->required();
    c_search->add_option("--iters", opt_iters, "total accepted iterations")->required();
    c_search->add_option("--checkpoint", opt_checkpoint, "JSONL checkpoint file")->required();
    c_search->add_flag("--resume", opt_resume, "continue from the checkpoint");
    c_search->callback([&] {
        action = [&] { return cmd_search(cfg, opt_start, opt_iters, opt_checkpoint, opt_resume); };
    });

    auto* c_slope = app.add_subcommand("slope", "least-squares sigma vs log2(n) of a run");
    c_slope->fallthrough();
    c_slope->add_option("--checkpoint", opt_checkpoint, "JSONL checkpoint file")->required();
    c_slope->callback([&] { action = [&] { return cmd_slope(cfg, opt_checkpoint); }; });

    int opt_which = 0;
    auto* c_figure = app.add_subcommand("figure", "CSV data series behind one figure");
    c_figure->fallthrough();
    c_figure->add_option("--which", opt_which, "figure number 1-4")
        ->required()
        ->check(CLI::Range(1, 4));
    c_figure->add_option("--max-step", opt_max_step, "last step (figures 1-2)");
    c_figure->add_option("--checkpoint", opt_checkpoint, "search run (figures 3-4)");
    c_figure->callback([&] {
        action = [&] { return cmd_figure(cfg, opt_which, opt_max_step, opt_checkpoint); };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // exits 0 after printing help
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        return action();
    } catch (const CapExceededError& e) {
        std::fprintf(stderr, "cap exceeded: %s\n", e.what());
        return 2;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "bad file: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const BudgetExceededError& e) {
        std::fprintf(stderr, "budget exceeded: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
