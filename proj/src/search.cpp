#include "collatz/search.hpp"

#include <cmath>
#include <stdexcept>

namespace collatz {

namespace {

std::string addend_str(int k, unsigned long y) {
    if (k == 2) return "2^" + std::to_string(y + 1);
    if (k == 1) return "2^" + std::to_string(y);
    return "3*2^" + std::to_string(y);
}

}  // namespace

std::pair<unsigned long, unsigned long> factor4_step(unsigned long sigma) {
    if (sigma < 2) throw std::invalid_argument("factor4_step: sigma must be >= 2");
    unsigned long best_s = 0, best_y = 0;
    Nat p3 = 3;  // 3^s
    unsigned long y_prev = 2;
    for (unsigned long s = 1; s < sigma; ++s) {
        p3 *= 3;
        unsigned long y_next = static_cast<unsigned long>(bit_length(p3));
        if (y_next - y_prev == 2) {
            best_s = s;
            best_y = y_prev;
        }
        y_prev = y_next;
    }
    if (best_s == 0) throw std::logic_error("factor4_step: no factor-4 boundary found");
    return {best_s, best_y};
}

std::pair<unsigned long, unsigned long> factor4_step(const SequenceTrace& t) {
    if (!t.outcome.stopped())
        throw std::invalid_argument("factor4_step: trace has no stopping time");
    return factor4_step(t.outcome.steps);
}

std::vector<unsigned long> fallback_boundaries(unsigned long sigma, unsigned long s_star,
                                               int max_attempts) {
    std::vector<unsigned long> below;  // factor-4 steps strictly under s*
    {
        Nat p3 = 3;
        unsigned long y_prev = 2;
        for (unsigned long s = 1; s < s_star; ++s) {
            p3 *= 3;
            unsigned long y_next = static_cast<unsigned long>(bit_length(p3));
            if (y_next - y_prev == 2) below.push_back(s);
            y_prev = y_next;
        }
    }
    // Lazily walk factor-4 steps upward from sigma itself.
    Nat p3;
    mpz_ui_pow_ui(p3.get_mpz_t(), 3, sigma);
    unsigned long y_prev = static_cast<unsigned long>(bit_length(p3));
    unsigned long s_above = sigma;
    auto next_above = [&]() {
        while (true) {
            p3 *= 3;
            unsigned long y_next = static_cast<unsigned long>(bit_length(p3));
            unsigned long s = s_above++;
            bool hit = (y_next - y_prev == 2);
            y_prev = y_next;
            if (hit) return s;
        }
    };
    std::vector<unsigned long> order;
    std::size_t bi = below.size();
    for (int t = 0; t < max_attempts; ++t) {
        if (t % 2 == 0 && bi > 0) {
            order.push_back(below[--bi]);
        } else {
            order.push_back(next_above());
        }
    }
    return order;
}

namespace {

// Shared candidate mechanics. No relation between s and sigma is assumed
// here: the fallback sweep legitimately probes boundaries above sigma.
CandidateSet propose_at(const SearchState& state, unsigned long s, unsigned long cap) {
    CandidateSet cs;
    cs.base_step = s;
    cs.exponent = required_twos(s);
    Nat step = pow2(cs.exponent);
    for (int k = 1; k <= 3; ++k) {
        cs.candidates[k - 1].k = k;
        cs.candidates[k - 1].n = state.n + k * step;
    }
    // Three independent big-integer traces; the costly part of an iteration.
#pragma omp parallel for schedule(static) num_threads(3)
    for (int k = 0; k < 3; ++k) {
        cs.candidates[k].sigma = stopping_time(cs.candidates[k].n, cap);
    }
    return cs;
}

}  // namespace

CandidateSet propose_candidates(const SearchState& state, unsigned long s_star,
                                unsigned long cap) {
    if (s_star >= state.sigma)
        throw std::invalid_argument("propose_candidates: boundary must sit below sigma");
    return propose_at(state, s_star, cap);
}

int select_candidate(const CandidateSet& cs) {
    int best = -1;
    for (int i = 0; i < 3; ++i) {
        const Candidate& c = cs.candidates[i];
        if (!c.sigma.stopped() && !c.sigma.capped())
            throw std::logic_error("select_candidate: candidate with no usable outcome");
        if (best == -1) {
            best = i;
            continue;
        }
        const Candidate& b = cs.candidates[best];
        // Capped = "greater than anything finite"; earliest capped k wins.
        bool c_inf = c.sigma.capped(), b_inf = b.sigma.capped();
        if (c_inf != b_inf) {
            if (c_inf) best = i;
        } else if (!c_inf && c.sigma.steps > b.sigma.steps) {
            best = i;  // ties keep the smaller k already held
        }
    }
    return best;
}

namespace {

// Evaluate one boundary; accepted state, nullopt (no improvement), or throws
// on a capped selection.
std::optional<SearchState> try_boundary(const SearchState& state, unsigned long s,
                                        unsigned long cap) {
    CandidateSet cs = propose_at(state, s, cap);
    int idx = select_candidate(cs);
    const Candidate& c = cs.candidates[idx];
    if (c.sigma.capped())
        throw CapExceededError(
            "potential counterexample: sigma(n + " + addend_str(c.k, cs.exponent) +
            ") did not stop within cap " + std::to_string(cap) + " at iteration " +
            std::to_string(state.iteration + 1) + "; base n has sigma " +
            std::to_string(state.sigma));
    if (c.sigma.steps <= state.sigma) return std::nullopt;
    SearchState next;
    next.start = state.start;
    next.iteration = state.iteration + 1;
    next.n = c.n;
    next.sigma = c.sigma.steps;
    next.history = state.history;
    next.history.emplace_back(c.k, cs.exponent);
    return next;
}

}  // namespace

std::variant<SearchState, Exhausted> search_step(const SearchState& state, unsigned long cap,
                                                 int max_fallback_attempts) {
    auto [s_star, y] = factor4_step(state.sigma);
    (void)y;
    if (auto next = try_boundary(state, s_star, cap)) return *next;
    std::vector<unsigned long> tried{s_star};
    for (unsigned long s : fallback_boundaries(state.sigma, s_star, max_fallback_attempts)) {
        if (auto next = try_boundary(state, s, cap)) return *next;
        tried.push_back(s);
    }
    std::string diag = "no candidate improved sigma " + std::to_string(state.sigma) +
                       " at iteration " + std::to_string(state.iteration + 1) +
                       "; boundaries tried:";
    for (unsigned long s : tried) diag += " " + std::to_string(s);
    return Exhausted{diag};
}

SearchState initial_search_state(const Nat& start, unsigned long cap) {
    StopOutcome s = stopping_time(start, cap);  // rejects even input
    if (s.capped())
        throw CapExceededError("search start has no stopping time within cap " +
                               std::to_string(cap));
    if (!s.stopped() || s.steps < 2)
        throw std::invalid_argument("search start needs sigma >= 2");
    return {start, 0, start, s.steps, {}};
}

SearchReport run_search(const Nat& start, unsigned long iterations, unsigned long cap,
                        const RowSink& sink) {
    return resume_search(initial_search_state(start, cap), {}, iterations, cap, sink);
}

SearchReport resume_search(SearchState state, std::vector<SearchRow> completed,
                           unsigned long iterations, unsigned long cap, const RowSink& sink) {
    if (state.iteration != completed.size())
        throw std::invalid_argument("resume_search: state and completed rows disagree");
    SearchReport report{state.start, std::move(completed), std::nullopt};
    while (state.iteration < iterations) {
        auto res = search_step(state, cap);
        if (std::holds_alternative<Exhausted>(res)) {
            report.exhausted = std::get<Exhausted>(res).diagnostic;
            break;
        }
        state = std::get<SearchState>(std::move(res));
        auto [k, y] = state.history.back();
        SearchRow row{state.iteration, k, y + (k == 2 ? 1 : 0), state.sigma, state.n};
        report.rows.push_back(row);
        if (sink) sink(row);
    }
    return report;
}

SlopeFit fit_slope(const SearchReport& report) {
    if (report.rows.size() < 2)
        throw std::invalid_argument("fit_slope: need at least 2 rows");
    const std::size_t n = report.rows.size();
    double sx = 0, sy = 0;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = log2_nat(report.rows[i].n);
        ys[i] = static_cast<double>(report.rows[i].sigma);
        sx += xs[i];
        sy += ys[i];
    }
    double xbar = sx / static_cast<double>(n), ybar = sy / static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    double slope = sxy / sxx;
    double intercept = ybar - slope * xbar;
    double max_resid = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = std::fabs(ys[i] - (intercept + slope * xs[i]));
        if (r > max_resid) max_resid = r;
    }
    return {slope, intercept, max_resid};
}

unsigned long predict_magnitude(unsigned long target_sigma) {
    if (target_sigma == 0) throw std::invalid_argument("predict_magnitude: target must be >= 1");
    return static_cast<unsigned long>(
        std::llround(static_cast<double>(target_sigma) * std::log2(3.0)));
}

}  // namespace collatz
