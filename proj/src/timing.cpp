#include "agentgate/timing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "agentgate/rng.hpp"

namespace agentgate::timing {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

void CognitiveConstants::validate() const {
    require(r_read_tps > 0 && r_read_wpm > 0 && t_prp_s > 0 &&
                r_type_tps > 0 && words_per_token > 0,
            "CognitiveConstants: all constants must be strictly positive");
}

void LlmLatencyModel::validate() const {
    require(prefill_s_per_ktok >= 0 && prefill_floor_s >= 0 && t_tok_s >= 0 &&
                t_action_s >= 0,
            "LlmLatencyModel: all constants must be non-negative");
}

void HumanSimParams::validate() const {
    require(n_samples >= 1, "HumanSimParams: n_samples must be >= 1");
    require(l_range.lo < l_range.hi && l_range.lo > 0,
            "HumanSimParams: l_range must be positive and non-degenerate");
    require(r_comp_sd >= 0, "HumanSimParams: r_comp_sd must be >= 0");
    require(r_comp_clip.lo > 0 && r_comp_clip.lo < r_comp_clip.hi,
            "HumanSimParams: r_comp_clip must be positive and non-degenerate");
    require(r_comp_mean >= r_comp_clip.lo && r_comp_mean <= r_comp_clip.hi,
            "HumanSimParams: clip interval must contain r_comp_mean");
    require(t_decide_range.lo >= 0 && t_decide_range.lo < t_decide_range.hi,
            "HumanSimParams: t_decide_range non-degenerate and non-negative");
    require(t_comp_range.lo >= 0 && t_comp_range.lo < t_comp_range.hi,
            "HumanSimParams: t_comp_range non-degenerate and non-negative");
    require(answer_tokens >= 0, "HumanSimParams: answer_tokens must be >= 0");
}

double human_lower_bound(double l_tokens, double a_tokens,
                         const CognitiveConstants& consts) {
    consts.validate();
    require(l_tokens >= 0 && a_tokens >= 0,
            "human_lower_bound: token counts must be >= 0");
    return l_tokens / consts.r_read_tps + consts.t_prp_s +
           a_tokens / consts.r_type_tps;
}

double llm_latency(double l_tokens, double a_tokens,
                   const LlmLatencyModel& model) {
    model.validate();
    require(l_tokens >= 0 && a_tokens >= 0,
            "llm_latency: token counts must be >= 0");
    double prefill = std::max(model.prefill_floor_s,
                              model.prefill_s_per_ktok * l_tokens / 1000.0);
    return prefill + a_tokens * model.t_tok_s + model.t_action_s;
}

double calibrate_tau(double l_tokens, double alpha, double t_comprehend_s,
                     double t_respond_s, const CognitiveConstants& consts) {
    consts.validate();
    require(alpha > 0.0 && alpha < 1.0,
            "calibrate_tau: alpha must lie strictly inside (0, 1)");
    require(l_tokens >= 0 && t_comprehend_s >= 0 && t_respond_s >= 0,
            "calibrate_tau: inputs must be >= 0");
    double words = l_tokens * consts.words_per_token;
    double read_s = words / (consts.r_read_wpm / 60.0);
    return alpha * (read_s + t_comprehend_s + t_respond_s);
}

std::vector<double> simulate_human(const HumanSimParams& params,
                                   std::uint64_t seed,
                                   const CognitiveConstants& consts) {
    params.validate();
    consts.validate();
    std::vector<double> out(static_cast<std::size_t>(params.n_samples));
    double type_s = params.answer_tokens / consts.r_type_tps;
    for (int i = 0; i < params.n_samples; ++i) {
        Rng rng(derive_subseed(seed, static_cast<std::uint64_t>(i)));
        // Draw order is part of the reproducibility contract:
        // L, R_comp, T_decide, T_comp.
        double l = std::uniform_real_distribution<double>(
            params.l_range.lo, params.l_range.hi)(rng);
        double r = std::normal_distribution<double>(params.r_comp_mean,
                                                    params.r_comp_sd)(rng);
        r = std::clamp(r, params.r_comp_clip.lo, params.r_comp_clip.hi);
        double t_decide = std::uniform_real_distribution<double>(
            params.t_decide_range.lo, params.t_decide_range.hi)(rng);
        double t_comp = std::uniform_real_distribution<double>(
            params.t_comp_range.lo, params.t_comp_range.hi)(rng);
        out[static_cast<std::size_t>(i)] = l / r + t_decide + type_s + t_comp;
    }
    return out;
}

std::vector<double> simulate_serial_floor(int n, Interval l_range,
                                          double a_tokens, std::uint64_t seed,
                                          const CognitiveConstants& consts) {
    consts.validate();
    require(n >= 1, "simulate_serial_floor: n must be >= 1");
    require(l_range.lo > 0 && l_range.lo < l_range.hi,
            "simulate_serial_floor: l_range must be positive, non-degenerate");
    require(a_tokens >= 0, "simulate_serial_floor: a_tokens must be >= 0");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_subseed(seed, static_cast<std::uint64_t>(i)));
        double l = std::uniform_real_distribution<double>(l_range.lo,
                                                          l_range.hi)(rng);
        out[static_cast<std::size_t>(i)] =
            human_lower_bound(l, a_tokens, consts);
    }
    return out;
}

double analytic_floor(const HumanSimParams& params,
                      const CognitiveConstants& consts) {
    params.validate();
    consts.validate();
    return params.l_range.lo / params.r_comp_clip.hi +
           params.t_decide_range.lo + params.answer_tokens / consts.r_type_tps +
           params.t_comp_range.lo;
}

double human_completion_prob(std::span<const double> samples, double tau) {
    if (samples.empty()) {
        throw std::invalid_argument("human_completion_prob: empty samples");
    }
    std::size_t n = 0;
    for (double x : samples) {
        if (x <= tau) ++n;
    }
    return static_cast<double>(n) / static_cast<double>(samples.size());
}

LognormalFit fit_lognormal(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw std::invalid_argument("fit_lognormal: need at least 2 samples");
    }
    double sum = 0.0;
    for (double x : samples) {
        if (x <= 0.0) {
            throw std::invalid_argument(
                "fit_lognormal: samples must be strictly positive");
        }
        sum += std::log(x);
    }
    double mu = sum / static_cast<double>(samples.size());
    double ss = 0.0;
    for (double x : samples) {
        double d = std::log(x) - mu;
        ss += d * d;
    }
    double sigma = std::sqrt(ss / static_cast<double>(samples.size()));
    return {mu, sigma};
}

double agent_pass_rate(const LognormalFit& fit, double tau) {
    if (fit.sigma < 0.0) {
        throw std::invalid_argument("agent_pass_rate: sigma must be >= 0");
    }
    if (tau <= 0.0) return 0.0;
    if (fit.sigma == 0.0) return tau >= std::exp(fit.mu) ? 1.0 : 0.0;
    return normal_cdf((std::log(tau) - fit.mu) / fit.sigma);
}

std::vector<double> log_spaced_grid(double lo, double hi, int points) {
    require(lo > 0 && hi > lo, "log_spaced_grid: need 0 < lo < hi");
    require(points >= 2, "log_spaced_grid: need at least 2 points");
    std::vector<double> grid(static_cast<std::size_t>(points));
    double llo = std::log(lo);
    double lhi = std::log(hi);
    for (int i = 0; i < points; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(points - 1);
        grid[static_cast<std::size_t>(i)] = std::exp(llo + t * (lhi - llo));
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

SweepResult sweep_tau(std::span<const double> tau_grid,
                      std::span<const double> agent_samples,
                      std::span<const double> human_samples) {
    if (tau_grid.empty()) {
        throw std::invalid_argument("sweep_tau: empty tau grid");
    }
    if (human_samples.empty()) {
        throw std::invalid_argument("sweep_tau: empty human samples");
    }
    LognormalFit fit = fit_lognormal(agent_samples);

    SweepResult res;
    res.tau_grid.assign(tau_grid.begin(), tau_grid.end());
    res.agent_pass.reserve(tau_grid.size());
    res.human_prob.reserve(tau_grid.size());
    for (double tau : tau_grid) {
        res.agent_pass.push_back(agent_pass_rate(fit, tau));
        res.human_prob.push_back(human_completion_prob(human_samples, tau));
    }

    // Longest contiguous run where agents almost always finish and humans
    // almost never do; the first such run wins ties.
    std::size_t best_start = 0, best_len = 0, run_start = 0, run_len = 0;
    for (std::size_t i = 0; i < res.tau_grid.size(); ++i) {
        bool ok = res.agent_pass[i] > 0.95 && res.human_prob[i] < 0.05;
        if (ok) {
            if (run_len == 0) run_start = i;
            ++run_len;
            if (run_len > best_len) {
                best_len = run_len;
                best_start = run_start;
            }
        } else {
            run_len = 0;
        }
    }
    if (best_len > 0) {
        res.feasible_region = Interval{res.tau_grid[best_start],
                                       res.tau_grid[best_start + best_len - 1]};
    }
    return res;
}

std::vector<double> sample_lognormal(double median, double sigma, int n,
                                     std::uint64_t seed) {
    require(median > 0, "sample_lognormal: median must be positive");
    require(sigma >= 0, "sample_lognormal: sigma must be >= 0");
    require(n >= 1, "sample_lognormal: n must be >= 1");
    double mu = std::log(median);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_subseed(seed, static_cast<std::uint64_t>(i)));
        double z = std::normal_distribution<double>(0.0, 1.0)(rng);
        out[static_cast<std::size_t>(i)] = std::exp(mu + sigma * z);
    }
    return out;
}

}  // namespace agentgate::timing
