#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace agentgate::timing {

// Measured human reading/response constants used by both the serial
// lower-bound model and threshold calibration. Rates are tokens/s except
// r_read_wpm (words/min); words_per_token converts between the two unit
// systems.
struct CognitiveConstants {
    double r_read_tps = 5.0;
    double r_read_wpm = 238.0;
    double t_prp_s = 0.35;      // psychological refractory period
    double r_type_tps = 0.9;
    double words_per_token = 0.75;

    void validate() const;  // throws std::invalid_argument unless all > 0
};

// Three-stage serial latency model for a machine reader: prefill over the
// narrative, token-by-token generation of the answer, one action round-trip.
// Prefill scales sub-linearly; modeled as max(floor, linear per ktok).
struct LlmLatencyModel {
    double prefill_s_per_ktok = 0.3;
    double prefill_floor_s = 0.5;
    double t_tok_s = 0.03;  // typical hosted decode: 0.02-0.05 s/token
    double t_action_s = 0.2;

    void validate() const;  // throws std::invalid_argument on negatives
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Monte Carlo parameters for the human comprehension-time simulation.
struct HumanSimParams {
    int n_samples = 500;
    Interval l_range{352.0, 1124.0};     // narrative length, tokens
    double r_comp_mean = 3.3;            // comprehension rate, tokens/s
    double r_comp_sd = 0.5;
    Interval r_comp_clip{2.5, 5.0};
    Interval t_decide_range{1.5, 3.0};   // seconds
    Interval t_comp_range{5.0, 20.0};    // question comprehension, seconds
    int answer_tokens = 10;

    void validate() const;  // throws std::invalid_argument
};

struct LognormalFit {
    double mu = 0.0;     // log-seconds
    double sigma = 0.0;  // log-seconds, >= 0
};

struct SweepResult {
    std::vector<double> tau_grid;
    std::vector<double> agent_pass;
    std::vector<double> human_prob;
    // Maximal contiguous grid interval where agent_pass > 0.95 and
    // human_prob < 0.05; absent when no grid point qualifies.
    std::optional<Interval> feasible_region;
};

// Strictly serial human pipeline: read the narrative, reorient, type the
// answer. l/r_read + t_prp + a/r_type. This is the generous lower bound —
// comprehension and decision time excluded.
double human_lower_bound(double l_tokens, double a_tokens,
                         const CognitiveConstants& consts = {});

// max(prefill_floor, prefill_per_ktok * l/1000) + a * t_tok + t_action.
double llm_latency(double l_tokens, double a_tokens,
                   const LlmLatencyModel& model = {});

// Per-round budget: alpha * (reading time at r_read_wpm + t_comprehend +
// t_respond), reading time over l * words_per_token words. alpha is a
// safety margin and must lie strictly inside (0, 1); throws otherwise.
double calibrate_tau(double l_tokens, double alpha, double t_comprehend_s,
                     double t_respond_s, const CognitiveConstants& consts = {});

// Comprehension-model human round times:
//   T = L/R_comp + T_decide + A/r_type + T_comp
// with L ~ U(l_range), R_comp ~ N(mean, sd) clipped after drawing,
// T_decide ~ U(t_decide_range), T_comp ~ U(t_comp_range). Deterministic
// under a fixed seed; sample i uses a sub-seed derived from (seed, i), so
// the stream is order-independent.
std::vector<double> simulate_human(const HumanSimParams& params,
                                   std::uint64_t seed,
                                   const CognitiveConstants& consts = {});

// Serial lower-bound model sampled over narrative length only:
//   T = L/r_read + t_prp + a/r_type,  L ~ U(l_range).
// This is the distribution behind the human curve in the threshold sweep —
// the most conservative (fastest) human model.
std::vector<double> simulate_serial_floor(int n, Interval l_range,
                                          double a_tokens, std::uint64_t seed,
                                          const CognitiveConstants& consts = {});

// Smallest value the comprehension model can emit under these parameters
// (all draws at their fastest bound).
double analytic_floor(const HumanSimParams& params,
                      const CognitiveConstants& consts = {});

// Empirical P(T <= tau): count(x <= tau)/n. Throws on empty samples.
double human_completion_prob(std::span<const double> samples, double tau);

// Log-moment matching (MLE for lognormal): mu = mean(log x), sigma =
// population sd(log x). Throws std::invalid_argument on n < 2 or any
// non-positive sample.
LognormalFit fit_lognormal(std::span<const double> samples);

// Lognormal CDF at tau; degenerate sigma = 0 gives a step at e^mu.
// Returns 0 for tau <= 0 (no mass on the non-positive axis).
double agent_pass_rate(const LognormalFit& fit, double tau);

// n points log-spaced over [lo, hi] inclusive. Defaults mirror the sweep
// range used throughout: 200 points over [1, 600] s.
std::vector<double> log_spaced_grid(double lo = 1.0, double hi = 600.0,
                                    int points = 200);

// Threshold-sensitivity sweep: agent curve from a lognormal fit of
// agent_samples, human curve by direct counting of human_samples.
SweepResult sweep_tau(std::span<const double> tau_grid,
                      std::span<const double> agent_samples,
                      std::span<const double> human_samples);

// Seeded lognormal draws parameterized by median (= e^mu) and sigma; used
// to synthesize agent latency samples for sweeps and tests.
std::vector<double> sample_lognormal(double median, double sigma, int n,
                                     std::uint64_t seed);

}  // namespace agentgate::timing
