// agentgate — admission verifier for agent-only services.
//
// One binary, subcommand per job: run the verifier, reproduce the timing
// analyses, exercise prover baselines against a target, and drive the
// challenge-generation toolkit.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "agentgate/clock.hpp"
#include "agentgate/completion.hpp"
#include "agentgate/corpus.hpp"
#include "agentgate/event_log.hpp"
#include "agentgate/genkit.hpp"
#include "agentgate/prover.hpp"
#include "agentgate/server.hpp"
#include "agentgate/session.hpp"
#include "agentgate/timing.hpp"

namespace {

using nlohmann::json;
using namespace agentgate;

corpus::Corpus load_corpus_or_die(const std::string& path) {
    return corpus::load_corpus(path, {}, &genkit::domain_catalog());
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile_of(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    auto idx = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
    return v[idx];
}

// --- serve -------------------------------------------------------------------

struct ServeArgs {
    std::string corpus_path;
    std::string config_path;
    std::string host = "0.0.0.0";
    int port = 8088;
    std::string prefix = "/v1";
    std::optional<std::string> key_file;
    std::optional<std::string> event_log_path;
    std::uint64_t seed = std::random_device{}();
};

int cmd_serve(const ServeArgs& a) {
    server::ServiceConfig cfg;
    if (!a.config_path.empty()) {
        json j = read_json_file(a.config_path);
        cfg.params = session::SecurityParams::from_json(j.value("params", json::object()));
        cfg.pass_token_ttl_s = j.value("pass_token_ttl_s", cfg.pass_token_ttl_s);
    }
    cfg.params.validate();

    corpus::Corpus corpus = load_corpus_or_die(a.corpus_path);
    std::cerr << "corpus: " << corpus.total_sets() << " narrative sets across "
              << corpus.domains.size() << " domains\n";

    std::unique_ptr<EventLog> log;
    if (a.event_log_path) log = std::make_unique<EventLog>(*a.event_log_path);

    auto key = server::load_server_key("AGENTGATE_KEY", a.key_file);
    SteadyClock clock;
    server::VerifierService service(corpus, cfg, std::move(key), clock, a.seed,
                                    log.get());

    server::ServeOptions opts;
    opts.host = a.host;
    opts.port = a.port;
    opts.prefix = a.prefix;
    std::cerr << "listening on " << opts.host << ":" << opts.port
              << opts.prefix << "\n";
    if (!server::run_server(service, opts)) {
        std::cerr << "error: cannot bind " << opts.host << ":" << opts.port
                  << "\n";
        return 1;
    }
    return 0;
}

// --- timing analyses ------------------------------------------------------------

struct SimulateArgs {
    int n = 500;
    std::uint64_t seed = 7;
    bool dump_samples = false;
};

int cmd_simulate_human(const SimulateArgs& a) {
    timing::HumanSimParams params;
    params.n_samples = a.n;
    auto samples = timing::simulate_human(params, a.seed);
    if (a.dump_samples) {
        for (double s : samples) std::cout << s << "\n";
    }
    std::cout << "n        " << samples.size() << "\n"
              << "floor    " << timing::analytic_floor(params) << " s\n"
              << "min      " << *std::min_element(samples.begin(), samples.end())
              << " s\n"
              << "p5       " << quantile_of(samples, 0.05) << " s\n"
              << "median   " << median_of(samples) << " s\n"
              << "max      " << *std::max_element(samples.begin(), samples.end())
              << " s\n"
              << "P(<=15s) " << timing::human_completion_prob(samples, 15.0)
              << "\n";
    return 0;
}

struct SweepArgs {
    double agent_median = 7.1;
    double agent_sigma = 0.481;
    int agent_n = 2000;
    int human_n = 500;
    std::uint64_t seed = 7;
    double tau_lo = 1.0;
    double tau_hi = 600.0;
    int points = 200;
    bool table = false;
};

int cmd_sweep_tau(const SweepArgs& a) {
    auto agent = timing::sample_lognormal(a.agent_median, a.agent_sigma,
                                          a.agent_n, a.seed);
    timing::HumanSimParams hp;
    auto human = timing::simulate_serial_floor(a.human_n, hp.l_range,
                                               hp.answer_tokens, a.seed + 1);
    auto grid = timing::log_spaced_grid(a.tau_lo, a.tau_hi, a.points);
    auto result = timing::sweep_tau(grid, agent, human);

    if (a.table) {
        std::cout << "tau_s\tagent_pass\thuman_prob\n";
        for (std::size_t i = 0; i < result.tau_grid.size(); ++i) {
            std::cout << result.tau_grid[i] << "\t" << result.agent_pass[i]
                      << "\t" << result.human_prob[i] << "\n";
        }
    }
    if (result.feasible_region) {
        std::cout << "feasible tau: [" << result.feasible_region->lo << ", "
                  << result.feasible_region->hi << "] s\n";
    } else {
        std::cout << "feasible tau: none on this grid\n";
    }
    return 0;
}

struct CalibrateArgs {
    double tokens = 682.0;
    double alpha = 0.1;
    double t_comprehend = 10.0;
    double t_respond = 5.0;
};

int cmd_calibrate_tau(const CalibrateArgs& a) {
    std::cout << timing::calibrate_tau(a.tokens, a.alpha, a.t_comprehend,
                                       a.t_respond)
              << "\n";
    return 0;
}

struct BoundsArgs {
    double tokens = 682.0;
    double answer_tokens = 10.0;
};

int cmd_bounds(const BoundsArgs& a) {
    std::cout << "human lower bound  "
              << timing::human_lower_bound(a.tokens, a.answer_tokens) << " s\n"
              << "machine latency    "
              << timing::llm_latency(a.tokens, a.answer_tokens) << " s\n";
    return 0;
}

// --- prover harness ---------------------------------------------------------------

struct ProveArgs {
    std::string corpus_path;
    std::string profile = "oracle";
    std::string url;  // empty => in-process
    int n = 10;
    std::uint64_t seed = 7;
    double per_round_delay = 0.0;
    bool real_time = false;
    std::string endpoint_config;  // llm_backed only
    std::string log_path;
};

int cmd_prove(const ProveArgs& a) {
    corpus::Corpus corpus = load_corpus_or_die(a.corpus_path);

    std::shared_ptr<CompletionClient> llm;
    auto make_profile = [&]() -> prover::ProverProfile {
        if (a.profile == "oracle") return prover::ProverProfile::oracle(corpus);
        if (a.profile == "random_entity") {
            return prover::ProverProfile::random_entity(corpus);
        }
        if (a.profile == "keyword_script") {
            return prover::ProverProfile::keyword_script(corpus);
        }
        if (a.profile == "delayed_human") {
            return prover::ProverProfile::delayed_human(corpus, {});
        }
        if (a.profile == "llm_backed") {
            if (a.endpoint_config.empty()) {
                throw std::runtime_error(
                    "llm_backed needs --endpoint <config.json>");
            }
            llm = std::make_shared<HttpCompletionClient>(
                CompletionEndpointConfig::load(a.endpoint_config));
            return prover::ProverProfile::llm_backed(llm);
        }
        throw std::runtime_error("unknown profile: " + a.profile);
    };

    prover::ProverProfile profile = make_profile();
    if (a.per_round_delay > 0.0) profile.per_round_delay_s = a.per_round_delay;

    Rng rng(a.seed);
    prover::TrialResult result;

    if (!a.url.empty()) {
        prover::HttpTarget target(a.url);
        result = prover::run_trials(profile, target, a.n, rng);
    } else {
        // Self-contained bench: spin up the service in-process. Simulated
        // time by default so slow profiles don't actually sleep.
        ManualClock manual;
        SteadyClock steady;
        const Clock& clock =
            a.real_time ? static_cast<const Clock&>(steady) : manual;
        auto key = server::load_server_key();
        server::VerifierService service(corpus, {}, std::move(key), clock,
                                        a.seed + 1);
        prover::InprocTarget target(service, a.real_time ? nullptr : &manual);
        result = prover::run_trials(profile, target, a.n, rng);
    }

    if (!a.log_path.empty()) {
        std::ofstream out(a.log_path);
        for (const auto& line : result.log_lines) out << line << "\n";
    }
    std::cout << "profile    " << profile.label << "\n"
              << "sessions   " << a.n << "\n"
              << "advantage  " << result.advantage << "\n";
    return 0;
}

// --- generation toolkit --------------------------------------------------------------

int cmd_gen_prompt(const std::string& domain_id,
                   const std::string& params_path) {
    genkit::GenParams params;
    if (!params_path.empty()) {
        params = genkit::GenParams::from_json(read_json_file(params_path));
    }
    const corpus::DomainDef* domain = nullptr;
    for (const auto& d : genkit::domain_catalog()) {
        if (d.id == domain_id) domain = &d;
    }
    if (domain == nullptr) {
        std::cerr << "error: unknown domain '" << domain_id << "'; known:";
        for (const auto& d : genkit::domain_catalog()) {
            std::cerr << " " << d.id;
        }
        std::cerr << "\n";
        return 1;
    }
    std::cout << genkit::build_generation_prompt(params, *domain);
    return 0;
}

struct GenValidateArgs {
    std::string in_path;
    std::string params_path;
    std::string endpoint_config;  // enables cross-validation
};

int cmd_gen_validate(const GenValidateArgs& a) {
    genkit::GenParams params;
    if (!a.params_path.empty()) {
        params = genkit::GenParams::from_json(read_json_file(a.params_path));
    }
    std::ifstream in(a.in_path);
    if (!in) {
        std::cerr << "error: cannot open " << a.in_path << "\n";
        return 1;
    }
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());

    corpus::NarrativeSet set;
    try {
        set = genkit::parse_generated(text);
    } catch (const genkit::GenParseError& e) {
        std::cerr << "parse: " << e.what() << "\n";
        return 1;
    }
    auto report = genkit::validate_generated(set, params);
    for (const auto& v : report.violations) {
        std::cout << "violation  " << v.rule << "  [" << v.location << "] "
                  << v.detail << "\n";
    }
    for (const auto& adv : report.advisories) {
        std::cout << "advisory   " << adv << "\n";
    }
    std::cout << (report.ok() ? "ok" : "failed") << ": "
              << report.violations.size() << " violation(s)\n";

    if (!a.endpoint_config.empty()) {
        HttpCompletionClient client(
            CompletionEndpointConfig::load(a.endpoint_config));
        auto cross = genkit::cross_validate(set, client);
        for (const auto& e : cross.entries) {
            std::cout << "cross      part " << e.part << " qa " << e.qa << ": "
                      << (e.keep ? "keep" : "discard") << " (model: '"
                      << e.model_answer << "')\n";
        }
        std::cout << "cross-validation discarded " << cross.discarded()
                  << " question(s)\n";
    }
    return report.ok() ? 0 : 1;
}

struct GenSynthArgs {
    std::uint64_t seed = 7;
    int count = 1;
    std::string out_path;
};

int cmd_gen_synth(const GenSynthArgs& a) {
    json sets = json::array();
    for (int i = 0; i < a.count; ++i) {
        auto set = genkit::synth_fixture_set(a.seed + static_cast<std::uint64_t>(i));
        sets.push_back(corpus::set_to_json(set));
    }
    json out = a.count == 1 ? sets[0] : sets;
    if (a.out_path.empty()) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::ofstream f(a.out_path);
        f << out.dump(2) << "\n";
        std::cerr << "wrote " << a.count << " set(s) to " << a.out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"agent admission verifier and analysis toolkit"};
    app.require_subcommand(1);

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "run the verifier HTTP service");
    serve->add_option("--corpus", serve_args.corpus_path,
                      "narrative corpus file or directory")
        ->required();
    serve->add_option("--config", serve_args.config_path,
                      "service config JSON (params + token ttl)");
    serve->add_option("--host", serve_args.host, "bind address");
    serve->add_option("--port", serve_args.port, "bind port");
    serve->add_option("--prefix", serve_args.prefix, "route prefix");
    serve->add_option("--key-file", serve_args.key_file,
                      "server key file (64 hex chars)");
    serve->add_option("--event-log", serve_args.event_log_path,
                      "append-only audit log path");
    serve->add_option("--seed", serve_args.seed, "challenge sampling seed");

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand(
        "simulate-human", "Monte Carlo of human round-completion time");
    sim->add_option("--n", sim_args.n, "sample count");
    sim->add_option("--seed", sim_args.seed, "rng seed");
    sim->add_flag("--samples", sim_args.dump_samples,
                  "print raw samples, one per line");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand(
        "sweep-tau", "per-round budget sensitivity: agent vs human curves");
    sweep->add_option("--agent-median", sweep_args.agent_median,
                      "agent latency median, seconds");
    sweep->add_option("--agent-sigma", sweep_args.agent_sigma,
                      "agent latency lognormal sigma");
    sweep->add_option("--agent-n", sweep_args.agent_n, "agent sample count");
    sweep->add_option("--human-n", sweep_args.human_n, "human sample count");
    sweep->add_option("--seed", sweep_args.seed, "rng seed");
    sweep->add_option("--tau-lo", sweep_args.tau_lo, "grid lower bound, s");
    sweep->add_option("--tau-hi", sweep_args.tau_hi, "grid upper bound, s");
    sweep->add_option("--points", sweep_args.points, "grid points");
    sweep->add_flag("--table", sweep_args.table, "print the full grid");

    CalibrateArgs cal_args;
    auto* cal = app.add_subcommand("calibrate-tau",
                                   "per-round budget from narrative length");
    cal->add_option("--tokens", cal_args.tokens, "narrative length, tokens");
    cal->add_option("--alpha", cal_args.alpha, "safety margin in (0,1)");
    cal->add_option("--t-comprehend", cal_args.t_comprehend,
                    "question comprehension time, s");
    cal->add_option("--t-respond", cal_args.t_respond, "response time, s");

    BoundsArgs bounds_args;
    auto* bounds = app.add_subcommand(
        "bounds", "human lower bound vs machine latency for one round");
    bounds->add_option("--tokens", bounds_args.tokens,
                       "narrative length, tokens");
    bounds->add_option("--answer-tokens", bounds_args.answer_tokens,
                       "answer length, tokens");

    ProveArgs prove_args;
    auto* prove = app.add_subcommand(
        "prove", "run a prover profile against a verifier");
    prove->add_option("--corpus", prove_args.corpus_path,
                      "corpus (must match the target's)")
        ->required();
    prove->add_option("--profile", prove_args.profile,
                      "oracle|random_entity|keyword_script|delayed_human|"
                      "llm_backed");
    prove->add_option("--url", prove_args.url,
                      "target base URL; omitted = in-process service");
    prove->add_option("--n", prove_args.n, "number of sessions");
    prove->add_option("--seed", prove_args.seed, "rng seed");
    prove->add_option("--delay", prove_args.per_round_delay,
                      "extra per-round delay, s");
    prove->add_flag("--real-time", prove_args.real_time,
                    "in-process target runs on the wall clock");
    prove->add_option("--endpoint", prove_args.endpoint_config,
                      "completion endpoint config (llm_backed)");
    prove->add_option("--log", prove_args.log_path,
                      "write per-session JSON lines here");

    std::string gp_domain;
    std::string gp_params;
    auto* gp = app.add_subcommand("gen-prompt",
                                  "emit the generation prompt for a domain");
    gp->add_option("--domain", gp_domain, "domain id")->required();
    gp->add_option("--params", gp_params, "generation params JSON");

    GenValidateArgs gv_args;
    auto* gv = app.add_subcommand(
        "gen-validate", "parse + validate a generated narrative set");
    gv->add_option("--in", gv_args.in_path, "candidate JSON file")->required();
    gv->add_option("--params", gv_args.params_path, "generation params JSON");
    gv->add_option("--endpoint", gv_args.endpoint_config,
                   "completion endpoint config; enables answer "
                   "cross-validation");

    GenSynthArgs gs_args;
    auto* gs = app.add_subcommand(
        "gen-synth", "emit deterministic offline fixture narrative sets");
    gs->add_option("--seed", gs_args.seed, "generator seed");
    gs->add_option("--count", gs_args.count, "number of sets");
    gs->add_option("--out", gs_args.out_path, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (serve->parsed()) return cmd_serve(serve_args);
        if (sim->parsed()) return cmd_simulate_human(sim_args);
        if (sweep->parsed()) return cmd_sweep_tau(sweep_args);
        if (cal->parsed()) return cmd_calibrate_tau(cal_args);
        if (bounds->parsed()) return cmd_bounds(bounds_args);
        if (prove->parsed()) return cmd_prove(prove_args);
        if (gp->parsed()) return cmd_gen_prompt(gp_domain, gp_params);
        if (gv->parsed()) return cmd_gen_validate(gv_args);
        if (gs->parsed()) return cmd_gen_synth(gs_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
