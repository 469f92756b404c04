#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "agentgate/clock.hpp"
#include "agentgate/corpus.hpp"
#include "agentgate/event_log.hpp"
#include "agentgate/mac.hpp"
#include "agentgate/prover.hpp"
#include "agentgate/server.hpp"

using namespace agentgate;
using nlohmann::json;

namespace {

const std::filesystem::path kFixtures{AGENTGATE_FIXTURE_DIR};

std::vector<std::uint8_t> test_key() {
    return std::vector<std::uint8_t>(32, 0x42);
}

std::string oracle_answer(const corpus::Corpus& c, const std::string& narrative,
                          const std::string& question) {
    for (const auto& domain_sets : c.sets) {
        for (const auto& set : domain_sets) {
            for (const auto& part : set.parts) {
                for (const auto& qa : part.qa_pairs) {
                    if (part.narrative == narrative &&
                        qa.question == question) {
                        return qa.canonical_answer;
                    }
                }
            }
        }
    }
    FAIL("payload not found in corpus");
    return {};
}

// Live HTTP fixture: service + server on an ephemeral loopback port.
struct LiveServer {
    corpus::Corpus corpus;
    SteadyClock clock;
    server::VerifierService service;
    httplib::Server svr;
    int port = 0;
    std::thread runner;

    LiveServer()
        : corpus(corpus::load_corpus(kFixtures / "biochem_case.json", {},
                                     nullptr)),
          service(corpus, {}, test_key(), clock, 99) {
        server::attach_routes(svr, service);
        port = svr.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        runner = std::thread([this] { svr.listen_after_bind(); });
        for (int i = 0; i < 2000 && !svr.is_running(); ++i) {
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }
        REQUIRE(svr.is_running());
    }

    ~LiveServer() {
        svr.stop();
        if (runner.joinable()) runner.join();
    }

    httplib::Client client() {
        httplib::Client c("127.0.0.1", port);
        c.set_connection_timeout(std::chrono::seconds(5));
        c.set_read_timeout(std::chrono::seconds(5));
        return c;
    }
};

}  // namespace

TEST_CASE("service construction guards its inputs") {
    auto c = corpus::load_corpus(kFixtures / "biochem_case.json", {}, nullptr);
    ManualClock clock;
    CHECK_THROWS_AS(
        server::VerifierService(c, {}, {}, clock, 1),
        std::invalid_argument);

    server::ServiceConfig cfg;
    cfg.pass_token_ttl_s = 0;
    CHECK_THROWS_AS(server::VerifierService(c, cfg, test_key(), clock, 1),
                    std::invalid_argument);
}

TEST_CASE("service runs the whole game without a transport") {
    auto c = corpus::load_corpus(kFixtures / "biochem_case.json", {}, nullptr);
    ManualClock clock;
    server::VerifierService service(c, {}, test_key(), clock, 42);

    auto p = service.start();
    CHECK(p.round == 1);

    for (int round = 1; round <= 3; ++round) {
        auto out =
            service.answer(p.session_id, oracle_answer(c, p.narrative,
                                                        p.question));
        REQUIRE_FALSE(out.error.has_value());
        if (round < 3) {
            REQUIRE(out.next.has_value());
            CHECK(out.next->round == round + 1);
            p.narrative = out.next->narrative;
            p.question = out.next->question;
        } else {
            REQUIRE(out.verdict.has_value());
            CHECK(out.verdict->accept);
            REQUIRE(out.pass_token.has_value());
            CHECK(service.verify_token(*out.pass_token));
            CHECK_FALSE(service.verify_token(*out.pass_token + "0"));
        }
    }

    auto missing = service.answer("abcd1234", "x");
    REQUIRE(missing.error.has_value());
    CHECK(*missing.error == session::SubmitError::unknown_session);

    CHECK_THROWS_AS(service.start("astrology"), std::invalid_argument);
}

TEST_CASE("wire forms carry exactly the advertised fields") {
    session::RoundPayload p;
    p.session_id = "aa";
    p.round = 2;
    p.narrative = "n";
    p.question = "q";
    p.tau_ms = 15000;
    p.total_timeout_ms = 120000;

    json pj = server::payload_to_json(p, 1234);
    std::set<std::string> keys;
    for (auto it = pj.begin(); it != pj.end(); ++it) keys.insert(it.key());
    CHECK(keys == std::set<std::string>{"session_id", "round", "narrative",
                                        "question", "tau_ms",
                                        "total_timeout_ms", "issued_at"});

    json accept = server::verdict_to_json(session::Verdict::accepted(),
                                          std::string("tok"));
    CHECK(accept == json{{"verdict", "accept"}, {"pass_token", "tok"}});

    json reject = server::verdict_to_json(
        session::Verdict::rejected(session::RejectReason::timeout),
        std::nullopt);
    CHECK(reject == json{{"verdict", "reject"}, {"reason", "timeout"}});
}

TEST_CASE("http api: create, play, verify, replay") {
    LiveServer live;
    auto cli = live.client();

    // Create with an empty body.
    auto created = cli.Post("/v1/session", "", "application/json");
    REQUIRE(created);
    REQUIRE(created->status == 201);
    json payload = json::parse(created->body);
    const std::string id = payload.at("session_id");
    CHECK(id.size() == 64);
    CHECK(payload.at("round") == 1);
    CHECK(payload.at("tau_ms") == 15000);
    CHECK(payload.at("total_timeout_ms") == 120000);

    // Status while active.
    auto status = cli.Get(("/v1/session/" + id).c_str());
    REQUIRE(status);
    REQUIRE(status->status == 200);
    json st = json::parse(status->body);
    CHECK(st.at("status") == "active");
    CHECK(st.at("current_round") == 1);
    CHECK(st.at("elapsed_ms").get<std::int64_t>() >= 0);

    // Play all three rounds with correct answers.
    std::string pass_token;
    for (int round = 1; round <= 3; ++round) {
        std::string answer = oracle_answer(
            live.corpus, payload.at("narrative"), payload.at("question"));
        auto res = cli.Post(("/v1/session/" + id + "/answer").c_str(),
                            json{{"answer", answer}}.dump(),
                            "application/json");
        REQUIRE(res);
        REQUIRE(res->status == 200);
        json body = json::parse(res->body);
        if (round < 3) {
            CHECK(body.at("round") == round + 1);
            payload = body;
        } else {
            CHECK(body.at("verdict") == "accept");
            pass_token = body.at("pass_token");
        }
    }

    // The token the service minted verifies over the wire.
    auto verify = cli.Post("/v1/token/verify",
                           json{{"token", pass_token}}.dump(),
                           "application/json");
    REQUIRE(verify);
    CHECK(verify->status == 200);
    CHECK(json::parse(verify->body).at("valid") == true);

    auto bad_verify = cli.Post("/v1/token/verify",
                               json{{"token", pass_token + "ff"}}.dump(),
                               "application/json");
    REQUIRE(bad_verify);
    CHECK(json::parse(bad_verify->body).at("valid") == false);

    // Completed session: any further submission is a replay conflict.
    auto replay = cli.Post(("/v1/session/" + id + "/answer").c_str(),
                           json{{"answer", "pfk1"}}.dump(),
                           "application/json");
    REQUIRE(replay);
    CHECK(replay->status == 409);
    json rbody = json::parse(replay->body);
    CHECK(rbody.at("verdict") == "reject");
    CHECK(rbody.at("reason") == "replay");

    auto done = cli.Get(("/v1/session/" + id).c_str());
    CHECK(json::parse(done->body).at("status") == "accepted");
}

TEST_CASE("http api rejects malformed requests") {
    LiveServer live;
    auto cli = live.client();

    // Body present but not a JSON object.
    auto bad_create = cli.Post("/v1/session", "[1,2]", "application/json");
    REQUIRE(bad_create);
    CHECK(bad_create->status == 400);

    auto bad_domain = cli.Post("/v1/session", json{{"domain", 7}}.dump(),
                               "application/json");
    REQUIRE(bad_domain);
    CHECK(bad_domain->status == 400);

    auto unknown_domain =
        cli.Post("/v1/session", json{{"domain", "astrology"}}.dump(),
                 "application/json");
    REQUIRE(unknown_domain);
    CHECK(unknown_domain->status == 400);

    auto created = cli.Post("/v1/session", "", "application/json");
    REQUIRE(created);
    const std::string id =
        json::parse(created->body).at("session_id").get<std::string>();

    auto no_answer = cli.Post(("/v1/session/" + id + "/answer").c_str(),
                              json{{"reply", "x"}}.dump(), "application/json");
    REQUIRE(no_answer);
    CHECK(no_answer->status == 400);

    auto not_json = cli.Post(("/v1/session/" + id + "/answer").c_str(),
                             "answer=x", "application/json");
    REQUIRE(not_json);
    CHECK(not_json->status == 400);

    auto ghost = cli.Post("/v1/session/abcdef0123456789/answer",
                          json{{"answer", "x"}}.dump(), "application/json");
    REQUIRE(ghost);
    CHECK(ghost->status == 404);

    auto ghost_status = cli.Get("/v1/session/abcdef0123456789");
    REQUIRE(ghost_status);
    CHECK(ghost_status->status == 404);

    auto bad_token_body = cli.Post("/v1/token/verify", "{}",
                                   "application/json");
    REQUIRE(bad_token_body);
    CHECK(bad_token_body->status == 400);
}

TEST_CASE("http prover target plays the live server") {
    LiveServer live;
    auto profile = prover::ProverProfile::oracle(live.corpus);
    prover::HttpTarget target("http://127.0.0.1:" + std::to_string(live.port));
    Rng rng(3);

    auto outcome = prover::run_session(profile, target, rng);
    CHECK(outcome.verdict.accept);
    CHECK(outcome.rounds_completed == 3);
    REQUIRE(outcome.pass_token.has_value());
    CHECK(live.service.verify_token(*outcome.pass_token));

    // Replay over the wire maps back to a replay verdict, not an error.
    auto reply = target.answer(outcome.transcript[0].payload.session_id, "x");
    REQUIRE(reply.verdict.has_value());
    CHECK(reply.verdict->reason == session::RejectReason::replay);
}

TEST_CASE("server key loading: env, file, then ephemeral") {
    const std::string hex =
        "00112233445566778899aabbccddeeff00112233445566778899aabbccddeeff";

    ::setenv("AGENTGATE_TEST_KEY", hex.c_str(), 1);
    auto from_env = server::load_server_key("AGENTGATE_TEST_KEY");
    CHECK(from_env == from_hex(hex));

    ::setenv("AGENTGATE_TEST_KEY", "not-hex", 1);
    CHECK_THROWS_AS(server::load_server_key("AGENTGATE_TEST_KEY"),
                    std::runtime_error);
    ::unsetenv("AGENTGATE_TEST_KEY");

    auto dir = std::filesystem::temp_directory_path();
    auto key_path = (dir / "agentgate_test_key.txt").string();
    {
        std::ofstream f(key_path);
        f << hex << "\n";
    }
    auto from_file =
        server::load_server_key("AGENTGATE_TEST_KEY", key_path);
    CHECK(from_file == from_hex(hex));
    std::filesystem::remove(key_path);

    CHECK_THROWS_AS(
        server::load_server_key("AGENTGATE_TEST_KEY",
                                (dir / "no_such_key_file").string()),
        std::runtime_error);

    auto eph1 = server::load_server_key("AGENTGATE_TEST_KEY");
    auto eph2 = server::load_server_key("AGENTGATE_TEST_KEY");
    CHECK(eph1.size() == 32);
    CHECK(eph2.size() == 32);
    CHECK(eph1 != eph2);
}

TEST_CASE("the audit log records the session's whole arc") {
    namespace fs = std::filesystem;
    fs::path log_path =
        fs::temp_directory_path() / "agentgate_events_test.log";
    fs::remove(log_path);

    auto c = corpus::load_corpus(kFixtures / "biochem_case.json", {}, nullptr);
    ManualClock clock;
    {
        EventLog log(log_path.string());
        server::VerifierService service(c, {}, test_key(), clock, 7, &log);

        auto p = service.start();
        service.observe_rtt(p.session_id, 0.05);
        auto out = service.answer(p.session_id, "wrong on purpose");
        REQUIRE(out.verdict.has_value());
        service.answer(p.session_id, "again");  // replay
    }

    auto entries = EventLog::read_all(log_path.string());
    REQUIRE(entries.size() == 4);
    CHECK(entries[0].event == "created");
    CHECK(entries[1].event == "rtt_recorded");
    CHECK(entries[2].event == "rejected");
    CHECK(entries[3].event == "replay_rejected");
    const std::string& sid = entries[0].session_id;
    for (const auto& e : entries) {
        CHECK(e.session_id == sid);
        CHECK(e.unix_ms > 0);
    }
    fs::remove(log_path);
}
