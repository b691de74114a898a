// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <httplib.h>

#include <thread>

#include "progbench/io.hpp"
#include "progbench/review_server.hpp"
#include "support.hpp"

using namespace progbench;

namespace {

std::vector<ReviewCandidate> candidates(int n) {
    SamplerConfig cfg;
    cfg.modalities = {Modality::vision};
    std::vector<double> progress;
    for (int i = 0; i <= n; ++i) progress.push_back(100.0 * i / n);
    std::vector<ReviewCandidate> out;
    for (const auto& inst : build_instances(testing::make_trajectory("rv", progress), cfg)) {
        if (static_cast<int>(out.size()) == n) break;
        out.push_back(make_unanswerable_vision(inst, "edited/" + inst.instance_id + ".png", {"Color Change", "make it blue"}));
    }
    return out;
}

struct Harness {
    testing::TempDir dir;
    std::vector<ReviewCandidate> pending;
    std::unique_ptr<ReviewServer> server;
    std::thread thread;
    int port = 0;

    explicit Harness(int n, std::string token = "") : pending(candidates(n)) {
        std::vector<json> rows(pending.begin(), pending.end());
        write_jsonl(dir / "pending.jsonl", rows);
        std::filesystem::create_directories(dir / "edited");
        write_text_file(dir / pending[0].edited_image_ref, "EDITED");
        start(std::move(token));
    }
    ~Harness() { stop(); }

    void start(std::string token = "") {
        ReviewServerConfig cfg;
        cfg.pending_path = dir / "pending.jsonl";
        cfg.decisions_path = dir / "decisions.jsonl";
        cfg.token = std::move(token);
        server = std::make_unique<ReviewServer>(cfg);
        port = server->bind("127.0.0.1", 0);
        thread = std::thread([this] { server->serve(); });
    }
    void stop() {
        if (server) server->stop();
        if (thread.joinable()) thread.join();
        server.reset();
    }
    httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

namespace fs = std::filesystem;

httplib::Result decide(httplib::Client& c, const std::string& id, const std::string& verdict) {
    return c.Post("/api/candidates/" + id + "/decision", json{{"verdict", verdict}, {"annotator", "ann"}}.dump(),
                  "application/json");
}

}  // namespace

TEST_SUITE("review_server") {
    TEST_CASE("fresh queue serves the first candidate") {
        Harness h(3);
        auto c = h.client();
        auto res = c.Get("/api/candidates/next");
        REQUIRE(res);
        CHECK(res->status == 200);
        const json body = json::parse(res->body);
        CHECK(body.at("id") == h.pending[0].id);
        CHECK(body.at("strategy") == "Color Change");
        CHECK(body.at("steps").size() == 4);
        for (const char* key : {"original_image_ref", "edited_image_ref", "task_goal", "edit_prompt"}) CHECK(body.contains(key));
    }

    TEST_CASE("a decision advances the queue and is persisted") {
        Harness h(3);
        auto c = h.client();
        auto res = decide(c, h.pending[0].id, "keep");
        REQUIRE(res);
        CHECK(res->status == 200);
        CHECK(json::parse(c.Get("/api/candidates/next")->body).at("id") == h.pending[1].id);
        const auto log = read_jsonl_as<ReviewDecision>(h.dir / "decisions.jsonl");
        REQUIRE(log.size() == 1);
        CHECK(log[0].candidate_id == h.pending[0].id);
        CHECK(log[0].verdict == Verdict::keep);
        CHECK(log[0].annotator == "ann");
    }

    TEST_CASE("bad requests get 400") {
        Harness h(2);
        auto c = h.client();
        CHECK(decide(c, "nope", "keep")->status == 400);
        CHECK(decide(c, h.pending[0].id, "maybe")->status == 400);
        CHECK(c.Post("/api/candidates/" + h.pending[0].id + "/decision", "{not json", "application/json")->status == 400);
        CHECK(c.Post("/api/candidates/" + h.pending[0].id + "/decision", R"({"verdict":"keep"})", "application/json")->status ==
              400);
        const bool recorded = fs::exists(h.dir / "decisions.jsonl") && !read_text_file(h.dir / "decisions.jsonl").empty();
        CHECK_FALSE(recorded);
    }

    TEST_CASE("images are served from the pending file's directory") {
        Harness h(2);
        auto c = h.client();
        auto res = c.Get("/api/candidates/" + h.pending[0].id + "/image/edited");
        REQUIRE(res);
        CHECK(res->status == 200);
        CHECK(res->body == "EDITED");
        CHECK(res->get_header_value("Content-Type") == "image/png");
        CHECK(c.Get("/api/candidates/" + h.pending[1].id + "/image/original")->status == 404);
        CHECK(c.Get("/api/candidates/unknown/image/original")->status == 404);
    }

    TEST_CASE("deciding every candidate empties the queue; restart re-serves nothing") {
        Harness h(20);
        auto c = h.client();
        for (int i = 0; i < 20; ++i) {
            auto next = c.Get("/api/candidates/next");
            REQUIRE(next->status == 200);
            const std::string id = json::parse(next->body).at("id");
            CHECK(decide(c, id, i % 4 == 0 ? "keep" : "discard")->status == 200);
        }
        CHECK(c.Get("/api/candidates/next")->status == 204);
        json progress = json::parse(c.Get("/api/progress")->body);
        CHECK(progress.at("decided") == 20);
        CHECK(progress.at("remaining") == 0);
        CHECK(progress.at("keep_rate").get<double>() == doctest::Approx(0.25));
        CHECK(read_jsonl(h.dir / "decisions.jsonl").size() == 20);

        h.stop();
        h.start();
        auto c2 = h.client();
        CHECK(c2.Get("/api/candidates/next")->status == 204);
        CHECK(json::parse(c2.Get("/api/progress")->body).at("remaining") == 0);
    }

    TEST_CASE("restart mid-session resumes after the decided prefix") {
        Harness h(5);
        {
            auto c = h.client();
            decide(c, h.pending[0].id, "discard");
            decide(c, h.pending[1].id, "keep");
        }
        h.stop();
        h.start();
        auto c = h.client();
        CHECK(json::parse(c.Get("/api/candidates/next")->body).at("id") == h.pending[2].id);
        const json p = json::parse(c.Get("/api/progress")->body);
        CHECK(p.at("decided") == 2);
        CHECK(p.at("remaining") == 3);
    }

    TEST_CASE("a later verdict supersedes an earlier one") {
        Harness h(2);
        auto c = h.client();
        decide(c, h.pending[0].id, "keep");
        auto res = decide(c, h.pending[0].id, "discard");
        const json body = json::parse(res->body);
        CHECK(body.at("superseded") == "keep");
        CHECK(body.contains("conflict"));
        CHECK(json::parse(c.Get("/api/progress")->body).at("keep_rate") == 0.0);
    }

    TEST_CASE("the token guards the API") {
        Harness h(1, "t0k");
        auto c = h.client();
        CHECK(c.Get("/api/progress")->status == 401);
        c.set_bearer_token_auth("t0k");
        CHECK(c.Get("/api/progress")->status == 200);
    }

    TEST_CASE("empty progress has no keep rate") {
        Harness h(1);
        auto c = h.client();
        CHECK(json::parse(c.Get("/api/progress")->body).at("keep_rate").is_null());
    }
}
