// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <map>

#include "progbench/error.hpp"
#include "progbench/io.hpp"
#include "progbench/mock_endpoint.hpp"
#include "progbench/model_client.hpp"
#include "support.hpp"

using namespace progbench;

namespace {

std::vector<PromptBundle> bundles(int n) {
    std::vector<PromptBundle> out;
    for (int i = 0; i < n; ++i) {
        PromptBundle b;
        b.text = fmt::format("prompt {} <image> end", i);
        b.image_slots = {{b.text.find("<image>"), fmt::format("img{}.png", i)}};
        b.instance_id = fmt::format("inst{}", i);
        out.push_back(b);
    }
    return out;
}

EndpointConfig fast_config(const MockEndpoint& server) {
    EndpointConfig cfg;
    cfg.base_url = server.base_url();
    cfg.image_transport = ImageTransport::url;
    cfg.backoff_initial_s = 0.001;
    cfg.backoff_max_s = 0.002;
    cfg.request_timeout_s = 5;
    return cfg;
}

MockReply echo(const json&, const std::string& id) { return {200, chat_completion_body("answer for " + id)}; }

}  // namespace

TEST_SUITE("model_client") {
    TEST_CASE("request body splits text around image slots") {
        EndpointConfig cfg;
        cfg.image_transport = ImageTransport::url;
        cfg.model_name = "m";
        const auto b = bundles(1).front();
        const json req = build_chat_request(b, cfg);
        CHECK(req.at("model") == "m");
        CHECK(req.at("temperature") == 0.6);
        CHECK(req.at("top_p") == 0.9);
        const json& content = req.at("messages").at(0).at("content");
        REQUIRE(content.size() == 3);
        CHECK(content[0].at("text") == "prompt 0 ");
        CHECK(content[1].at("image_url").at("url") == "img0.png");
        CHECK(content[2].at("text") == " end");
    }

    TEST_CASE("base64 transport inlines the file and fails on unreadable images") {
        testing::TempDir dir;
        write_text_file(dir / "img0.png", "PNGDATA");
        EndpointConfig cfg;
        cfg.image_root = dir.path();
        const json req = build_chat_request(bundles(1).front(), cfg);
        CHECK(req["messages"][0]["content"][1]["image_url"]["url"] == "data:image/png;base64," + base64_encode("PNGDATA"));
        cfg.image_root = dir / "missing";
        CHECK_THROWS_AS(build_chat_request(bundles(1).front(), cfg), Error);
    }

    TEST_CASE("results come back in input order") {
        MockEndpoint server(echo);
        const auto out = run_batch(bundles(3), fast_config(server));
        REQUIRE(out.size() == 3);
        for (int i = 0; i < 3; ++i) {
            CHECK(out[i].instance_id == fmt::format("inst{}", i));
            CHECK(out[i].response_text == fmt::format("answer for inst{}", i));
            CHECK(out[i].attempt_count == 1);
            CHECK_FALSE(out[i].error.has_value());
        }
        CHECK(server.request_count() == 3);
    }

    TEST_CASE("transient failures are retried") {
        std::atomic<int> calls{0};
        MockEndpoint server([&](const json& r, const std::string& id) {
            return ++calls <= 2 ? MockReply{503, "{}"} : echo(r, id);
        });
        auto cfg = fast_config(server);
        cfg.max_in_flight = 1;
        const auto out = run_batch(bundles(1), cfg);
        CHECK(out[0].attempt_count == 3);
        CHECK(out[0].response_text.has_value());
    }

    TEST_CASE("retries stop after max_retries and client errors are terminal") {
        MockEndpoint busy([](const json&, const std::string&) { return MockReply{429, "{}"}; });
        auto cfg = fast_config(busy);
        cfg.max_retries = 2;
        const auto out = run_batch(bundles(1), cfg);
        CHECK(out[0].attempt_count == 3);
        CHECK(out[0].error == "HTTP 429");
        CHECK_FALSE(out[0].response_text.has_value());

        MockEndpoint bad([](const json&, const std::string&) { return MockReply{400, "{}"}; });
        const auto out2 = run_batch(bundles(1), fast_config(bad));
        CHECK(out2[0].attempt_count == 1);
        CHECK(out2[0].error == "HTTP 400");
    }

    TEST_CASE("non-JSON bodies are a terminal BadResponse") {
        MockEndpoint server([](const json&, const std::string&) { return MockReply{200, "<html>"}; });
        const auto out = run_batch(bundles(1), fast_config(server));
        REQUIRE(out[0].error.has_value());
        CHECK(out[0].error->rfind("BadResponse", 0) == 0);
    }

    TEST_CASE("unreachable endpoint is a transport error, not an exception") {
        EndpointConfig cfg;
        cfg.base_url = "http://127.0.0.1:1/v1";
        cfg.max_retries = 1;
        cfg.backoff_initial_s = 0.001;
        cfg.image_transport = ImageTransport::url;
        const auto out = run_batch(bundles(1), cfg);
        REQUIRE(out[0].error.has_value());
        CHECK(out[0].error->rfind("TransportError", 0) == 0);
        CHECK(out[0].attempt_count == 2);
    }

    TEST_CASE("api key comes from the environment") {
        ::setenv("PROGBENCH_TEST_KEY", "sekrit", 1);
        MockEndpoint server(echo);
        auto cfg = fast_config(server);
        cfg.api_key_env = "PROGBENCH_TEST_KEY";
        run_batch(bundles(1), cfg);
        CHECK(server.headers_of_last_request().at("Authorization") == "Bearer sekrit");
        CHECK(server.headers_of_last_request().at("X-Instance-Id") == "inst0");
        ::unsetenv("PROGBENCH_TEST_KEY");
    }

    TEST_CASE("a checkpoint skips completed fingerprints") {
        testing::TempDir dir;
        const auto ckpt = dir / "ckpt.jsonl";
        {
            MockEndpoint server(echo);
            run_batch(bundles(2), fast_config(server), {ckpt, {}});
        }
        MockEndpoint server(echo);
        const auto out = run_batch(bundles(4), fast_config(server), {ckpt, {}});
        CHECK(server.request_count() == 2);
        CHECK(server.instance_ids() == std::vector<std::string>{"inst2", "inst3"});
        REQUIRE(out.size() == 4);
        CHECK(out[0].response_text == "answer for inst0");
        CHECK(load_checkpoint(ckpt).size() == 4);

        MockEndpoint again(echo);
        run_batch(bundles(4), fast_config(again), {ckpt, {}});
        CHECK(again.request_count() == 0);
    }

    TEST_CASE("torn checkpoint lines are ignored") {
        testing::TempDir dir;
        RawResponse r;
        r.instance_id = "a";
        r.response_text = "x";
        r.request_fingerprint = "fp";
        write_text_file(dir / "c.jsonl", json(r).dump() + "\n{\"instance_id\": \"b\", \"resp");
        CHECK(load_checkpoint(dir / "c.jsonl").size() == 1);
    }

    TEST_CASE("fingerprint depends on template, model and instance") {
        const auto a = request_fingerprint("vision_infer", "m", "i");
        CHECK(a.size() == 64);
        CHECK(a != request_fingerprint("direct", "m", "i"));
        CHECK(a != request_fingerprint("vision_infer", "n", "i"));
        CHECK(a != request_fingerprint("vision_infer", "m", "j"));
    }

    TEST_CASE("config validation") {
        EndpointConfig cfg;
        cfg.top_p = 0;
        CHECK_THROWS_AS(cfg.validate(), Error);
        cfg = {};
        cfg.base_url = "localhost:8000";
        CHECK_THROWS_AS(cfg.validate(), Error);
        cfg = {};
        cfg.max_in_flight = 0;
        CHECK_THROWS_AS(cfg.validate(), Error);
    }

    TEST_CASE("extract_response_text handles string and part-list content") {
        CHECK(extract_response_text(json::parse(chat_completion_body("hi"))) == "hi");
        const json parts = {{"choices", {{{"message", {{"content", {{{"type", "text"}, {"text", "a"}}, {{"type", "text"}, {"text", "b"}}}}}}}}}};
        CHECK(extract_response_text(parts) == "ab");
        CHECK_FALSE(extract_response_text(json::object()).has_value());
    }
}
