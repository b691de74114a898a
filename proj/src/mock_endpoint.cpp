// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "progbench/mock_endpoint.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>
#include <httplib.h>

#include "progbench/error.hpp"
#include "progbench/io.hpp"
#include "progbench/response_parser.hpp"

namespace progbench {

std::string chat_completion_body(std::string_view content) {
    const json body{{"id", "mock"},
                    {"object", "chat.completion"},
                    {"choices", json::array({{{"index", 0},
                                              {"message", {{"role", "assistant"}, {"content", content}}},
                                              {"finish_reason", "stop"}}})}};
    return body.dump();
}

MockEndpoint::MockEndpoint(MockResponder responder)
    : server_(std::make_unique<httplib::Server>()), responder_(std::move(responder)) {
    server_->Post(R"(/v1/chat/completions)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.get_header_value("X-Instance-Id");
        {
            std::lock_guard lock(mu_);
            ids_.push_back(id);
            last_headers_.clear();
            for (const auto& [k, v] : req.headers) last_headers_[k] = v;
        }
        json request;
        try {
            request = json::parse(req.body);
        } catch (const json::exception&) {
            res.status = 400;
            res.set_content(R"({"error":"bad json"})", "application/json");
            return;
        }
        const MockReply reply = responder_(request, id);
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    });
    port_ = server_->bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw Error(ErrorCode::IoError, "mock endpoint could not bind");
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

MockEndpoint::~MockEndpoint() {
    server_->stop();
    if (thread_.joinable()) thread_.join();
}

std::string MockEndpoint::base_url() const { return fmt::format("http://127.0.0.1:{}/v1", port_); }

int MockEndpoint::request_count() const {
    std::lock_guard lock(mu_);
    return static_cast<int>(ids_.size());
}

std::vector<std::string> MockEndpoint::instance_ids() const {
    std::lock_guard lock(mu_);
    return ids_;
}

std::map<std::string, std::string> MockEndpoint::headers_of_last_request() const {
    std::lock_guard lock(mu_);
    return last_headers_;
}

namespace {

// Uniform in [0, 1) from the hash of (seed, instance, salt).
double hash_unit(std::uint64_t seed, std::string_view id, std::string_view salt) {
    const std::uint64_t h = stable_hash64(fmt::format("{}|{}|{}", seed, id, salt));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

std::string simulated_response(const EvalInstance& inst, std::uint64_t seed, Schema schema) {
    ParsedPrediction p;
    const bool abstain = inst.answerable ? hash_unit(seed, inst.instance_id, "abstain") < 0.05
                                         : hash_unit(seed, inst.instance_id, "abstain") < 0.8;
    if (abstain || !inst.gt_progress.has_value()) {
        p.ref_think = "The observation does not match any demonstrated step.";
        p.ref = RefAnswer::abstain();
        p.score_think = "No progress estimate is possible.";
        p.score = ScoreAnswer::abstain();
        return render_prediction(p, schema);
    }
    const int n = std::max(1, inst.n_steps());
    int ref = inst.gt_ref_index.has_value() ? inst.gt_ref_index.value() : 1;
    if (hash_unit(seed, inst.instance_id, "ref") < 0.2) ref = std::clamp(ref + 1, 1, n);
    const double noise = (hash_unit(seed, inst.instance_id, "score") - 0.5) * 30.0;
    const double score = std::clamp(std::round((inst.gt_progress.value() + noise) * 10.0) / 10.0, 0.0, 100.0);
    p.ref_think = fmt::format("The observation most resembles step {}.", ref);
    p.ref = RefAnswer::of(ref);
    p.score_think = "Interpolating between neighbouring steps.";
    p.score = ScoreAnswer::of(score);
    return render_prediction(p, schema);
}

MockResponder simulated_responder(const std::vector<EvalInstance>& instances, std::uint64_t seed, Schema schema,
                                  int delay_ms) {
    auto by_id = std::make_shared<std::map<std::string, EvalInstance>>();
    for (const auto& inst : instances) by_id->emplace(inst.instance_id, inst);
    return [by_id, seed, schema, delay_ms](const json&, const std::string& id) {
        if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
        const auto it = by_id->find(id);
        if (it == by_id->end()) return MockReply{400, R"({"error":"unknown instance"})"};
        return MockReply{200, chat_completion_body(simulated_response(it->second, seed, schema))};
    };
}

}  // namespace progbench
