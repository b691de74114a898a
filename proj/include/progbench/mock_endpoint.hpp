// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

// In-process chat-completions server for tests and offline runs. A responder
// callback decides every reply; the server records request order.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "progbench/core.hpp"
#include "progbench/response_parser.hpp"

namespace httplib {
class Server;
}

namespace progbench {

struct MockReply {
    int status = 200;
    std::string body;  // raw response body
};

/// Called once per POST with the parsed request body and its X-Instance-Id.
using MockResponder = std::function<MockReply(const json& request, const std::string& instance_id)>;

/// Chat-completions body carrying `content` as the assistant message.
std::string chat_completion_body(std::string_view content);

class MockEndpoint {
public:
    /// Binds 127.0.0.1 on an ephemeral port and starts serving.
    explicit MockEndpoint(MockResponder responder);
    ~MockEndpoint();
    MockEndpoint(const MockEndpoint&) = delete;
    MockEndpoint& operator=(const MockEndpoint&) = delete;

    int port() const { return port_; }
    std::string base_url() const;  // "http://127.0.0.1:<port>/v1"
    int request_count() const;
    std::vector<std::string> instance_ids() const;  // in arrival order
    std::map<std::string, std::string> headers_of_last_request() const;

private:
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
    MockResponder responder_;
    mutable std::mutex mu_;
    std::vector<std::string> ids_;
    std::map<std::string, std::string> last_headers_;
};

/// Deterministic stand-in for a model: answers near the ground truth with
/// hash-derived noise and abstains on most unanswerable instances. Replies are
/// a pure function of (seed, instance).
std::string simulated_response(const EvalInstance& inst, std::uint64_t seed, Schema schema = Schema::full);

/// Responder backed by simulated_response for the given instances; unknown ids
/// get HTTP 400. delay_ms stalls each reply (for interruption tests).
MockResponder simulated_responder(const std::vector<EvalInstance>& instances, std::uint64_t seed,
                                  Schema schema = Schema::full, int delay_ms = 0);

}  // namespace progbench
