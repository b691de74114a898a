// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

// HTTP service for the keep/discard review of edited observations.
//
//   GET  /api/candidates/next                      candidate JSON, or 204 when none remain
//   GET  /api/candidates/{id}/image/{original|edited}
//   POST /api/candidates/{id}/decision             {"verdict": "keep"|"discard", "annotator": "..."}
//   GET  /api/progress                             {"decided", "remaining", "keep_rate"}
//
// Every decision is appended to the log and synced to disk before the reply.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "progbench/sampler.hpp"

namespace httplib {
class Server;
}

namespace progbench {

struct ReviewServerConfig {
    std::filesystem::path pending_path;
    std::filesystem::path decisions_path;
    std::filesystem::path image_root;  // base for relative image refs; defaults to the pending file's directory
    std::filesystem::path static_dir;  // optional UI assets served at /
    std::string token;                 // when set, /api requires "Authorization: Bearer <token>"
};

struct ReviewProgress {
    int decided = 0;
    int remaining = 0;
    std::optional<double> keep_rate;  // kept / decided
};

/// Queue state shared by the HTTP handlers; usable directly in tests.
class ReviewQueue {
public:
    ReviewQueue(std::vector<ReviewCandidate> candidates, const std::filesystem::path& decisions_path);
    ~ReviewQueue();
    ReviewQueue(const ReviewQueue&) = delete;
    ReviewQueue& operator=(const ReviewQueue&) = delete;

    /// First candidate, in file order, without a verdict.
    std::optional<ReviewCandidate> next() const;
    const ReviewCandidate* find(const std::string& id) const;
    /// Appends and syncs the event; returns the verdict it superseded, if any.
    /// Throws Error(PreconditionFailed) for an unknown candidate id.
    std::optional<Verdict> decide(const ReviewDecision& d);
    ReviewProgress progress() const;

private:
    std::vector<ReviewCandidate> candidates_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, Verdict> verdicts_;
    std::FILE* log_ = nullptr;
    mutable std::mutex mu_;
};

json to_json(const ReviewProgress& p);

class ReviewServer {
public:
    explicit ReviewServer(ReviewServerConfig cfg);
    ~ReviewServer();
    ReviewServer(const ReviewServer&) = delete;
    ReviewServer& operator=(const ReviewServer&) = delete;

    /// Binds host:port (port 0 picks a free one) and returns the bound port.
    /// Throws Error(IoError) when the bind fails.
    int bind(const std::string& host, int port);
    /// Serves until stop() is called. bind() must have succeeded.
    void serve();
    void stop();

    ReviewQueue& queue() { return *queue_; }

private:
    ReviewServerConfig cfg_;
    std::unique_ptr<ReviewQueue> queue_;
    std::unique_ptr<httplib::Server> server_;
};

/// ISO-8601 UTC timestamp with millisecond precision.
std::string utc_timestamp();

}  // namespace progbench
