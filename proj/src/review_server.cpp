// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "progbench/review_server.hpp"

#include <unistd.h>

#include <chrono>
#include <ctime>

#include <fmt/format.h>
#include <httplib.h>

#include "progbench/error.hpp"
#include "progbench/io.hpp"

namespace progbench {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t secs = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    return fmt::format("{}.{:03d}Z", buf, ms);
}

ReviewQueue::ReviewQueue(std::vector<ReviewCandidate> candidates, const std::filesystem::path& decisions_path)
    : candidates_(std::move(candidates)) {
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
        if (!index_.emplace(candidates_[i].id, i).second) {
            throw Error(ErrorCode::PreconditionFailed, "duplicate candidate id " + candidates_[i].id);
        }
    }
    if (std::filesystem::exists(decisions_path)) {
        for (const auto& [id, v] : latest_verdicts(read_jsonl_as<ReviewDecision>(decisions_path))) {
            if (index_.count(id) != 0) verdicts_[id] = v;
        }
    } else if (decisions_path.has_parent_path()) {
        std::filesystem::create_directories(decisions_path.parent_path());
    }
    log_ = std::fopen(decisions_path.c_str(), "ab");
    if (log_ == nullptr) throw Error(ErrorCode::IoError, "cannot open decision log " + decisions_path.string());
}

ReviewQueue::~ReviewQueue() {
    if (log_ != nullptr) std::fclose(log_);
}

std::optional<ReviewCandidate> ReviewQueue::next() const {
    std::lock_guard lock(mu_);
    for (const auto& c : candidates_) {
        if (verdicts_.count(c.id) == 0) return c;
    }
    return std::nullopt;
}

const ReviewCandidate* ReviewQueue::find(const std::string& id) const {
    const auto it = index_.find(id);
    return it == index_.end() ? nullptr : &candidates_[it->second];
}

std::optional<Verdict> ReviewQueue::decide(const ReviewDecision& d) {
    if (index_.count(d.candidate_id) == 0) throw Error(ErrorCode::PreconditionFailed, "unknown candidate " + d.candidate_id);
    std::lock_guard lock(mu_);
    const std::string line = json(d).dump() + "\n";
    if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() || std::fflush(log_) != 0 ||
        ::fsync(::fileno(log_)) != 0) {
        throw Error(ErrorCode::IoError, "decision log write failed");
    }
    std::optional<Verdict> previous;
    if (auto it = verdicts_.find(d.candidate_id); it != verdicts_.end()) previous = it->second;
    verdicts_[d.candidate_id] = d.verdict;
    return previous;
}

ReviewProgress ReviewQueue::progress() const {
    std::lock_guard lock(mu_);
    ReviewProgress p;
    p.decided = static_cast<int>(verdicts_.size());
    p.remaining = static_cast<int>(candidates_.size()) - p.decided;
    if (p.decided > 0) {
        int kept = 0;
        for (const auto& [id, v] : verdicts_) kept += v == Verdict::keep ? 1 : 0;
        p.keep_rate = static_cast<double>(kept) / p.decided;
    }
    return p;
}

json to_json(const ReviewProgress& p) {
    return json{{"decided", p.decided},
                {"remaining", p.remaining},
                {"keep_rate", p.keep_rate ? json(*p.keep_rate) : json(nullptr)}};
}

namespace {

void reply_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& reason) {
    reply_json(res, status, json{{"error", reason}});
}

json candidate_view(const ReviewCandidate& c) {
    return json{{"id", c.id},
                {"original_image_ref", c.original_image_ref},
                {"edited_image_ref", c.edited_image_ref},
                {"task_goal", c.task_goal},
                {"steps", c.steps},
                {"strategy", c.strategy},
                {"edit_prompt", c.edit_prompt}};
}

std::string image_mime(const std::filesystem::path& p) {
    const std::string ext = p.extension().string();
    if (ext == ".jpg" || ext == ".jpeg" || ext == ".JPG" || ext == ".JPEG") return "image/jpeg";
    if (ext == ".webp") return "image/webp";
    if (ext == ".gif") return "image/gif";
    return "image/png";
}

}  // namespace

ReviewServer::ReviewServer(ReviewServerConfig cfg) : cfg_(std::move(cfg)), server_(std::make_unique<httplib::Server>()) {
    if (cfg_.image_root.empty()) cfg_.image_root = cfg_.pending_path.parent_path();
    queue_ = std::make_unique<ReviewQueue>(read_jsonl_as<ReviewCandidate>(cfg_.pending_path), cfg_.decisions_path);

    if (!cfg_.token.empty()) {
        server_->set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            if (req.path.rfind("/api/", 0) != 0) return httplib::Server::HandlerResponse::Unhandled;
            if (req.get_header_value("Authorization") == "Bearer " + cfg_.token) {
                return httplib::Server::HandlerResponse::Unhandled;
            }
            reply_error(res, 401, "missing or wrong token");
            return httplib::Server::HandlerResponse::Handled;
        });
    }

    server_->Get("/api/candidates/next", [this](const httplib::Request&, httplib::Response& res) {
        if (auto c = queue_->next()) {
            reply_json(res, 200, candidate_view(*c));
        } else {
            res.status = 204;
        }
    });

    server_->Get(R"(/api/candidates/([^/]+)/image/(original|edited))",
                 [this](const httplib::Request& req, httplib::Response& res) {
                     const ReviewCandidate* c = queue_->find(req.matches[1]);
                     if (c == nullptr) return reply_error(res, 404, "unknown candidate");
                     std::filesystem::path path(req.matches[2] == "original" ? c->original_image_ref
                                                                             : c->edited_image_ref);
                     if (path.is_relative()) path = cfg_.image_root / path;
                     std::string bytes;
                     try {
                         bytes = read_text_file(path);
                     } catch (const Error&) {
                         return reply_error(res, 404, "image not found");
                     }
                     res.status = 200;
                     res.set_content(bytes, image_mime(path));
                 });

    server_->Post(R"(/api/candidates/([^/]+)/decision)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        if (queue_->find(id) == nullptr) return reply_error(res, 400, "unknown candidate id '" + id + "'");
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception&) {
            return reply_error(res, 400, "body is not JSON");
        }
        if (!body.is_object()) return reply_error(res, 400, "body must be a JSON object");
        const auto verdict = body.find("verdict");
        if (verdict == body.end() || !verdict->is_string() || (*verdict != "keep" && *verdict != "discard")) {
            return reply_error(res, 400, "verdict must be \"keep\" or \"discard\"");
        }
        const auto annotator = body.find("annotator");
        if (annotator == body.end() || !annotator->is_string() || annotator->get<std::string>().empty()) {
            return reply_error(res, 400, "annotator must be a non-empty string");
        }
        ReviewDecision d;
        d.candidate_id = id;
        d.verdict = *verdict == "keep" ? Verdict::keep : Verdict::discard;
        d.annotator = annotator->get<std::string>();
        d.timestamp = utc_timestamp();
        std::optional<Verdict> previous;
        try {
            previous = queue_->decide(d);
        } catch (const Error& e) {
            return reply_error(res, 500, e.what());
        }
        json out{{"candidate_id", id}, {"verdict", *verdict}, {"recorded_at", d.timestamp}};
        if (previous) {
            out["superseded"] = *previous == Verdict::keep ? "keep" : "discard";
            if (*previous != d.verdict) out["conflict"] = "later verdict replaces an earlier different one";
        }
        reply_json(res, 200, out);
    });

    server_->Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
        reply_json(res, 200, to_json(queue_->progress()));
    });

    if (!cfg_.static_dir.empty() && !server_->set_mount_point("/", cfg_.static_dir.string())) {
        throw Error(ErrorCode::IoError, "static dir not found: " + cfg_.static_dir.string());
    }
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound <= 0) throw Error(ErrorCode::IoError, fmt::format("cannot bind {}:{}", host, port));
    return bound;
}

void ReviewServer::serve() { server_->listen_after_bind(); }

void ReviewServer::stop() {
    if (server_) server_->stop();
}

}  // namespace progbench
