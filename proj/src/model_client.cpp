// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "progbench/model_client.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "progbench/error.hpp"
#include "progbench/io.hpp"

namespace progbench {

namespace {

struct UrlParts {
    std::string origin;  // scheme://host[:port]
    std::string path;    // path prefix without trailing slash
};

UrlParts split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::ConfigInvalid, "base_url needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    UrlParts p;
    p.origin = url.substr(0, path_start);
    p.path = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!p.path.empty() && p.path.back() == '/') p.path.pop_back();
    return p;
}

std::string mime_for(const std::string& ref) {
    std::string ext = std::filesystem::path(ref).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".webp") return "image/webp";
    if (ext == ".gif") return "image/gif";
    return "image/png";
}

bool is_remote(const std::string& ref) {
    return ref.rfind("http://", 0) == 0 || ref.rfind("https://", 0) == 0 || ref.rfind("data:", 0) == 0;
}

json image_part(const std::string& ref, const EndpointConfig& cfg) {
    std::string url;
    if (cfg.image_transport == ImageTransport::url || is_remote(ref)) {
        url = ref;
    } else {
        std::filesystem::path path(ref);
        if (path.is_relative() && !cfg.image_root.empty()) path = cfg.image_root / path;
        std::string bytes;
        try {
            bytes = read_text_file(path);
        } catch (const Error&) {
            throw Error(ErrorCode::IoError, "image unreadable: " + path.string());
        }
        url = "data:" + mime_for(ref) + ";base64," + base64_encode(bytes);
    }
    return json{{"type", "image_url"}, {"image_url", {{"url", url}}}};
}

bool transient_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

// Serializes journal appends; each record is flushed and synced before the
// call returns.
class Journal {
public:
    explicit Journal(const std::filesystem::path& path) {
        if (path.empty()) return;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        file_ = std::fopen(path.c_str(), "ab");
        if (file_ == nullptr) throw Error(ErrorCode::IoError, "cannot open checkpoint " + path.string());
    }
    ~Journal() {
        if (file_ != nullptr) std::fclose(file_);
    }
    Journal(const Journal&) = delete;
    Journal& operator=(const Journal&) = delete;

    void append(const RawResponse& r) {
        if (file_ == nullptr) return;
        const std::string line = json(r).dump() + "\n";
        std::fwrite(line.data(), 1, line.size(), file_);
        std::fflush(file_);
        ::fsync(::fileno(file_));
    }

private:
    std::FILE* file_ = nullptr;
};

}  // namespace

ImageTransport image_transport_from_string(std::string_view s) {
    if (s == "base64_inline" || s == "base64") return ImageTransport::base64_inline;
    if (s == "url") return ImageTransport::url;
    throw Error(ErrorCode::ConfigInvalid, "unknown image transport '" + std::string(s) + "'");
}

std::string_view to_string(ImageTransport t) { return t == ImageTransport::url ? "url" : "base64_inline"; }

void EndpointConfig::validate() const {
    if (base_url.empty()) throw Error(ErrorCode::ConfigInvalid, "base_url is empty");
    split_url(base_url);
    if (temperature < 0.0) throw Error(ErrorCode::ConfigInvalid, "temperature must be >= 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw Error(ErrorCode::ConfigInvalid, "top_p must lie in (0, 1]");
    if (max_in_flight < 1) throw Error(ErrorCode::ConfigInvalid, "max_in_flight must be >= 1");
    if (max_retries < 0) throw Error(ErrorCode::ConfigInvalid, "max_retries must be >= 0");
    if (max_tokens < 1) throw Error(ErrorCode::ConfigInvalid, "max_tokens must be >= 1");
    if (!(request_timeout_s > 0.0)) throw Error(ErrorCode::ConfigInvalid, "request_timeout must be > 0");
}

void to_json(json& j, const RawResponse& r) {
    j = json{{"instance_id", r.instance_id},
             {"template_id", r.template_id},
             {"response_text", r.response_text ? json(*r.response_text) : json(nullptr)},
             {"latency_ms", r.latency_ms},
             {"attempt_count", r.attempt_count},
             {"error", r.error ? json(*r.error) : json(nullptr)},
             {"request_fingerprint", r.request_fingerprint}};
}

void from_json(const json& j, RawResponse& r) {
    j.at("instance_id").get_to(r.instance_id);
    r.template_id = j.value("template_id", std::string{});
    r.response_text.reset();
    r.error.reset();
    if (auto it = j.find("response_text"); it != j.end() && it->is_string()) r.response_text = it->get<std::string>();
    if (auto it = j.find("error"); it != j.end() && it->is_string()) r.error = it->get<std::string>();
    r.latency_ms = j.value("latency_ms", 0LL);
    r.attempt_count = j.value("attempt_count", 0);
    r.request_fingerprint = j.value("request_fingerprint", std::string{});
}

std::string request_fingerprint(std::string_view template_id, std::string_view model, std::string_view instance_id) {
    return sha256_hex(fmt::format("{}\n{}\n{}", template_id, model, instance_id));
}

json build_chat_request(const PromptBundle& bundle, const EndpointConfig& cfg) {
    json content = json::array();
    std::size_t cursor = 0;
    for (const ImageSlot& slot : bundle.image_slots) {
        if (slot.offset > cursor) content.push_back({{"type", "text"}, {"text", bundle.text.substr(cursor, slot.offset - cursor)}});
        content.push_back(image_part(slot.frame_ref, cfg));
        cursor = slot.offset + kImageMarker.size();
    }
    if (cursor < bundle.text.size()) content.push_back({{"type", "text"}, {"text", bundle.text.substr(cursor)}});
    return json{{"model", cfg.model_name},
                {"messages", json::array({{{"role", "user"}, {"content", content}}})},
                {"temperature", cfg.temperature},
                {"top_p", cfg.top_p},
                {"max_tokens", cfg.max_tokens}};
}

std::optional<std::string> extract_response_text(const json& body) {
    const auto choices = body.find("choices");
    if (choices == body.end() || !choices->is_array() || choices->empty()) return std::nullopt;
    const json& first = choices->front();
    const auto msg = first.find("message");
    if (msg == first.end()) return std::nullopt;
    const auto content = msg->find("content");
    if (content == msg->end()) return std::nullopt;
    if (content->is_string()) return content->get<std::string>();
    if (content->is_array()) {
        std::string out;
        for (const auto& part : *content) {
            if (part.value("type", "") == "text") out += part.value("text", "");
        }
        return out;
    }
    return std::nullopt;
}

std::vector<RawResponse> load_checkpoint(const std::filesystem::path& path) {
    std::vector<RawResponse> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        try {
            RawResponse r = json::parse(line).get<RawResponse>();
            if (r.response_text && !r.request_fingerprint.empty()) out.push_back(std::move(r));
        } catch (const std::exception&) {
            // torn write from an interrupted run
        }
    }
    return out;
}

std::vector<RawResponse> run_batch(const std::vector<PromptBundle>& bundles, const EndpointConfig& cfg,
                                   const BatchOptions& options) {
    cfg.validate();
    const UrlParts url = split_url(cfg.base_url);
    const std::string endpoint_path = url.path + "/chat/completions";
    std::string api_key;
    if (const char* k = std::getenv(cfg.api_key_env.c_str()); k != nullptr) api_key = k;

    std::vector<RawResponse> results(bundles.size());
    std::map<std::string, RawResponse> completed;
    if (!options.checkpoint_path.empty()) {
        for (auto& r : load_checkpoint(options.checkpoint_path)) completed[r.request_fingerprint] = std::move(r);
    }

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < bundles.size(); ++i) {
        const std::string fp = request_fingerprint(to_string(bundles[i].template_id), cfg.model_name, bundles[i].instance_id);
        if (auto it = completed.find(fp); it != completed.end()) {
            results[i] = it->second;
        } else {
            results[i].instance_id = bundles[i].instance_id;
            results[i].template_id = std::string(to_string(bundles[i].template_id));
            results[i].request_fingerprint = fp;
            todo.push_back(i);
        }
    }

    Journal journal(options.checkpoint_path);
    std::mutex writer_mu;
    auto publish = [&](const RawResponse& r) {
        std::lock_guard lock(writer_mu);
        if (r.response_text) journal.append(r);
        if (options.on_result) options.on_result(r);
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        httplib::Client client(url.origin);
        const auto timeout = std::chrono::duration<double>(cfg.request_timeout_s);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        httplib::Headers headers{{"X-Instance-Id", ""}};
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

        for (std::size_t t = next++; t < todo.size(); t = next++) {
            const std::size_t i = todo[t];
            RawResponse& out = results[i];
            const auto started = std::chrono::steady_clock::now();
            std::string body;
            try {
                body = build_chat_request(bundles[i], cfg).dump();
            } catch (const Error& e) {
                out.error = std::string("ImageUnreadable: ") + e.what();
                out.attempt_count = 0;
                publish(out);
                continue;
            }
            headers.find("X-Instance-Id")->second = bundles[i].instance_id;

            const int max_attempts = cfg.max_retries + 1;
            for (int attempt = 1; attempt <= max_attempts; ++attempt) {
                out.attempt_count = attempt;
                auto res = client.Post(endpoint_path, headers, body, "application/json");
                bool retry = false;
                if (!res) {
                    out.error = "TransportError: " + httplib::to_string(res.error());
                    retry = true;
                } else if (res->status == 200) {
                    try {
                        if (auto text = extract_response_text(json::parse(res->body))) {
                            out.response_text = std::move(*text);
                            out.error.reset();
                        } else {
                            out.error = "BadResponse: no message content";
                        }
                    } catch (const json::exception&) {
                        out.error = "BadResponse: body is not JSON";
                    }
                } else if (res->status == 401 || res->status == 403) {
                    out.error = fmt::format("AuthFailed: HTTP {}", res->status);
                } else {
                    out.error = fmt::format("HTTP {}", res->status);
                    retry = transient_status(res->status);
                }
                if (!retry || attempt == max_attempts) break;
                const double wait = std::min(cfg.backoff_max_s, cfg.backoff_initial_s * std::pow(2.0, attempt - 1));
                std::this_thread::sleep_for(std::chrono::duration<double>(wait));
            }
            out.latency_ms =
                std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
            publish(out);
        }
    };

    const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.max_in_flight), todo.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return results;
}

}  // namespace progbench
