// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

// Batch runner for chat-completions endpoints. Requests carry multimodal
// content parts (text + image_url); results come back in input order and
// completed requests are journaled so an interrupted batch can resume.

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "progbench/promptgen.hpp"

namespace progbench {

enum class ImageTransport { base64_inline, url };

ImageTransport image_transport_from_string(std::string_view s);
std::string_view to_string(ImageTransport t);

struct EndpointConfig {
    std::string base_url = "http://127.0.0.1:8000/v1";  // POST {base_url}/chat/completions
    std::string api_key_env = "OPENAI_API_KEY";
    std::string model_name = "default";
    double temperature = 0.6;
    double top_p = 0.9;
    int max_tokens = 4096;
    double request_timeout_s = 120.0;
    int max_retries = 3;  // re-attempts after the first try
    int max_in_flight = 4;
    ImageTransport image_transport = ImageTransport::base64_inline;
    std::filesystem::path image_root;  // base for relative frame references
    double backoff_initial_s = 1.0;
    double backoff_max_s = 30.0;

    /// Throws Error(ConfigInvalid).
    void validate() const;
};

struct RawResponse {
    std::string instance_id;
    std::string template_id;
    std::optional<std::string> response_text;
    long long latency_ms = 0;
    int attempt_count = 0;
    std::optional<std::string> error;  // terminal error code, set iff response_text is empty
    std::string request_fingerprint;
};

void to_json(json& j, const RawResponse& r);
void from_json(const json& j, RawResponse& r);

/// sha256 of (template id, model, instance id).
std::string request_fingerprint(std::string_view template_id, std::string_view model, std::string_view instance_id);

/// Chat-completions request body. Text is split at image markers and each
/// slot becomes an image_url part. Throws Error(IoError) for an unreadable
/// image under base64 transport.
json build_chat_request(const PromptBundle& bundle, const EndpointConfig& cfg);

/// Assistant text from a chat-completions response body; nullopt if absent.
std::optional<std::string> extract_response_text(const json& body);

struct BatchOptions {
    std::filesystem::path checkpoint_path;  // empty disables journaling
    std::function<void(const RawResponse&)> on_result;  // called from the writer, serialized
};

std::vector<RawResponse> run_batch(const std::vector<PromptBundle>& bundles, const EndpointConfig& cfg,
                                   const BatchOptions& options = {});

/// Successful responses recorded in a checkpoint journal, keyed by fingerprint.
/// Torn trailing lines are ignored.
std::vector<RawResponse> load_checkpoint(const std::filesystem::path& path);

}  // namespace progbench
