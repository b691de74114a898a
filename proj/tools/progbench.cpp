// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line entry point: build, prompt, eval, score, rewards, analyze and
// review-serve. Options may also come from a key = value file passed with
// --config; flags on the command line win.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "progbench/error.hpp"
#include "progbench/io.hpp"
#include "progbench/pipeline.hpp"
#include "progbench/review_server.hpp"

namespace pb = progbench;

namespace {

struct Options {
    std::uint64_t seed = 42;
    std::string out;
    std::string template_dir;
    std::string template_name = "infer";
    std::string image_root;
    bool mock = false;
    int mock_delay_ms = 0;

    int k = 4;
    double epsilon = 0.1;
    std::string mode = "interval";
    double cross_view_fraction = 0.5;
    double unanswerable_fraction = 0.2;
    std::vector<std::string> modalities{"vision", "text"};

    pb::EndpointConfig endpoint;
    std::string image_transport = "base64_inline";

    double alpha = 1.0, beta = 6.0, gamma = 3.0;
    std::string ref_reward = "exact";
    std::string score_reward = "linear";
    bool no_normalize = false;
    bool gate_on_format = false;

    int bins = 20;
    int grid_cells = 10;

    std::string bind = "127.0.0.1:8080";
};

pb::SamplerConfig sampler_config(const Options& o) {
    pb::SamplerConfig c;
    c.k = o.k;
    c.epsilon = o.epsilon;
    c.mode = pb::sampling_mode_from_string(o.mode);
    c.cross_view_fraction = o.cross_view_fraction;
    c.unanswerable_fraction = o.unanswerable_fraction;
    c.rng_seed = o.seed;
    c.modalities.clear();
    for (const auto& m : o.modalities) c.modalities.push_back(pb::modality_from_string(m));
    return c;
}

pb::RewardConfig reward_config(const Options& o) {
    pb::RewardConfig c;
    c.alpha = o.alpha;
    c.beta = o.beta;
    c.gamma = o.gamma;
    c.ref_mode = pb::ref_reward_mode_from_string(o.ref_reward);
    c.score_mode = pb::score_reward_mode_from_string(o.score_reward);
    c.normalize_total = !o.no_normalize;
    c.gate_on_format = o.gate_on_format;
    return c;
}

pb::TemplateSet templates(const Options& o) {
    return o.template_dir.empty() ? pb::TemplateSet::builtin() : pb::TemplateSet::from_directory(o.template_dir);
}

std::string out_or(const Options& o, const char* fallback) { return o.out.empty() ? std::string(fallback) : o.out; }

void report_error(pb::ErrorCode code, const std::string& message) {
    std::vector<std::string> details;
    std::string::size_type start = 0;
    while (start <= message.size()) {
        const auto nl = message.find('\n', start);
        details.push_back(message.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
    const nlohmann::json err{{"error", pb::to_string(code)}, {"details", details}};
    std::cerr << err.dump() << "\n";
}

int review_serve(const Options& o, const std::string& pending, const std::string& decisions, const std::string& token,
                 const std::string& static_dir) {
    const auto colon = o.bind.rfind(':');
    if (colon == std::string::npos) throw pb::Error(pb::ErrorCode::ConfigInvalid, "--bind must be host:port");
    const std::string host = o.bind.substr(0, colon);
    const int port = std::stoi(o.bind.substr(colon + 1));

    // Signals are taken by a dedicated thread so the server can stop cleanly.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    pb::ReviewServerConfig cfg;
    cfg.pending_path = pending;
    cfg.decisions_path = decisions;
    cfg.image_root = o.image_root;
    cfg.static_dir = static_dir;
    cfg.token = token;
    pb::ReviewServer server(cfg);
    const int bound = server.bind(host, port);
    const auto progress = server.queue().progress();
    fmt::print("listening on http://{}:{} ({} decided, {} remaining)\n", host, bound, progress.decided,
               progress.remaining);
    std::fflush(stdout);

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        server.stop();
    });
    server.serve();
    // serve() can also return on its own; wake the waiter in that case.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"progbench: task-progress benchmark construction, evaluation and analysis"};
    app.set_config("--config", "", "Key = value configuration file; command-line flags take precedence");
    app.require_subcommand(1);
    app.fallthrough();
    Options o;

    app.add_option("--seed", o.seed, "RNG seed for sampling and the simulated model")->capture_default_str();
    app.add_option("--out", o.out, "Output file or directory (depends on the subcommand)");
    app.add_option("--template-dir", o.template_dir, "Directory overriding the builtin prompt templates");
    app.add_option("--template", o.template_name, "infer | direct | vision_infer | text_infer")->capture_default_str();
    app.add_option("--image-root", o.image_root, "Base directory for relative image references");
    app.add_flag("--mock", o.mock, "Use the built-in simulated model instead of a remote endpoint");
    app.add_option("--mock-delay-ms", o.mock_delay_ms, "Delay per simulated reply")->group("");

    app.add_option("--k", o.k, "Interval sampling resolution")->capture_default_str();
    app.add_option("--epsilon", o.epsilon, "Boundary sampling margin")->capture_default_str();
    app.add_option("--mode", o.mode, "interval | boundary | mixed")->capture_default_str();
    app.add_option("--cross-view-fraction", o.cross_view_fraction)->capture_default_str();
    app.add_option("--unanswerable-fraction", o.unanswerable_fraction)->capture_default_str();
    app.add_option("--modalities", o.modalities, "vision and/or text")->capture_default_str();

    app.add_option("--base-url", o.endpoint.base_url, "Chat-completions base URL")->capture_default_str();
    app.add_option("--model", o.endpoint.model_name)->capture_default_str();
    app.add_option("--api-key-env", o.endpoint.api_key_env, "Environment variable holding the API key")
        ->capture_default_str();
    app.add_option("--temperature", o.endpoint.temperature)->capture_default_str();
    app.add_option("--top-p", o.endpoint.top_p)->capture_default_str();
    app.add_option("--max-tokens", o.endpoint.max_tokens)->capture_default_str();
    app.add_option("--timeout", o.endpoint.request_timeout_s, "Per-request timeout in seconds")->capture_default_str();
    app.add_option("--max-retries", o.endpoint.max_retries)->capture_default_str();
    app.add_option("--max-in-flight", o.endpoint.max_in_flight)->capture_default_str();
    app.add_option("--image-transport", o.image_transport, "base64_inline | url")->capture_default_str();

    app.add_option("--alpha", o.alpha, "Format reward weight")->capture_default_str();
    app.add_option("--beta", o.beta, "Reference reward weight")->capture_default_str();
    app.add_option("--gamma", o.gamma, "Score reward weight")->capture_default_str();
    app.add_option("--ref-reward", o.ref_reward, "exact | distance_decay")->capture_default_str();
    app.add_option("--score-reward", o.score_reward, "linear | nse")->capture_default_str();
    app.add_flag("--no-normalize", o.no_normalize, "Report the raw weighted sum");
    app.add_flag("--gate-on-format", o.gate_on_format, "Zero the total when the format check fails");

    app.add_option("--bins", o.bins)->capture_default_str();
    app.add_option("--grid-cells", o.grid_cells)->capture_default_str();
    app.add_option("--bind", o.bind, "host:port for review-serve")->capture_default_str();

    pb::BuildInputs build_in;
    std::string trajectories, rewrites, edits, decisions;
    auto* build = app.add_subcommand("build", "Sample benchmark instances from trajectories");
    build->add_option("trajectories", trajectories)->required();
    build->add_option("--rewrites", rewrites, "Text rewrites JSONL");
    build->add_option("--edits", edits, "Image edits JSONL");
    build->add_option("--decisions", decisions, "Review decisions JSONL");

    std::string instances_path, responses_path, input_path;
    auto* prompt = app.add_subcommand("prompt", "Render prompts for every instance");
    prompt->add_option("instances", instances_path)->required();

    auto* eval = app.add_subcommand("eval", "Query a model for every instance");
    eval->add_option("instances", instances_path)->required();

    auto* score = app.add_subcommand("score", "Score responses against ground truth");
    score->add_option("instances", instances_path)->required();
    score->add_option("responses", responses_path)->required();

    auto* rewards = app.add_subcommand("rewards", "Compute reward components for raw responses");
    rewards->add_option("input", input_path)->required();

    auto* analyze = app.add_subcommand("analyze", "Score distributions, error summaries and coupling");
    analyze->add_option("scored_samples", input_path)->required();

    std::string pending, token, static_dir;
    auto* serve = app.add_subcommand("review-serve", "Serve the review API for pending candidates");
    serve->add_option("pending", pending)->required();
    serve->add_option("decisions", decisions)->required();
    serve->add_option("--token", token, "Shared token required on /api requests");
    serve->add_option("--static-dir", static_dir, "Review UI assets served at /");

    CLI11_PARSE(app, argc, argv);

    try {
        o.endpoint.image_transport = pb::image_transport_from_string(o.image_transport);
        o.endpoint.image_root = o.image_root;
        if (build->parsed()) {
            build_in = {trajectories, rewrites, edits, decisions};
            const auto out = pb::cmd_build(build_in, sampler_config(o), out_or(o, "out"));
            fmt::print("{}", pb::build_summary(out));
        } else if (prompt->parsed()) {
            const auto bundles = pb::cmd_prompt(instances_path, o.template_name, templates(o), out_or(o, "prompts.jsonl"));
            fmt::print("{} prompts\n", bundles.size());
        } else if (eval->parsed()) {
            const pb::MockOptions mock{o.mock, o.seed, o.mock_delay_ms};
            const auto responses = pb::cmd_eval(instances_path, o.endpoint, o.template_name, templates(o),
                                                out_or(o, "responses.jsonl"), mock);
            int failed = 0;
            for (const auto& r : responses) failed += r.response_text ? 0 : 1;
            fmt::print("{} responses, {} failed\n", responses.size(), failed);
        } else if (score->parsed()) {
            const auto out = pb::cmd_score(instances_path, responses_path, out_or(o, "scores"), reward_config(o));
            std::cout << pb::report_to_csv(out.report);
            for (const auto& w : out.report.warnings) std::cerr << "warning: " << w << "\n";
        } else if (rewards->parsed()) {
            const auto rows = pb::cmd_rewards(input_path, out_or(o, "rewards.jsonl"), reward_config(o));
            fmt::print("{} rows\n", rows.size());
        } else if (analyze->parsed()) {
            pb::AnalyzeOptions a;
            a.bins = o.bins;
            a.grid_cells = o.grid_cells;
            pb::cmd_analyze(input_path, out_or(o, "analysis"), a);
        } else if (serve->parsed()) {
            return review_serve(o, pending, decisions, token, static_dir);
        }
    } catch (const pb::Error& e) {
        report_error(e.code(), e.what());
        return 2;
    } catch (const std::exception& e) {
        report_error(pb::ErrorCode::PreconditionFailed, e.what());
        return 2;
    }
    return 0;
}
