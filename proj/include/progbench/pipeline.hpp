// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

// File-level pipeline steps behind the command-line tool. Each step reads and
// writes JSONL / JSON / CSV artifacts and is deterministic for fixed inputs.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "progbench/analysis.hpp"
#include "progbench/metrics.hpp"
#include "progbench/model_client.hpp"
#include "progbench/promptgen.hpp"
#include "progbench/rewards.hpp"
#include "progbench/sampler.hpp"

namespace progbench {

namespace fs = std::filesystem;

struct BuildInputs {
    fs::path trajectories;
    fs::path rewrites;   // optional TextRewrite JSONL
    fs::path edits;      // optional ImageEdit JSONL
    fs::path decisions;  // optional ReviewDecision JSONL
};

/// Validates every trajectory, then writes instances.jsonl, pending_review.jsonl
/// and negative_seeds.jsonl under out_dir. Throws Error(InvalidTrajectory) with
/// every violation listed, or EmptyDataset.
BuildOutputs cmd_build(const BuildInputs& inputs, const SamplerConfig& cfg, const fs::path& out_dir);
/// One line per setting group plus a total, e.g. "vision/same: 24 answerable, 5 unanswerable".
std::string build_summary(const BuildOutputs& out);

/// "infer" picks the vision or text inference template per instance; "direct"
/// and the explicit inference ids are also accepted.
PromptBundle render_for_eval(const EvalInstance& inst, std::string_view template_name, const TemplateSet& templates);
Schema schema_for_template(std::string_view template_name);

/// Renders every instance to prompts.jsonl-style bundles.
std::vector<PromptBundle> cmd_prompt(const fs::path& instances_path, std::string_view template_name,
                                     const TemplateSet& templates, const fs::path& out_path);

struct MockOptions {
    bool enabled = false;
    std::uint64_t seed = 42;
    int delay_ms = 0;
};

/// Queries the endpoint (or the built-in simulated model) and writes one
/// RawResponse per instance, in instance order. Progress is journaled to
/// `<out_path>.journal`; rerunning after an interruption only sends the
/// requests that did not complete.
std::vector<RawResponse> cmd_eval(const fs::path& instances_path, EndpointConfig endpoint, std::string_view template_name,
                                  const TemplateSet& templates, const fs::path& out_path, const MockOptions& mock = {});

struct ScoreOutputs {
    MetricsReport report;
    std::vector<ScoredSample> samples;
};

/// Joins responses with instances and writes report.json, report.csv and
/// scored_samples.jsonl. Responses whose instance is unknown are skipped with
/// an OrphanResponse warning.
ScoreOutputs cmd_score(const fs::path& instances_path, const fs::path& responses_path, const fs::path& out_dir,
                       const RewardConfig& rewards = {});

/// Rows of {raw_response, gt_ref, gt_score, n_steps[, schema]} to per-row reward
/// components; CSV when out_path ends in ".csv", JSONL otherwise.
std::vector<RewardComponents> cmd_rewards(const fs::path& input_path, const fs::path& out_path,
                                          const RewardConfig& rewards = {});

struct AnalyzeOptions {
    int bins = 20;
    int grid_cells = 10;
    PatternThresholds thresholds;
};

/// Writes histograms, error summaries and coupling matrices (JSON + CSV) under
/// out_dir, overall and per setting.
void cmd_analyze(const fs::path& scored_path, const fs::path& out_dir, const AnalyzeOptions& options = {});

}  // namespace progbench
