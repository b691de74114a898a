// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

// Observation sampling: turns annotated trajectories into benchmark instances
// and assembles unanswerable variants from externally produced rewrites and
// image edits.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "progbench/core.hpp"

namespace progbench {

enum class SamplingMode { interval, boundary, mixed };

SamplingMode sampling_mode_from_string(std::string_view s);
std::string_view to_string(SamplingMode m);

struct SamplerConfig {
    int k = 4;
    double epsilon = 0.1;
    SamplingMode mode = SamplingMode::interval;
    double cross_view_fraction = 0.5;
    double unanswerable_fraction = 0.2;
    std::uint64_t rng_seed = 42;
    std::vector<Modality> modalities{Modality::vision, Modality::text};

    /// Throws Error(InvalidConfig) on a broken invariant.
    void validate() const;
};

/// Linear progress between two key steps.
double interpolate_progress(double p_j, double p_next, double delta);

/// {1/k, ..., (k-1)/k}
std::vector<double> interval_deltas(int k);

/// Uniform draw from the open interval (1 - epsilon, 1).
double boundary_delta(double epsilon, std::mt19937_64& rng);

/// Per-trajectory generator: seed xor hash(trajectory id), so results do not
/// depend on processing order.
std::mt19937_64 trajectory_rng(std::uint64_t seed, std::string_view trajectory_id);

/// Reference step for a sample at (j, delta): step j when delta <= 0.5, else j + 1.
int nearest_reference_step(const Segment& seg);

/// Answerable instances for every enabled modality. Vision samples are split
/// between same-view and cross-view according to cfg.cross_view_fraction.
std::vector<EvalInstance> build_instances(const Trajectory& t, const SamplerConfig& cfg);

struct TextRewrite {
    std::string trajectory_id;
    std::string edited_goal;
    std::vector<std::string> edited_demo;
};

void from_json(const json& j, TextRewrite& r);

/// Bracketed markers such as "[left]" found in a step, in order of appearance.
std::vector<std::string> bracket_markers(std::string_view text);

EvalInstance make_unanswerable_text(const EvalInstance& inst, const TextRewrite& rewrite);

/// Canonical display name of an editing strategy ("Color Change",
/// "Object Replacement", "Occlusion/Removal"); throws UnknownStrategy.
std::string canonical_strategy(std::string_view strategy);

/// An edited-observation candidate awaiting a keep/discard verdict.
struct ReviewCandidate {
    std::string id;
    std::string original_image_ref;
    std::string edited_image_ref;
    std::string task_goal;
    std::vector<std::string> steps;
    std::string strategy;
    std::string edit_prompt;
    EvalInstance instance;  // answerable=false, gt=ABSTAIN once accepted
};

void to_json(json& j, const ReviewCandidate& c);
void from_json(const json& j, ReviewCandidate& c);

ReviewCandidate make_unanswerable_vision(const EvalInstance& inst, const std::string& edited_frame_ref,
                                         const EditRecord& edit);

/// The benchmark instance a kept candidate becomes.
EvalInstance accept_candidate(const ReviewCandidate& c);

struct ImageEdit {
    std::string instance_id;  // the seed instance the edit was made from
    std::string edited_frame_ref;
    EditRecord edit;
};

void from_json(const json& j, ImageEdit& e);

enum class Verdict { keep, discard };

struct ReviewDecision {
    std::string candidate_id;
    Verdict verdict = Verdict::keep;
    std::string annotator;
    std::string timestamp;
};

void to_json(json& j, const ReviewDecision& d);
void from_json(const json& j, ReviewDecision& d);

/// Latest verdict per candidate (later events supersede earlier ones).
std::map<std::string, Verdict> latest_verdicts(const std::vector<ReviewDecision>& events);

struct NegativeSeed {
    std::string instance_id;
    Modality modality = Modality::vision;
    std::string status;  // awaiting_rewrite | awaiting_edit | pending_review | kept | discarded | built
};

struct BuildOutputs {
    std::vector<EvalInstance> instances;
    std::vector<ReviewCandidate> pending_review;
    std::vector<NegativeSeed> negative_seeds;
    std::map<std::string, int> counts_by_setting;
};

/// Full dataset build: samples every trajectory, selects negative seeds per
/// setting group, and folds in rewrites, edits and review decisions.
BuildOutputs assemble_benchmark(const std::vector<Trajectory>& trajectories, const SamplerConfig& cfg,
                                const std::vector<TextRewrite>& rewrites, const std::vector<ImageEdit>& edits,
                                const std::vector<ReviewDecision>& decisions);

}  // namespace progbench
