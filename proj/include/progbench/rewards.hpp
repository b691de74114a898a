// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

// Reward oracle for policy optimization: format, reference and score
// components, combined with configurable weights (1:6:3 by default).

#pragma once

#include <string_view>

#include "progbench/core.hpp"

namespace progbench {

enum class RefRewardMode { exact, distance_decay };
enum class ScoreRewardMode { linear, nse };

struct RewardConfig {
    double alpha = 1.0;
    double beta = 6.0;
    double gamma = 3.0;
    RefRewardMode ref_mode = RefRewardMode::exact;
    ScoreRewardMode score_mode = ScoreRewardMode::linear;
    bool normalize_total = true;
    // When set, a response failing the format check earns a total of zero.
    bool gate_on_format = false;

    void validate() const;
};

RefRewardMode ref_reward_mode_from_string(std::string_view s);
ScoreRewardMode score_reward_mode_from_string(std::string_view s);

double reward_format(const ParsedPrediction& pred);
double reward_ref(const ParsedPrediction& pred, const RefAnswer& gt_ref, int n_steps, const RewardConfig& cfg = {});
double reward_score(const ParsedPrediction& pred, const ScoreAnswer& gt, const RewardConfig& cfg = {});

RewardComponents reward_components(const ParsedPrediction& pred, const RefAnswer& gt_ref, const ScoreAnswer& gt_score,
                                   int n_steps, const RewardConfig& cfg = {});

/// Weighted combination; divided by the weight sum when cfg.normalize_total.
double combine_rewards(const RewardComponents& c, bool format_ok, const RewardConfig& cfg = {});

double reward_total(const ParsedPrediction& pred, const RefAnswer& gt_ref, const ScoreAnswer& gt_score, int n_steps,
                    const RewardConfig& cfg = {});

}  // namespace progbench
