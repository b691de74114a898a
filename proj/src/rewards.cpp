// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "progbench/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "progbench/error.hpp"
#include "progbench/metrics.hpp"

namespace progbench {

void RewardConfig::validate() const {
    if (alpha < 0.0 || beta < 0.0 || gamma < 0.0) throw Error(ErrorCode::InvalidConfig, "reward weights must be nonnegative");
    if (!(alpha + beta + gamma > 0.0)) throw Error(ErrorCode::InvalidConfig, "reward weights must not all be zero");
}

RefRewardMode ref_reward_mode_from_string(std::string_view s) {
    if (s == "exact") return RefRewardMode::exact;
    if (s == "distance_decay") return RefRewardMode::distance_decay;
    throw Error(ErrorCode::InvalidConfig, "unknown ref reward mode '" + std::string(s) + "'");
}

ScoreRewardMode score_reward_mode_from_string(std::string_view s) {
    if (s == "linear") return ScoreRewardMode::linear;
    if (s == "nse") return ScoreRewardMode::nse;
    throw Error(ErrorCode::InvalidConfig, "unknown score reward mode '" + std::string(s) + "'");
}

double reward_format(const ParsedPrediction& pred) { return pred.format_ok ? 1.0 : 0.0; }

double reward_ref(const ParsedPrediction& pred, const RefAnswer& gt_ref, int n_steps, const RewardConfig& cfg) {
    if (pred.ref.is_malformed() || gt_ref.is_malformed()) return 0.0;
    if (pred.ref.is_abstain() || gt_ref.is_abstain()) return pred.ref.is_abstain() && gt_ref.is_abstain() ? 1.0 : 0.0;
    const int diff = std::abs(pred.ref.value() - gt_ref.value());
    if (cfg.ref_mode == RefRewardMode::exact || n_steps < 2) return diff == 0 ? 1.0 : 0.0;
    return std::max(0.0, 1.0 - static_cast<double>(diff) / static_cast<double>(n_steps - 1));
}

double reward_score(const ParsedPrediction& pred, const ScoreAnswer& gt, const RewardConfig& cfg) {
    if (pred.score.is_malformed() || gt.is_malformed()) return 0.0;
    if (pred.score.is_abstain() || gt.is_abstain()) return pred.score.is_abstain() && gt.is_abstain() ? 1.0 : 0.0;
    const double p = std::clamp(pred.score.value(), 0.0, 100.0);
    const double g = std::clamp(gt.value(), 0.0, 100.0);
    if (cfg.score_mode == ScoreRewardMode::nse) return 1.0 - nse(p, g);
    return 1.0 - std::fabs(p - g) / 100.0;
}

RewardComponents reward_components(const ParsedPrediction& pred, const RefAnswer& gt_ref, const ScoreAnswer& gt_score,
                                   int n_steps, const RewardConfig& cfg) {
    return {reward_format(pred), reward_ref(pred, gt_ref, n_steps, cfg), reward_score(pred, gt_score, cfg)};
}

double combine_rewards(const RewardComponents& c, bool format_ok, const RewardConfig& cfg) {
    cfg.validate();
    if (cfg.gate_on_format && !format_ok) return 0.0;
    const double sum = cfg.alpha * c.r_format + cfg.beta * c.r_ref + cfg.gamma * c.r_score;
    return cfg.normalize_total ? sum / (cfg.alpha + cfg.beta + cfg.gamma) : sum;
}

double reward_total(const ParsedPrediction& pred, const RefAnswer& gt_ref, const ScoreAnswer& gt_score, int n_steps,
                    const RewardConfig& cfg) {
    return combine_rewards(reward_components(pred, gt_ref, gt_score, n_steps, cfg), pred.format_ok, cfg);
}

}  // namespace progbench
