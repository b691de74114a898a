// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

// Benchmark metrics. Per-sample NSE is a fraction in [0,1]; everything in a
// MetricsReport is in percent.
//
//   NSE  = |pred - gt| / max(gt, 100 - gt)          answerable, valid samples
//   PRC  = Spearman(pred, gt) per trajectory, averaged over trajectories
//   AFRR = abstained / total                         answerable samples
//   UDA  = abstained / total                         unanswerable samples

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "progbench/core.hpp"
#include "progbench/response_parser.hpp"
#include "progbench/rewards.hpp"

namespace progbench {

double nse(double pred, double gt);

/// Average (fractional) ranks, 1-based; ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

/// Tie-aware Spearman correlation in percent; NaN when either side has zero
/// rank variance. Throws LengthMismatch / TooFewSamples.
double spearman(std::span<const double> xs, std::span<const double> ys);

enum class PrcStatus { value, nan, excluded };

struct PrcOutcome {
    PrcStatus status = PrcStatus::excluded;
    double value = 0.0;  // percent, meaningful when status == value
    int n_valid = 0;
};

/// Samples must share one trajectory. Valid points are answerable,
/// non-abstained samples with a numeric score; fewer than two -> excluded.
PrcOutcome prc_trajectory(std::span<const ScoredSample> samples);

/// Percent of samples that abstained. Throws EmptyInput.
double afrr(std::span<const ScoredSample> answerable);
double uda(std::span<const ScoredSample> unanswerable);

/// Joins ground truth with a raw response: parse, NSE, abstention, rewards.
ScoredSample score_sample(const EvalInstance& inst, std::string_view raw_response, Schema schema = Schema::full,
                          const RewardConfig& rewards = {});

struct SettingMetrics {
    int n_samples = 0;
    int n_valid_nse = 0;
    int n_abstained = 0;
    int n_malformed = 0;
    int n_trajectories = 0;  // trajectories with a defined PRC
    int n_nan_trajectories = 0;
    int n_excluded_trajectories = 0;
    std::optional<double> nse_mean;
    std::optional<double> prc_mean;
    std::optional<double> afrr;
    std::optional<double> uda;
};

struct MetricsReport {
    std::map<std::string, SettingMetrics> per_setting;  // keyed by setting_key()
    SettingMetrics micro;  // pooled over every sample / trajectory
    SettingMetrics macro;  // unweighted mean over setting groups; counts are totals
    std::vector<std::string> warnings;
};

MetricsReport aggregate(std::span<const ScoredSample> samples);

json report_to_json(const MetricsReport& r);
/// One row per setting plus micro and macro rows:
/// setting,n_samples,nse,prc,afrr,uda,n_trajectories,n_nan_trajectories
std::string report_to_csv(const MetricsReport& r);

}  // namespace progbench
