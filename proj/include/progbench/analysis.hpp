// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

// Diagnostics over scored samples: predicted-score histograms and their
// pattern labels, per-sample error summaries, and the coupling between the
// retrieved reference step and the step implied by the final score.

#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "progbench/core.hpp"

namespace progbench {

struct Histogram {
    std::vector<double> edges;  // bins + 1 uniform edges
    std::vector<int> counts;
    int n_abstained = 0;
    int n_malformed = 0;

    int total() const;
};

/// Uniform bins over [lo, hi]; the last bin is closed on the right.
Histogram histogram_of(std::span<const double> values, int bins, double lo = 0.0, double hi = 100.0);

/// Histogram of numeric predicted scores; abstentions and malformed scores are
/// tallied separately.
Histogram score_histogram(std::span<const ScoredSample> samples, int bins);

enum class DistributionPattern { single_peak_collapse, multi_peak_clustering, central_peaked, smooth_continuous };

std::string_view to_string(DistributionPattern p);

struct PatternThresholds {
    double collapse_mass = 0.60;   // top-bin share for a collapse
    double edge_band = 10.0;       // lowest / highest band width, in percent
    double central_lo = 40.0;
    double central_hi = 60.0;
    double central_window = 10.0;  // +/- around the modal bin centre
    double central_mass = 0.50;
    double peak_mass = 0.20;       // minimum share of a counted local maximum
    int min_samples = 20;
};

/// Rules, in order: collapse, multi-peak, central, else smooth. Throws
/// InsufficientSamples below thresholds.min_samples numeric samples.
DistributionPattern classify_distribution(const Histogram& h, const PatternThresholds& thresholds = {});

struct ErrorSummary {
    int n = 0;
    double mean = 0.0;
    double median = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
    double max = 0.0;
    Histogram histogram;  // over [0, 1]
};

/// Nearest-rank order statistic on sorted data: element floor(pct * n / 100),
/// clamped to the last element.
double nearest_rank(std::span<const double> sorted, int pct);

ErrorSummary summarize_errors(std::span<const double> nse_values, int bins = 20);
/// Over samples with a defined NSE. Throws EmptyInput when there are none.
ErrorSummary error_summary(std::span<const ScoredSample> samples, int bins = 20);

/// 1-based index of the demo step whose progress is closest to pred_score;
/// ties go to the earlier step.
int score_aligned_index(double pred_score, std::span<const double> demo_progress);

struct CouplingMatrix {
    int size = 0;
    std::vector<std::vector<int>> counts;  // counts[a-1][b-1]: ref a, aligned index b
    int total = 0;

    int diagonal() const;
    double diagonal_fraction() const;  // 0 when empty
};

/// Raw matrix over step ordinals, sized to the longest demonstration.
CouplingMatrix coupling_matrix(std::span<const ScoredSample> samples);

/// Same counts with each ordinal mapped onto `cells` bins via
/// round((index - 1) / (n_steps - 1) * (cells - 1)), so trajectories of
/// different lengths share one grid.
CouplingMatrix coupling_matrix_grid(std::span<const ScoredSample> samples, int cells = 10);
int grid_cell(int index, int n_steps, int cells);

std::map<std::string, CouplingMatrix> coupling_by_trajectory(std::span<const ScoredSample> samples);

json to_json(const Histogram& h);
json to_json(const ErrorSummary& e);
json to_json(const CouplingMatrix& m);

}  // namespace progbench
