// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "progbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "progbench/error.hpp"

namespace progbench {

int Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

Histogram histogram_of(std::span<const double> values, int bins, double lo, double hi) {
    if (bins < 2) throw Error(ErrorCode::InvalidConfig, fmt::format("bins={} (need >= 2)", bins));
    Histogram h;
    const double width = (hi - lo) / bins;
    for (int i = 0; i <= bins; ++i) h.edges.push_back(i == bins ? hi : lo + width * i);
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
        auto b = static_cast<int>(std::floor((v - lo) / width));
        b = std::clamp(b, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

Histogram score_histogram(std::span<const ScoredSample> samples, int bins) {
    std::vector<double> values;
    int abstained = 0, malformed = 0;
    for (const auto& s : samples) {
        if (s.abstained) {
            ++abstained;
        } else if (s.predicted.score.has_value()) {
            values.push_back(s.predicted.score.value());
        } else {
            ++malformed;
        }
    }
    Histogram h = histogram_of(values, bins);
    h.n_abstained = abstained;
    h.n_malformed = malformed;
    return h;
}

std::string_view to_string(DistributionPattern p) {
    switch (p) {
        case DistributionPattern::single_peak_collapse: return "single_peak_collapse";
        case DistributionPattern::multi_peak_clustering: return "multi_peak_clustering";
        case DistributionPattern::central_peaked: return "central_peaked";
        case DistributionPattern::smooth_continuous: return "smooth_continuous";
    }
    return "smooth_continuous";
}

DistributionPattern classify_distribution(const Histogram& h, const PatternThresholds& th) {
    const int total = h.total();
    if (total < th.min_samples) {
        throw Error(ErrorCode::InsufficientSamples, fmt::format("{} numeric samples (need {})", total, th.min_samples));
    }
    const std::size_t n = h.counts.size();
    std::vector<double> mass(n);
    for (std::size_t i = 0; i < n; ++i) mass[i] = static_cast<double>(h.counts[i]) / total;
    auto center = [&](std::size_t i) { return 0.5 * (h.edges[i] + h.edges[i + 1]); };

    const auto top = static_cast<std::size_t>(std::max_element(mass.begin(), mass.end()) - mass.begin());
    const double lo_edge = h.edges.front();
    const double hi_edge = h.edges.back();
    const bool in_edge_band = h.edges[top] < lo_edge + th.edge_band || h.edges[top + 1] > hi_edge - th.edge_band;
    if (mass[top] >= th.collapse_mass && in_edge_band) return DistributionPattern::single_peak_collapse;

    // A plateau counts once, at its first bin.
    int peaks = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool above_left = i == 0 || h.counts[i] > h.counts[i - 1];
        const bool not_below_right = i + 1 == n || h.counts[i] >= h.counts[i + 1];
        if (above_left && not_below_right && mass[i] >= th.peak_mass) ++peaks;
    }
    if (peaks >= 2) return DistributionPattern::multi_peak_clustering;

    const double mode_center = center(top);
    if (mode_center >= th.central_lo && mode_center <= th.central_hi) {
        double window = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::fabs(center(i) - mode_center) <= th.central_window) window += mass[i];
        }
        if (window >= th.central_mass) return DistributionPattern::central_peaked;
    }
    return DistributionPattern::smooth_continuous;
}

double nearest_rank(std::span<const double> sorted, int pct) {
    if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of empty list");
    const std::size_t idx = static_cast<std::size_t>(pct) * sorted.size() / 100;
    return sorted[std::min(idx, sorted.size() - 1)];
}

ErrorSummary summarize_errors(std::span<const double> nse_values, int bins) {
    if (nse_values.empty()) throw Error(ErrorCode::EmptyInput, "no valid NSE samples");
    std::vector<double> sorted(nse_values.begin(), nse_values.end());
    std::sort(sorted.begin(), sorted.end());
    ErrorSummary e;
    e.n = static_cast<int>(sorted.size());
    e.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    e.median = nearest_rank(sorted, 50);
    e.p90 = nearest_rank(sorted, 90);
    e.p99 = nearest_rank(sorted, 99);
    e.max = sorted.back();
    e.histogram = histogram_of(sorted, bins, 0.0, 1.0);
    return e;
}

ErrorSummary error_summary(std::span<const ScoredSample> samples, int bins) {
    std::vector<double> values;
    for (const auto& s : samples) {
        if (s.nse) values.push_back(*s.nse);
    }
    return summarize_errors(values, bins);
}

int score_aligned_index(double pred_score, std::span<const double> demo_progress) {
    if (demo_progress.empty()) throw Error(ErrorCode::EmptyInput, "empty demonstration");
    std::size_t best = 0;
    for (std::size_t i = 1; i < demo_progress.size(); ++i) {
        if (std::fabs(demo_progress[i] - pred_score) < std::fabs(demo_progress[best] - pred_score)) best = i;
    }
    return static_cast<int>(best) + 1;
}

int CouplingMatrix::diagonal() const {
    int d = 0;
    for (int i = 0; i < size; ++i) d += counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    return d;
}

double CouplingMatrix::diagonal_fraction() const {
    return total == 0 ? 0.0 : static_cast<double>(diagonal()) / total;
}

namespace {

bool coupling_valid(const ScoredSample& s) {
    return s.predicted.ref.has_value() && s.predicted.score.has_value() && !s.abstained && !s.demo_progress.empty() &&
           s.predicted.ref.value() >= 1 && s.predicted.ref.value() <= static_cast<int>(s.demo_progress.size());
}

CouplingMatrix empty_matrix(int size) {
    CouplingMatrix m;
    m.size = size;
    m.counts.assign(static_cast<std::size_t>(size), std::vector<int>(static_cast<std::size_t>(size), 0));
    return m;
}

template <class CellFn>
CouplingMatrix fill(std::span<const ScoredSample> samples, int size, CellFn cell) {
    CouplingMatrix m = empty_matrix(size);
    for (const auto& s : samples) {
        if (!coupling_valid(s)) continue;
        const int n = static_cast<int>(s.demo_progress.size());
        const int a = s.predicted.ref.value();
        const int b = score_aligned_index(s.predicted.score.value(), s.demo_progress);
        ++m.counts[static_cast<std::size_t>(cell(a, n))][static_cast<std::size_t>(cell(b, n))];
        ++m.total;
    }
    return m;
}

}  // namespace

CouplingMatrix coupling_matrix(std::span<const ScoredSample> samples) {
    int size = 0;
    for (const auto& s : samples) size = std::max(size, static_cast<int>(s.demo_progress.size()));
    return fill(samples, size, [](int idx, int) { return idx - 1; });
}

int grid_cell(int index, int n_steps, int cells) {
    if (n_steps < 2) return 0;
    const double x = static_cast<double>(index - 1) / static_cast<double>(n_steps - 1);
    return std::clamp(static_cast<int>(std::floor(x * (cells - 1) + 0.5)), 0, cells - 1);
}

CouplingMatrix coupling_matrix_grid(std::span<const ScoredSample> samples, int cells) {
    return fill(samples, cells, [cells](int idx, int n) { return grid_cell(idx, n, cells); });
}

std::map<std::string, CouplingMatrix> coupling_by_trajectory(std::span<const ScoredSample> samples) {
    std::map<std::string, std::vector<ScoredSample>> groups;
    for (const auto& s : samples) groups[s.trajectory_id].push_back(s);
    std::map<std::string, CouplingMatrix> out;
    for (const auto& [id, group] : groups) out.emplace(id, coupling_matrix(group));
    return out;
}

json to_json(const Histogram& h) {
    return json{{"edges", h.edges},
                {"counts", h.counts},
                {"n_numeric", h.total()},
                {"n_abstained", h.n_abstained},
                {"n_malformed", h.n_malformed}};
}

json to_json(const ErrorSummary& e) {
    return json{{"n", e.n},
                {"mean", e.mean},
                {"median", e.median},
                {"p90", e.p90},
                {"p99", e.p99},
                {"max", e.max},
                {"histogram", to_json(e.histogram)}};
}

json to_json(const CouplingMatrix& m) {
    return json{{"size", m.size},
                {"counts", m.counts},
                {"total", m.total},
                {"diagonal", m.diagonal()},
                {"diagonal_fraction", m.diagonal_fraction()}};
}

}  // namespace progbench
