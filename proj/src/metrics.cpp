// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "progbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "progbench/error.hpp"

namespace progbench {

double nse(double pred, double gt) {
    // max(gt, 100 - gt) >= 50, so the division is always safe.
    return std::fabs(pred - gt) / std::max(gt, 100.0 - gt);
}

std::vector<double> average_ranks(std::span<const double> xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error(ErrorCode::LengthMismatch, fmt::format("{} vs {}", xs.size(), ys.size()));
    if (xs.size() < 2) throw Error(ErrorCode::TooFewSamples, fmt::format("n={}", xs.size()));
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const double n = static_cast<double>(rx.size());
    const double mean = (n + 1.0) / 2.0;  // average ranks always sum to n(n+1)/2
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return 100.0 * sxy / std::sqrt(sxx * syy);
}

namespace {

bool nse_valid(const ScoredSample& s) { return s.answerable && !s.abstained && s.predicted.score.has_value(); }

}  // namespace

PrcOutcome prc_trajectory(std::span<const ScoredSample> samples) {
    std::vector<double> pred, gt;
    for (const auto& s : samples) {
        if (!nse_valid(s)) continue;
        pred.push_back(s.predicted.score.value());
        gt.push_back(s.gt_progress.value());
    }
    PrcOutcome out;
    out.n_valid = static_cast<int>(pred.size());
    if (pred.size() < 2) return out;
    const double rho = spearman(pred, gt);
    if (std::isnan(rho)) {
        out.status = PrcStatus::nan;
    } else {
        out.status = PrcStatus::value;
        out.value = rho;
    }
    return out;
}

double afrr(std::span<const ScoredSample> answerable) {
    if (answerable.empty()) throw Error(ErrorCode::EmptyInput, "afrr over zero samples");
    const auto n = std::count_if(answerable.begin(), answerable.end(), [](const ScoredSample& s) { return s.abstained; });
    return 100.0 * static_cast<double>(n) / static_cast<double>(answerable.size());
}

double uda(std::span<const ScoredSample> unanswerable) {
    if (unanswerable.empty()) throw Error(ErrorCode::EmptyInput, "uda over zero samples");
    const auto n = std::count_if(unanswerable.begin(), unanswerable.end(), [](const ScoredSample& s) { return s.abstained; });
    return 100.0 * static_cast<double>(n) / static_cast<double>(unanswerable.size());
}

ScoredSample score_sample(const EvalInstance& inst, std::string_view raw_response, Schema schema,
                          const RewardConfig& rewards) {
    ScoredSample s;
    s.instance_id = inst.instance_id;
    s.trajectory_id = inst.trajectory_id;
    s.modality = inst.modality;
    s.view = inst.view;
    s.answerable = inst.answerable;
    s.n_steps = inst.n_steps();
    for (const auto& d : inst.demo_payload) s.demo_progress.push_back(d.progress);
    s.gt_progress = inst.gt_progress;
    s.gt_ref_index = inst.gt_ref_index;
    s.predicted = parse_response(raw_response, schema, s.n_steps);
    s.abstained = s.predicted.abstained();
    if (nse_valid(s)) s.nse = nse(s.predicted.score.value(), s.gt_progress.value());
    s.reward_components = reward_components(s.predicted, s.gt_ref_index, s.gt_progress, s.n_steps, rewards);
    s.reward_total = combine_rewards(s.reward_components, s.predicted.format_ok, rewards);
    return s;
}

namespace {

std::optional<double> mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct Accumulator {
    std::vector<double> nse;  // fractions
    std::vector<double> prc;  // percent, one per trajectory
    int n_answerable = 0;
    int n_answerable_abstained = 0;
    int n_unanswerable = 0;
    int n_unanswerable_abstained = 0;
    SettingMetrics counts;
};

void add_setting(Accumulator& acc, std::span<const ScoredSample> group) {
    std::map<std::string, std::vector<ScoredSample>> by_traj;
    for (const auto& s : group) {
        ++acc.counts.n_samples;
        if (s.abstained) ++acc.counts.n_abstained;
        if (!s.abstained && s.predicted.score.is_malformed()) ++acc.counts.n_malformed;
        if (s.answerable) {
            ++acc.n_answerable;
            if (s.abstained) ++acc.n_answerable_abstained;
            if (s.nse) {
                acc.nse.push_back(*s.nse);
                ++acc.counts.n_valid_nse;
            }
            by_traj[s.trajectory_id].push_back(s);
        } else {
            ++acc.n_unanswerable;
            if (s.abstained) ++acc.n_unanswerable_abstained;
        }
    }
    for (const auto& [traj, samples] : by_traj) {
        const PrcOutcome o = prc_trajectory(samples);
        switch (o.status) {
            case PrcStatus::value:
                acc.prc.push_back(o.value);
                ++acc.counts.n_trajectories;
                break;
            case PrcStatus::nan: ++acc.counts.n_nan_trajectories; break;
            case PrcStatus::excluded: ++acc.counts.n_excluded_trajectories; break;
        }
    }
}

SettingMetrics finalize(const Accumulator& acc) {
    SettingMetrics m = acc.counts;
    if (auto v = mean_of(acc.nse)) m.nse_mean = 100.0 * *v;
    m.prc_mean = mean_of(acc.prc);
    if (acc.n_answerable > 0) m.afrr = 100.0 * acc.n_answerable_abstained / acc.n_answerable;
    if (acc.n_unanswerable > 0) m.uda = 100.0 * acc.n_unanswerable_abstained / acc.n_unanswerable;
    return m;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json setting_to_json(const SettingMetrics& m) {
    return json{{"nse_mean", opt(m.nse_mean)},
                {"prc_mean", opt(m.prc_mean)},
                {"afrr", opt(m.afrr)},
                {"uda", opt(m.uda)},
                {"n_samples", m.n_samples},
                {"n_valid_nse", m.n_valid_nse},
                {"n_abstained", m.n_abstained},
                {"n_malformed", m.n_malformed},
                {"n_trajectories", m.n_trajectories},
                {"n_nan_trajectories", m.n_nan_trajectories},
                {"n_excluded_trajectories", m.n_excluded_trajectories}};
}

std::string csv_num(const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : std::string(); }

}  // namespace

MetricsReport aggregate(std::span<const ScoredSample> samples) {
    MetricsReport r;
    std::map<std::string, std::vector<ScoredSample>> by_setting;
    for (const auto& s : samples) by_setting[s.setting()].push_back(s);

    Accumulator pooled;
    std::vector<double> macro_nse, macro_prc, macro_afrr, macro_uda;
    for (const auto& [key, group] : by_setting) {
        Accumulator acc;
        add_setting(acc, group);
        add_setting(pooled, group);
        const SettingMetrics m = finalize(acc);
        const bool answerable = group.front().answerable;
        if (answerable) {
            if (m.nse_mean) {
                macro_nse.push_back(*m.nse_mean);
            } else {
                r.warnings.push_back(key + ": no valid NSE samples; omitted from macro NSE");
            }
            if (m.prc_mean) {
                macro_prc.push_back(*m.prc_mean);
            } else {
                r.warnings.push_back(key + ": no trajectory with a defined PRC; omitted from macro PRC");
            }
            if (m.afrr) macro_afrr.push_back(*m.afrr);
        } else if (m.uda) {
            macro_uda.push_back(*m.uda);
        }
        if (m.n_nan_trajectories > 0) {
            r.warnings.push_back(fmt::format("{}: {} trajectory(ies) with collapsed predictions (PRC NaN)", key,
                                             m.n_nan_trajectories));
        }
        r.per_setting.emplace(key, m);
    }
    if (samples.empty()) r.warnings.push_back("no samples");

    r.micro = finalize(pooled);
    r.macro = pooled.counts;
    r.macro.nse_mean = mean_of(macro_nse);
    r.macro.prc_mean = mean_of(macro_prc);
    r.macro.afrr = mean_of(macro_afrr);
    r.macro.uda = mean_of(macro_uda);
    return r;
}

json report_to_json(const MetricsReport& r) {
    json per = json::object();
    for (const auto& [k, m] : r.per_setting) per[k] = setting_to_json(m);
    return json{{"units", "percent"},
                {"per_setting", per},
                {"micro", setting_to_json(r.micro)},
                {"macro", setting_to_json(r.macro)},
                {"warnings", r.warnings}};
}

std::string report_to_csv(const MetricsReport& r) {
    std::string out = "setting,n_samples,nse,prc,afrr,uda,n_trajectories,n_nan_trajectories\n";
    auto row = [&](const std::string& name, const SettingMetrics& m) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", name, m.n_samples, csv_num(m.nse_mean), csv_num(m.prc_mean),
                           csv_num(m.afrr), csv_num(m.uda), m.n_trajectories, m.n_nan_trajectories);
    };
    for (const auto& [k, m] : r.per_setting) row(k, m);
    row("micro", r.micro);
    row("macro", r.macro);
    return out;
}

}  // namespace progbench
