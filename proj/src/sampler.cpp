// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "progbench/sampler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "progbench/error.hpp"
#include "progbench/io.hpp"

namespace progbench {

namespace {

// Portable primitives: std::uniform_*_distribution output differs between
// standard libraries, and instance files must be byte-stable.
double unit_open(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

template <class T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

std::string instance_id_for(std::string_view traj, Modality m, View v, const Segment& seg) {
    std::string_view tag = m == Modality::text ? "t" : (v == View::cross ? "vc" : "vs");
    return fmt::format("{}_{}_j{}_d{:.6f}", traj, tag, seg.j, seg.delta);
}

bool all_steps_have_text(const Trajectory& t) {
    return std::all_of(t.steps.begin(), t.steps.end(), [](const KeyStep& s) { return s.text && !s.text->empty(); });
}

bool all_steps_have_frames(const Trajectory& t) {
    return std::all_of(t.steps.begin(), t.steps.end(),
                       [](const KeyStep& s) { return s.frame_ref && !s.frame_ref->empty(); });
}

// Nearest frame of `viewpoint` to the sampled time within the segment; ties go
// to the earlier frame.
const VideoFrame& lookup_frame(const Trajectory& t, const std::string& viewpoint, int j, double delta) {
    const double start = t.steps[static_cast<std::size_t>(j - 1)].time();
    const double end = t.steps[static_cast<std::size_t>(j)].time();
    const double target = start + delta * (end - start);
    const VideoFrame* best = nullptr;
    double best_dist = 0.0;
    for (const VideoFrame& f : t.video_frames) {
        if (f.viewpoint != viewpoint || f.timestamp < start || f.timestamp > end) continue;
        const double d = std::fabs(f.timestamp - target);
        if (best == nullptr || d < best_dist || (d == best_dist && f.timestamp < best->timestamp)) {
            best = &f;
            best_dist = d;
        }
    }
    if (best == nullptr) {
        throw Error(ErrorCode::MissingFrame,
                    fmt::format("trajectory {} has no '{}' frame in segment {} (t={})", t.id, viewpoint, j, target));
    }
    return *best;
}

std::string lowercase_alnum(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

}  // namespace

SamplingMode sampling_mode_from_string(std::string_view s) {
    if (s == "interval") return SamplingMode::interval;
    if (s == "boundary") return SamplingMode::boundary;
    if (s == "mixed") return SamplingMode::mixed;
    throw Error(ErrorCode::InvalidConfig, "unknown sampling mode '" + std::string(s) + "'");
}

std::string_view to_string(SamplingMode m) {
    switch (m) {
        case SamplingMode::interval: return "interval";
        case SamplingMode::boundary: return "boundary";
        case SamplingMode::mixed: return "mixed";
    }
    return "interval";
}

void SamplerConfig::validate() const {
    if (k < 2) throw Error(ErrorCode::InvalidConfig, "k must be >= 2");
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw Error(ErrorCode::InvalidConfig, "epsilon must lie in (0, 0.5)");
    if (!(cross_view_fraction >= 0.0 && cross_view_fraction <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "cross_view_fraction must lie in [0, 1]");
    if (!(unanswerable_fraction >= 0.0 && unanswerable_fraction <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "unanswerable_fraction must lie in [0, 1]");
    if (modalities.empty()) throw Error(ErrorCode::InvalidConfig, "at least one modality is required");
}

double interpolate_progress(double p_j, double p_next, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::DeltaOutOfRange, fmt::format("delta={}", delta));
    if (!(p_j < p_next)) throw Error(ErrorCode::NonMonotoneSegment, fmt::format("{} >= {}", p_j, p_next));
    return p_j + delta * (p_next - p_j);
}

std::vector<double> interval_deltas(int k) {
    if (k < 2) throw Error(ErrorCode::KTooSmall, fmt::format("k={}", k));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k - 1));
    for (int i = 1; i < k; ++i) out.push_back(static_cast<double>(i) / static_cast<double>(k));
    return out;
}

double boundary_delta(double epsilon, std::mt19937_64& rng) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw Error(ErrorCode::EpsilonOutOfRange, fmt::format("epsilon={}", epsilon));
    const double lo = 1.0 - epsilon;
    double d = lo + epsilon * unit_open(rng);
    if (d >= 1.0) d = std::nextafter(1.0, 0.0);
    if (d <= lo) d = std::nextafter(lo, 1.0);
    return d;
}

std::mt19937_64 trajectory_rng(std::uint64_t seed, std::string_view trajectory_id) {
    return std::mt19937_64(seed ^ stable_hash64(trajectory_id));
}

int nearest_reference_step(const Segment& seg) { return seg.delta <= 0.5 ? seg.j : seg.j + 1; }

std::vector<EvalInstance> build_instances(const Trajectory& t, const SamplerConfig& cfg) {
    cfg.validate();
    if (auto v = validate_trajectory(t); !v.empty()) {
        std::string msg = t.id + ":";
        for (const auto& x : v) msg += " " + x.str();
        throw Error(ErrorCode::InvalidTrajectory, msg);
    }

    std::mt19937_64 rng = trajectory_rng(cfg.rng_seed, t.id);
    const int n = static_cast<int>(t.steps.size());

    std::vector<Segment> samples;
    for (int j = 1; j < n; ++j) {
        std::vector<double> deltas;
        if (cfg.mode != SamplingMode::boundary) deltas = interval_deltas(cfg.k);
        if (cfg.mode != SamplingMode::interval) deltas.push_back(boundary_delta(cfg.epsilon, rng));
        std::sort(deltas.begin(), deltas.end());
        for (double d : deltas) samples.push_back({j, d});
    }

    const std::string& demo_view = t.steps.front().viewpoint;
    std::vector<std::string> other_views;
    for (const auto& v : t.viewpoints) {
        if (v != demo_view) other_views.push_back(v);
    }

    auto base_instance = [&](const Segment& seg) {
        EvalInstance inst;
        inst.trajectory_id = t.id;
        inst.task_goal = t.goal;
        inst.answerable = true;
        const double p_j = t.steps[static_cast<std::size_t>(seg.j - 1)].progress;
        const double p_next = t.steps[static_cast<std::size_t>(seg.j)].progress;
        inst.gt_progress = ScoreAnswer::of(interpolate_progress(p_j, p_next, seg.delta));
        inst.gt_ref_index = RefAnswer::of(nearest_reference_step(seg));
        inst.segment = seg;
        return inst;
    };

    std::vector<EvalInstance> out;
    for (Modality modality : cfg.modalities) {
        if (modality == Modality::vision) {
            if (!all_steps_have_frames(t)) continue;
            std::vector<DemoStep> demo;
            for (const auto& s : t.steps) demo.push_back({s.progress, s.text.value_or(""), *s.frame_ref});

            const auto n_cross = static_cast<std::size_t>(std::llround(cfg.cross_view_fraction * static_cast<double>(samples.size())));
            if (n_cross > 0 && other_views.empty()) {
                throw Error(ErrorCode::InsufficientViewpoints,
                            fmt::format("trajectory {} declares {} viewpoint(s)", t.id, t.viewpoints.size()));
            }
            std::vector<std::size_t> order(samples.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            shuffle_in_place(order, rng);
            std::vector<bool> is_cross(samples.size(), false);
            for (std::size_t i = 0; i < n_cross; ++i) is_cross[order[i]] = true;

            for (std::size_t i = 0; i < samples.size(); ++i) {
                EvalInstance inst = base_instance(samples[i]);
                inst.modality = Modality::vision;
                inst.view = is_cross[i] ? View::cross : View::same;
                inst.demo_payload = demo;
                inst.observation_viewpoint = is_cross[i] ? other_views[uniform_index(rng, other_views.size())] : demo_view;
                inst.observation_ref = lookup_frame(t, inst.observation_viewpoint, samples[i].j, samples[i].delta).ref;
                inst.instance_id = instance_id_for(t.id, inst.modality, inst.view, inst.segment);
                out.push_back(std::move(inst));
            }
        } else {
            if (!all_steps_have_text(t)) continue;
            std::vector<DemoStep> demo;
            for (const auto& s : t.steps) demo.push_back({s.progress, *s.text, ""});
            for (const Segment& seg : samples) {
                EvalInstance inst = base_instance(seg);
                inst.modality = Modality::text;
                inst.view = View::not_applicable;
                inst.demo_payload = demo;
                inst.observation_viewpoint = demo_view;
                inst.observation_ref = lookup_frame(t, demo_view, seg.j, seg.delta).ref;
                inst.instance_id = instance_id_for(t.id, inst.modality, inst.view, inst.segment);
                out.push_back(std::move(inst));
            }
        }
    }
    return out;
}

void from_json(const json& j, TextRewrite& r) {
    j.at("trajectory_id").get_to(r.trajectory_id);
    j.at("edited_goal").get_to(r.edited_goal);
    j.at("edited_demo").get_to(r.edited_demo);
}

std::vector<std::string> bracket_markers(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = text.find('[', pos)) != std::string_view::npos) {
        const auto close = text.find(']', pos + 1);
        if (close == std::string_view::npos) break;
        out.emplace_back(text.substr(pos, close - pos + 1));
        pos = close + 1;
    }
    return out;
}

EvalInstance make_unanswerable_text(const EvalInstance& inst, const TextRewrite& rewrite) {
    if (inst.modality != Modality::text) throw Error(ErrorCode::WrongModality, inst.instance_id);
    if (!inst.answerable) throw Error(ErrorCode::NotAnswerable, inst.instance_id);
    if (rewrite.edited_demo.size() != inst.demo_payload.size()) {
        throw Error(ErrorCode::StepCountMismatch, fmt::format("{}: rewrite has {} steps, demo has {}", inst.instance_id,
                                                              rewrite.edited_demo.size(), inst.demo_payload.size()));
    }
    for (std::size_t i = 0; i < inst.demo_payload.size(); ++i) {
        std::multiset<std::string> available;
        for (auto& m : bracket_markers(rewrite.edited_demo[i])) available.insert(std::move(m));
        for (const auto& m : bracket_markers(inst.demo_payload[i].text)) {
            auto it = available.find(m);
            if (it == available.end()) {
                throw Error(ErrorCode::MarkerLost, fmt::format("{}: step {} lost {}", inst.instance_id, i + 1, m));
            }
            available.erase(it);
        }
    }
    EvalInstance out = inst;
    out.instance_id = inst.instance_id + "-neg";
    if (!rewrite.edited_goal.empty()) out.task_goal = rewrite.edited_goal;
    for (std::size_t i = 0; i < out.demo_payload.size(); ++i) out.demo_payload[i].text = rewrite.edited_demo[i];
    out.answerable = false;
    out.gt_progress = ScoreAnswer::abstain();
    out.gt_ref_index = RefAnswer::abstain();
    out.source_instance_id = inst.instance_id;
    return out;
}

std::string canonical_strategy(std::string_view strategy) {
    const std::string key = lowercase_alnum(strategy);
    if (key == "colorchange") return "Color Change";
    if (key == "objectreplacement") return "Object Replacement";
    if (key == "occlusionremoval" || key == "occlusion" || key == "removal") return "Occlusion/Removal";
    throw Error(ErrorCode::UnknownStrategy, std::string(strategy));
}

void to_json(json& j, const ReviewCandidate& c) {
    j = json{{"id", c.id},
             {"original_image_ref", c.original_image_ref},
             {"edited_image_ref", c.edited_image_ref},
             {"task_goal", c.task_goal},
             {"steps", c.steps},
             {"strategy", c.strategy},
             {"edit_prompt", c.edit_prompt},
             {"instance", c.instance}};
}

void from_json(const json& j, ReviewCandidate& c) {
    j.at("id").get_to(c.id);
    j.at("original_image_ref").get_to(c.original_image_ref);
    j.at("edited_image_ref").get_to(c.edited_image_ref);
    c.task_goal = j.value("task_goal", std::string{});
    c.steps = j.value("steps", std::vector<std::string>{});
    j.at("strategy").get_to(c.strategy);
    c.edit_prompt = j.value("edit_prompt", std::string{});
    c.instance = j.at("instance").get<EvalInstance>();
}

ReviewCandidate make_unanswerable_vision(const EvalInstance& inst, const std::string& edited_frame_ref,
                                         const EditRecord& edit) {
    const std::string strategy = canonical_strategy(edit.strategy);
    if (inst.modality != Modality::vision) throw Error(ErrorCode::WrongModality, inst.instance_id);
    if (!inst.answerable) throw Error(ErrorCode::NotAnswerable, inst.instance_id);

    ReviewCandidate c;
    c.id = inst.instance_id + "-neg";
    c.original_image_ref = inst.observation_ref;
    c.edited_image_ref = edited_frame_ref;
    c.task_goal = inst.task_goal;
    for (std::size_t i = 0; i < inst.demo_payload.size(); ++i) {
        c.steps.push_back(fmt::format("Step {}. {}", i + 1, inst.demo_payload[i].text));
    }
    c.strategy = strategy;
    c.edit_prompt = edit.prompt;

    // The embedded instance stays answerable until a keep verdict arrives.
    c.instance = inst;
    c.instance.instance_id = c.id;
    c.instance.observation_ref = edited_frame_ref;
    c.instance.source_instance_id = inst.instance_id;
    c.instance.edit = EditRecord{strategy, edit.prompt};
    return c;
}

EvalInstance accept_candidate(const ReviewCandidate& c) {
    EvalInstance out = c.instance;
    out.answerable = false;
    out.gt_progress = ScoreAnswer::abstain();
    out.gt_ref_index = RefAnswer::abstain();
    return out;
}

void from_json(const json& j, ImageEdit& e) {
    j.at("instance_id").get_to(e.instance_id);
    j.at("edited_frame_ref").get_to(e.edited_frame_ref);
    e.edit.strategy = j.at("strategy").get<std::string>();
    e.edit.prompt = j.value("prompt", std::string{});
}

void to_json(json& j, const ReviewDecision& d) {
    j = json{{"candidate_id", d.candidate_id},
             {"verdict", d.verdict == Verdict::keep ? "keep" : "discard"},
             {"annotator", d.annotator},
             {"timestamp", d.timestamp}};
}

void from_json(const json& j, ReviewDecision& d) {
    j.at("candidate_id").get_to(d.candidate_id);
    const auto v = j.at("verdict").get<std::string>();
    if (v == "keep") {
        d.verdict = Verdict::keep;
    } else if (v == "discard") {
        d.verdict = Verdict::discard;
    } else {
        throw Error(ErrorCode::ParseError, "verdict must be keep or discard, got '" + v + "'");
    }
    d.annotator = j.value("annotator", std::string{});
    d.timestamp = j.value("timestamp", std::string{});
}

std::map<std::string, Verdict> latest_verdicts(const std::vector<ReviewDecision>& events) {
    std::map<std::string, Verdict> out;
    for (const auto& e : events) out[e.candidate_id] = e.verdict;
    return out;
}

BuildOutputs assemble_benchmark(const std::vector<Trajectory>& trajectories, const SamplerConfig& cfg,
                                const std::vector<TextRewrite>& rewrites, const std::vector<ImageEdit>& edits,
                                const std::vector<ReviewDecision>& decisions) {
    cfg.validate();
    if (trajectories.empty()) throw Error(ErrorCode::EmptyDataset, "no trajectories");

    BuildOutputs out;
    std::set<std::string> seen_ids;
    for (const auto& t : trajectories) {
        if (!seen_ids.insert(t.id).second) throw Error(ErrorCode::InvalidTrajectory, "duplicate trajectory id " + t.id);
        for (auto& inst : build_instances(t, cfg)) out.instances.push_back(std::move(inst));
    }

    // Negative seeds: a fixed fraction of each setting group, chosen under an
    // RNG keyed by the group so groups are independent of each other.
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < out.instances.size(); ++i) {
        const auto& inst = out.instances[i];
        groups[setting_group(inst.modality, inst.view)].push_back(i);
    }
    std::vector<std::size_t> seed_positions;
    for (auto& [group, members] : groups) {
        std::sort(members.begin(), members.end(),
                  [&](std::size_t a, std::size_t b) { return out.instances[a].instance_id < out.instances[b].instance_id; });
        std::mt19937_64 rng(cfg.rng_seed ^ stable_hash64("negatives:" + group));
        shuffle_in_place(members, rng);
        const auto n_seed =
            static_cast<std::size_t>(std::llround(cfg.unanswerable_fraction * static_cast<double>(members.size())));
        seed_positions.insert(seed_positions.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_seed));
    }
    std::sort(seed_positions.begin(), seed_positions.end());

    std::map<std::string, const TextRewrite*> rewrite_by_traj;
    for (const auto& r : rewrites) rewrite_by_traj[r.trajectory_id] = &r;
    std::map<std::string, const ImageEdit*> edit_by_instance;
    for (const auto& e : edits) edit_by_instance[e.instance_id] = &e;
    const auto verdicts = latest_verdicts(decisions);

    std::vector<EvalInstance> negatives;
    for (std::size_t pos : seed_positions) {
        const EvalInstance& seed = out.instances[pos];
        NegativeSeed ns{seed.instance_id, seed.modality, ""};
        if (seed.modality == Modality::text) {
            auto it = rewrite_by_traj.find(seed.trajectory_id);
            if (it == rewrite_by_traj.end()) {
                ns.status = "awaiting_rewrite";
            } else {
                negatives.push_back(make_unanswerable_text(seed, *it->second));
                ns.status = "built";
            }
        } else {
            auto it = edit_by_instance.find(seed.instance_id);
            if (it == edit_by_instance.end()) {
                ns.status = "awaiting_edit";
            } else {
                ReviewCandidate c = make_unanswerable_vision(seed, it->second->edited_frame_ref, it->second->edit);
                auto v = verdicts.find(c.id);
                if (v == verdicts.end()) {
                    ns.status = "pending_review";
                    out.pending_review.push_back(std::move(c));
                } else if (v->second == Verdict::keep) {
                    ns.status = "kept";
                    negatives.push_back(accept_candidate(c));
                } else {
                    ns.status = "discarded";
                }
            }
        }
        out.negative_seeds.push_back(std::move(ns));
    }
    for (auto& n : negatives) out.instances.push_back(std::move(n));

    for (const auto& inst : out.instances) ++out.counts_by_setting[setting_key(inst)];
    return out;
}

}  // namespace progbench
