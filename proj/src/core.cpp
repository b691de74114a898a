// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "progbench/core.hpp"

#include <algorithm>
#include <set>

#include "progbench/error.hpp"

namespace progbench {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DeltaOutOfRange: return "DeltaOutOfRange";
        case ErrorCode::NonMonotoneSegment: return "NonMonotoneSegment";
        case ErrorCode::KTooSmall: return "KTooSmall";
        case ErrorCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
        case ErrorCode::MissingFrame: return "MissingFrame";
        case ErrorCode::InsufficientViewpoints: return "InsufficientViewpoints";
        case ErrorCode::InvalidTrajectory: return "InvalidTrajectory";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::MarkerLost: return "MarkerLost";
        case ErrorCode::StepCountMismatch: return "StepCountMismatch";
        case ErrorCode::UnknownStrategy: return "UnknownStrategy";
        case ErrorCode::NotAnswerable: return "NotAnswerable";
        case ErrorCode::WrongModality: return "WrongModality";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::OrphanResponse: return "OrphanResponse";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::UnknownTemplate: return "UnknownTemplate";
        case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail)), code_(code) {}

std::string_view to_string(Embodiment e) {
    switch (e) {
        case Embodiment::franka: return "franka";
        case Embodiment::ur5e: return "ur5e";
        case Embodiment::agilex: return "agilex";
        case Embodiment::humanoid: return "humanoid";
        case Embodiment::human: return "human";
        case Embodiment::other: return "other";
    }
    return "other";
}

std::string_view to_string(Modality m) { return m == Modality::vision ? "vision" : "text"; }

std::string_view to_string(View v) {
    switch (v) {
        case View::same: return "same";
        case View::cross: return "cross";
        case View::not_applicable: return "not_applicable";
    }
    return "not_applicable";
}

Embodiment embodiment_from_string(std::string_view s) {
    for (auto e : {Embodiment::franka, Embodiment::ur5e, Embodiment::agilex, Embodiment::humanoid,
                   Embodiment::human, Embodiment::other}) {
        if (to_string(e) == s) return e;
    }
    throw Error(ErrorCode::ParseError, "unknown embodiment '" + std::string(s) + "'");
}

Modality modality_from_string(std::string_view s) {
    if (s == "vision") return Modality::vision;
    if (s == "text") return Modality::text;
    throw Error(ErrorCode::ParseError, "unknown modality '" + std::string(s) + "'");
}

View view_from_string(std::string_view s) {
    if (s == "same") return View::same;
    if (s == "cross") return View::cross;
    if (s == "not_applicable") return View::not_applicable;
    throw Error(ErrorCode::ParseError, "unknown view '" + std::string(s) + "'");
}

std::string TrajectoryViolation::str() const {
    return step > 0 ? code + "@" + std::to_string(step) : code;
}

std::vector<TrajectoryViolation> validate_trajectory(const Trajectory& t) {
    std::vector<TrajectoryViolation> out;
    if (t.id.empty()) out.push_back({"EmptyId"});
    if (t.steps.size() < 2) out.push_back({"TooFewSteps"});

    const std::set<std::string> declared(t.viewpoints.begin(), t.viewpoints.end());
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const KeyStep& s = t.steps[i];
        const int pos = static_cast<int>(i) + 1;
        if (s.index != pos) out.push_back({"NonContiguousIndex", pos});
        if (s.progress < 0.0 || s.progress > 100.0) out.push_back({"ProgressOutOfRange", pos});
        if (i > 0 && !(s.progress > t.steps[i - 1].progress)) out.push_back({"NonIncreasingProgress", pos});
        if (i > 0 && !(s.time() > t.steps[i - 1].time())) out.push_back({"NonIncreasingTimestamp", pos});
        const bool has_text = s.text && !s.text->empty();
        const bool has_frame = s.frame_ref && !s.frame_ref->empty();
        if (!has_text && !has_frame) out.push_back({"EmptyStep", pos});
        if (!declared.contains(s.viewpoint)) out.push_back({"UnknownViewpoint", pos});
    }
    if (!t.steps.empty()) {
        if (t.steps.front().progress != 0.0) out.push_back({"FirstStepNotZero"});
        if (t.steps.back().progress != 100.0) out.push_back({"LastStepNotHundred"});
    }
    for (const VideoFrame& f : t.video_frames) {
        if (!declared.contains(f.viewpoint)) {
            out.push_back({"UnknownFrameViewpoint"});
            break;
        }
    }
    return out;
}

std::string setting_key(Modality m, View v, bool answerable) {
    return setting_group(m, v) + (answerable ? "/answerable" : "/unanswerable");
}

std::string setting_key(const EvalInstance& inst) {
    return setting_key(inst.modality, inst.view, inst.answerable);
}

std::string setting_group(Modality m, View v) {
    return std::string(to_string(m)) + "/" + std::string(to_string(v));
}

std::vector<std::string> validate_instance(const EvalInstance& inst) {
    std::vector<std::string> out;
    const bool progress_abstain = inst.gt_progress.is_abstain();
    const bool ref_abstain = inst.gt_ref_index.is_abstain();
    if (inst.answerable == progress_abstain || inst.answerable == ref_abstain) out.push_back("AnswerabilityMismatch");
    if (inst.gt_progress.is_malformed() || inst.gt_ref_index.is_malformed()) out.push_back("MalformedGroundTruth");
    if (inst.modality == Modality::text && inst.view != View::not_applicable) out.push_back("TextViewNotApplicable");
    if (inst.modality == Modality::vision && inst.view == View::not_applicable) out.push_back("VisionViewMissing");
    if (!(inst.segment.delta > 0.0 && inst.segment.delta < 1.0)) out.push_back("DeltaOutOfRange");
    if (inst.segment.j < 1 || inst.segment.j >= inst.n_steps()) out.push_back("SegmentOutOfRange");
    if (inst.gt_progress.has_value()) {
        const double g = inst.gt_progress.value();
        if (g < 0.0 || g > 100.0) out.push_back("ProgressOutOfRange");
    }
    if (inst.gt_ref_index.has_value()) {
        const int r = inst.gt_ref_index.value();
        if (r < 1 || r > inst.n_steps()) out.push_back("RefOutOfRange");
    }
    return out;
}

std::string FormatViolation::str() const { return subject.empty() ? code : code + "(" + subject + ")"; }

// ---------------------------------------------------------------- JSON

json score_to_json(const ScoreAnswer& s) {
    switch (s.kind()) {
        case AnswerKind::value: return s.value();
        case AnswerKind::abstain: return std::string(kAbstainLiteral);
        case AnswerKind::malformed: return nullptr;
    }
    return nullptr;
}

ScoreAnswer score_from_json(const json& j) {
    if (j.is_null()) return ScoreAnswer::malformed();
    if (j.is_string()) {
        if (j.get<std::string>() == kAbstainLiteral) return ScoreAnswer::abstain();
        throw Error(ErrorCode::ParseError, "expected number or \"n/a\", got " + j.dump());
    }
    return ScoreAnswer::of(j.get<double>());
}

json ref_to_json(const RefAnswer& r) {
    switch (r.kind()) {
        case AnswerKind::value: return r.value();
        case AnswerKind::abstain: return std::string(kAbstainLiteral);
        case AnswerKind::malformed: return nullptr;
    }
    return nullptr;
}

RefAnswer ref_from_json(const json& j) {
    if (j.is_null()) return RefAnswer::malformed();
    if (j.is_string()) {
        if (j.get<std::string>() == kAbstainLiteral) return RefAnswer::abstain();
        throw Error(ErrorCode::ParseError, "expected integer or \"n/a\", got " + j.dump());
    }
    return RefAnswer::of(j.get<int>());
}

namespace {

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

template <class T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) {
        v = it->template get<T>();
    } else {
        v.reset();
    }
}

}  // namespace

void to_json(json& j, const KeyStep& s) {
    j = json{{"index", s.index}, {"progress", s.progress}, {"viewpoint", s.viewpoint}};
    put_optional(j, "text", s.text);
    put_optional(j, "frame_ref", s.frame_ref);
    put_optional(j, "timestamp", s.timestamp);
}

void from_json(const json& j, KeyStep& s) {
    j.at("index").get_to(s.index);
    j.at("progress").get_to(s.progress);
    s.viewpoint = j.value("viewpoint", std::string{});
    get_optional(j, "text", s.text);
    get_optional(j, "frame_ref", s.frame_ref);
    get_optional(j, "timestamp", s.timestamp);
}

void to_json(json& j, const VideoFrame& f) {
    j = json{{"ref", f.ref}, {"viewpoint", f.viewpoint}, {"timestamp", f.timestamp}};
}

void from_json(const json& j, VideoFrame& f) {
    j.at("ref").get_to(f.ref);
    j.at("viewpoint").get_to(f.viewpoint);
    j.at("timestamp").get_to(f.timestamp);
}

void to_json(json& j, const Trajectory& t) {
    j = json{{"id", t.id},
             {"goal", t.goal},
             {"embodiment", to_string(t.embodiment)},
             {"viewpoints", t.viewpoints},
             {"steps", t.steps},
             {"video_frames", t.video_frames}};
}

void from_json(const json& j, Trajectory& t) {
    j.at("id").get_to(t.id);
    j.at("goal").get_to(t.goal);
    t.embodiment = embodiment_from_string(j.value("embodiment", std::string("other")));
    t.steps = j.at("steps").get<std::vector<KeyStep>>();
    t.video_frames = j.value("video_frames", std::vector<VideoFrame>{});
    if (j.contains("viewpoints")) {
        t.viewpoints = j.at("viewpoints").get<std::vector<std::string>>();
    } else {
        // Derive the declared set from what the steps and frames reference.
        std::vector<std::string> seen;
        auto add = [&](const std::string& v) {
            if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
        };
        for (const auto& s : t.steps) add(s.viewpoint);
        for (const auto& f : t.video_frames) add(f.viewpoint);
        t.viewpoints = std::move(seen);
    }
}

void to_json(json& j, const DemoStep& s) {
    j = json{{"progress", s.progress}};
    if (!s.text.empty()) j["text"] = s.text;
    if (!s.frame_ref.empty()) j["frame_ref"] = s.frame_ref;
}

void from_json(const json& j, DemoStep& s) {
    j.at("progress").get_to(s.progress);
    s.text = j.value("text", std::string{});
    s.frame_ref = j.value("frame_ref", std::string{});
}

void to_json(json& j, const EvalInstance& inst) {
    j = json{{"instance_id", inst.instance_id},
             {"trajectory_id", inst.trajectory_id},
             {"task_goal", inst.task_goal},
             {"modality", to_string(inst.modality)},
             {"view", to_string(inst.view)},
             {"answerable", inst.answerable},
             {"demo_payload", inst.demo_payload},
             {"observation_ref", inst.observation_ref},
             {"observation_viewpoint", inst.observation_viewpoint},
             {"gt_progress", score_to_json(inst.gt_progress)},
             {"gt_ref_index", ref_to_json(inst.gt_ref_index)},
             {"segment", {{"j", inst.segment.j}, {"delta", inst.segment.delta}}}};
    put_optional(j, "source_instance_id", inst.source_instance_id);
    if (inst.edit) j["edit"] = {{"strategy", inst.edit->strategy}, {"prompt", inst.edit->prompt}};
}

void from_json(const json& j, EvalInstance& inst) {
    j.at("instance_id").get_to(inst.instance_id);
    j.at("trajectory_id").get_to(inst.trajectory_id);
    inst.task_goal = j.value("task_goal", std::string{});
    inst.modality = modality_from_string(j.at("modality").get<std::string>());
    inst.view = view_from_string(j.at("view").get<std::string>());
    j.at("answerable").get_to(inst.answerable);
    inst.demo_payload = j.at("demo_payload").get<std::vector<DemoStep>>();
    j.at("observation_ref").get_to(inst.observation_ref);
    inst.observation_viewpoint = j.value("observation_viewpoint", std::string{});
    inst.gt_progress = score_from_json(j.at("gt_progress"));
    inst.gt_ref_index = ref_from_json(j.at("gt_ref_index"));
    const json& seg = j.at("segment");
    seg.at("j").get_to(inst.segment.j);
    seg.at("delta").get_to(inst.segment.delta);
    get_optional(j, "source_instance_id", inst.source_instance_id);
    if (auto it = j.find("edit"); it != j.end() && !it->is_null()) {
        inst.edit = EditRecord{it->at("strategy").get<std::string>(), it->at("prompt").get<std::string>()};
    } else {
        inst.edit.reset();
    }
}

void to_json(json& j, const ParsedPrediction& p) {
    std::vector<std::string> violations;
    for (const auto& v : p.format_violations) violations.push_back(v.str());
    j = json{{"ref_think", p.ref_think},
             {"ref", ref_to_json(p.ref)},
             {"score_think", p.score_think},
             {"score", score_to_json(p.score)},
             {"format_ok", p.format_ok},
             {"format_violations", violations},
             {"notes", p.notes},
             {"raw_text", p.raw_text}};
}

void from_json(const json& j, ParsedPrediction& p) {
    p.ref_think = j.value("ref_think", std::string{});
    p.ref = ref_from_json(j.at("ref"));
    p.score_think = j.value("score_think", std::string{});
    p.score = score_from_json(j.at("score"));
    j.at("format_ok").get_to(p.format_ok);
    p.format_violations.clear();
    for (const auto& s : j.value("format_violations", std::vector<std::string>{})) {
        const auto open = s.find('(');
        if (open != std::string::npos && s.back() == ')') {
            p.format_violations.push_back({s.substr(0, open), s.substr(open + 1, s.size() - open - 2)});
        } else {
            p.format_violations.push_back({s, ""});
        }
    }
    p.notes = j.value("notes", std::vector<std::string>{});
    p.raw_text = j.value("raw_text", std::string{});
}

void to_json(json& j, const ScoredSample& s) {
    j = json{{"instance_id", s.instance_id},
             {"trajectory_id", s.trajectory_id},
             {"setting", s.setting()},
             {"modality", to_string(s.modality)},
             {"view", to_string(s.view)},
             {"answerable", s.answerable},
             {"n_steps", s.n_steps},
             {"demo_progress", s.demo_progress},
             {"gt_progress", score_to_json(s.gt_progress)},
             {"gt_ref_index", ref_to_json(s.gt_ref_index)},
             {"predicted", s.predicted},
             {"nse", s.nse ? json(*s.nse) : json(nullptr)},
             {"abstained", s.abstained},
             {"reward_components",
              {{"r_format", s.reward_components.r_format},
               {"r_ref", s.reward_components.r_ref},
               {"r_score", s.reward_components.r_score}}},
             {"reward_total", s.reward_total}};
}

void from_json(const json& j, ScoredSample& s) {
    j.at("instance_id").get_to(s.instance_id);
    j.at("trajectory_id").get_to(s.trajectory_id);
    s.modality = modality_from_string(j.at("modality").get<std::string>());
    s.view = view_from_string(j.at("view").get<std::string>());
    j.at("answerable").get_to(s.answerable);
    j.at("n_steps").get_to(s.n_steps);
    s.demo_progress = j.value("demo_progress", std::vector<double>{});
    s.gt_progress = score_from_json(j.at("gt_progress"));
    s.gt_ref_index = ref_from_json(j.at("gt_ref_index"));
    j.at("predicted").get_to(s.predicted);
    s.nse.reset();
    if (const auto it = j.find("nse"); it != j.end() && it->is_number()) s.nse = it->get<double>();
    j.at("abstained").get_to(s.abstained);
    const json& rc = j.at("reward_components");
    s.reward_components = {rc.at("r_format").get<double>(), rc.at("r_ref").get<double>(),
                           rc.at("r_score").get<double>()};
    j.at("reward_total").get_to(s.reward_total);
}

}  // namespace progbench
