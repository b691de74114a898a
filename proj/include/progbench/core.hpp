// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

// Shared data model: trajectories, benchmark instances, parsed predictions and
// scored samples. Every progress value is in percent units [0, 100].

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace progbench {

using nlohmann::json;

/// Serialized form of the abstention sentinel.
inline constexpr std::string_view kAbstainLiteral = "n/a";

enum class AnswerKind { value, abstain, malformed };

/// A value that may instead be an abstention or an unparseable answer.
/// Abstention is its own state so it can never be averaged in by accident.
template <class T>
class Answer {
public:
    Answer() = default;

    static Answer of(T v) { return Answer(AnswerKind::value, v); }
    static Answer abstain() { return Answer(AnswerKind::abstain, T{}); }
    static Answer malformed() { return Answer(AnswerKind::malformed, T{}); }

    AnswerKind kind() const noexcept { return kind_; }
    bool has_value() const noexcept { return kind_ == AnswerKind::value; }
    bool is_abstain() const noexcept { return kind_ == AnswerKind::abstain; }
    bool is_malformed() const noexcept { return kind_ == AnswerKind::malformed; }

    const T& value() const {
        if (!has_value()) throw std::logic_error("Answer holds no value");
        return value_;
    }

    friend bool operator==(const Answer&, const Answer&) = default;

private:
    Answer(AnswerKind k, T v) : kind_(k), value_(v) {}

    AnswerKind kind_ = AnswerKind::malformed;
    T value_{};
};

using ScoreAnswer = Answer<double>;
using RefAnswer = Answer<int>;

enum class Embodiment { franka, ur5e, agilex, humanoid, human, other };
enum class Modality { vision, text };
enum class View { same, cross, not_applicable };

std::string_view to_string(Embodiment e);
std::string_view to_string(Modality m);
std::string_view to_string(View v);
Embodiment embodiment_from_string(std::string_view s);
Modality modality_from_string(std::string_view s);
View view_from_string(std::string_view s);

struct KeyStep {
    int index = 0;  // 1-based
    double progress = 0.0;
    std::optional<std::string> text;
    std::optional<std::string> frame_ref;
    std::string viewpoint;
    // Position on the raw video's time axis. Defaults to index - 1 when absent.
    std::optional<double> timestamp;

    double time() const { return timestamp.value_or(static_cast<double>(index - 1)); }

    friend bool operator==(const KeyStep&, const KeyStep&) = default;
};

struct VideoFrame {
    std::string ref;
    std::string viewpoint;
    double timestamp = 0.0;

    friend bool operator==(const VideoFrame&, const VideoFrame&) = default;
};

struct Trajectory {
    std::string id;
    std::string goal;
    Embodiment embodiment = Embodiment::other;
    std::vector<std::string> viewpoints;
    std::vector<KeyStep> steps;
    std::vector<VideoFrame> video_frames;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct TrajectoryViolation {
    std::string code;
    int step = 0;  // 0 when the violation is not tied to a step

    std::string str() const;
    friend bool operator==(const TrajectoryViolation&, const TrajectoryViolation&) = default;
};

/// Reports every broken invariant; never throws.
std::vector<TrajectoryViolation> validate_trajectory(const Trajectory& t);

struct DemoStep {
    double progress = 0.0;
    std::string text;       // empty when the step has no description
    std::string frame_ref;  // empty for text demonstrations

    friend bool operator==(const DemoStep&, const DemoStep&) = default;
};

/// Provenance of a sampled observation: segment j (1-based, between steps j
/// and j+1) at relative position delta.
struct Segment {
    int j = 1;
    double delta = 0.5;

    friend bool operator==(const Segment&, const Segment&) = default;
};

struct EditRecord {
    std::string strategy;
    std::string prompt;

    friend bool operator==(const EditRecord&, const EditRecord&) = default;
};

struct EvalInstance {
    std::string instance_id;
    std::string trajectory_id;
    std::string task_goal;
    Modality modality = Modality::vision;
    View view = View::same;
    bool answerable = true;
    std::vector<DemoStep> demo_payload;
    std::string observation_ref;
    std::string observation_viewpoint;
    ScoreAnswer gt_progress = ScoreAnswer::abstain();
    RefAnswer gt_ref_index = RefAnswer::abstain();
    Segment segment;
    std::optional<std::string> source_instance_id;
    std::optional<EditRecord> edit;

    int n_steps() const { return static_cast<int>(demo_payload.size()); }

    friend bool operator==(const EvalInstance&, const EvalInstance&) = default;
};

/// Grouping key of the form "vision/same/answerable".
std::string setting_key(Modality m, View v, bool answerable);
std::string setting_key(const EvalInstance& inst);
/// Group used for macro averaging: modality x view ("vision/cross", "text/not_applicable").
std::string setting_group(Modality m, View v);

std::vector<std::string> validate_instance(const EvalInstance& inst);

struct FormatViolation {
    std::string code;     // e.g. "UnclosedTag"
    std::string subject;  // e.g. "score"; may be empty

    std::string str() const;  // "UnclosedTag(score)"
    friend bool operator==(const FormatViolation&, const FormatViolation&) = default;
};

struct ParsedPrediction {
    std::string ref_think;
    RefAnswer ref = RefAnswer::malformed();
    std::string score_think;
    ScoreAnswer score = ScoreAnswer::malformed();
    bool format_ok = false;
    std::vector<FormatViolation> format_violations;
    std::vector<std::string> notes;  // non-fatal normalizations (FractionReinterpreted)
    std::string raw_text;

    bool abstained() const { return ref.is_abstain() || score.is_abstain(); }
};

struct RewardComponents {
    double r_format = 0.0;
    double r_ref = 0.0;
    double r_score = 0.0;

    friend bool operator==(const RewardComponents&, const RewardComponents&) = default;
};

struct ScoredSample {
    std::string instance_id;
    std::string trajectory_id;
    Modality modality = Modality::vision;
    View view = View::same;
    bool answerable = true;
    int n_steps = 0;
    std::vector<double> demo_progress;
    ScoreAnswer gt_progress = ScoreAnswer::abstain();
    RefAnswer gt_ref_index = RefAnswer::abstain();
    ParsedPrediction predicted;
    std::optional<double> nse;  // fraction in [0, 1]
    bool abstained = false;
    RewardComponents reward_components;
    double reward_total = 0.0;

    std::string setting() const { return setting_key(modality, view, answerable); }
};

// JSON (snake_case field names, ABSTAIN as "n/a").
void to_json(json& j, const KeyStep& s);
void from_json(const json& j, KeyStep& s);
void to_json(json& j, const VideoFrame& f);
void from_json(const json& j, VideoFrame& f);
void to_json(json& j, const Trajectory& t);
void from_json(const json& j, Trajectory& t);
void to_json(json& j, const DemoStep& s);
void from_json(const json& j, DemoStep& s);
void to_json(json& j, const EvalInstance& inst);
void from_json(const json& j, EvalInstance& inst);
void to_json(json& j, const ParsedPrediction& p);
void from_json(const json& j, ParsedPrediction& p);
void to_json(json& j, const ScoredSample& s);
void from_json(const json& j, ScoredSample& s);

json score_to_json(const ScoreAnswer& s);
ScoreAnswer score_from_json(const json& j);
json ref_to_json(const RefAnswer& r);
RefAnswer ref_from_json(const json& j);

}  // namespace progbench
