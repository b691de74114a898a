// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "progbench/core.hpp"

namespace progbench {

enum class TemplateId { vision_infer, text_infer, direct, vision_cot, text_cot, visual_nega, text_nega };

inline constexpr std::array<TemplateId, 7> kAllTemplates{TemplateId::vision_infer, TemplateId::text_infer,
                                                         TemplateId::direct,       TemplateId::vision_cot,
                                                         TemplateId::text_cot,     TemplateId::visual_nega,
                                                         TemplateId::text_nega};

std::string_view to_string(TemplateId id);
TemplateId template_id_from_string(std::string_view s);

/// Where an image attaches in the rendered text. Every slot corresponds to one
/// occurrence of kImageMarker, in order.
inline constexpr std::string_view kImageMarker = "<image>";

struct ImageSlot {
    std::size_t offset = 0;  // byte offset of the marker in `text`
    std::string frame_ref;

    friend bool operator==(const ImageSlot&, const ImageSlot&) = default;
};

struct PromptBundle {
    std::string text;
    std::vector<ImageSlot> image_slots;
    TemplateId template_id = TemplateId::vision_infer;
    std::string instance_id;

    friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

void to_json(json& j, const PromptBundle& b);
void from_json(const json& j, PromptBundle& b);

/// Template texts with `{placeholder}` slots, one per TemplateId.
class TemplateSet {
public:
    /// Templates compiled into the library from templates/*.txt.
    static const TemplateSet& builtin();
    /// Loads `<dir>/<template_id>.txt`; files that are absent fall back to the builtin text.
    static TemplateSet from_directory(const std::filesystem::path& dir);

    const std::string& get(TemplateId id) const { return texts_[static_cast<std::size_t>(id)]; }
    void set(TemplateId id, std::string text) { texts_[static_cast<std::size_t>(id)] = std::move(text); }

private:
    std::array<std::string, kAllTemplates.size()> texts_;
};

/// Single-pass substitution of `{name}` for every key in `values`; other brace
/// groups are copied through untouched and substituted text is never rescanned.
std::string fill_placeholders(std::string_view tmpl, const std::map<std::string, std::string>& values);

PromptBundle render_vision_infer(const EvalInstance& inst, const TemplateSet& templates = TemplateSet::builtin());
PromptBundle render_text_infer(const EvalInstance& inst, const TemplateSet& templates = TemplateSet::builtin());
/// Picks vision_infer or text_infer by the instance's modality.
PromptBundle render_infer(const EvalInstance& inst, const TemplateSet& templates = TemplateSet::builtin());
PromptBundle render_direct(const EvalInstance& inst, const TemplateSet& templates = TemplateSet::builtin());

/// Guided-reasoning prompt carrying the ground-truth reference and score.
/// ABSTAIN values render as "n/a" (abnormal-case reasoning).
PromptBundle render_cot_gen(const EvalInstance& inst, const RefAnswer& gt_ref, const ScoreAnswer& gt_score,
                            const TemplateSet& templates = TemplateSet::builtin());

enum class NegativeKind { visual, text };

PromptBundle render_negative_gen(const EvalInstance& inst, NegativeKind kind,
                                 const TemplateSet& templates = TemplateSet::builtin());

/// Step line used in text demonstrations: step number, text, then the progress percent after a dash.
std::string text_step_line(int index, const DemoStep& step);

}  // namespace progbench
