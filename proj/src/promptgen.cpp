// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "progbench/promptgen.hpp"

#include <fstream>

#include <fmt/format.h>

#include "progbench/error.hpp"
#include "progbench/io.hpp"

namespace progbench {

// Generated from templates/*.txt at configure time.
std::string_view builtin_template_text(TemplateId id);

namespace {

// Replaces any marker-shaped text inside user data so that markers in the
// rendered prompt come only from real image slots.
std::string neutralize_markers(std::string s) {
    std::size_t pos = 0;
    while ((pos = s.find(kImageMarker, pos)) != std::string::npos) {
        s.replace(pos, kImageMarker.size(), "[image]");
        pos += 7;
    }
    return s;
}

PromptBundle finish(std::string text, std::vector<std::string> refs, TemplateId id, const EvalInstance& inst) {
    PromptBundle b;
    b.template_id = id;
    b.instance_id = inst.instance_id;
    std::size_t pos = 0;
    std::size_t i = 0;
    while ((pos = text.find(kImageMarker, pos)) != std::string::npos) {
        if (i >= refs.size()) throw Error(ErrorCode::UnknownTemplate, "template contains a stray image marker");
        b.image_slots.push_back({pos, std::move(refs[i++])});
        pos += kImageMarker.size();
    }
    if (i != refs.size()) {
        throw Error(ErrorCode::UnknownTemplate, fmt::format("{} template is missing an image placeholder", to_string(id)));
    }
    b.text = std::move(text);
    return b;
}

std::string goal_line(const EvalInstance& inst) { return "Task goal: " + neutralize_markers(inst.task_goal) + "\n"; }

// Demo frames in step order, each followed by its progress label.
std::string vision_demonstration(const EvalInstance& inst, std::vector<std::string>& refs) {
    std::string out = goal_line(inst);
    for (std::size_t i = 0; i < inst.demo_payload.size(); ++i) {
        const DemoStep& s = inst.demo_payload[i];
        if (s.frame_ref.empty()) {
            throw Error(ErrorCode::PreconditionFailed, fmt::format("{}: demo step {} has no frame", inst.instance_id, i + 1));
        }
        out += fmt::format("{} {}%", kImageMarker, format_percent(s.progress));
        if (i + 1 < inst.demo_payload.size()) out += '\n';
        refs.push_back(s.frame_ref);
    }
    return out;
}

std::string text_demonstration(const EvalInstance& inst) {
    std::string out = goal_line(inst);
    for (std::size_t i = 0; i < inst.demo_payload.size(); ++i) {
        out += text_step_line(static_cast<int>(i) + 1, inst.demo_payload[i]);
        if (i + 1 < inst.demo_payload.size()) out += '\n';
    }
    return out;
}

std::string demonstration_for(const EvalInstance& inst, std::vector<std::string>& refs) {
    return inst.modality == Modality::vision ? vision_demonstration(inst, refs) : text_demonstration(inst);
}

std::string text_demo_list(const EvalInstance& inst) {
    json arr = json::array();
    for (const auto& s : inst.demo_payload) arr.push_back(neutralize_markers(s.text));
    return arr.dump();
}

std::string ref_literal(const RefAnswer& r) {
    return r.has_value() ? std::to_string(r.value()) : std::string(kAbstainLiteral);
}

std::string score_literal(const ScoreAnswer& s) {
    return s.has_value() ? format_percent(s.value()) + "%" : std::string(kAbstainLiteral);
}

}  // namespace

std::string_view to_string(TemplateId id) {
    switch (id) {
        case TemplateId::vision_infer: return "vision_infer";
        case TemplateId::text_infer: return "text_infer";
        case TemplateId::direct: return "direct";
        case TemplateId::vision_cot: return "vision_cot";
        case TemplateId::text_cot: return "text_cot";
        case TemplateId::visual_nega: return "visual_nega";
        case TemplateId::text_nega: return "text_nega";
    }
    return "vision_infer";
}

TemplateId template_id_from_string(std::string_view s) {
    for (TemplateId id : kAllTemplates) {
        if (to_string(id) == s) return id;
    }
    throw Error(ErrorCode::UnknownTemplate, std::string(s));
}

void to_json(json& j, const PromptBundle& b) {
    json slots = json::array();
    for (const auto& s : b.image_slots) slots.push_back({{"offset", s.offset}, {"frame_ref", s.frame_ref}});
    j = json{{"instance_id", b.instance_id},
             {"template_id", to_string(b.template_id)},
             {"text", b.text},
             {"image_slots", slots}};
}

void from_json(const json& j, PromptBundle& b) {
    j.at("instance_id").get_to(b.instance_id);
    b.template_id = template_id_from_string(j.at("template_id").get<std::string>());
    j.at("text").get_to(b.text);
    b.image_slots.clear();
    for (const auto& s : j.at("image_slots")) {
        b.image_slots.push_back({s.at("offset").get<std::size_t>(), s.at("frame_ref").get<std::string>()});
    }
}

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet set = [] {
        TemplateSet s;
        for (TemplateId id : kAllTemplates) s.set(id, std::string(builtin_template_text(id)));
        return s;
    }();
    return set;
}

TemplateSet TemplateSet::from_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::IoError, "template directory not found: " + dir.string());
    TemplateSet s = builtin();
    for (TemplateId id : kAllTemplates) {
        const auto path = dir / (std::string(to_string(id)) + ".txt");
        if (std::filesystem::exists(path)) s.set(id, read_text_file(path));
    }
    return s;
}

std::string fill_placeholders(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size() + 256);
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

std::string text_step_line(int index, const DemoStep& step) {
    return fmt::format("Step {}. {} — {}%", index, neutralize_markers(step.text), format_percent(step.progress));
}

PromptBundle render_vision_infer(const EvalInstance& inst, const TemplateSet& templates) {
    if (inst.modality != Modality::vision) throw Error(ErrorCode::WrongModality, inst.instance_id + " is not a vision instance");
    std::vector<std::string> refs;
    const std::string demo = vision_demonstration(inst, refs);
    refs.push_back(inst.observation_ref);
    std::string text = fill_placeholders(templates.get(TemplateId::vision_infer),
                                         {{"demonstration", demo}, {"observation", std::string(kImageMarker)}});
    return finish(std::move(text), std::move(refs), TemplateId::vision_infer, inst);
}

PromptBundle render_text_infer(const EvalInstance& inst, const TemplateSet& templates) {
    if (inst.modality != Modality::text) throw Error(ErrorCode::WrongModality, inst.instance_id + " is not a text instance");
    std::string text =
        fill_placeholders(templates.get(TemplateId::text_infer),
                          {{"demonstration", text_demonstration(inst)}, {"observation", std::string(kImageMarker)}});
    return finish(std::move(text), {inst.observation_ref}, TemplateId::text_infer, inst);
}

PromptBundle render_infer(const EvalInstance& inst, const TemplateSet& templates) {
    return inst.modality == Modality::vision ? render_vision_infer(inst, templates) : render_text_infer(inst, templates);
}

PromptBundle render_direct(const EvalInstance& inst, const TemplateSet& templates) {
    std::vector<std::string> refs;
    const std::string demo = demonstration_for(inst, refs);
    refs.push_back(inst.observation_ref);
    std::string text = fill_placeholders(templates.get(TemplateId::direct),
                                         {{"demonstration", demo}, {"observation", std::string(kImageMarker)}});
    return finish(std::move(text), std::move(refs), TemplateId::direct, inst);
}

PromptBundle render_cot_gen(const EvalInstance& inst, const RefAnswer& gt_ref, const ScoreAnswer& gt_score,
                            const TemplateSet& templates) {
    std::vector<std::string> refs;
    const std::string demo = demonstration_for(inst, refs);
    refs.push_back(inst.observation_ref);
    const std::string ref_str = ref_literal(gt_ref);
    const std::string score_str = score_literal(gt_score);
    if (inst.modality == Modality::vision) {
        std::string text = fill_placeholders(templates.get(TemplateId::vision_cot),
                                             {{"demonstration", demo},
                                              {"observation", std::string(kImageMarker)},
                                              {"closest_idx_str", ref_str},
                                              {"progress_score_str", score_str}});
        return finish(std::move(text), std::move(refs), TemplateId::vision_cot, inst);
    }
    std::string text = fill_placeholders(templates.get(TemplateId::text_cot),
                                         {{"demonstration", demo},
                                          {"observation", std::string(kImageMarker)},
                                          {"closest_idx", ref_str},
                                          {"final_progress_score", score_str}});
    return finish(std::move(text), std::move(refs), TemplateId::text_cot, inst);
}

PromptBundle render_negative_gen(const EvalInstance& inst, NegativeKind kind, const TemplateSet& templates) {
    if (!inst.answerable) throw Error(ErrorCode::NotAnswerable, inst.instance_id);
    std::map<std::string, std::string> values{{"task_goal", neutralize_markers(inst.task_goal)},
                                              {"text_demo", text_demo_list(inst)},
                                              {"observation", std::string(kImageMarker)}};
    if (kind == NegativeKind::text) {
        std::string text = fill_placeholders(templates.get(TemplateId::text_nega), values);
        return finish(std::move(text), {inst.observation_ref}, TemplateId::text_nega, inst);
    }
    const int step = inst.gt_ref_index.value();
    const std::string& instruction = inst.demo_payload.at(static_cast<std::size_t>(step - 1)).text;
    if (instruction.empty()) {
        throw Error(ErrorCode::PreconditionFailed, fmt::format("{}: step {} has no instruction text", inst.instance_id, step));
    }
    values["step_number"] = std::to_string(step);
    values["specific_instruction"] = neutralize_markers(instruction);
    std::string text = fill_placeholders(templates.get(TemplateId::visual_nega), values);
    return finish(std::move(text), {inst.observation_ref}, TemplateId::visual_nega, inst);
}

}  // namespace progbench
