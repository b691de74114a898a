// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>

#include "progbench/error.hpp"
#include "progbench/io.hpp"
#include "progbench/promptgen.hpp"
#include "progbench/response_parser.hpp"
#include "progbench/sampler.hpp"
#include "support.hpp"

using namespace progbench;

namespace {

EvalInstance first_of(Modality m, int n_steps) {
    SamplerConfig cfg;
    cfg.modalities = {m};
    cfg.cross_view_fraction = 0.0;
    std::vector<double> progress;
    for (int i = 0; i < n_steps; ++i) progress.push_back(i == n_steps - 1 ? 100.0 : 100.0 * i / (n_steps - 1) - (i % 2));
    auto t = testing::make_trajectory("gold", progress);
    t.steps[1].text = "Slide the [drawer] to the <image> left.";
    return build_instances(t, cfg).front();
}

// Compares against tests/golden/<name>; PROGBENCH_UPDATE_GOLDEN=1 rewrites the file.
void check_golden(const std::string& name, const PromptBundle& b) {
    const auto path = testing::source_dir() / "tests" / "golden" / name;
    std::string actual = b.text + "\n---\n";
    for (const auto& s : b.image_slots) actual += fmt::format("{} {}\n", s.offset, s.frame_ref);
    if (std::getenv("PROGBENCH_UPDATE_GOLDEN") != nullptr) write_text_file(path, actual);
    CHECK(read_text_file(path) == actual);
}

std::size_t count(const std::string& s, std::string_view needle) {
    std::size_t n = 0;
    for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
    return n;
}

}  // namespace

TEST_SUITE("promptgen") {
    TEST_CASE("vision inference has one slot per demo frame plus the observation") {
        const auto inst = first_of(Modality::vision, 5);
        const auto b = render_vision_infer(inst);
        CHECK(b.image_slots.size() == 6);
        CHECK(b.image_slots.back().frame_ref == inst.observation_ref);
        for (const auto& s : b.image_slots) CHECK(b.text.compare(s.offset, kImageMarker.size(), kImageMarker) == 0);
        CHECK(count(b.text, kImageMarker) == 6);
        check_golden("vision_infer.txt", b);
    }

    TEST_CASE("text inference numbers every step and neutralizes markers in user text") {
        const auto inst = first_of(Modality::text, 4);
        const auto b = render_text_infer(inst);
        CHECK(b.image_slots.size() == 1);
        for (int i = 1; i <= 4; ++i) CHECK(b.text.find(fmt::format("Step {}. ", i)) != std::string::npos);
        CHECK(b.text.find("to the [image] left") != std::string::npos);
        check_golden("text_infer.txt", b);
    }

    TEST_CASE("modality mismatch") {
        CHECK_THROWS_AS(render_vision_infer(first_of(Modality::text, 3)), Error);
        CHECK_THROWS_AS(render_text_infer(first_of(Modality::vision, 3)), Error);
    }

    TEST_CASE("direct prompts ask only for a score") {
        for (Modality m : {Modality::vision, Modality::text}) {
            const auto b = render_direct(first_of(m, 4));
            CHECK(b.text.find("<score>") != std::string::npos);
            CHECK(b.text.find("<ref_think>") == std::string::npos);
            CHECK(b.text.find("<ref>") == std::string::npos);
        }
        check_golden("direct_vision.txt", render_direct(first_of(Modality::vision, 3)));
    }

    TEST_CASE("guided reasoning embeds the ground truth") {
        const auto inst = first_of(Modality::vision, 5);
        const auto b = render_cot_gen(inst, RefAnswer::of(3), ScoreAnswer::of(60));
        CHECK(b.text.find("Final Progress Score to Justify: 60") != std::string::npos);
        CHECK(b.text.find("Closest Reference Frame: 3") != std::string::npos);
        CHECK(render_cot_gen(inst, RefAnswer::of(3), ScoreAnswer::of(60)) == b);
        check_golden("vision_cot.txt", b);

        const auto abn = render_cot_gen(inst, RefAnswer::abstain(), ScoreAnswer::abstain());
        CHECK(abn.text.find("Final Progress Score to Justify: n/a") != std::string::npos);
        CHECK(abn.text.find("Abnormal Situation Handling") != std::string::npos);

        const auto text = render_cot_gen(first_of(Modality::text, 4), RefAnswer::of(2), ScoreAnswer::of(37.5));
        CHECK(text.template_id == TemplateId::text_cot);
        CHECK(text.text.find("37.5%") != std::string::npos);
        check_golden("text_cot.txt", text);
    }

    TEST_CASE("negative generation prompts") {
        const auto inst = first_of(Modality::vision, 4);
        const auto v = render_negative_gen(inst, NegativeKind::visual);
        CHECK(v.text.find("Color Change") != std::string::npos);
        for (const char* tag : {"<strategy_think>", "<strategy>", "<prompt_think>", "<prompt>"}) CHECK(count(v.text, tag) == 1);
        CHECK(count(v.text, "</") == 4);
        check_golden("visual_nega.txt", v);

        const auto t = render_negative_gen(first_of(Modality::text, 4), NegativeKind::text);
        CHECK(t.text.find("<edited_goal>") != std::string::npos);
        check_golden("text_nega.txt", t);

        auto neg = inst;
        neg.answerable = false;
        CHECK_THROWS_AS(render_negative_gen(neg, NegativeKind::visual), Error);
    }

    TEST_CASE("template-compliant outputs parse cleanly") {
        // One answer per inference/reasoning template, written the way each template asks.
        const std::string vision = "<ref_think> Frame 3 shows the gripper closing. </ref_think>\n\n<ref> 3 </ref>\n\n"
                                   "<score_think> Slightly past frame 3. </score_think>\n\n<score> 55% </score>";
        const std::string text = "<ref_think>Step 2 matches.</ref_think>\n<ref>No. 2</ref>\n"
                                 "<score_think>Halfway to step 3.</score_think>\n<score>37.5%</score>";
        const std::string abnormal = "<ref_think>The scene does not match.</ref_think>\n<ref>n/a</ref>\n"
                                     "<score_think>No valid estimate.</score_think>\n<score>\"n/a\"</score>";
        const std::string cot = "<ref_think>Closest is frame 4.</ref_think><ref>4</ref><score_think>Between 4 and 5."
                                "</score_think><score>80</score>";
        for (const auto& raw : {vision, text, abnormal, cot}) {
            const auto p = parse_response(raw, Schema::full, 5);
            INFO(raw);
            CHECK(p.format_ok);
        }
    }

    TEST_CASE("placeholders are filled in one pass") {
        CHECK(fill_placeholders("{a} {b} {c}", {{"a", "{b}"}, {"b", "B"}}) == "{b} B {c}");
    }

    TEST_CASE("template directory overrides and marker checks") {
        testing::TempDir dir;
        write_text_file(dir / "direct.txt", "Demo:\n{demonstration}\nNow: {observation}\n<score></score>");
        const auto set = TemplateSet::from_directory(dir.path());
        CHECK(set.get(TemplateId::direct).rfind("Demo:", 0) == 0);
        CHECK(set.get(TemplateId::vision_infer) == TemplateSet::builtin().get(TemplateId::vision_infer));
        CHECK(render_direct(first_of(Modality::text, 3), set).text.rfind("Demo:\nTask goal:", 0) == 0);

        write_text_file(dir / "direct.txt", "no observation slot {demonstration}");
        CHECK_THROWS_AS(render_direct(first_of(Modality::text, 3), TemplateSet::from_directory(dir.path())), Error);
        CHECK_THROWS_AS(TemplateSet::from_directory(dir / "absent"), Error);
    }

    TEST_CASE("bundle JSON round-trips") {
        const auto b = render_vision_infer(first_of(Modality::vision, 3));
        CHECK(json(b).get<PromptBundle>() == b);
    }

    TEST_CASE("step line format") {
        CHECK(text_step_line(2, {37.5, "Grasp it", ""}) == "Step 2. Grasp it — 37.5%");
        CHECK(text_step_line(1, {0, "Start", ""}) == "Step 1. Start — 0%");
    }
}
