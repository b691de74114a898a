// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "progbench/error.hpp"
#include "progbench/io.hpp"
#include "progbench/pipeline.hpp"
#include "support.hpp"

using namespace progbench;

namespace {

fs::path toy(const std::string& name) { return testing::source_dir() / "data" / "toy" / name; }

BuildInputs toy_inputs() {
    return {toy("trajectories.jsonl"), toy("rewrites.jsonl"), toy("edits.jsonl"), toy("decisions.jsonl")};
}

void check_optional(const std::optional<double>& got, const json& want) {
    if (want.is_null()) {
        CHECK_FALSE(got.has_value());
    } else {
        REQUIRE(got.has_value());
        CHECK(std::fabs(*got - want.get<double>()) <= 1e-9);
    }
}

void check_metrics(const SettingMetrics& m, const json& want) {
    check_optional(m.nse_mean, want.at("nse_mean"));
    check_optional(m.prc_mean, want.at("prc_mean"));
    check_optional(m.afrr, want.at("afrr"));
    check_optional(m.uda, want.at("uda"));
}

bool has_warning(const MetricsReport& r, std::string_view needle) {
    for (const auto& w : r.warnings) {
        if (w.find(needle) != std::string::npos) return true;
    }
    return false;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::PreconditionFailed;
}

}  // namespace

TEST_SUITE("pipeline") {
    TEST_CASE("build writes deterministic artifacts") {
        testing::TempDir a, b;
        const auto out = cmd_build(toy_inputs(), SamplerConfig{}, a.path());
        cmd_build(toy_inputs(), SamplerConfig{}, b.path());
        CHECK_FALSE(out.instances.empty());
        for (const char* f : {"instances.jsonl", "pending_review.jsonl", "negative_seeds.jsonl"}) {
            REQUIRE(fs::exists(a / f));
            CHECK(read_text_file(a / f) == read_text_file(b / f));
        }
        CHECK(read_jsonl(a / "instances.jsonl").size() == out.instances.size());
        const auto summary = build_summary(out);
        CHECK(summary.find("answerable") != std::string::npos);
        CHECK(summary.find(std::to_string(out.instances.size())) != std::string::npos);
    }

    TEST_CASE("build rejects invalid and empty input") {
        testing::TempDir dir;
        auto t = testing::make_trajectory("bad", {0, 60, 40, 100});
        write_jsonl(dir / "bad.jsonl", {json(t)});
        CHECK(code_of([&] { cmd_build({dir / "bad.jsonl"}, SamplerConfig{}, dir / "out"); }) == ErrorCode::InvalidTrajectory);
        try {
            cmd_build({dir / "bad.jsonl"}, SamplerConfig{}, dir / "out");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("bad: NonIncreasingProgress@3") != std::string::npos);
        }
        write_text_file(dir / "empty.jsonl", "");
        CHECK(code_of([&] { cmd_build({dir / "empty.jsonl"}, SamplerConfig{}, dir / "out"); }) == ErrorCode::EmptyDataset);
    }

    TEST_CASE("score matches the independent oracle") {
        testing::TempDir dir;
        const auto out = cmd_score(testing::fixture("score12_instances.jsonl"), testing::fixture("score12_responses.jsonl"), dir.path());
        const json want = json::parse(read_text_file(testing::fixture("score12_expected.json")));
        for (const auto& [key, m] : want.at("per_setting").items()) {
            INFO(key);
            REQUIRE(out.report.per_setting.count(key) == 1);
            check_metrics(out.report.per_setting.at(key), m);
        }
        check_metrics(out.report.micro, want.at("micro"));
        check_metrics(out.report.macro, want.at("macro"));
        CHECK(has_warning(out.report, "OrphanResponse: s12_orphan"));
        for (const char* f : {"report.json", "report.csv", "scored_samples.jsonl"}) CHECK(fs::exists(dir / f));
        CHECK(json::parse(read_text_file(dir / "report.json")) == report_to_json(out.report));
        CHECK(read_jsonl(dir / "scored_samples.jsonl").size() == out.samples.size());
    }

    TEST_CASE("all answerable responses abstaining") {
        testing::TempDir dir;
        std::vector<json> insts;
        std::vector<json> resps;
        for (const auto& row : read_jsonl(testing::fixture("score12_instances.jsonl"))) {
            if (!row.at("answerable").get<bool>()) continue;
            insts.push_back(row);
            RawResponse r;
            r.instance_id = row.at("instance_id").get<std::string>();
            r.template_id = "vision_infer";
            r.response_text = testing::full_response("n/a", "n/a");
            r.attempt_count = 1;
            resps.push_back(r);
        }
        write_jsonl(dir / "i.jsonl", insts);
        write_jsonl(dir / "r.jsonl", resps);
        const auto out = cmd_score(dir / "i.jsonl", dir / "r.jsonl", dir / "scores");
        REQUIRE(out.report.micro.afrr.has_value());
        CHECK(*out.report.micro.afrr == doctest::Approx(100.0));
        CHECK_FALSE(out.report.micro.nse_mean.has_value());
        CHECK(has_warning(out.report, "no valid NSE samples"));
    }

    TEST_CASE("mock eval and prompt rendering") {
        testing::TempDir dir;
        const auto built = cmd_build(toy_inputs(), SamplerConfig{}, dir / "ds");
        std::vector<json> ten;
        for (std::size_t i = 0; i < 10; ++i) ten.push_back(built.instances[i]);
        write_jsonl(dir / "ten.jsonl", ten);

        MockOptions mock;
        mock.enabled = true;
        const auto resp = cmd_eval(dir / "ten.jsonl", EndpointConfig{}, "infer", TemplateSet::builtin(), dir / "r.jsonl", mock);
        CHECK(resp.size() == 10);
        CHECK(read_jsonl(dir / "r.jsonl").size() == 10);
        for (std::size_t i = 0; i < resp.size(); ++i) {
            CHECK(resp[i].instance_id == built.instances[i].instance_id);
            CHECK(resp[i].response_text.has_value());
        }

        const auto direct = cmd_prompt(dir / "ten.jsonl", "direct", TemplateSet::builtin(), dir / "p.jsonl");
        CHECK(direct.size() == 10);
        for (const auto& b : direct) CHECK(b.text.find("<ref_think>") == std::string::npos);
        CHECK(schema_for_template("direct") == Schema::direct);
        CHECK(schema_for_template("infer") == Schema::full);
        CHECK_THROWS_AS(render_for_eval(built.instances[0], "nonsense", TemplateSet::builtin()), Error);
    }

    TEST_CASE("rewards and analysis outputs") {
        testing::TempDir dir;
        write_jsonl(dir / "rows.jsonl",
                    {json{{"raw_response", testing::full_response("2", "50%")}, {"gt_ref", 2}, {"gt_score", 50.0}, {"n_steps", 4}},
                     json{{"raw_response", "garbage"}, {"gt_ref", 2}, {"gt_score", 50.0}, {"n_steps", 4}}});
        const auto rows = cmd_rewards(dir / "rows.jsonl", dir / "rewards.csv");
        REQUIRE(rows.size() == 2);
        CHECK(rows[0] == RewardComponents{1.0, 1.0, 1.0});
        CHECK(rows[1] == RewardComponents{0.0, 0.0, 0.0});
        CHECK(read_text_file(dir / "rewards.csv").rfind("row,r_format,r_ref,r_score,total,format_ok", 0) == 0);
        cmd_rewards(dir / "rows.jsonl", dir / "rewards.jsonl");
        const auto jl = read_jsonl(dir / "rewards.jsonl");
        REQUIRE(jl.size() == 2);
        CHECK(jl[0].at("total").get<double>() == doctest::Approx(1.0));
        CHECK(jl[1].at("total").get<double>() == doctest::Approx(0.0));

        cmd_score(testing::fixture("score12_instances.jsonl"), testing::fixture("score12_responses.jsonl"), dir / "scores");
        cmd_analyze(dir / "scores" / "scored_samples.jsonl", dir / "analysis");
        for (const char* f : {"histograms.json", "errors.json", "coupling.json", "histograms.csv", "errors.csv", "coupling.csv"}) {
            CHECK(fs::exists(dir / "analysis" / f));
        }
        const json h = json::parse(read_text_file(dir / "analysis" / "histograms.json"));
        CHECK(h.contains("overall"));
    }
}
