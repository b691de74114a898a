// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "progbench/error.hpp"
#include "progbench/response_parser.hpp"
#include "progbench/rewards.hpp"
#include "support.hpp"

using namespace progbench;
using testing::full_response;

TEST_SUITE("rewards") {
    TEST_CASE("format reward") {
        CHECK(reward_format(parse_response(full_response("2", "50%"))) == 1.0);
        CHECK(reward_format(parse_response("<ref_think>a</ref_think><ref>2</ref><score>50</score>")) == 0.0);
        CHECK(reward_format(parse_response(full_response("2", "50%") + "<ref>2</ref>")) == 0.0);
    }

    TEST_CASE("reference reward") {
        RewardConfig decay;
        decay.ref_mode = RefRewardMode::distance_decay;
        const auto p5 = parse_response(full_response("5", "50%"));
        const auto p4 = parse_response(full_response("4", "50%"));
        const auto pa = parse_response(full_response("n/a", "n/a"));
        CHECK(reward_ref(p5, RefAnswer::of(5), 6) == 1.0);
        CHECK(reward_ref(p4, RefAnswer::of(5), 6) == 0.0);
        CHECK(reward_ref(p4, RefAnswer::of(5), 6, decay) == doctest::Approx(0.8).epsilon(1e-15));
        CHECK(reward_ref(pa, RefAnswer::of(3), 6) == 0.0);
        CHECK(reward_ref(pa, RefAnswer::of(3), 6, decay) == 0.0);
        CHECK(reward_ref(pa, RefAnswer::abstain(), 6) == 1.0);
        CHECK(reward_ref(p4, RefAnswer::abstain(), 6) == 0.0);
    }

    TEST_CASE("score reward") {
        CHECK(reward_score(parse_response(full_response("1", "76%")), ScoreAnswer::of(80)) == doctest::Approx(0.96));
        CHECK(reward_score(parse_response(full_response("1", "33%")), ScoreAnswer::of(33)) == 1.0);
        CHECK(reward_score(parse_response(full_response("n/a", "n/a")), ScoreAnswer::abstain()) == 1.0);
        CHECK(reward_score(parse_response(full_response("n/a", "n/a")), ScoreAnswer::of(10)) == 0.0);
        RewardConfig shaped;
        shaped.score_mode = ScoreRewardMode::nse;
        CHECK(reward_score(parse_response(full_response("1", "76%")), ScoreAnswer::of(80), shaped) ==
              doctest::Approx(0.95));
    }

    TEST_CASE("weighted total") {
        const RewardConfig cfg;
        CHECK(combine_rewards({1, 1, 1}, true, cfg) == 1.0);
        CHECK(combine_rewards({0, 0, 0}, true, cfg) == 0.0);
        CHECK(combine_rewards({1, 0, 0.5}, true, cfg) == 0.25);
        RewardConfig raw;
        raw.normalize_total = false;
        CHECK(combine_rewards({1, 0, 0.5}, true, raw) == 2.5);
        RewardConfig gated;
        gated.gate_on_format = true;
        CHECK(combine_rewards({0, 1, 1}, false, gated) == 0.0);
    }

    TEST_CASE("weight isolation: each weight only scales its own component") {
        const RewardComponents c{0.3, 0.6, 0.9};
        const double only[3] = {c.r_format, c.r_ref, c.r_score};
        for (int k = 0; k < 3; ++k) {
            RewardConfig cfg;
            cfg.alpha = k == 0 ? 1.0 : 0.0;
            cfg.beta = k == 1 ? 1.0 : 0.0;
            cfg.gamma = k == 2 ? 1.0 : 0.0;
            CHECK(combine_rewards(c, true, cfg) == doctest::Approx(only[k]));
            RewardComponents moved = c;
            // perturbing another component leaves the total unchanged
            (k == 0 ? moved.r_ref : moved.r_format) = 0.0;
            CHECK(combine_rewards(moved, true, cfg) == doctest::Approx(only[k]));
        }
    }

    TEST_CASE("invalid weights") {
        RewardConfig cfg;
        cfg.alpha = cfg.beta = cfg.gamma = 0.0;
        CHECK_THROWS_AS(cfg.validate(), Error);
        cfg.alpha = -1.0;
        CHECK_THROWS_AS(cfg.validate(), Error);
    }
}
