// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <numeric>

#include "progbench/analysis.hpp"
#include "progbench/error.hpp"
#include "support.hpp"

using namespace progbench;

namespace {

ScoredSample scored(std::optional<double> score, std::optional<int> ref = std::nullopt,
                    std::vector<double> demo = {0, 25, 50, 75, 100}) {
    ScoredSample s;
    s.trajectory_id = "t";
    s.demo_progress = std::move(demo);
    s.n_steps = static_cast<int>(s.demo_progress.size());
    s.predicted.score = score ? ScoreAnswer::of(*score) : ScoreAnswer::abstain();
    s.predicted.ref = ref ? RefAnswer::of(*ref) : (score ? RefAnswer::malformed() : RefAnswer::abstain());
    s.abstained = !score;
    return s;
}

Histogram counts_histogram(std::vector<int> counts) {
    Histogram h = histogram_of(std::vector<double>{}, static_cast<int>(counts.size()));
    h.counts = std::move(counts);
    return h;
}

}  // namespace

TEST_SUITE("analysis") {
    TEST_CASE("constant predictions fill one bin") {
        std::vector<ScoredSample> s(30, scored(50.0));
        const Histogram h = score_histogram(s, 10);
        CHECK(std::count_if(h.counts.begin(), h.counts.end(), [](int c) { return c > 0; }) == 1);
        CHECK(h.total() == 30);
    }

    TEST_CASE("uniform predictions give a flat histogram") {
        std::vector<ScoredSample> s;
        for (int i = 0; i < 100; ++i) s.push_back(scored(i + 0.5));
        const Histogram h = score_histogram(s, 10);
        for (int c : h.counts) CHECK(c == 10);
    }

    TEST_CASE("abstentions are tallied apart from the histogram mass") {
        std::vector<ScoredSample> s(20, scored(std::nullopt));
        for (int i = 0; i < 5; ++i) s.push_back(scored(30));
        const Histogram h = score_histogram(s, 10);
        CHECK(h.n_abstained == 20);
        CHECK(h.total() == 5);
    }

    TEST_CASE("the top edge lands in the last bin") {
        const Histogram h = histogram_of(std::vector<double>{0.0, 100.0}, 4);
        CHECK(h.counts == std::vector<int>{1, 0, 0, 1});
    }

    TEST_CASE("distribution patterns") {
        CHECK(classify_distribution(counts_histogram({0, 0, 0, 0, 0, 0, 0, 0, 1, 19})) ==
              DistributionPattern::single_peak_collapse);
        CHECK(classify_distribution(counts_histogram({9, 0, 0, 0, 1, 0, 0, 0, 1, 9})) ==
              DistributionPattern::multi_peak_clustering);
        CHECK(classify_distribution(counts_histogram({1, 1, 1, 2, 7, 7, 2, 1, 1, 1})) ==
              DistributionPattern::central_peaked);
        CHECK(classify_distribution(counts_histogram({2, 2, 3, 2, 2, 3, 2, 2, 3, 2})) ==
              DistributionPattern::smooth_continuous);
        CHECK_THROWS_AS(classify_distribution(counts_histogram({1, 2, 3})), Error);
    }

    TEST_CASE("error summary quantiles") {
        const auto a = summarize_errors(std::vector<double>{0.1, 0.2, 0.3});
        CHECK(a.median == 0.2);
        const auto c = summarize_errors(std::vector<double>(7, 0.4));
        CHECK(c.median == 0.4);
        CHECK(c.p90 == 0.4);
        CHECK(c.p99 == 0.4);
        CHECK(c.max == 0.4);
        std::vector<double> hundred;
        for (int i = 0; i < 100; ++i) hundred.push_back(i / 100.0);
        const auto h = summarize_errors(hundred);
        CHECK(h.p90 == 0.90);
        CHECK(h.max == 0.99);
        CHECK(h.histogram.total() == 100);
        CHECK_THROWS_AS(summarize_errors(std::vector<double>{}), Error);
    }

    TEST_CASE("score aligned index") {
        const std::vector<double> demo{0, 25, 50, 75, 100};
        CHECK(score_aligned_index(76, demo) == 4);
        CHECK(score_aligned_index(37.5, demo) == 2);
        CHECK(score_aligned_index(50, demo) == 3);
        CHECK(score_aligned_index(100, demo) == 5);
    }

    TEST_CASE("perfect coupling is diagonal") {
        std::vector<ScoredSample> s;
        const std::vector<double> demo{0, 25, 50, 75, 100};
        for (int i = 0; i < 5; ++i) s.push_back(scored(demo[i] + 3, i + 1));
        const auto m = coupling_matrix(s);
        CHECK(m.diagonal_fraction() == 1.0);
        for (int a = 0; a < m.size; ++a) {
            for (int b = 0; b < m.size; ++b) CHECK(m.counts[a][b] == (a == b ? 1 : 0));
        }
    }

    TEST_CASE("coupling counts") {
        std::vector<ScoredSample> s{scored(25, 2), scored(50, 2), scored(75, 4), scored(std::nullopt)};
        const auto m = coupling_matrix(s);
        CHECK(m.counts[1][1] == 1);
        CHECK(m.counts[1][2] == 1);
        CHECK(m.counts[3][3] == 1);
        CHECK(m.total == 3);
        CHECK(m.diagonal() == 2);
    }

    TEST_CASE("grid coupling maps different lengths onto one grid") {
        CHECK(grid_cell(1, 5, 10) == 0);
        CHECK(grid_cell(5, 5, 10) == 9);
        CHECK(grid_cell(3, 5, 10) == 5);  // round(4.5) rounds half up
        CHECK(grid_cell(2, 3, 10) == 5);
        std::vector<ScoredSample> s{scored(50, 2, {0, 50, 100}), scored(100, 5)};
        const auto g = coupling_matrix_grid(s, 10);
        CHECK(g.total == 2);
        CHECK(g.diagonal() == 2);
        const auto per = coupling_by_trajectory(s);
        CHECK(per.size() == 1);
    }
}
