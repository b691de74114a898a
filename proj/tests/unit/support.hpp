// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "progbench/core.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path source_dir() { return fs::path(PROGBENCH_SOURCE_DIR); }
inline fs::path fixture(const std::string& name) { return source_dir() / "tests" / "fixtures" / name; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() / fmt::format("progbench-test-{}-{}", ::getpid(), counter++);
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

// Trajectory with the given progress values, text on every step, a frame per
// step, and video frames every 0.25 time units on each viewpoint.
inline progbench::Trajectory make_trajectory(const std::string& id, const std::vector<double>& progress,
                                             const std::vector<std::string>& viewpoints = {"front", "side"}) {
    progbench::Trajectory t;
    t.id = id;
    t.goal = "Put the [cup] on the [plate].";
    t.viewpoints = viewpoints;
    for (std::size_t i = 0; i < progress.size(); ++i) {
        progbench::KeyStep s;
        s.index = static_cast<int>(i) + 1;
        s.progress = progress[i];
        s.text = fmt::format("Move the [cup] step {}.", i + 1);
        s.frame_ref = fmt::format("{}/{}_{:03d}.png", id, viewpoints.front(), i * 4);
        s.viewpoint = viewpoints.front();
        t.steps.push_back(s);
    }
    const int n_frames = static_cast<int>(progress.size() - 1) * 4 + 1;
    for (const auto& vp : viewpoints) {
        for (int f = 0; f < n_frames; ++f) t.video_frames.push_back({fmt::format("{}/{}_{:03d}.png", id, vp, f), vp, f * 0.25});
    }
    return t;
}

inline std::string full_response(const std::string& ref, const std::string& score) {
    return fmt::format("<ref_think>r</ref_think><ref>{}</ref><score_think>s</score_think><score>{}</score>", ref, score);
}

}  // namespace testing
