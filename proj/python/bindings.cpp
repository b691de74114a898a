// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

// Python bindings. Structured results cross the boundary as plain dicts built
// from the library's JSON serialization.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "progbench/error.hpp"
#include "progbench/io.hpp"
#include "progbench/metrics.hpp"
#include "progbench/pipeline.hpp"
#include "progbench/promptgen.hpp"
#include "progbench/response_parser.hpp"
#include "progbench/rewards.hpp"
#include "progbench/sampler.hpp"

namespace py = pybind11;
namespace pb = progbench;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_py(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

pb::ScoreAnswer score_arg(const py::object& o) { return pb::score_from_json(from_py(o)); }
pb::RefAnswer ref_arg(const py::object& o) { return pb::ref_from_json(from_py(o)); }

pb::RewardConfig reward_config(double alpha, double beta, double gamma, const std::string& ref_mode,
                               const std::string& score_mode, bool normalize) {
    pb::RewardConfig c;
    c.alpha = alpha;
    c.beta = beta;
    c.gamma = gamma;
    c.ref_mode = pb::ref_reward_mode_from_string(ref_mode);
    c.score_mode = pb::score_reward_mode_from_string(score_mode);
    c.normalize_total = normalize;
    return c;
}

}  // namespace

PYBIND11_MODULE(_progbench, m) {
    m.doc() = "Task-progress benchmark toolkit";

    static py::exception<pb::Error> error(m, "ProgbenchError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const pb::Error& e) {
            py::set_error(error, e.what());
        }
    });

    m.def("interpolate_progress", &pb::interpolate_progress, py::arg("p_j"), py::arg("p_next"), py::arg("delta"));
    m.def("interval_deltas", &pb::interval_deltas, py::arg("k"));
    m.def("nse", &pb::nse, py::arg("pred"), py::arg("gt"));
    m.def(
        "spearman",
        [](const std::vector<double>& x, const std::vector<double>& y) { return pb::spearman(x, y); },
        py::arg("x"), py::arg("y"));
    m.def("format_percent", &pb::format_percent, py::arg("value"));

    m.def(
        "validate_trajectory",
        [](const py::object& traj) {
            std::vector<std::string> out;
            for (const auto& v : pb::validate_trajectory(from_py(traj).get<pb::Trajectory>())) out.push_back(v.str());
            return out;
        },
        py::arg("trajectory"));

    m.def(
        "build_instances",
        [](const py::object& traj, int k, double epsilon, const std::string& mode, std::uint64_t seed,
           double cross_view_fraction) {
            pb::SamplerConfig cfg;
            cfg.k = k;
            cfg.epsilon = epsilon;
            cfg.mode = pb::sampling_mode_from_string(mode);
            cfg.rng_seed = seed;
            cfg.cross_view_fraction = cross_view_fraction;
            return to_py(pb::build_instances(from_py(traj).get<pb::Trajectory>(), cfg));
        },
        py::arg("trajectory"), py::arg("k") = 4, py::arg("epsilon") = 0.1, py::arg("mode") = "interval",
        py::arg("seed") = 42, py::arg("cross_view_fraction") = 0.5);

    m.def(
        "parse_response",
        [](const std::string& raw, const std::string& schema, int n_steps) {
            return to_py(pb::parse_response(raw, pb::schema_from_string(schema), n_steps));
        },
        py::arg("raw"), py::arg("schema") = "full", py::arg("n_steps") = 0);

    m.def(
        "render_prompt",
        [](const py::object& instance, const std::string& template_name) {
            return to_py(pb::render_for_eval(from_py(instance).get<pb::EvalInstance>(), template_name,
                                             pb::TemplateSet::builtin()));
        },
        py::arg("instance"), py::arg("template") = "infer");

    m.def(
        "reward_components",
        [](const std::string& raw, const py::object& gt_ref, const py::object& gt_score, int n_steps, double alpha,
           double beta, double gamma, const std::string& ref_mode, const std::string& score_mode, bool normalize) {
            const auto cfg = reward_config(alpha, beta, gamma, ref_mode, score_mode, normalize);
            const auto pred = pb::parse_response(raw, pb::Schema::full, n_steps);
            const auto c = pb::reward_components(pred, ref_arg(gt_ref), score_arg(gt_score), n_steps, cfg);
            return py::dict(py::arg("r_format") = c.r_format, py::arg("r_ref") = c.r_ref, py::arg("r_score") = c.r_score,
                            py::arg("total") = pb::combine_rewards(c, pred.format_ok, cfg));
        },
        py::arg("raw"), py::arg("gt_ref"), py::arg("gt_score"), py::arg("n_steps"), py::arg("alpha") = 1.0,
        py::arg("beta") = 6.0, py::arg("gamma") = 3.0, py::arg("ref_mode") = "exact", py::arg("score_mode") = "linear",
        py::arg("normalize") = true);

    m.def(
        "score_and_aggregate",
        [](const py::object& instances, const std::vector<std::string>& responses, const std::string& schema) {
            const auto insts = from_py(instances).get<std::vector<pb::EvalInstance>>();
            if (insts.size() != responses.size()) throw pb::Error(pb::ErrorCode::LengthMismatch, "instances vs responses");
            std::vector<pb::ScoredSample> samples;
            for (std::size_t i = 0; i < insts.size(); ++i) {
                samples.push_back(pb::score_sample(insts[i], responses[i], pb::schema_from_string(schema)));
            }
            return to_py(pb::report_to_json(pb::aggregate(samples)));
        },
        py::arg("instances"), py::arg("responses"), py::arg("schema") = "full");

    m.def(
        "build",
        [](const std::filesystem::path& trajectories, const std::filesystem::path& out_dir, std::uint64_t seed,
           const std::filesystem::path& rewrites, const std::filesystem::path& edits,
           const std::filesystem::path& decisions) {
            pb::SamplerConfig cfg;
            cfg.rng_seed = seed;
            const auto out = pb::cmd_build({trajectories, rewrites, edits, decisions}, cfg, out_dir);
            return pb::build_summary(out);
        },
        py::arg("trajectories"), py::arg("out_dir"), py::arg("seed") = 42, py::arg("rewrites") = "",
        py::arg("edits") = "", py::arg("decisions") = "");

    m.def(
        "eval_mock",
        [](const std::filesystem::path& instances, const std::filesystem::path& out_path, std::uint64_t seed,
           const std::string& template_name) {
            py::gil_scoped_release release;
            const auto responses =
                pb::cmd_eval(instances, pb::EndpointConfig{}, template_name, pb::TemplateSet::builtin(), out_path,
                             pb::MockOptions{true, seed, 0});
            return responses.size();
        },
        py::arg("instances"), py::arg("out_path"), py::arg("seed") = 42, py::arg("template") = "infer");

    m.def(
        "score",
        [](const std::filesystem::path& instances, const std::filesystem::path& responses,
           const std::filesystem::path& out_dir) {
            return to_py(pb::report_to_json(pb::cmd_score(instances, responses, out_dir).report));
        },
        py::arg("instances"), py::arg("responses"), py::arg("out_dir"));

    m.def(
        "analyze",
        [](const std::filesystem::path& scored, const std::filesystem::path& out_dir) { pb::cmd_analyze(scored, out_dir); },
        py::arg("scored_samples"), py::arg("out_dir"));
}
