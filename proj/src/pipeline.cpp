// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "progbench/pipeline.hpp"

#include <map>
#include <set>

#include <fmt/format.h>

#include "progbench/error.hpp"
#include "progbench/io.hpp"
#include "progbench/mock_endpoint.hpp"

namespace progbench {

namespace {

template <class T>
std::vector<T> read_optional(const fs::path& path) {
    if (path.empty()) return {};
    if (!fs::exists(path)) throw Error(ErrorCode::IoError, "file not found: " + path.string());
    return read_jsonl_as<T>(path);
}

template <class T>
std::vector<json> to_rows(const std::vector<T>& xs) {
    std::vector<json> rows;
    rows.reserve(xs.size());
    for (const auto& x : xs) rows.emplace_back(x);
    return rows;
}

std::vector<EvalInstance> load_instances(const fs::path& path) {
    auto instances = read_jsonl_as<EvalInstance>(path);
    std::set<std::string> ids;
    for (const auto& inst : instances) {
        if (!ids.insert(inst.instance_id).second) {
            throw Error(ErrorCode::PreconditionFailed, "duplicate instance id " + inst.instance_id);
        }
    }
    return instances;
}

}  // namespace

BuildOutputs cmd_build(const BuildInputs& inputs, const SamplerConfig& cfg, const fs::path& out_dir) {
    const auto trajectories = read_jsonl_as<Trajectory>(inputs.trajectories);
    if (trajectories.empty()) throw Error(ErrorCode::EmptyDataset, "no trajectories in " + inputs.trajectories.string());
    std::vector<std::string> problems;
    for (const auto& t : trajectories) {
        for (const auto& v : validate_trajectory(t)) problems.push_back(fmt::format("{}: {}", t.id, v.str()));
    }
    if (!problems.empty()) throw Error(ErrorCode::InvalidTrajectory, fmt::format("{}", fmt::join(problems, "\n")));

    BuildOutputs out = assemble_benchmark(trajectories, cfg, read_optional<TextRewrite>(inputs.rewrites),
                                          read_optional<ImageEdit>(inputs.edits),
                                          read_optional<ReviewDecision>(inputs.decisions));
    fs::create_directories(out_dir);
    write_jsonl(out_dir / "instances.jsonl", to_rows(out.instances));
    write_jsonl(out_dir / "pending_review.jsonl", to_rows(out.pending_review));
    std::vector<json> seeds;
    for (const auto& s : out.negative_seeds) {
        seeds.push_back({{"instance_id", s.instance_id}, {"modality", to_string(s.modality)}, {"status", s.status}});
    }
    write_jsonl(out_dir / "negative_seeds.jsonl", seeds);
    return out;
}

std::string build_summary(const BuildOutputs& out) {
    struct Tally {
        int answerable = 0;
        int unanswerable = 0;
    };
    std::map<std::string, Tally> groups;
    for (const auto& inst : out.instances) {
        auto& t = groups[setting_group(inst.modality, inst.view)];
        (inst.answerable ? t.answerable : t.unanswerable) += 1;
    }
    std::string s;
    for (const auto& [g, t] : groups) s += fmt::format("{}: {} answerable, {} unanswerable\n", g, t.answerable, t.unanswerable);
    s += fmt::format("total: {} instances, {} pending review\n", out.instances.size(), out.pending_review.size());
    return s;
}

PromptBundle render_for_eval(const EvalInstance& inst, std::string_view template_name, const TemplateSet& templates) {
    if (template_name == "infer") return render_infer(inst, templates);
    switch (template_id_from_string(template_name)) {
        case TemplateId::vision_infer: return render_vision_infer(inst, templates);
        case TemplateId::text_infer: return render_text_infer(inst, templates);
        case TemplateId::direct: return render_direct(inst, templates);
        default: break;
    }
    throw Error(ErrorCode::UnknownTemplate, fmt::format("'{}' is not an evaluation template", template_name));
}

Schema schema_for_template(std::string_view template_name) {
    return template_name == "direct" ? Schema::direct : Schema::full;
}

std::vector<PromptBundle> cmd_prompt(const fs::path& instances_path, std::string_view template_name,
                                     const TemplateSet& templates, const fs::path& out_path) {
    std::vector<PromptBundle> bundles;
    for (const auto& inst : load_instances(instances_path)) bundles.push_back(render_for_eval(inst, template_name, templates));
    write_jsonl(out_path, to_rows(bundles));
    return bundles;
}

std::vector<RawResponse> cmd_eval(const fs::path& instances_path, EndpointConfig endpoint, std::string_view template_name,
                                  const TemplateSet& templates, const fs::path& out_path, const MockOptions& mock) {
    endpoint.validate();
    const auto instances = load_instances(instances_path);
    std::vector<PromptBundle> bundles;
    bundles.reserve(instances.size());
    for (const auto& inst : instances) bundles.push_back(render_for_eval(inst, template_name, templates));

    std::optional<MockEndpoint> server;
    if (mock.enabled) {
        server.emplace(simulated_responder(instances, mock.seed, schema_for_template(template_name), mock.delay_ms));
        endpoint.base_url = server->base_url();
        endpoint.image_transport = ImageTransport::url;
    }
    BatchOptions options;
    options.checkpoint_path = out_path.string() + ".journal";
    auto responses = run_batch(bundles, endpoint, options);
    write_jsonl(out_path, to_rows(responses));
    return responses;
}

ScoreOutputs cmd_score(const fs::path& instances_path, const fs::path& responses_path, const fs::path& out_dir,
                       const RewardConfig& rewards) {
    rewards.validate();
    const auto instances = load_instances(instances_path);
    std::map<std::string, const EvalInstance*> by_id;
    for (const auto& inst : instances) by_id[inst.instance_id] = &inst;

    ScoreOutputs out;
    std::vector<std::string> orphans;
    std::set<std::string> answered;
    for (const auto& r : read_jsonl_as<RawResponse>(responses_path)) {
        const auto it = by_id.find(r.instance_id);
        if (it == by_id.end()) {
            orphans.push_back(r.instance_id);
            continue;
        }
        if (!answered.insert(r.instance_id).second) continue;
        out.samples.push_back(score_sample(*it->second, r.response_text.value_or(""), schema_for_template(r.template_id),
                                           rewards));
    }
    out.report = aggregate(out.samples);
    for (const auto& id : orphans) out.report.warnings.push_back("OrphanResponse: " + id + " has no instance; skipped");
    if (answered.size() < instances.size()) {
        out.report.warnings.push_back(
            fmt::format("{} instance(s) have no response and were not scored", instances.size() - answered.size()));
    }

    fs::create_directories(out_dir);
    write_text_file(out_dir / "report.json", report_to_json(out.report).dump(2) + "\n");
    write_text_file(out_dir / "report.csv", report_to_csv(out.report));
    write_jsonl(out_dir / "scored_samples.jsonl", to_rows(out.samples));
    return out;
}

std::vector<RewardComponents> cmd_rewards(const fs::path& input_path, const fs::path& out_path,
                                          const RewardConfig& rewards) {
    rewards.validate();
    std::vector<RewardComponents> out;
    std::vector<json> rows;
    std::string csv = "row,r_format,r_ref,r_score,total,format_ok\n";
    int line = 0;
    for (const auto& j : read_jsonl(input_path)) {
        ++line;
        const std::string raw = j.at("raw_response").get<std::string>();
        const RefAnswer gt_ref = ref_from_json(j.at("gt_ref"));
        const ScoreAnswer gt_score = score_from_json(j.at("gt_score"));
        const int n_steps = j.value("n_steps", 0);
        const Schema schema = schema_from_string(j.value("schema", std::string("full")));
        const ParsedPrediction pred = parse_response(raw, schema, n_steps);
        const RewardComponents c = reward_components(pred, gt_ref, gt_score, n_steps, rewards);
        const double total = combine_rewards(c, pred.format_ok, rewards);
        out.push_back(c);
        rows.push_back({{"row", line},
                        {"r_format", c.r_format},
                        {"r_ref", c.r_ref},
                        {"r_score", c.r_score},
                        {"total", total},
                        {"format_ok", pred.format_ok}});
        csv += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", line, c.r_format, c.r_ref, c.r_score, total,
                           pred.format_ok ? "true" : "false");
    }
    if (out_path.extension() == ".csv") {
        write_text_file(out_path, csv);
    } else {
        write_jsonl(out_path, rows);
    }
    return out;
}

namespace {

json histogram_entry(std::span<const ScoredSample> samples, const AnalyzeOptions& o) {
    const Histogram h = score_histogram(samples, o.bins);
    json j = to_json(h);
    try {
        j["pattern"] = to_string(classify_distribution(h, o.thresholds));
    } catch (const Error& e) {
        j["pattern"] = nullptr;
        j["pattern_note"] = std::string(e.what());
    }
    return j;
}

json error_entry(std::span<const ScoredSample> samples, const AnalyzeOptions& o) {
    try {
        return to_json(error_summary(samples, o.bins));
    } catch (const Error& e) {
        return json{{"n", 0}, {"note", std::string(e.what())}};
    }
}

void histogram_rows(std::string& csv, const std::string& key, const json& h) {
    const auto& edges = h.at("edges");
    const auto& counts = h.at("counts");
    for (std::size_t i = 0; i < counts.size(); ++i) {
        csv += fmt::format("{},{},{},{}\n", key, edges[i].get<double>(), edges[i + 1].get<double>(), counts[i].get<int>());
    }
}

std::string error_row(const std::string& key, const json& e) {
    if (!e.contains("mean")) return fmt::format("{},0,,,,,\n", key);
    return fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", key, e.at("n").get<int>(), e.at("mean").get<double>(),
                       e.at("median").get<double>(), e.at("p90").get<double>(), e.at("p99").get<double>(),
                       e.at("max").get<double>());
}

}  // namespace

void cmd_analyze(const fs::path& scored_path, const fs::path& out_dir, const AnalyzeOptions& o) {
    const auto samples = read_jsonl_as<ScoredSample>(scored_path);
    std::map<std::string, std::vector<ScoredSample>> by_setting;
    for (const auto& s : samples) by_setting[s.setting()].push_back(s);

    json histograms{{"overall", histogram_entry(samples, o)}, {"per_setting", json::object()}};
    json errors{{"overall", error_entry(samples, o)}, {"per_setting", json::object()}};
    std::string hist_csv = "setting,bin_lo,bin_hi,count\n";
    std::string err_csv = "setting,n,mean,median,p90,p99,max\n";
    histogram_rows(hist_csv, "overall", histograms["overall"]);
    err_csv += error_row("overall", errors["overall"]);
    for (const auto& [key, group] : by_setting) {
        histograms["per_setting"][key] = histogram_entry(group, o);
        errors["per_setting"][key] = error_entry(group, o);
        histogram_rows(hist_csv, key, histograms["per_setting"][key]);
        err_csv += error_row(key, errors["per_setting"][key]);
    }

    const CouplingMatrix grid = coupling_matrix_grid(samples, o.grid_cells);
    json per_traj = json::object();
    for (const auto& [id, m] : coupling_by_trajectory(samples)) per_traj[id] = to_json(m);
    const json coupling{{"raw", to_json(coupling_matrix(samples))}, {"grid", to_json(grid)}, {"per_trajectory", per_traj}};
    std::string coupling_csv = "ref_cell";
    for (int b = 0; b < grid.size; ++b) coupling_csv += fmt::format(",aligned_{}", b);
    coupling_csv += "\n";
    for (int a = 0; a < grid.size; ++a) {
        coupling_csv += std::to_string(a);
        for (int b = 0; b < grid.size; ++b) coupling_csv += fmt::format(",{}", grid.counts[a][b]);
        coupling_csv += "\n";
    }

    fs::create_directories(out_dir);
    write_text_file(out_dir / "histograms.json", histograms.dump(2) + "\n");
    write_text_file(out_dir / "errors.json", errors.dump(2) + "\n");
    write_text_file(out_dir / "coupling.json", coupling.dump(2) + "\n");
    write_text_file(out_dir / "histograms.csv", hist_csv);
    write_text_file(out_dir / "errors.csv", err_csv);
    write_text_file(out_dir / "coupling.csv", coupling_csv);
}

}  // namespace progbench
