#include "svsr/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <utility>
#include <variant>

#include <nlohmann/json.hpp>

#include "svsr/data.hpp"
#include "svsr/dpo.hpp"
#include "svsr/error.hpp"
#include "svsr/io.hpp"
#include "svsr/metrics.hpp"
#include "svsr/policy.hpp"
#include "svsr/remote.hpp"

namespace svsr {

namespace {

std::string join(const std::string& dir, const char* name) {
    return (std::filesystem::path(dir) / name).string();
}

void require_inputs(const std::vector<std::string>& paths) {
    for (const auto& p : paths)
        if (!file_exists(p))
            throw Error(ErrorCode::MissingInput, "missing upstream artifact: " + p);
}

std::unique_ptr<GeneratorOracle> make_oracle(const RunConfig& cfg, bool reveal_gt) {
    if (cfg.oracle_kind == OracleKind::Remote)
        return std::make_unique<RemoteOracle>(cfg.remote, reveal_gt);
    return std::make_unique<SimulatedOracle>(cfg.env);
}

void dump_remote_log(const RunConfig& cfg, const GeneratorOracle& oracle,
                     const std::string& path) {
    const auto* remote = dynamic_cast<const RemoteOracle*>(&oracle);
    if (!remote) return;
    std::vector<nlohmann::json> rows;
    for (const auto& rec : remote->call_log())
        rows.push_back({{"action", rec.action},
                        {"request", rec.request_body},
                        {"response", rec.response_body},
                        {"retries", rec.retries},
                        {"ok", rec.ok},
                        {"error", rec.error}});
    write_jsonl(path, rows);
    (void)cfg;
}

} // namespace

Artifacts artifact_paths(const std::string& dir) {
    return Artifacts{join(dir, "problems.jsonl"), join(dir, "sft.jsonl"),
                     join(dir, "seed_pairs.jsonl"), join(dir, "sft_params.json"),
                     join(dir, "final_params.json"), join(dir, "history.jsonl"),
                     join(dir, "buffer.jsonl"), join(dir, "report.json"),
                     join(dir, "report.csv"), join(dir, "plot_data.csv"),
                     join(dir, "remote_calls.jsonl")};
}

void write_problems(const std::string& path, const std::vector<Problem>& problems) {
    std::vector<nlohmann::json> rows;
    rows.reserve(problems.size());
    for (const auto& p : problems) {
        nlohmann::json j = {{"id", p.id},
                            {"statement", p.statement},
                            {"answer_space", p.answer_space},
                            {"gt_answer", p.gt_answer},
                            {"level", p.level}};
        if (p.attachment_ref) j["attachment_ref"] = *p.attachment_ref;
        rows.push_back(std::move(j));
    }
    write_jsonl(path, rows);
}

std::vector<Problem> read_problems(const std::string& path) {
    std::vector<Problem> problems;
    for (const auto& j : read_jsonl(path)) {
        Problem p;
        p.id = j.at("id").get<std::string>();
        p.statement = j.at("statement").get<std::string>();
        p.answer_space = j.at("answer_space").get<std::vector<std::string>>();
        p.gt_answer = j.at("gt_answer").get<std::string>();
        p.level = j.at("level").get<int>();
        if (j.contains("attachment_ref"))
            p.attachment_ref = j.at("attachment_ref").get<std::string>();
        problems.push_back(std::move(p));
    }
    return problems;
}

void run_gen_env(const RunConfig& cfg) {
    const auto paths = artifact_paths(cfg.output_dir);
    write_problems(paths.problems, gen_problems(cfg.env));
}

void run_build_data(const RunConfig& cfg) {
    const auto paths = artifact_paths(cfg.output_dir);
    require_inputs({paths.problems});
    const auto problems = read_problems(paths.problems);
    auto oracle = make_oracle(cfg, /*reveal_gt=*/true);

    Rng rng = make_rng(cfg.seed, 2);
    std::vector<SftRecord> records;
    for (const auto& p : problems) {
        // Difficulty is re-derived from the oracle's measured accuracy,
        // as the construction procedure prescribes.
        const double acc =
            estimate_accuracy(p, *oracle, cfg.data.accuracy_samples, rng);
        const int level = assign_level(acc);
        const int k_target = std::min(target_cycles(level), cfg.k_max);
        auto chosen = build_chosen(p, *oracle, k_target, level, rng,
                                   cfg.data.max_retries, cfg.k_max);
        if (!chosen) continue; // construction failure; drop the problem
        records.push_back(std::move(*chosen));
        records.push_back(build_rejected(p, *oracle, level, rng));
    }
    emit_datasets(records, problems, DatasetFiles{paths.sft, paths.seed_pairs});
    dump_remote_log(cfg, *oracle, paths.remote_calls);
}

void run_sft(const RunConfig& cfg) {
    const auto paths = artifact_paths(cfg.output_dir);
    require_inputs({paths.problems, paths.sft});
    const auto problems = read_problems(paths.problems);
    if (problems.empty()) throw Error(ErrorCode::MissingInput, "no problems");
    const auto records = read_sft_records(paths.sft, cfg.automaton_mode, cfg.k_max);

    std::map<std::string, const Problem*> by_id;
    for (const auto& p : problems) by_id[p.id] = &p;
    std::vector<SftExample> dataset;
    for (const auto& r : records) {
        const auto it = by_id.find(r.problem_id);
        if (it == by_id.end())
            throw Error(ErrorCode::MissingInput,
                        "SFT record for unknown problem " + r.problem_id);
        dataset.push_back(SftExample{it->second, &r.trajectory});
    }
    if (dataset.empty()) throw Error(ErrorCode::MissingInput, "SFT dataset is empty");

    const Policy policy(static_cast<int>(problems.front().answer_space.size()),
                        cfg.k_max);
    Weights w = policy.zero_weights();
    for (int step = 0; step < cfg.sft.steps; ++step) {
        auto lv = policy.sft_loss(w, dataset, cfg.sft.mask_weight);
        const double inv = 1.0 / static_cast<double>(lv.decisions);
        for (double& g : lv.grad) g *= inv;
        gd_step(w, lv.grad, cfg.sft.lr);
    }
    write_file(paths.sft_params, policy.weights_to_json(w));
}

void run_dpo(const RunConfig& cfg) {
    const auto paths = artifact_paths(cfg.output_dir);
    require_inputs({paths.problems, paths.seed_pairs, paths.sft_params});
    const auto problems = read_problems(paths.problems);
    if (problems.empty()) throw Error(ErrorCode::MissingInput, "no problems");
    const Policy policy(static_cast<int>(problems.front().answer_space.size()),
                        cfg.k_max);
    const Weights sft_params =
        policy.weights_from_json(read_file(paths.sft_params));
    // Pairs with a corrupted lose trace carry no usable log-probability;
    // they are dropped at buffer-seeding time. Their chosen side still
    // parses, so it is kept as a candidate-pool winner for its prompt.
    const auto seed_pairs = read_pairs(paths.seed_pairs, cfg.automaton_mode, cfg.k_max,
                                       /*skip_invalid=*/true);
    if (seed_pairs.empty())
        throw Error(ErrorCode::MissingInput, "no usable seed preference pairs");
    std::vector<std::pair<std::string, Trajectory>> extra_winners;
    for (const auto& row : read_pair_rows(paths.seed_pairs)) {
        const auto lose = parse(row.lose_text, cfg.automaton_mode, cfg.k_max,
                                row.problem_id);
        if (std::holds_alternative<Trajectory>(lose)) continue;
        auto win = parse(row.win_text, cfg.automaton_mode, cfg.k_max, row.problem_id);
        if (auto* t = std::get_if<Trajectory>(&win))
            extra_winners.emplace_back(row.problem_id, std::move(*t));
    }

    auto teacher = [&](const Problem& p, const Trajectory& y) {
        return teacher_score(p, y, cfg.automaton_mode, cfg.k_max);
    };
    const auto result = run_pipeline(cfg.dpo, policy, seed_pairs, problems, teacher,
                                     sft_params, extra_winners);

    write_file(paths.final_params, policy.weights_to_json(result.final_params));
    std::vector<nlohmann::json> rows;
    for (const auto& rec : result.history) {
        nlohmann::json j;
        j["iter"] = rec.iter;
        j["mean_loss"] = rec.mean_loss ? nlohmann::json(*rec.mean_loss)
                                       : nlohmann::json(nullptr);
        j["buffer_size"] = rec.buffer_size;
        j["heldout_pref_acc"] = rec.heldout_pref_acc
                                    ? nlohmann::json(*rec.heldout_pref_acc)
                                    : nlohmann::json(nullptr);
        j["mean_margin"] = rec.mean_margin ? nlohmann::json(*rec.mean_margin)
                                           : nlohmann::json(nullptr);
        j["online_pairs"] = rec.online_pairs;
        rows.push_back(std::move(j));
    }
    write_jsonl(paths.history, rows);
    write_pairs(paths.buffer, result.buffer_snapshot);
}

void run_eval(const RunConfig& cfg, const std::optional<std::string>& params_path) {
    const auto paths = artifact_paths(cfg.output_dir);
    const std::string params_file = params_path.value_or(paths.final_params);
    require_inputs({paths.problems, params_file});
    const auto problems = read_problems(paths.problems);
    if (problems.empty()) throw Error(ErrorCode::MissingInput, "no problems");
    const Policy policy(static_cast<int>(problems.front().answer_space.size()),
                        cfg.k_max);
    const Weights w = policy.weights_from_json(read_file(params_file));

    std::vector<Trajectory> trajectories;
    trajectories.reserve(problems.size() * cfg.eval.samples_per_problem);
    for (std::size_t i = 0; i < problems.size(); ++i) {
        Rng rng = make_rng(cfg.seed, 7000 + i);
        for (int s = 0; s < cfg.eval.samples_per_problem; ++s)
            trajectories.push_back(policy.sample(w, problems[i], rng));
    }
    std::vector<CorpusEntry> corpus;
    corpus.reserve(trajectories.size());
    for (std::size_t i = 0; i < problems.size(); ++i)
        for (int s = 0; s < cfg.eval.samples_per_problem; ++s)
            corpus.push_back(CorpusEntry{
                &problems[i], &trajectories[i * cfg.eval.samples_per_problem + s]});

    const BehaviorReport report = behavior_report(corpus);
    write_file(paths.report_json, report_to_json(report));
    write_file(paths.report_csv, report_to_csv(report));

    std::string plot = "level,answer_accuracy,mean_attempts\n";
    for (const auto& lp : report.levels)
        plot += std::to_string(lp.level) + "," + std::to_string(lp.answer_accuracy) +
                "," + std::to_string(lp.mean_attempts) + "\n";
    write_file(paths.plot_data, plot);
}

void run_full_pipeline(const RunConfig& cfg) {
    run_gen_env(cfg);
    run_build_data(cfg);
    run_sft(cfg);
    run_dpo(cfg);
    run_eval(cfg);
}

} // namespace svsr
