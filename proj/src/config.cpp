#include "svsr/config.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "svsr/error.hpp"
#include "svsr/io.hpp"

namespace svsr {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& scope) {
    if (!j.is_object())
        throw Error(ErrorCode::Config, scope + " must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!allowed.contains(key))
            throw Error(ErrorCode::Config, "unknown key '" + key + "' in " + scope);
}

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_confusion(const json& j, VerdictConfusion& out, const std::string& scope) {
    reject_unknown(j, {"correct_given_right", "correct_given_wrong"}, scope);
    get_if_present(j, "correct_given_right", out.correct_given_right);
    get_if_present(j, "correct_given_wrong", out.correct_given_wrong);
}

void parse_env(const json& j, EnvConfig& env) {
    reject_unknown(j,
                   {"answer_space_size", "counts_per_level", "solver_accuracy",
                    "verifier_confusion"},
                   "env");
    get_if_present(j, "answer_space_size", env.answer_space_size);
    if (j.contains("counts_per_level")) {
        const auto v = j.at("counts_per_level").get<std::vector<int>>();
        if (v.size() != 5)
            throw Error(ErrorCode::Config, "env.counts_per_level needs 5 entries");
        std::copy(v.begin(), v.end(), env.counts_per_level.begin());
    }
    if (j.contains("solver_accuracy")) {
        const auto v = j.at("solver_accuracy").get<std::vector<double>>();
        if (v.size() != 5)
            throw Error(ErrorCode::Config, "env.solver_accuracy needs 5 entries");
        std::copy(v.begin(), v.end(), env.solver_accuracy.begin());
    }
    if (j.contains("verifier_confusion")) {
        const auto& vc = j.at("verifier_confusion");
        reject_unknown(vc, {"direct", "contradiction"}, "env.verifier_confusion");
        if (vc.contains("direct"))
            parse_confusion(vc.at("direct"), env.direct_confusion,
                            "env.verifier_confusion.direct");
        if (vc.contains("contradiction"))
            parse_confusion(vc.at("contradiction"), env.contradiction_confusion,
                            "env.verifier_confusion.contradiction");
    }
}

void parse_dpo(const json& j, DpoConfig& dpo) {
    reject_unknown(j,
                   {"beta", "lr", "batch_size", "steps_per_iter", "iterations",
                    "regen_frequency", "candidates_per_prompt", "prompts_per_iter",
                    "tau", "mode", "buffer_capacity", "eviction", "heldout_fraction"},
                   "dpo");
    get_if_present(j, "beta", dpo.beta);
    get_if_present(j, "lr", dpo.lr);
    get_if_present(j, "batch_size", dpo.batch_size);
    get_if_present(j, "steps_per_iter", dpo.steps_per_iter);
    get_if_present(j, "iterations", dpo.iterations);
    get_if_present(j, "regen_frequency", dpo.regen_frequency);
    get_if_present(j, "candidates_per_prompt", dpo.candidates_per_prompt);
    get_if_present(j, "prompts_per_iter", dpo.prompts_per_iter);
    get_if_present(j, "tau", dpo.tau);
    get_if_present(j, "heldout_fraction", dpo.heldout_fraction);
    if (j.contains("buffer_capacity"))
        dpo.buffer_capacity = j.at("buffer_capacity").get<std::size_t>();
    if (j.contains("mode")) {
        const auto m = j.at("mode").get<std::string>();
        if (m == "semi_online")
            dpo.mode = DpoMode::SemiOnline;
        else if (m == "offline")
            dpo.mode = DpoMode::Offline;
        else
            throw Error(ErrorCode::Config, "dpo.mode must be semi_online or offline");
    }
    if (j.contains("eviction")) {
        const auto e = j.at("eviction").get<std::string>();
        if (e == "fifo")
            dpo.eviction = EvictionPolicy::Fifo;
        else if (e == "adaptive")
            dpo.eviction = EvictionPolicy::Adaptive;
        else
            throw Error(ErrorCode::Config, "dpo.eviction must be fifo or adaptive");
    }
}

void parse_remote(const json& j, RemoteEndpointConfig& r) {
    reject_unknown(j,
                   {"base_url", "model", "api_key_env", "temperature", "timeout_ms",
                    "max_retries", "prompt_dir"},
                   "oracle.remote");
    get_if_present(j, "base_url", r.base_url);
    get_if_present(j, "model", r.model);
    get_if_present(j, "api_key_env", r.api_key_env);
    get_if_present(j, "temperature", r.temperature);
    get_if_present(j, "timeout_ms", r.timeout_ms);
    get_if_present(j, "max_retries", r.max_retries);
    get_if_present(j, "prompt_dir", r.prompt_dir);
}

} // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(j,
                   {"seed", "output_dir", "k_max", "automaton_mode", "env", "data",
                    "sft", "dpo", "eval", "oracle"},
                   "config");
    RunConfig cfg;
    get_if_present(j, "seed", cfg.seed);
    get_if_present(j, "output_dir", cfg.output_dir);
    get_if_present(j, "k_max", cfg.k_max);
    if (cfg.k_max < 0) throw Error(ErrorCode::Config, "k_max must be >= 0");
    if (j.contains("automaton_mode")) {
        const auto m = j.at("automaton_mode").get<std::string>();
        if (m == "canonical")
            cfg.automaton_mode = AutomatonMode::Canonical;
        else if (m == "literal")
            cfg.automaton_mode = AutomatonMode::Literal;
        else
            throw Error(ErrorCode::Config, "automaton_mode must be canonical or literal");
    }
    if (j.contains("env")) parse_env(j.at("env"), cfg.env);
    if (j.contains("data")) {
        reject_unknown(j.at("data"), {"max_retries", "accuracy_samples"}, "data");
        get_if_present(j.at("data"), "max_retries", cfg.data.max_retries);
        get_if_present(j.at("data"), "accuracy_samples", cfg.data.accuracy_samples);
        if (cfg.data.max_retries < 1 || cfg.data.accuracy_samples < 1)
            throw Error(ErrorCode::Config, "data counts must be >= 1");
    }
    if (j.contains("sft")) {
        reject_unknown(j.at("sft"), {"lr", "steps", "mask_weight"}, "sft");
        get_if_present(j.at("sft"), "lr", cfg.sft.lr);
        get_if_present(j.at("sft"), "steps", cfg.sft.steps);
        get_if_present(j.at("sft"), "mask_weight", cfg.sft.mask_weight);
        if (cfg.sft.lr <= 0.0 || cfg.sft.steps < 0 || cfg.sft.mask_weight < 0.0)
            throw Error(ErrorCode::Config, "bad sft settings");
    }
    if (j.contains("dpo")) parse_dpo(j.at("dpo"), cfg.dpo);
    if (j.contains("eval")) {
        reject_unknown(j.at("eval"), {"samples_per_problem"}, "eval");
        get_if_present(j.at("eval"), "samples_per_problem", cfg.eval.samples_per_problem);
        if (cfg.eval.samples_per_problem < 1)
            throw Error(ErrorCode::Config, "eval.samples_per_problem must be >= 1");
    }
    if (j.contains("oracle")) {
        const auto& o = j.at("oracle");
        reject_unknown(o, {"kind", "remote"}, "oracle");
        if (o.contains("kind")) {
            const auto k = o.at("kind").get<std::string>();
            if (k == "simulated")
                cfg.oracle_kind = OracleKind::Simulated;
            else if (k == "remote")
                cfg.oracle_kind = OracleKind::Remote;
            else
                throw Error(ErrorCode::Config, "oracle.kind must be simulated or remote");
        }
        if (o.contains("remote")) parse_remote(o.at("remote"), cfg.remote);
    }

    cfg.env.seed = cfg.seed;
    cfg.dpo.seed = cfg.seed;
    check_valid(cfg.env);
    check_valid(cfg.dpo);
    if (cfg.oracle_kind == OracleKind::Remote) check_valid(cfg.remote);
    return cfg;
}

RunConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
    RunConfig cfg = parse_config(read_file(path));
    if (overrides.seed) {
        cfg.seed = *overrides.seed;
        cfg.env.seed = cfg.seed;
        cfg.dpo.seed = cfg.seed;
    }
    if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
    if (overrides.dpo_mode) cfg.dpo.mode = *overrides.dpo_mode;
    if (overrides.jobs) {
        if (*overrides.jobs < 1) throw Error(ErrorCode::Config, "jobs must be >= 1");
        cfg.dpo.jobs = *overrides.jobs;
    }
    return cfg;
}

std::string default_config_json() {
    return R"({
  "seed": 2,
  "output_dir": "out",
  "k_max": 4,
  "automaton_mode": "canonical",
  "env": {
    "answer_space_size": 5,
    "counts_per_level": [10, 10, 10, 10, 10],
    "solver_accuracy": [0.9, 0.75, 0.6, 0.4, 0.2],
    "verifier_confusion": {
      "direct": {"correct_given_right": 0.95, "correct_given_wrong": 0.40},
      "contradiction": {"correct_given_right": 0.85, "correct_given_wrong": 0.15}
    }
  },
  "data": {"max_retries": 64, "accuracy_samples": 32},
  "sft": {"lr": 0.1, "steps": 500, "mask_weight": 1.0},
  "dpo": {
    "beta": 0.5,
    "lr": 0.1,
    "batch_size": 8,
    "steps_per_iter": 200,
    "iterations": 5,
    "regen_frequency": 25,
    "candidates_per_prompt": 4,
    "prompts_per_iter": 50,
    "tau": 0.2,
    "mode": "semi_online",
    "buffer_capacity": 256,
    "eviction": "adaptive",
    "heldout_fraction": 0.2
  },
  "eval": {"samples_per_problem": 20},
  "oracle": {"kind": "simulated"}
}
)";
}

} // namespace svsr
