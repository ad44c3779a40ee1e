#pragma once

// Run configuration: a single JSON manifest, schema-validated up front
// (unknown keys rejected). All randomness flows from the one seed.

#include <cstdint>
#include <optional>
#include <string>

#include "svsr/dpo.hpp"
#include "svsr/env.hpp"
#include "svsr/remote.hpp"
#include "svsr/trajectory.hpp"

namespace svsr {

enum class OracleKind { Simulated, Remote };

struct SftTrainConfig {
    double lr = 0.1;
    int steps = 500;
    double mask_weight = 1.0;
};

struct DataConfig {
    int max_retries = 64;
    int accuracy_samples = 32; // solve calls per problem for level estimation
};

struct EvalConfig {
    int samples_per_problem = 20;
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    int k_max = kDefaultKMax;
    AutomatonMode automaton_mode = AutomatonMode::Canonical;
    EnvConfig env;
    DataConfig data;
    SftTrainConfig sft;
    DpoConfig dpo;
    EvalConfig eval;
    OracleKind oracle_kind = OracleKind::Simulated;
    RemoteEndpointConfig remote;
};

// Optional command-line overrides applied on top of the file.
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<DpoMode> dpo_mode;
    std::optional<int> jobs;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});
std::string default_config_json();

} // namespace svsr
