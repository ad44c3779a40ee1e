// svsr command-line front end. Talks to the engine exclusively through
// the C API in svsr/svsr.h.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "svsr/svsr.h"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string output_dir;
    std::string mode;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "JSON config manifest")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", opts.output_dir, "override config output_dir");
    cmd->add_option("--seed", opts.seed, "override config seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--jobs", opts.jobs, "parallelism budget (default 1)");
}

std::string overrides_json(const CommonOpts& opts) {
    std::string j = "{";
    auto append = [&](const std::string& frag) {
        if (j.size() > 1) j += ",";
        j += frag;
    };
    if (opts.seed_set) append("\"seed\":" + std::to_string(opts.seed));
    if (!opts.output_dir.empty()) append("\"output_dir\":\"" + opts.output_dir + "\"");
    if (!opts.mode.empty()) append("\"dpo_mode\":\"" + opts.mode + "\"");
    if (opts.jobs > 0) append("\"jobs\":" + std::to_string(opts.jobs));
    j += "}";
    return j;
}

// Machine-readable failure report on stderr.
int fail(int code, const char* message) {
    std::string msg(message && *message ? message : svsr_strerror(code));
    std::string escaped;
    for (char c : msg) {
        if (c == '"' || c == '\\') escaped += '\\';
        if (c == '\n') {
            escaped += "\\n";
            continue;
        }
        escaped += c;
    }
    std::fprintf(stderr, "{\"error\":\"%s\",\"code\":%d}\n", escaped.c_str(), code);
    return code;
}

template <typename Fn>
int with_ctx(const CommonOpts& opts, Fn&& fn) {
    svsr_ctx* ctx = nullptr;
    const std::string ov = overrides_json(opts);
    int rc = svsr_ctx_create(opts.config_path.c_str(), ov.c_str(), &ctx);
    if (rc != SVSR_OK) return fail(rc, svsr_strerror(rc));
    rc = fn(ctx);
    if (rc != SVSR_OK) fail(rc, svsr_ctx_last_error(ctx));
    svsr_ctx_destroy(ctx);
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SVSR self-correction training pipeline"};
    app.require_subcommand(1);

    CommonOpts gen_opts, data_opts, sft_opts, dpo_opts, eval_opts, full_opts;
    std::string eval_params;
    std::string init_path = "svsr_config.json";

    add_common(app.add_subcommand("gen-env", "generate the toy problem set"), gen_opts);
    add_common(app.add_subcommand("build-data",
                                  "build the SFT corpus and seed preference pairs"),
               data_opts);
    add_common(app.add_subcommand("sft", "cold-start supervised fine-tuning"), sft_opts);
    auto* dpo = app.add_subcommand("dpo", "semi-online or offline DPO training");
    add_common(dpo, dpo_opts);
    dpo->add_option("--mode", dpo_opts.mode, "semi_online or offline")
        ->check(CLI::IsMember({"semi_online", "offline"}));
    auto* eval = app.add_subcommand("eval", "behavioral metrics report");
    add_common(eval, eval_opts);
    eval->add_option("--params", eval_params,
                     "parameter checkpoint to evaluate (default: final)");
    add_common(app.add_subcommand("full-pipeline", "run every stage in order"),
               full_opts);
    auto* init = app.add_subcommand("init-config", "write a default config manifest");
    init->add_option("path", init_path, "destination file");

    CLI11_PARSE(app, argc, argv);

    if (init->parsed()) {
        const int rc = svsr_write_default_config(init_path.c_str());
        if (rc != SVSR_OK) return fail(rc, svsr_strerror(rc));
        std::printf("wrote %s\n", init_path.c_str());
        return 0;
    }
    if (app.get_subcommand("gen-env")->parsed())
        return with_ctx(gen_opts, [](svsr_ctx* c) { return svsr_run_gen_env(c); });
    if (app.get_subcommand("build-data")->parsed())
        return with_ctx(data_opts, [](svsr_ctx* c) { return svsr_run_build_data(c); });
    if (app.get_subcommand("sft")->parsed())
        return with_ctx(sft_opts, [](svsr_ctx* c) { return svsr_run_sft(c); });
    if (dpo->parsed())
        return with_ctx(dpo_opts, [](svsr_ctx* c) { return svsr_run_dpo(c); });
    if (eval->parsed())
        return with_ctx(eval_opts, [&](svsr_ctx* c) {
            return svsr_run_eval(c, eval_params.empty() ? nullptr : eval_params.c_str());
        });
    if (app.get_subcommand("full-pipeline")->parsed())
        return with_ctx(full_opts,
                        [](svsr_ctx* c) { return svsr_run_full_pipeline(c); });
    return 0;
}
