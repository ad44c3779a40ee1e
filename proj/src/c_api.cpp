#include "svsr/svsr.h"

#include <string>

#include <nlohmann/json.hpp>

#include "svsr/config.hpp"
#include "svsr/error.hpp"
#include "svsr/io.hpp"
#include "svsr/pipeline.hpp"

struct svsr_ctx {
    svsr::RunConfig config;
    std::string last_error;
};

namespace {

int code_of(const svsr::Error& e) {
    switch (e.code()) {
        case svsr::ErrorCode::InvalidArgument: return SVSR_ERR_INVALID_ARGUMENT;
        case svsr::ErrorCode::Config: return SVSR_ERR_CONFIG;
        case svsr::ErrorCode::Io: return SVSR_ERR_IO;
        case svsr::ErrorCode::MissingInput: return SVSR_ERR_MISSING_INPUT;
        case svsr::ErrorCode::Remote: return SVSR_ERR_REMOTE;
        case svsr::ErrorCode::Internal: return SVSR_ERR_INTERNAL;
    }
    return SVSR_ERR_INTERNAL;
}

template <typename Fn>
int guarded(svsr_ctx* ctx, Fn&& fn) {
    if (!ctx) return SVSR_ERR_INVALID_ARGUMENT;
    ctx->last_error.clear();
    try {
        fn();
        return SVSR_OK;
    } catch (const svsr::Error& e) {
        ctx->last_error = e.what();
        return code_of(e);
    } catch (const std::exception& e) {
        ctx->last_error = e.what();
        return SVSR_ERR_INTERNAL;
    }
}

svsr::ConfigOverrides parse_overrides(const char* overrides_json) {
    svsr::ConfigOverrides ov;
    if (!overrides_json || !*overrides_json) return ov;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(overrides_json);
    } catch (const nlohmann::json::exception& e) {
        throw svsr::Error(svsr::ErrorCode::InvalidArgument,
                          std::string("bad overrides JSON: ") + e.what());
    }
    if (!j.is_object())
        throw svsr::Error(svsr::ErrorCode::InvalidArgument,
                          "overrides must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "seed") {
            ov.seed = value.get<std::uint64_t>();
        } else if (key == "output_dir") {
            ov.output_dir = value.get<std::string>();
        } else if (key == "dpo_mode") {
            const auto m = value.get<std::string>();
            if (m == "semi_online")
                ov.dpo_mode = svsr::DpoMode::SemiOnline;
            else if (m == "offline")
                ov.dpo_mode = svsr::DpoMode::Offline;
            else
                throw svsr::Error(svsr::ErrorCode::InvalidArgument,
                                  "dpo_mode must be semi_online or offline");
        } else if (key == "jobs") {
            ov.jobs = value.get<int>();
        } else {
            throw svsr::Error(svsr::ErrorCode::InvalidArgument,
                              "unknown override '" + key + "'");
        }
    }
    return ov;
}

} // namespace

extern "C" {

int svsr_ctx_create(const char* config_path, const char* overrides_json,
                    svsr_ctx** out) {
    if (!out) return SVSR_ERR_INVALID_ARGUMENT;
    *out = nullptr;
    if (!config_path) return SVSR_ERR_INVALID_ARGUMENT;
    try {
        auto ctx = new svsr_ctx;
        try {
            ctx->config = svsr::load_config(config_path, parse_overrides(overrides_json));
        } catch (...) {
            delete ctx;
            throw;
        }
        *out = ctx;
        return SVSR_OK;
    } catch (const svsr::Error& e) {
        return code_of(e);
    } catch (const std::exception&) {
        return SVSR_ERR_INTERNAL;
    }
}

void svsr_ctx_destroy(svsr_ctx* ctx) { delete ctx; }

const char* svsr_ctx_last_error(const svsr_ctx* ctx) {
    return ctx ? ctx->last_error.c_str() : "";
}

int svsr_run_gen_env(svsr_ctx* ctx) {
    return guarded(ctx, [&] { svsr::run_gen_env(ctx->config); });
}

int svsr_run_build_data(svsr_ctx* ctx) {
    return guarded(ctx, [&] { svsr::run_build_data(ctx->config); });
}

int svsr_run_sft(svsr_ctx* ctx) {
    return guarded(ctx, [&] { svsr::run_sft(ctx->config); });
}

int svsr_run_dpo(svsr_ctx* ctx) {
    return guarded(ctx, [&] { svsr::run_dpo(ctx->config); });
}

int svsr_run_eval(svsr_ctx* ctx, const char* params_path) {
    return guarded(ctx, [&] {
        std::optional<std::string> path;
        if (params_path && *params_path) path = params_path;
        svsr::run_eval(ctx->config, path);
    });
}

int svsr_run_full_pipeline(svsr_ctx* ctx) {
    return guarded(ctx, [&] { svsr::run_full_pipeline(ctx->config); });
}

int svsr_write_default_config(const char* path) {
    if (!path) return SVSR_ERR_INVALID_ARGUMENT;
    try {
        svsr::write_file(path, svsr::default_config_json());
        return SVSR_OK;
    } catch (const svsr::Error& e) {
        return code_of(e);
    } catch (const std::exception&) {
        return SVSR_ERR_INTERNAL;
    }
}

const char* svsr_strerror(int code) {
    switch (code) {
        case SVSR_OK: return "ok";
        case SVSR_ERR_INVALID_ARGUMENT: return "invalid argument";
        case SVSR_ERR_CONFIG: return "configuration error";
        case SVSR_ERR_IO: return "I/O error";
        case SVSR_ERR_MISSING_INPUT: return "missing upstream artifact";
        case SVSR_ERR_REMOTE: return "remote endpoint error";
        case SVSR_ERR_INTERNAL: return "internal error";
    }
    return "unknown error";
}

const char* svsr_version(void) { return "0.1.0"; }

} // extern "C"
