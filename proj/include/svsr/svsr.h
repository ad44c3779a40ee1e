/* C API of the SVSR pipeline engine.
 *
 * All entry points operate on an opaque run context created from a JSON
 * config file. Functions return 0 on success or an SVSR_ERR_* code; the
 * last error message is retained on the context.
 */

#ifndef SVSR_SVSR_H
#define SVSR_SVSR_H

#ifdef __cplusplus
extern "C" {
#endif

#define SVSR_OK 0
#define SVSR_ERR_INVALID_ARGUMENT 1
#define SVSR_ERR_CONFIG 2
#define SVSR_ERR_IO 3
#define SVSR_ERR_MISSING_INPUT 4
#define SVSR_ERR_REMOTE 5
#define SVSR_ERR_INTERNAL 6

typedef struct svsr_ctx svsr_ctx;

/* Creates a run context from a config file. `overrides_json` may be NULL
 * or a JSON object with any of: "seed" (integer), "output_dir" (string),
 * "dpo_mode" ("semi_online"|"offline"), "jobs" (integer). On failure
 * *out is NULL and the return code describes the error. */
int svsr_ctx_create(const char* config_path, const char* overrides_json,
                    svsr_ctx** out);
void svsr_ctx_destroy(svsr_ctx* ctx);

/* Message of the most recent failure on this context; empty string if
 * none. The pointer stays valid until the next call on the context. */
const char* svsr_ctx_last_error(const svsr_ctx* ctx);

/* Pipeline stages. Each reads its upstream artifacts from the configured
 * output directory and writes its own. */
int svsr_run_gen_env(svsr_ctx* ctx);
int svsr_run_build_data(svsr_ctx* ctx);
int svsr_run_sft(svsr_ctx* ctx);
int svsr_run_dpo(svsr_ctx* ctx);
/* params_path may be NULL to evaluate the final DPO parameters. */
int svsr_run_eval(svsr_ctx* ctx, const char* params_path);
int svsr_run_full_pipeline(svsr_ctx* ctx);

/* Writes a default config manifest to the given path. ctx-free utility;
 * returns an SVSR_ERR_* code on I/O failure. */
int svsr_write_default_config(const char* path);

const char* svsr_strerror(int code);
const char* svsr_version(void);

#ifdef __cplusplus
}
#endif

#endif /* SVSR_SVSR_H */
