// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PANELSTYLE_PANELSTYLE_H_
#define PANELSTYLE_PANELSTYLE_H_

#include <stdint.h>

#if defined(_WIN32)
#define PS_API __declspec(dllexport)
#else
#define PS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

// Status codes double as CLI exit codes.
typedef enum ps_status {
  PS_OK = 0,
  PS_ERR_INTERNAL = 1,
  PS_ERR_CONFIG = 2,
  PS_ERR_ASSET_MISSING = 3,
  PS_ERR_CONTRACT = 4,
  PS_ERR_DIVERGENCE = 5,
  PS_ERR_SCHEMA = 6,
  PS_ERR_NOT_FOUND = 7,
} ps_status;

typedef enum ps_log_level {
  PS_LOG_DEBUG = 0,
  PS_LOG_INFO = 1,
  PS_LOG_WARN = 2,
  PS_LOG_ERROR = 3,
} ps_log_level;

typedef struct ps_config ps_config;
typedef struct ps_image ps_image;
typedef struct ps_style_model ps_style_model;

PS_API const char* ps_version(void);
PS_API const char* ps_status_name(ps_status status);
// Message of the most recent failure on the calling thread; never NULL.
PS_API const char* ps_last_error(void);
PS_API void ps_set_log_level(ps_log_level level);
PS_API void ps_string_free(char* s);

// Configs. Relative paths resolve against the directory of the loaded file,
// or the working directory for ps_config_new.
PS_API ps_status ps_config_new(ps_config** out);
PS_API ps_status ps_config_load(const char* path, ps_config** out);
// Dotted key, e.g. "stylenet.iterations". The value is parsed as JSON and
// taken as a plain string when that fails.
PS_API ps_status ps_config_set(ps_config* cfg, const char* key, const char* value);
// Fully resolved config as JSON; release with ps_string_free.
PS_API ps_status ps_config_to_json(const ps_config* cfg, char** out);
PS_API void ps_config_free(ps_config* cfg);

// Pipeline commands. Each writes a config snapshot beside its outputs.
PS_API ps_status ps_cmd_ingest(const ps_config* cfg);
PS_API ps_status ps_cmd_mask(const ps_config* cfg);
// channels: "needed" or "all"; NULL means "needed".
PS_API ps_status ps_cmd_train_style(const ps_config* cfg, int force, const char* channels);
PS_API ps_status ps_cmd_transfer(const ps_config* cfg, int force);
PS_API ps_status ps_cmd_compose(const ps_config* cfg);
PS_API ps_status ps_cmd_cloze_build(const ps_config* cfg);
PS_API ps_status ps_cmd_cloze_train(const ps_config* cfg, const char* encoder);
PS_API ps_status ps_cmd_cloze_eval(const ps_config* cfg, const char* setting, const char* encoder);
PS_API ps_status ps_cmd_report(const ps_config* cfg);
PS_API ps_status ps_rerun(const char* snapshot_path, int force);
// Writes a small synthetic project into dir; *config_path receives the
// path of its config file (release with ps_string_free).
PS_API ps_status ps_demo_project(const char* dir, uint64_t seed, char** config_path);

// Images are 8-bit RGB.
PS_API ps_status ps_image_load(const char* path, ps_image** out);
PS_API ps_status ps_image_save_png(const ps_image* img, const char* path);
PS_API ps_status ps_image_size(const ps_image* img, int* width, int* height);
PS_API void ps_image_free(ps_image* img);
PS_API ps_status ps_average_hash(const ps_image* img, uint64_t* out);
PS_API int ps_hamming(uint64_t a, uint64_t b);

PS_API ps_status ps_style_model_load(const char* dir, ps_style_model** out);
PS_API ps_status ps_stylize(const ps_style_model* model, const ps_image* in, ps_image** out);
PS_API void ps_style_model_free(ps_style_model* model);

#ifdef __cplusplus
}
#endif

#endif  // PANELSTYLE_PANELSTYLE_H_
