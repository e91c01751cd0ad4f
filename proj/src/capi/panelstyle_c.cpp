// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "panelstyle/panelstyle.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

#include "app/commands.hpp"
#include "core/error.hpp"
#include "core/log.hpp"
#include "core/style_select.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace panelstyle;

struct ps_config {
  json doc;
  fs::path base_dir;
};

struct ps_image {
  Raster raster;
};

struct ps_style_model {
  stylenet::StyleModel model;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
ps_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PS_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<ps_status>(e.kind());
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed JSON: ") + e.what();
    return PS_ERR_SCHEMA;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PS_ERR_INTERNAL;
  }
}

void require_arg(const void* p, const char* name) {
  if (p == nullptr) throw ContractViolation(std::string(name) + " must not be NULL");
}

app::RunConfig resolve(const ps_config* cfg) {
  require_arg(cfg, "config");
  return app::run_config_from_json(cfg->doc, cfg->base_dir);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* ps_version(void) { return "0.1.0"; }

const char* ps_status_name(ps_status status) {
  switch (status) {
    case PS_OK: return "ok";
    case PS_ERR_INTERNAL: return "internal";
    case PS_ERR_CONFIG: return "config";
    case PS_ERR_ASSET_MISSING: return "asset-missing";
    case PS_ERR_CONTRACT: return "contract";
    case PS_ERR_DIVERGENCE: return "divergence";
    case PS_ERR_SCHEMA: return "schema";
    case PS_ERR_NOT_FOUND: return "not-found";
  }
  return "unknown";
}

const char* ps_last_error(void) { return g_last_error.c_str(); }

void ps_set_log_level(ps_log_level level) {
  log::set_min_level(static_cast<log::Level>(level));
}

void ps_string_free(char* s) { std::free(s); }

ps_status ps_config_new(ps_config** out) {
  return guarded([&] {
    require_arg(out, "out");
    *out = nullptr;
    auto* cfg = new ps_config{json::object(), fs::current_path()};
    *out = cfg;
  });
}

ps_status ps_config_load(const char* path, ps_config** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    *out = nullptr;
    // Validate once up front so a bad file fails at load time.
    app::load_run_config(path);
    std::ifstream in(path);
    json doc = json::parse(in, nullptr, true, true);
    if (doc.contains("command") && doc.contains("config")) doc = doc["config"];
    *out = new ps_config{std::move(doc), fs::absolute(path).parent_path()};
  });
}

ps_status ps_config_set(ps_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require_arg(cfg, "config");
    require_arg(key, "key");
    require_arg(value, "value");
    json next = cfg->doc;
    app::set_value(next, key, value);
    app::run_config_from_json(next, cfg->base_dir);
    cfg->doc = std::move(next);
  });
}

ps_status ps_config_to_json(const ps_config* cfg, char** out) {
  return guarded([&] {
    require_arg(out, "out");
    *out = copy_string(app::to_json(resolve(cfg)).dump(2));
  });
}

void ps_config_free(ps_config* cfg) { delete cfg; }

ps_status ps_cmd_ingest(const ps_config* cfg) {
  return guarded([&] { app::cmd_ingest(resolve(cfg)); });
}

ps_status ps_cmd_mask(const ps_config* cfg) {
  return guarded([&] { app::cmd_mask(resolve(cfg)); });
}

ps_status ps_cmd_train_style(const ps_config* cfg, int force, const char* channels) {
  return guarded([&] { app::cmd_train_style(resolve(cfg), force != 0, channels ? channels : "needed"); });
}

ps_status ps_cmd_transfer(const ps_config* cfg, int force) {
  return guarded([&] { app::cmd_transfer(resolve(cfg), force != 0); });
}

ps_status ps_cmd_compose(const ps_config* cfg) {
  return guarded([&] { app::cmd_compose(resolve(cfg)); });
}

ps_status ps_cmd_cloze_build(const ps_config* cfg) {
  return guarded([&] { app::cmd_cloze_build(resolve(cfg)); });
}

ps_status ps_cmd_cloze_train(const ps_config* cfg, const char* encoder) {
  return guarded([&] {
    require_arg(encoder, "encoder");
    app::cmd_cloze_train(resolve(cfg), cloze::parse_encoder_id(encoder));
  });
}

ps_status ps_cmd_cloze_eval(const ps_config* cfg, const char* setting, const char* encoder) {
  return guarded([&] {
    require_arg(setting, "setting");
    require_arg(encoder, "encoder");
    app::cmd_cloze_eval(resolve(cfg), cloze::parse_eval_setting(setting), cloze::parse_encoder_id(encoder));
  });
}

ps_status ps_cmd_report(const ps_config* cfg) {
  return guarded([&] { app::cmd_report(resolve(cfg)); });
}

ps_status ps_rerun(const char* snapshot_path, int force) {
  return guarded([&] {
    require_arg(snapshot_path, "snapshot_path");
    app::rerun(snapshot_path, force != 0);
  });
}

ps_status ps_demo_project(const char* dir, uint64_t seed, char** config_path) {
  return guarded([&] {
    require_arg(dir, "dir");
    const auto file = app::write_demo_project(dir, seed);
    if (config_path != nullptr) *config_path = copy_string(file.string());
  });
}

ps_status ps_image_load(const char* path, ps_image** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    *out = nullptr;
    *out = new ps_image{load_image(path)};
  });
}

ps_status ps_image_save_png(const ps_image* img, const char* path) {
  return guarded([&] {
    require_arg(img, "image");
    require_arg(path, "path");
    save_png(img->raster, path);
  });
}

ps_status ps_image_size(const ps_image* img, int* width, int* height) {
  return guarded([&] {
    require_arg(img, "image");
    if (width) *width = img->raster.width();
    if (height) *height = img->raster.height();
  });
}

void ps_image_free(ps_image* img) { delete img; }

ps_status ps_average_hash(const ps_image* img, uint64_t* out) {
  return guarded([&] {
    require_arg(img, "image");
    require_arg(out, "out");
    *out = average_hash(img->raster).bits;
  });
}

int ps_hamming(uint64_t a, uint64_t b) { return hamming(ImageHash{a}, ImageHash{b}); }

ps_status ps_style_model_load(const char* dir, ps_style_model** out) {
  return guarded([&] {
    require_arg(dir, "dir");
    require_arg(out, "out");
    *out = nullptr;
    *out = new ps_style_model{stylenet::load_style_model(dir)};
  });
}

ps_status ps_stylize(const ps_style_model* model, const ps_image* in, ps_image** out) {
  return guarded([&] {
    require_arg(model, "model");
    require_arg(in, "image");
    require_arg(out, "out");
    *out = nullptr;
    *out = new ps_image{stylenet::stylize(model->model, in->raster)};
  });
}

void ps_style_model_free(ps_style_model* model) { delete model; }

}  // extern "C"
