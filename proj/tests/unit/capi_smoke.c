/* Copyright 2026 The Panelstyle Authors
 * SPDX-License-Identifier: Apache-2.0 */

#include <stdio.h>
#include <string.h>

#include "panelstyle/panelstyle.h"

static int failures = 0;

#define EXPECT(cond)                                            \
  do {                                                          \
    if (!(cond)) {                                              \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                               \
    }                                                           \
  } while (0)

int main(void) {
  ps_config* cfg = NULL;
  ps_image* img = NULL;
  char* text = NULL;
  uint64_t h = 0;

  ps_set_log_level(PS_LOG_WARN);
  EXPECT(strlen(ps_version()) > 0);
  EXPECT(strcmp(ps_status_name(PS_ERR_ASSET_MISSING), "asset-missing") == 0);

  EXPECT(ps_config_new(&cfg) == PS_OK);
  EXPECT(ps_config_set(cfg, "seed", "12") == PS_OK);
  EXPECT(ps_config_set(cfg, "no_such_key", "1") == PS_ERR_CONFIG);
  EXPECT(strstr(ps_last_error(), "no_such_key") != NULL);
  EXPECT(ps_config_set(cfg, "treatment", "CP,N_M,C") == PS_ERR_CONFIG);
  EXPECT(ps_config_to_json(cfg, &text) == PS_OK);
  EXPECT(text != NULL && strstr(text, "\"seed\": 12") != NULL);
  ps_string_free(text);

  EXPECT(ps_config_load("/nonexistent/panelstyle.json", &cfg) == PS_ERR_ASSET_MISSING);
  EXPECT(cfg == NULL);
  EXPECT(ps_image_load("/nonexistent/image.png", &img) == PS_ERR_ASSET_MISSING);
  EXPECT(img == NULL);
  EXPECT(ps_average_hash(NULL, &h) == PS_ERR_CONTRACT);
  EXPECT(ps_cmd_cloze_train(NULL, "frozen") == PS_ERR_CONTRACT);
  EXPECT(ps_rerun("/nonexistent/snapshot.json", 0) == PS_ERR_ASSET_MISSING);

  EXPECT(ps_hamming(0, ~(uint64_t)0) == 64);
  EXPECT(ps_hamming(5, 5) == 0);

  ps_config_free(NULL);
  ps_image_free(NULL);
  if (failures == 0) printf("capi smoke: ok\n");
  return failures == 0 ? 0 : 1;
}
