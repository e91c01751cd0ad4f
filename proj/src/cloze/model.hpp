// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cloze/cloze_set.hpp"
#include "nn/lstm.hpp"
#include "nn/vgg16.hpp"

namespace panelstyle::cloze {

// feature_C / feature_M: encoder head tuned on the comics / manga cloze
// training split. frozen: the encoder is used as loaded.
enum class EncoderId { kFeatureC, kFeatureM, kFrozen };
enum class EvalSetting { kNoTransfer, kWholeTransfer, kMaskedTransfer, kCompositionTransfer };

inline constexpr std::array<EvalSetting, 4> kAllSettings = {
    EvalSetting::kNoTransfer, EvalSetting::kWholeTransfer, EvalSetting::kMaskedTransfer,
    EvalSetting::kCompositionTransfer};
inline constexpr std::array<EncoderId, 2> kReportEncoders = {EncoderId::kFeatureC,
                                                             EncoderId::kFeatureM};

std::string_view to_string(EncoderId e);
std::string_view to_string(EvalSetting s);
EncoderId parse_encoder_id(std::string_view s);
// Accepts N_T, T_W, T_M, T_C, the hyphenated forms, and N_S / N-S as the
// no-transfer setting.
EvalSetting parse_eval_setting(std::string_view s);

struct EncoderConfig {
  int input_size = 224;
  nn::Vgg16Config vgg{1, 4096, true, 16, ""};
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// VGG-16 fc7 panel encoder. The convolutional trunk is fixed; the fc6/fc7
// head can be tuned. A relative weights path that does not exist is looked
// up under $CPST_CACHE; a named file that cannot be found is an AssetError.
class PanelEncoder {
 public:
  struct HeadCache {
    nn::Matrix<float> x, a6, e;
  };

  explicit PanelEncoder(const EncoderConfig& cfg);

  const EncoderConfig& config() const { return cfg_; }
  int embedding_dim() const { return cfg_.vgg.fc_dim; }
  int pooled_dim() const { return vgg_->pooled_size(); }

  nn::Vector<float> pooled(const Raster& image) const;
  // pooled_dim × B → embedding_dim × B.
  nn::Matrix<float> embed_pooled(const nn::Matrix<float>& pooled, HeadCache* cache) const;
  void backward_head(const nn::Matrix<float>& d_embedding, const HeadCache& cache);
  nn::Vector<float> encode(const Raster& image) const;

  std::vector<nn::Param<float>*> head_params();
  std::vector<const nn::Param<float>*> head_params() const;

 private:
  EncoderConfig cfg_;
  std::unique_ptr<nn::Vgg16<float>> vgg_;
};

std::string resolve_encoder_weights(const std::string& weights);

// LSTM over the context, projections of context and candidates into a
// shared space, one logit per candidate (their inner product).
template <typename T>
class ClozeHead {
 public:
  struct Cache {
    typename nn::Lstm<T>::Cache lstm;
    nn::Matrix<T> h, u;
    std::array<nn::Matrix<T>, 3> v, e;
  };

  ClozeHead(int embed_dim, int hidden, int proj_dim, std::uint64_t seed);

  // context[t] and candidates[k] are embed_dim × B; returns 3 × B logits.
  nn::Matrix<T> logits(const std::vector<nn::Matrix<T>>& context,
                       const std::array<nn::Matrix<T>, 3>& candidates, Cache* cache) const;
  void backward(const nn::Matrix<T>& d_logits, Cache& cache, std::vector<nn::Matrix<T>>* d_context,
                std::array<nn::Matrix<T>, 3>* d_candidates);

  nn::Lstm<T>& lstm() { return lstm_; }
  nn::Param<T>& context_projection() { return ctx_proj_; }     // proj × hidden
  nn::Param<T>& candidate_projection() { return cand_proj_; }  // proj × embed
  std::vector<nn::Param<T>*> params();
  std::vector<const nn::Param<T>*> params() const;

 private:
  nn::Lstm<T> lstm_;
  nn::Param<T> ctx_proj_;
  nn::Param<T> cand_proj_;
};

// Mean cross-entropy of softmax(logits) against `answers`; writes
// d(loss)/d(logits) when asked.
template <typename T>
double cross_entropy(const nn::Matrix<T>& logits, const std::vector<int>& answers,
                     nn::Matrix<T>* d_logits);

std::array<double, 3> softmax3(double a, double b, double c);

struct ClozeConfig {
  int n_context = kDefaultContext;
  int hidden = 512;
  int proj_dim = 512;
  std::uint64_t seed = 7;
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 3e-4;
  double encoder_learning_rate = 1e-4;
  double dev_fraction = 0.2;
  EncoderConfig encoder;
  friend bool operator==(const ClozeConfig&, const ClozeConfig&) = default;
};

nlohmann::json to_json(const ClozeConfig& cfg);
ClozeConfig cloze_config_from_json(const nlohmann::json& j);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0;
  double dev_accuracy = 0;  // fraction in [0, 1]
};

struct ClozeModel {
  ClozeModel(EncoderId id, const ClozeConfig& cfg);

  EncoderId encoder_id;
  ClozeConfig config;
  PanelEncoder encoder;
  // Embeddings enter the head as (e - feature_mean) * feature_scale; both
  // are fitted on the training panels before training and then fixed.
  nn::Param<float> feature_mean;
  nn::Param<float> feature_scale;
  ClozeHead<float> head;
  std::vector<EpochLog> history;

  nn::Matrix<float> normalize(const nn::Matrix<float>& embeddings) const;

  std::uint64_t checksum() const;
};

nn::Vector<float> encode_panel(const Raster& image, const PanelEncoder& encoder);

// Probabilities over the candidates; throws ContractViolation unless there
// are exactly 3 candidates and the context length matches the model.
std::array<double, 3> score_candidates(const std::vector<nn::Vector<float>>& context,
                                       const std::vector<nn::Vector<float>>& candidates,
                                       const ClozeModel& model);

// Disjoint by book when there are at least two books, by instance otherwise.
std::pair<std::vector<ClozeInstance>, std::vector<ClozeInstance>> split_by_book(
    const std::vector<ClozeInstance>& set, double dev_fraction, std::uint64_t seed);

using EpochCallback = std::function<void(const EpochLog&)>;

// Cross-entropy training with Adam. Tuned encoders update the fc6/fc7 head
// jointly with the cloze head. Throws DivergenceError on a non-finite loss.
ClozeModel train_cloze_model(const std::vector<ClozeInstance>& train,
                             const std::vector<ClozeInstance>& dev, const PanelBank& bank,
                             EncoderId encoder_id, const ClozeConfig& cfg,
                             const EpochCallback& on_epoch = {}, int jobs = 1);

struct EvalReport {
  EvalSetting setting = EvalSetting::kNoTransfer;
  EncoderId encoder_id = EncoderId::kFrozen;
  int n_instances = 0;
  int n_correct = 0;
  double accuracy_pct = 0;
};

// Prediction = argmax, ties to the lowest index.
int predicted_index(const std::array<double, 3>& probs);
EvalReport score_report(const std::vector<ClozeInstance>& set,
                        const std::vector<std::array<double, 3>>& probs, EvalSetting setting,
                        EncoderId encoder_id);

std::vector<std::array<double, 3>> score_set(const ClozeModel& model,
                                             const std::vector<ClozeInstance>& set,
                                             const PanelBank& bank, int jobs = 1,
                                             int batch_size = 64);
EvalReport evaluate(const ClozeModel& model, const std::vector<ClozeInstance>& set,
                    const PanelBank& bank, EvalSetting setting,
                    std::vector<std::array<double, 3>>* probs = nullptr, int jobs = 1);

// setting,encoder,n_instances,accuracy_pct
std::string report_csv(const std::vector<EvalReport>& reports);
// setting,feature_C,feature_M with one row per setting; missing cells empty.
std::string grid_csv(const std::vector<EvalReport>& reports);
std::vector<EvalReport> parse_report_csv(const std::string& text);

// weights (blob), config.json, history.csv.
void save_cloze_model(const ClozeModel& model, const std::filesystem::path& dir);
ClozeModel load_cloze_model(const std::filesystem::path& dir);

}  // namespace panelstyle::cloze
