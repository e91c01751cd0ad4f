// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "cloze/model.hpp"

#include <cmath>
#include <cstdlib>

#include "core/error.hpp"
#include "nn/serialize.hpp"

namespace panelstyle::cloze {

std::string_view to_string(EncoderId e) {
  switch (e) {
    case EncoderId::kFeatureC: return "feature_C";
    case EncoderId::kFeatureM: return "feature_M";
    case EncoderId::kFrozen: return "frozen";
  }
  return "?";
}

std::string_view to_string(EvalSetting s) {
  switch (s) {
    case EvalSetting::kNoTransfer: return "N_T";
    case EvalSetting::kWholeTransfer: return "T_W";
    case EvalSetting::kMaskedTransfer: return "T_M";
    case EvalSetting::kCompositionTransfer: return "T_C";
  }
  return "?";
}

EncoderId parse_encoder_id(std::string_view s) {
  if (s == "feature_C") return EncoderId::kFeatureC;
  if (s == "feature_M") return EncoderId::kFeatureM;
  if (s == "frozen") return EncoderId::kFrozen;
  throw ConfigError("unknown encoder '" + std::string(s) +
                    "' (expected feature_C, feature_M or frozen)");
}

EvalSetting parse_eval_setting(std::string_view s) {
  std::string t(s);
  for (auto& ch : t)
    if (ch == '-') ch = '_';
  if (t == "N_T" || t == "N_S") return EvalSetting::kNoTransfer;
  if (t == "T_W") return EvalSetting::kWholeTransfer;
  if (t == "T_M") return EvalSetting::kMaskedTransfer;
  if (t == "T_C") return EvalSetting::kCompositionTransfer;
  throw ConfigError("unknown evaluation setting '" + std::string(s) +
                    "' (expected N_T, T_W, T_M or T_C)");
}

std::string resolve_encoder_weights(const std::string& weights) {
  const char* cache = std::getenv("CPST_CACHE");
  if (weights.empty()) {
    if (cache && *cache) {
      const auto p = std::filesystem::path(cache) / "vgg16.pswb";
      if (std::filesystem::exists(p)) return p.string();
    }
    return {};
  }
  if (std::filesystem::exists(weights)) return weights;
  if (cache && *cache && std::filesystem::path(weights).is_relative()) {
    const auto p = std::filesystem::path(cache) / weights;
    if (std::filesystem::exists(p)) return p.string();
  }
  throw AssetError("encoder weights not found: " + weights +
                   (cache && *cache ? " (also looked under CPST_CACHE=" + std::string(cache) + ")"
                                    : std::string()));
}

namespace {

nn::Vgg16Config encoder_vgg_config(const EncoderConfig& cfg) {
  if (cfg.input_size < 32) throw ConfigError("encoder input_size must be at least 32");
  nn::Vgg16Config v = cfg.vgg;
  v.classifier = true;
  if (!v.weights.empty()) v.weights = resolve_encoder_weights(v.weights);
  return v;
}

template <typename T>
nn::Param<T>* find_param(const std::vector<nn::Param<T>*>& params, const std::string& name) {
  for (auto* p : params)
    if (p->name == name) return p;
  throw Error(ErrorKind::kInternal, "missing parameter " + name);
}

}  // namespace

PanelEncoder::PanelEncoder(const EncoderConfig& cfg)
    : cfg_(cfg), vgg_(std::make_unique<nn::Vgg16<float>>(encoder_vgg_config(cfg))) {}

nn::Vector<float> PanelEncoder::pooled(const Raster& image) const {
  PANELSTYLE_REQUIRE(image.width() > 0 && image.height() > 0, "encoder: empty image");
  const Raster sized = resize_area(image, cfg_.input_size, cfg_.input_size);
  const auto x = nn::imagenet_normalize(nn::to_tensor<float>(sized));
  const auto p = vgg_->pooled(x);
  return p.vec();
}

std::vector<nn::Param<float>*> PanelEncoder::head_params() {
  const auto all = vgg_->params();
  return {find_param(all, "classifier.0.weight"), find_param(all, "classifier.0.bias"),
          find_param(all, "classifier.3.weight"), find_param(all, "classifier.3.bias")};
}

std::vector<const nn::Param<float>*> PanelEncoder::head_params() const {
  auto* self = const_cast<PanelEncoder*>(this);
  std::vector<const nn::Param<float>*> out;
  for (auto* p : self->head_params()) out.push_back(p);
  return out;
}

nn::Matrix<float> PanelEncoder::embed_pooled(const nn::Matrix<float>& pooled,
                                             HeadCache* cache) const {
  PANELSTYLE_REQUIRE(pooled.rows() == pooled_dim(), "encoder: pooled feature size mismatch");
  const auto p = head_params();
  const int D = embedding_dim(), P = pooled_dim();
  Eigen::Map<const nn::MatrixRM<float>> w6(p[0]->value.data(), D, P);
  Eigen::Map<const nn::Vector<float>> b6(p[1]->value.data(), D);
  Eigen::Map<const nn::MatrixRM<float>> w7(p[2]->value.data(), D, D);
  Eigen::Map<const nn::Vector<float>> b7(p[3]->value.data(), D);
  nn::Matrix<float> a6 = w6 * pooled;
  a6.colwise() += b6;
  a6 = a6.cwiseMax(0.0f);
  nn::Matrix<float> e = w7 * a6;
  e.colwise() += b7;
  e = e.cwiseMax(0.0f);
  if (cache) {
    cache->x = pooled;
    cache->a6 = a6;
    cache->e = e;
  }
  return e;
}

void PanelEncoder::backward_head(const nn::Matrix<float>& d_embedding, const HeadCache& cache) {
  const auto p = head_params();
  const int D = embedding_dim(), P = pooled_dim();
  Eigen::Map<const nn::MatrixRM<float>> w7(p[2]->value.data(), D, D);
  Eigen::Map<nn::MatrixRM<float>> dw6(p[0]->grad.data(), D, P);
  Eigen::Map<nn::Vector<float>> db6(p[1]->grad.data(), D);
  Eigen::Map<nn::MatrixRM<float>> dw7(p[2]->grad.data(), D, D);
  Eigen::Map<nn::Vector<float>> db7(p[3]->grad.data(), D);
  const nn::Matrix<float> dz7 =
      (d_embedding.array() * (cache.e.array() > 0.0f).cast<float>()).matrix();
  dw7.noalias() += dz7 * cache.a6.transpose();
  db7 += dz7.rowwise().sum();
  const nn::Matrix<float> da6 = w7.transpose() * dz7;
  const nn::Matrix<float> dz6 = (da6.array() * (cache.a6.array() > 0.0f).cast<float>()).matrix();
  dw6.noalias() += dz6 * cache.x.transpose();
  db6 += dz6.rowwise().sum();
}

nn::Vector<float> PanelEncoder::encode(const Raster& image) const {
  nn::Matrix<float> x = pooled(image);
  return embed_pooled(x, nullptr).col(0);
}

nn::Vector<float> encode_panel(const Raster& image, const PanelEncoder& encoder) {
  return encoder.encode(image);
}

template <typename T>
ClozeHead<T>::ClozeHead(int embed_dim, int hidden, int proj_dim, std::uint64_t seed)
    : lstm_("cloze.lstm", embed_dim, hidden),
      ctx_proj_("cloze.context_projection", {proj_dim, hidden}),
      cand_proj_("cloze.candidate_projection", {proj_dim, embed_dim}) {
  if (embed_dim < 1 || hidden < 1 || proj_dim < 1)
    throw ConfigError("cloze head dimensions must be positive");
  nn::Rng rng(seed);
  lstm_.visit([&](nn::Param<T>& p) { nn::init_uniform(p, rng, 1.0 / std::sqrt(double(hidden))); });
  nn::init_uniform(ctx_proj_, rng, 1.0 / std::sqrt(double(hidden)));
  nn::init_uniform(cand_proj_, rng, 1.0 / std::sqrt(double(embed_dim)));
}

template <typename T>
std::vector<nn::Param<T>*> ClozeHead<T>::params() {
  std::vector<nn::Param<T>*> out;
  lstm_.visit([&](nn::Param<T>& p) { out.push_back(&p); });
  out.push_back(&ctx_proj_);
  out.push_back(&cand_proj_);
  return out;
}

template <typename T>
std::vector<const nn::Param<T>*> ClozeHead<T>::params() const {
  std::vector<const nn::Param<T>*> out;
  lstm_.visit([&](const nn::Param<T>& p) { out.push_back(&p); });
  out.push_back(&ctx_proj_);
  out.push_back(&cand_proj_);
  return out;
}

template <typename T>
nn::Matrix<T> ClozeHead<T>::logits(const std::vector<nn::Matrix<T>>& context,
                                   const std::array<nn::Matrix<T>, 3>& candidates,
                                   Cache* cache) const {
  const Eigen::Index P = ctx_proj_.shape[0], H = lstm_.hidden_size(), D = lstm_.input_size();
  Eigen::Map<const nn::MatrixRM<T>> pc(ctx_proj_.value.data(), P, H);
  Eigen::Map<const nn::MatrixRM<T>> pa(cand_proj_.value.data(), P, D);
  nn::Matrix<T> h = lstm_.forward_batch(context, cache ? &cache->lstm : nullptr);
  nn::Matrix<T> u = pc * h;
  nn::Matrix<T> out(3, h.cols());
  std::array<nn::Matrix<T>, 3> v;
  for (int k = 0; k < 3; ++k) {
    PANELSTYLE_REQUIRE(candidates[k].rows() == D && candidates[k].cols() == h.cols(),
                       "cloze head: candidate shape mismatch");
    v[k] = pa * candidates[k];
    out.row(k) = (u.array() * v[k].array()).colwise().sum().matrix();
  }
  if (cache) {
    cache->h = std::move(h);
    cache->u = std::move(u);
    cache->v = std::move(v);
    cache->e = candidates;
  }
  return out;
}

template <typename T>
void ClozeHead<T>::backward(const nn::Matrix<T>& d_logits, Cache& cache,
                            std::vector<nn::Matrix<T>>* d_context,
                            std::array<nn::Matrix<T>, 3>* d_candidates) {
  const Eigen::Index P = ctx_proj_.shape[0], H = lstm_.hidden_size(), D = lstm_.input_size();
  Eigen::Map<const nn::MatrixRM<T>> pc(ctx_proj_.value.data(), P, H);
  Eigen::Map<const nn::MatrixRM<T>> pa(cand_proj_.value.data(), P, D);
  Eigen::Map<nn::MatrixRM<T>> dpc(ctx_proj_.grad.data(), P, H);
  Eigen::Map<nn::MatrixRM<T>> dpa(cand_proj_.grad.data(), P, D);
  nn::Matrix<T> du = nn::Matrix<T>::Zero(P, cache.u.cols());
  for (int k = 0; k < 3; ++k) {
    du.array() += cache.v[k].array().rowwise() * d_logits.row(k).array();
    const nn::Matrix<T> dv = (cache.u.array().rowwise() * d_logits.row(k).array()).matrix();
    dpa.noalias() += dv * cache.e[k].transpose();
    if (d_candidates) (*d_candidates)[k].noalias() = pa.transpose() * dv;
  }
  dpc.noalias() += du * cache.h.transpose();
  const nn::Matrix<T> dh = pc.transpose() * du;
  auto dctx = lstm_.backward_batch(dh, cache.lstm);
  if (d_context) *d_context = std::move(dctx);
}

template <typename T>
double cross_entropy(const nn::Matrix<T>& logits, const std::vector<int>& answers,
                     nn::Matrix<T>* d_logits) {
  const Eigen::Index B = logits.cols();
  PANELSTYLE_REQUIRE(logits.rows() == 3 && Eigen::Index(answers.size()) == B,
                     "cross_entropy: shape mismatch");
  if (d_logits) d_logits->resize(3, B);
  double loss = 0;
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto p = softmax3(double(logits(0, b)), double(logits(1, b)), double(logits(2, b)));
    const int a = answers[std::size_t(b)];
    PANELSTYLE_REQUIRE(a >= 0 && a < 3, "cross_entropy: answer out of range");
    const double m = std::max({double(logits(0, b)), double(logits(1, b)), double(logits(2, b))});
    double z = 0;
    for (int k = 0; k < 3; ++k) z += std::exp(double(logits(k, b)) - m);
    loss += -(double(logits(a, b)) - m - std::log(z));
    if (d_logits)
      for (int k = 0; k < 3; ++k) (*d_logits)(k, b) = T((p[k] - (k == a ? 1.0 : 0.0)) / double(B));
  }
  return loss / double(B);
}

std::array<double, 3> softmax3(double a, double b, double c) {
  const double m = std::max({a, b, c});
  const double ea = std::exp(a - m), eb = std::exp(b - m), ec = std::exp(c - m);
  const double z = ea + eb + ec;
  return {ea / z, eb / z, ec / z};
}

template class ClozeHead<float>;
template class ClozeHead<double>;
template double cross_entropy<float>(const nn::Matrix<float>&, const std::vector<int>&,
                                     nn::Matrix<float>*);
template double cross_entropy<double>(const nn::Matrix<double>&, const std::vector<int>&,
                                      nn::Matrix<double>*);

ClozeModel::ClozeModel(EncoderId id, const ClozeConfig& cfg)
    : encoder_id(id),
      config(cfg),
      encoder(cfg.encoder),
      feature_mean("cloze.feature_mean", {cfg.encoder.vgg.fc_dim}),
      feature_scale("cloze.feature_scale", {1}),
      head(cfg.encoder.vgg.fc_dim, cfg.hidden, cfg.proj_dim, cfg.seed) {
  feature_scale.value[0] = 1.0f;
}

nn::Matrix<float> ClozeModel::normalize(const nn::Matrix<float>& e) const {
  Eigen::Map<const nn::Vector<float>> mean(feature_mean.value.data(), e.rows());
  return ((e.colwise() - mean) * feature_scale.value[0]).eval();
}

std::uint64_t ClozeModel::checksum() const {
  auto params = head.params();
  params.push_back(&feature_mean);
  params.push_back(&feature_scale);
  if (encoder_id != EncoderId::kFrozen)
    for (const auto* p : encoder.head_params()) params.push_back(p);
  return nn::checksum(params);
}

std::array<double, 3> score_candidates(const std::vector<nn::Vector<float>>& context,
                                       const std::vector<nn::Vector<float>>& candidates,
                                       const ClozeModel& model) {
  PANELSTYLE_REQUIRE(candidates.size() == 3, "score_candidates: expected 3 candidates, got " +
                                                 std::to_string(candidates.size()));
  PANELSTYLE_REQUIRE(int(context.size()) == model.config.n_context,
                     "score_candidates: context length " + std::to_string(context.size()) +
                         " but the model expects " + std::to_string(model.config.n_context));
  std::vector<nn::Matrix<float>> ctx;
  for (const auto& c : context) ctx.push_back(model.normalize(c));
  std::array<nn::Matrix<float>, 3> cand{model.normalize(candidates[0]),
                                        model.normalize(candidates[1]),
                                        model.normalize(candidates[2])};
  const auto l = model.head.logits(ctx, cand, nullptr);
  return softmax3(l(0, 0), l(1, 0), l(2, 0));
}

}  // namespace panelstyle::cloze
