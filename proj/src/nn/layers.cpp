// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace panelstyle::nn {

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(std::string name, int in, int out, int kernel, int stride, int pad, PadMode mode)
    : in_(in),
      out_(out),
      k_(kernel),
      stride_(stride),
      pad_(pad),
      mode_(mode),
      weight_(name + ".weight", {out, in, kernel, kernel}),
      bias_(name + ".bias", {out}) {}

template <typename T>
std::vector<int> Conv2d<T>::source_index(int n) const {
  std::vector<int> idx(std::size_t(n + 2 * pad_));
  const int period = 2 * n - 2;
  for (int p = 0; p < n + 2 * pad_; ++p) {
    int i = p - pad_;
    if (i < 0 || i >= n) {
      if (mode_ == PadMode::kZero) {
        i = -1;
      } else if (n == 1) {
        i = 0;
      } else {
        i = ((i % period) + period) % period;
        if (i >= n) i = period - i;
      }
    }
    idx[std::size_t(p)] = i;
  }
  return idx;
}

template <typename T>
MatrixRM<T> Conv2d<T>::im2col(const Tensor<T>& x, int ho, int wo) const {
  const auto sy = source_index(x.h), sx = source_index(x.w);
  MatrixRM<T> col(Eigen::Index(in_) * k_ * k_, Eigen::Index(ho) * wo);
  for (int ci = 0; ci < in_; ++ci)
    for (int ky = 0; ky < k_; ++ky)
      for (int kx = 0; kx < k_; ++kx) {
        T* row = col.row((Eigen::Index(ci) * k_ + ky) * k_ + kx).data();
        for (int oy = 0; oy < ho; ++oy) {
          const int yy = sy[std::size_t(oy * stride_ + ky)];
          T* dst = row + std::size_t(oy) * wo;
          if (yy < 0) {
            std::fill(dst, dst + wo, T(0));
            continue;
          }
          const T* src = &x.data[(std::size_t(ci) * x.h + yy) * x.w];
          for (int ox = 0; ox < wo; ++ox) {
            const int xx = sx[std::size_t(ox * stride_ + kx)];
            dst[ox] = xx < 0 ? T(0) : src[xx];
          }
        }
      }
  return col;
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x, Tape<T>* tape) const {
  PANELSTYLE_REQUIRE(x.c == in_, weight_.name + ": expected " + std::to_string(in_) +
                                     " input channels, got " + std::to_string(x.c));
  const int ho = out_size(x.h), wo = out_size(x.w);
  PANELSTYLE_REQUIRE(ho > 0 && wo > 0, weight_.name + ": input too small");
  const MatrixRM<T> col = im2col(x, ho, wo);
  Eigen::Map<const MatrixRM<T>> wm(weight_.value.data(), out_, Eigen::Index(in_) * k_ * k_);
  Eigen::Map<const Vector<T>> b(bias_.value.data(), out_);
  Tensor<T> y(out_, ho, wo);
  auto ym = y.mat();
  ym.noalias() = wm * col;
  ym.colwise() += b;
  if (tape) tape->push(x);
  return y;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) {
  const Tensor<T> x = tape.pop();
  const int ho = dy.h, wo = dy.w;
  const MatrixRM<T> col = im2col(x, ho, wo);
  const auto dym = dy.mat();
  Eigen::Map<const MatrixRM<T>> wm(weight_.value.data(), out_, Eigen::Index(in_) * k_ * k_);
  if (param_grads) {
    Eigen::Map<MatrixRM<T>> dw(weight_.grad.data(), out_, Eigen::Index(in_) * k_ * k_);
    dw.noalias() += dym * col.transpose();
    Eigen::Map<Vector<T>> db(bias_.grad.data(), out_);
    db += dym.rowwise().sum();
  }
  const MatrixRM<T> dcol = wm.transpose() * dym;
  const auto sy = source_index(x.h), sx = source_index(x.w);
  Tensor<T> dx(x.c, x.h, x.w);
  for (int ci = 0; ci < in_; ++ci)
    for (int ky = 0; ky < k_; ++ky)
      for (int kx = 0; kx < k_; ++kx) {
        const T* row = dcol.row((Eigen::Index(ci) * k_ + ky) * k_ + kx).data();
        for (int oy = 0; oy < ho; ++oy) {
          const int yy = sy[std::size_t(oy * stride_ + ky)];
          if (yy < 0) continue;
          T* dst = &dx.data[(std::size_t(ci) * x.h + yy) * x.w];
          const T* src = row + std::size_t(oy) * wo;
          for (int ox = 0; ox < wo; ++ox) {
            const int xx = sx[std::size_t(ox * stride_ + kx)];
            if (xx >= 0) dst[xx] += src[ox];
          }
        }
      }
  return dx;
}

// ---------------------------------------------------------- InstanceNorm

template <typename T>
InstanceNorm<T>::InstanceNorm(std::string name, int channels, T eps)
    : c_(channels), eps_(eps), gamma_(name + ".weight", {channels}), beta_(name + ".bias", {channels}) {
  std::fill(gamma_.value.begin(), gamma_.value.end(), T(1));
}

template <typename T>
Tensor<T> InstanceNorm<T>::forward(const Tensor<T>& x, Tape<T>* tape) const {
  PANELSTYLE_REQUIRE(x.c == c_, gamma_.name + ": channel mismatch");
  Tensor<T> y(x.c, x.h, x.w);
  const auto xm = x.mat();
  auto ym = y.mat();
  const T n = T(x.plane());
  for (int ch = 0; ch < c_; ++ch) {
    const T mean = xm.row(ch).sum() / n;
    const T var = (xm.row(ch).array() - mean).square().sum() / n;
    const T inv = T(1) / std::sqrt(var + eps_);
    ym.row(ch) = ((xm.row(ch).array() - mean) * (inv * gamma_.value[std::size_t(ch)]) +
                  beta_.value[std::size_t(ch)])
                     .matrix();
  }
  if (tape) tape->push(x);
  return y;
}

template <typename T>
Tensor<T> InstanceNorm<T>::backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) {
  const Tensor<T> x = tape.pop();
  Tensor<T> dx(x.c, x.h, x.w);
  const auto xm = x.mat();
  const auto dym = dy.mat();
  auto dxm = dx.mat();
  const T n = T(x.plane());
  for (int ch = 0; ch < c_; ++ch) {
    const T mean = xm.row(ch).sum() / n;
    const T var = (xm.row(ch).array() - mean).square().sum() / n;
    const T inv = T(1) / std::sqrt(var + eps_);
    const auto xhat = ((xm.row(ch).array() - mean) * inv).eval();
    const auto g = dym.row(ch).array();
    if (param_grads) {
      gamma_.grad[std::size_t(ch)] += (g * xhat).sum();
      beta_.grad[std::size_t(ch)] += g.sum();
    }
    const auto dxhat = (g * gamma_.value[std::size_t(ch)]).eval();
    const T s1 = dxhat.sum(), s2 = (dxhat * xhat).sum();
    dxm.row(ch) = ((n * dxhat - s1 - xhat * s2) * (inv / n)).matrix();
  }
  return dx;
}

// ------------------------------------------------------------------ ReLU

template <typename T>
Tensor<T> ReLU<T>::forward(const Tensor<T>& x, Tape<T>* tape) const {
  Tensor<T> y = x;
  for (auto& v : y.data) v = v > T(0) ? v : T(0);
  if (tape) tape->push(y);
  return y;
}

template <typename T>
Tensor<T> ReLU<T>::backward(const Tensor<T>& dy, Tape<T>& tape, bool) {
  const Tensor<T> y = tape.pop();
  Tensor<T> dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(y.data[i] > T(0))) dx.data[i] = T(0);
  return dx;
}

// -------------------------------------------------------------- MaxPool2

template <typename T>
Tensor<T> MaxPool2<T>::forward(const Tensor<T>& x, Tape<T>* tape) const {
  const int ho = x.h / 2, wo = x.w / 2;
  PANELSTYLE_REQUIRE(ho > 0 && wo > 0, "max pool: input smaller than 2x2");
  Tensor<T> y(x.c, ho, wo);
  for (int ch = 0; ch < x.c; ++ch)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox)
        y.at(ch, oy, ox) = std::max({x.at(ch, 2 * oy, 2 * ox), x.at(ch, 2 * oy, 2 * ox + 1),
                                     x.at(ch, 2 * oy + 1, 2 * ox), x.at(ch, 2 * oy + 1, 2 * ox + 1)});
  if (tape) tape->push(x);
  return y;
}

template <typename T>
Tensor<T> MaxPool2<T>::backward(const Tensor<T>& dy, Tape<T>& tape, bool) {
  const Tensor<T> x = tape.pop();
  Tensor<T> dx(x.c, x.h, x.w);
  for (int ch = 0; ch < x.c; ++ch)
    for (int oy = 0; oy < dy.h; ++oy)
      for (int ox = 0; ox < dy.w; ++ox) {
        int by = 2 * oy, bx = 2 * ox;
        for (int dyy = 0; dyy < 2; ++dyy)
          for (int dxx = 0; dxx < 2; ++dxx)
            if (x.at(ch, 2 * oy + dyy, 2 * ox + dxx) > x.at(ch, by, bx))
              by = 2 * oy + dyy, bx = 2 * ox + dxx;
        dx.at(ch, by, bx) += dy.at(ch, oy, ox);
      }
  return dx;
}

// ------------------------------------------------------ UpsampleNearest2

template <typename T>
Tensor<T> UpsampleNearest2<T>::forward(const Tensor<T>& x, Tape<T>*) const {
  Tensor<T> y(x.c, x.h * 2, x.w * 2);
  for (int ch = 0; ch < x.c; ++ch)
    for (int yy = 0; yy < y.h; ++yy)
      for (int xx = 0; xx < y.w; ++xx) y.at(ch, yy, xx) = x.at(ch, yy / 2, xx / 2);
  return y;
}

template <typename T>
Tensor<T> UpsampleNearest2<T>::backward(const Tensor<T>& dy, Tape<T>&, bool) {
  Tensor<T> dx(dy.c, dy.h / 2, dy.w / 2);
  for (int ch = 0; ch < dy.c; ++ch)
    for (int yy = 0; yy < dy.h; ++yy)
      for (int xx = 0; xx < dy.w; ++xx) dx.at(ch, yy / 2, xx / 2) += dy.at(ch, yy, xx);
  return dx;
}

// ------------------------------------------------------- AdaptiveAvgPool

namespace {

inline int bin_start(int i, int n, int s) { return (i * n) / s; }
inline int bin_end(int i, int n, int s) { return ((i + 1) * n + s - 1) / s; }

}  // namespace

template <typename T>
Tensor<T> AdaptiveAvgPool<T>::forward(const Tensor<T>& x, Tape<T>* tape) const {
  Tensor<T> y(x.c, s_, s_);
  for (int ch = 0; ch < x.c; ++ch)
    for (int oy = 0; oy < s_; ++oy)
      for (int ox = 0; ox < s_; ++ox) {
        const int y0 = bin_start(oy, x.h, s_), y1 = bin_end(oy, x.h, s_);
        const int x0 = bin_start(ox, x.w, s_), x1 = bin_end(ox, x.w, s_);
        T acc = 0;
        for (int yy = y0; yy < y1; ++yy)
          for (int xx = x0; xx < x1; ++xx) acc += x.at(ch, yy, xx);
        y.at(ch, oy, ox) = acc / T((y1 - y0) * (x1 - x0));
      }
  if (tape) tape->push(Tensor<T>(x.c, x.h, x.w));
  return y;
}

template <typename T>
Tensor<T> AdaptiveAvgPool<T>::backward(const Tensor<T>& dy, Tape<T>& tape, bool) {
  Tensor<T> dx = tape.pop();
  for (int ch = 0; ch < dx.c; ++ch)
    for (int oy = 0; oy < s_; ++oy)
      for (int ox = 0; ox < s_; ++ox) {
        const int y0 = bin_start(oy, dx.h, s_), y1 = bin_end(oy, dx.h, s_);
        const int x0 = bin_start(ox, dx.w, s_), x1 = bin_end(ox, dx.w, s_);
        const T g = dy.at(ch, oy, ox) / T((y1 - y0) * (x1 - x0));
        for (int yy = y0; yy < y1; ++yy)
          for (int xx = x0; xx < x1; ++xx) dx.at(ch, yy, xx) += g;
      }
  return dx;
}

// ---------------------------------------------------------------- Linear

template <typename T>
Linear<T>::Linear(std::string name, int in, int out)
    : in_(in), out_(out), weight_(name + ".weight", {out, in}), bias_(name + ".bias", {out}) {}

template <typename T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x, Tape<T>* tape) const {
  PANELSTYLE_REQUIRE(int(x.size()) == in_, weight_.name + ": expected " + std::to_string(in_) +
                                               " inputs, got " + std::to_string(x.size()));
  Eigen::Map<const MatrixRM<T>> wm(weight_.value.data(), out_, in_);
  Eigen::Map<const Vector<T>> b(bias_.value.data(), out_);
  Tensor<T> y(out_, 1, 1);
  y.vec().noalias() = wm * x.vec() + b;
  if (tape) tape->push(x);
  return y;
}

template <typename T>
Tensor<T> Linear<T>::backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) {
  const Tensor<T> x = tape.pop();
  Eigen::Map<const MatrixRM<T>> wm(weight_.value.data(), out_, in_);
  if (param_grads) {
    Eigen::Map<MatrixRM<T>> dw(weight_.grad.data(), out_, in_);
    dw.noalias() += dy.vec() * x.vec().transpose();
    Eigen::Map<Vector<T>>(bias_.grad.data(), out_) += dy.vec();
  }
  Tensor<T> dx(x.c, x.h, x.w);
  dx.vec().noalias() = wm.transpose() * dy.vec();
  return dx;
}

// ------------------------------------------------------------ Sequential

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& x, Tape<T>* tape) const {
  Tensor<T> cur = x;
  for (const auto& l : layers_) cur = l->forward(cur, tape);
  return cur;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) {
  Tensor<T> cur = dy;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    cur = (*it)->backward(cur, tape, param_grads);
  return cur;
}

template <typename T>
void Sequential<T>::visit(const std::function<void(Param<T>&)>& fn) {
  for (auto& l : layers_) l->visit(fn);
}

template <typename T>
void Sequential<T>::visit(const std::function<void(const Param<T>&)>& fn) const {
  for (const auto& l : layers_) static_cast<const Module<T>&>(*l).visit(fn);
}

// -------------------------------------------------------------- Residual

template <typename T>
Tensor<T> Residual<T>::forward(const Tensor<T>& x, Tape<T>* tape) const {
  Tensor<T> y = body_.forward(x, tape);
  PANELSTYLE_REQUIRE(y.same_shape(x), "residual body must preserve shape");
  y.vec() += x.vec();
  return y;
}

template <typename T>
Tensor<T> Residual<T>::backward(const Tensor<T>& dy, Tape<T>& tape, bool param_grads) {
  Tensor<T> dx = body_.backward(dy, tape, param_grads);
  dx.vec() += dy.vec();
  return dx;
}

#define PANELSTYLE_INSTANTIATE(T)        \
  template class Conv2d<T>;              \
  template class InstanceNorm<T>;        \
  template class ReLU<T>;                \
  template class MaxPool2<T>;            \
  template class UpsampleNearest2<T>;    \
  template class AdaptiveAvgPool<T>;     \
  template class Linear<T>;              \
  template class Sequential<T>;          \
  template class Residual<T>;

PANELSTYLE_INSTANTIATE(float)
PANELSTYLE_INSTANTIATE(double)

}  // namespace panelstyle::nn
