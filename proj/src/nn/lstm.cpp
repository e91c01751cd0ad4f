// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/lstm.hpp"

#include <cmath>

#include "core/error.hpp"

namespace panelstyle::nn {

namespace {

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& v) {
  using T = typename Derived::Scalar;
  return (T(1) / (T(1) + (-v.array()).exp())).matrix().eval();
}

}  // namespace

template <typename T>
Lstm<T>::Lstm(std::string name, int input, int hidden)
    : in_(input),
      hid_(hidden),
      w_ih_(name + ".weight_ih", {4 * hidden, input}),
      w_hh_(name + ".weight_hh", {4 * hidden, hidden}),
      bias_(name + ".bias", {4 * hidden}) {}

template <typename T>
Matrix<T> Lstm<T>::forward_batch(const std::vector<Matrix<T>>& seq, Cache* cache) const {
  PANELSTYLE_REQUIRE(!seq.empty(), "lstm: empty sequence");
  const Eigen::Index H = hid_, B = seq.front().cols();
  Eigen::Map<const MatrixRM<T>> wih(w_ih_.value.data(), 4 * H, in_);
  Eigen::Map<const MatrixRM<T>> whh(w_hh_.value.data(), 4 * H, H);
  Eigen::Map<const Vector<T>> b(bias_.value.data(), 4 * H);
  Matrix<T> h = Matrix<T>::Zero(H, B), c = Matrix<T>::Zero(H, B);
  for (const auto& x : seq) {
    PANELSTYLE_REQUIRE(x.rows() == in_ && x.cols() == B, "lstm: input size mismatch");
    Matrix<T> z = wih * x;
    z.noalias() += whh * h;
    z.colwise() += b;
    const Matrix<T> i = sigmoid(z.topRows(H));
    const Matrix<T> f = sigmoid(z.middleRows(H, H));
    const Matrix<T> g = z.middleRows(2 * H, H).array().tanh().matrix();
    const Matrix<T> o = sigmoid(z.bottomRows(H));
    Matrix<T> c_new = (f.array() * c.array() + i.array() * g.array()).matrix();
    if (cache) {
      cache->x.push_back(x);
      cache->h_prev.push_back(h);
      cache->c_prev.push_back(c);
      cache->i.push_back(i);
      cache->f.push_back(f);
      cache->g.push_back(g);
      cache->o.push_back(o);
      cache->c.push_back(c_new);
    }
    c = std::move(c_new);
    h = (o.array() * c.array().tanh()).matrix();
  }
  return h;
}

template <typename T>
std::vector<Matrix<T>> Lstm<T>::backward_batch(const Matrix<T>& dh_last, const Cache& cache) {
  const Eigen::Index H = hid_, B = dh_last.cols();
  Eigen::Map<const MatrixRM<T>> wih(w_ih_.value.data(), 4 * H, in_);
  Eigen::Map<const MatrixRM<T>> whh(w_hh_.value.data(), 4 * H, H);
  Eigen::Map<MatrixRM<T>> dwih(w_ih_.grad.data(), 4 * H, in_);
  Eigen::Map<MatrixRM<T>> dwhh(w_hh_.grad.data(), 4 * H, H);
  Eigen::Map<Vector<T>> db(bias_.grad.data(), 4 * H);
  const std::size_t steps = cache.x.size();
  std::vector<Matrix<T>> dx(steps);
  Matrix<T> dh = dh_last;
  Matrix<T> dc = Matrix<T>::Zero(H, B);
  Matrix<T> dz(4 * H, B);
  for (std::size_t k = steps; k-- > 0;) {
    const Matrix<T> tc = cache.c[k].array().tanh().matrix();
    const auto i = cache.i[k].array();
    const auto f = cache.f[k].array();
    const auto g = cache.g[k].array();
    const auto o = cache.o[k].array();
    dc.array() += dh.array() * o * (T(1) - tc.array().square());
    dz.topRows(H) = (dc.array() * g * i * (T(1) - i)).matrix();
    dz.middleRows(H, H) = (dc.array() * cache.c_prev[k].array() * f * (T(1) - f)).matrix();
    dz.middleRows(2 * H, H) = (dc.array() * i * (T(1) - g.square())).matrix();
    dz.bottomRows(H) = (dh.array() * tc.array() * o * (T(1) - o)).matrix();
    dwih.noalias() += dz * cache.x[k].transpose();
    dwhh.noalias() += dz * cache.h_prev[k].transpose();
    db += dz.rowwise().sum();
    dx[k].noalias() = wih.transpose() * dz;
    dh.noalias() = whh.transpose() * dz;
    dc = (dc.array() * f).matrix();
  }
  return dx;
}

template <typename T>
Vector<T> Lstm<T>::forward(const std::vector<Vector<T>>& seq, Cache* cache) const {
  std::vector<Matrix<T>> m(seq.begin(), seq.end());
  return forward_batch(m, cache).col(0);
}

template <typename T>
std::vector<Vector<T>> Lstm<T>::backward(const Vector<T>& dh_last, const Cache& cache) {
  Matrix<T> dh = dh_last;
  std::vector<Vector<T>> out;
  for (auto& m : backward_batch(dh, cache)) out.push_back(m.col(0));
  return out;
}

template class Lstm<float>;
template class Lstm<double>;

}  // namespace panelstyle::nn
