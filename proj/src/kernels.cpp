#include "hierglm/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace hierglm::kernels {

namespace {

constexpr std::size_t kMaxCoef = 7;

// Feature row for model K, zero-padded to kMaxCoef.
template <ModelKind K>
inline void features(const PreparedData& d, std::size_t i, std::array<double, kMaxCoef>& f) {
  const double x1 = d.x1[i], x2 = d.x2[i], x3 = d.x3[i], h = d.h[i];
  if constexpr (K == ModelKind::Simple) {
    f = {1.0, x1, x2, x3, 0.0, 0.0, 0.0};
  } else if constexpr (K == ModelKind::Hierarchical) {
    f = {1.0 - h, h, x1, x2, x3, 0.0, 0.0};
  } else {
    f = {1.0, x1, x2, x3, h, x1 * h, x2 * h};
  }
}

template <ModelKind K>
constexpr std::size_t width() {
  if constexpr (K == ModelKind::Simple) return 4;
  if constexpr (K == ModelKind::Hierarchical) return 5;
  return 7;
}

// Accumulates log-likelihood and gradient over rows [begin, end) into acc,
// laid out as (log_lik, d/dc_0, ..., d/dc_{W-1}).
template <ModelKind K>
inline void accumulate(std::span<const double> coef, const PreparedData& d, std::size_t begin, std::size_t end,
                       double* acc) {
  constexpr std::size_t W = width<K>();
  std::array<double, kMaxCoef> f{};
  double ll = 0.0;
  std::array<double, kMaxCoef> g{};
  for (std::size_t i = begin; i < end; ++i) {
    features<K>(d, i, f);
    double eta = 0.0;
    for (std::size_t k = 0; k < W; ++k) eta += coef[k] * f[k];
    // Shared exponential for softplus and the sigmoid.
    const double e = std::exp(-std::abs(eta));
    const double sp = std::max(eta, 0.0) + std::log1p(e);
    const double p = eta >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
    const double y = d.y[i];
    ll += y * eta - sp;
    const double r = y - p;
    for (std::size_t k = 0; k < W; ++k) g[k] += r * f[k];
  }
  acc[0] += ll;
  for (std::size_t k = 0; k < W; ++k) acc[1 + k] += g[k];
}

template <ModelKind K>
double reduce_parallel(std::span<const double> coef, const PreparedData& d, std::span<double> grad) {
  constexpr std::size_t W = width<K>();
  constexpr std::size_t stride = W + 1;
  const std::size_t n = d.size();
  const std::size_t chunks = (n + kChunkRows - 1) / kChunkRows;
  std::vector<double> partial(chunks * stride, 0.0);
  const long long nchunks = static_cast<long long>(chunks);

#pragma omp parallel for schedule(static) if (chunks > 1)
  for (long long c = 0; c < nchunks; ++c) {
    const std::size_t b = static_cast<std::size_t>(c) * kChunkRows;
    accumulate<K>(coef, d, b, std::min(n, b + kChunkRows), &partial[static_cast<std::size_t>(c) * stride]);
  }

  double ll = 0.0;
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    const double* p = &partial[c * stride];
    ll += p[0];
    for (std::size_t k = 0; k < W; ++k) grad[k] += p[1 + k];
  }
  return ll;
}

template <ModelKind K>
double reduce_serial(std::span<const double> coef, const PreparedData& d, std::span<double> grad) {
  constexpr std::size_t W = width<K>();
  std::array<double, kMaxCoef> f{};
  double ll = 0.0;
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    features<K>(d, i, f);
    double eta = 0.0;
    for (std::size_t k = 0; k < W; ++k) eta += coef[k] * f[k];
    ll += bernoulli_logit_lpmf(d.y[i], eta);
    const double r = d.y[i] - inv_logit(eta);
    for (std::size_t k = 0; k < W; ++k) grad[k] += r * f[k];
  }
  return ll;
}

template <ModelKind K>
inline double row_log_lik(std::span<const double> coef, const PreparedData& d, std::size_t i) {
  constexpr std::size_t W = width<K>();
  std::array<double, kMaxCoef> f{};
  features<K>(d, i, f);
  double eta = 0.0;
  for (std::size_t k = 0; k < W; ++k) eta += coef[k] * f[k];
  return bernoulli_logit_lpmf(d.y[i], eta);
}

template <ModelKind K>
void pointwise(std::span<const double> coef, const PreparedData& d, std::span<double> out, bool parallel) {
  const long long n = static_cast<long long>(d.size());
#pragma omp parallel for schedule(static) if (parallel && n > static_cast<long long>(kChunkRows))
  for (long long ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    out[i] = row_log_lik<K>(coef, d, i);
  }
}

void check(ModelKind kind, std::span<const double> coef, std::span<const double> grad) {
  const std::size_t k = coefficient_count(kind);
  if (coef.size() != k || grad.size() != k) {
    throw Error(ErrorCode::DimensionMismatch, "kernel coefficient/gradient size mismatch");
  }
}

}  // namespace

std::size_t coefficient_count(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Simple: return width<ModelKind::Simple>();
    case ModelKind::Hierarchical: return width<ModelKind::Hierarchical>();
    case ModelKind::Interaction: return width<ModelKind::Interaction>();
  }
  return 0;
}

void coefficients(const ParameterVector& theta, std::span<double> out) {
  if (out.size() != coefficient_count(theta.kind())) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient buffer size");
  }
  if (theta.kind() == ModelKind::Hierarchical) {
    out[0] = theta[kAlpha0];
    out[1] = theta[kAlpha0 + 1];
    for (std::size_t b = 0; b < 3; ++b) out[2 + b] = theta[4 + b];
  } else {
    std::copy(theta.values().begin(), theta.values().end(), out.begin());
  }
}

double log_lik_and_grad(ModelKind kind, std::span<const double> coef, const PreparedData& data,
                        std::span<double> grad) {
  check(kind, coef, grad);
  switch (kind) {
    case ModelKind::Simple: return reduce_parallel<ModelKind::Simple>(coef, data, grad);
    case ModelKind::Hierarchical: return reduce_parallel<ModelKind::Hierarchical>(coef, data, grad);
    case ModelKind::Interaction: return reduce_parallel<ModelKind::Interaction>(coef, data, grad);
  }
  return 0.0;
}

double log_lik_and_grad_serial(ModelKind kind, std::span<const double> coef, const PreparedData& data,
                               std::span<double> grad) {
  check(kind, coef, grad);
  switch (kind) {
    case ModelKind::Simple: return reduce_serial<ModelKind::Simple>(coef, data, grad);
    case ModelKind::Hierarchical: return reduce_serial<ModelKind::Hierarchical>(coef, data, grad);
    case ModelKind::Interaction: return reduce_serial<ModelKind::Interaction>(coef, data, grad);
  }
  return 0.0;
}

double log_lik_row(ModelKind kind, std::span<const double> coef, const PreparedData& data, std::size_t row) {
  switch (kind) {
    case ModelKind::Simple: return row_log_lik<ModelKind::Simple>(coef, data, row);
    case ModelKind::Hierarchical: return row_log_lik<ModelKind::Hierarchical>(coef, data, row);
    case ModelKind::Interaction: return row_log_lik<ModelKind::Interaction>(coef, data, row);
  }
  return 0.0;
}

namespace {
void pointwise_dispatch(ModelKind kind, std::span<const double> coef, const PreparedData& data,
                        std::span<double> out, bool parallel) {
  if (coef.size() != coefficient_count(kind) || out.size() != data.size()) {
    throw Error(ErrorCode::DimensionMismatch, "pointwise kernel buffer size");
  }
  switch (kind) {
    case ModelKind::Simple: return pointwise<ModelKind::Simple>(coef, data, out, parallel);
    case ModelKind::Hierarchical: return pointwise<ModelKind::Hierarchical>(coef, data, out, parallel);
    case ModelKind::Interaction: return pointwise<ModelKind::Interaction>(coef, data, out, parallel);
  }
}
}  // namespace

void log_lik_pointwise(ModelKind kind, std::span<const double> coef, const PreparedData& data,
                       std::span<double> out) {
  pointwise_dispatch(kind, coef, data, out, true);
}

void log_lik_pointwise_serial(ModelKind kind, std::span<const double> coef, const PreparedData& data,
                              std::span<double> out) {
  pointwise_dispatch(kind, coef, data, out, false);
}

}  // namespace hierglm::kernels
