#pragma once

// Row-parallel Bernoulli-logit kernels.
//
// Every model reduces to eta_i = sum_k c_k f_k(row_i) over a small fixed
// feature set:
//   Simple       c = (beta0..beta3)            f = (1, x1, x2, x3)
//   Hierarchical c = (alpha_0, alpha_1, b1..b3) f = (1-h, h, x1, x2, x3)
//   Interaction  c = (beta0..beta6)            f = (1, x1, x2, x3, h, x1 h, x2 h)
//
// The OpenMP kernels reduce over fixed-size row chunks and then add the chunk
// partials in chunk order, so the result is independent of the thread count.
// The *_serial variants are the straight-line reference the tests compare against.

#include <cstddef>
#include <span>

#include "hierglm/model.hpp"

namespace hierglm::kernels {

inline constexpr std::size_t kChunkRows = 512;

std::size_t coefficient_count(ModelKind kind) noexcept;

/// Maps constrained parameters onto the kernel coefficient vector.
void coefficients(const ParameterVector& theta, std::span<double> out);

/// Sum of log-likelihood; grad receives d/dc_k.
double log_lik_and_grad(ModelKind kind, std::span<const double> coef, const PreparedData& data,
                        std::span<double> grad);
double log_lik_and_grad_serial(ModelKind kind, std::span<const double> coef, const PreparedData& data,
                               std::span<double> grad);

void log_lik_pointwise(ModelKind kind, std::span<const double> coef, const PreparedData& data,
                       std::span<double> out);
void log_lik_pointwise_serial(ModelKind kind, std::span<const double> coef, const PreparedData& data,
                              std::span<double> out);

/// Log-likelihood of a single row; same arithmetic as log_lik_pointwise.
double log_lik_row(ModelKind kind, std::span<const double> coef, const PreparedData& data, std::size_t row);

/// y*eta - softplus(eta)
inline double bernoulli_logit_lpmf(double y, double eta) noexcept {
  return y * eta - softplus(eta);
}

}  // namespace hierglm::kernels
