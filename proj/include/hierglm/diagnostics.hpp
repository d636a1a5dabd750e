#pragma once

#include <span>
#include <string>
#include <vector>

#include "hierglm/sampler.hpp"

namespace hierglm {

/// Draws of one parameter, chain-major: chains x draws_per_chain.
struct DrawMatrix {
  std::span<const double> values;
  std::size_t chains = 0;
  std::size_t draws = 0;

  double operator()(std::size_t c, std::size_t d) const { return values[c * draws + d]; }
};

enum class DiagnosticStatus { Ok, ConstantChain };

struct Diagnostic {
  double value = 0.0;
  DiagnosticStatus status = DiagnosticStatus::Ok;

  bool ok() const noexcept { return status == DiagnosticStatus::Ok; }
};

/// Rank-normalized split R-hat.
Diagnostic split_rhat(const DrawMatrix& draws);

/// ESS of the rank-normalized split chains.
Diagnostic ess_bulk(const DrawMatrix& draws);
/// Minimum ESS of the 5% and 95% quantile indicator chains.
Diagnostic ess_tail(const DrawMatrix& draws);
/// ESS of the split chains as given (no rank normalization).
Diagnostic ess_raw(const DrawMatrix& draws);

/// Average ranks (ties share their mean rank) mapped through the normal
/// quantile function with the (r - 3/8) / (S + 1/4) offset.
std::vector<double> rank_normalize(std::span<const double> values);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Shortest window of ceil(prob * n) consecutive order statistics; ties go to
/// the lowest start index.
Interval hdi(std::span<const double> samples, double prob = 0.95);

enum class TailDirection { Greater, Less };

double tail_probability(std::span<const double> samples, TailDirection direction, double threshold);

/// Type-7 (linear interpolation) sample quantile.
double quantile(std::span<const double> samples, double prob);

/// Super-efficiency cap applied to every ESS estimate, as a multiple of total draws.
inline constexpr double kEssCapFactor = 1.5;

struct SummaryRow {
  std::string parameter;
  double mean = 0.0;
  double sd = 0.0;
  double hdi_low = 0.0;
  double hdi_high = 0.0;
  double rhat = 0.0;
  double ess_bulk = 0.0;
  double ess_tail = 0.0;
  bool constant = false;  // rhat/ESS undefined (zero within-chain variance)
};

std::vector<SummaryRow> summarize(const ChainDraws& draws, double prob = 0.95);

}  // namespace hierglm
