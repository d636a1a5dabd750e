#pragma once

#include <span>
#include <string>
#include <vector>

#include "hierglm/model.hpp"
#include "hierglm/sampler.hpp"

namespace hierglm {

struct WaicResult {
  std::string model;
  double elpd_waic = 0.0;
  double p_waic = 0.0;
  double se = 0.0;
  double lppd = 0.0;
  std::vector<double> pointwise;  // lppd_i - p_i
};

/// Row-major draws x observations matrix of pointwise log-likelihoods.
struct LogLikMatrix {
  std::vector<double> values;
  std::size_t draws = 0;
  std::size_t observations = 0;

  double operator()(std::size_t s, std::size_t i) const { return values[s * observations + i]; }
};

/// Per-observation WAIC terms from one column of log-likelihood draws.
struct WaicTerm {
  double lppd = 0.0;
  double p = 0.0;
};
WaicTerm waic_term(std::span<const double> column);

WaicResult waic(const LogLikMatrix& log_lik, std::string model = {});

/// Evaluates the log-likelihood matrix at every stored draw.
LogLikMatrix pointwise_log_lik(const ModelSpec& spec, const ChainDraws& draws, const PreparedData& data);

/// WAIC straight from draws without materializing the draws x n matrix;
/// observations are processed in parallel. Equal to
/// waic(pointwise_log_lik(...)) bit for bit.
WaicResult waic_from_draws(const ModelSpec& spec, const ChainDraws& draws, const PreparedData& data);

struct ComparisonRow {
  std::string model;
  std::size_t rank = 0;  // 1 = best
  double elpd_waic = 0.0;
  double p_waic = 0.0;
  double se = 0.0;
  double elpd_diff = 0.0;  // best minus this model, >= 0
  double dse = 0.0;        // SE of the paired pointwise difference
};

/// Sorts by elpd_waic descending (ties by model name).
std::vector<ComparisonRow> compare(std::span<const WaicResult> results);

}  // namespace hierglm
