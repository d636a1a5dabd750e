#pragma once

#include <cstdint>
#include <vector>

#include "hierglm/diagnostics.hpp"
#include "hierglm/model.hpp"
#include "hierglm/sampler.hpp"

namespace hierglm {

struct PredictiveSummary {
  std::vector<double> replicate_rates;
  double observed_rate = 0.0;
  double rate_mean = 0.0;
  Interval rate_hdi;  // NaN with fewer than 10 replicates
  // Per hotel type (0 = Resort, 1 = City). Informational only.
  std::vector<double> replicate_rates_resort;
  std::vector<double> replicate_rates_city;
  double observed_rate_resort = 0.0;
  double observed_rate_city = 0.0;
};

/// Draws a parameter vector from the spec's priors (hyperparameters first for
/// the Hierarchical model).
ParameterVector draw_from_prior(const ModelSpec& spec, std::mt19937_64& rng);

/// Fixed-design prior predictive simulation. Replicate r uses its own stream
/// derived from (seed, r), so results do not depend on thread count.
PredictiveSummary prior_predictive(const ModelSpec& spec, const PreparedData& data, std::size_t n_sims,
                                   std::uint64_t seed);

/// Fixed-design posterior predictive simulation over n_reps stored draws
/// chosen without replacement (all draws, in order, when n_reps equals the total).
/// n_reps = 0 selects every stored draw.
PredictiveSummary posterior_predictive(const ChainDraws& draws, const ModelSpec& spec, const PreparedData& data,
                                       std::uint64_t seed, std::size_t n_reps = 0);

}  // namespace hierglm
