#pragma once

#include <span>
#include <string>
#include <vector>

#include "hierglm/comparison.hpp"
#include "hierglm/diagnostics.hpp"
#include "hierglm/sampler.hpp"

namespace hierglm::svg {

/// Draw index against value, one polyline per chain.
std::string trace_plot(const ChainDraws& draws, std::size_t param);

/// Gaussian KDE of all chains with the HDI shaded.
std::string density_plot(const ChainDraws& draws, std::size_t param, Interval hdi);

/// Forest-style WAIC comparison: elpd +- SE per model, best on top.
std::string waic_forest(std::span<const ComparisonRow> rows);

/// Histogram of replicate rates with a marker at the observed rate.
std::string ppc_histogram(std::span<const double> replicate_rates, double observed_rate, Interval hdi,
                          const std::string& title);

}  // namespace hierglm::svg
