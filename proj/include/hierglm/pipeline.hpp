#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hierglm/comparison.hpp"
#include "hierglm/diagnostics.hpp"
#include "hierglm/model.hpp"
#include "hierglm/predictive.hpp"
#include "hierglm/sampler.hpp"

namespace hierglm {

/// Everything needed to rerun a fit. Timings and jobs are informational and
/// do not affect any result.
struct RunManifest {
  std::string software_version = HIERGLM_VERSION;
  std::string input_path;
  std::size_t rows_read = 0;
  std::size_t records = 0;
  std::size_t sample_n = 0;
  std::string simulation;  // JSON text of the truth sidecar, if one was found
  std::vector<ModelKind> models;
  SamplerConfig sampler;
  double hdi_prob = 0.95;
  std::uint64_t ppc_seed = 0;
  Standardization standardization;
  std::map<std::string, std::size_t> divergences;
  std::vector<std::string> warnings;

  std::map<std::string, double> timings_seconds;
  std::size_t jobs = 1;
};

struct TailRow {
  std::string parameter;
  double p_greater_zero = 0.0;
  double p_less_zero = 0.0;
};

struct OddsRatioRow {
  std::string parameter;
  double odds_ratio = 0.0;  // exp(posterior mean)
  double hdi_low = 0.0;     // exp(HDI endpoint)
  double hdi_high = 0.0;
};

struct ModelFit {
  ModelKind kind = ModelKind::Simple;
  ChainDraws draws;
  std::vector<SummaryRow> summary;
  std::vector<OddsRatioRow> odds_ratios;
  std::vector<TailRow> tails;
  WaicResult waic;
  PredictiveSummary ppc;
};

struct Bundle {
  RunManifest manifest;
  std::vector<ModelFit> fits;            // in manifest.models order
  std::vector<ComparisonRow> comparison;  // empty with fewer than two models
};

struct PipelineConfig {
  std::vector<ModelKind> models{ModelKind::Simple, ModelKind::Hierarchical, ModelKind::Interaction};
  SamplerConfig sampler;
  std::size_t jobs = 1;
  double hdi_prob = 0.95;
};

/// Minimum number of records accepted by run_pipeline.
inline constexpr std::size_t kMinPipelineRecords = 100;

/// Odds ratios and tail probabilities are reported for every parameter
/// except the group scale.
std::vector<OddsRatioRow> odds_ratios(const std::vector<SummaryRow>& summary, ModelKind kind);
std::vector<TailRow> tail_rows(const ChainDraws& draws, ModelKind kind);

/// Fits each requested model (up to `jobs` at once), then computes
/// diagnostics, WAIC, comparison and posterior predictive summaries.
/// `manifest` carries the input description and is completed in place.
Bundle run_pipeline(const std::vector<BookingRecord>& records, const PipelineConfig& config, RunManifest manifest);

}  // namespace hierglm
