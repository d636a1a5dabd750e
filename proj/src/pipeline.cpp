#include "hierglm/pipeline.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <exception>

#include "hierglm/rng.hpp"

namespace hierglm {

namespace {

bool reports_effect(ModelKind kind, std::size_t param) {
  return !(kind == ModelKind::Hierarchical && param == kSigmaAlpha);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<OddsRatioRow> odds_ratios(const std::vector<SummaryRow>& summary, ModelKind kind) {
  std::vector<OddsRatioRow> rows;
  for (std::size_t p = 0; p < summary.size(); ++p) {
    if (!reports_effect(kind, p)) continue;
    const auto& s = summary[p];
    rows.push_back({s.parameter, std::exp(s.mean), std::exp(s.hdi_low), std::exp(s.hdi_high)});
  }
  return rows;
}

std::vector<TailRow> tail_rows(const ChainDraws& draws, ModelKind kind) {
  std::vector<TailRow> rows;
  for (std::size_t p = 0; p < draws.params(); ++p) {
    if (!reports_effect(kind, p)) continue;
    const auto v = draws.parameter_draws(p);
    rows.push_back({draws.param_names[p], tail_probability(v, TailDirection::Greater, 0.0),
                    tail_probability(v, TailDirection::Less, 0.0)});
  }
  return rows;
}

Bundle run_pipeline(const std::vector<BookingRecord>& records, const PipelineConfig& config, RunManifest manifest) {
  if (records.size() < kMinPipelineRecords) {
    throw Error(ErrorCode::EmptyData, "need at least " + std::to_string(kMinPipelineRecords) + " records, got " +
                                          std::to_string(records.size()));
  }
  if (config.models.empty()) throw Error(ErrorCode::InvalidConfig, "no models requested");
  if (config.jobs < 1) throw Error(ErrorCode::InvalidConfig, "jobs must be at least 1");
  config.sampler.validate();

  const PreparedData data = prepare(records);
  manifest.records = records.size();
  manifest.models = config.models;
  manifest.sampler = config.sampler;
  manifest.hdi_prob = config.hdi_prob;
  manifest.standardization = data.standardization;
  manifest.ppc_seed = splitmix64(config.sampler.seed ^ 0x5050435f73656564ULL);
  manifest.jobs = config.jobs;

  const std::size_t m = config.models.size();
  Bundle bundle;
  bundle.fits.resize(m);
  std::vector<std::exception_ptr> errors(m);
  std::vector<double> seconds(m, 0.0);

  const long long mm = static_cast<long long>(m);
  const int threads = static_cast<int>(std::min<std::size_t>(config.jobs, m));
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
  for (long long ii = 0; ii < mm; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ModelFit& fit = bundle.fits[i];
      fit.kind = config.models[i];
      const ModelSpec spec = ModelSpec::for_kind(fit.kind);
      fit.draws = run_chains(spec, data, config.sampler);
      fit.summary = summarize(fit.draws, config.hdi_prob);
      fit.odds_ratios = odds_ratios(fit.summary, fit.kind);
      fit.tails = tail_rows(fit.draws, fit.kind);
      fit.waic = waic_from_draws(spec, fit.draws, data);
      fit.ppc = posterior_predictive(fit.draws, spec, data, splitmix64(manifest.ppc_seed + i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
    seconds[i] = seconds_since(t0);
  }

  for (std::size_t i = 0; i < m; ++i) {
    if (!errors[i]) continue;
    const std::string name(model_name(config.models[i]));
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "model " + name + ": " + e.message());
    } catch (const std::exception& e) {
      throw std::runtime_error("model " + name + ": " + e.what());
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    const std::string name(model_name(config.models[i]));
    manifest.divergences[name] = bundle.fits[i].draws.divergences();
    manifest.timings_seconds[name] = seconds[i];
  }

  if (m >= 2) {
    std::vector<WaicResult> results;
    for (const auto& f : bundle.fits) results.push_back(f.waic);
    bundle.comparison = compare(results);
  }
  bundle.manifest = std::move(manifest);
  return bundle;
}

}  // namespace hierglm
