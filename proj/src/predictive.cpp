#include "hierglm/predictive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hierglm/rng.hpp"

namespace hierglm {

namespace {

constexpr std::uint64_t kSelectionStream = 0xfffffffffffffff0ULL;

struct Replicate {
  double rate = 0.0;
  double rate_resort = 0.0;
  double rate_city = 0.0;
};

Replicate simulate_replicate(const ModelSpec& spec, const ParameterVector& theta, const PreparedData& data,
                             std::mt19937_64& rng) {
  std::size_t total = 0, city = 0, city_n = 0, resort = 0, resort_n = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double p = inv_logit(linear_predictor(spec, theta, data, i));
    const bool y = uniform01(rng) < p;
    total += y;
    if (data.h[i] != 0.0) {
      ++city_n;
      city += y;
    } else {
      ++resort_n;
      resort += y;
    }
  }
  const auto ratio = [](std::size_t a, std::size_t b) {
    return b ? static_cast<double>(a) / static_cast<double>(b) : std::numeric_limits<double>::quiet_NaN();
  };
  return {ratio(total, data.size()), ratio(resort, resort_n), ratio(city, city_n)};
}

PredictiveSummary finish(std::vector<Replicate> reps, const PreparedData& data) {
  PredictiveSummary s;
  for (const auto& r : reps) {
    s.replicate_rates.push_back(r.rate);
    s.replicate_rates_resort.push_back(r.rate_resort);
    s.replicate_rates_city.push_back(r.rate_city);
  }
  s.rate_mean = std::accumulate(s.replicate_rates.begin(), s.replicate_rates.end(), 0.0) /
                static_cast<double>(s.replicate_rates.size());
  if (s.replicate_rates.size() >= 10) {
    s.rate_hdi = hdi(s.replicate_rates, 0.95);
  } else {
    s.rate_hdi = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  }

  double y = 0.0, yc = 0.0, nc = 0.0, yr = 0.0, nr = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    y += data.y[i];
    if (data.h[i] != 0.0) {
      yc += data.y[i];
      nc += 1.0;
    } else {
      yr += data.y[i];
      nr += 1.0;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.observed_rate = data.size() ? y / static_cast<double>(data.size()) : nan;
  s.observed_rate_city = nc > 0.0 ? yc / nc : nan;
  s.observed_rate_resort = nr > 0.0 ? yr / nr : nan;
  return s;
}

}  // namespace

ParameterVector draw_from_prior(const ModelSpec& spec, std::mt19937_64& rng) {
  std::vector<double> v(spec.dim());
  // Priors are listed so hyperparameters precede the group effects.
  for (std::size_t i = 0; i < spec.dim(); ++i) {
    const auto& p = spec.priors[i];
    const double z = standard_normal(rng);
    switch (p.family) {
      case PriorFamily::Normal: v[i] = p.location + p.scale * z; break;
      case PriorFamily::HalfNormal: v[i] = std::abs(p.scale * z); break;
      case PriorFamily::GroupNormal: v[i] = v[kMuAlpha] + v[kSigmaAlpha] * z; break;
    }
  }
  return ParameterVector(spec.kind, std::move(v));
}

PredictiveSummary prior_predictive(const ModelSpec& spec, const PreparedData& data, std::size_t n_sims,
                                   std::uint64_t seed) {
  if (n_sims < 100) throw Error(ErrorCode::InvalidConfig, "prior predictive needs at least 100 simulations");
  if (data.size() == 0) throw Error(ErrorCode::EmptyData, "no rows to simulate over");
  spec.validate();
  std::vector<Replicate> reps(n_sims);
  const long long n = static_cast<long long>(n_sims);
#pragma omp parallel for schedule(static)
  for (long long r = 0; r < n; ++r) {
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(r));
    const ParameterVector theta = draw_from_prior(spec, rng);
    reps[static_cast<std::size_t>(r)] = simulate_replicate(spec, theta, data, rng);
  }
  return finish(std::move(reps), data);
}

PredictiveSummary posterior_predictive(const ChainDraws& draws, const ModelSpec& spec, const PreparedData& data,
                                       std::uint64_t seed, std::size_t n_reps) {
  const std::size_t total = draws.chains * draws.draws;
  if (total == 0) throw Error(ErrorCode::TooFewDraws, "no posterior draws");
  if (n_reps == 0) n_reps = total;
  if (n_reps > total) throw Error(ErrorCode::TooFewDraws, "more replicates requested than stored draws");
  if (draws.params() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "draws do not match the model");
  if (data.size() == 0) throw Error(ErrorCode::EmptyData, "no rows to simulate over");

  std::vector<std::size_t> picked(total);
  std::iota(picked.begin(), picked.end(), std::size_t{0});
  if (n_reps < total) {
    auto rng = stream_rng(seed, kSelectionStream);
    for (std::size_t i = 0; i < n_reps; ++i) {
      const std::size_t j = i + std::uniform_int_distribution<std::size_t>(0, total - 1 - i)(rng);
      std::swap(picked[i], picked[j]);
    }
    picked.resize(n_reps);
    std::sort(picked.begin(), picked.end());
  }

  std::vector<Replicate> reps(n_reps);
  const long long n = static_cast<long long>(n_reps);
#pragma omp parallel for schedule(static)
  for (long long r = 0; r < n; ++r) {
    const std::size_t flat = picked[static_cast<std::size_t>(r)];
    const ParameterVector theta(spec.kind, draws.draw_vector(flat / draws.draws, flat % draws.draws));
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(r));
    reps[static_cast<std::size_t>(r)] = simulate_replicate(spec, theta, data, rng);
  }
  return finish(std::move(reps), data);
}

}  // namespace hierglm
