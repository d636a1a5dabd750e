#include "hierglm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

namespace hierglm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Chains = std::vector<std::vector<double>>;

void require_draws(const DrawMatrix& m) {
  if (m.chains < 1 || m.draws < 4) {
    throw Error(ErrorCode::TooFewDraws, "need at least one chain with four or more draws");
  }
  if (m.values.size() != m.chains * m.draws) {
    throw Error(ErrorCode::DimensionMismatch, "draw matrix size does not match chains x draws");
  }
}

// Halves every chain; with an odd length the middle draw is dropped.
Chains split_chains(const DrawMatrix& m) {
  const std::size_t half = m.draws / 2;
  Chains out;
  out.reserve(2 * m.chains);
  for (std::size_t c = 0; c < m.chains; ++c) {
    std::vector<double> first(half), second(half);
    for (std::size_t d = 0; d < half; ++d) {
      first[d] = m(c, d);
      second[d] = m(c, m.draws - half + d);
    }
    out.push_back(std::move(first));
    out.push_back(std::move(second));
  }
  return out;
}

Chains rank_normalize_chains(const Chains& chains) {
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  const std::vector<double> z = rank_normalize(pooled);
  Chains out = chains;
  std::size_t k = 0;
  for (auto& c : out) {
    for (auto& v : c) v = z[k++];
  }
  return out;
}

double mean_of(std::span<const double> v) {
  // Shifted by the first element so a constant input returns it exactly.
  const double x0 = v[0];
  double s = 0.0;
  for (double x : v) s += x - x0;
  return x0 + s / static_cast<double>(v.size());
}

double var_of(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

Diagnostic rhat_of(const Chains& chains) {
  const std::size_t m = chains.size();
  const double n = static_cast<double>(chains[0].size());
  std::vector<double> means(m), vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = mean_of(chains[c]);
    vars[c] = var_of(chains[c], means[c]);
  }
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(m);
  if (!(w > 0.0)) return {kNaN, DiagnosticStatus::ConstantChain};
  const double b_over_n = var_of(means, mean_of(means));
  const double v_hat = (n - 1.0) / n * w + b_over_n;
  return {std::sqrt(v_hat / w), DiagnosticStatus::Ok};
}

// Multi-chain ESS with Geyer's initial monotone positive-pair truncation.
// Autocovariances are computed lazily, only up to the truncation lag.
Diagnostic ess_of(const Chains& chains) {
  const std::size_t m = chains.size();
  const std::size_t n = chains[0].size();
  const double nd = static_cast<double>(n);
  std::vector<double> means(m);
  std::vector<std::vector<double>> centered(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = mean_of(chains[c]);
    centered[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) centered[c][i] = chains[c][i] - means[c];
  }
  // Mean over chains of the biased autocovariance at lag t.
  const auto mean_acov = [&](std::size_t t) {
    double total = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      const auto& x = centered[c];
      double s = 0.0;
      for (std::size_t i = 0; i + t < n; ++i) s += x[i] * x[i + t];
      total += s / nd;
    }
    return total / static_cast<double>(m);
  };

  const double acov0 = mean_acov(0);
  const double mean_var = acov0 * nd / (nd - 1.0);
  if (!(mean_var > 0.0)) return {kNaN, DiagnosticStatus::ConstantChain};
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (m > 1) var_plus += var_of(means, mean_of(means));

  std::vector<double> rho(n, 0.0);
  rho[0] = 1.0;
  double rho_even = 1.0;
  double rho_odd = 1.0 - (mean_var - mean_acov(1)) / var_plus;
  rho[1] = rho_odd;

  std::size_t t = 1;
  while (t + 3 < n && rho_even + rho_odd > 0.0) {
    rho_even = 1.0 - (mean_var - mean_acov(t + 1)) / var_plus;
    rho_odd = 1.0 - (mean_var - mean_acov(t + 2)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[t + 1] = rho_even;
      rho[t + 2] = rho_odd;
    }
    t += 2;
  }
  // May be -1 when the very first pair is already negative.
  const long max_t = static_cast<long>(t) - 2;
  const auto at = [&](long k) -> double& { return rho[static_cast<std::size_t>(k)]; };
  if (rho_even > 0.0 && max_t + 1 < static_cast<long>(n)) at(max_t + 1) = rho_even;

  // Initial monotone sequence.
  for (long k = 1; k <= max_t - 2; k += 2) {
    if (at(k + 1) + at(k + 2) > at(k - 1) + at(k)) {
      at(k + 1) = (at(k - 1) + at(k)) / 2.0;
      at(k + 2) = at(k + 1);
    }
  }

  const double total = static_cast<double>(m) * nd;
  double tau = -1.0;
  for (long k = 0; k <= max_t; ++k) tau += 2.0 * at(k);
  if (max_t + 1 < static_cast<long>(n)) tau += at(max_t + 1);
  tau = std::max(tau, 1.0 / std::log10(total));
  return {std::min(total / tau, kEssCapFactor * total), DiagnosticStatus::Ok};
}

}  // namespace

std::vector<double> rank_normalize(std::span<const double> values) {
  const std::size_t s = values.size();
  std::vector<std::size_t> order(s);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  const boost::math::normal_distribution<double> standard;
  std::vector<double> out(s);
  const double denom = static_cast<double>(s) + 0.25;
  std::size_t i = 0;
  while (i < s) {
    std::size_t j = i;
    while (j + 1 < s && values[order[j + 1]] == values[order[i]]) ++j;
    // 1-based ranks i+1..j+1 share their average.
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    const double z = boost::math::quantile(standard, (rank - 0.375) / denom);
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = z;
    i = j + 1;
  }
  return out;
}

Diagnostic split_rhat(const DrawMatrix& draws) {
  require_draws(draws);
  return rhat_of(rank_normalize_chains(split_chains(draws)));
}

Diagnostic ess_raw(const DrawMatrix& draws) {
  require_draws(draws);
  return ess_of(split_chains(draws));
}

Diagnostic ess_bulk(const DrawMatrix& draws) {
  require_draws(draws);
  return ess_of(rank_normalize_chains(split_chains(draws)));
}

Diagnostic ess_tail(const DrawMatrix& draws) {
  require_draws(draws);
  Diagnostic best{std::numeric_limits<double>::infinity(), DiagnosticStatus::Ok};
  std::vector<double> indicator(draws.values.size());
  for (double prob : {0.05, 0.95}) {
    const double q = quantile(draws.values, prob);
    for (std::size_t i = 0; i < indicator.size(); ++i) indicator[i] = draws.values[i] <= q ? 1.0 : 0.0;
    const Diagnostic d = ess_of(split_chains({indicator, draws.chains, draws.draws}));
    if (!d.ok()) return d;
    best.value = std::min(best.value, d.value);
  }
  return best;
}

double quantile(std::span<const double> samples, double prob) {
  if (samples.empty()) throw Error(ErrorCode::TooFewDraws, "quantile of an empty sample");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double h = (static_cast<double>(s.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

Interval hdi(std::span<const double> samples, double prob) {
  if (samples.size() < 10) throw Error(ErrorCode::TooFewDraws, "hdi needs at least 10 samples");
  if (!(prob > 0.0 && prob <= 1.0)) throw Error(ErrorCode::InvalidConfig, "hdi probability must lie in (0, 1]");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  // Guard against prob * n landing a hair above an integer.
  std::size_t k = static_cast<std::size_t>(std::ceil(prob * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);
  std::size_t best = 0;
  double best_width = s[k - 1] - s[0];
  for (std::size_t i = 1; i + k <= n; ++i) {
    const double w = s[i + k - 1] - s[i];
    if (w < best_width) {
      best_width = w;
      best = i;
    }
  }
  return {s[best], s[best + k - 1]};
}

double tail_probability(std::span<const double> samples, TailDirection direction, double threshold) {
  if (samples.empty()) throw Error(ErrorCode::TooFewDraws, "tail probability of an empty sample");
  std::size_t hits = 0;
  for (double x : samples) {
    hits += (direction == TailDirection::Greater ? x > threshold : x < threshold) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

std::vector<SummaryRow> summarize(const ChainDraws& draws, double prob) {
  const std::size_t params = draws.params();
  std::vector<SummaryRow> rows(params);
  std::vector<std::exception_ptr> errors(params);
  const long long np = static_cast<long long>(params);

#pragma omp parallel for schedule(dynamic)
  for (long long pp = 0; pp < np; ++pp) {
    const auto p = static_cast<std::size_t>(pp);
    try {
      const std::vector<double> values = draws.parameter_matrix(p);
      const DrawMatrix matrix{values, draws.chains, draws.draws};
      SummaryRow& row = rows[p];
      row.parameter = draws.param_names[p];
      row.mean = mean_of(values);
      row.sd = values.size() > 1 ? std::sqrt(var_of(values, row.mean)) : 0.0;
      const Interval interval = hdi(values, prob);
      row.hdi_low = interval.low;
      row.hdi_high = interval.high;
      const Diagnostic rhat = split_rhat(matrix);
      const Diagnostic bulk = ess_bulk(matrix);
      const Diagnostic tail = ess_tail(matrix);
      row.rhat = rhat.value;
      row.ess_bulk = bulk.value;
      row.ess_tail = tail.value;
      row.constant = !rhat.ok() || !bulk.ok() || !tail.ok();
    } catch (...) {
      errors[p] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

}  // namespace hierglm
