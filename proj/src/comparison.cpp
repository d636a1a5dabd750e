#include "hierglm/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hierglm/kernels.hpp"

namespace hierglm {

namespace {

double se_of(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(n * (ss / n));
}

WaicResult aggregate(std::vector<WaicTerm> terms, std::string model) {
  WaicResult r;
  r.model = std::move(model);
  r.pointwise.resize(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    r.pointwise[i] = terms[i].lppd - terms[i].p;
    r.lppd += terms[i].lppd;
    r.p_waic += terms[i].p;
    r.elpd_waic += r.pointwise[i];
  }
  r.se = se_of(r.pointwise);
  return r;
}

std::vector<std::vector<double>> coefficient_table(ModelKind kind, const ChainDraws& draws) {
  const std::size_t k = kernels::coefficient_count(kind);
  std::vector<std::vector<double>> coef;
  coef.reserve(draws.chains * draws.draws);
  for (std::size_t c = 0; c < draws.chains; ++c) {
    for (std::size_t d = 0; d < draws.draws; ++d) {
      const ParameterVector theta(kind, draws.draw_vector(c, d));
      std::vector<double> row(k);
      kernels::coefficients(theta, row);
      coef.push_back(std::move(row));
    }
  }
  return coef;
}

void check_draws(const ModelSpec& spec, const ChainDraws& draws) {
  if (draws.params() != spec.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "draws do not match the model's parameter count");
  }
  if (draws.chains * draws.draws < 2) throw Error(ErrorCode::TooFewDraws, "WAIC needs at least two draws");
}

}  // namespace

WaicTerm waic_term(std::span<const double> column) {
  const std::size_t s = column.size();
  const double max = *std::max_element(column.begin(), column.end());
  double sum_exp = 0.0;
  for (double v : column) sum_exp += std::exp(v - max);
  WaicTerm t;
  t.lppd = max + std::log(sum_exp / static_cast<double>(s));
  // Variance about the first draw, so identical draws give exactly zero.
  const double x0 = column[0];
  double sd = 0.0, sd2 = 0.0;
  for (double v : column) {
    const double d = v - x0;
    sd += d;
    sd2 += d * d;
  }
  t.p = std::max(0.0, (sd2 - sd * sd / static_cast<double>(s)) / static_cast<double>(s - 1));
  return t;
}

WaicResult waic(const LogLikMatrix& log_lik, std::string model) {
  if (log_lik.draws < 2) throw Error(ErrorCode::TooFewDraws, "WAIC needs at least two draws");
  if (log_lik.observations < 1) throw Error(ErrorCode::EmptyData, "WAIC needs at least one observation");
  if (log_lik.values.size() != log_lik.draws * log_lik.observations) {
    throw Error(ErrorCode::DimensionMismatch, "log-likelihood matrix size");
  }
  for (double v : log_lik.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "log-likelihood matrix has non-finite entries");
  }
  std::vector<WaicTerm> terms(log_lik.observations);
  std::vector<double> column(log_lik.draws);
  for (std::size_t i = 0; i < log_lik.observations; ++i) {
    for (std::size_t s = 0; s < log_lik.draws; ++s) column[s] = log_lik(s, i);
    terms[i] = waic_term(column);
  }
  return aggregate(std::move(terms), std::move(model));
}

LogLikMatrix pointwise_log_lik(const ModelSpec& spec, const ChainDraws& draws, const PreparedData& data) {
  check_draws(spec, draws);
  const auto coef = coefficient_table(spec.kind, draws);
  LogLikMatrix m;
  m.draws = coef.size();
  m.observations = data.size();
  m.values.resize(m.draws * m.observations);
  for (std::size_t s = 0; s < m.draws; ++s) {
    kernels::log_lik_pointwise(spec.kind, coef[s], data,
                               std::span<double>(&m.values[s * m.observations], m.observations));
  }
  return m;
}

WaicResult waic_from_draws(const ModelSpec& spec, const ChainDraws& draws, const PreparedData& data) {
  check_draws(spec, draws);
  if (data.size() < 1) throw Error(ErrorCode::EmptyData, "WAIC needs at least one observation");
  const auto coef = coefficient_table(spec.kind, draws);
  const std::size_t n = data.size();
  std::vector<WaicTerm> terms(n);
  bool finite = true;
  const long long nn = static_cast<long long>(n);

#pragma omp parallel reduction(&& : finite)
  {
    std::vector<double> column(coef.size());
#pragma omp for schedule(static)
    for (long long ii = 0; ii < nn; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      for (std::size_t s = 0; s < coef.size(); ++s) {
        column[s] = kernels::log_lik_row(spec.kind, coef[s], data, i);
        finite = finite && std::isfinite(column[s]);
      }
      terms[i] = waic_term(column);
    }
  }
  if (!finite) throw Error(ErrorCode::NonFinite, "log-likelihood has non-finite entries");
  return aggregate(std::move(terms), std::string(model_name(spec.kind)));
}

std::vector<ComparisonRow> compare(std::span<const WaicResult> results) {
  if (results.size() < 2) throw Error(ErrorCode::TooFewDraws, "comparison needs at least two models");
  const std::size_t n = results[0].pointwise.size();
  for (const auto& r : results) {
    if (r.pointwise.size() != n) throw Error(ErrorCode::MismatchedData, "models were scored on different data");
  }
  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (results[a].elpd_waic != results[b].elpd_waic) return results[a].elpd_waic > results[b].elpd_waic;
    return results[a].model < results[b].model;
  });

  const WaicResult& best = results[order[0]];
  std::vector<ComparisonRow> rows;
  std::vector<double> diff(n);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const WaicResult& w = results[order[r]];
    for (std::size_t i = 0; i < n; ++i) diff[i] = best.pointwise[i] - w.pointwise[i];
    rows.push_back({w.model, r + 1, w.elpd_waic, w.p_waic, w.se, best.elpd_waic - w.elpd_waic,
                    r == 0 ? 0.0 : se_of(diff)});
  }
  return rows;
}

}  // namespace hierglm
