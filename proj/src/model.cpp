#include "hierglm/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "hierglm/kernels.hpp"
#include "hierglm/rng.hpp"

namespace hierglm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogSqrtTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

double normal_lpdf(double x, double mu, double sigma) {
  const double u = (x - mu) / sigma;
  return -0.5 * u * u - std::log(sigma) - kLogSqrtTwoPi;
}

void check_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": expected " + std::to_string(expected) + ", got " + std::to_string(got));
  }
}

}  // namespace

std::string validate_record(const BookingRecord& r) {
  if (r.is_canceled != 0 && r.is_canceled != 1) return "is_canceled must be 0 or 1";
  if (r.parking != 0 && r.parking != 1) return "parking must be 0 or 1";
  if (r.hotel != 0 && r.hotel != 1) return "hotel must be 0 or 1";
  if (r.special_requests < 0 || r.special_requests > 5) return "special_requests must lie in [0, 5]";
  if (!(r.lead_time >= 0.0) || !std::isfinite(r.lead_time)) return "lead_time must be finite and non-negative";
  return {};
}

PreparedData prepare_with(std::span<const BookingRecord> records, Standardization constants) {
  if (records.empty()) throw Error(ErrorCode::EmptyData, "no records to prepare");
  if (!(constants.sd > 0.0)) throw Error(ErrorCode::ZeroVariance, "lead_time standard deviation is zero");
  PreparedData d;
  d.standardization = constants;
  const std::size_t n = records.size();
  d.x1.resize(n);
  d.x2.resize(n);
  d.x3.resize(n);
  d.h.resize(n);
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = records[i];
    d.x1[i] = (r.lead_time - constants.mean) / constants.sd;
    d.x2[i] = r.special_requests;
    d.x3[i] = r.parking;
    d.h[i] = r.hotel;
    d.y[i] = r.is_canceled;
  }
  return d;
}

PreparedData prepare(std::span<const BookingRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyData, "no records to prepare");
  if (records.size() < 2) throw Error(ErrorCode::ZeroVariance, "need at least two rows to standardize lead_time");
  const double n = static_cast<double>(records.size());
  double mean = 0.0;
  for (const auto& r : records) mean += r.lead_time;
  mean /= n;
  double ss = 0.0;
  for (const auto& r : records) ss += (r.lead_time - mean) * (r.lead_time - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw Error(ErrorCode::ZeroVariance, "all lead_time values are identical");
  return prepare_with(records, {mean, sd});
}

std::string_view model_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Simple: return "simple";
    case ModelKind::Hierarchical: return "hierarchical";
    case ModelKind::Interaction: return "interaction";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "simple") return ModelKind::Simple;
  if (name == "hierarchical") return ModelKind::Hierarchical;
  if (name == "interaction") return ModelKind::Interaction;
  throw Error(ErrorCode::InvalidConfig, "unknown model '" + std::string(name) + "'");
}

ModelSpec ModelSpec::simple() {
  return {ModelKind::Simple,
          {{"beta0", PriorFamily::Normal, 0.0, 2.5},
           {"beta1", PriorFamily::Normal, 0.0, 1.0},
           {"beta2", PriorFamily::Normal, -0.5, 1.0},
           {"beta3", PriorFamily::Normal, -0.5, 1.0}},
          0};
}

ModelSpec ModelSpec::hierarchical() {
  return {ModelKind::Hierarchical,
          {{"mu_alpha", PriorFamily::Normal, 0.0, 2.5},
           {"sigma_alpha", PriorFamily::HalfNormal, 0.0, 1.0},
           {"alpha_0", PriorFamily::GroupNormal, 0.0, 0.0},
           {"alpha_1", PriorFamily::GroupNormal, 0.0, 0.0},
           {"beta1", PriorFamily::Normal, 0.0, 1.0},
           {"beta2", PriorFamily::Normal, -0.5, 1.0},
           {"beta3", PriorFamily::Normal, -0.5, 1.0}},
          2};
}

ModelSpec ModelSpec::interaction() {
  return {ModelKind::Interaction,
          {{"beta0", PriorFamily::Normal, -0.15, 1.0},
           {"beta1", PriorFamily::Normal, 0.6, 0.5},
           {"beta2", PriorFamily::Normal, -0.6, 0.5},
           {"beta3", PriorFamily::Normal, -3.5, 1.0},
           {"beta4", PriorFamily::Normal, 0.7, 0.5},
           {"beta5", PriorFamily::Normal, 0.0, 0.5},
           {"beta6", PriorFamily::Normal, 0.0, 0.5}},
          0};
}

ModelSpec ModelSpec::for_kind(ModelKind kind) {
  switch (kind) {
    case ModelKind::Simple: return simple();
    case ModelKind::Hierarchical: return hierarchical();
    case ModelKind::Interaction: return interaction();
  }
  return simple();
}

std::vector<std::string> ModelSpec::parameter_names() const {
  std::vector<std::string> names;
  names.reserve(priors.size());
  for (const auto& p : priors) names.push_back(p.parameter);
  return names;
}

void ModelSpec::validate() const {
  check_dim(parameter_count(kind), priors.size(), "prior count");
  for (std::size_t i = 0; i < priors.size(); ++i) {
    const auto& p = priors[i];
    const bool group_slot = kind == ModelKind::Hierarchical && i >= kAlpha0 && i < kAlpha0 + 2;
    const bool sigma_slot = kind == ModelKind::Hierarchical && i == kSigmaAlpha;
    const PriorFamily expected =
        group_slot ? PriorFamily::GroupNormal : (sigma_slot ? PriorFamily::HalfNormal : PriorFamily::Normal);
    if (p.family != expected) {
      throw Error(ErrorCode::InvalidConfig, "unsupported prior family for parameter " + p.parameter);
    }
    if (p.family != PriorFamily::GroupNormal && !(p.scale > 0.0 && std::isfinite(p.scale))) {
      throw Error(ErrorCode::InvalidConfig, "prior scale must be positive for parameter " + p.parameter);
    }
  }
  if (kind == ModelKind::Hierarchical && group_count != 2) {
    throw Error(ErrorCode::InvalidConfig, "hierarchical model needs exactly two hotel groups");
  }
}

std::size_t parameter_count(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Simple: return 4;
    case ModelKind::Hierarchical: return 7;
    case ModelKind::Interaction: return 7;
  }
  return 0;
}

ParameterVector::ParameterVector(ModelKind kind, std::vector<double> values)
    : kind_(kind), values_(std::move(values)) {
  check_dim(parameter_count(kind), values_.size(), "parameter vector");
}

double inv_logit(double eta) noexcept {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double softplus(double x) noexcept {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double linear_predictor(const ModelSpec& spec, const ParameterVector& theta, const PreparedData& data,
                        std::size_t row) {
  check_dim(spec.dim(), theta.size(), "parameter vector");
  const double x1 = data.x1[row], x2 = data.x2[row], x3 = data.x3[row], h = data.h[row];
  switch (spec.kind) {
    case ModelKind::Simple:
      return theta[0] + theta[1] * x1 + theta[2] * x2 + theta[3] * x3;
    case ModelKind::Hierarchical: {
      const double alpha = h != 0.0 ? theta[kAlpha0 + 1] : theta[kAlpha0];
      return alpha + theta[4] * x1 + theta[5] * x2 + theta[6] * x3;
    }
    case ModelKind::Interaction:
      return theta[0] + theta[1] * x1 + theta[2] * x2 + theta[3] * x3 + theta[4] * h + theta[5] * (x1 * h) +
             theta[6] * (x2 * h);
  }
  return 0.0;
}

double log_prior(const ModelSpec& spec, const ParameterVector& theta) {
  check_dim(spec.dim(), theta.size(), "parameter vector");
  double lp = 0.0;
  for (std::size_t i = 0; i < spec.priors.size(); ++i) {
    const auto& p = spec.priors[i];
    switch (p.family) {
      case PriorFamily::Normal:
        lp += normal_lpdf(theta[i], p.location, p.scale);
        break;
      case PriorFamily::HalfNormal:
        if (!(theta[i] > 0.0)) return kNegInf;
        lp += std::numbers::ln2 + normal_lpdf(theta[i], 0.0, p.scale);
        break;
      case PriorFamily::GroupNormal: {
        const double sigma = theta[kSigmaAlpha];
        if (!(sigma > 0.0)) return kNegInf;
        lp += normal_lpdf(theta[i], theta[kMuAlpha], sigma);
        break;
      }
    }
  }
  return lp;
}

std::vector<double> log_likelihood_pointwise(const ModelSpec& spec, const ParameterVector& theta,
                                             const PreparedData& data) {
  check_dim(spec.dim(), theta.size(), "parameter vector");
  std::vector<double> coef(kernels::coefficient_count(spec.kind));
  kernels::coefficients(theta, coef);
  std::vector<double> out(data.size());
  kernels::log_lik_pointwise(spec.kind, coef, data, out);
  return out;
}

std::vector<double> to_unconstrained(const ParameterVector& theta) {
  std::vector<double> z(theta.values().begin(), theta.values().end());
  if (theta.kind() == ModelKind::Hierarchical) {
    const double sigma = theta[kSigmaAlpha];
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw Error(ErrorCode::OutOfSupport, "sigma_alpha must be positive");
    }
    z[kSigmaAlpha] = std::log(sigma);
    for (std::size_t j = 0; j < 2; ++j) z[kAlpha0 + j] = (theta[kAlpha0 + j] - theta[kMuAlpha]) / sigma;
  }
  return z;
}

ParameterVector from_unconstrained(ModelKind kind, std::span<const double> z) {
  check_dim(parameter_count(kind), z.size(), "unconstrained vector");
  std::vector<double> v(z.begin(), z.end());
  if (kind == ModelKind::Hierarchical) {
    const double sigma = std::exp(z[kSigmaAlpha]);
    v[kSigmaAlpha] = sigma;
    for (std::size_t j = 0; j < 2; ++j) v[kAlpha0 + j] = z[kMuAlpha] + sigma * z[kAlpha0 + j];
  }
  return ParameterVector(kind, std::move(v));
}

double log_jacobian(ModelKind kind, std::span<const double> z) {
  if (kind != ModelKind::Hierarchical) return 0.0;
  // d sigma / d z_sigma = sigma, d alpha_j / d raw_j = sigma for both groups.
  return 3.0 * z[kSigmaAlpha];
}

double log_posterior_and_grad(const ModelSpec& spec, std::span<const double> z, const PreparedData& data,
                              std::span<double> grad) {
  check_dim(spec.dim(), z.size(), "unconstrained vector");
  check_dim(spec.dim(), grad.size(), "gradient buffer");

  const auto fail = [&] {
    std::fill(grad.begin(), grad.end(), 0.0);
    return kNegInf;
  };
  for (double v : z) {
    if (!std::isfinite(v)) return fail();
  }

  std::array<double, 7> coef{};
  std::array<double, 7> gcoef{};
  const std::size_t k = kernels::coefficient_count(spec.kind);
  double value = 0.0;

  if (spec.kind == ModelKind::Hierarchical) {
    const double mu = z[kMuAlpha];
    const double log_sigma = z[kSigmaAlpha];
    const double sigma = std::exp(log_sigma);
    const double r0 = z[kAlpha0], r1 = z[kAlpha0 + 1];
    coef[0] = mu + sigma * r0;
    coef[1] = mu + sigma * r1;
    for (std::size_t b = 0; b < 3; ++b) coef[2 + b] = z[4 + b];

    const double ll = data.size() ? kernels::log_lik_and_grad(spec.kind, std::span(coef.data(), k), data,
                                                             std::span(gcoef.data(), k))
                                  : 0.0;

    const auto& pm = spec.priors[kMuAlpha];
    const auto& ps = spec.priors[kSigmaAlpha];
    value = ll + normal_lpdf(mu, pm.location, pm.scale) + std::numbers::ln2 + normal_lpdf(sigma, 0.0, ps.scale) +
            log_sigma + normal_lpdf(r0, 0.0, 1.0) + normal_lpdf(r1, 0.0, 1.0);
    grad[kMuAlpha] = -(mu - pm.location) / (pm.scale * pm.scale) + gcoef[0] + gcoef[1];
    grad[kSigmaAlpha] = -(sigma * sigma) / (ps.scale * ps.scale) + 1.0 + sigma * (gcoef[0] * r0 + gcoef[1] * r1);
    grad[kAlpha0] = -r0 + sigma * gcoef[0];
    grad[kAlpha0 + 1] = -r1 + sigma * gcoef[1];
    for (std::size_t b = 0; b < 3; ++b) {
      const auto& p = spec.priors[4 + b];
      const double x = z[4 + b];
      value += normal_lpdf(x, p.location, p.scale);
      grad[4 + b] = gcoef[2 + b] - (x - p.location) / (p.scale * p.scale);
    }
  } else {
    std::copy(z.begin(), z.end(), coef.begin());
    const double ll = data.size() ? kernels::log_lik_and_grad(spec.kind, std::span(coef.data(), k), data,
                                                             std::span(gcoef.data(), k))
                                  : 0.0;
    value = ll;
    for (std::size_t i = 0; i < k; ++i) {
      const auto& p = spec.priors[i];
      value += normal_lpdf(z[i], p.location, p.scale);
      grad[i] = gcoef[i] - (z[i] - p.location) / (p.scale * p.scale);
    }
  }

  if (!std::isfinite(value)) return fail();
  for (double g : grad) {
    if (!std::isfinite(g)) return fail();
  }
  return value;
}

ValueAndGradient log_posterior_and_grad(const ModelSpec& spec, std::span<const double> z,
                                        const PreparedData& data) {
  ValueAndGradient out;
  out.gradient.resize(spec.dim());
  out.value = log_posterior_and_grad(spec, z, data, out.gradient);
  return out;
}

void CovariateProfile::validate() const {
  const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(parking_rate) || !prob(city_rate) || !(special_requests_success > 0.0 && special_requests_success <= 1.0)) {
    throw Error(ErrorCode::InvalidProfile, "covariate probabilities must lie in [0, 1]");
  }
  if (!(lead_time_scale_days > 0.0) || !(lead_time_center_days >= 0.0)) {
    throw Error(ErrorCode::InvalidProfile, "lead time center must be >= 0 and scale > 0");
  }
}

std::vector<BookingRecord> simulate_dataset(const ModelSpec& spec, const ParameterVector& truth, std::size_t n,
                                            const CovariateProfile& profile, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::EmptyData, "simulate_dataset needs n >= 1");
  profile.validate();
  check_dim(spec.dim(), truth.size(), "truth vector");
  if (spec.kind == ModelKind::Hierarchical && !(truth[kSigmaAlpha] > 0.0)) {
    throw Error(ErrorCode::OutOfSupport, "sigma_alpha must be positive");
  }
  auto rng = stream_rng(seed, 0);

  std::vector<double> x1(n);
  for (auto& v : x1) v = standard_normal(rng);
  if (n >= 2) {
    double mean = 0.0;
    for (double v : x1) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x1) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    for (auto& v : x1) v = (v - mean) / sd;
  }

  // Truncated geometric on {0..5} by inverse CDF.
  std::array<double, 6> cdf{};
  {
    const double s = profile.special_requests_success;
    double acc = 0.0, w = s;
    for (std::size_t k = 0; k < cdf.size(); ++k) {
      acc += w;
      cdf[k] = acc;
      w *= 1.0 - s;
    }
    for (auto& c : cdf) c /= acc;
  }

  PreparedData row;
  row.x1.resize(1);
  row.x2.resize(1);
  row.x3.resize(1);
  row.h.resize(1);
  row.y.resize(1);

  std::vector<BookingRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    BookingRecord& r = out[i];
    r.lead_time = std::max(0.0, profile.lead_time_center_days + profile.lead_time_scale_days * x1[i]);
    const double u = uniform01(rng);
    r.special_requests = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end() - 1, u) - cdf.begin());
    r.parking = uniform01(rng) < profile.parking_rate ? 1 : 0;
    r.hotel = uniform01(rng) < profile.city_rate ? 1 : 0;

    row.x1[0] = (r.lead_time - profile.lead_time_center_days) / profile.lead_time_scale_days;
    row.x2[0] = r.special_requests;
    row.x3[0] = r.parking;
    row.h[0] = r.hotel;
    const double p = inv_logit(linear_predictor(spec, truth, row, 0));
    r.is_canceled = uniform01(rng) < p ? 1 : 0;
  }
  return out;
}

ParameterVector reference_truth() {
  return ParameterVector(ModelKind::Simple, {-0.150, 0.600, -0.642, -3.879});
}

}  // namespace hierglm
