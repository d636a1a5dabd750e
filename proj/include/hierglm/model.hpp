#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hierglm/error.hpp"

namespace hierglm {

/// One booking row as ingested. hotel: 0 = Resort, 1 = City.
struct BookingRecord {
  int is_canceled = 0;
  double lead_time = 0.0;
  int special_requests = 0;
  int parking = 0;
  int hotel = 0;

  friend bool operator==(const BookingRecord&, const BookingRecord&) = default;
};

/// Empty when the record satisfies its invariants, else a description of the first violation.
std::string validate_record(const BookingRecord& r);

struct Standardization {
  double mean = 0.0;
  double sd = 1.0;
};

/// Column-major design data. Integer columns are held as doubles (exact for
/// the small values they take) so the likelihood kernels read one type.
struct PreparedData {
  std::vector<double> x1;  // standardized lead time
  std::vector<double> x2;  // special requests, raw count
  std::vector<double> x3;  // parking indicator
  std::vector<double> h;   // hotel indicator
  std::vector<double> y;   // outcome
  Standardization standardization;

  std::size_t size() const noexcept { return y.size(); }
};

/// Standardizes lead time with the sample mean and SD (n-1 denominator).
PreparedData prepare(std::span<const BookingRecord> records);

/// Applies stored standardization constants instead of refitting them.
PreparedData prepare_with(std::span<const BookingRecord> records, Standardization constants);

enum class ModelKind { Simple, Hierarchical, Interaction };

std::string_view model_name(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

enum class PriorFamily {
  Normal,
  HalfNormal,
  // Normal(mu_alpha, sigma_alpha); location/scale fields are unused.
  GroupNormal,
};

struct Prior {
  std::string parameter;
  PriorFamily family = PriorFamily::Normal;
  double location = 0.0;
  double scale = 1.0;
};

struct ModelSpec {
  ModelKind kind = ModelKind::Simple;
  std::vector<Prior> priors;  // one per parameter, in ParameterVector order
  int group_count = 0;        // 2 for Hierarchical

  static ModelSpec simple();
  static ModelSpec hierarchical();
  static ModelSpec interaction();
  static ModelSpec for_kind(ModelKind kind);

  std::size_t dim() const noexcept { return priors.size(); }
  std::vector<std::string> parameter_names() const;

  /// Throws InvalidConfig on a malformed prior list.
  void validate() const;
};

/// Constrained parameter values, ordered as ModelSpec::parameter_names():
///   Simple       (beta0, beta1, beta2, beta3)
///   Hierarchical (mu_alpha, sigma_alpha, alpha_0, alpha_1, beta1, beta2, beta3)
///   Interaction  (beta0, ..., beta6)
class ParameterVector {
 public:
  ParameterVector() = default;
  ParameterVector(ModelKind kind, std::vector<double> values);

  ModelKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  ModelKind kind_ = ModelKind::Simple;
  std::vector<double> values_;
};

std::size_t parameter_count(ModelKind kind) noexcept;

// Hierarchical index layout.
inline constexpr std::size_t kMuAlpha = 0;
inline constexpr std::size_t kSigmaAlpha = 1;
inline constexpr std::size_t kAlpha0 = 2;

double inv_logit(double eta) noexcept;

/// log(1 + e^x) without overflow.
double softplus(double x) noexcept;

double linear_predictor(const ModelSpec& spec, const ParameterVector& theta, const PreparedData& data,
                        std::size_t row);

double log_prior(const ModelSpec& spec, const ParameterVector& theta);

std::vector<double> log_likelihood_pointwise(const ModelSpec& spec, const ParameterVector& theta,
                                             const PreparedData& data);

/// Unconstrained coordinates: sigma_alpha -> log sigma_alpha and, for the
/// Hierarchical model, alpha_j -> (alpha_j - mu_alpha) / sigma_alpha (non-centered).
std::vector<double> to_unconstrained(const ParameterVector& theta);
ParameterVector from_unconstrained(ModelKind kind, std::span<const double> z);

struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Log posterior density of the unconstrained coordinates (prior, likelihood
/// and transform Jacobian) with its exact gradient. Out-of-support or
/// non-finite evaluations return value = -inf; callers treat that as a divergence.
ValueAndGradient log_posterior_and_grad(const ModelSpec& spec, std::span<const double> z,
                                        const PreparedData& data);

/// Allocation-free variant used by the sampler; grad must have spec.dim() entries.
double log_posterior_and_grad(const ModelSpec& spec, std::span<const double> z, const PreparedData& data,
                              std::span<double> grad);

/// log|det d theta / d z| of from_unconstrained.
double log_jacobian(ModelKind kind, std::span<const double> z);

struct CovariateProfile {
  double lead_time_center_days = 365.0;
  double lead_time_scale_days = 80.0;
  // special_requests ~ geometric(success) truncated to {0..5}
  double special_requests_success = 0.625;
  double parking_rate = 0.06;
  double city_rate = 0.665;

  void validate() const;
};

/// Draws covariates from the profile, outcomes from the model, returns raw
/// records. Lead time is generated on the standardized scale, re-standardized
/// within the sample and mapped to days, so prepare() recovers the exact x1
/// used for the outcome draw (up to rounding).
std::vector<BookingRecord> simulate_dataset(const ModelSpec& spec, const ParameterVector& truth, std::size_t n,
                                            const CovariateProfile& profile, std::uint64_t seed);

/// Default simulation truth for the Simple model: (-0.150, 0.600, -0.642, -3.879).
ParameterVector reference_truth();

}  // namespace hierglm
