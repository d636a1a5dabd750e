#pragma once

// No-U-Turn sampler: multinomial trajectory sampling, generalized u-turn
// criterion, dual-averaging step size and windowed diagonal metric adaptation.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hierglm/model.hpp"

namespace hierglm {

struct SamplerConfig {
  std::size_t chains = 2;
  std::size_t draws = 1000;
  std::size_t warmup = 500;
  double target_accept = 0.90;
  int max_tree_depth = 10;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Log density and gradient at z. Returns -inf (any gradient) outside the support.
using GradientFn = std::function<double(std::span<const double> z, std::span<double> grad)>;

struct PhasePoint {
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> grad;
  double log_density = 0.0;

  explicit PhasePoint(std::size_t dim = 0) : q(dim), p(dim), grad(dim) {}
};

/// Evaluates log density and gradient at state.q.
void refresh(PhasePoint& state, const GradientFn& fn);

/// One Stormer-Verlet step: half kick, drift scaled by inv_mass, half kick.
/// A negative step integrates backwards in time.
void leapfrog(PhasePoint& state, double step_size, std::span<const double> inv_mass, const GradientFn& fn);

double hamiltonian(const PhasePoint& state, std::span<const double> inv_mass);

struct DrawStats {
  bool divergent = false;
  double accept_stat = 0.0;
  int tree_depth = 0;
  int n_leapfrog = 0;
  double energy = 0.0;
  double energy_error = 0.0;  // H(selected) - H(start)
  double step_size = 0.0;
};

inline constexpr double kDivergenceThreshold = 1000.0;

/// Advances state.q by one NUTS transition. Momentum is resampled internally.
DrawStats nuts_transition(PhasePoint& state, double step_size, std::span<const double> inv_mass,
                          const GradientFn& fn, std::mt19937_64& rng, int max_tree_depth = 10);

struct Adaptation {
  double step_size = 0.0;
  /// Diagonal inverse metric, i.e. the estimated posterior variances.
  std::vector<double> inv_mass_diag;
};

struct WarmupResult {
  Adaptation adaptation;
  PhasePoint state;
};

WarmupResult warmup_adapt(const GradientFn& fn, std::span<const double> init, const SamplerConfig& config,
                          std::mt19937_64& rng);

/// Posterior draws in constrained space, laid out (chain, draw, parameter).
struct ChainDraws {
  std::size_t chains = 0;
  std::size_t draws = 0;
  std::vector<std::string> param_names;
  std::vector<double> values;
  std::vector<DrawStats> stats;  // (chain, draw)
  std::vector<Adaptation> adaptation;

  std::size_t params() const noexcept { return param_names.size(); }
  double at(std::size_t chain, std::size_t draw, std::size_t param) const {
    return values[(chain * draws + draw) * params() + param];
  }
  const DrawStats& stat(std::size_t chain, std::size_t draw) const { return stats[chain * draws + draw]; }

  /// One parameter as a chain-major (chain x draw) matrix.
  std::vector<double> parameter_matrix(std::size_t param) const;
  /// One parameter, all chains concatenated.
  std::vector<double> parameter_draws(std::size_t param) const { return parameter_matrix(param); }
  /// Full constrained vector of one draw.
  std::vector<double> draw_vector(std::size_t chain, std::size_t draw) const;

  std::size_t divergences() const;
  std::size_t divergences(std::size_t chain) const;
};

/// Maps an unconstrained point to the stored (constrained) values.
using ConstrainFn = std::function<void(std::span<const double> z, std::span<double> out)>;

/// Runs config.chains independent chains on any target. Chains may execute in
/// parallel; each chain's output depends only on (seed, chain index).
ChainDraws sample_target(const GradientFn& fn, std::size_t dim, std::vector<std::string> names,
                         const SamplerConfig& config, const ConstrainFn& constrain = {});

ChainDraws run_chains(const ModelSpec& spec, const PreparedData& data, const SamplerConfig& config);

}  // namespace hierglm
