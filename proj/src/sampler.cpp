#include "hierglm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "hierglm/rng.hpp"

namespace hierglm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinStepSize = 1e-10;

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void add_to(std::vector<double>& acc, std::span<const double> v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

std::vector<double> sum_of(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

void sample_momentum(PhasePoint& s, std::span<const double> inv_mass, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < s.p.size(); ++i) s.p[i] = standard_normal(rng) / std::sqrt(inv_mass[i]);
}

// Trajectory builder for one transition. Mirrors the recursive doubling
// scheme: subtrees are built from the current end point `z_` outward.
class TreeBuilder {
 public:
  TreeBuilder(const GradientFn& fn, std::span<const double> inv_mass, double step_size, std::mt19937_64& rng,
              double h0)
      : fn_(fn), inv_mass_(inv_mass), step_size_(step_size), rng_(rng), h0_(h0) {}

  PhasePoint z_;
  int n_leapfrog = 0;
  double sum_metro_prob = 0.0;
  bool divergent = false;

  std::vector<double> sharp(std::span<const double> p) const {
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = inv_mass_[i] * p[i];
    return out;
  }

  bool build(int depth, PhasePoint& z_propose, std::vector<double>& p_sharp_beg, std::vector<double>& p_sharp_end,
             std::vector<double>& rho, std::vector<double>& p_beg, std::vector<double>& p_end, int direction,
             double& log_sum_weight) {
    if (depth == 0) {
      leapfrog(z_, direction * step_size_, inv_mass_, fn_);
      ++n_leapfrog;
      double h = hamiltonian(z_, inv_mass_);
      if (std::isnan(h)) h = kInf;
      if (h - h0_ > kDivergenceThreshold) divergent = true;
      log_sum_weight = log_sum_exp(log_sum_weight, h0_ - h);
      sum_metro_prob += h0_ - h > 0.0 ? 1.0 : std::exp(h0_ - h);
      z_propose = z_;
      p_sharp_beg = sharp(z_.p);
      p_sharp_end = p_sharp_beg;
      add_to(rho, z_.p);
      p_beg = z_.p;
      p_end = p_beg;
      return !divergent;
    }

    const std::size_t dim = z_.q.size();
    std::vector<double> p_sharp_init_end(dim), p_init_end(dim), rho_init(dim, 0.0);
    double log_sum_weight_init = -kInf;
    if (!build(depth - 1, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg, p_init_end, direction,
               log_sum_weight_init)) {
      return false;
    }

    PhasePoint z_propose_final(dim);
    std::vector<double> p_sharp_final_beg(dim), p_final_beg(dim), rho_final(dim, 0.0);
    double log_sum_weight_final = -kInf;
    if (!build(depth - 1, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final, p_final_beg, p_end, direction,
               log_sum_weight_final)) {
      return false;
    }

    // Uniform multinomial choice between the two halves.
    const double log_sum_weight_subtree = log_sum_exp(log_sum_weight_init, log_sum_weight_final);
    log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);
    const double accept = std::exp(log_sum_weight_final - log_sum_weight_subtree);
    if (uniform01(rng_) < accept) z_propose = z_propose_final;

    const std::vector<double> rho_subtree = sum_of(rho_init, rho_final);
    add_to(rho, rho_subtree);

    bool persist = u_turn_free(p_sharp_beg, p_sharp_end, rho_subtree);
    persist = persist && u_turn_free(p_sharp_beg, p_sharp_final_beg, sum_of(rho_init, p_final_beg));
    persist = persist && u_turn_free(p_sharp_init_end, p_sharp_end, sum_of(rho_final, p_init_end));
    return persist;
  }

  static bool u_turn_free(std::span<const double> p_sharp_minus, std::span<const double> p_sharp_plus,
                          std::span<const double> rho) {
    return dot(p_sharp_plus, rho) > 0.0 && dot(p_sharp_minus, rho) > 0.0;
  }

 private:
  const GradientFn& fn_;
  std::span<const double> inv_mass_;
  double step_size_;
  std::mt19937_64& rng_;
  double h0_;
};

// Doubles or halves the step size until the one-step acceptance crosses 0.8.
double find_reasonable_step_size(PhasePoint state, double step_size, std::span<const double> inv_mass,
                                 const GradientFn& fn, std::mt19937_64& rng) {
  const PhasePoint start = state;
  const auto one_step_delta = [&](double eps) {
    state = start;
    sample_momentum(state, inv_mass, rng);
    const double h0 = hamiltonian(state, inv_mass);
    leapfrog(state, eps, inv_mass, fn);
    double h = hamiltonian(state, inv_mass);
    if (std::isnan(h)) h = kInf;
    return h0 - h;
  };
  const double threshold = std::log(0.8);
  const int direction = one_step_delta(step_size) > threshold ? 1 : -1;
  for (int iter = 0; iter < 200; ++iter) {
    const double delta = one_step_delta(step_size);
    if (direction == 1 && !(delta > threshold)) break;
    if (direction == -1 && !(delta < threshold)) break;
    step_size = direction == 1 ? 2.0 * step_size : 0.5 * step_size;
    if (step_size > 1e7) {
      throw Error(ErrorCode::AdaptationFailed, "step size diverged; posterior may be improper");
    }
    if (step_size < kMinStepSize) {
      throw Error(ErrorCode::AdaptationFailed, "step size underflowed while initializing");
    }
  }
  return step_size;
}

struct DualAveraging {
  double target;
  double mu = 0.0;
  double s_bar = 0.0;
  double x_bar = 0.0;
  double counter = 0.0;
  static constexpr double gamma = 0.05;
  static constexpr double t0 = 10.0;
  static constexpr double kappa = 0.75;

  void restart(double step_size) {
    mu = std::log(10.0 * step_size);
    s_bar = 0.0;
    x_bar = 0.0;
    counter = 0.0;
  }

  double learn(double accept_stat) {
    counter += 1.0;
    accept_stat = std::min(1.0, accept_stat);
    const double eta = 1.0 / (counter + t0);
    s_bar = (1.0 - eta) * s_bar + eta * (target - accept_stat);
    const double x = mu - s_bar * std::sqrt(counter) / gamma;
    const double x_eta = std::pow(counter, -kappa);
    x_bar = (1.0 - x_eta) * x_bar + x_eta * x;
    return std::exp(x);
  }

  double final_step_size() const { return std::exp(x_bar); }
};

struct WindowSchedule {
  std::size_t init_buffer = 75;
  std::size_t term_buffer = 50;
  std::size_t base_window = 25;
  // [start, end) of each slow window.
  std::vector<std::pair<std::size_t, std::size_t>> windows;

  explicit WindowSchedule(std::size_t warmup) {
    if (init_buffer + base_window + term_buffer > warmup) {
      init_buffer = static_cast<std::size_t>(0.15 * static_cast<double>(warmup));
      term_buffer = static_cast<std::size_t>(0.10 * static_cast<double>(warmup));
      base_window = warmup - (init_buffer + term_buffer);
    }
    const std::size_t slow_end = warmup - term_buffer;
    std::size_t start = init_buffer;
    std::size_t size = base_window;
    while (start < slow_end) {
      std::size_t end = std::min(start + size, slow_end);
      if (end + 2 * size > slow_end) end = slow_end;
      windows.emplace_back(start, end);
      start = end;
      size *= 2;
    }
  }
};

}  // namespace

void SamplerConfig::validate() const {
  if (chains < 1 || draws < 1 || warmup < 1) {
    throw Error(ErrorCode::InvalidConfig, "chains, draws and warmup must all be >= 1");
  }
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "target_accept must lie in (0, 1)");
  }
  if (max_tree_depth < 1) throw Error(ErrorCode::InvalidConfig, "max_tree_depth must be >= 1");
}

void refresh(PhasePoint& s, const GradientFn& fn) {
  s.log_density = fn(s.q, s.grad);
  if (std::isnan(s.log_density)) s.log_density = -kInf;
}

void leapfrog(PhasePoint& s, double step_size, std::span<const double> inv_mass, const GradientFn& fn) {
  const double half = 0.5 * step_size;
  const std::size_t n = s.q.size();
  for (std::size_t i = 0; i < n; ++i) s.p[i] += half * s.grad[i];
  for (std::size_t i = 0; i < n; ++i) s.q[i] += step_size * inv_mass[i] * s.p[i];
  refresh(s, fn);
  for (std::size_t i = 0; i < n; ++i) s.p[i] += half * s.grad[i];
}

double hamiltonian(const PhasePoint& s, std::span<const double> inv_mass) {
  double kinetic = 0.0;
  for (std::size_t i = 0; i < s.p.size(); ++i) kinetic += inv_mass[i] * s.p[i] * s.p[i];
  return -s.log_density + 0.5 * kinetic;
}

DrawStats nuts_transition(PhasePoint& state, double step_size, std::span<const double> inv_mass,
                          const GradientFn& fn, std::mt19937_64& rng, int max_tree_depth) {
  const std::size_t dim = state.q.size();
  sample_momentum(state, inv_mass, rng);
  const double h0 = hamiltonian(state, inv_mass);

  TreeBuilder tree(fn, inv_mass, step_size, rng, h0);
  PhasePoint z_fwd = state, z_bck = state, z_sample = state, z_propose(dim);

  std::vector<double> p_sharp_fwd_fwd = tree.sharp(state.p);
  std::vector<double> p_sharp_fwd_bck = p_sharp_fwd_fwd, p_sharp_bck_fwd = p_sharp_fwd_fwd,
                      p_sharp_bck_bck = p_sharp_fwd_fwd;
  std::vector<double> p_fwd_fwd = state.p, p_fwd_bck = state.p, p_bck_fwd = state.p, p_bck_bck = state.p;
  std::vector<double> rho = state.p;
  double log_sum_weight = 0.0;

  int depth = 0;
  while (depth < max_tree_depth) {
    std::vector<double> rho_fwd(dim, 0.0), rho_bck(dim, 0.0);
    double log_sum_weight_subtree = -kInf;
    bool valid_subtree = false;

    if (uniform01(rng) > 0.5) {
      tree.z_ = z_fwd;
      rho_bck = rho;
      p_bck_fwd = p_fwd_bck;
      p_sharp_bck_fwd = p_sharp_fwd_bck;
      valid_subtree = tree.build(depth, z_propose, p_sharp_fwd_bck, p_sharp_fwd_fwd, rho_fwd, p_fwd_bck, p_fwd_fwd,
                                 1, log_sum_weight_subtree);
      z_fwd = tree.z_;
    } else {
      tree.z_ = z_bck;
      rho_fwd = rho;
      p_fwd_bck = p_bck_fwd;
      p_sharp_fwd_bck = p_sharp_bck_fwd;
      valid_subtree = tree.build(depth, z_propose, p_sharp_bck_fwd, p_sharp_bck_bck, rho_bck, p_bck_fwd, p_bck_bck,
                                 -1, log_sum_weight_subtree);
      z_bck = tree.z_;
    }
    if (!valid_subtree) break;
    ++depth;

    // Biased progressive sampling favours the new subtree.
    if (log_sum_weight_subtree > log_sum_weight) {
      z_sample = z_propose;
    } else if (uniform01(rng) < std::exp(log_sum_weight_subtree - log_sum_weight)) {
      z_sample = z_propose;
    }
    log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);

    rho = sum_of(rho_bck, rho_fwd);
    bool persist = TreeBuilder::u_turn_free(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
    persist = persist && TreeBuilder::u_turn_free(p_sharp_bck_bck, p_sharp_fwd_bck, sum_of(rho_bck, p_fwd_bck));
    persist = persist && TreeBuilder::u_turn_free(p_sharp_bck_fwd, p_sharp_fwd_fwd, sum_of(rho_fwd, p_bck_fwd));
    if (!persist) break;
  }

  DrawStats stats;
  stats.divergent = tree.divergent;
  stats.n_leapfrog = tree.n_leapfrog;
  stats.accept_stat = tree.n_leapfrog > 0 ? tree.sum_metro_prob / tree.n_leapfrog : 0.0;
  stats.tree_depth = depth;
  stats.step_size = step_size;
  state = std::move(z_sample);
  stats.energy = hamiltonian(state, inv_mass);
  stats.energy_error = stats.energy - h0;
  return stats;
}

WarmupResult warmup_adapt(const GradientFn& fn, std::span<const double> init, const SamplerConfig& config,
                          std::mt19937_64& rng) {
  if (config.warmup < 20) {
    throw Error(ErrorCode::InvalidConfig, "warmup must be at least 20 iterations for adaptation");
  }
  const std::size_t dim = init.size();
  WarmupResult out;
  out.state = PhasePoint(dim);
  std::copy(init.begin(), init.end(), out.state.q.begin());
  refresh(out.state, fn);
  if (!std::isfinite(out.state.log_density)) {
    throw Error(ErrorCode::AdaptationFailed, "initial point has non-finite log density");
  }

  std::vector<double> inv_mass(dim, 1.0);
  double step_size = find_reasonable_step_size(out.state, 1.0, inv_mass, fn, rng);
  DualAveraging da{config.target_accept};
  da.restart(step_size);

  const WindowSchedule schedule(config.warmup);
  std::size_t window = 0;
  // Welford accumulators for the current slow window.
  std::vector<double> mean(dim, 0.0), m2(dim, 0.0);
  double count = 0.0;

  for (std::size_t it = 0; it < config.warmup; ++it) {
    const DrawStats s = nuts_transition(out.state, step_size, inv_mass, fn, rng, config.max_tree_depth);
    step_size = da.learn(s.accept_stat);
    if (!(step_size >= kMinStepSize)) {
      throw Error(ErrorCode::AdaptationFailed, "step size underflowed below 1e-10 during warmup");
    }

    if (window < schedule.windows.size() && it >= schedule.windows[window].first &&
        it < schedule.windows[window].second) {
      count += 1.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double delta = out.state.q[i] - mean[i];
        mean[i] += delta / count;
        m2[i] += delta * (out.state.q[i] - mean[i]);
      }
      if (it + 1 == schedule.windows[window].second) {
        for (std::size_t i = 0; i < dim; ++i) {
          const double var = count > 1.0 ? m2[i] / (count - 1.0) : 1.0;
          // Shrink toward a small multiple of the identity.
          inv_mass[i] = (count / (count + 5.0)) * var + 1e-3 * (5.0 / (count + 5.0));
        }
        std::fill(mean.begin(), mean.end(), 0.0);
        std::fill(m2.begin(), m2.end(), 0.0);
        count = 0.0;
        ++window;
        step_size = find_reasonable_step_size(out.state, step_size, inv_mass, fn, rng);
        da.restart(step_size);
      }
    }
  }

  out.adaptation.step_size = da.final_step_size();
  if (!(out.adaptation.step_size >= kMinStepSize)) {
    throw Error(ErrorCode::AdaptationFailed, "adapted step size underflowed below 1e-10");
  }
  out.adaptation.inv_mass_diag = std::move(inv_mass);
  return out;
}

std::vector<double> ChainDraws::parameter_matrix(std::size_t param) const {
  std::vector<double> out(chains * draws);
  for (std::size_t c = 0; c < chains; ++c) {
    for (std::size_t d = 0; d < draws; ++d) out[c * draws + d] = at(c, d, param);
  }
  return out;
}

std::vector<double> ChainDraws::draw_vector(std::size_t chain, std::size_t draw) const {
  const auto* first = &values[(chain * draws + draw) * params()];
  return std::vector<double>(first, first + params());
}

std::size_t ChainDraws::divergences() const {
  return static_cast<std::size_t>(std::count_if(stats.begin(), stats.end(), [](const auto& s) { return s.divergent; }));
}

std::size_t ChainDraws::divergences(std::size_t chain) const {
  std::size_t n = 0;
  for (std::size_t d = 0; d < draws; ++d) n += stat(chain, d).divergent ? 1 : 0;
  return n;
}

ChainDraws sample_target(const GradientFn& fn, std::size_t dim, std::vector<std::string> names,
                         const SamplerConfig& config, const ConstrainFn& constrain) {
  config.validate();
  if (config.warmup < 20) {
    throw Error(ErrorCode::InvalidConfig, "warmup must be at least 20 iterations for adaptation");
  }
  ChainDraws out;
  out.chains = config.chains;
  out.draws = config.draws;
  out.param_names = std::move(names);
  const std::size_t stored = out.params();
  out.values.assign(config.chains * config.draws * stored, 0.0);
  out.stats.assign(config.chains * config.draws, DrawStats{});
  out.adaptation.assign(config.chains, Adaptation{});

  std::vector<std::exception_ptr> errors(config.chains);
  const long long nchains = static_cast<long long>(config.chains);

#pragma omp parallel for schedule(static, 1)
  for (long long cc = 0; cc < nchains; ++cc) {
    const auto c = static_cast<std::size_t>(cc);
    try {
      auto rng = stream_rng(config.seed, c);

      std::vector<double> init(dim), grad(dim);
      bool ok = false;
      for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        for (auto& v : init) v = 0.1 * standard_normal(rng);
        ok = std::isfinite(fn(init, grad));
      }
      if (!ok) throw Error(ErrorCode::AdaptationFailed, "no finite initial point after 100 attempts");

      WarmupResult warm = warmup_adapt(fn, init, config, rng);
      out.adaptation[c] = warm.adaptation;
      PhasePoint state = std::move(warm.state);

      for (std::size_t d = 0; d < config.draws; ++d) {
        out.stats[c * config.draws + d] = nuts_transition(state, warm.adaptation.step_size,
                                                          warm.adaptation.inv_mass_diag, fn, rng,
                                                          config.max_tree_depth);
        std::span<double> slot(&out.values[(c * config.draws + d) * stored], stored);
        if (constrain) {
          constrain(state.q, slot);
        } else {
          std::copy(state.q.begin(), state.q.end(), slot.begin());
        }
      }
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }

  for (std::size_t c = 0; c < config.chains; ++c) {
    if (!errors[c]) continue;
    try {
      std::rethrow_exception(errors[c]);
    } catch (const Error& e) {
      throw Error(e.code(), "chain " + std::to_string(c) + ": " + e.message());
    }
  }
  return out;
}

ChainDraws run_chains(const ModelSpec& spec, const PreparedData& data, const SamplerConfig& config) {
  spec.validate();
  const GradientFn fn = [&spec, &data](std::span<const double> z, std::span<double> grad) {
    return log_posterior_and_grad(spec, z, data, grad);
  };
  const ConstrainFn constrain = [kind = spec.kind](std::span<const double> z, std::span<double> out) {
    const ParameterVector theta = from_unconstrained(kind, z);
    std::copy(theta.values().begin(), theta.values().end(), out.begin());
  };
  return sample_target(fn, spec.dim(), spec.parameter_names(), config, constrain);
}

}  // namespace hierglm
