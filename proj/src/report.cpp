#include "hierglm/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "hierglm/csv.hpp"
#include "hierglm/svg.hpp"

namespace hierglm {

using Json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// nlohmann writes non-finite numbers as null; read them back as NaN.
double real(const Json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json sampler_json(const SamplerConfig& c) {
  return Json{{"chains", c.chains},
              {"draws", c.draws},
              {"warmup", c.warmup},
              {"target_accept", c.target_accept},
              {"max_tree_depth", c.max_tree_depth},
              {"seed", c.seed}};
}

SamplerConfig sampler_from(const Json& j) {
  SamplerConfig c;
  c.chains = j.at("chains").get<std::size_t>();
  c.draws = j.at("draws").get<std::size_t>();
  c.warmup = j.at("warmup").get<std::size_t>();
  c.target_accept = j.at("target_accept").get<double>();
  c.max_tree_depth = j.at("max_tree_depth").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

Json summary_row_json(const SummaryRow& r) {
  return Json{{"parameter", r.parameter}, {"mean", r.mean},         {"sd", r.sd},
              {"hdi_low", r.hdi_low},     {"hdi_high", r.hdi_high}, {"rhat", r.rhat},
              {"ess_bulk", r.ess_bulk},   {"ess_tail", r.ess_tail}, {"constant", r.constant}};
}

SummaryRow summary_row_from(const Json& j) {
  SummaryRow r;
  r.parameter = j.at("parameter").get<std::string>();
  r.mean = real(j.at("mean"));
  r.sd = real(j.at("sd"));
  r.hdi_low = real(j.at("hdi_low"));
  r.hdi_high = real(j.at("hdi_high"));
  r.rhat = real(j.at("rhat"));
  r.ess_bulk = real(j.at("ess_bulk"));
  r.ess_tail = real(j.at("ess_tail"));
  r.constant = j.at("constant").get<bool>();
  return r;
}

Json comparison_row_json(const ComparisonRow& r) {
  return Json{{"rank", r.rank}, {"model", r.model},         {"elpd_waic", r.elpd_waic}, {"p_waic", r.p_waic},
              {"se", r.se},     {"elpd_diff", r.elpd_diff}, {"dse", r.dse}};
}

ComparisonRow comparison_row_from(const Json& j) {
  ComparisonRow r;
  r.rank = j.at("rank").get<std::size_t>();
  r.model = j.at("model").get<std::string>();
  r.elpd_waic = real(j.at("elpd_waic"));
  r.p_waic = real(j.at("p_waic"));
  r.se = real(j.at("se"));
  r.elpd_diff = real(j.at("elpd_diff"));
  r.dse = real(j.at("dse"));
  return r;
}

Json doubles(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

std::vector<double> doubles_from(const Json& j) {
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) v.push_back(real(x));
  return v;
}

double mean_accept(const ChainDraws& d, std::size_t chain) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.draws; ++i) s += d.stat(chain, i).accept_stat;
  return d.draws ? s / static_cast<double>(d.draws) : kNaN;
}

Json manifest_core(const RunManifest& m) {
  Json models = Json::array();
  for (auto k : m.models) models.push_back(std::string(model_name(k)));
  Json div = Json::object();
  for (const auto& [k, v] : m.divergences) div[k] = v;
  Json input{{"path", m.input_path}, {"rows_read", m.rows_read}, {"records", m.records}, {"sample_n", m.sample_n}};
  input["simulation"] = m.simulation.empty() ? Json(nullptr) : Json::parse(m.simulation);
  return Json{{"software", {{"name", "hierglm"}, {"version", m.software_version}}},
              {"input", input},
              {"models", models},
              {"sampler", sampler_json(m.sampler)},
              {"hdi_prob", m.hdi_prob},
              {"ppc_seed", m.ppc_seed},
              {"standardization", {{"lead_time_mean", m.standardization.mean}, {"lead_time_sd", m.standardization.sd}}},
              {"divergences", div},
              {"warnings", m.warnings}};
}

RunManifest manifest_from(const Json& j) {
  RunManifest m;
  m.software_version = j.at("software").at("version").get<std::string>();
  const auto& in = j.at("input");
  m.input_path = in.at("path").get<std::string>();
  m.rows_read = in.at("rows_read").get<std::size_t>();
  m.records = in.at("records").get<std::size_t>();
  m.sample_n = in.at("sample_n").get<std::size_t>();
  if (!in.at("simulation").is_null()) m.simulation = in.at("simulation").dump();
  for (const auto& k : j.at("models")) m.models.push_back(parse_model_kind(k.get<std::string>()));
  m.sampler = sampler_from(j.at("sampler"));
  m.hdi_prob = j.at("hdi_prob").get<double>();
  m.ppc_seed = j.at("ppc_seed").get<std::uint64_t>();
  m.standardization.mean = j.at("standardization").at("lead_time_mean").get<double>();
  m.standardization.sd = j.at("standardization").at("lead_time_sd").get<double>();
  for (const auto& [k, v] : j.at("divergences").items()) m.divergences[k] = v.get<std::size_t>();
  m.warnings = j.at("warnings").get<std::vector<std::string>>();
  return m;
}

Json draws_json(const ChainDraws& d) {
  Json stats{{"divergent", Json::array()},  {"accept_stat", Json::array()}, {"tree_depth", Json::array()},
             {"n_leapfrog", Json::array()}, {"energy", Json::array()},      {"energy_error", Json::array()},
             {"step_size", Json::array()}};
  for (const auto& s : d.stats) {
    stats["divergent"].push_back(s.divergent);
    stats["accept_stat"].push_back(s.accept_stat);
    stats["tree_depth"].push_back(s.tree_depth);
    stats["n_leapfrog"].push_back(s.n_leapfrog);
    stats["energy"].push_back(s.energy);
    stats["energy_error"].push_back(s.energy_error);
    stats["step_size"].push_back(s.step_size);
  }
  Json adapt = Json::array();
  for (const auto& a : d.adaptation) {
    adapt.push_back(Json{{"step_size", a.step_size}, {"inv_metric", doubles(a.inv_mass_diag)}});
  }
  return Json{{"chains", d.chains}, {"draws", d.draws},  {"parameters", d.param_names},
              {"values", doubles(d.values)}, {"stats", stats}, {"adaptation", adapt}};
}

ChainDraws draws_from(const Json& j) {
  ChainDraws d;
  d.chains = j.at("chains").get<std::size_t>();
  d.draws = j.at("draws").get<std::size_t>();
  d.param_names = j.at("parameters").get<std::vector<std::string>>();
  d.values = doubles_from(j.at("values"));
  const auto& s = j.at("stats");
  const std::size_t n = s.at("divergent").size();
  d.stats.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.stats[i].divergent = s.at("divergent")[i].get<bool>();
    d.stats[i].accept_stat = real(s.at("accept_stat")[i]);
    d.stats[i].tree_depth = s.at("tree_depth")[i].get<int>();
    d.stats[i].n_leapfrog = s.at("n_leapfrog")[i].get<int>();
    d.stats[i].energy = real(s.at("energy")[i]);
    d.stats[i].energy_error = real(s.at("energy_error")[i]);
    d.stats[i].step_size = real(s.at("step_size")[i]);
  }
  for (const auto& a : j.at("adaptation")) {
    d.adaptation.push_back({a.at("step_size").get<double>(), doubles_from(a.at("inv_metric"))});
  }
  if (d.values.size() != d.chains * d.draws * d.param_names.size() || n != d.chains * d.draws) {
    throw Error(ErrorCode::SchemaError, "bundle draws have inconsistent sizes");
  }
  return d;
}

Json waic_json(const WaicResult& w) {
  return Json{{"model", w.model}, {"elpd_waic", w.elpd_waic}, {"p_waic", w.p_waic},
              {"se", w.se},       {"lppd", w.lppd},           {"pointwise", doubles(w.pointwise)}};
}

WaicResult waic_from(const Json& j) {
  WaicResult w;
  w.model = j.at("model").get<std::string>();
  w.elpd_waic = real(j.at("elpd_waic"));
  w.p_waic = real(j.at("p_waic"));
  w.se = real(j.at("se"));
  w.lppd = real(j.at("lppd"));
  w.pointwise = doubles_from(j.at("pointwise"));
  return w;
}

Json predictive_json(const PredictiveSummary& p) {
  return Json{{"observed_rate", p.observed_rate},
              {"rate_mean", p.rate_mean},
              {"rate_hdi", {p.rate_hdi.low, p.rate_hdi.high}},
              {"observed_rate_resort", p.observed_rate_resort},
              {"observed_rate_city", p.observed_rate_city},
              {"replicate_rates", doubles(p.replicate_rates)},
              {"replicate_rates_resort", doubles(p.replicate_rates_resort)},
              {"replicate_rates_city", doubles(p.replicate_rates_city)}};
}

PredictiveSummary predictive_from(const Json& j) {
  PredictiveSummary p;
  p.observed_rate = real(j.at("observed_rate"));
  p.rate_mean = real(j.at("rate_mean"));
  p.rate_hdi = {real(j.at("rate_hdi")[0]), real(j.at("rate_hdi")[1])};
  p.observed_rate_resort = real(j.at("observed_rate_resort"));
  p.observed_rate_city = real(j.at("observed_rate_city"));
  p.replicate_rates = doubles_from(j.at("replicate_rates"));
  p.replicate_rates_resort = doubles_from(j.at("replicate_rates_resort"));
  p.replicate_rates_city = doubles_from(j.at("replicate_rates_city"));
  return p;
}

double finite_mean(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    s += x;
    ++n;
  }
  return n ? s / static_cast<double>(n) : kNaN;
}

std::string percent(double p) { return std::isnan(p) ? "NaN" : fixed(100.0 * p, 2) + "%"; }

void write_file(const std::filesystem::path& path, const std::string& content, std::vector<std::filesystem::path>& written) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
  written.push_back(path);
}

}  // namespace

ReportFormats parse_formats(std::string_view list) {
  ReportFormats f{false, false, false, false};
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t end = std::min(list.find(',', start), list.size());
    std::string_view tok = list.substr(start, end - start);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (tok == "json") {
      f.json = true;
    } else if (tok == "markdown" || tok == "md" || tok == "markdown-tables") {
      f.markdown = true;
    } else if (tok == "csv" || tok == "csv-draws") {
      f.csv = true;
    } else if (tok == "svg" || tok == "svg-plots") {
      f.svg = true;
    } else if (tok == "all") {
      f = ReportFormats{};
    } else if (!tok.empty()) {
      throw Error(ErrorCode::InvalidConfig, "unknown format '" + std::string(tok) + "'");
    }
    start = end + 1;
  }
  return f;
}

std::string summary_json(const ModelFit& fit, double hdi_prob) {
  Json params = Json::array();
  for (const auto& r : fit.summary) params.push_back(summary_row_json(r));
  Json odds = Json::array();
  for (const auto& o : fit.odds_ratios) {
    odds.push_back(Json{{"parameter", o.parameter}, {"odds_ratio", o.odds_ratio}, {"hdi_low", o.hdi_low},
                        {"hdi_high", o.hdi_high}});
  }
  Json tails = Json::array();
  for (const auto& t : fit.tails) {
    tails.push_back(Json{{"parameter", t.parameter}, {"p_greater_0", t.p_greater_zero}, {"p_less_0", t.p_less_zero}});
  }
  return dump(Json{{"model", std::string(model_name(fit.kind))},
                   {"hdi_prob", hdi_prob},
                   {"draws", fit.draws.chains * fit.draws.draws},
                   {"parameters", params},
                   {"odds_ratios", odds},
                   {"tail_probabilities", tails}});
}

std::vector<SummaryRow> summary_rows_from_json(std::string_view text) {
  try {
    const Json j = Json::parse(text);
    std::vector<SummaryRow> rows;
    for (const auto& r : j.at("parameters")) rows.push_back(summary_row_from(r));
    return rows;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("summary JSON: ") + e.what());
  }
}

std::string diagnostics_json(const ModelFit& fit) {
  const auto& d = fit.draws;
  Json params = Json::array();
  for (const auto& r : fit.summary) {
    params.push_back(Json{{"parameter", r.parameter},
                          {"rhat", r.rhat},
                          {"ess_bulk", r.ess_bulk},
                          {"ess_tail", r.ess_tail},
                          {"constant", r.constant}});
  }
  Json chains = Json::array();
  for (std::size_t c = 0; c < d.chains; ++c) {
    Json chain{{"chain", c},
               {"divergences", d.divergences(c)},
               {"mean_accept_stat", mean_accept(d, c)}};
    if (c < d.adaptation.size()) {
      chain["step_size"] = d.adaptation[c].step_size;
      chain["inv_metric"] = doubles(d.adaptation[c].inv_mass_diag);
    }
    chains.push_back(chain);
  }
  return dump(Json{{"model", std::string(model_name(fit.kind))},
                   {"divergences", d.divergences()},
                   {"parameters", params},
                   {"chains", chains}});
}

std::string comparison_json(const std::vector<ComparisonRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows) a.push_back(comparison_row_json(r));
  return dump(Json{{"criterion", "waic"}, {"models", a}});
}

std::string ppc_json(const ModelFit& fit, double hdi_prob) {
  const auto& p = fit.ppc;
  const bool inside = p.observed_rate >= p.rate_hdi.low && p.observed_rate <= p.rate_hdi.high;
  return dump(Json{{"model", std::string(model_name(fit.kind))},
                   {"statistic", "mean cancellation rate"},
                   {"replicates", p.replicate_rates.size()},
                   {"hdi_prob", hdi_prob},
                   {"observed_rate", p.observed_rate},
                   {"rate_mean", p.rate_mean},
                   {"rate_hdi", {p.rate_hdi.low, p.rate_hdi.high}},
                   {"observed_inside_hdi", inside},
                   {"by_hotel",
                    {{"resort", {{"observed_rate", p.observed_rate_resort}, {"rate_mean", finite_mean(p.replicate_rates_resort)}}},
                     {"city", {{"observed_rate", p.observed_rate_city}, {"rate_mean", finite_mean(p.replicate_rates_city)}}}}},
                   {"replicate_rates", doubles(p.replicate_rates)}});
}

std::string manifest_json(const RunManifest& manifest, bool include_run_info) {
  Json j = manifest_core(manifest);
  if (include_run_info) {
    Json t = Json::object();
    for (const auto& [k, v] : manifest.timings_seconds) t[k] = v;
    j["timings_seconds"] = t;
    j["jobs"] = manifest.jobs;
  }
  return dump(j);
}

std::string bundle_to_json(const Bundle& b) {
  Json fits = Json::array();
  for (const auto& f : b.fits) {
    Json tails = Json::array();
    for (const auto& t : f.tails) tails.push_back(Json{t.parameter, t.p_greater_zero, t.p_less_zero});
    Json odds = Json::array();
    for (const auto& o : f.odds_ratios) odds.push_back(Json{o.parameter, o.odds_ratio, o.hdi_low, o.hdi_high});
    Json summary = Json::array();
    for (const auto& r : f.summary) summary.push_back(summary_row_json(r));
    fits.push_back(Json{{"model", std::string(model_name(f.kind))},
                        {"draws", draws_json(f.draws)},
                        {"summary", summary},
                        {"odds_ratios", odds},
                        {"tails", tails},
                        {"waic", waic_json(f.waic)},
                        {"ppc", predictive_json(f.ppc)}});
  }
  Json cmp = Json::array();
  for (const auto& r : b.comparison) cmp.push_back(comparison_row_json(r));
  return Json{{"format", "hierglm-bundle"}, {"version", 1}, {"manifest", manifest_core(b.manifest)},
              {"fits", fits}, {"comparison", cmp}}
      .dump() + "\n";
}

Bundle bundle_from_json(std::string_view text) {
  try {
    const Json j = Json::parse(text);
    if (j.at("format") != "hierglm-bundle") throw Error(ErrorCode::SchemaError, "not a hierglm bundle");
    Bundle b;
    b.manifest = manifest_from(j.at("manifest"));
    for (const auto& f : j.at("fits")) {
      ModelFit fit;
      fit.kind = parse_model_kind(f.at("model").get<std::string>());
      fit.draws = draws_from(f.at("draws"));
      for (const auto& r : f.at("summary")) fit.summary.push_back(summary_row_from(r));
      for (const auto& o : f.at("odds_ratios")) {
        fit.odds_ratios.push_back({o[0].get<std::string>(), real(o[1]), real(o[2]), real(o[3])});
      }
      for (const auto& t : f.at("tails")) fit.tails.push_back({t[0].get<std::string>(), real(t[1]), real(t[2])});
      fit.waic = waic_from(f.at("waic"));
      fit.ppc = predictive_from(f.at("ppc"));
      b.fits.push_back(std::move(fit));
    }
    for (const auto& r : j.at("comparison")) b.comparison.push_back(comparison_row_from(r));
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("bundle: ") + e.what());
  }
}

std::string summary_markdown(const ModelFit& fit, double hdi_prob) {
  const std::string pct = fixed(100.0 * hdi_prob, 0) + "%";
  std::ostringstream out;
  out << "# Posterior summary: " << model_name(fit.kind) << "\n\n";
  out << "| parameter | mean | sd | " << pct << " HDI low | " << pct << " HDI high | r_hat | ess_bulk | ess_tail |\n";
  out << "|---|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& r : fit.summary) {
    out << "| " << r.parameter << " | " << fixed(r.mean, 3) << " | " << fixed(r.sd, 3) << " | "
        << fixed(r.hdi_low, 3) << " | " << fixed(r.hdi_high, 3) << " | " << fixed(r.rhat, 2) << " | "
        << fixed(r.ess_bulk, 0) << " | " << fixed(r.ess_tail, 0) << " |\n";
  }
  out << "\n## Odds ratios\n\n| parameter | exp(mean) | " << pct << " HDI low | " << pct << " HDI high |\n";
  out << "|---|---:|---:|---:|\n";
  for (const auto& o : fit.odds_ratios) {
    out << "| " << o.parameter << " | " << fixed(o.odds_ratio, 2) << " | " << fixed(o.hdi_low, 2) << " | "
        << fixed(o.hdi_high, 2) << " |\n";
  }
  out << "\n## Tail probabilities\n\n| parameter | P(> 0) | P(< 0) |\n|---|---:|---:|\n";
  for (const auto& t : fit.tails) {
    out << "| " << t.parameter << " | " << fixed(t.p_greater_zero, 4) << " | " << fixed(t.p_less_zero, 4) << " |\n";
  }
  return out.str();
}

std::string diagnostics_markdown(const ModelFit& fit) {
  const auto& d = fit.draws;
  std::ostringstream out;
  out << "# Convergence diagnostics: " << model_name(fit.kind) << "\n\n";
  out << "| parameter | r_hat | ess_bulk | ess_tail |\n|---|---:|---:|---:|\n";
  for (const auto& r : fit.summary) {
    out << "| " << r.parameter << " | " << (r.constant ? "constant" : fixed(r.rhat, 3)) << " | "
        << fixed(r.ess_bulk, 0) << " | " << fixed(r.ess_tail, 0) << " |\n";
  }
  out << "\nDivergent transitions: " << d.divergences() << "\n\n";
  out << "| chain | divergences | mean accept_stat | step size |\n|---:|---:|---:|---:|\n";
  for (std::size_t c = 0; c < d.chains; ++c) {
    out << "| " << c << " | " << d.divergences(c) << " | " << fixed(mean_accept(d, c), 3) << " | "
        << (c < d.adaptation.size() ? fixed(d.adaptation[c].step_size, 4) : "NaN") << " |\n";
  }
  return out.str();
}

std::string comparison_markdown(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "# Model comparison (WAIC)\n\n";
  out << "| rank | model | elpd_waic | p_waic | se | elpd_diff | dse |\n|---:|---|---:|---:|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out << "| " << r.rank << (r.rank == 1 ? " (best)" : "") << " | " << r.model << " | " << fixed(r.elpd_waic, 1)
        << " | " << fixed(r.p_waic, 1) << " | " << fixed(r.se, 1) << " | " << fixed(r.elpd_diff, 1) << " | "
        << fixed(r.dse, 1) << " |\n";
  }
  return out.str();
}

std::string ppc_markdown(const ModelFit& fit, double hdi_prob) {
  const auto& p = fit.ppc;
  const std::string pct = fixed(100.0 * hdi_prob, 0) + "%";
  std::ostringstream out;
  out << "# Posterior predictive check: " << model_name(fit.kind) << "\n\n";
  out << "Replicates: " << p.replicate_rates.size() << "\n\n";
  out << "| statistic | observed | predicted mean | " << pct << " HDI |\n|---|---:|---:|---|\n";
  out << "| cancellation rate | " << percent(p.observed_rate) << " | " << percent(p.rate_mean) << " | ["
      << percent(p.rate_hdi.low) << ", " << percent(p.rate_hdi.high) << "] |\n";
  out << "| resort hotel rate | " << percent(p.observed_rate_resort) << " | "
      << percent(finite_mean(p.replicate_rates_resort)) << " | |\n";
  out << "| city hotel rate | " << percent(p.observed_rate_city) << " | "
      << percent(finite_mean(p.replicate_rates_city)) << " | |\n";
  const bool inside = p.observed_rate >= p.rate_hdi.low && p.observed_rate <= p.rate_hdi.high;
  out << "\nObserved rate " << (inside ? "lies inside" : "lies outside") << " the " << pct << " HDI.\n";
  return out.str();
}

std::string draws_csv(const ChainDraws& d) {
  std::string out = "chain,draw,parameter,value\n";
  out.reserve(d.values.size() * 32);
  for (std::size_t c = 0; c < d.chains; ++c) {
    for (std::size_t i = 0; i < d.draws; ++i) {
      for (std::size_t p = 0; p < d.params(); ++p) {
        out += std::to_string(c);
        out += ',';
        out += std::to_string(i);
        out += ',';
        out += csv_escape(d.param_names[p]);
        out += ',';
        out += format_double(d.at(c, i, p));
        out += '\n';
      }
    }
  }
  return out;
}

std::vector<std::filesystem::path> emit_report(const Bundle& bundle, const std::filesystem::path& out_dir,
                                               const ReportFormats& formats, bool include_run_info) {
  std::vector<std::filesystem::path> written;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  const double prob = bundle.manifest.hdi_prob;

  for (const auto& fit : bundle.fits) {
    const std::string name(model_name(fit.kind));
    if (formats.json) {
      write_file(out_dir / ("summary_" + name + ".json"), summary_json(fit, prob), written);
      write_file(out_dir / ("diagnostics_" + name + ".json"), diagnostics_json(fit), written);
      write_file(out_dir / ("ppc_" + name + ".json"), ppc_json(fit, prob), written);
    }
    if (formats.markdown) {
      write_file(out_dir / ("summary_" + name + ".md"), summary_markdown(fit, prob), written);
      write_file(out_dir / ("diagnostics_" + name + ".md"), diagnostics_markdown(fit), written);
      write_file(out_dir / ("ppc_" + name + ".md"), ppc_markdown(fit, prob), written);
    }
    if (formats.csv) write_file(out_dir / ("draws_" + name + ".csv"), draws_csv(fit.draws), written);
    if (formats.svg) {
      const auto dir = out_dir / "plots" / name;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
      for (std::size_t p = 0; p < fit.draws.params(); ++p) {
        const std::string& param = fit.draws.param_names[p];
        write_file(dir / (param + "_trace.svg"), svg::trace_plot(fit.draws, p), written);
        const Interval hdi{fit.summary[p].hdi_low, fit.summary[p].hdi_high};
        write_file(dir / (param + "_density.svg"), svg::density_plot(fit.draws, p, hdi), written);
      }
      write_file(dir / "ppc_histogram.svg",
                 svg::ppc_histogram(fit.ppc.replicate_rates, fit.ppc.observed_rate, fit.ppc.rate_hdi,
                                    "Posterior predictive: " + name),
                 written);
    }
  }
  if (!bundle.comparison.empty()) {
    if (formats.json) write_file(out_dir / "comparison.json", comparison_json(bundle.comparison), written);
    if (formats.markdown) write_file(out_dir / "comparison.md", comparison_markdown(bundle.comparison), written);
    if (formats.svg) {
      std::filesystem::create_directories(out_dir / "plots", ec);
      write_file(out_dir / "plots" / "waic_comparison.svg", svg::waic_forest(bundle.comparison), written);
    }
  }
  write_file(out_dir / "bundle.json", bundle_to_json(bundle), written);
  write_file(out_dir / "manifest.json", manifest_json(bundle.manifest, include_run_info), written);
  return written;
}

}  // namespace hierglm
