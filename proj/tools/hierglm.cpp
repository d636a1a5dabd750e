// hierglm command-line front end: fit, simulate, report, version.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "hierglm/csv.hpp"
#include "hierglm/pipeline.hpp"
#include "hierglm/report.hpp"

namespace {

using namespace hierglm;
using Json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kUsage = 1, kInput = 2, kSampler = 3, kIo = 4 };

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaError:
    case ErrorCode::ParseError: return kInput;
    case ErrorCode::AdaptationFailed: return kSampler;
    case ErrorCode::FileNotFound:
    case ErrorCode::IoError: return kIo;
    default: return kUsage;
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, sep)) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("HIERGLM_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::strlen(env)) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::InvalidConfig, std::string("HIERGLM_SEED is not an unsigned integer: ") + env);
  }
  return 42;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".truth.json");
  return p;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Default truths. Simple uses reference_truth(); Interaction adds
// moderate interaction effects; Hierarchical splits the intercept by hotel.
ParameterVector default_truth(ModelKind kind) {
  const ParameterVector ref = reference_truth();
  const auto base = ref.values();
  switch (kind) {
    case ModelKind::Simple: return reference_truth();
    case ModelKind::Interaction:
      return ParameterVector(kind, {base[0], base[1], base[2], base[3], 0.7, 0.3, -0.3});
    case ModelKind::Hierarchical:
      return ParameterVector(kind, {0.2, 0.5, base[0], base[0] + 0.7, base[1], base[2], base[3]});
  }
  return reference_truth();
}

struct FitArgs {
  std::string input;
  std::string models = "simple,hierarchical,interaction";
  SamplerConfig sampler;
  std::optional<std::uint64_t> seed;
  std::size_t sample_n = 0;
  std::string out_dir = "hierglm_out";
  std::string formats = "json,markdown,csv,svg";
  std::size_t jobs = 1;
};

int run_fit(const FitArgs& a) {
  PipelineConfig config;
  config.sampler = a.sampler;
  config.sampler.seed = a.seed ? *a.seed : default_seed();
  config.jobs = a.jobs;
  config.models.clear();
  for (const auto& m : split(a.models, ',')) {
    const ModelKind kind = parse_model_kind(m);
    if (std::find(config.models.begin(), config.models.end(), kind) != config.models.end()) {
      throw Error(ErrorCode::InvalidConfig, "model listed twice: " + m);
    }
    config.models.push_back(kind);
  }
  const ReportFormats formats = parse_formats(a.formats);

  IngestOptions ingest;
  ingest.sample_n = a.sample_n;
  ingest.seed = config.sampler.seed;
  const auto data = ingest_csv(a.input, ingest);
  for (const auto& w : data.warnings) std::cerr << "warning: " << w << "\n";

  RunManifest manifest;
  manifest.input_path = a.input;
  manifest.rows_read = data.rows_read;
  manifest.sample_n = a.sample_n;
  manifest.warnings = data.warnings;
  if (const auto side = sidecar_path(a.input); std::filesystem::exists(side)) {
    try {
      manifest.simulation = Json::parse(read_text(side)).dump();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, side.string() + ": " + e.what());
    }
  }

  const Bundle bundle = run_pipeline(data.records, config, std::move(manifest));
  const auto written = emit_report(bundle, a.out_dir, formats);

  for (const auto& fit : bundle.fits) {
    std::cout << model_name(fit.kind) << ": elpd_waic " << fit.waic.elpd_waic << ", divergences "
              << fit.draws.divergences() << "\n";
  }
  for (const auto& row : bundle.comparison) std::cout << "rank " << row.rank << ": " << row.model << "\n";
  std::cout << "wrote " << written.size() << " files to " << a.out_dir << "\n";
  return kOk;
}

struct SimulateArgs {
  std::string model = "simple";
  std::string truth = "table4-means";
  std::size_t n = 5000;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  const ModelKind kind = parse_model_kind(a.model);
  const ModelSpec spec = ModelSpec::for_kind(kind);
  if (a.n < 100) throw Error(ErrorCode::InvalidConfig, "--n must be at least 100");
  const std::uint64_t seed = a.seed ? *a.seed : default_seed();

  ParameterVector truth;
  if (a.truth == "table4-means") {
    truth = default_truth(kind);
  } else {
    std::vector<double> values;
    for (const auto& tok : split(a.truth, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidConfig, "--truth value is not a number: " + tok);
      }
    }
    if (values.size() != spec.dim()) {
      throw Error(ErrorCode::InvalidConfig, "--truth needs " + std::to_string(spec.dim()) + " values for " + a.model);
    }
    truth = ParameterVector(kind, values);
  }

  const CovariateProfile profile;
  const auto records = simulate_dataset(spec, truth, a.n, profile, seed);

  const std::filesystem::path out(a.out);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + out.string());
    write_records_csv(f, records);
    if (!f) throw Error(ErrorCode::IoError, "failed writing " + out.string());
  }

  Json truth_json = Json::object();
  const auto names = spec.parameter_names();
  for (std::size_t i = 0; i < names.size(); ++i) truth_json[names[i]] = truth[i];
  const Json side{{"model", a.model},
                  {"truth_source", a.truth == "table4-means" ? "table4-means" : "user"},
                  {"truth", truth_json},
                  {"n", a.n},
                  {"seed", seed},
                  {"covariate_profile",
                   {{"lead_time_center_days", profile.lead_time_center_days},
                    {"lead_time_scale_days", profile.lead_time_scale_days},
                    {"special_requests_success", profile.special_requests_success},
                    {"parking_rate", profile.parking_rate},
                    {"city_rate", profile.city_rate}}}};
  const auto side_path = sidecar_path(out);
  std::ofstream f(side_path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + side_path.string());
  f << side.dump(2) << "\n";

  double rate = 0.0;
  for (const auto& r : records) rate += r.is_canceled;
  std::cout << "wrote " << records.size() << " rows to " << out.string() << " (cancel rate "
            << rate / static_cast<double>(records.size()) << "), truth in " << side_path.string() << "\n";
  return kOk;
}

int run_report(const std::string& bundle_path, const std::string& out_dir, const std::string& formats) {
  const Bundle bundle = bundle_from_json(read_text(bundle_path));
  const auto written = emit_report(bundle, out_dir, parse_formats(formats), false);
  std::cout << "wrote " << written.size() << " files to " << out_dir << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian logistic models of hotel booking cancellations"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit models to a bookings CSV and write reports");
  fit_cmd->add_option("--input", fit.input, "Bookings CSV")->required();
  fit_cmd->add_option("--models", fit.models, "Comma-separated: simple,hierarchical,interaction")
      ->capture_default_str();
  fit_cmd->add_option("--chains", fit.sampler.chains)->capture_default_str();
  fit_cmd->add_option("--draws", fit.sampler.draws, "Post-warmup draws per chain")->capture_default_str();
  fit_cmd->add_option("--warmup", fit.sampler.warmup)->capture_default_str();
  fit_cmd->add_option("--target-accept", fit.sampler.target_accept)->capture_default_str();
  fit_cmd->add_option("--max-tree-depth", fit.sampler.max_tree_depth)->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "RNG seed (default: $HIERGLM_SEED, else 42)");
  fit_cmd->add_option("--sample-n", fit.sample_n, "Subsample this many rows (0 = all)")->capture_default_str();
  fit_cmd->add_option("--out-dir", fit.out_dir)->capture_default_str();
  fit_cmd->add_option("--formats", fit.formats, "Comma-separated: json,markdown,csv,svg")->capture_default_str();
  fit_cmd->add_option("--jobs", fit.jobs, "Models fitted concurrently")->capture_default_str();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Write a synthetic bookings CSV and a truth sidecar");
  sim_cmd->add_option("--model", sim.model)->capture_default_str();
  sim_cmd->add_option("--truth", sim.truth, "table4-means or comma-separated values")->capture_default_str();
  sim_cmd->add_option("--n", sim.n)->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "RNG seed (default: $HIERGLM_SEED, else 42)");
  sim_cmd->add_option("--out", sim.out, "Output CSV")->required();

  std::string bundle_path, report_dir = "hierglm_report", report_formats = "json,markdown,csv,svg";
  auto* report_cmd = app.add_subcommand("report", "Re-emit reports from a stored bundle.json");
  report_cmd->add_option("--bundle", bundle_path)->required();
  report_cmd->add_option("--out-dir", report_dir)->capture_default_str();
  report_cmd->add_option("--formats", report_formats)->capture_default_str();

  app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*sim_cmd) return run_simulate(sim);
    if (*report_cmd) return run_report(bundle_path, report_dir, report_formats);
    std::cout << "hierglm " << HIERGLM_VERSION << "\n";
    return kOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
