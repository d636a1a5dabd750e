#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "hierglm/csv.hpp"

using namespace hierglm;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "hierglm_cli_test";

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + HIERGLM_CLI + " " + args + " >" +
                          (kRoot / "stdout.txt").string() + " 2>" + (kRoot / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string stderr_text() { return slurp(kRoot / "stderr.txt"); }

void reset() {
  fs::remove_all(kRoot);
  fs::create_directories(kRoot);
}

std::vector<fs::path> tree(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir));
  }
  std::sort(out.begin(), out.end());
  return out;
}

const std::string kSmallFit = " --chains 2 --draws 150 --warmup 150 ";

}  // namespace

TEST_CASE("version and usage errors") {
  reset();
  CHECK(run("version") == 0);
  CHECK(slurp(kRoot / "stdout.txt") == "hierglm 0.1.0\n");
  CHECK(run("") == 1);
  CHECK(run("fit") == 1);
  CHECK(run("fit --input x.csv --no-such-flag") == 1);
  CHECK(run("--help") == 0);
  CHECK(run("simulate --out " + (kRoot / "a.csv").string() + " --model nested") == 1);
  CHECK(run("simulate --out " + (kRoot / "a.csv").string() + " --truth 1,2") == 1);
}

TEST_CASE("simulate writes a deterministic CSV and a truth sidecar") {
  reset();
  const auto a = kRoot / "a.csv";
  const auto b = kRoot / "b.csv";
  REQUIRE(run("simulate --out " + a.string()) == 0);
  REQUIRE(run("simulate --out " + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));

  const auto data = ingest_csv(a);
  CHECK(data.records.size() == 5000);
  double rate = 0.0;
  for (const auto& r : data.records) rate += r.is_canceled;
  rate /= 5000.0;
  CHECK(rate >= 0.30);
  CHECK(rate <= 0.45);

  const auto side = nlohmann::json::parse(slurp(kRoot / "a.truth.json"));
  CHECK(side["model"] == "simple");
  CHECK(side["truth_source"] == "table4-means");
  CHECK(side["n"] == 5000);
  CHECK(side["seed"] == 42);
  CHECK(side["truth"].contains("beta1"));

  REQUIRE(run("simulate --seed 43 --out " + b.string()) == 0);
  CHECK(slurp(a) != slurp(b));
}

TEST_CASE("default truths per model") {
  reset();
  const auto truth_of = [](const std::string& model) {
    const auto out = kRoot / (model + ".csv");
    REQUIRE(run("simulate --n 200 --model " + model + " --out " + out.string()) == 0);
    const auto side = nlohmann::ordered_json::parse(slurp(kRoot / (model + ".truth.json")));
    std::vector<double> v;
    for (const auto& x : side["truth"]) v.push_back(x);
    return v;
  };
  CHECK(truth_of("simple") == std::vector<double>{-0.15, 0.6, -0.642, -3.879});
  CHECK(truth_of("interaction") == std::vector<double>{-0.15, 0.6, -0.642, -3.879, 0.7, 0.3, -0.3});
  CHECK(truth_of("hierarchical") == std::vector<double>{0.2, 0.5, -0.15, -0.15 + 0.7, 0.6, -0.642, -3.879});
}

TEST_CASE("HIERGLM_SEED sets the default seed and --seed overrides it") {
  reset();
  const auto a = kRoot / "a.csv";
  const auto b = kRoot / "b.csv";
  REQUIRE(run("simulate --n 300 --seed 7 --out " + a.string()) == 0);
  REQUIRE(run("simulate --n 300 --out " + b.string(), "HIERGLM_SEED=7") == 0);
  CHECK(slurp(a) == slurp(b));
  REQUIRE(run("simulate --n 300 --seed 8 --out " + b.string(), "HIERGLM_SEED=7") == 0);
  CHECK(slurp(a) != slurp(b));
  CHECK(run("simulate --n 300 --out " + b.string(), "HIERGLM_SEED=abc") == 1);
}

TEST_CASE("zero lead-time effect gives flat cancellation across lead-time deciles") {
  reset();
  const auto path = kRoot / "flat.csv";
  REQUIRE(run("simulate --n 20000 --truth -0.5,0,-0.7,-3.9 --out " + path.string()) == 0);
  auto recs = ingest_csv(path).records;
  std::sort(recs.begin(), recs.end(), [](const auto& x, const auto& y) { return x.lead_time < y.lead_time; });
  const std::size_t per = recs.size() / 10;
  std::vector<double> rates;
  for (std::size_t d = 0; d < 10; ++d) {
    double k = 0.0;
    for (std::size_t i = d * per; i < (d + 1) * per; ++i) k += recs[i].is_canceled;
    rates.push_back(k / static_cast<double>(per));
  }
  const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
  // Binomial SE per decile is about 0.01.
  CHECK(*hi - *lo < 0.06);
}

TEST_CASE("fit recovers the lead-time odds ratio") {
  reset();
  const auto data = kRoot / "sim.csv";
  REQUIRE(run("simulate --out " + data.string()) == 0);
  const auto out = kRoot / "out";
  REQUIRE(run("fit --models simple --input " + data.string() + " --out-dir " + out.string()) == 0);
  const auto summary = nlohmann::json::parse(slurp(out / "summary_simple.json"));
  double ratio = 0.0;
  for (const auto& row : summary["odds_ratios"]) {
    if (row["parameter"] == "beta1") ratio = row["odds_ratio"];
  }
  CHECK(ratio >= 1.70);
  CHECK(ratio <= 1.95);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["input"]["simulation"]["truth_source"] == "table4-means");
  CHECK(manifest["divergences"]["simple"] == 0);
}

TEST_CASE("outputs are identical across job counts and report reproduces them") {
  reset();
  const auto data = kRoot / "sim.csv";
  REQUIRE(run("simulate --model interaction --n 600 --out " + data.string()) == 0);
  const auto d1 = kRoot / "j1";
  const auto d3 = kRoot / "j3";
  REQUIRE(run("fit --input " + data.string() + kSmallFit + "--jobs 1 --out-dir " + d1.string()) == 0);
  REQUIRE(run("fit --input " + data.string() + kSmallFit + "--jobs 3 --out-dir " + d3.string()) == 0);

  const auto files = tree(d1);
  CHECK(files == tree(d3));
  CHECK(files.size() > 40);
  for (const auto& f : files) {
    if (f == "manifest.json") continue;
    CAPTURE(f.string());
    CHECK(slurp(d1 / f) == slurp(d3 / f));
  }
  auto m1 = nlohmann::ordered_json::parse(slurp(d1 / "manifest.json"));
  auto m3 = nlohmann::ordered_json::parse(slurp(d3 / "manifest.json"));
  CHECK(m1["jobs"] == 1);
  CHECK(m3["jobs"] == 3);
  for (auto* m : {&m1, &m3}) {
    m->erase("timings_seconds");
    m->erase("jobs");
  }
  CHECK(m1 == m3);

  const auto rep = kRoot / "rep";
  REQUIRE(run("report --bundle " + (d1 / "bundle.json").string() + " --out-dir " + rep.string()) == 0);
  CHECK(tree(rep) == files);
  for (const auto& f : files) {
    CAPTURE(f.string());
    if (f == "manifest.json") {
      CHECK(nlohmann::ordered_json::parse(slurp(rep / f)) == m1);
    } else {
      CHECK(slurp(rep / f) == slurp(d1 / f));
    }
  }

  const auto jo = kRoot / "json_only";
  REQUIRE(run("report --formats json --bundle " + (d1 / "bundle.json").string() + " --out-dir " + jo.string()) ==
          0);
  CHECK_FALSE(fs::exists(jo / "plots"));
  CHECK(fs::exists(jo / "summary_interaction.json"));
}

TEST_CASE("input errors map to exit codes") {
  reset();
  const std::string header = "hotel,is_canceled,lead_time,total_of_special_requests,required_car_parking_spaces\n";
  const auto write = [](const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
  };

  CHECK(run("fit --input " + (kRoot / "missing.csv").string()) == 4);
  CHECK(stderr_text().find("missing.csv") != std::string::npos);

  const auto hostel = kRoot / "hostel.csv";
  write(hostel, header + "City Hotel,0,3,0,0\nHostel,1,4,0,0\n");
  CHECK(run("fit --input " + hostel.string()) == 2);
  CHECK(stderr_text().find("hostel.csv:3") != std::string::npos);
  CHECK(stderr_text().find("Hostel") != std::string::npos);

  const auto nocol = kRoot / "nocol.csv";
  write(nocol, "hotel,is_canceled,lead_time\nCity Hotel,0,3\n");
  CHECK(run("fit --input " + nocol.string()) == 2);
  CHECK(stderr_text().find("total_of_special_requests") != std::string::npos);

  const auto ok = kRoot / "ok.csv";
  REQUIRE(run("simulate --n 200 --out " + ok.string()) == 0);
  CHECK(run("fit --input " + ok.string() + " --formats pdf") == 1);
  CHECK(run("fit --input " + ok.string() + " --warmup 5") == 1);
  CHECK(run("fit --input " + ok.string() + " --models simple,simple") == 1);
  CHECK(run("report --bundle " + ok.string()) == 2);
  CHECK(run("report --bundle " + (kRoot / "nope.json").string()) == 4);

  const auto tiny = kRoot / "tiny.csv";
  write(tiny, header + "City Hotel,0,3,0,0\n");
  CHECK(run("fit --input " + tiny.string()) == 1);
}

TEST_CASE("sample-n subsamples reproducibly") {
  reset();
  const auto data = kRoot / "sim.csv";
  REQUIRE(run("simulate --n 2000 --out " + data.string()) == 0);
  const auto a = kRoot / "a";
  REQUIRE(run("fit --models simple --sample-n 300 --formats json --input " + data.string() + kSmallFit +
              "--out-dir " + a.string()) == 0);
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["input"]["rows_read"] == 2000);
  CHECK(manifest["input"]["records"] == 300);
  CHECK(manifest["input"]["sample_n"] == 300);
}
