#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "featsel/cli.hpp"
#include "featsel/dataset.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "featsel");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = featsel::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// A fresh directory under the system temp dir, removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("featsel_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

const std::vector<std::string> kSmall = {"--trees", "10", "--bootstraps", "5", "--pai-repeats", "1"};

std::vector<std::string> with_small(std::vector<std::string> args) {
  args.insert(args.end(), kSmall.begin(), kSmall.end());
  return args;
}

}  // namespace

TEST_CASE("version and usage errors") {
  Run v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(featsel::kVersion) != std::string::npos);

  Run none = run({});
  CHECK(none.code == 1);

  Run bad = run({"rank", "--method", "nosuch", "--synth", "default"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("pearson, cfs, lasso") != std::string::npos);
  CHECK(bad.err.find("usage:") != std::string::npos);

  Run flag = run({"benchmark", "--no-such-flag"});
  CHECK(flag.code == 1);

  Run both = run({"rank", "--method", "pearson"});
  CHECK(both.code == 1);
  CHECK(both.err.find("exactly one of --data and --synth") != std::string::npos);
}

TEST_CASE("synth writes a dataset with the requested roles") {
  TempDir a("synth_a"), b("synth_b");
  const std::vector<std::string> flags = {"--relevant", "5", "--redundant", "10", "--noise", "19", "--n", "5000", "--seed", "1"};
  std::vector<std::string> args{"synth", "--out", a.path.string()};
  args.insert(args.end(), flags.begin(), flags.end());
  REQUIRE(run(args).code == 0);
  args[2] = b.path.string();
  REQUIRE(run(args).code == 0);

  CHECK(slurp(a / "data.csv") == slurp(b / "data.csv"));
  CHECK(slurp(a / "roles.csv") == slurp(b / "roles.csv"));
  featsel::Dataset d = featsel::load_csv(a / "data.csv", "stress");
  CHECK(d.n_features() == 34);
  CHECK(d.n_samples() == 5000);

  std::size_t relevant = 0, redundant = 0, noise = 0;
  for (const auto& line : lines(slurp(a / "roles.csv"))) {
    relevant += line.find(",relevant") != std::string::npos;
    redundant += line.find(",redundant") != std::string::npos;
    noise += line.find(",noise") != std::string::npos;
  }
  CHECK(relevant == 5);
  CHECK(redundant == 10);
  CHECK(noise == 19);

  Run bad = run({"synth", "--out", a.path.string(), "--n", "1"});
  CHECK(bad.code == 1);
}

TEST_CASE("rank writes a ranking, and data errors exit 2") {
  TempDir t("rank");
  featsel::SynthSpec spec;
  spec.n_samples = 500;
  const auto s = featsel::synthesize(spec);
  featsel::write_csv(s.data, t / "d.csv", "stress");

  Run r = run({"rank", "--method", "pearson", "--data", t / "d.csv", "--target", "stress", "--out", t / "out"});
  REQUIRE(r.code == 0);
  const auto ranking = lines(slurp(t / "out/pearson_ranking.csv"));
  CHECK(ranking.front() == "feature,score,rank,excluded_reason,selected");
  CHECK(ranking.size() == 35);
  CHECK(slurp(t / "out/run.manifest").find("method=\"pearson\"") != std::string::npos);

  Run lasso = run({"rank", "--method", "lasso", "--lambda", "0.01", "--data", t / "d.csv", "--out", t / "out"});
  REQUIRE(lasso.code == 0);
  std::size_t selected = 0;
  for (const auto& line : lines(slurp(t / "out/lasso_ranking.csv"))) {
    if (line.rfind("feature,", 0) == 0) continue;
    const bool chosen = line.back() == '1';
    selected += chosen;
    if (!chosen) CHECK(line.find(",0,") != std::string::npos);
  }
  CHECK(selected > 0);

  {
    std::ofstream bad(t / "bad.csv");
    bad << "a,b,stress\n1,2,3\n4,x,6\n";
  }
  Run broken = run({"rank", "--method", "pearson", "--data", t / "bad.csv", "--out", t / "out"});
  CHECK(broken.code == 2);
  CHECK(broken.err.find("row 3") != std::string::npos);

  Run missing = run({"rank", "--method", "pearson", "--data", t / "nope.csv", "--out", t / "out"});
  CHECK(missing.code == 2);
}

TEST_CASE("benchmark labels at the percentile before selecting") {
  TempDir t("label");
  featsel::SynthSpec spec;
  spec.n_samples = 400;
  const auto s = featsel::synthesize(spec);
  featsel::write_csv(s.data, t / "d.csv", "stress");
  Run r = run(with_small({"benchmark", "--data", t / "d.csv", "--target", "stress", "--percentile", "90", "--methods",
                          "pearson", "--out", t / "out"}));
  REQUIRE(r.code == 0);

  const std::vector<double> y(s.data.y().begin(), s.data.y().end());
  const double threshold = oracle::percentile(y, 90);
  std::size_t above = 0;
  for (double v : y) above += v > threshold;
  const std::string manifest = slurp(t / "out/run.manifest");
  CHECK(manifest.find("# positives: " + std::to_string(above)) != std::string::npos);
  CHECK(above == 40);
}

TEST_CASE("benchmark writes reports and a reloadable manifest") {
  TempDir t("bench");
  Run r = run(with_small({"benchmark", "--synth", "n=600", "--methods", "pearson,rfe", "--seed", "3", "--out",
                          t / "a"}));
  REQUIRE(r.code == 0);
  const std::string csv = slurp(t / "a/report.csv");
  std::size_t summaries = 0;
  for (const auto& line : lines(csv)) summaries += line.find(",,,,,") != std::string::npos;
  CHECK(summaries == 3);
  CHECK(fs::exists(t / "a/report.md"));

  const std::string manifest = slurp(t / "a/run.manifest");
  CHECK(manifest.rfind(std::string("# ") + featsel::kVersion, 0) == 0);
  CHECK(manifest.find("seed=3") != std::string::npos);
  CHECK(manifest.find("# dataset_fingerprint: ") != std::string::npos);

  // Re-running from the manifest reproduces the report.
  Run again = run({"benchmark", "--config", t / "a/run.manifest", "--out", t / "b"});
  REQUIRE(again.code == 0);
  CHECK(slurp(t / "b/report.csv") == csv);

  // Flags beat the config file.
  Run flagged = run({"benchmark", "--config", t / "a/run.manifest", "--methods", "pearson", "--out", t / "c"});
  REQUIRE(flagged.code == 0);
  std::size_t rows = 0;
  for (const auto& line : lines(slurp(t / "c/report.csv"))) rows += line.find(",,,,,") != std::string::npos;
  CHECK(rows == 2);

  Run rendered = run({"report", "--input", t / "a/report.csv"});
  CHECK(rendered.code == 0);
  CHECK(rendered.out.find("| Feature | pearson | rfe |") != std::string::npos);
}

TEST_CASE("benchmark repeats") {
  TempDir t("repeats");
  Run r = run(with_small({"benchmark", "--synth", "n=500", "--methods", "pearson", "--repeats", "3", "--out",
                          t / "out"}));
  REQUIRE(r.code == 0);
  CHECK(lines(slurp(t / "out/auc_repeats.csv")).size() == 1 + 3 * 2);


  Run invalid = run({"benchmark", "--synth", "n=400", "--bootstraps", "1", "--out", t / "fail"});
  CHECK(invalid.code == 1);
}
