#include "featsel/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "featsel/benchmark.hpp"
#include "featsel/common.hpp"
#include "featsel/dataset.hpp"

namespace featsel {

namespace {

namespace fs = std::filesystem;

struct RunOptions {
  std::string data;
  std::string target = "stress";
  std::string synth;
  double percentile = 90.0;
  double validation_fraction = 0.25;
  std::uint64_t seed = 7;
  std::string out = "featsel-out";
  unsigned workers = default_workers();

  std::optional<double> lambda;
  std::optional<double> lambda_fraction;
  double ridge_lambda = 1.0;
  double min_abs_rho = 0.05;
  double weight_min_relative = 0.1;
  std::size_t bins = 10;
  std::size_t bootstraps = 100;
  std::size_t bolasso_bootstraps = 32;
  bool keep_redundant = MethodParams{}.fealect_keep_redundant;
  std::size_t pai_repeats = 5;
  double pai_min_relative = 0.05;
  std::size_t rfe_min_subset = 1;
  double rfe_inner_fraction = 0.25;

  std::size_t trees = 100;
  std::size_t max_features = 0;
  std::size_t min_leaf = 1;
  std::size_t max_depth = 0;

  std::string method;
  std::string methods;
  std::size_t repeats = 1;

  SynthSpec synth_spec;
  std::string input;
  std::string format = "markdown";
};

void add_options(CLI::App& app, RunOptions& o) {
  const std::string data = "Data", methods = "Methods", forest = "Forest", synth = "Synth", run = "Run";
  app.add_option("--data", o.data, "Input CSV")->group(data);
  app.add_option("--target", o.target, "Target column")->capture_default_str()->group(data);
  app.add_option("--synth", o.synth, "Synthetic data instead of --data: 'default' or k=v,... over n, relevant, "
                                     "redundant, noise, noise_sd")
      ->group(data);
  app.add_option("--percentile", o.percentile, "Hotspot percentile for continuous targets")
      ->check(CLI::Range(0.0, 100.0))
      ->capture_default_str()
      ->group(data);
  app.add_option("--validation-fraction", o.validation_fraction, "Share of rows held out for validation")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str()
      ->group(data);

  app.add_option("--seed", o.seed, "Master seed")->capture_default_str()->group(run);
  app.add_option("--out", o.out, "Output directory")->capture_default_str()->group(run);
  app.add_option("--workers", o.workers, "Worker threads")->check(CLI::Range(1u, 1024u))->group(run);

  app.add_option("--method", o.method, "Method for rank: " + method_list())->group(methods);
  app.add_option("--methods", o.methods, "Comma-separated methods for benchmark")->group(methods);
  app.add_option("--repeats", o.repeats, "Benchmark repeats over fresh splits")
      ->check(CLI::PositiveNumber)
      ->capture_default_str()
      ->group(methods);
  auto* lambda = app.add_option("--lambda", o.lambda, "Absolute LASSO penalty")->check(CLI::NonNegativeNumber)->group(methods);
  app.add_option("--lambda-fraction", o.lambda_fraction, "LASSO penalty as a fraction of lambda_max")
      ->check(CLI::Range(0.0, 1.0))
      ->excludes(lambda)
      ->group(methods);
  app.add_option("--ridge-lambda", o.ridge_lambda, "Ridge penalty")->check(CLI::PositiveNumber)->capture_default_str()->group(methods);
  app.add_option("--min-abs-rho", o.min_abs_rho, "Pearson selection cut on |rho|")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str()
      ->group(methods);
  app.add_option("--weight-min-relative", o.weight_min_relative, "OLS/ridge selection cut as a fraction of max |w|")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str()
      ->group(methods);
  app.add_option("--bins", o.bins, "CFS discretization bins")->check(CLI::Range(2, 1000))->capture_default_str()->group(methods);
  app.add_option("--bootstraps", o.bootstraps, "FeaLect bootstraps")->check(CLI::Range(2, 100000))->capture_default_str()->group(methods);
  app.add_option("--bolasso-bootstraps", o.bolasso_bootstraps, "Bolasso bootstraps")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str()
      ->group(methods);
  app.add_option("--keep-redundant", o.keep_redundant, "FeaLect also selects its redundant class")
      ->capture_default_str()
      ->group(methods);
  app.add_option("--pai-repeats", o.pai_repeats, "Permutations per feature and tree")
      ->check(CLI::PositiveNumber)
      ->capture_default_str()
      ->group(methods);
  app.add_option("--pai-min-relative", o.pai_min_relative, "RF-PAI selection cut as a fraction of the top importance")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str()
      ->group(methods);
  app.add_option("--rfe-min-subset", o.rfe_min_subset, "Smallest RFE subset")->check(CLI::PositiveNumber)->capture_default_str()->group(methods);
  app.add_option("--rfe-inner-fraction", o.rfe_inner_fraction, "Training share RFE holds out to score its steps")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str()
      ->group(methods);

  app.add_option("--trees", o.trees, "Trees per forest")->check(CLI::PositiveNumber)->capture_default_str()->group(forest);
  app.add_option("--max-features", o.max_features, "Features tried per split, 0 = ceil(sqrt(p))")->capture_default_str()->group(forest);
  app.add_option("--min-leaf", o.min_leaf, "Minimum samples per leaf")->check(CLI::PositiveNumber)->capture_default_str()->group(forest);
  app.add_option("--max-depth", o.max_depth, "Maximum tree depth, 0 = unlimited")->capture_default_str()->group(forest);

  app.add_option("--n", o.synth_spec.n_samples, "Rows")->check(CLI::Range(2, 100000000))->capture_default_str()->group(synth);
  app.add_option("--relevant", o.synth_spec.n_relevant, "Relevant columns")->capture_default_str()->group(synth);
  app.add_option("--redundant", o.synth_spec.n_redundant, "Redundant columns")->capture_default_str()->group(synth);
  app.add_option("--noise", o.synth_spec.n_noise, "Noise columns")->capture_default_str()->group(synth);
  app.add_option("--noise-sd", o.synth_spec.noise_sd, "Relative noise level")->check(CLI::NonNegativeNumber)->capture_default_str()->group(synth);

  app.add_option("--input", o.input, "report.csv to render")->group(run);
  app.add_option("--format", o.format, "report output format")
      ->check(CLI::IsMember({"markdown", "csv"}))
      ->capture_default_str()
      ->group(run);
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep))
    if (!part.empty()) parts.push_back(part);
  return parts;
}

SynthSpec parse_synth(const std::string& text, std::uint64_t seed) {
  SynthSpec spec;
  spec.seed = derive_seed(seed, "synth");
  if (text == "default") return spec;
  for (const auto& item : split_list(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--synth: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    double v;
    if (!parse_double(value, v) || v < 0.0) throw ConfigError("--synth: bad value for " + key);
    if (key == "noise_sd") {
      spec.noise_sd = v;
      continue;
    }
    if (v != static_cast<double>(static_cast<std::size_t>(v))) throw ConfigError("--synth: " + key + " must be a whole number");
    const auto count = static_cast<std::size_t>(v);
    if (key == "n")
      spec.n_samples = count;
    else if (key == "relevant")
      spec.n_relevant = count;
    else if (key == "redundant")
      spec.n_redundant = count;
    else if (key == "noise")
      spec.n_noise = count;
    else
      throw ConfigError("--synth: unknown key '" + key + "'");
  }
  return spec;
}

struct Prepared {
  Dataset data;
  std::optional<double> threshold;
  std::string source;
};

// Loads or generates the data, labels hotspots when the target is
// continuous, then scales features to [0, 1].
Prepared prepare(const RunOptions& o) {
  if (o.data.empty() == o.synth.empty()) throw ConfigError("give exactly one of --data and --synth");
  std::optional<Dataset> raw;
  std::string source;
  if (!o.data.empty()) {
    raw = load_csv(o.data, o.target);
    source = o.data;
  } else {
    raw = synthesize(parse_synth(o.synth, o.seed)).data;
    source = "synth:" + o.synth;
  }
  std::optional<double> threshold;
  Dataset labelled = *raw;
  if (raw->target().kind == TargetKind::continuous) {
    const HotspotLabels labels = label_hotspots(raw->target(), o.percentile);
    if (labels.no_positives) throw DataError("no value exceeds the " + format_double(o.percentile) + "th percentile");
    threshold = labels.threshold;
    labelled = raw->with_target(labels.labels);
  }
  if (!labelled.target().has_both_labels()) throw DataError("target needs both labels");
  return {minmax_scale(labelled), threshold, source};
}

BenchmarkConfig make_config(const RunOptions& o, bool benchmark) {
  BenchmarkConfig c;
  c.seed = o.seed;
  c.workers = o.workers;
  c.forest.n_trees = o.trees;
  c.forest.max_features = o.max_features;
  c.forest.min_samples_leaf = o.min_leaf;
  c.forest.max_depth = o.max_depth;
  MethodParams& p = c.params;
  p.pearson.min_abs_rho = o.min_abs_rho;
  p.cfs_bins = o.bins;
  // The benchmark defaults to a relative penalty; rank keeps the absolute 0.3.
  if (o.lambda)
    p.lasso = {PenaltyKind::lasso, *o.lambda, false};
  else if (o.lambda_fraction)
    p.lasso = {PenaltyKind::lasso, *o.lambda_fraction, true};
  else if (!benchmark)
    p.lasso = PenaltySpec{};
  p.ridge_lambda = o.ridge_lambda;
  p.weight_min_relative = o.weight_min_relative;
  p.pai_repeats = o.pai_repeats;
  p.pai_min_relative = o.pai_min_relative;
  p.rfe_min_subset = o.rfe_min_subset;
  p.rfe_inner_fraction = o.rfe_inner_fraction;
  p.fealect_bootstraps = o.bootstraps;
  p.fealect_keep_redundant = o.keep_redundant;
  p.bolasso_bootstraps = o.bolasso_bootstraps;
  if (benchmark && !o.methods.empty()) {
    c.methods.clear();
    for (const auto& name : split_list(o.methods, ',')) {
      const auto m = parse_method(name);
      if (!m) throw ConfigError("unknown method '" + name + "'; choose from: " + method_list());
      c.methods.push_back(*m);
    }
  }
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

// Config echo in the same key=value form --config reads, then the derived
// facts as comments.
std::string manifest(const std::string& command, const RunOptions& o,
                     const std::vector<std::pair<std::string, std::string>>& facts) {
  std::ostringstream m;
  m << "# " << kVersion << "\n# command: " << command << '\n';
  auto kv = [&](const char* key, const std::string& value) { m << key << '=' << value << '\n'; };
  auto quoted = [](const std::string& s) { return '"' + s + '"'; };
  if (!o.data.empty()) kv("data", quoted(o.data));
  if (!o.synth.empty()) kv("synth", quoted(o.synth));
  kv("target", quoted(o.target));
  kv("percentile", format_double(o.percentile));
  kv("validation-fraction", format_double(o.validation_fraction));
  kv("seed", std::to_string(o.seed));
  kv("workers", std::to_string(o.workers));
  if (!o.method.empty()) kv("method", quoted(o.method));
  if (!o.methods.empty()) kv("methods", quoted(o.methods));
  kv("repeats", std::to_string(o.repeats));
  if (o.lambda) kv("lambda", format_double(*o.lambda));
  if (o.lambda_fraction) kv("lambda-fraction", format_double(*o.lambda_fraction));
  kv("ridge-lambda", format_double(o.ridge_lambda));
  kv("min-abs-rho", format_double(o.min_abs_rho));
  kv("weight-min-relative", format_double(o.weight_min_relative));
  kv("bins", std::to_string(o.bins));
  kv("bootstraps", std::to_string(o.bootstraps));
  kv("bolasso-bootstraps", std::to_string(o.bolasso_bootstraps));
  kv("keep-redundant", o.keep_redundant ? "true" : "false");
  kv("pai-repeats", std::to_string(o.pai_repeats));
  kv("pai-min-relative", format_double(o.pai_min_relative));
  kv("rfe-min-subset", std::to_string(o.rfe_min_subset));
  kv("rfe-inner-fraction", format_double(o.rfe_inner_fraction));
  kv("trees", std::to_string(o.trees));
  kv("max-features", std::to_string(o.max_features));
  kv("min-leaf", std::to_string(o.min_leaf));
  kv("max-depth", std::to_string(o.max_depth));
  kv("n", std::to_string(o.synth_spec.n_samples));
  kv("relevant", std::to_string(o.synth_spec.n_relevant));
  kv("redundant", std::to_string(o.synth_spec.n_redundant));
  kv("noise", std::to_string(o.synth_spec.n_noise));
  kv("noise-sd", format_double(o.synth_spec.noise_sd));
  for (const auto& [key, value] : facts) m << "# " << key << ": " << value << '\n';
  return m.str();
}

std::vector<std::pair<std::string, std::string>> data_facts(const Prepared& p) {
  std::vector<std::pair<std::string, std::string>> facts;
  facts.emplace_back("source", p.source);
  facts.emplace_back("dataset_fingerprint", p.data.fingerprint());
  facts.emplace_back("rows", std::to_string(p.data.n_samples()));
  facts.emplace_back("features", std::to_string(p.data.n_features()));
  facts.emplace_back("positives", std::to_string(p.data.target().positives()));
  if (p.threshold) facts.emplace_back("hotspot_threshold", format_double(*p.threshold));
  return facts;
}

int cmd_rank(const RunOptions& o, std::ostream& out) {
  if (o.method.empty()) throw ConfigError("rank needs --method; choose from: " + method_list());
  const auto method = parse_method(o.method);
  if (!method) throw ConfigError("unknown method '" + o.method + "'; choose from: " + method_list());
  const Prepared p = prepare(o);
  const BenchmarkConfig config = make_config(o, false);
  const FeatureRanking ranking = select_features(*method, p.data, config);

  fs::create_directories(o.out);
  const fs::path file = fs::path(o.out) / (o.method + "_ranking.csv");
  write_ranking_csv(ranking, file);
  auto facts = data_facts(p);
  facts.emplace_back("method_seed", std::to_string(derive_seed(o.seed, method_name(*method))));
  write_text(fs::path(o.out) / "run.manifest", manifest("rank", o, facts));
  out << "wrote " << file.string() << " (" << ranking.selected_names().size() << " of " << ranking.entries.size()
      << " features selected)\n";
  return 0;
}

int cmd_benchmark(const RunOptions& o, std::ostream& out, std::ostream& err) {
  const Prepared p = prepare(o);
  const BenchmarkConfig config = make_config(o, true);
  fs::create_directories(o.out);

  std::ostringstream repeats_csv;
  repeats_csv << "repeat,method,train_auc,validation_auc\n";
  std::optional<BenchmarkReport> first;
  int status = 0;
  for (std::size_t r = 0; r < o.repeats; ++r) {
    const SplitIndices s = split(p.data, o.validation_fraction, derive_seed(o.seed, "split", r));
    BenchmarkReport report = run_benchmark(p.data, s, config);
    auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
    repeats_csv << r << ",baseline," << cell(report.baseline.train_auc) << ',' << cell(report.baseline.validation_auc) << '\n';
    for (const auto& row : report.rows) {
      repeats_csv << r << ',' << row.method << ',' << cell(row.train_auc) << ',' << cell(row.validation_auc) << '\n';
      if (!row.error.empty()) {
        err << "repeat " << r << ": " << row.method << " failed: " << row.error << '\n';
        if (status == 0) status = row.exit_code;
      } else if (row.degenerate) {
        err << "repeat " << r << ": " << row.method << " selected no features\n";
      }
    }
    if (!first) {
      first = std::move(report);
      // Flush the first report before any further repeats.
      write_text(fs::path(o.out) / "report.csv", emit_report(*first, ReportFormat::csv));
      write_text(fs::path(o.out) / "report.md", emit_report(*first, ReportFormat::markdown));
    }
  }
  if (o.repeats > 1) write_text(fs::path(o.out) / "auc_repeats.csv", repeats_csv.str());

  auto facts = data_facts(p);
  for (const auto& kv : first->metadata)
    if (kv.first != "dataset_fingerprint") facts.push_back(kv);
  for (std::size_t r = 0; r < o.repeats; ++r)
    facts.emplace_back("split_seed." + std::to_string(r), std::to_string(derive_seed(o.seed, "split", r)));
  write_text(fs::path(o.out) / "run.manifest", manifest("benchmark", o, facts));
  out << "wrote " << (fs::path(o.out) / "report.csv").string() << " and report.md\n";
  return status;
}

int cmd_synth(const RunOptions& o, std::ostream& out) {
  SynthSpec spec = o.synth_spec;
  spec.seed = derive_seed(o.seed, "synth");
  const SyntheticData s = synthesize(spec);
  fs::create_directories(o.out);
  write_csv(s.data, fs::path(o.out) / "data.csv", o.target);
  write_roles_csv(s.roles, fs::path(o.out) / "roles.csv");
  std::vector<std::pair<std::string, std::string>> facts{{"synth_seed", std::to_string(spec.seed)},
                                                         {"dataset_fingerprint", s.data.fingerprint()}};
  write_text(fs::path(o.out) / "run.manifest", manifest("synth", o, facts));
  out << "wrote " << (fs::path(o.out) / "data.csv").string() << " (" << s.data.n_samples() << " rows, "
      << s.data.n_features() << " features) and roles.csv\n";
  return 0;
}

int cmd_report(const RunOptions& o, std::ostream& out) {
  if (o.input.empty()) throw ConfigError("report needs --input report.csv");
  std::ifstream in(o.input, std::ios::binary);
  if (!in) throw DataError("cannot read '" + o.input + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const BenchmarkReport r = parse_report_csv(text.str());
  out << emit_report(r, o.format == "csv" ? ReportFormat::csv : ReportFormat::markdown);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Feature selection toolkit and random forest benchmark", "featsel"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "key=value config file; command-line flags win");
  app.require_subcommand(1);
  app.fallthrough();
  RunOptions o;
  add_options(app, o);
  auto* rank = app.add_subcommand("rank", "Score and select features with one method");
  auto* bench = app.add_subcommand("benchmark", "Compare methods by random forest AUC");
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset and its column roles");
  auto* report = app.add_subcommand("report", "Render a report.csv as markdown");
  for (auto* sub : {rank, bench, synth, report}) {
    sub->fallthrough();
    sub->footer("Options are shared by every subcommand; run featsel --help to list them.");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  if (*rank && !o.method.empty() && !parse_method(o.method)) {
    err << "error: unknown method '" << o.method << "'; choose from: " << method_list() << "\n"
        << "usage: featsel rank --method NAME (--data FILE [--target COLUMN] | --synth SPEC) [--out DIR]\n"
        << "see featsel --help for every option\n";
    return 1;
  }
  try {
    if (*rank) return cmd_rank(o, out);
    if (*bench) return cmd_benchmark(o, out, err);
    if (*synth) return cmd_synth(o, out);
    return cmd_report(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace featsel
