#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "psimf/experiment.hpp"
#include "psimf/io.hpp"
#include "psimf/selective.hpp"
#include "psimf/simkit.hpp"

namespace {

using namespace psimf;
using json = nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::ConfigError:
    case ErrorKind::OrderTooLarge:
      return kExitConfig;
    case ErrorKind::DimensionMismatch:
    case ErrorKind::ParseError:
    case ErrorKind::TimeOutOfRange:
    case ErrorKind::EmptyRecord:
    case ErrorKind::IoError:
      return kExitData;
    default:
      return kExitNumeric;
  }
}

// Flag beats PSIMF_SEED, which beats the config value.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t config_value) {
  if (flag) return *flag;
  if (const char* env = std::getenv("PSIMF_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(env, &used, 0);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigError, std::string("PSIMF_SEED is not an integer: ") + env);
    }
  }
  return config_value;
}

Kernel kernel_from_name(const std::string& name, double length_scale, double rho) {
  if (name == "rq") return RationalQuadratic{length_scale};
  if (name == "periodic") return Periodic{};
  if (name == "tlp") return TruncatedLocalPeriodic{};
  if (name == "rbf") return Rbf{rho};
  throw Error(ErrorKind::ConfigError, "unknown kernel '" + name + "'");
}

ClustererSpec::Kind clusterer_from_name(const std::string& name) {
  if (name == "kmeans") return ClustererSpec::Kind::KMeans;
  if (name == "hierarchical") return ClustererSpec::Kind::Hierarchical;
  throw Error(ErrorKind::ConfigError, "unknown clusterer '" + name + "'");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  out << text;
}

struct SimulateArgs {
  Index n = 200, m = 1, r = 15;
  double noise_var = 0.1;
  std::optional<std::uint64_t> seed;
  std::string kernel = "rq";
  double length_scale = 1.0;
  double rho = 0.99;
  double separation = 0.0;
  std::string misspec = "none";
  double drift = 0.0, vol = 1.0, theta = 1.0, ou_mean = 0.0;
  bool shared_times = false;
  std::string out = "-";
};

int run_simulate(const SimulateArgs& a) {
  SamplingPlan plan;
  plan.n = a.n;
  plan.m = a.m;
  plan.r = a.r;
  plan.noise_var = {a.noise_var};
  plan.shared_times = a.shared_times;
  plan.seed = resolve_seed(a.seed, 0);
  plan.validate();
  LongitudinalDataset data;
  if (a.misspec == "none") {
    const MeanSpec mean = a.separation != 0.0 ? MeanSpec::two_groups(a.separation, -a.separation, a.n / 2)
                                              : MeanSpec::zero();
    data = generate_dataset(kernel_from_name(a.kernel, a.length_scale, a.rho), mean, plan);
  } else {
    MisspecProcess process;
    if (a.misspec == "wiener") process = Wiener{};
    else if (a.misspec == "exponential_brownian") process = ExponentialBrownian{a.drift, a.vol};
    else if (a.misspec == "ornstein_uhlenbeck") process = OrnsteinUhlenbeck{a.theta, a.ou_mean, a.vol};
    else throw Error(ErrorKind::ConfigError, "unknown misspec '" + a.misspec + "'");
    data = generate_misspecified_dataset(process, plan);
  }
  std::ostringstream ss;
  write_csv(ss, data);
  write_text(a.out, ss.str());
  return 0;
}

struct TestArgs {
  std::string input;
  bool normalize_time = false;
  int q = 3;
  double rho = 0.99, lambda = 0.01;
  Index mc_samples = 1000;
  std::optional<std::uint64_t> seed;
  std::string clusterer = "kmeans";
  std::string linkage = "ward";
  int restarts = 10;
  int max_iters = 100;
  std::string out = "-";
};

int run_test(const TestArgs& a) {
  const LongitudinalDataset data = ingest_csv(a.input, {a.normalize_time});
  const BasisSpec basis = BasisSpec::hermite(a.q, a.rho, a.lambda);
  TestConfig config;
  config.mc_samples = a.mc_samples;
  config.seed = resolve_seed(a.seed, 0);
  config.clusterer.kind = clusterer_from_name(a.clusterer);
  config.clusterer.linkage = parse_linkage(a.linkage);
  config.clusterer.restarts = a.restarts;
  config.clusterer.max_iters = a.max_iters;
  const SelectiveTestReport rep = run_psimf(data, basis, config);
  json j = {{"version", kVersion},
            {"seed", config.seed},
            {"n", data.n()},
            {"m", data.m()},
            {"p_selective", rep.p_selective},
            {"p_wald", rep.p_wald},
            {"statistic", rep.statistic},
            {"dof", rep.dof},
            {"mc_samples", rep.mc_samples},
            {"n_in_truncation", rep.n_in_truncation},
            {"effective_sample_size", rep.effective_sample_size},
            {"standard_error", rep.standard_error},
            {"degenerate_direction", rep.degenerate_direction},
            {"cluster_1", rep.partition.c1},
            {"cluster_2", rep.partition.c2}};
  write_text(a.out, j.dump(2) + "\n");
  return 0;
}

struct ExperimentArgs {
  std::string kind;
  std::string config;
  std::string from_report;
  std::string preset = "desk";
  std::optional<Index> replicates, n, mc_samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> clusterer, linkage;
  std::optional<int> restarts;
  std::vector<double> sweep;
  std::optional<std::string> json_out, csv_out, qq_out, power_out, svg_out;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  ExperimentConfig c;
  if (!a.from_report.empty()) {
    std::ifstream in(a.from_report, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open '" + a.from_report + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    c = config_from_report(ss.str());
  } else if (!a.config.empty()) {
    c = load_config(a.config);
  } else {
    const ExperimentKind kind = parse_experiment_kind(a.kind);
    if (a.preset == "desk") c = default_config(kind);
    else if (a.preset == "full") c = full_scale_config(kind);
    else throw Error(ErrorKind::ConfigError, "unknown preset '" + a.preset + "'");
  }
  if (c.kind != parse_experiment_kind(a.kind))
    throw Error(ErrorKind::ConfigError, "config describes a " + to_string(c.kind) + " experiment, not " + a.kind);
  if (a.replicates) c.replicates = *a.replicates;
  if (a.n) c.plan.n = *a.n;
  if (a.mc_samples) c.test.mc_samples = *a.mc_samples;
  if (a.clusterer) c.test.clusterer.kind = clusterer_from_name(*a.clusterer);
  if (a.linkage) c.test.clusterer.linkage = parse_linkage(*a.linkage);
  if (a.restarts) c.test.clusterer.restarts = *a.restarts;
  if (!a.sweep.empty()) c.sweep = a.sweep;
  if (a.json_out) c.outputs.json = *a.json_out;
  if (a.csv_out) c.outputs.csv = *a.csv_out;
  if (a.qq_out) c.outputs.qq_csv = *a.qq_out;
  if (a.power_out) c.outputs.power_csv = *a.power_out;
  if (a.svg_out) c.outputs.svg = *a.svg_out;
  // A re-run keeps the echoed seed unless a flag overrides it.
  c.seed = a.from_report.empty() ? resolve_seed(a.seed, c.seed) : a.seed.value_or(c.seed);
  c.validate();

  const ExperimentResult result = run_experiment(c);
  write_outputs(result);
  const UniformitySummary& s = result.summary;
  std::cerr << to_string(c.kind) << ": seed " << c.seed << ", " << result.replicates.size() << " replicates, "
            << s.excluded << " excluded\n";
  if (result.power.empty()) {
    std::cerr << "  KS selective " << s.ks_selective << ", KS Wald " << s.ks_wald << ", selective p<0.05 "
              << s.rejection_rate_alpha05 << ", Wald p<0.05 " << s.wald_rejection_rate_alpha05 << "\n";
  } else {
    for (const PowerRow& p : result.power)
      std::cerr << "  " << p.value << ": power " << p.power << " (se " << p.standard_error << ", " << p.used
                << " used)\n";
  }
  if (c.outputs.json.empty()) std::cout << report_json(result) << "\n";
  return 0;
}

int run_ingest_check(const std::string& input, bool normalize_time) {
  const LongitudinalDataset data = ingest_csv(input, {normalize_time});
  Index shortest = std::numeric_limits<Index>::max(), longest = 0, total = 0;
  for (Index i = 0; i < data.n(); ++i)
    for (Index j = 0; j < data.m(); ++j) {
      const Index len = data.length(i, j);
      shortest = std::min(shortest, len);
      longest = std::max(longest, len);
      total += len;
    }
  json j = {{"n", data.n()},
            {"m", data.m()},
            {"observations", total},
            {"min_record_length", shortest},
            {"max_record_length", longest}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective inference after clustering multi-feature functional data"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Draw a dataset and write it as CSV");
  simulate->add_option("--n", sim.n, "Subjects")->check(CLI::PositiveNumber);
  simulate->add_option("--m", sim.m, "Features")->check(CLI::PositiveNumber);
  simulate->add_option("--r", sim.r, "Observations per record")->check(CLI::PositiveNumber);
  simulate->add_option("--noise-var", sim.noise_var, "Measurement noise variance");
  simulate->add_option("--seed", sim.seed, "Seed (overrides PSIMF_SEED)");
  simulate->add_option("--kernel", sim.kernel, "rq, periodic, tlp or rbf");
  simulate->add_option("--length-scale", sim.length_scale, "Rational quadratic length scale");
  simulate->add_option("--rho", sim.rho, "RBF kernel parameter");
  simulate->add_option("--separation", sim.separation, "Group means +k and -k (0 gives a global null)");
  simulate->add_option("--misspec", sim.misspec, "none, wiener, exponential_brownian or ornstein_uhlenbeck");
  simulate->add_option("--drift", sim.drift);
  simulate->add_option("--vol", sim.vol);
  simulate->add_option("--theta", sim.theta);
  simulate->add_option("--ou-mean", sim.ou_mean);
  simulate->add_flag("--shared-times", sim.shared_times, "One time grid per feature for all subjects");
  simulate->add_option("-o,--out", sim.out, "Output CSV ('-' for stdout)");

  TestArgs test;
  auto* test_cmd = app.add_subcommand("test", "Cluster one CSV dataset into two groups and test the split");
  test_cmd->add_option("input", test.input, "CSV with subject_id,feature_id,time,value")->required();
  test_cmd->add_flag("--normalize-time", test.normalize_time);
  test_cmd->add_option("--q", test.q, "Basis functions per feature");
  test_cmd->add_option("--rho", test.rho);
  test_cmd->add_option("--lambda", test.lambda, "Ridge penalty");
  test_cmd->add_option("--mc-samples", test.mc_samples);
  test_cmd->add_option("--seed", test.seed);
  test_cmd->add_option("--clusterer", test.clusterer, "kmeans or hierarchical");
  test_cmd->add_option("--linkage", test.linkage, "ward, complete or average");
  test_cmd->add_option("--restarts", test.restarts);
  test_cmd->add_option("--max-iters", test.max_iters);
  test_cmd->add_option("-o,--out", test.out, "Report path ('-' for stdout)");

  ExperimentArgs exp;
  auto* experiment = app.add_subcommand("experiment", "Run a simulation study");
  experiment->add_option("kind", exp.kind, "type1, power-n, power-sep or robustness")
      ->required()
      ->check(CLI::IsMember({"type1", "power-n", "power-sep", "robustness", "power_n", "power_sep"}));
  experiment->add_option("--config", exp.config, "JSON config");
  experiment->add_option("--from-report", exp.from_report, "Re-run the config echoed in a JSON report");
  experiment->add_option("--preset", exp.preset, "desk or full (ignored with --config)");
  experiment->add_option("--replicates", exp.replicates);
  experiment->add_option("--n", exp.n);
  experiment->add_option("--mc-samples", exp.mc_samples);
  experiment->add_option("--seed", exp.seed);
  experiment->add_option("--clusterer", exp.clusterer);
  experiment->add_option("--linkage", exp.linkage);
  experiment->add_option("--restarts", exp.restarts);
  experiment->add_option("--sweep", exp.sweep)->delimiter(',');
  experiment->add_option("--json", exp.json_out, "JSON report path");
  experiment->add_option("--csv", exp.csv_out, "Replicate table path");
  experiment->add_option("--qq-csv", exp.qq_out, "QQ table path");
  experiment->add_option("--power-csv", exp.power_out, "Power table path");
  experiment->add_option("--svg", exp.svg_out, "QQ plot path");

  std::string check_input;
  bool check_normalize = false;
  auto* ingest = app.add_subcommand("ingest-check", "Validate a CSV dataset and summarise its shape");
  ingest->add_option("input", check_input)->required();
  ingest->add_flag("--normalize-time", check_normalize);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*test_cmd) return run_test(test);
    if (*experiment) return run_experiment_cmd(exp);
    if (*ingest) return run_ingest_check(check_input, check_normalize);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
