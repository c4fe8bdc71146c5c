#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psimf/embed.hpp"
#include "psimf/selective.hpp"
#include "psimf/simkit.hpp"

namespace psimf {

enum class ExperimentKind { Type1, PowerN, PowerSep, Robustness };

ExperimentKind parse_experiment_kind(const std::string& name);  // type1, power_n, power_sep, robustness
std::string to_string(ExperimentKind kind);

struct OutputPaths {
  std::string json;
  std::string csv;
  std::string qq_csv;
  std::string power_csv;
  std::string svg;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Type1;
  Index replicates = 200;
  std::uint64_t seed = 12345;
  double alpha = 0.05;
  /// plan.seed is ignored; each replicate gets a derived seed.
  SamplingPlan plan;
  Kernel kernel = RationalQuadratic{1.0};
  MisspecProcess misspec = Wiener{};
  BasisSpec basis;
  /// test.seed is ignored; each replicate gets a derived seed.
  TestConfig test;
  /// Groups get means +separation and -separation (power_n only).
  double separation = 10.0;
  /// n values for power_n, separations for power_sep.
  std::vector<double> sweep;
  OutputPaths outputs;

  void validate() const;
};

/// Desk-scale defaults for each experiment.
ExperimentConfig default_config(ExperimentKind kind);
/// The published scale (n = 10000 per calibration replicate), which takes hours.
ExperimentConfig full_scale_config(ExperimentKind kind);

/// JSON text of the config, and its inverse. Unknown keys raise ConfigError.
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct ReplicateSeeds {
  std::uint64_t data;
  std::uint64_t test;
};
/// Seeds of replicate k at sweep point `point` (0 for experiments without a sweep).
ReplicateSeeds replicate_seeds(std::uint64_t master, Index point, Index replicate);

struct ReplicateResult {
  Index index = 0;
  Index point = 0;
  double sweep_value = 0.0;
  bool ok = true;
  /// Error kind and message of an excluded replicate.
  std::string error;
  double p_selective = 1.0;
  double p_wald = 1.0;
  double statistic = 0.0;
  Index size_c1 = 0;
  Index size_c2 = 0;
  Index n_in_truncation = 0;
  double effective_sample_size = 0.0;
  double standard_error = 0.0;
  double wall_seconds = 0.0;
};

struct QqRow {
  double theoretical;
  double observed;
};

struct UniformitySummary {
  Index used = 0;
  Index excluded = 0;
  double exclusion_rate = 0.0;
  double ks_selective = 0.0;
  double ks_wald = 0.0;
  double rejection_rate_alpha05 = 0.0;       // selective, p < 0.05
  double wald_rejection_rate_alpha05 = 0.0;
  double rejection_rate = 0.0;               // selective, p < config alpha
  std::vector<QqRow> qq_selective;
  std::vector<QqRow> qq_wald;
};

struct PowerRow {
  double value = 0.0;
  Index used = 0;
  Index excluded = 0;
  Index rejections = 0;
  double power = 0.0;
  double standard_error = 0.0;  // binomial
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ReplicateResult> replicates;
  UniformitySummary summary;   // over all included replicates
  std::vector<PowerRow> power; // power experiments only
};

/// Kolmogorov-Smirnov distance of the sample from U[0,1]; 0 for an empty sample.
double ks_uniform(std::vector<double> values);
/// k-th sorted value against (k - 0.5) / N.
std::vector<QqRow> qq_table(std::vector<double> values);

/// Runs the experiment named by config.kind.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_type1_experiment(const ExperimentConfig& config);
ExperimentResult run_power_experiment(const ExperimentConfig& config);
ExperimentResult run_robustness_experiment(const ExperimentConfig& config);

enum class ReportFormat { Json, Csv };

/// JSON: config echo, master seed, version, replicate rows, summary (and power table).
/// CSV: replicate table only.
void emit_report(const ExperimentResult& result, ReportFormat format, const std::string& path);
std::string report_json(const ExperimentResult& result);
std::string replicate_csv(const ExperimentResult& result);
std::string qq_csv(const ExperimentResult& result);
std::string power_csv(const ExperimentResult& result);
/// Self-contained SVG QQ plot of the selective (and Wald) p-values.
std::string qq_svg(const ExperimentResult& result);

/// Config echoed in a JSON report, including its master seed.
ExperimentConfig config_from_report(const std::string& report_text);

/// Writes every output named in config.outputs.
void write_outputs(const ExperimentResult& result);

}  // namespace psimf
