#include "psimf/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <sstream>
#include <string_view>

#include <json.hpp>

namespace psimf {

using json = nlohmann::json;

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "type1") return ExperimentKind::Type1;
  if (name == "power_n" || name == "power-n") return ExperimentKind::PowerN;
  if (name == "power_sep" || name == "power-sep") return ExperimentKind::PowerSep;
  if (name == "robustness") return ExperimentKind::Robustness;
  throw Error(ErrorKind::ConfigError, "unknown experiment '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Type1: return "type1";
    case ExperimentKind::PowerN: return "power_n";
    case ExperimentKind::PowerSep: return "power_sep";
    case ExperimentKind::Robustness: return "robustness";
  }
  return "type1";
}

namespace {

bool is_power(ExperimentKind kind) { return kind == ExperimentKind::PowerN || kind == ExperimentKind::PowerSep; }

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); };
  if (replicates < 1) fail("replicates must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0,1)");
  if (is_power(kind) && sweep.empty()) fail("power experiments need a non-empty sweep");
  if (kind == ExperimentKind::PowerN)
    for (double v : sweep)
      if (v < 4.0 || v != std::floor(v)) fail("power_n sweep values must be integers >= 4");
  try {
    SamplingPlan p = plan;
    if (kind == ExperimentKind::PowerN) p.n = static_cast<Index>(sweep.front());
    p.validate();
    basis.validate();
    test.validate();
  } catch (const Error& e) {
    fail(e.detail());
  }
  if (kind != ExperimentKind::PowerN && plan.n < 4) fail("plan.n must be >= 4");
  if (const auto* eb = std::get_if<ExponentialBrownian>(&misspec); eb && !(eb->vol >= 0.0))
    fail("misspec vol must be >= 0");
  if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&misspec); ou && !(ou->theta > 0.0 && ou->vol >= 0.0))
    fail("misspec theta must be > 0 and vol >= 0");
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.plan.n = 200;
  c.plan.m = 1;
  c.plan.r = 15;
  c.plan.noise_var = {0.1};
  c.basis = BasisSpec::hermite(3, 0.99, 0.01);
  c.test.mc_samples = 1000;
  switch (kind) {
    case ExperimentKind::Type1:
      c.replicates = 200;
      break;
    case ExperimentKind::Robustness:
      c.replicates = 100;
      break;
    case ExperimentKind::PowerN:
      c.replicates = 50;
      c.separation = 10.0;
      c.sweep = {40, 50, 60, 70, 80, 90, 100};
      break;
    case ExperimentKind::PowerSep:
      c.replicates = 50;
      c.plan.n = 80;
      c.sweep = {3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5};
      break;
  }
  return c;
}

ExperimentConfig full_scale_config(ExperimentKind kind) {
  ExperimentConfig c = default_config(kind);
  if (kind == ExperimentKind::Type1 || kind == ExperimentKind::Robustness) {
    c.plan.n = 10000;
    c.replicates = 100;
  } else {
    c.replicates = 100;
  }
  return c;
}

// ---------------------------------------------------------------------------
// JSON config

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, where + " must be an object");
  for (const auto& item : j.items())
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw Error(ErrorKind::ConfigError, "unknown key '" + item.key() + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("bad value for '") + key + "': " + e.what());
  }
}

json kernel_to_json(const Kernel& kernel) {
  return std::visit(
      [](const auto& k) -> json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, RationalQuadratic>) {
          return {{"type", "rational_quadratic"}, {"length_scale", k.length_scale}};
        } else if constexpr (std::is_same_v<K, Periodic>) {
          return {{"type", "periodic"}};
        } else if constexpr (std::is_same_v<K, TruncatedLocalPeriodic>) {
          return {{"type", "truncated_local_periodic"}};
        } else if constexpr (std::is_same_v<K, Rbf>) {
          return {{"type", "rbf"}, {"rho", k.rho}};
        } else {
          json rows = json::array();
          for (Index i = 0; i < k.values.rows(); ++i) {
            json row = json::array();
            for (Index j = 0; j < k.values.cols(); ++j) row.push_back(k.values(i, j));
            rows.push_back(std::move(row));
          }
          return {{"type", "tabulated"}, {"values", rows}};
        }
      },
      kernel);
}

Kernel kernel_from_json(const json& j) {
  check_keys(j, {"type", "length_scale", "rho", "values"}, "kernel");
  std::string type;
  read(j, "type", type);
  if (type == "rational_quadratic") {
    RationalQuadratic k;
    read(j, "length_scale", k.length_scale);
    if (!(k.length_scale > 0.0)) throw Error(ErrorKind::ConfigError, "length_scale must be > 0");
    return k;
  }
  if (type == "periodic") return Periodic{};
  if (type == "truncated_local_periodic") return TruncatedLocalPeriodic{};
  if (type == "rbf") {
    Rbf k;
    read(j, "rho", k.rho);
    if (!(k.rho > 0.0 && k.rho < 1.0)) throw Error(ErrorKind::ConfigError, "rbf rho must lie in (0,1)");
    return k;
  }
  if (type == "tabulated") {
    std::vector<std::vector<double>> rows;
    read(j, "values", rows);
    const Index g = static_cast<Index>(rows.size());
    if (g < 2) throw Error(ErrorKind::ConfigError, "tabulated kernel needs a grid of at least 2x2");
    Tabulated k{MatrixXd(g, g)};
    for (Index i = 0; i < g; ++i) {
      if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != g)
        throw Error(ErrorKind::ConfigError, "tabulated kernel grid must be square");
      for (Index c = 0; c < g; ++c) k.values(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    }
    return k;
  }
  throw Error(ErrorKind::ConfigError, "unknown kernel type '" + type + "'");
}

json misspec_to_json(const MisspecProcess& process) {
  return std::visit(
      [](const auto& p) -> json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Wiener>) {
          return {{"type", "wiener"}};
        } else if constexpr (std::is_same_v<P, ExponentialBrownian>) {
          return {{"type", "exponential_brownian"}, {"drift", p.drift}, {"vol", p.vol}};
        } else {
          return {{"type", "ornstein_uhlenbeck"}, {"theta", p.theta}, {"mean", p.mean}, {"vol", p.vol}};
        }
      },
      process);
}

MisspecProcess misspec_from_json(const json& j) {
  check_keys(j, {"type", "drift", "vol", "theta", "mean"}, "misspec");
  std::string type;
  read(j, "type", type);
  if (type == "wiener") return Wiener{};
  if (type == "exponential_brownian") {
    ExponentialBrownian p;
    read(j, "drift", p.drift);
    read(j, "vol", p.vol);
    return p;
  }
  if (type == "ornstein_uhlenbeck") {
    OrnsteinUhlenbeck p;
    read(j, "theta", p.theta);
    read(j, "mean", p.mean);
    read(j, "vol", p.vol);
    return p;
  }
  throw Error(ErrorKind::ConfigError, "unknown misspec type '" + type + "'");
}

json config_json(const ExperimentConfig& c) {
  json plan = {{"n", c.plan.n},
               {"m", c.plan.m},
               {"r", c.plan.r},
               {"noise_var", c.plan.noise_var},
               {"shared_times", c.plan.shared_times}};
  if (!c.plan.r_per_record.empty()) plan["r_per_record"] = c.plan.r_per_record;
  if (c.basis.variant != BasisSpec::Variant::HermiteRbf)
    throw Error(ErrorKind::ConfigError, "only the Hermite basis can be written to a config");
  const bool kmeans = c.test.clusterer.kind == ClustererSpec::Kind::KMeans;
  return {{"experiment", to_string(c.kind)},
          {"replicates", c.replicates},
          {"seed", c.seed},
          {"alpha", c.alpha},
          {"plan", plan},
          {"kernel", kernel_to_json(c.kernel)},
          {"misspec", misspec_to_json(c.misspec)},
          {"basis", {{"q", c.basis.q}, {"rho", c.basis.rho}, {"lambda", c.basis.lambda}}},
          {"test",
           {{"mc_samples", c.test.mc_samples},
            {"clusterer", kmeans ? "kmeans" : "hierarchical"},
            {"linkage", to_string(c.test.clusterer.linkage)},
            {"max_iters", c.test.clusterer.max_iters},
            {"restarts", c.test.clusterer.restarts},
            {"min_effective_denominator", c.test.min_effective_denominator}}},
          {"separation", c.separation},
          {"sweep", c.sweep},
          {"outputs",
           {{"json", c.outputs.json},
            {"csv", c.outputs.csv},
            {"qq_csv", c.outputs.qq_csv},
            {"power_csv", c.outputs.power_csv},
            {"svg", c.outputs.svg}}}};
}

ExperimentConfig config_from(const json& j) {
  check_keys(j,
             {"experiment", "replicates", "seed", "alpha", "plan", "kernel", "misspec", "basis", "test",
              "separation", "sweep", "outputs"},
             "config");
  ExperimentKind kind = ExperimentKind::Type1;
  if (j.contains("experiment")) {
    std::string name;
    read(j, "experiment", name);
    kind = parse_experiment_kind(name);
  }
  ExperimentConfig c = default_config(kind);
  read(j, "replicates", c.replicates);
  read(j, "seed", c.seed);
  read(j, "alpha", c.alpha);
  read(j, "separation", c.separation);
  read(j, "sweep", c.sweep);
  if (j.contains("plan")) {
    const json& p = j.at("plan");
    check_keys(p, {"n", "m", "r", "r_per_record", "noise_var", "shared_times"}, "plan");
    read(p, "n", c.plan.n);
    read(p, "m", c.plan.m);
    read(p, "r", c.plan.r);
    read(p, "r_per_record", c.plan.r_per_record);
    read(p, "noise_var", c.plan.noise_var);
    read(p, "shared_times", c.plan.shared_times);
  }
  if (j.contains("kernel")) c.kernel = kernel_from_json(j.at("kernel"));
  if (j.contains("misspec")) c.misspec = misspec_from_json(j.at("misspec"));
  if (j.contains("basis")) {
    const json& b = j.at("basis");
    check_keys(b, {"q", "rho", "lambda"}, "basis");
    read(b, "q", c.basis.q);
    read(b, "rho", c.basis.rho);
    read(b, "lambda", c.basis.lambda);
  }
  if (j.contains("test")) {
    const json& t = j.at("test");
    check_keys(t, {"mc_samples", "clusterer", "linkage", "max_iters", "restarts", "min_effective_denominator"},
               "test");
    read(t, "mc_samples", c.test.mc_samples);
    read(t, "max_iters", c.test.clusterer.max_iters);
    read(t, "restarts", c.test.clusterer.restarts);
    read(t, "min_effective_denominator", c.test.min_effective_denominator);
    if (t.contains("clusterer")) {
      std::string name;
      read(t, "clusterer", name);
      if (name == "kmeans") c.test.clusterer.kind = ClustererSpec::Kind::KMeans;
      else if (name == "hierarchical") c.test.clusterer.kind = ClustererSpec::Kind::Hierarchical;
      else throw Error(ErrorKind::ConfigError, "unknown clusterer '" + name + "'");
    }
    if (t.contains("linkage")) {
      std::string name;
      read(t, "linkage", name);
      c.test.clusterer.linkage = parse_linkage(name);
    }
  }
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    check_keys(o, {"json", "csv", "qq_csv", "power_csv", "svg"}, "outputs");
    read(o, "json", c.outputs.json);
    read(o, "csv", c.outputs.csv);
    read(o, "qq_csv", c.outputs.qq_csv);
    read(o, "power_csv", c.outputs.power_csv);
    read(o, "svg", c.outputs.svg);
  }
  c.validate();
  return c;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("invalid JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) { return config_json(config).dump(2); }

ExperimentConfig config_from_json(const std::string& text) { return config_from(parse_json(text)); }

ExperimentConfig load_config(const std::string& path) { return config_from_json(read_file(path)); }

ExperimentConfig config_from_report(const std::string& report_text) {
  const json report = parse_json(report_text);
  if (!report.contains("config")) throw Error(ErrorKind::ConfigError, "report has no config echo");
  ExperimentConfig c = config_from(report.at("config"));
  if (report.contains("seed")) read(report, "seed", c.seed);
  return c;
}

// ---------------------------------------------------------------------------
// Drivers

ReplicateSeeds replicate_seeds(std::uint64_t master, Index point, Index replicate) {
  const std::uint64_t base = derive_seed(derive_seed(master, static_cast<std::uint64_t>(point)),
                                         static_cast<std::uint64_t>(replicate));
  return {derive_seed(base, 0), derive_seed(base, 1)};
}

double ks_uniform(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double p = std::clamp(values[k], 0.0, 1.0);
    d = std::max({d, static_cast<double>(k + 1) / n - p, p - static_cast<double>(k) / n});
  }
  return d;
}

std::vector<QqRow> qq_table(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<QqRow> out;
  out.reserve(values.size());
  const double n = static_cast<double>(values.size());
  for (std::size_t k = 0; k < values.size(); ++k)
    out.push_back({(static_cast<double>(k) + 0.5) / n, values[k]});
  return out;
}

namespace {

// Replicate failures that are recorded and excluded instead of aborting the experiment.
bool excludable(ErrorKind kind) {
  return kind == ErrorKind::EmptyTruncation || kind == ErrorKind::DegenerateCovariance;
}

template <typename MakeData>
ReplicateResult run_replicate(const ExperimentConfig& config, Index point, double value, Index k,
                              MakeData&& make_data) {
  const auto start = std::chrono::steady_clock::now();
  const ReplicateSeeds seeds = replicate_seeds(config.seed, point, k);
  ReplicateResult row;
  row.index = k;
  row.point = point;
  row.sweep_value = value;
  TestConfig test = config.test;
  test.seed = seeds.test;
  try {
    const LongitudinalDataset data = make_data(seeds.data);
    const SelectiveTestReport rep = run_psimf(data, config.basis, test);
    row.p_selective = rep.p_selective;
    row.p_wald = rep.p_wald;
    row.statistic = rep.statistic;
    row.size_c1 = static_cast<Index>(rep.partition.c1.size());
    row.size_c2 = static_cast<Index>(rep.partition.c2.size());
    row.n_in_truncation = rep.n_in_truncation;
    row.effective_sample_size = rep.effective_sample_size;
    row.standard_error = rep.standard_error;
  } catch (const Error& e) {
    if (!excludable(e.kind())) throw;
    row.ok = false;
    row.error = e.what();
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

UniformitySummary summarize(const std::vector<ReplicateResult>& rows, double alpha) {
  UniformitySummary s;
  std::vector<double> sel, wald;
  for (const ReplicateResult& r : rows) {
    if (!r.ok) {
      ++s.excluded;
      continue;
    }
    sel.push_back(r.p_selective);
    wald.push_back(r.p_wald);
  }
  s.used = static_cast<Index>(sel.size());
  s.exclusion_rate = rows.empty() ? 0.0 : static_cast<double>(s.excluded) / static_cast<double>(rows.size());
  s.ks_selective = ks_uniform(sel);
  s.ks_wald = ks_uniform(wald);
  auto rate = [](const std::vector<double>& v, double level) {
    if (v.empty()) return 0.0;
    return static_cast<double>(std::count_if(v.begin(), v.end(), [&](double p) { return p < level; })) /
           static_cast<double>(v.size());
  };
  s.rejection_rate_alpha05 = rate(sel, 0.05);
  s.wald_rejection_rate_alpha05 = rate(wald, 0.05);
  s.rejection_rate = rate(sel, alpha);
  s.qq_selective = qq_table(sel);
  s.qq_wald = qq_table(wald);
  return s;
}

SamplingPlan plan_with_seed(const ExperimentConfig& config, std::uint64_t seed) {
  SamplingPlan plan = config.plan;
  plan.seed = seed;
  return plan;
}

}  // namespace

ExperimentResult run_type1_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result{config, {}, {}, {}};
  for (Index k = 0; k < config.replicates; ++k) {
    result.replicates.push_back(run_replicate(config, 0, 0.0, k, [&](std::uint64_t seed) {
      return generate_dataset(config.kernel, MeanSpec::zero(), plan_with_seed(config, seed));
    }));
  }
  result.summary = summarize(result.replicates, config.alpha);
  return result;
}

ExperimentResult run_robustness_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result{config, {}, {}, {}};
  for (Index k = 0; k < config.replicates; ++k) {
    result.replicates.push_back(run_replicate(config, 0, 0.0, k, [&](std::uint64_t seed) {
      return generate_misspecified_dataset(config.misspec, plan_with_seed(config, seed));
    }));
  }
  result.summary = summarize(result.replicates, config.alpha);
  return result;
}

ExperimentResult run_power_experiment(const ExperimentConfig& config) {
  config.validate();
  if (!is_power(config.kind)) throw Error(ErrorKind::ConfigError, "not a power experiment");
  ExperimentResult result{config, {}, {}, {}};
  for (std::size_t point = 0; point < config.sweep.size(); ++point) {
    const double value = config.sweep[point];
    SamplingPlan plan = config.plan;
    double separation = config.separation;
    if (config.kind == ExperimentKind::PowerN) plan.n = static_cast<Index>(value);
    else separation = value;
    const MeanSpec mean = MeanSpec::two_groups(separation, -separation, plan.n / 2);

    PowerRow row;
    row.value = value;
    for (Index k = 0; k < config.replicates; ++k) {
      ReplicateResult rep = run_replicate(config, static_cast<Index>(point), value, k, [&](std::uint64_t seed) {
        SamplingPlan p = plan;
        p.seed = seed;
        return generate_dataset(config.kernel, mean, p);
      });
      if (rep.ok) {
        ++row.used;
        row.rejections += rep.p_selective < config.alpha ? 1 : 0;
      } else {
        ++row.excluded;
      }
      result.replicates.push_back(std::move(rep));
    }
    if (row.used > 0) {
      row.power = static_cast<double>(row.rejections) / static_cast<double>(row.used);
      row.standard_error = std::sqrt(row.power * (1.0 - row.power) / static_cast<double>(row.used));
    }
    result.power.push_back(row);
  }
  result.summary = summarize(result.replicates, config.alpha);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::Type1: return run_type1_experiment(config);
    case ExperimentKind::Robustness: return run_robustness_experiment(config);
    case ExperimentKind::PowerN:
    case ExperimentKind::PowerSep: return run_power_experiment(config);
  }
  throw Error(ErrorKind::ConfigError, "unknown experiment");
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

json qq_json(const std::vector<QqRow>& rows) {
  json out = json::array();
  for (const QqRow& r : rows) out.push_back({r.theoretical, r.observed});
  return out;
}

}  // namespace

std::string report_json(const ExperimentResult& result) {
  if (result.replicates.empty()) throw Error(ErrorKind::InvalidArgument, "empty experiment result");
  json rows = json::array();
  for (const ReplicateResult& r : result.replicates) {
    json row = {{"index", r.index},
                {"point", r.point},
                {"sweep_value", r.sweep_value},
                {"ok", r.ok},
                {"wall_seconds", r.wall_seconds}};
    if (r.ok) {
      row["p_selective"] = r.p_selective;
      row["p_wald"] = r.p_wald;
      row["statistic"] = r.statistic;
      row["size_c1"] = r.size_c1;
      row["size_c2"] = r.size_c2;
      row["n_in_truncation"] = r.n_in_truncation;
      row["effective_sample_size"] = r.effective_sample_size;
      row["standard_error"] = r.standard_error;
    } else {
      row["error"] = r.error;
    }
    rows.push_back(std::move(row));
  }
  const UniformitySummary& s = result.summary;
  json report = {{"version", kVersion},
                 {"seed", result.config.seed},
                 {"config", config_json(result.config)},
                 {"replicates", rows},
                 {"summary",
                  {{"ks_selective", s.ks_selective},
                   {"ks_wald", s.ks_wald},
                   {"rejection_rate_alpha05", s.rejection_rate_alpha05},
                   {"wald_rejection_rate_alpha05", s.wald_rejection_rate_alpha05},
                   {"rejection_rate_alpha", s.rejection_rate},
                   {"used_count", s.used},
                   {"excluded_count", s.excluded},
                   {"exclusion_rate", s.exclusion_rate}}},
                 {"qq", {{"selective", qq_json(s.qq_selective)}, {"wald", qq_json(s.qq_wald)}}}};
  if (!result.power.empty()) {
    json power = json::array();
    for (const PowerRow& p : result.power)
      power.push_back({{"value", p.value},
                       {"used", p.used},
                       {"excluded", p.excluded},
                       {"rejections", p.rejections},
                       {"power", p.power},
                       {"standard_error", p.standard_error}});
    report["power"] = std::move(power);
  }
  return report.dump(2);
}

std::string replicate_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "index,point,sweep_value,ok,p_selective,p_wald,statistic,size_c1,size_c2,n_in_truncation,"
         "effective_sample_size,standard_error,wall_seconds,error\n";
  for (const ReplicateResult& r : result.replicates) {
    out << r.index << ',' << r.point << ',' << num(r.sweep_value) << ',' << (r.ok ? 1 : 0) << ',';
    if (r.ok) {
      out << num(r.p_selective) << ',' << num(r.p_wald) << ',' << num(r.statistic) << ',' << r.size_c1 << ','
          << r.size_c2 << ',' << r.n_in_truncation << ',' << num(r.effective_sample_size) << ','
          << num(r.standard_error);
    } else {
      out << ",,,,,,,";
    }
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << ',' << num(r.wall_seconds) << ',' << err << '\n';
  }
  return out.str();
}

std::string qq_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "rank,theoretical,p_selective,p_wald\n";
  const auto& sel = result.summary.qq_selective;
  const auto& wald = result.summary.qq_wald;
  for (std::size_t k = 0; k < sel.size(); ++k)
    out << k + 1 << ',' << num(sel[k].theoretical) << ',' << num(sel[k].observed) << ',' << num(wald[k].observed)
        << '\n';
  return out.str();
}

std::string power_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "value,used,excluded,rejections,power,standard_error\n";
  for (const PowerRow& p : result.power)
    out << num(p.value) << ',' << p.used << ',' << p.excluded << ',' << p.rejections << ',' << num(p.power) << ','
        << num(p.standard_error) << '\n';
  return out.str();
}

std::string qq_svg(const ExperimentResult& result) {
  constexpr double size = 400.0, pad = 40.0, span = size - 2 * pad;
  auto x = [&](double v) { return pad + v * span; };
  auto y = [&](double v) { return size - pad - v * span; };
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
  out << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << span << "\" height=\"" << span
      << "\" fill=\"none\" stroke=\"#000\"/>\n";
  out << "<line x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\"" << x(1) << "\" y2=\"" << y(1)
      << "\" stroke=\"#888\" stroke-dasharray=\"4\"/>\n";
  auto points = [&](const std::vector<QqRow>& rows, const char* colour) {
    for (const QqRow& r : rows)
      out << "<circle cx=\"" << x(r.theoretical) << "\" cy=\"" << y(r.observed) << "\" r=\"2\" fill=\"" << colour
          << "\"/>\n";
  };
  points(result.summary.qq_wald, "#d62728");
  points(result.summary.qq_selective, "#1f77b4");
  out << "<text x=\"" << size / 2 << "\" y=\"" << size - 8 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << "U[0,1] quantile</text>\n";
  out << "<text x=\"12\" y=\"" << size / 2 << "\" font-size=\"12\" transform=\"rotate(-90 12," << size / 2
      << ")\" text-anchor=\"middle\">p-value (blue selective, red Wald)</text>\n";
  out << "</svg>\n";
  return out.str();
}

void emit_report(const ExperimentResult& result, ReportFormat format, const std::string& path) {
  if (result.replicates.empty()) throw Error(ErrorKind::InvalidArgument, "empty experiment result");
  write_file(path, format == ReportFormat::Json ? report_json(result) : replicate_csv(result));
}

void write_outputs(const ExperimentResult& result) {
  const OutputPaths& o = result.config.outputs;
  if (!o.json.empty()) emit_report(result, ReportFormat::Json, o.json);
  if (!o.csv.empty()) emit_report(result, ReportFormat::Csv, o.csv);
  if (!o.qq_csv.empty()) write_file(o.qq_csv, qq_csv(result));
  if (!o.power_csv.empty()) write_file(o.power_csv, power_csv(result));
  if (!o.svg.empty()) write_file(o.svg, qq_svg(result));
}

}  // namespace psimf
