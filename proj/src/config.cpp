#include "vretrain/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "vretrain/errors.hpp"

namespace vretrain {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& message) {
  std::ostringstream os;
  if (node.IsDefined() && node.Mark().line >= 0) os << "line " << node.Mark().line + 1 << ": ";
  os << message;
  throw Error(ErrorKind::ConfigError, os.str());
}

// Reads one mapping, remembering which keys were consumed so leftovers can
// be reported as unknown.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (!node_.IsMap()) fail(node_, "'" + (path_.empty() ? "<root>" : path_) + "' must be a mapping");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return static_cast<bool>(node_[key]);
  }

  YAML::Node child(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  template <class T>
  T required(const std::string& key) {
    const YAML::Node n = child(key);
    if (!n) fail(node_, "missing required key '" + qualified(key) + "'");
    return convert<T>(n, key);
  }

  template <class T>
  std::optional<T> optional(const std::string& key) {
    const YAML::Node n = child(key);
    if (!n) return std::nullopt;
    return convert<T>(n, key);
  }

  template <class T>
  T value_or(const std::string& key, T fallback) {
    return optional<T>(key).value_or(fallback);
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void reject_unknown() const {
    for (const auto& entry : node_) {
      const auto key = entry.first.as<std::string>();
      if (!seen_.count(key)) fail(entry.first, "unknown key '" + qualified(key) + "'");
    }
  }

 private:
  template <class T>
  T convert(const YAML::Node& n, const std::string& key) {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "key '" + qualified(key) + "' has the wrong type");
    }
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Enum>
Enum parse_enum(const YAML::Node& node, const std::string& key,
                std::initializer_list<std::pair<const char*, Enum>> choices) {
  const auto text = node.as<std::string>();
  for (const auto& [name, value] : choices) {
    if (text == name) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : choices) allowed += std::string(allowed.empty() ? "" : "|") + name;
  fail(node, "key '" + key + "' must be one of " + allowed + ", got '" + text + "'");
}

std::vector<double> parse_number_list(const YAML::Node& node, const std::string& key) {
  if (node.IsScalar()) {
    try {
      return {node.as<double>()};
    } catch (const YAML::Exception&) {
      fail(node, "key '" + key + "' must be a number or a list of numbers");
    }
  }
  if (node.IsSequence()) {
    try {
      return node.as<std::vector<double>>();
    } catch (const YAML::Exception&) {
      fail(node, "key '" + key + "' must be a list of numbers");
    }
  }
  if (node.IsMap()) {
    // {from, to, count}: evenly spaced, endpoints included.
    Section range(node, key);
    const double from = range.required<double>("from");
    const double to = range.required<double>("to");
    const long long count = range.required<long long>("count");
    range.reject_unknown();
    if (count < 1) fail(node, "key '" + key + ".count' must be >= 1");
    std::vector<double> out;
    for (long long i = 0; i < count; ++i) {
      out.push_back(count == 1 ? from : from + (to - from) * static_cast<double>(i) /
                                                   static_cast<double>(count - 1));
    }
    return out;
  }
  fail(node, "key '" + key + "' must be a number, a list, or {from, to, count}");
}

FilterMode parse_filter_mode(const YAML::Node& n, const std::string& key) {
  return parse_enum<FilterMode>(
      n, key, {{"direct", FilterMode::Direct}, {"reject", FilterMode::Reject}, {"none", FilterMode::None}});
}

ProblemSection parse_problem(Section& s) {
  ProblemSection p;
  p.dimension = s.optional<long long>("dimension");
  if (s.has("true_theta")) p.true_theta = parse_number_list(s.child("true_theta"), s.qualified("true_theta"));
  p.sigma = s.required<double>("sigma");
  p.n0 = s.required<long long>("n0");
  if (s.has("filter_mode")) p.filter_mode = parse_filter_mode(s.child("filter_mode"), s.qualified("filter_mode"));
  if (s.has("covariates")) {
    const auto law = s.child("covariates").as<std::string>();
    if (law != "gaussian" && law != "fixed") {
      fail(s.child("covariates"), "key 'problem.covariates' must be gaussian|fixed");
    }
    if (law == "fixed" && !s.has("design_matrix")) {
      fail(s.child("covariates"), "fixed covariates need 'problem.design_matrix'");
    }
  }
  if (s.has("design_matrix")) {
    try {
      p.design_matrix = s.child("design_matrix").as<std::vector<std::vector<double>>>();
    } catch (const YAML::Exception&) {
      fail(s.child("design_matrix"), "key 'problem.design_matrix' must be a list of rows");
    }
  }
  if (s.has("rank_policy")) {
    p.rank_policy = parse_enum<RankPolicy>(s.child("rank_policy"), "problem.rank_policy",
                                           {{"strict", RankPolicy::Strict}, {"subspace", RankPolicy::Subspace}});
  }
  s.reject_unknown();
  return p;
}

VerifierSection parse_verifier(Section& s) {
  VerifierSection v;
  v.radius = s.required<double>("radius");
  v.slack = s.optional<double>("slack");
  v.bias = s.optional<double>("bias");
  v.center = s.optional<std::vector<double>>("center");
  s.reject_unknown();
  return v;
}

Schedule parse_schedule(Section& s) {
  Schedule sch;
  sch.kind = parse_enum<ScheduleKind>(
      s.child("kind"), "schedule.kind",
      {{"fixed", ScheduleKind::Fixed}, {"linear", ScheduleKind::Linear}, {"geometric", ScheduleKind::Geometric}});
  sch.start = s.required<long long>("start");
  sch.rounds = s.required<std::size_t>("rounds");
  if (sch.kind == ScheduleKind::Linear) sch.end_or_ratio = s.required<double>("end");
  if (sch.kind == ScheduleKind::Geometric) sch.end_or_ratio = s.required<double>("ratio");
  if (s.has("counting")) {
    sch.counting = parse_enum<SampleCounting>(
        s.child("counting"), "schedule.counting",
        {{"total", SampleCounting::Total}, {"per_direction", SampleCounting::PerDirection}});
  } else {
    sch.counting = SampleCounting::Total;
  }
  s.reject_unknown();
  return sch;
}

IntervalSection parse_interval(Section& s) {
  IntervalSection i;
  i.true_mean = s.required<double>("true_mean");
  i.lower = s.required<double>("lower");
  i.upper = s.required<double>("upper");
  i.hitting_level = s.optional<double>("hitting_level");
  if (s.has("hitting_direction")) {
    i.hitting_direction = parse_enum<Crossing>(s.child("hitting_direction"), "interval.hitting_direction",
                                               {{"down", Crossing::Down}, {"up", Crossing::Up}});
  }
  s.reject_unknown();
  return i;
}

GridSection parse_grid(Section& s) {
  GridSection g;
  g.bias = parse_number_list(s.child("bias"), "grid.bias");
  g.radius = parse_number_list(s.child("radius"), "grid.radius");
  if (s.has("log_ratio")) {
    g.log_ratio = parse_enum<LogRatioMode>(s.child("log_ratio"), "grid.log_ratio",
                                           {{"per_trial", LogRatioMode::PerTrial}, {"of_means", LogRatioMode::OfMeans}});
  }
  s.reject_unknown();
  return g;
}

const char* schedule_kind_name(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::Fixed: return "fixed";
    case ScheduleKind::Linear: return "linear";
    case ScheduleKind::Geometric: return "geometric";
  }
  return "fixed";
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Landscape: return "landscape";
    case ExperimentKind::IterateLinReg: return "iterate_linreg";
    case ExperimentKind::Iterate1D: return "iterate_1d";
  }
  return "landscape";
}

std::string to_string(FilterMode mode) {
  switch (mode) {
    case FilterMode::Direct: return "direct";
    case FilterMode::Reject: return "reject";
    case FilterMode::None: return "none";
  }
  return "direct";
}

std::string to_string(Arm arm) { return arm == Arm::Filtered ? "filtered" : "none"; }

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::ConfigError, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull()) throw Error(ErrorKind::ConfigError, "empty configuration");

  Section top(root, "");
  ExperimentConfig c;
  const YAML::Node kind = top.child("experiment");
  if (!kind) fail(root, "missing required key 'experiment'");
  c.kind = parse_enum<ExperimentKind>(kind, "experiment",
                                      {{"landscape", ExperimentKind::Landscape},
                                       {"iterate_linreg", ExperimentKind::IterateLinReg},
                                       {"iterate_1d", ExperimentKind::Iterate1D}});
  c.replications = top.required<std::size_t>("replications");
  c.master_seed = top.required<std::uint64_t>("master_seed");

  if (!top.has("problem")) fail(root, "missing required key 'problem'");
  Section problem(top.child("problem"), "problem");
  c.problem = parse_problem(problem);

  if (top.has("verifier")) {
    Section verifier(top.child("verifier"), "verifier");
    c.verifier = parse_verifier(verifier);
  }
  if (!top.has("schedule")) fail(root, "missing required key 'schedule'");
  Section schedule(top.child("schedule"), "schedule");
  c.schedule = parse_schedule(schedule);

  if (top.has("arms")) {
    c.arms.clear();
    const YAML::Node arms = top.child("arms");
    if (!arms.IsSequence()) fail(arms, "key 'arms' must be a list");
    for (const auto& a : arms) {
      c.arms.push_back(parse_enum<Arm>(a, "arms", {{"filtered", Arm::Filtered}, {"none", Arm::None}}));
    }
  }
  if (top.has("interval")) {
    Section interval(top.child("interval"), "interval");
    c.interval = parse_interval(interval);
  }
  if (top.has("grid")) {
    Section grid(top.child("grid"), "grid");
    c.grid = parse_grid(grid);
  }
  top.reject_unknown();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void validate_config(const ExperimentConfig& c) {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::ConfigError, m); };
  if (c.replications < 1) bad("replications must be >= 1");
  if (!(c.problem.sigma > 0.0)) bad("problem.sigma must be positive");
  if (c.problem.n0 < 1) bad("problem.n0 must be >= 1");
  try {
    c.schedule.counts();
  } catch (const Error& e) {
    bad(std::string("schedule: ") + e.what());
  }

  if (c.kind == ExperimentKind::Iterate1D) {
    if (!c.interval) bad("iterate_1d needs an 'interval' section");
    if (!(c.interval->lower < c.interval->upper)) bad("interval.lower must be < interval.upper");
    if (c.grid) bad("'grid' only applies to landscape experiments");
    return;
  }

  if (!c.problem.dimension || *c.problem.dimension < 1) bad("problem.dimension must be >= 1");
  const auto p = static_cast<std::size_t>(*c.problem.dimension);
  if (c.problem.true_theta.size() != 1 && c.problem.true_theta.size() != p) {
    bad("problem.true_theta must have 1 or dimension entries");
  }
  if (c.problem.design_matrix) {
    const auto& rows = *c.problem.design_matrix;
    if (rows.size() != static_cast<std::size_t>(c.problem.n0)) bad("problem.design_matrix must have n0 rows");
    for (const auto& row : rows) {
      if (row.size() != p) bad("problem.design_matrix rows must have dimension entries");
    }
  }
  if (c.verifier.bias && c.verifier.center) bad("verifier.bias and verifier.center are exclusive");
  if (c.verifier.center && c.verifier.center->size() != p) bad("verifier.center must have dimension entries");
  if (c.verifier.slack && !(*c.verifier.slack >= 0.0)) bad("verifier.slack must be >= 0");
  if (c.interval) bad("'interval' only applies to iterate_1d experiments");

  if (c.kind == ExperimentKind::Landscape) {
    if (!c.grid || c.grid->bias.empty() || c.grid->radius.empty()) bad("landscape needs non-empty grid.bias and grid.radius");
    for (double b : c.grid->bias) {
      if (!(b >= 0.0)) bad("grid.bias values must be >= 0");
    }
    if (c.verifier.center) bad("landscape derives the centre from grid.bias; drop verifier.center");
  } else {
    if (c.grid) bad("'grid' only applies to landscape experiments");
    if (!(c.verifier.radius >= 0.0)) bad("verifier.radius must be >= 0");
    if (c.arms.empty()) bad("arms must not be empty");
  }
}

std::string dump_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "experiment" << YAML::Value << to_string(c.kind);
  out << YAML::Key << "replications" << YAML::Value << c.replications;
  out << YAML::Key << "master_seed" << YAML::Value << c.master_seed;

  out << YAML::Key << "problem" << YAML::Value << YAML::BeginMap;
  if (c.problem.dimension) out << YAML::Key << "dimension" << YAML::Value << *c.problem.dimension;
  if (!c.problem.true_theta.empty()) {
    out << YAML::Key << "true_theta" << YAML::Value << YAML::Flow << c.problem.true_theta;
  }
  out << YAML::Key << "sigma" << YAML::Value << c.problem.sigma;
  out << YAML::Key << "n0" << YAML::Value << c.problem.n0;
  out << YAML::Key << "filter_mode" << YAML::Value << to_string(c.problem.filter_mode);
  if (c.problem.design_matrix) {
    out << YAML::Key << "covariates" << YAML::Value << "fixed";
    out << YAML::Key << "design_matrix" << YAML::Value << YAML::BeginSeq;
    for (const auto& row : *c.problem.design_matrix) out << YAML::Flow << row;
    out << YAML::EndSeq;
  }
  out << YAML::Key << "rank_policy" << YAML::Value
      << (c.problem.rank_policy == RankPolicy::Strict ? "strict" : "subspace");
  out << YAML::EndMap;

  out << YAML::Key << "verifier" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "radius" << YAML::Value << c.verifier.radius;
  if (c.verifier.slack) out << YAML::Key << "slack" << YAML::Value << *c.verifier.slack;
  if (c.verifier.bias) out << YAML::Key << "bias" << YAML::Value << *c.verifier.bias;
  if (c.verifier.center) out << YAML::Key << "center" << YAML::Value << YAML::Flow << *c.verifier.center;
  out << YAML::EndMap;

  out << YAML::Key << "schedule" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << schedule_kind_name(c.schedule.kind);
  out << YAML::Key << "start" << YAML::Value << c.schedule.start;
  if (c.schedule.kind == ScheduleKind::Linear) out << YAML::Key << "end" << YAML::Value << c.schedule.end_or_ratio;
  if (c.schedule.kind == ScheduleKind::Geometric) out << YAML::Key << "ratio" << YAML::Value << c.schedule.end_or_ratio;
  out << YAML::Key << "rounds" << YAML::Value << c.schedule.rounds;
  out << YAML::Key << "counting" << YAML::Value
      << (c.schedule.counting == SampleCounting::Total ? "total" : "per_direction");
  out << YAML::EndMap;

  out << YAML::Key << "arms" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (Arm a : c.arms) out << to_string(a);
  out << YAML::EndSeq;

  if (c.interval) {
    out << YAML::Key << "interval" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "true_mean" << YAML::Value << c.interval->true_mean;
    out << YAML::Key << "lower" << YAML::Value << c.interval->lower;
    out << YAML::Key << "upper" << YAML::Value << c.interval->upper;
    if (c.interval->hitting_level) out << YAML::Key << "hitting_level" << YAML::Value << *c.interval->hitting_level;
    out << YAML::Key << "hitting_direction" << YAML::Value
        << (c.interval->hitting_direction == Crossing::Down ? "down" : "up");
    out << YAML::EndMap;
  }
  if (c.grid) {
    out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "bias" << YAML::Value << YAML::Flow << c.grid->bias;
    out << YAML::Key << "radius" << YAML::Value << YAML::Flow << c.grid->radius;
    out << YAML::Key << "log_ratio" << YAML::Value
        << (c.grid->log_ratio == LogRatioMode::PerTrial ? "per_trial" : "of_means");
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void write_config(const ExperimentConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
  out << dump_config(config);
}

double resolved_slack(const ExperimentConfig& config) {
  return config.verifier.slack.value_or(default_slack(config.problem.sigma));
}

Eigen::VectorXd resolved_true_theta(const ExperimentConfig& config) {
  const auto p = static_cast<Eigen::Index>(config.problem.dimension.value_or(1));
  const auto& theta = config.problem.true_theta;
  if (theta.size() == 1) return Eigen::VectorXd::Constant(p, theta.front());
  if (theta.empty()) return Eigen::VectorXd::Zero(p);
  return Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
}

RngStream experiment_stream(const ExperimentConfig& config, std::uint64_t purpose) {
  return derive_stream(config.master_seed, kExperimentReplication, 0, purpose);
}

Eigen::VectorXd offset_direction(const ExperimentConfig& config) {
  RngStream stream = experiment_stream(config, kOffsetPurpose);
  return random_unit_vector(static_cast<Eigen::Index>(config.problem.dimension.value_or(1)), stream);
}

Eigen::VectorXd resolved_center(const ExperimentConfig& config, double bias) {
  if (config.verifier.center) {
    return Eigen::Map<const Eigen::VectorXd>(config.verifier.center->data(),
                                             static_cast<Eigen::Index>(config.verifier.center->size()));
  }
  return resolved_true_theta(config) + bias * offset_direction(config);
}

LinRegConfig build_linreg_config(const ExperimentConfig& config, double bias, double radius, Arm arm) {
  const Eigen::VectorXd theta = resolved_true_theta(config);
  const auto p = static_cast<std::size_t>(theta.size());
  LinRegConfig out{
      .true_theta = theta,
      .ball = KnowledgeBall(resolved_center(config, bias), radius, resolved_slack(config)),
      .sigma = config.problem.sigma,
      .n0 = config.problem.n0,
      .schedule = config.schedule.per_direction(p),
      .rounds = config.schedule.rounds,
      .covariates = {},
      .mode = arm == Arm::None ? FilterMode::None : config.problem.filter_mode,
      .rank_policy = config.problem.rank_policy,
  };
  if (config.problem.design_matrix) {
    const auto& rows = *config.problem.design_matrix;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < p; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    out.covariates.fixed = std::move(x);
  }
  return out;
}

Gaussian1DConfig build_gaussian1d_config(const ExperimentConfig& config) {
  if (!config.interval) throw Error(ErrorKind::ConfigError, "missing interval section");
  Gaussian1DConfig out;
  out.true_mean = config.interval->true_mean;
  out.sigma = config.problem.sigma;
  out.interval = Interval1D(config.interval->lower, config.interval->upper);
  out.n0 = config.problem.n0;
  out.schedule = config.schedule.per_direction(1);
  out.rounds = config.schedule.rounds;
  out.mode = config.problem.filter_mode;
  return out;
}

}  // namespace vretrain
