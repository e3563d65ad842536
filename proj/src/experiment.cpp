// Copyright 2026 The steinzo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "steinzo/experiment.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "steinzo/problems.hpp"

namespace steinzo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("key '" + key + "': expected a nonnegative integer, got '" + value + "'");
  }
  errno = 0;
  const unsigned long long v = std::strtoull(value.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ConfigError("key '" + key + "': integer out of range");
  return static_cast<std::uint64_t>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + value + "'");
}

std::optional<double> to_optional_double(const std::string& key, const std::string& value) {
  if (value == "none" || value.empty()) return std::nullopt;
  return to_double(key, value);
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

SolverKind to_solver(const std::string& value) {
  if (value == "first_order") return SolverKind::kFirstOrder;
  if (value == "stein2") return SolverKind::kStein2;
  if (value == "2spsa") return SolverKind::kTwoSpsa;
  throw ConfigError("unknown solver '" + value + "' (first_order, stein2, 2spsa)");
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"problem", [](auto& c, auto&, auto& v) { c.problem = v; }},
      {"p", [](auto& c, auto& k, auto& v) { c.p = to_uint(k, v); }},
      {"noise_sigma2", [](auto& c, auto& k, auto& v) { c.noise_sigma2 = to_double(k, v); }},
      {"quadratic_diag", [](auto& c, auto& k, auto& v) { c.quadratic_diag = to_list(k, v); }},
      {"dataset", [](auto& c, auto&, auto& v) { c.dataset = v; }},
      {"dataset_dim", [](auto& c, auto& k, auto& v) { c.dataset_dim = to_uint(k, v); }},
      {"synthetic_d", [](auto& c, auto& k, auto& v) { c.synthetic_d = to_uint(k, v); }},
      {"synthetic_n", [](auto& c, auto& k, auto& v) { c.synthetic_n = to_uint(k, v); }},
      {"separation", [](auto& c, auto& k, auto& v) { c.separation = to_double(k, v); }},
      {"dataset_seed", [](auto& c, auto& k, auto& v) { c.dataset_seed = to_uint(k, v); }},
      {"kappa", [](auto& c, auto& k, auto& v) { c.kappa = to_double(k, v); }},
      {"batch_size", [](auto& c, auto& k, auto& v) { c.batch_size = to_uint(k, v); }},
      {"theta0", [](auto& c, auto&, auto& v) { c.theta0 = v; }},
      {"theta0_low", [](auto& c, auto& k, auto& v) { c.theta0_low = to_double(k, v); }},
      {"theta0_high", [](auto& c, auto& k, auto& v) { c.theta0_high = to_double(k, v); }},
      {"f_opt", [](auto& c, auto& k, auto& v) { c.f_opt = to_optional_double(k, v); }},
      {"solver", [](auto& c, auto&, auto& v) { c.solver = to_solver(v); }},
      {"a", [](auto& c, auto& k, auto& v) { c.a = to_double(k, v); }},
      {"A", [](auto& c, auto& k, auto& v) { c.stability = to_double(k, v); }},
      {"alpha", [](auto& c, auto& k, auto& v) { c.alpha = to_double(k, v); }},
      {"c", [](auto& c, auto& k, auto& v) { c.c = to_double(k, v); }},
      {"gamma", [](auto& c, auto& k, auto& v) { c.gamma = to_double(k, v); }},
      {"w_mode", [](auto& c, auto&, auto& v) { c.w_mode = v; }},
      {"w0", [](auto& c, auto& k, auto& v) { c.w0 = to_double(k, v); }},
      {"omega", [](auto& c, auto& k, auto& v) { c.omega = to_double(k, v); }},
      {"ctilde", [](auto& c, auto& k, auto& v) { c.ctilde = to_optional_double(k, v); }},
      {"pd_map", [](auto& c, auto&, auto& v) { c.pd_map = v; }},
      {"delta_floor", [](auto& c, auto& k, auto& v) { c.delta_floor = to_double(k, v); }},
      {"delta_relative", [](auto& c, auto& k, auto& v) { c.delta_relative = to_bool(k, v); }},
      {"sqrt_eps0", [](auto& c, auto& k, auto& v) { c.sqrt_eps0 = to_double(k, v); }},
      {"sqrt_eps_decay", [](auto& c, auto& k, auto& v) { c.sqrt_eps_decay = to_double(k, v); }},
      {"queries_per_iter", [](auto& c, auto& k, auto& v) { c.queries_per_iter = to_uint(k, v); }},
      {"K", [](auto& c, auto& k, auto& v) { c.iterations = to_uint(k, v); }},
      {"n_replicates", [](auto& c, auto& k, auto& v) { c.n_replicates = to_uint(k, v); }},
      {"base_seed", [](auto& c, auto& k, auto& v) { c.base_seed = to_uint(k, v); }},
      {"warm_start", [](auto& c, auto& k, auto& v) { c.warm_start = to_uint(k, v); }},
      {"blocking_tolerance",
       [](auto& c, auto& k, auto& v) { c.blocking_tolerance = to_optional_double(k, v); }},
      {"output_dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
  };
  return table;
}

Vector parse_point(const std::string& text, std::size_t p) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(to_double("theta0", trim(item)));
  if (values.size() != p) {
    throw ConfigError("theta0 has " + std::to_string(values.size()) + " entries, expected " +
                      std::to_string(p));
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(p));
}

std::function<Vector(RandomStream&)> initial_point_rule(const ExperimentConfig& c, std::size_t p,
                                                        const std::string& fallback) {
  const std::string rule = c.theta0.empty() ? fallback : c.theta0;
  const auto n = static_cast<Eigen::Index>(p);
  if (rule == "ones") return [n](RandomStream&) { return Vector(Vector::Ones(n)); };
  if (rule == "zeros") return [n](RandomStream&) { return Vector(Vector::Zero(n)); };
  if (rule == "uniform") {
    const double lo = c.theta0_low, hi = c.theta0_high;
    if (!(hi > lo)) throw ConfigError("theta0_high must exceed theta0_low");
    return [n, lo, hi](RandomStream& s) {
      Vector v(n);
      for (Eigen::Index i = 0; i < n; ++i) v[i] = lo + (hi - lo) * s.uniform();
      return v;
    };
  }
  const Vector fixed = parse_point(rule, p);
  return [fixed](RandomStream&) { return fixed; };
}

void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(config, key, value);
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  apply_setting(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      apply_override(config, line);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

GainSchedule make_schedule(const ExperimentConfig& c) {
  WeightMode weights = HarmonicWeights{};
  if (c.w_mode == "polynomial") {
    weights = PolynomialWeights{c.w0, c.omega};
  } else if (c.w_mode != "harmonic") {
    throw ConfigError("unknown w_mode '" + c.w_mode + "' (harmonic, polynomial)");
  }
  try {
    return GainSchedule(c.a, c.stability, c.alpha, c.c, c.gamma, weights);
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
}

SolverConfig make_solver_config(const ExperimentConfig& c) {
  SolverConfig s;
  s.schedule = make_schedule(c);
  if (c.pd_map == "eigen_clamp") {
    s.pd_map = EigenClamp{c.delta_floor, c.delta_relative};
  } else if (c.pd_map == "damp_shift") {
    s.pd_map = DampShift{c.delta_floor};
  } else if (c.pd_map == "sqrt") {
    s.pd_map = SqrtMap{c.sqrt_eps0, c.sqrt_eps_decay};
  } else {
    throw ConfigError("unknown pd_map '" + c.pd_map + "' (eigen_clamp, damp_shift, sqrt)");
  }
  s.queries_per_iter = c.queries_per_iter;
  s.max_iterations = c.iterations;
  s.blocking_tolerance = c.blocking_tolerance;
  s.warm_start_iters = c.warm_start;
  s.ctilde = c.ctilde;
  try {
    validate_config(c.solver, s);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  return s;
}

ProblemInstance build_problem(const ExperimentConfig& c) {
  ProblemInstance inst;
  try {
    if (c.problem == "skewed_quartic") {
      const SkewedQuartic prob(c.p, c.noise_sigma2);
      inst.dimension = c.p;
      inst.make_oracle = [prob](RandomStream s) { return make_oracle(prob, s); };
      inst.loss = [prob](const Vector& t) { return prob.value(t); };
      inst.f_opt = 0.0;
      inst.initial_point = initial_point_rule(c, c.p, "uniform");
    } else if (c.problem == "quadratic") {
      std::vector<double> diag = c.quadratic_diag;
      if (diag.empty()) {
        for (std::size_t i = 1; i <= c.p; ++i) diag.push_back(static_cast<double>(i));
      }
      const Vector d = Eigen::Map<const Vector>(diag.data(), static_cast<Eigen::Index>(diag.size()));
      const QuadraticProblem prob(Matrix(d.asDiagonal()), c.noise_sigma2);
      inst.dimension = diag.size();
      inst.make_oracle = [prob](RandomStream s) { return make_oracle(prob, s); };
      inst.loss = [prob](const Vector& t) { return prob.value(t); };
      inst.f_opt = 0.0;
      inst.initial_point = initial_point_rule(c, inst.dimension, "ones");
    } else if (c.problem == "correntropy") {
      Dataset data;
      if (c.dataset == "synthetic") {
        RandomStream s(c.dataset_seed, 0);
        data = generate_synthetic_classification(c.synthetic_d, c.synthetic_n, c.separation, s);
      } else {
        std::optional<std::size_t> dim;
        if (c.dataset_dim > 0) dim = c.dataset_dim;
        data = load_libsvm_file(c.dataset, dim);
      }
      auto prob = std::make_shared<const CorrEntropyProblem>(data, c.kappa, c.batch_size);
      inst.dimension = prob->dimension();
      inst.make_oracle = [prob](RandomStream s) {
        return NoisyOracle(prob->dimension(),
                           [prob](const Vector& t, RandomStream& n) { return prob->minibatch_oracle(t, n); },
                           s);
      };
      inst.loss = [prob](const Vector& t) { return prob->full_loss(t); };
      inst.f_opt = 0.0;
      inst.initial_point = initial_point_rule(c, inst.dimension, "ones");
    } else {
      throw ConfigError("unknown problem '" + c.problem + "' (skewed_quartic, quadratic, correntropy)");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const ParseError& e) {
    throw ConfigError(std::string("dataset: ") + e.what());
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  if (c.f_opt) inst.f_opt = *c.f_opt;
  return inst;
}

std::string problem_signature(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "problem=" << c.problem << ";noise_sigma2=" << format_double(c.noise_sigma2);
  if (c.problem == "skewed_quartic") {
    out << ";p=" << c.p;
  } else if (c.problem == "quadratic") {
    out << ";p=" << c.p << ";diag=" << join(c.quadratic_diag);
  } else if (c.problem == "correntropy") {
    out << ";dataset=" << c.dataset << ";dim=" << c.dataset_dim << ";kappa=" << format_double(c.kappa)
        << ";J=" << c.batch_size;
    if (c.dataset == "synthetic") {
      out << ";d=" << c.synthetic_d << ";n=" << c.synthetic_n
          << ";sep=" << format_double(c.separation) << ";seed=" << c.dataset_seed;
    }
  }
  out << ";theta0=" << c.theta0 << ";lo=" << format_double(c.theta0_low)
      << ";hi=" << format_double(c.theta0_high);
  return out.str();
}

void validate_experiment(const ExperimentConfig& config) {
  if (config.n_replicates < 1) throw ConfigError("n_replicates must be >= 1");
  if (config.output_dir.empty()) throw ConfigError("output_dir must be set");
  make_solver_config(config);
  const ProblemInstance inst = build_problem(config);
  RandomStream probe = replicate_stream(config.base_seed, 0, StreamPurpose::kInitialPoint);
  const Vector theta0 = inst.initial_point(probe);
  if (static_cast<std::size_t>(theta0.size()) != inst.dimension) {
    throw ConfigError("theta0 dimension mismatch");
  }
}

RandomStream replicate_stream(std::uint64_t base_seed, std::uint64_t replicate,
                              StreamPurpose purpose) {
  return RandomStream(base_seed, 4 * replicate + static_cast<std::uint64_t>(purpose));
}

double ReplicateResult::final_loss() const {
  return trace.records.empty() ? kNaN : trace.records.back().loss;
}

double ReplicateResult::final_normalized() const {
  if (diverged || normalized.empty()) return kNaN;
  return normalized.back();
}

std::size_t ExperimentResult::n_ok() const {
  std::size_t n = 0;
  for (const auto& r : replicates) n += r.diverged ? 0 : 1;
  return n;
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned jobs, bool write_files) {
  validate_experiment(config);
  SolverConfig solver = make_solver_config(config);
  const ProblemInstance inst = build_problem(config);
  solver.loss_metric = inst.loss;

  ExperimentResult result;
  result.config = config;
  result.f_opt = inst.f_opt;
  result.replicates.resize(config.n_replicates);

  std::filesystem::path dir(config.output_dir);
  if (write_files) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output_dir '" + config.output_dir + "': " + ec.message());
  }

  parallel_for(config.n_replicates, jobs, [&](std::size_t r) {
    ReplicateResult& out = result.replicates[r];
    out.replicate = r;
    RandomStream init = replicate_stream(config.base_seed, r, StreamPurpose::kInitialPoint);
    RandomStream perturb = replicate_stream(config.base_seed, r, StreamPurpose::kPerturbation);
    NoisyOracle oracle =
        inst.make_oracle(replicate_stream(config.base_seed, r, StreamPurpose::kOracleNoise));
    const Vector theta0 = inst.initial_point(init);
    try {
      out.trace = run_solver(config.solver, oracle, solver, theta0, perturb);
    } catch (const DivergenceError& e) {
      out.diverged = true;
      out.message = e.what();
      out.trace = e.trace();
    } catch (const NumericalError& e) {
      out.diverged = true;
      out.message = e.what();
    }
    out.f_init = out.trace.records.empty() ? inst.loss(theta0) : out.trace.records.front().loss;
    const bool normalizable = out.f_init > inst.f_opt;
    for (const auto& rec : out.trace.records) {
      out.normalized.push_back(normalizable ? (rec.loss - inst.f_opt) / (out.f_init - inst.f_opt)
                                            : kNaN);
    }
    if (write_files) {
      write_file(dir / ("trace_r" + std::to_string(r) + ".csv"),
                 [&](std::ostream& os) { write_trace_csv(os, out); });
    }
  });

  std::vector<RunTrace> finished;
  std::vector<const ReplicateResult*> ok;
  for (const auto& r : result.replicates) {
    if (!r.diverged) {
      finished.push_back(r.trace);
      ok.push_back(&r);
    }
  }
  if (!finished.empty()) {
    result.loss_curve = aggregate_replicates(finished, [](const TraceRecord& rec) { return rec.loss; });
    // Normalized values depend on each replicate's f_init, so aggregate by index.
    std::vector<RunTrace> normalized = finished;
    for (std::size_t i = 0; i < normalized.size(); ++i) {
      for (std::size_t j = 0; j < normalized[i].records.size(); ++j) {
        normalized[i].records[j].loss = ok[i]->normalized[j];
      }
    }
    result.normalized_curve =
        aggregate_replicates(normalized, [](const TraceRecord& rec) { return rec.loss; });
    for (const auto& rec : finished.front().records) result.queries.push_back(rec.queries);
  }

  if (write_files) {
    write_file(dir / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, result); });
    write_file(dir / "replicates.csv", [&](std::ostream& os) { write_replicates_csv(os, result); });
  }
  return result;
}

ComparisonTable compare_results(const ExperimentResult& a, const ExperimentResult& b) {
  const auto& ca = a.config;
  const auto& cb = b.config;
  if (problem_signature(ca) != problem_signature(cb)) {
    throw InvalidInput("refusing comparison: the configs describe different problems");
  }
  if (ca.queries_per_iter != cb.queries_per_iter || ca.iterations != cb.iterations) {
    throw InvalidInput("refusing comparison: query budgets differ (" +
                       std::to_string(ca.queries_per_iter) + "x" + std::to_string(ca.iterations) +
                       " vs " + std::to_string(cb.queries_per_iter) + "x" +
                       std::to_string(cb.iterations) + ")");
  }
  if (ca.blocking_tolerance.has_value() != cb.blocking_tolerance.has_value() ||
      ca.warm_start != cb.warm_start) {
    throw InvalidInput("refusing comparison: blocking/warm-start query costs differ");
  }
  if (ca.base_seed != cb.base_seed || ca.n_replicates != cb.n_replicates) {
    throw InvalidInput("refusing comparison: seeds or replicate counts differ");
  }
  ComparisonTable table;
  table.solver_a = solver_name(ca.solver);
  table.solver_b = solver_name(cb.solver);
  double diff_sum = 0.0;
  std::size_t paired = 0;
  for (std::size_t r = 0; r < a.replicates.size(); ++r) {
    ComparisonRow row;
    row.replicate = r;
    row.final_a = a.replicates[r].final_normalized();
    row.final_b = b.replicates[r].final_normalized();
    table.rows.push_back(row);
    if (std::isnan(row.final_a) && std::isnan(row.final_b)) {
      ++table.ties;
      continue;
    }
    if (std::isnan(row.final_b) || row.final_a < row.final_b) {
      ++table.wins_a;
    } else if (std::isnan(row.final_a) || row.final_b < row.final_a) {
      ++table.wins_b;
    } else {
      ++table.ties;
    }
    if (!std::isnan(row.final_a) && !std::isnan(row.final_b)) {
      diff_sum += row.final_a - row.final_b;
      ++paired;
    }
  }
  table.mean_difference = paired ? diff_sum / static_cast<double>(paired) : kNaN;
  table.win_rate_a = table.rows.empty()
                         ? 0.0
                         : static_cast<double>(table.wins_a) / static_cast<double>(table.rows.size());
  return table;
}

ComparisonTable compare_solvers(const ExperimentConfig& a, const ExperimentConfig& b,
                                unsigned jobs, bool write_files) {
  // Fail on budget mismatch before spending any queries.
  ExperimentResult shell_a, shell_b;
  shell_a.config = a;
  shell_b.config = b;
  compare_results(shell_a, shell_b);
  const ExperimentResult ra = run_experiment(a, jobs, write_files);
  const ExperimentResult rb = run_experiment(b, jobs, write_files);
  return compare_results(ra, rb);
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& t) {
  out << "replicate,final_normalized_" << t.solver_a << ",final_normalized_" << t.solver_b
      << ",winner\n";
  for (const auto& row : t.rows) {
    const char* winner = "tie";
    const bool na = std::isnan(row.final_a), nb = std::isnan(row.final_b);
    if (!(na && nb)) {
      if (nb || (!na && row.final_a < row.final_b)) {
        winner = "a";
      } else if (na || row.final_b < row.final_a) {
        winner = "b";
      }
    }
    out << row.replicate << ',' << format_double(row.final_a) << ',' << format_double(row.final_b)
        << ',' << winner << '\n';
  }
}

void write_trace_csv(std::ostream& out, const ReplicateResult& result) {
  out << "k,queries,loss,normalized_loss,lambda_min_hbar\n";
  const auto& records = result.trace.records;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const double norm = i < result.normalized.size() ? result.normalized[i] : kNaN;
    out << r.k << ',' << r.queries << ',' << format_double(r.loss) << ',' << format_double(norm)
        << ',' << format_double(r.lambda_min_hbar) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result) {
  out << "k,queries,mean_loss,stderr_loss,mean_normalized_loss,stderr_normalized_loss,n_replicates\n";
  const auto& lc = result.loss_curve;
  const auto& nc = result.normalized_curve;
  for (std::size_t i = 0; i < lc.x.size(); ++i) {
    out << static_cast<std::uint64_t>(lc.x[i]) << ',' << result.queries[i] << ','
        << format_double(lc.mean[i]) << ',' << format_double(lc.std_error[i]) << ','
        << format_double(nc.mean[i]) << ',' << format_double(nc.std_error[i]) << ','
        << lc.n_replicates << '\n';
  }
}

void write_replicates_csv(std::ostream& out, const ExperimentResult& result) {
  out << "replicate,status,iterations,queries,final_loss,final_normalized_loss,message\n";
  for (const auto& r : result.replicates) {
    const auto& recs = r.trace.records;
    const std::uint64_t iters = recs.empty() ? 0 : recs.back().k;
    const std::uint64_t queries = recs.empty() ? 0 : recs.back().queries;
    const double final_norm = r.normalized.empty() ? kNaN : r.normalized.back();
    std::string msg = r.message;
    for (auto& ch : msg) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out << r.replicate << ',' << (r.diverged ? "diverged" : "ok") << ',' << iters << ','
        << queries << ',' << format_double(r.final_loss()) << ',' << format_double(final_norm)
        << ',' << msg << '\n';
  }
}

std::vector<TraceCsvRow> read_trace_csv(std::istream& in) {
  std::vector<TraceCsvRow> rows;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return rows;
  ++line_no;
  if (trim(line) != "k,queries,loss,normalized_loss,lambda_min_hbar") {
    throw ParseError(line_no, "unexpected trace header '" + line + "'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (cells.size() != 5) throw ParseError(line_no, "expected 5 columns");
    auto number = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size()) throw ParseError(line_no, "bad number '" + s + "'");
      return v;
    };
    auto integer = [&](const std::string& s) {
      if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw ParseError(line_no, "bad integer '" + s + "'");
      }
      return static_cast<std::uint64_t>(std::strtoull(s.c_str(), nullptr, 10));
    };
    rows.push_back({integer(cells[0]), integer(cells[1]), number(cells[2]), number(cells[3]),
                    number(cells[4])});
  }
  return rows;
}

}  // namespace steinzo
