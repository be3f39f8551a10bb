#include "igo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace igo {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string kind_str(AlgoConfig::Kind kind) {
  switch (kind) {
    case AlgoConfig::Kind::pbil_lambda:
      return "pbil-lambda";
    case AlgoConfig::Kind::pbil_eps:
      return "pbil-eps";
    case AlgoConfig::Kind::cga:
      return "cga";
    case AlgoConfig::Kind::umda:
      return "umda";
    case AlgoConfig::Kind::pbil:
      return "pbil";
  }
  return "unknown";
}

}  // namespace

std::optional<double> AlgoConfig::resolve_epsilon(std::size_t n) const {
  switch (eps_rule) {
    case EpsRule::preset:
      return std::nullopt;
    case EpsRule::inv_n:
      return 1.0 / static_cast<double>(n);
    case EpsRule::inv_sqrt_n:
      return 1.0 / std::sqrt(static_cast<double>(n));
    case EpsRule::value:
      return eps_value;
  }
  return std::nullopt;
}

Optimizer AlgoConfig::make(std::size_t n) const {
  const std::optional<double> eps = resolve_epsilon(n);
  Optimizer opt = [&] {
    switch (kind) {
      case Kind::pbil_lambda:
        return parameterless(n, Mode::adapt_lambda, alpha, eps);
      case Kind::pbil_eps:
        return parameterless(n, Mode::adapt_epsilon, alpha, eps);
      case Kind::cga:
        return baseline(BaselineKind::cga, n, std::nullopt, eps);
      case Kind::umda:
        return baseline(BaselineKind::umda, n, lambda, eps);
      case Kind::pbil:
        return baseline(BaselineKind::pbil, n, lambda,
                        eps.has_value() ? eps
                                        : std::optional<double>(
                                              1.0 / static_cast<double>(n)));
    }
    throw std::logic_error("AlgoConfig::make: unreachable");
  }();
  if (lambda_max.has_value()) {
    if (*lambda_max < opt.lambda_min) {
      throw std::invalid_argument("AlgoConfig: lambda_max below lambda_min");
    }
    opt.lambda_max = *lambda_max;
  }
  return opt;
}

std::string AlgoConfig::label() const {
  std::string out = kind_str(kind);
  switch (eps_rule) {
    case EpsRule::preset:
      break;
    case EpsRule::inv_n:
      out += ":e=inv-n";
      break;
    case EpsRule::inv_sqrt_n:
      out += ":e=inv-sqrt-n";
      break;
    case EpsRule::value:
      out += ":e=" + format_double(eps_value);
      break;
  }
  const bool adaptive =
      kind == Kind::pbil_lambda || kind == Kind::pbil_eps;
  if (adaptive && alpha != 1.5) {
    out += ":a=" + format_double(alpha);
  }
  if (kind == Kind::umda || kind == Kind::pbil) {
    out += ":l=" + std::to_string(lambda);
  }
  return out;
}

AlgoConfig AlgoConfig::parameterless_lambda(double alpha, EpsRule rule,
                                            double eps_value) {
  AlgoConfig cfg;
  cfg.kind = Kind::pbil_lambda;
  cfg.alpha = alpha;
  cfg.eps_rule = rule;
  cfg.eps_value = eps_value;
  return cfg;
}

AlgoConfig AlgoConfig::fixed_cga(EpsRule rule, double eps_value) {
  AlgoConfig cfg;
  cfg.kind = Kind::cga;
  cfg.eps_rule = rule;
  cfg.eps_value = eps_value;
  return cfg;
}

Objective ObjectiveConfig::make(std::size_t n) const {
  switch (kind) {
    case ObjectiveKind::onemax:
      return Objective::onemax(n);
    case ObjectiveKind::leadingones:
      return Objective::leadingones(n);
    case ObjectiveKind::linear: {
      if (linear_weights.empty()) {
        return Objective::linear(std::vector<double>(n, 1.0));
      }
      if (linear_weights.size() != n) {
        throw std::invalid_argument(
            "ObjectiveConfig: linear weights do not match n");
      }
      return Objective::linear(linear_weights);
    }
    case ObjectiveKind::noisy_onemax:
      return Objective::noisy_onemax(n, sigma);
  }
  throw std::logic_error("ObjectiveConfig::make: unreachable");
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::string_view algo_label,
                         std::string_view objective_label, std::size_t n,
                         int trial) {
  return Rng(base_seed)
      .child(fnv1a64(algo_label))
      .child(fnv1a64(objective_label))
      .child(n)
      .child(static_cast<std::uint64_t>(trial))
      .next_u64();
}

TrialRecord run_trial(const AlgoConfig& algo, const ObjectiveConfig& objective,
                      std::size_t n, std::uint64_t budget,
                      std::uint64_t seed) {
  Optimizer opt = algo.make(n);
  Objective obj = objective.make(n);
  if (budget < static_cast<std::uint64_t>(opt.lambda_min)) {
    throw std::invalid_argument("run_trial: budget below lambda_min");
  }

  TrialRecord rec;
  rec.algorithm = algo.label();
  rec.objective = objective.label();
  rec.n = n;
  rec.seed = seed;
  rec.budget = budget;

  Rng root(seed);
  const std::uint64_t thin = n <= 200 ? 1 : 10;
  std::map<int, std::uint64_t> lambda_hist;
  double eps_sum = 0.0;
  bool found = false;
  std::uint64_t hit = 0;

  while (true) {
    const auto lam = static_cast<std::uint64_t>(opt.lambda);
    if (obj.eval_count() + lam > budget) {
      break;
    }
    const std::uint64_t iter = rec.iterations;  // 0-based index of this ask
    Rng ask_rng = root.child(2 * iter);
    const std::vector<BitString> samples = opt.ask(ask_rng);

    Rng eval_streams = root.child(2 * iter + 1);
    std::vector<double> f(lam);
    for (std::uint64_t i = 0; i < lam; ++i) {
      Rng eval_rng = eval_streams.child(i);
      f[i] = obj.evaluate(samples[i], eval_rng);
      if (!found && obj.is_optimum(samples[i])) {
        found = true;
        hit = obj.eval_count();
      }
    }

    rec.iterations += 1;
    lambda_hist[opt.lambda] += 1;
    eps_sum += opt.epsilon;
    if (iter % thin == 0) {
      rec.trajectory.push_back(
          TrajectoryPoint{rec.iterations, opt.lambda, opt.epsilon});
    }
    if (found) {
      break;
    }
    opt.tell(samples, f);
  }

  rec.f_calls = obj.eval_count();
  rec.exhausted = !found;
  rec.hitting_time = found ? hit : budget;

  if (rec.iterations > 0) {
    // median of lambda over f-call time (each iteration weighted by its
    // lambda), computed exactly from the histogram
    std::uint64_t weight_total = 0;
    for (const auto& [lam, count] : lambda_hist) {
      weight_total += static_cast<std::uint64_t>(lam) * count;
    }
    const std::uint64_t i1 = (weight_total - 1) / 2;
    const std::uint64_t i2 = weight_total / 2;
    double v1 = 0.0, v2 = 0.0;
    std::uint64_t seen = 0;
    for (const auto& [lam, count] : lambda_hist) {
      const std::uint64_t w = static_cast<std::uint64_t>(lam) * count;
      if (seen <= i1 && i1 < seen + w) v1 = lam;
      if (seen <= i2 && i2 < seen + w) v2 = lam;
      seen += w;
    }
    rec.median_lambda = 0.5 * (v1 + v2);
    rec.mean_epsilon = eps_sum / static_cast<double>(rec.iterations);
  }

  rec.theta_min = *std::min_element(opt.theta.probs.begin(),
                                    opt.theta.probs.end());
  rec.theta_max = *std::max_element(opt.theta.probs.begin(),
                                    opt.theta.probs.end());
  double sum = 0.0;
  for (const double p : opt.theta.probs) sum += p;
  rec.theta_mean = sum / static_cast<double>(n);
  return rec;
}

SuiteResult run_suite(const SuiteConfig& config) {
  if (config.trials < 1) {
    throw std::invalid_argument("run_suite: trials must be >= 1");
  }
  struct Task {
    const AlgoConfig* algo;
    const ObjectiveConfig* objective;
    std::size_t n;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const AlgoConfig& algo : config.algorithms) {
    const std::string algo_label = algo.label();
    for (const ObjectiveConfig& objective : config.objectives) {
      for (const std::size_t n : config.dims) {
        for (int t = 0; t < config.trials; ++t) {
          tasks.push_back(Task{
              &algo, &objective, n,
              trial_seed(config.base_seed, algo_label, objective.label(), n,
                         t)});
        }
      }
    }
  }

  SuiteResult result;
  result.records.resize(tasks.size());
  int workers = config.workers;
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers == 0) workers = 1;
  }
  workers = std::min<int>(workers, static_cast<int>(tasks.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      result.records[i] = run_trial(*task.algo, *task.objective, task.n,
                                    config.budget, task.seed);
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  // aggregate in task-list order, one row per (algorithm, objective, n)
  std::size_t idx = 0;
  for (const AlgoConfig& algo : config.algorithms) {
    for (const ObjectiveConfig& objective : config.objectives) {
      for (const std::size_t n : config.dims) {
        SuiteRow row;
        row.algorithm = algo.label();
        row.objective = objective.label();
        row.n = n;
        row.trials = config.trials;
        std::vector<double> hits;
        hits.reserve(config.trials);
        for (int t = 0; t < config.trials; ++t) {
          const TrialRecord& rec = result.records[idx++];
          hits.push_back(static_cast<double>(rec.hitting_time));
          row.successes += rec.exhausted ? 0 : 1;
        }
        row.hitting = quartiles(std::move(hits));
        result.report.push_back(std::move(row));
      }
    }
  }
  return result;
}

void emit_csv(const std::vector<TrialRecord>& records, std::ostream& out) {
  out << "algorithm,objective,n,seed,hitting_time,exhausted,budget,"
         "median_lambda,mean_epsilon\n";
  for (const TrialRecord& r : records) {
    out << r.algorithm << ',' << r.objective << ',' << r.n << ',' << r.seed
        << ',' << r.hitting_time << ',' << (r.exhausted ? "true" : "false")
        << ',' << r.budget << ',' << format_double(r.median_lambda) << ','
        << format_double(r.mean_epsilon) << '\n';
  }
}

namespace {

nlohmann::json record_to_json(const TrialRecord& r) {
  nlohmann::json traj = nlohmann::json::array();
  for (const TrajectoryPoint& p : r.trajectory) {
    traj.push_back({{"iteration", p.iteration},
                    {"lambda", p.lambda},
                    {"epsilon", p.epsilon}});
  }
  return nlohmann::json{
      {"algorithm", r.algorithm},
      {"objective", r.objective},
      {"n", r.n},
      {"seed", r.seed},
      {"budget", r.budget},
      {"hitting_time", r.hitting_time},
      {"exhausted", r.exhausted},
      {"iterations", r.iterations},
      {"f_calls", r.f_calls},
      {"median_lambda", r.median_lambda},
      {"mean_epsilon", r.mean_epsilon},
      {"trajectory", std::move(traj)},
      {"theta_min", r.theta_min},
      {"theta_mean", r.theta_mean},
      {"theta_max", r.theta_max},
  };
}

TrialRecord record_from_json(const nlohmann::json& j) {
  TrialRecord r;
  r.algorithm = j.at("algorithm").get<std::string>();
  r.objective = j.at("objective").get<std::string>();
  r.n = j.at("n").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.budget = j.at("budget").get<std::uint64_t>();
  r.hitting_time = j.at("hitting_time").get<std::uint64_t>();
  r.exhausted = j.at("exhausted").get<bool>();
  r.iterations = j.at("iterations").get<std::uint64_t>();
  r.f_calls = j.at("f_calls").get<std::uint64_t>();
  r.median_lambda = j.at("median_lambda").get<double>();
  r.mean_epsilon = j.at("mean_epsilon").get<double>();
  for (const nlohmann::json& p : j.at("trajectory")) {
    r.trajectory.push_back(
        TrajectoryPoint{p.at("iteration").get<std::uint64_t>(),
                        p.at("lambda").get<int>(),
                        p.at("epsilon").get<double>()});
  }
  r.theta_min = j.at("theta_min").get<double>();
  r.theta_mean = j.at("theta_mean").get<double>();
  r.theta_max = j.at("theta_max").get<double>();
  return r;
}

}  // namespace

void emit_jsonl(const std::vector<TrialRecord>& records, std::ostream& out) {
  for (const TrialRecord& r : records) {
    out << record_to_json(r).dump() << '\n';
  }
}

std::vector<TrialRecord> parse_jsonl(std::istream& in) {
  std::vector<TrialRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return records;
}

void emit(const std::vector<TrialRecord>& records, EmitFormat format,
          const std::string& path) {
  if (records.empty()) {
    throw std::invalid_argument("emit: no records");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("emit: cannot write " + path);
  }
  if (format == EmitFormat::csv) {
    emit_csv(records, out);
  } else {
    emit_jsonl(records, out);
  }
}

void print_report(const std::vector<SuiteRow>& report, std::ostream& out) {
  out << "algorithm,objective,n,median,lower_q,upper_q,successes,trials\n";
  for (const SuiteRow& row : report) {
    out << row.algorithm << ',' << row.objective << ',' << row.n << ','
        << format_double(row.hitting.median) << ','
        << format_double(row.hitting.lower) << ','
        << format_double(row.hitting.upper) << ',' << row.successes << ','
        << row.trials << '\n';
  }
}

std::vector<AlphaSweepRow> alpha_sweep(const std::vector<double>& alphas,
                                       const ObjectiveConfig& objective,
                                       const std::vector<std::size_t>& dims,
                                       int trials, std::uint64_t budget,
                                       std::uint64_t base_seed, int workers,
                                       std::vector<TrialRecord>* records_out) {
  if (alphas.empty()) {
    throw std::invalid_argument("alpha_sweep: no alpha values");
  }
  SuiteConfig config;
  for (const double a : alphas) {
    config.algorithms.push_back(AlgoConfig::parameterless_lambda(a));
  }
  config.objectives = {objective};
  config.dims = dims;
  config.trials = trials;
  config.budget = budget;
  config.base_seed = base_seed;
  config.workers = workers;

  const SuiteResult result = run_suite(config);
  if (records_out != nullptr) {
    *records_out = result.records;
  }

  std::vector<AlphaSweepRow> rows;
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    for (std::size_t ni = 0; ni < dims.size(); ++ni) {
      const SuiteRow& src = result.report[ai * dims.size() + ni];
      AlphaSweepRow row;
      row.alpha = alphas[ai];
      row.objective = src.objective;
      row.n = src.n;
      row.median = src.hitting.median;
      rows.push_back(row);
    }
  }
  for (std::size_t ni = 0; ni < dims.size(); ++ni) {
    double best = rows[ni].median;
    for (std::size_t ai = 1; ai < alphas.size(); ++ai) {
      best = std::min(best, rows[ai * dims.size() + ni].median);
    }
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      rows[ai * dims.size() + ni].ratio =
          rows[ai * dims.size() + ni].median / best;
    }
  }
  return rows;
}

void print_alpha_sweep(const std::vector<AlphaSweepRow>& rows,
                       std::ostream& out) {
  out << "alpha,objective,n,median,ratio\n";
  for (const AlphaSweepRow& row : rows) {
    out << format_double(row.alpha) << ',' << row.objective << ',' << row.n
        << ',' << format_double(row.median) << ','
        << format_double(row.ratio) << '\n';
  }
}

}  // namespace igo
