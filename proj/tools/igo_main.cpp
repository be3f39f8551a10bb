#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "igo/harness.hpp"
#include "igo/neuro.hpp"

namespace {

igo::AlgoConfig::Kind parse_algo(const std::string& name) {
  using Kind = igo::AlgoConfig::Kind;
  if (name == "pbil-lambda") return Kind::pbil_lambda;
  if (name == "pbil-eps") return Kind::pbil_eps;
  if (name == "cga") return Kind::cga;
  if (name == "umda") return Kind::umda;
  if (name == "pbil") return Kind::pbil;
  throw CLI::ValidationError("--algo", "unknown algorithm " + name);
}

igo::ObjectiveKind parse_objective(const std::string& name) {
  if (name == "onemax") return igo::ObjectiveKind::onemax;
  if (name == "leadingones") return igo::ObjectiveKind::leadingones;
  if (name == "linear") return igo::ObjectiveKind::linear;
  if (name == "noisy-onemax") return igo::ObjectiveKind::noisy_onemax;
  throw CLI::ValidationError("--objective", "unknown objective " + name);
}

void apply_epsilon(igo::AlgoConfig& algo, const std::string& spec) {
  using EpsRule = igo::AlgoConfig::EpsRule;
  if (spec == "default") {
    algo.eps_rule = EpsRule::preset;
  } else if (spec == "inv-n") {
    algo.eps_rule = EpsRule::inv_n;
  } else if (spec == "inv-sqrt-n") {
    algo.eps_rule = EpsRule::inv_sqrt_n;
  } else {
    try {
      algo.eps_value = std::stod(spec);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--epsilon",
                                 "expected default|inv-n|inv-sqrt-n|<real>");
    }
    algo.eps_rule = EpsRule::value;
  }
}

struct BenchOptions {
  std::string algo = "pbil-lambda";
  std::string objective = "onemax";
  std::vector<std::size_t> dims = {10, 30, 100, 300, 1000, 3000};
  int trials = 10;
  double alpha = 1.5;
  std::string epsilon = "default";
  std::uint64_t budget = 10'000'000;
  std::uint64_t seed = 1;
  int workers = 0;
  std::string out;
  std::string format = "csv";
  int lambda = 16;
  double sigma = 1.0;
  std::string weights_file;
  int lambda_max = 0;
};

void add_common_flags(CLI::App* cmd, BenchOptions& opt) {
  cmd->add_option("--objective", opt.objective,
                  "onemax|leadingones|linear|noisy-onemax")
      ->capture_default_str();
  cmd->add_option("--n", opt.dims, "comma-separated dimension grid")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--trials", opt.trials, "trials per configuration")
      ->capture_default_str();
  cmd->add_option("--budget", opt.budget, "f-call budget per trial")
      ->capture_default_str();
  cmd->add_option("--seed", opt.seed, "base seed")->capture_default_str();
  cmd->add_option("--workers", opt.workers,
                  "parallel trial runners (0 = all cores)")
      ->capture_default_str();
  cmd->add_option("--out", opt.out, "write per-trial records to this path");
  cmd->add_option("--format", opt.format, "csv|jsonl")->capture_default_str();
  cmd->add_option("--sigma", opt.sigma, "noise level for noisy-onemax")
      ->capture_default_str();
  cmd->add_option("--weights-file", opt.weights_file,
                  "one weight per line for the linear objective");
}

igo::ObjectiveConfig make_objective(const BenchOptions& opt) {
  igo::ObjectiveConfig cfg;
  cfg.kind = parse_objective(opt.objective);
  cfg.sigma = opt.sigma;
  if (!opt.weights_file.empty()) {
    if (cfg.kind != igo::ObjectiveKind::linear) {
      throw CLI::ValidationError("--weights-file",
                                 "only the linear objective takes weights");
    }
    cfg.linear_weights = igo::load_weights_file(opt.weights_file);
  }
  return cfg;
}

igo::EmitFormat parse_format(const std::string& name) {
  if (name == "csv") return igo::EmitFormat::csv;
  if (name == "jsonl") return igo::EmitFormat::jsonl;
  throw CLI::ValidationError("--format", "expected csv or jsonl");
}

int run_bench(const BenchOptions& opt) {
  igo::AlgoConfig algo;
  algo.kind = parse_algo(opt.algo);
  algo.alpha = opt.alpha;
  algo.lambda = opt.lambda;
  if (opt.lambda_max > 0) algo.lambda_max = opt.lambda_max;
  apply_epsilon(algo, opt.epsilon);

  igo::SuiteConfig suite;
  suite.algorithms = {algo};
  suite.objectives = {make_objective(opt)};
  suite.dims = opt.dims;
  suite.trials = opt.trials;
  suite.budget = opt.budget;
  suite.base_seed = opt.seed;
  suite.workers = opt.workers;

  const igo::SuiteResult result = igo::run_suite(suite);
  igo::print_report(result.report, std::cout);
  if (!opt.out.empty()) {
    igo::emit(result.records, parse_format(opt.format), opt.out);
  }
  return 0;
}

int run_alpha_sweep(const BenchOptions& opt, const std::vector<double>& alphas,
                    const std::string& sweep_out) {
  std::vector<igo::TrialRecord> records;
  const std::vector<igo::AlphaSweepRow> rows = igo::alpha_sweep(
      alphas, make_objective(opt), opt.dims, opt.trials, opt.budget, opt.seed,
      opt.workers, &records);
  igo::print_alpha_sweep(rows, std::cout);
  if (!opt.out.empty()) {
    igo::emit(records, parse_format(opt.format), opt.out);
  }
  if (!sweep_out.empty()) {
    std::ofstream out(sweep_out);
    if (!out) throw std::runtime_error("cannot write " + sweep_out);
    igo::print_alpha_sweep(rows, out);
  }
  return 0;
}

struct NeuroOptions {
  std::string mode = "activation";
  std::string optimizer = "pbil-eps";
  std::size_t updates = 20000;
  std::uint64_t seed = 1;
  std::string out;
  std::string data;
  bool double_batch = false;
  std::size_t batch_size = 64;
  double lr0 = 0.05;
};

int run_neuro(const NeuroOptions& opt) {
  using namespace igo::neuro;
  TrainConfig config;
  if (opt.mode == "layerskip") {
    config.gating = Gating::layer_skip;
  } else if (opt.mode == "activation") {
    config.gating = Gating::activation_select;
  } else {
    throw CLI::ValidationError("--mode", "expected layerskip or activation");
  }
  if (opt.optimizer == "pbil-eps") {
    config.optimizer = TrainConfig::Opt::pbil_eps;
  } else if (opt.optimizer == "pbil-lambda") {
    config.optimizer = TrainConfig::Opt::pbil_lambda;
  } else if (opt.optimizer == "cga") {
    config.optimizer = TrainConfig::Opt::cga;
  } else {
    throw CLI::ValidationError("--optimizer",
                               "expected pbil-eps, pbil-lambda or cga");
  }
  config.t_max = opt.updates;
  config.seed = opt.seed;
  config.double_batch_lambda = opt.double_batch;
  config.batch_size = opt.batch_size;
  config.lr0 = opt.lr0;

  Dataset train, test;
  if (!opt.data.empty()) {
    Dataset all = load_csv_dataset(opt.data);
    // deterministic 3:1 split by row index
    train.feature_dim = test.feature_dim = all.feature_dim;
    train.classes = test.classes = all.classes;
    for (std::size_t i = 0; i < all.size(); ++i) {
      Dataset& dst = i % 4 == 3 ? test : train;
      dst.x.push_back(all.x[i]);
      dst.y.push_back(all.y[i]);
    }
  } else {
    train = gen_spiral_dataset(3000, 3, 0.2, opt.seed * 2 + 1);
    test = gen_spiral_dataset(1000, 3, 0.2, opt.seed * 2 + 2);
  }

  const TrainResult result = train_simultaneous(config, train, test);

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!opt.out.empty()) {
    file.open(opt.out);
    if (!file) throw std::runtime_error("cannot write " + opt.out);
    out = &file;
  }
  for (const HistoryRow& row : result.history) {
    nlohmann::json j{{"update", row.update},
                     {"loss", row.loss},
                     {"lambda_r", row.lambda_r},
                     {"epsilon", row.epsilon},
                     {"theta_entropy", row.theta_entropy}};
    if (row.train_accuracy >= 0.0) {
      j["train_acc"] = row.train_accuracy;
      j["test_acc"] = row.test_accuracy;
    }
    *out << j.dump() << '\n';
  }
  nlohmann::json summary{{"summary", true},
                         {"updates", config.t_max},
                         {"final_train_acc", result.final_train.accuracy},
                         {"final_test_acc", result.final_test.accuracy},
                         {"final_test_loss", result.final_test.loss},
                         {"theta", result.theta.probs}};
  *out << summary.dump() << '\n';
  std::cerr << "final train acc " << result.final_train.accuracy
            << ", test acc " << result.final_test.accuracy << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box binary optimization benchmarks and joint"
               " weight/hyper-parameter training"};
  app.require_subcommand(1);

  BenchOptions bench_opt;
  CLI::App* bench = app.add_subcommand("bench", "first-hitting-time trials");
  bench->add_option("--algo", bench_opt.algo,
                    "pbil-lambda|pbil-eps|cga|umda|pbil")
      ->capture_default_str();
  bench->add_option("--alpha", bench_opt.alpha, "SNR threshold")
      ->capture_default_str();
  bench->add_option("--epsilon", bench_opt.epsilon,
                    "default|inv-n|inv-sqrt-n|<real>")
      ->capture_default_str();
  bench->add_option("--lambda", bench_opt.lambda,
                    "sample size for umda/pbil")
      ->capture_default_str();
  bench->add_option("--lambda-max", bench_opt.lambda_max,
                    "override the adaptation upper bound (0 = dimension)")
      ->capture_default_str();
  add_common_flags(bench, bench_opt);

  BenchOptions sweep_opt;
  std::vector<double> alphas = {1.1, 1.5, 2.0};
  std::string sweep_out;
  CLI::App* sweep = app.add_subcommand(
      "alpha-sweep", "hitting-time ratios across SNR thresholds");
  sweep->add_option("--alphas", alphas, "comma-separated alpha values")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--sweep-out", sweep_out, "write the ratio table here");
  add_common_flags(sweep, sweep_opt);

  NeuroOptions neuro_opt;
  CLI::App* neuro = app.add_subcommand(
      "neuro", "joint weight and binary hyper-parameter training");
  neuro->add_option("--mode", neuro_opt.mode, "layerskip|activation")
      ->capture_default_str();
  neuro->add_option("--optimizer", neuro_opt.optimizer,
                    "pbil-eps|pbil-lambda|cga")
      ->capture_default_str();
  neuro->add_option("--updates", neuro_opt.updates, "weight-update budget")
      ->capture_default_str();
  neuro->add_option("--seed", neuro_opt.seed, "seed")->capture_default_str();
  neuro->add_option("--out", neuro_opt.out, "JSONL history path");
  neuro->add_option("--data", neuro_opt.data,
                    "CSV dataset (features..., integer label)");
  neuro->add_option("--batch-size", neuro_opt.batch_size, "mini-batch size")
      ->capture_default_str();
  neuro->add_option("--lr", neuro_opt.lr0, "initial learning rate")
      ->capture_default_str();
  neuro->add_flag("--double-batch", neuro_opt.double_batch,
                  "2N mini-batches for the per-sample training loop");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bench->parsed()) return run_bench(bench_opt);
    if (sweep->parsed()) return run_alpha_sweep(sweep_opt, alphas, sweep_out);
    if (neuro->parsed()) return run_neuro(neuro_opt);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  return 0;
}
