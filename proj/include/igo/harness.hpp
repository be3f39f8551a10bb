#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "igo/objectives.hpp"
#include "igo/optimizer.hpp"
#include "igo/stats.hpp"

namespace igo {

struct AlgoConfig {
  enum class Kind { pbil_lambda, pbil_eps, cga, umda, pbil };
  enum class EpsRule { preset, inv_n, inv_sqrt_n, value };

  Kind kind = Kind::pbil_lambda;
  EpsRule eps_rule = EpsRule::preset;
  double eps_value = 0.0;
  double alpha = 1.5;
  int lambda = 16;  // umda / pbil only
  std::optional<int> lambda_max;

  /// The step size this config resolves to at dimension n, or nullopt for
  /// the constructor's own default.
  std::optional<double> resolve_epsilon(std::size_t n) const;
  Optimizer make(std::size_t n) const;
  std::string label() const;

  static AlgoConfig parameterless_lambda(double alpha = 1.5,
                                         EpsRule rule = EpsRule::preset,
                                         double eps_value = 0.0);
  static AlgoConfig fixed_cga(EpsRule rule = EpsRule::preset,
                              double eps_value = 0.0);
};

struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::onemax;
  double sigma = 1.0;                  // noisy-onemax only
  std::vector<double> linear_weights;  // linear only; empty means all ones

  Objective make(std::size_t n) const;
  std::string label() const { return objective_kind_name(kind); }
};

struct TrajectoryPoint {
  std::uint64_t iteration = 0;
  int lambda = 0;
  double epsilon = 0.0;

  bool operator==(const TrajectoryPoint&) const = default;
};

struct TrialRecord {
  std::string algorithm;
  std::string objective;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t budget = 0;
  std::uint64_t hitting_time = 0;  // f-calls; equals budget when exhausted
  bool exhausted = false;
  std::uint64_t iterations = 0;
  std::uint64_t f_calls = 0;
  // median of lambda over f-call time (iterations weighted by their lambda)
  double median_lambda = 0.0;
  double mean_epsilon = 0.0;
  // Every iteration for n <= 200, every 10th beyond.
  std::vector<TrajectoryPoint> trajectory;
  double theta_min = 0.0;
  double theta_mean = 0.0;
  double theta_max = 0.0;

  bool operator==(const TrialRecord&) const = default;
};

/// One seeded run: ask, evaluate each sample (recording the f-call index of
/// the first optimum), tell; stops at the first hit or once the next batch
/// would exceed the budget.
TrialRecord run_trial(const AlgoConfig& algo, const ObjectiveConfig& objective,
                      std::size_t n, std::uint64_t budget, std::uint64_t seed);

/// Deterministic per-trial seed from (base seed, algorithm, objective, n,
/// trial index).
std::uint64_t trial_seed(std::uint64_t base_seed, std::string_view algo_label,
                         std::string_view objective_label, std::size_t n,
                         int trial);

struct SuiteConfig {
  std::vector<AlgoConfig> algorithms;
  std::vector<ObjectiveConfig> objectives;
  std::vector<std::size_t> dims;
  int trials = 10;
  std::uint64_t budget = 10'000'000;
  std::uint64_t base_seed = 1;
  int workers = 1;  // <= 0 means hardware concurrency
};

struct SuiteRow {
  std::string algorithm;
  std::string objective;
  std::size_t n = 0;
  Quartiles hitting;  // over censored hitting times
  int successes = 0;
  int trials = 0;
};

struct SuiteResult {
  // algorithms x objectives x dims x trials, in config order regardless of
  // worker count.
  std::vector<TrialRecord> records;
  std::vector<SuiteRow> report;
};

SuiteResult run_suite(const SuiteConfig& config);

enum class EmitFormat { csv, jsonl };

void emit_csv(const std::vector<TrialRecord>& records, std::ostream& out);
void emit_jsonl(const std::vector<TrialRecord>& records, std::ostream& out);
std::vector<TrialRecord> parse_jsonl(std::istream& in);
void emit(const std::vector<TrialRecord>& records, EmitFormat format,
          const std::string& path);

void print_report(const std::vector<SuiteRow>& report, std::ostream& out);

struct AlphaSweepRow {
  double alpha = 0.0;
  std::string objective;
  std::size_t n = 0;
  double median = 0.0;
  double ratio = 0.0;  // median over the best alpha's median at this n

  bool operator==(const AlphaSweepRow&) const = default;
};

/// Runs the parameterless sample-size adapter at each alpha and normalizes
/// per-(objective, n) medians by the best alpha's median.
std::vector<AlphaSweepRow> alpha_sweep(const std::vector<double>& alphas,
                                       const ObjectiveConfig& objective,
                                       const std::vector<std::size_t>& dims,
                                       int trials, std::uint64_t budget,
                                       std::uint64_t base_seed, int workers,
                                       std::vector<TrialRecord>* records_out);

void print_alpha_sweep(const std::vector<AlphaSweepRow>& rows,
                       std::ostream& out);

}  // namespace igo
