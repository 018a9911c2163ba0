#include "cslearn/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include "cslearn/loss.hpp"

namespace cslearn {

namespace {

using ValueGradFn = std::function<double(const Parameterization&, std::vector<double>*)>;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Projected gradient mapping residual at unit step; equals the gradient norm
// on an unbounded set.
double projected_gradient_norm(const Parameterization& model, std::span<const double> grad) {
  if (model.config().admissible.kind == AdmissibleSet::Kind::Unbounded) return norm2(grad);
  Parameterization probe = model;
  probe.axpy(-1.0, grad);
  project_params_inplace(probe);
  double s = 0.0;
  for (std::size_t i = 0; i < probe.param_count(); ++i) {
    const double diff = model.params()[i] - probe.params()[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

// Projected backtracking gradient descent. Leaves the minimizer in `model`
// and returns its value.
double minimize_projected(Parameterization& model, const ValueGradFn& fg,
                          const InnerSolveOptions& options) {
  std::vector<double> grad;
  double value = fg(model, &grad);
  double step = 1.0;
  Parameterization trial = model;
  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    if (projected_gradient_norm(model, grad) <= options.grad_tol) break;
    step = std::min(step * 2.0, 1e3);
    bool moved = false;
    while (step > 1e-18) {
      trial = model;
      trial.axpy(-step, grad);
      project_params_inplace(trial);
      double move_sq = 0.0;
      for (std::size_t i = 0; i < trial.param_count(); ++i) {
        const double diff = trial.params()[i] - model.params()[i];
        move_sq += diff * diff;
      }
      if (move_sq == 0.0) break;  // projection pinned every coordinate
      const double trial_value = fg(trial, nullptr);
      if (std::isfinite(trial_value) &&
          trial_value <= value - 1e-4 * move_sq / step) {
        model = std::move(trial);
        value = fg(model, &grad);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;  // no descent direction at numerical resolution
  }
  return value;
}

}  // namespace

double KKTReport::max_feasibility() const {
  double worst = 0.0;
  for (double r : feasibility_residuals) worst = std::max(worst, r);
  return worst;
}

double KKTReport::sum_comp_slack() const {
  double s = 0.0;
  for (double r : comp_slack_residuals) s += r;
  return s;
}

KKTReport kkt_report(const ConstrainedProblem& problem, const Parameterization& model,
                     const DualState& duals, const Dataset& data,
                     const KKTTolerances& tolerances) {
  const EmpiricalStats stats = empirical_stats(problem, model, data);
  KKTReport report;
  report.feasibility_residuals.reserve(stats.slacks.size());
  report.comp_slack_residuals.reserve(stats.slacks.size());
  for (std::size_t k = 0; k < stats.slacks.size(); ++k) {
    report.feasibility_residuals.push_back(std::max(stats.slacks[k], 0.0));
    report.comp_slack_residuals.push_back(std::abs(duals.lambdas[k] * stats.slacks[k]));
  }
  const std::vector<double> grad = lagrangian_gradient_theta(problem, model, duals, data);
  report.stationarity_residual = projected_gradient_norm(model, grad);
  report.feasibility_pass = report.max_feasibility() <= tolerances.feasibility;
  report.comp_slack_pass = report.sum_comp_slack() <= tolerances.comp_slack;
  report.stationarity_pass = report.stationarity_residual <= tolerances.stationarity;
  return report;
}

double evaluate_dual_function(const ConstrainedProblem& problem, Parameterization& model,
                              const DualState& duals, const Dataset& data,
                              const InnerSolveOptions& options) {
  const ValueGradFn fg = [&](const Parameterization& point, std::vector<double>* grad) {
    if (grad) *grad = lagrangian_gradient_theta(problem, point, duals, data);
    return empirical_lagrangian(problem, point, duals, data);
  };
  return minimize_projected(model, fg, options);
}

PrimalSolveResult solve_primal_projected(const ConstrainedProblem& problem,
                                         Parameterization init, const Dataset& data,
                                         double tol, std::size_t max_penalty_rounds) {
  problem.validate();
  const std::size_t m = problem.num_constraints();
  PrimalSolveResult result{std::move(init), 0.0, std::vector<double>(m, 0.0), 0};
  InnerSolveOptions inner;

  double mu = 10.0;
  double prev_violation = std::numeric_limits<double>::infinity();
  for (std::size_t round = 0; round < max_penalty_rounds; ++round) {
    result.penalty_rounds = round + 1;
    // Augmented-Lagrangian value/gradient at fixed multipliers and penalty.
    const ValueGradFn fg = [&](const Parameterization& point, std::vector<double>* grad) {
      const EmpiricalStats stats = empirical_stats(problem, point, data);
      double value = stats.objective;
      DualState rho = DualState::zeros(m);
      for (std::size_t k = 0; k < m; ++k) {
        rho.lambdas[k] = std::max(0.0, result.multipliers[k] + mu * stats.slacks[k]);
        value += (rho.lambdas[k] * rho.lambdas[k] -
                  result.multipliers[k] * result.multipliers[k]) /
                 (2.0 * mu);
      }
      if (grad) *grad = lagrangian_gradient_theta(problem, point, rho, data);
      return value;
    };
    minimize_projected(result.model, fg, inner);

    const EmpiricalStats stats = empirical_stats(problem, result.model, data);
    double violation = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      violation = std::max(violation, std::max(stats.slacks[k], 0.0));
      result.multipliers[k] =
          std::max(0.0, result.multipliers[k] + mu * stats.slacks[k]);
    }
    result.value = stats.objective;
    if (violation <= tol) return result;
    if (violation > 0.25 * prev_violation) mu *= 2.0;
    prev_violation = violation;
  }
  throw std::runtime_error(
      "solve_primal_projected: infeasibility not resolved after " +
      std::to_string(max_penalty_rounds) + " penalty rounds");
}

DualityGapOptions::DualityGapOptions() {
  dual_config.mode = TrainMode::DualAscent;
  dual_config.epochs = 2500;
  dual_config.inner_steps = 40;
  dual_config.primal_lr = 0.02;
  dual_config.dual_lr = 0.15;
  dual_config.batch_size = 0;
}

DualityGapResult duality_gap_convex(const ConstrainedProblem& problem, const Dataset& data,
                                    const Parameterization& init,
                                    const DualityGapOptions& options) {
  const PrimalSolveResult primal = solve_primal_projected(problem, init, data, 1e-9, 60);

  TrainResult trained = train_dual(problem, init, data, options.dual_config);
  // The dual value is d_N at the trained multipliers; finish the inner
  // minimization exactly so the reported value is the dual function itself.
  Parameterization polished = std::move(trained.model);
  const double dual_value =
      evaluate_dual_function(problem, polished, trained.duals, data, options.inner);

  DualityGapResult result;
  result.primal_value = primal.value;
  result.dual_value = dual_value;
  result.gap = primal.value - dual_value;
  result.duals = trained.duals;
  result.final_slacks = empirical_stats(problem, polished, data).slacks;
  return result;
}

std::size_t ConcavityProbeResult::violations_beyond(double tol) const {
  std::size_t count = 0;
  for (const ConcavityCheck& c : checks) {
    if (c.violation > tol) ++count;
  }
  return count;
}

ConcavityProbeResult concavity_probe(const ConstrainedProblem& problem, const Dataset& data,
                                     const ModelConfig& model_config,
                                     const std::vector<std::pair<DualState, DualState>>& pairs,
                                     std::size_t inner_budget, std::uint64_t seed) {
  InnerSolveOptions options;
  options.max_iters = inner_budget;
  const auto dual_value_at = [&](const DualState& duals) {
    Parameterization model = init_params(model_config, seed);  // shared starting point
    return evaluate_dual_function(problem, model, duals, data, options);
  };

  ConcavityProbeResult result;
  result.checks.reserve(pairs.size());
  for (const auto& [lambda_a, lambda_b] : pairs) {
    if (lambda_a.size() != problem.num_constraints() ||
        lambda_b.size() != problem.num_constraints()) {
      throw std::invalid_argument("concavity_probe: dual length mismatch");
    }
    DualState mid = DualState::zeros(lambda_a.size());
    for (std::size_t k = 0; k < mid.size(); ++k) {
      mid.lambdas[k] = 0.5 * (lambda_a.lambdas[k] + lambda_b.lambdas[k]);
    }
    const double da = dual_value_at(lambda_a);
    const double db = dual_value_at(lambda_b);
    const double dm = dual_value_at(mid);
    ConcavityCheck check;
    check.lambda_a = lambda_a;
    check.lambda_b = lambda_b;
    check.violation = std::max(0.0, 0.5 * (da + db) - dm);
    result.max_violation = std::max(result.max_violation, check.violation);
    result.checks.push_back(std::move(check));
  }
  return result;
}

ConvexInstance make_convex_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dim_dist(1, 5);
  std::uniform_int_distribution<std::size_t> n_dist(40, 200);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t d = dim_dist(rng);
  const std::size_t n = n_dist(rng);

  std::vector<double> true_w(d + 1);
  for (double& w : true_w) w = 2.0 * unit(rng) - 1.0;

  std::vector<Sample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.features.resize(d);
    double y = true_w[d];
    for (std::size_t j = 0; j < d; ++j) {
      s.features[j] = normal(rng);
      y += true_w[j] * s.features[j];
    }
    s.label = y + 0.3 * normal(rng);
    samples.push_back(std::move(s));
  }
  Dataset data(std::move(samples), d);

  ConvexInstance instance{ConstrainedProblem{}, std::move(data), ModelConfig::linear(d, true),
                          seed};
  instance.problem.objective = LossSpec::squared_error();

  // Unconstrained minimizer: reference point for placing thresholds.
  Parameterization theta_uc(instance.model_config);
  {
    const ConstrainedProblem plain{instance.problem.objective, {}};
    const ValueGradFn fg = [&](const Parameterization& point, std::vector<double>* grad) {
      if (grad) *grad = lagrangian_gradient_theta(plain, point, DualState{}, instance.data);
      return empirical_lagrangian(plain, point, DualState{}, instance.data);
    };
    minimize_projected(theta_uc, fg, InnerSolveOptions{});
  }

  // Strictly feasible anchor shared by every constraint (Slater point by
  // construction).
  Parameterization anchor = theta_uc;
  {
    std::vector<double> offset(anchor.param_count());
    for (double& v : offset) v = 0.5 * normal(rng);
    anchor.axpy(1.0, offset);
  }

  const std::size_t m = 1 + (unit(rng) < 0.5 ? 1 : 0);
  for (std::size_t k = 0; k < m; ++k) {
    ConstraintSpec constraint;
    const double margin = 0.05 + 0.25 * unit(rng);
    if (unit(rng) < 0.5) {
      // Mean-prediction constraint, linear in theta.
      const double a = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + unit(rng));
      constraint.loss = LossSpec::custom(
          [a](double v, double) { return a * v + 2.0; },
          [a](double, double) { return a; }, 4.0, std::abs(a));
      constraint.name = "linear_" + std::to_string(k);
      ConstrainedProblem probe;
      probe.objective = constraint.loss;
      constraint.threshold =
          empirical_stats(probe, anchor, instance.data).objective + margin;
    } else {
      // Squared distance to a constant target, strictly convex in theta.
      const double target = 2.0 * unit(rng) - 1.0;
      constraint.loss = LossSpec::custom(
          [target](double v, double) { return (v - target) * (v - target); },
          [target](double v, double) { return 2.0 * (v - target); }, 4.0, 4.0);
      constraint.name = "quadratic_" + std::to_string(k);
      ConstrainedProblem probe;
      probe.objective = constraint.loss;
      constraint.threshold =
          empirical_stats(probe, anchor, instance.data).objective + margin;
    }
    instance.problem.constraints.push_back(std::move(constraint));
  }
  return instance;
}

ConvexInstance make_clipped_least_squares_instance() {
  std::vector<Sample> samples(2);
  samples[0].features = {1.0};
  samples[0].label = 0.0;
  samples[1].features = {1.0};
  samples[1].label = 1.0;
  Dataset data(std::move(samples), 1);

  ConvexInstance instance{ConstrainedProblem{}, std::move(data),
                          ModelConfig::linear(1, /*bias=*/false), 0};
  instance.problem.objective = LossSpec::squared_error();
  ConstraintSpec constraint;
  constraint.loss = LossSpec::custom([](double v, double) { return v; },
                                     [](double, double) { return 1.0; }, 1.0, 1.0);
  constraint.threshold = 0.25;
  constraint.name = "theta_cap";
  instance.problem.constraints.push_back(std::move(constraint));
  return instance;
}

std::string CheckLine::to_string() const {
  char buf[192];
  std::snprintf(buf, sizeof(buf), "%s,%s,%.6g,%g,%s", check.c_str(), instance.c_str(), residual,
                tolerance, pass ? "PASS" : "FAIL");
  return buf;
}

namespace {

CheckLine make_line(std::string check, std::string instance, double residual, double tol) {
  CheckLine line;
  line.check = std::move(check);
  line.instance = std::move(instance);
  line.residual = residual;
  line.tolerance = tol;
  line.pass = residual <= tol;
  return line;
}

}  // namespace

std::vector<CheckLine> run_convex_suite(const ConvexSuiteOptions& options) {
  std::vector<CheckLine> lines;

  for (std::size_t i = 0; i < options.num_instances; ++i) {
    const std::uint64_t seed = options.base_seed + i;
    const std::string id = "convex_" + std::to_string(seed);
    const ConvexInstance instance = make_convex_instance(seed);
    const Parameterization init = init_params(instance.model_config, seed);
    const DualityGapResult gap = duality_gap_convex(instance.problem, instance.data, init);

    lines.push_back(make_line("duality_gap", id, std::abs(gap.gap), options.gap_tol));
    lines.push_back(make_line("weak_duality", id,
                              std::max(0.0, gap.dual_value - gap.primal_value),
                              options.weak_duality_tol));
    double comp_slack = 0.0;
    double feasibility = 0.0;
    for (std::size_t k = 0; k < gap.final_slacks.size(); ++k) {
      comp_slack += std::abs(gap.duals.lambdas[k] * gap.final_slacks[k]);
      feasibility = std::max(feasibility, std::max(gap.final_slacks[k], 0.0));
    }
    lines.push_back(make_line("kkt_comp_slack", id, comp_slack, options.kkt.comp_slack));
    lines.push_back(make_line("kkt_feasibility", id, feasibility, options.kkt.feasibility));
  }

  {
    // Closed-form 1-D instance: theta* = 0.25, value 0.3125.
    const ConvexInstance instance = make_clipped_least_squares_instance();
    Parameterization init(instance.model_config);
    const PrimalSolveResult primal =
        solve_primal_projected(instance.problem, init, instance.data, 1e-9, 60);
    const DualityGapResult gap = duality_gap_convex(instance.problem, instance.data, init);
    lines.push_back(make_line("closed_form_primal_value", "clipped_ls",
                              std::abs(primal.value - 0.3125), 1e-3));
    lines.push_back(make_line("closed_form_primal_theta", "clipped_ls",
                              std::abs(primal.model.params()[0] - 0.25), 1e-3));
    lines.push_back(
        make_line("closed_form_dual_value", "clipped_ls", std::abs(gap.dual_value - 0.3125), 1e-3));
  }

  if (options.concavity_pairs > 0) {
    const ConvexInstance instance = make_convex_instance(options.base_seed);
    std::mt19937_64 rng(options.base_seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unit(0.0, 2.0);
    std::vector<std::pair<DualState, DualState>> pairs;
    for (std::size_t j = 0; j < options.concavity_pairs; ++j) {
      DualState a = DualState::zeros(instance.problem.num_constraints());
      DualState b = DualState::zeros(instance.problem.num_constraints());
      for (std::size_t k = 0; k < a.size(); ++k) {
        a.lambdas[k] = unit(rng);
        b.lambdas[k] = unit(rng);
      }
      pairs.emplace_back(std::move(a), std::move(b));
    }
    const ConcavityProbeResult probe = concavity_probe(
        instance.problem, instance.data, instance.model_config, pairs, 20000, options.base_seed);
    for (std::size_t j = 0; j < probe.checks.size(); ++j) {
      lines.push_back(make_line("concavity_pair_" + std::to_string(j),
                                "convex_" + std::to_string(options.base_seed),
                                probe.checks[j].violation, options.concavity_tol));
    }
  }

  return lines;
}

}  // namespace cslearn
