// cslearn command line: train, experiment, synth, bounds, verify.
// Every subcommand accepts --config <file> with flat `key = value` lines
// mirroring its flags; explicit flags override the file.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cslearn/bounds.hpp"
#include "cslearn/dataset_io.hpp"
#include "cslearn/fairness.hpp"
#include "cslearn/optimizer.hpp"
#include "cslearn/verification.hpp"

using namespace cslearn;

namespace {

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string field;
  while (std::getline(ss, field, ',')) {
    if (!field.empty()) values.push_back(std::stod(field));
  }
  return values;
}

std::string trim(const std::string& s) {
  const std::size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const std::size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Rewrites `prog sub ... --config FILE ...` into
// `prog sub --key=value... <original args>` so the flat config file acts as
// defaults and explicit flags override it (options use a take-last policy).
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config_path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open config file: " + config_path);
  std::vector<std::string> expanded(args.begin(), args.begin() + std::min<std::size_t>(2, args.size()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(config_path + " line " + std::to_string(line_no) +
                               ": expected key = value");
    }
    const std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) {
      throw std::runtime_error(config_path + " line " + std::to_string(line_no) +
                               ": empty key");
    }
    expanded.push_back("--" + key + "=" + value);
  }
  expanded.insert(expanded.end(), args.begin() + std::min<std::size_t>(2, args.size()),
                  args.end());
  return expanded;
}

struct TrainCli {
  std::string data_csv;
  std::string test_csv;
  std::string mode = "dual";
  std::string objective = "bce";
  std::string kind = "mlp";
  std::size_t hidden = 256;
  std::string activation = "sigmoid";
  std::string output = "sigmoid";
  bool bias = true;
  double c = 0.0;
  bool swap_kl = false;
  std::string weights;
  std::string lambda_init;
  std::size_t epochs = 300;
  std::size_t inner_steps = 20;
  double primal_lr = 0.1;
  double dual_lr = 0.05;
  std::size_t batch = 0;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  double ball_radius = 0.0;
  double box_lo = 0.0;
  double box_hi = 0.0;
  bool encode_z = true;
  std::string out = "training_log.csv";
  std::string model_out;
};

Activation parse_activation(const std::string& name) {
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "relu") return Activation::ReLU;
  if (name == "tanh") return Activation::Tanh;
  throw CLI::ValidationError("--activation", "expected sigmoid|relu|tanh");
}

OutputKind parse_output(const std::string& name) {
  if (name == "sigmoid") return OutputKind::Sigmoid;
  if (name == "identity") return OutputKind::Identity;
  throw CLI::ValidationError("--output", "expected sigmoid|identity");
}

int run_train(const TrainCli& cli) {
  DatasetCsvOptions load;
  load.encode_protected = cli.encode_z && cli.c > 0.0;
  load.require_binary_labels = cli.objective == "bce";
  const Dataset train = load_dataset_csv(cli.data_csv, load);

  ConstrainedProblem problem;
  problem.objective =
      cli.objective == "bce" ? LossSpec::binary_cross_entropy() : LossSpec::squared_error();
  if (cli.c > 0.0) {
    problem.constraints.push_back(make_fair_problem(cli.c, cli.swap_kl).constraints[0]);
  }

  AdmissibleSet set = AdmissibleSet::unbounded();
  if (cli.ball_radius > 0.0) set = AdmissibleSet::l2_ball(cli.ball_radius);
  if (cli.box_lo != 0.0 || cli.box_hi != 0.0) set = AdmissibleSet::box(cli.box_lo, cli.box_hi);

  ModelConfig model_config =
      cli.kind == "linear"
          ? ModelConfig::linear(train.dimension(), cli.bias, set)
          : ModelConfig::mlp(train.dimension(), cli.hidden, parse_activation(cli.activation),
                             parse_output(cli.output), set);
  if (cli.kind == "linear") model_config.output = parse_output(cli.output);
  const Parameterization init = init_params(model_config, cli.seed);

  TrainConfig config;
  config.epochs = cli.epochs;
  config.inner_steps = cli.inner_steps;
  config.primal_lr = cli.primal_lr;
  config.dual_lr = cli.dual_lr;
  config.batch_size = cli.batch;
  config.seed = cli.seed;
  config.lambda_init = parse_doubles(cli.lambda_init);

  std::optional<Dataset> test;
  if (!cli.test_csv.empty()) {
    test = load_dataset_csv(cli.test_csv, load);
    if (test->protected_slot()) {
      const double threshold = cli.threshold;
      const Dataset& test_ref = *test;
      config.epoch_metrics = [&test_ref, threshold](const Parameterization& model) {
        const FairnessMetrics metrics = evaluate_metrics(model, test_ref, threshold);
        return std::make_pair(metrics.accuracy, metrics.fairness);
      };
    }
  }

  TrainResult result = [&] {
    if (cli.mode == "dual") {
      config.mode = TrainMode::DualAscent;
      return train_dual(problem, init, train, config);
    }
    if (cli.mode == "regularized") {
      config.mode = TrainMode::Regularized;
      config.weights = parse_doubles(cli.weights);
      return train_regularized(problem, init, train, config);
    }
    if (cli.mode == "unconstrained") {
      config.mode = TrainMode::Unconstrained;
      return train_unconstrained(problem.objective, init, train, config);
    }
    throw CLI::ValidationError("--mode", "expected dual|regularized|unconstrained");
  }();

  write_training_log_csv(result.log, cli.out);
  if (!cli.model_out.empty()) save_model(result.model, cli.model_out);

  const EpochRecord& last = result.log.records.back();
  std::printf("trained %zu epochs on %zu samples; final objective %.6g\n", cli.epochs,
              train.size(), last.objective);
  for (std::size_t k = 0; k < last.slacks.size(); ++k) {
    std::printf("constraint %zu (%s): slack %.6g, lambda %.6g\n", k,
                problem.constraints[k].name.c_str(), last.slacks[k], last.lambdas[k]);
  }
  std::printf("log written to %s\n", cli.out.c_str());
  if (!cli.model_out.empty()) std::printf("model written to %s\n", cli.model_out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constrained statistical learning: primal-dual training with duality-gap "
               "certificates and a fair-learning pipeline"};
  app.require_subcommand(1);

  // --- train ---------------------------------------------------------------
  TrainCli train_cli;
  CLI::App* train_cmd = app.add_subcommand("train", "train one model from a config/flags");
  train_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string train_config;
  train_cmd->add_option("--config", train_config,
                        "flat key = value file mirroring the flags; flags override it");
  train_cmd->add_option("--train", train_cli.data_csv, "dataset CSV (x0..x{d-1},y[,z])")
      ->required();
  train_cmd->add_option("--test", train_cli.test_csv, "held-out CSV for per-epoch metrics");
  train_cmd->add_option("--mode", train_cli.mode, "dual|regularized|unconstrained");
  train_cmd->add_option("--objective", train_cli.objective, "bce|squared");
  train_cmd->add_option("--kind", train_cli.kind, "mlp|linear");
  train_cmd->add_option("--hidden", train_cli.hidden, "hidden width (mlp)");
  train_cmd->add_option("--activation", train_cli.activation, "sigmoid|relu|tanh");
  train_cmd->add_option("--output", train_cli.output, "sigmoid|identity");
  train_cmd->add_flag("--bias,!--no-bias", train_cli.bias, "linear bias term");
  train_cmd->add_option("--c", train_cli.c, "fairness KL threshold; adds the fairness_kl constraint");
  train_cmd->add_flag("--swap-kl", train_cli.swap_kl, "swap the KL argument order");
  train_cmd->add_option("--weights", train_cli.weights, "comma list, regularized mode");
  train_cmd->add_option("--lambda-init", train_cli.lambda_init, "comma list, dual mode");
  train_cmd->add_option("--epochs", train_cli.epochs);
  train_cmd->add_option("--inner-steps", train_cli.inner_steps);
  train_cmd->add_option("--lr-primal", train_cli.primal_lr);
  train_cmd->add_option("--lr-dual", train_cli.dual_lr);
  train_cmd->add_option("--batch", train_cli.batch, "0 = full batch");
  train_cmd->add_option("--seed", train_cli.seed);
  train_cmd->add_option("--threshold", train_cli.threshold, "decision threshold for metrics");
  train_cmd->add_option("--ball-radius", train_cli.ball_radius, "L2 ball admissible set");
  train_cmd->add_option("--box-lo", train_cli.box_lo);
  train_cmd->add_option("--box-hi", train_cli.box_hi);
  train_cmd->add_flag("--encode-z,!--no-encode-z", train_cli.encode_z,
                      "append the encoded z column as a feature slot");
  train_cmd->add_option("--out", train_cli.out, "training log CSV path");
  train_cmd->add_option("--model-out", train_cli.model_out, "model checkpoint path");

  // --- experiment ----------------------------------------------------------
  ExperimentConfig experiment;
  std::string numeric_cols, categorical_cols;
  std::size_t dvc_flag = 0;
  CLI::App* exp_cmd =
      app.add_subcommand("experiment", "unconstrained vs constrained fair-learning runs");
  exp_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string exp_config;
  exp_cmd->add_option("--config", exp_config,
                      "flat key = value file mirroring the flags; flags override it");
  exp_cmd->add_option("--train", experiment.train_csv, "Adult-schema training CSV")->required();
  exp_cmd->add_option("--test", experiment.test_csv,
                      "Adult-schema test CSV (omit for a deterministic 80/20 split)");
  exp_cmd->add_option("--c", experiment.c, "fairness KL threshold");
  exp_cmd->add_option("--hidden", experiment.hidden);
  exp_cmd->add_option("--epochs", experiment.epochs);
  exp_cmd->add_option("--inner-steps", experiment.inner_steps);
  exp_cmd->add_option("--lr-primal", experiment.primal_lr);
  exp_cmd->add_option("--lr-dual", experiment.dual_lr);
  exp_cmd->add_option("--batch", experiment.batch_size, "0 = full batch");
  exp_cmd->add_option("--seed", experiment.seed);
  exp_cmd->add_option("--threshold", experiment.threshold);
  exp_cmd->add_flag("--swap-kl", experiment.swap_kl);
  exp_cmd->add_option("--split", experiment.split_fraction, "train fraction when splitting");
  exp_cmd->add_option("--out", experiment.out_dir, "output directory")->required();
  exp_cmd->add_option("--eps", experiment.cert_epsilon, "assumed parameterization epsilon");
  exp_cmd->add_option("--delta", experiment.cert_delta, "certificate confidence delta");
  exp_cmd->add_option("--L", experiment.cert_lipschitz, "assumed Lipschitz constant");
  exp_cmd->add_option("--dvc", dvc_flag,
                      "assumed VC dimension (defaults to the parameter count)");
  exp_cmd->add_option("--numeric-cols", numeric_cols, "comma list (default: auto-detect)");
  exp_cmd->add_option("--categorical-cols", categorical_cols, "comma list (default: auto-detect)");
  exp_cmd->add_option("--protected-col", experiment.preprocess.protected_column);
  exp_cmd->add_option("--label-col", experiment.preprocess.label_column);
  exp_cmd->add_option("--positive-label", experiment.preprocess.positive_label);

  // --- synth ---------------------------------------------------------------
  SynthConfig synth;
  std::string synth_out = ".";
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate synthetic Adult-schema CSVs");
  synth_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string synth_config;
  synth_cmd->add_option("--config", synth_config,
                        "flat key = value file mirroring the flags; flags override it");
  synth_cmd->add_option("--n-train", synth.n_train)->required();
  synth_cmd->add_option("--n-test", synth.n_test);
  synth_cmd->add_option("--d-numeric", synth.d_numeric);
  synth_cmd->add_option("--bias", synth.bias_strength, "group-dependent logit shift");
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--out", synth_out, "output directory")->required();

  // --- bounds --------------------------------------------------------------
  double b_bound = 1.0, b_delta = 0.5, b_eps = 0.0, b_lambda = 0.0, b_lip = 1.0;
  std::size_t b_n = 1, b_dvc = 1;
  std::string bounds_out;
  CLI::App* bounds_cmd =
      app.add_subcommand("bounds", "evaluate the duality-gap certificate from assumed constants");
  bounds_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string bounds_config;
  bounds_cmd->add_option("--config", bounds_config,
                         "flat key = value file mirroring the flags; flags override it");
  bounds_cmd->add_option("--B", b_bound, "loss range bound")->required();
  bounds_cmd->add_option("--N", b_n, "sample count")->required();
  bounds_cmd->add_option("--dvc", b_dvc, "VC dimension")->required();
  bounds_cmd->add_option("--delta", b_delta, "confidence parameter in (0,1)")->required();
  bounds_cmd->add_option("--eps", b_eps, "parameterization epsilon")->required();
  bounds_cmd->add_option("--lambda-l1", b_lambda, "l1 norm of the trained duals")->required();
  bounds_cmd->add_option("--L", b_lip, "Lipschitz constant (default 1)");
  bounds_cmd->add_option("--out", bounds_out, "also write the certificate to this file");

  // --- verify --------------------------------------------------------------
  ConvexSuiteOptions suite;
  std::string suite_name = "convex";
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "independent oracle checks on convex instances");
  verify_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string verify_config;
  verify_cmd->add_option("--config", verify_config,
                         "flat key = value file mirroring the flags; flags override it");
  verify_cmd->add_option("--suite", suite_name, "only 'convex' is available");
  verify_cmd->add_option("--seeds", suite.num_instances, "number of random instances");
  verify_cmd->add_option("--base-seed", suite.base_seed);

  std::vector<std::string> args;
  try {
    args = expand_config_args(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::vector<const char*> arg_ptrs;
  arg_ptrs.reserve(args.size());
  for (const std::string& a : args) arg_ptrs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(arg_ptrs.size()), arg_ptrs.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train_cmd) return run_train(train_cli);

    if (*exp_cmd) {
      if (!numeric_cols.empty() || !categorical_cols.empty()) {
        experiment.preprocess.auto_detect = false;
        std::stringstream ns(numeric_cols), cs(categorical_cols);
        std::string field;
        while (std::getline(ns, field, ',')) {
          if (!field.empty()) experiment.preprocess.numeric_columns.push_back(field);
        }
        while (std::getline(cs, field, ',')) {
          if (!field.empty()) experiment.preprocess.categorical_columns.push_back(field);
        }
      }
      if (dvc_flag > 0) experiment.cert_vc_dim = dvc_flag;
      const ExperimentResult result = run_experiment(experiment);
      std::fputs(experiment_report_text(result).c_str(), stdout);
      std::printf("artifacts written to %s\n", experiment.out_dir.c_str());
      return 0;
    }

    if (*synth_cmd) {
      std::filesystem::create_directories(synth_out);
      const std::filesystem::path dir(synth_out);
      synth_generate(synth, (dir / "train.csv").string(), (dir / "test.csv").string());
      std::printf("wrote %s and %s\n", (dir / "train.csv").c_str(), (dir / "test.csv").c_str());
      return 0;
    }

    if (*bounds_cmd) {
      const GapCertificate cert =
          total_gap_certificate(b_bound, b_n, b_dvc, b_delta, b_lip, b_eps,
                                DualState({b_lambda}));
      std::fputs(certificate_to_text(cert).c_str(), stdout);
      if (!bounds_out.empty()) write_certificate(cert, bounds_out);
      return 0;
    }

    if (*verify_cmd) {
      if (suite_name != "convex") {
        std::fprintf(stderr, "unknown suite '%s'\n", suite_name.c_str());
        return 2;
      }
      const std::vector<CheckLine> lines = run_convex_suite(suite);
      int failures = 0;
      for (const CheckLine& line : lines) {
        std::puts(line.to_string().c_str());
        if (!line.pass) ++failures;
      }
      std::printf("verify: %zu checks, %d failures\n", lines.size(), failures);
      return failures == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
