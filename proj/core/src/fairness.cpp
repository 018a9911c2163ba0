#include "cslearn/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cslearn/lagrangian.hpp"
#include "cslearn/loss.hpp"

namespace cslearn {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("CSV is empty: " + path);
  table.header = split_line(line);
  std::size_t file_line = 1;
  while (std::getline(in, line)) {
    ++file_line;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_line(line);
    if (fields.size() != table.header.size()) {
      throw std::runtime_error(path + " line " + std::to_string(file_line) + ": expected " +
                               std::to_string(table.header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

std::size_t find_column(const CsvTable& table, const std::string& name,
                        const std::string& role) {
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (table.header[j] == name) return j;
  }
  throw std::runtime_error("missing " + role + " column '" + name + "'");
}

bool parses_as_double(const std::string& s) {
  if (s.empty()) return false;
  try {
    std::size_t consumed = 0;
    (void)std::stod(s, &consumed);
    return consumed == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

double parse_double_strict(const std::string& s, std::size_t row, const std::string& column) {
  if (!parses_as_double(s)) {
    throw std::runtime_error("row " + std::to_string(row + 1) + ": field '" + s +
                             "' in column '" + column + "' is not numeric");
  }
  return std::stod(s);
}

std::string format_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void fit_spec(PreprocessSpec& spec, const CsvTable& train) {
  if (train.rows.empty()) throw std::runtime_error("preprocess: empty training split");
  const std::size_t protected_col = find_column(train, spec.protected_column, "protected");
  find_column(train, spec.label_column, "label");

  if (spec.auto_detect && spec.numeric_columns.empty() && spec.categorical_columns.empty()) {
    for (std::size_t j = 0; j < train.header.size(); ++j) {
      const std::string& name = train.header[j];
      if (name == spec.protected_column || name == spec.label_column) continue;
      bool numeric = true;
      for (const auto& row : train.rows) {
        if (!parses_as_double(row[j])) {
          numeric = false;
          break;
        }
      }
      if (numeric) {
        spec.numeric_columns.push_back(name);
      } else {
        spec.categorical_columns.push_back(name);
      }
    }
  }

  spec.means.clear();
  spec.stds.clear();
  for (const std::string& name : spec.numeric_columns) {
    const std::size_t col = find_column(train, name, "numeric");
    double sum = 0.0;
    for (std::size_t r = 0; r < train.rows.size(); ++r) {
      sum += parse_double_strict(train.rows[r][col], r, name);
    }
    const double mean = sum / static_cast<double>(train.rows.size());
    double var = 0.0;
    for (std::size_t r = 0; r < train.rows.size(); ++r) {
      const double diff = std::stod(train.rows[r][col]) - mean;
      var += diff * diff;
    }
    var /= static_cast<double>(train.rows.size());
    spec.means.push_back(mean);
    spec.stds.push_back(std::sqrt(std::max(var, 0.0)));
  }

  spec.vocabularies.clear();
  for (const std::string& name : spec.categorical_columns) {
    const std::size_t col = find_column(train, name, "categorical");
    std::set<std::string> values;
    for (const auto& row : train.rows) values.insert(row[col]);
    spec.vocabularies.emplace_back(values.begin(), values.end());
  }

  std::set<std::string> groups;
  for (const auto& row : train.rows) groups.insert(row[protected_col]);
  if (groups.size() != 2) {
    throw std::runtime_error("protected column '" + spec.protected_column +
                             "' must be binary-valued, found " + std::to_string(groups.size()) +
                             " distinct values");
  }
  spec.group_values.assign(groups.begin(), groups.end());
  spec.fitted = true;
}

Dataset encode_table(const CsvTable& table, const PreprocessSpec& spec) {
  if (!spec.fitted) throw std::logic_error("encode_table: spec not fitted");
  if (table.rows.empty()) throw std::runtime_error("preprocess: empty split");
  const std::size_t protected_col = find_column(table, spec.protected_column, "protected");
  const std::size_t label_col = find_column(table, spec.label_column, "label");
  std::vector<std::size_t> numeric_cols;
  for (const std::string& name : spec.numeric_columns) {
    numeric_cols.push_back(find_column(table, name, "numeric"));
  }
  std::vector<std::size_t> categorical_cols;
  for (const std::string& name : spec.categorical_columns) {
    categorical_cols.push_back(find_column(table, name, "categorical"));
  }

  const std::size_t dim = spec.feature_dim();
  std::vector<Sample> samples;
  samples.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Sample s;
    s.features.reserve(dim);
    for (std::size_t k = 0; k < numeric_cols.size(); ++k) {
      const double v = parse_double_strict(row[numeric_cols[k]], r, spec.numeric_columns[k]);
      s.features.push_back(spec.stds[k] > 0.0 ? (v - spec.means[k]) / spec.stds[k] : 0.0);
    }
    for (std::size_t k = 0; k < categorical_cols.size(); ++k) {
      const std::vector<std::string>& vocab = spec.vocabularies[k];
      const std::string& value = row[categorical_cols[k]];
      // Unseen categories encode as all zeros.
      for (const std::string& entry : vocab) {
        s.features.push_back(entry == value ? 1.0 : 0.0);
      }
    }
    const std::string& group = row[protected_col];
    if (group != spec.group_values[0] && group != spec.group_values[1]) {
      throw std::runtime_error("row " + std::to_string(r + 1) + ": protected value '" + group +
                               "' not seen in training split");
    }
    s.features.push_back(group == spec.group_values[0] ? 1.0 : 0.0);
    s.group = group;
    s.label = row[label_col] == spec.positive_label ? 1.0 : 0.0;
    samples.push_back(std::move(s));
  }
  Dataset data(std::move(samples), dim);
  data.set_protected_slot(dim - 1);
  return data;
}

}  // namespace

std::size_t PreprocessSpec::feature_dim() const {
  if (!fitted) throw std::logic_error("PreprocessSpec: feature_dim requires a fitted spec");
  std::size_t dim = numeric_columns.size() + 1;  // + protected slot
  for (const auto& vocab : vocabularies) dim += vocab.size();
  return dim;
}

PreprocessResult load_and_preprocess(const std::string& train_csv, const std::string& test_csv,
                                     PreprocessSpec spec) {
  const CsvTable train_table = read_csv_table(train_csv);
  const CsvTable test_table = read_csv_table(test_csv);
  fit_spec(spec, train_table);
  Dataset train = encode_table(train_table, spec);
  Dataset test = encode_table(test_table, spec);
  return PreprocessResult{std::move(train), std::move(test), std::move(spec)};
}

ConstrainedProblem make_fair_problem(double c, bool swap_kl) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("make_fair_problem: c must be positive and finite");
  }
  ConstrainedProblem problem;
  problem.objective = LossSpec::binary_cross_entropy();
  ConstraintSpec constraint;
  constraint.loss = LossSpec::bernoulli_kl();
  constraint.threshold = c;
  constraint.name = "fairness_kl";
  constraint.group_a_value = swap_kl ? 0.0 : 1.0;
  constraint.group_b_value = swap_kl ? 1.0 : 0.0;
  problem.constraints.push_back(std::move(constraint));
  return problem;
}

FairnessMetrics evaluate_metrics(const Parameterization& model, const Dataset& test,
                                 double threshold) {
  if (!test.protected_slot()) {
    throw std::invalid_argument("evaluate_metrics: dataset has no protected feature slot");
  }
  const std::size_t slot = *test.protected_slot();
  ForwardTrace trace;
  std::vector<double> scratch;
  std::size_t correct = 0;
  std::size_t insensitive = 0;
  for (const Sample& sample : test.samples()) {
    const double prediction = forward(model, sample.features, trace);
    const bool decided_positive = prediction >= threshold;
    const bool label_positive = sample.label == 1.0;
    if (decided_positive == label_positive) ++correct;

    scratch.assign(sample.features.begin(), sample.features.end());
    scratch[slot] = 1.0;
    const bool decision_a = forward(model, scratch, trace) >= threshold;
    scratch[slot] = 0.0;
    const bool decision_b = forward(model, scratch, trace) >= threshold;
    if (decision_a == decision_b) ++insensitive;
  }
  FairnessMetrics metrics;
  const double inv_n = 1.0 / static_cast<double>(test.size());
  metrics.accuracy = static_cast<double>(correct) * inv_n;
  metrics.fairness = static_cast<double>(insensitive) * inv_n;
  metrics.threshold = threshold;
  return metrics;
}

void synth_generate(const SynthConfig& config, const std::string& train_csv_path,
                    const std::string& test_csv_path) {
  if (config.n_train < 10 || config.n_test < 10) {
    throw std::invalid_argument("synth_generate: splits must have at least 10 rows");
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> edu_dist(0, 2);

  // Ground-truth logistic model shared by both splits.
  std::vector<double> weights(config.d_numeric);
  for (double& w : weights) w = 0.5 + unit(rng);  // informative features
  static const char* kEduLevels[3] = {"hs", "college", "grad"};
  static const double kEduEffects[3] = {-0.5, 0.0, 0.5};
  const double intercept = -0.5 * config.bias_strength;

  const auto write_split = [&](const std::string& path, std::size_t rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write synthetic CSV: " + path);
    for (std::size_t j = 0; j < config.d_numeric; ++j) out << "num" << j << ",";
    out << "edu,z,y\n";
    for (std::size_t r = 0; r < rows; ++r) {
      double logit = intercept;
      for (std::size_t j = 0; j < config.d_numeric; ++j) {
        const double x = normal(rng);
        logit += weights[j] * x;
        out << format_g12(x) << ",";
      }
      const int edu = edu_dist(rng);
      logit += kEduEffects[edu];
      const bool group_a = unit(rng) < 0.5;
      if (group_a) logit += config.bias_strength;
      const double p = 1.0 / (1.0 + std::exp(-logit));
      const int label = unit(rng) < p ? 1 : 0;
      out << kEduLevels[edu] << "," << (group_a ? "A" : "B") << "," << label << "\n";
    }
  };
  write_split(train_csv_path, config.n_train);
  write_split(test_csv_path, config.n_test);
}

namespace {

std::pair<CsvTable, CsvTable> split_table(const CsvTable& table, double fraction,
                                          std::uint64_t seed) {
  std::vector<std::size_t> order(table.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(table.rows.size())));
  if (n_train == 0 || n_train == table.rows.size()) {
    throw std::runtime_error("train/test split leaves an empty side");
  }
  CsvTable train{table.header, {}};
  CsvTable test{table.header, {}};
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? train : test).rows.push_back(table.rows[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  CsvTable train_table = read_csv_table(config.train_csv);
  CsvTable test_table{{}, {}};
  if (config.test_csv.empty()) {
    auto [tr, te] = split_table(train_table, config.split_fraction, config.seed);
    train_table = std::move(tr);
    test_table = std::move(te);
  } else {
    test_table = read_csv_table(config.test_csv);
  }

  PreprocessSpec spec = config.preprocess;
  fit_spec(spec, train_table);
  const Dataset train = encode_table(train_table, spec);
  const Dataset test = encode_table(test_table, spec);

  const ModelConfig model_config =
      ModelConfig::mlp(train.dimension(), config.hidden, Activation::Sigmoid,
                       OutputKind::Sigmoid);
  const Parameterization init = init_params(model_config, config.seed);

  const ConstrainedProblem fair_problem = make_fair_problem(config.c, config.swap_kl);

  TrainConfig base;
  base.epochs = config.epochs;
  base.inner_steps = config.inner_steps;
  base.primal_lr = config.primal_lr;
  base.dual_lr = config.dual_lr;
  base.batch_size = config.batch_size;
  base.seed = config.seed;
  base.epoch_metrics = [&](const Parameterization& model) {
    const FairnessMetrics metrics = evaluate_metrics(model, test, config.threshold);
    return std::make_pair(metrics.accuracy, metrics.fairness);
  };

  TrainConfig unconstrained_config = base;
  unconstrained_config.mode = TrainMode::Unconstrained;
  TrainResult unconstrained =
      train_unconstrained(fair_problem.objective, init, train, unconstrained_config);

  TrainConfig constrained_config = base;
  constrained_config.mode = TrainMode::DualAscent;
  TrainResult constrained = train_dual(fair_problem, init, train, constrained_config);

  ExperimentResult result;
  result.unconstrained_metrics = evaluate_metrics(unconstrained.model, test, config.threshold);
  result.constrained_metrics = evaluate_metrics(constrained.model, test, config.threshold);
  result.final_lambda = constrained.duals.lambdas.at(0);
  result.final_slack = constrained.log.records.back().slacks.at(0);
  const std::size_t vc_dim = config.cert_vc_dim.value_or(constrained.model.param_count());
  result.certificate =
      total_gap_certificate(fair_problem.objective.bound, train.size(), vc_dim,
                            config.cert_delta, config.cert_lipschitz, config.cert_epsilon,
                            constrained.duals);
  result.unconstrained_log = std::move(unconstrained.log);
  result.constrained_log = std::move(constrained.log);

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    const std::filesystem::path dir(config.out_dir);
    write_training_log_csv(result.unconstrained_log, (dir / "unconstrained.csv").string());
    write_training_log_csv(result.constrained_log, (dir / "constrained.csv").string());
    std::ofstream report(dir / "report.txt", std::ios::binary);
    if (!report) throw std::runtime_error("cannot write report.txt under " + config.out_dir);
    report << experiment_report_text(result);
  }
  return result;
}

std::string experiment_report_text(const ExperimentResult& result) {
  std::string out;
  out += "# comparison\n";
  out += "unconstrained_accuracy = " + format_g12(result.unconstrained_metrics.accuracy) + "\n";
  out += "unconstrained_fairness = " + format_g12(result.unconstrained_metrics.fairness) + "\n";
  out += "constrained_accuracy = " + format_g12(result.constrained_metrics.accuracy) + "\n";
  out += "constrained_fairness = " + format_g12(result.constrained_metrics.fairness) + "\n";
  out += "accuracy_delta = " +
         format_g12(result.constrained_metrics.accuracy - result.unconstrained_metrics.accuracy) +
         "\n";
  out += "fairness_delta = " +
         format_g12(result.constrained_metrics.fairness - result.unconstrained_metrics.fairness) +
         "\n";
  out += "final_lambda = " + format_g12(result.final_lambda) + "\n";
  out += "final_slack = " + format_g12(result.final_slack) + "\n";
  out += "# gap certificate (assumed epsilon, lipschitz, vc_dim, delta)\n";
  out += certificate_to_text(result.certificate);
  return out;
}

}  // namespace cslearn
