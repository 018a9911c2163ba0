#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cslearn {

enum class ModelKind { Linear, Mlp };
enum class Activation { Sigmoid, ReLU, Tanh };
enum class OutputKind { Identity, Sigmoid };

/// Convex admissible parameter set H with Euclidean projection.
struct AdmissibleSet {
  enum class Kind { Unbounded, L2Ball, Box };
  Kind kind = Kind::Unbounded;
  double radius = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  static AdmissibleSet unbounded() { return {}; }
  static AdmissibleSet l2_ball(double radius);
  static AdmissibleSet box(double lo, double hi);
};

/// Architecture descriptor. Parameter layout:
///   Linear: [w(d) (, b)]
///   Mlp:    [W1 row-major (h x d), b1(h), w2(h), b2]  (one hidden layer)
struct ModelConfig {
  ModelKind kind = ModelKind::Linear;
  std::size_t input_dim = 1;
  bool bias = true;
  std::size_t hidden = 16;
  Activation activation = Activation::Sigmoid;
  OutputKind output = OutputKind::Sigmoid;
  AdmissibleSet admissible;

  std::size_t param_count() const;

  static ModelConfig linear(std::size_t input_dim, bool bias = true,
                            AdmissibleSet set = AdmissibleSet::unbounded());
  static ModelConfig mlp(std::size_t input_dim, std::size_t hidden,
                         Activation activation = Activation::Sigmoid,
                         OutputKind output = OutputKind::Sigmoid,
                         AdmissibleSet set = AdmissibleSet::unbounded());
};

/// Intermediate values of one forward pass, sufficient to backpropagate.
/// Tagged with the parameter version it was computed under; backward rejects
/// stale traces.
struct ForwardTrace {
  std::vector<double> input;
  std::vector<double> hidden_pre;
  std::vector<double> hidden_act;
  double output_pre = 0.0;
  double prediction = 0.0;
  std::uint64_t params_version = 0;
};

/// f(theta, .) for a fixed architecture. Parameters change only through
/// set_params/axpy, which bump the version counter.
class Parameterization {
 public:
  explicit Parameterization(ModelConfig config);
  Parameterization(ModelConfig config, std::vector<double> params);

  const ModelConfig& config() const { return config_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }
  std::uint64_t version() const { return version_; }

  void set_params(std::vector<double> params);
  /// theta += scale * direction.
  void axpy(double scale, std::span<const double> direction);

 private:
  ModelConfig config_;
  std::vector<double> params_;
  std::uint64_t version_ = 0;
};

/// Deterministic initialization: per-layer uniform in [-a, a] with
/// a = sqrt(6 / (fan_in + fan_out)), biases zero.
Parameterization init_params(const ModelConfig& config, std::uint64_t seed);

/// Evaluates f(theta, x), filling `trace` (reused buffers).
/// Throws std::invalid_argument on feature-dimension mismatch.
double forward(const Parameterization& model, std::span<const double> features,
               ForwardTrace& trace);
std::pair<double, ForwardTrace> forward(const Parameterization& model,
                                        std::span<const double> features);

/// Accumulates upstream * d prediction / d theta into `grad`.
/// Throws std::invalid_argument if the trace is stale (parameter version
/// mismatch) or `grad` has the wrong length.
void backward_accumulate(const Parameterization& model, const ForwardTrace& trace,
                         double upstream, std::span<double> grad);
std::vector<double> backward(const Parameterization& model, const ForwardTrace& trace,
                             double upstream);

/// Euclidean projection of theta onto the admissible set. Idempotent;
/// identity for Unbounded.
void project_params_inplace(Parameterization& model);
Parameterization project_params(Parameterization model);

/// Checkpoint: versioned header (kind, dims, activation, admissible set)
/// followed by theta as little-endian 64-bit floats. Bit-exact round trip.
void save_model(const Parameterization& model, const std::string& path);
Parameterization load_model(const std::string& path);

}  // namespace cslearn
