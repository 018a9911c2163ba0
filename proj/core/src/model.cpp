#include "cslearn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

namespace cslearn {

namespace {

double stable_sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double activate(Activation act, double z) {
  switch (act) {
    case Activation::Sigmoid:
      return stable_sigmoid(z);
    case Activation::ReLU:
      return z > 0.0 ? z : 0.0;
    case Activation::Tanh:
      return std::tanh(z);
  }
  throw std::logic_error("unknown activation");
}

// Derivative expressed through pre-activation z and activation a.
double activate_derivative(Activation act, double z, double a) {
  switch (act) {
    case Activation::Sigmoid:
      return a * (1.0 - a);
    case Activation::ReLU:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh:
      return 1.0 - a * a;
  }
  throw std::logic_error("unknown activation");
}

}  // namespace

AdmissibleSet AdmissibleSet::l2_ball(double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("AdmissibleSet: radius must be positive");
  AdmissibleSet set;
  set.kind = Kind::L2Ball;
  set.radius = radius;
  return set;
}

AdmissibleSet AdmissibleSet::box(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("AdmissibleSet: box requires lo < hi");
  AdmissibleSet set;
  set.kind = Kind::Box;
  set.lo = lo;
  set.hi = hi;
  return set;
}

std::size_t ModelConfig::param_count() const {
  if (kind == ModelKind::Linear) return input_dim + (bias ? 1 : 0);
  return hidden * (input_dim + 1) + (hidden + 1);
}

ModelConfig ModelConfig::linear(std::size_t input_dim, bool bias, AdmissibleSet set) {
  ModelConfig config;
  config.kind = ModelKind::Linear;
  config.input_dim = input_dim;
  config.bias = bias;
  config.output = OutputKind::Identity;
  config.admissible = set;
  return config;
}

ModelConfig ModelConfig::mlp(std::size_t input_dim, std::size_t hidden, Activation activation,
                             OutputKind output, AdmissibleSet set) {
  if (hidden == 0) throw std::invalid_argument("ModelConfig::mlp: hidden must be positive");
  ModelConfig config;
  config.kind = ModelKind::Mlp;
  config.input_dim = input_dim;
  config.hidden = hidden;
  config.activation = activation;
  config.output = output;
  config.admissible = set;
  return config;
}

Parameterization::Parameterization(ModelConfig config)
    : config_(config), params_(config.param_count(), 0.0) {
  if (config_.input_dim == 0) {
    throw std::invalid_argument("Parameterization: input_dim must be positive");
  }
}

Parameterization::Parameterization(ModelConfig config, std::vector<double> params)
    : Parameterization(config) {
  set_params(std::move(params));
}

void Parameterization::set_params(std::vector<double> params) {
  if (params.size() != config_.param_count()) {
    throw std::invalid_argument("set_params: expected " +
                                std::to_string(config_.param_count()) + " parameters, got " +
                                std::to_string(params.size()));
  }
  params_ = std::move(params);
  ++version_;
}

void Parameterization::axpy(double scale, std::span<const double> direction) {
  if (direction.size() != params_.size()) {
    throw std::invalid_argument("axpy: direction length mismatch");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i] += scale * direction[i];
  ++version_;
}

Parameterization init_params(const ModelConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> params(config.param_count(), 0.0);
  if (config.kind == ModelKind::Linear) {
    const double a = std::sqrt(6.0 / static_cast<double>(config.input_dim + 1));
    std::uniform_real_distribution<double> dist(-a, a);
    for (std::size_t j = 0; j < config.input_dim; ++j) params[j] = dist(rng);
    // bias stays 0
  } else {
    const std::size_t d = config.input_dim;
    const std::size_t h = config.hidden;
    const double a1 = std::sqrt(6.0 / static_cast<double>(d + h));
    std::uniform_real_distribution<double> dist1(-a1, a1);
    for (std::size_t i = 0; i < h * d; ++i) params[i] = dist1(rng);
    const double a2 = std::sqrt(6.0 / static_cast<double>(h + 1));
    std::uniform_real_distribution<double> dist2(-a2, a2);
    for (std::size_t i = 0; i < h; ++i) params[h * d + h + i] = dist2(rng);
  }
  return Parameterization(config, std::move(params));
}

double forward(const Parameterization& model, std::span<const double> features,
               ForwardTrace& trace) {
  const ModelConfig& config = model.config();
  if (features.size() != config.input_dim) {
    throw std::invalid_argument("forward: expected " + std::to_string(config.input_dim) +
                                " features, got " + std::to_string(features.size()));
  }
  const std::vector<double>& theta = model.params();
  trace.input.assign(features.begin(), features.end());
  trace.params_version = model.version();

  if (config.kind == ModelKind::Linear) {
    double z = 0.0;
    for (std::size_t j = 0; j < config.input_dim; ++j) z += theta[j] * features[j];
    if (config.bias) z += theta[config.input_dim];
    trace.hidden_pre.clear();
    trace.hidden_act.clear();
    trace.output_pre = z;
    trace.prediction = config.output == OutputKind::Sigmoid ? stable_sigmoid(z) : z;
    return trace.prediction;
  }

  const std::size_t d = config.input_dim;
  const std::size_t h = config.hidden;
  trace.hidden_pre.resize(h);
  trace.hidden_act.resize(h);
  const double* w1 = theta.data();           // h x d row-major
  const double* b1 = theta.data() + h * d;   // h
  const double* w2 = b1 + h;                 // h
  const double b2 = theta[h * d + h + h];
  for (std::size_t i = 0; i < h; ++i) {
    double z = b1[i];
    const double* row = w1 + i * d;
    for (std::size_t j = 0; j < d; ++j) z += row[j] * features[j];
    trace.hidden_pre[i] = z;
    trace.hidden_act[i] = activate(config.activation, z);
  }
  double z2 = b2;
  for (std::size_t i = 0; i < h; ++i) z2 += w2[i] * trace.hidden_act[i];
  trace.output_pre = z2;
  trace.prediction = config.output == OutputKind::Sigmoid ? stable_sigmoid(z2) : z2;
  return trace.prediction;
}

std::pair<double, ForwardTrace> forward(const Parameterization& model,
                                        std::span<const double> features) {
  ForwardTrace trace;
  const double prediction = forward(model, features, trace);
  return {prediction, std::move(trace)};
}

void backward_accumulate(const Parameterization& model, const ForwardTrace& trace,
                         double upstream, std::span<double> grad) {
  const ModelConfig& config = model.config();
  if (trace.params_version != model.version()) {
    throw std::invalid_argument("backward: stale trace (parameter version mismatch)");
  }
  if (grad.size() != model.param_count()) {
    throw std::invalid_argument("backward: gradient buffer length mismatch");
  }
  if (upstream == 0.0) return;

  // d prediction / d output_pre
  double dout = 1.0;
  if (config.output == OutputKind::Sigmoid) {
    dout = trace.prediction * (1.0 - trace.prediction);
  }
  const double u = upstream * dout;

  if (config.kind == ModelKind::Linear) {
    for (std::size_t j = 0; j < config.input_dim; ++j) grad[j] += u * trace.input[j];
    if (config.bias) grad[config.input_dim] += u;
    return;
  }

  const std::size_t d = config.input_dim;
  const std::size_t h = config.hidden;
  const std::vector<double>& theta = model.params();
  const double* w2 = theta.data() + h * d + h;
  double* gw1 = grad.data();
  double* gb1 = grad.data() + h * d;
  double* gw2 = gb1 + h;
  double& gb2 = grad[h * d + h + h];

  gb2 += u;
  for (std::size_t i = 0; i < h; ++i) {
    gw2[i] += u * trace.hidden_act[i];
    const double dz = u * w2[i] *
                      activate_derivative(config.activation, trace.hidden_pre[i],
                                          trace.hidden_act[i]);
    gb1[i] += dz;
    double* row = gw1 + i * d;
    for (std::size_t j = 0; j < d; ++j) row[j] += dz * trace.input[j];
  }
}

std::vector<double> backward(const Parameterization& model, const ForwardTrace& trace,
                             double upstream) {
  std::vector<double> grad(model.param_count(), 0.0);
  backward_accumulate(model, trace, upstream, grad);
  return grad;
}

void project_params_inplace(Parameterization& model) {
  const AdmissibleSet& set = model.config().admissible;
  if (set.kind == AdmissibleSet::Kind::Unbounded) return;
  std::vector<double> theta = model.params();
  bool changed = false;
  if (set.kind == AdmissibleSet::Kind::L2Ball) {
    double norm_sq = 0.0;
    for (double v : theta) norm_sq += v * v;
    const double norm = std::sqrt(norm_sq);
    // Slack of a few ulps keeps the projection idempotent in floating point.
    if (norm > set.radius * (1.0 + 1e-12)) {
      const double scale = set.radius / norm;
      for (double& v : theta) v *= scale;
      changed = true;
    }
  } else {
    for (double& v : theta) {
      const double clipped = std::clamp(v, set.lo, set.hi);
      if (clipped != v) {
        v = clipped;
        changed = true;
      }
    }
  }
  if (changed) model.set_params(std::move(theta));
}

Parameterization project_params(Parameterization model) {
  project_params_inplace(model);
  return model;
}

namespace {

constexpr char kMagic[8] = {'C', 'S', 'L', 'M', 'O', 'D', 'L', '1'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

void write_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

void write_f64(std::ofstream& out, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(bits));
  write_u64(out, bits);
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (!in) throw std::runtime_error("model checkpoint truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::ifstream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw std::runtime_error("model checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

double read_f64(std::ifstream& in) {
  const std::uint64_t bits = read_u64(in);
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace

void save_model(const Parameterization& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model checkpoint: " + path);
  const ModelConfig& config = model.config();
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(config.kind));
  write_u32(out, static_cast<std::uint32_t>(config.activation));
  write_u32(out, static_cast<std::uint32_t>(config.output));
  write_u32(out, config.bias ? 1 : 0);
  write_u64(out, config.input_dim);
  write_u64(out, config.hidden);
  write_u32(out, static_cast<std::uint32_t>(config.admissible.kind));
  write_f64(out, config.admissible.radius);
  write_f64(out, config.admissible.lo);
  write_f64(out, config.admissible.hi);
  write_u64(out, model.param_count());
  for (double v : model.params()) write_f64(out, v);
  if (!out) throw std::runtime_error("failed writing model checkpoint: " + path);
}

Parameterization load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a model checkpoint: " + path);
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  ModelConfig config;
  config.kind = static_cast<ModelKind>(read_u32(in));
  config.activation = static_cast<Activation>(read_u32(in));
  config.output = static_cast<OutputKind>(read_u32(in));
  config.bias = read_u32(in) != 0;
  config.input_dim = read_u64(in);
  config.hidden = read_u64(in);
  config.admissible.kind = static_cast<AdmissibleSet::Kind>(read_u32(in));
  config.admissible.radius = read_f64(in);
  config.admissible.lo = read_f64(in);
  config.admissible.hi = read_f64(in);
  const std::uint64_t p = read_u64(in);
  if (p != config.param_count()) {
    throw std::runtime_error("checkpoint parameter count does not match its header");
  }
  std::vector<double> params(p);
  for (std::uint64_t i = 0; i < p; ++i) params[i] = read_f64(in);
  return Parameterization(config, std::move(params));
}

}  // namespace cslearn
