#pragma once

#include <cstdint>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "heurank/core.hpp"
#include "heurank/domains.hpp"

namespace heurank {

enum class ModelKind { tabular, linear, mlp };
enum class Activation { relu, softplus };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::tabular: return "tabular";
    case ModelKind::linear: return "linear";
    case ModelKind::mlp: return "mlp";
  }
  throw Error("unknown model kind");
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "tabular") return ModelKind::tabular;
  if (s == "linear") return ModelKind::linear;
  if (s == "mlp") return ModelKind::mlp;
  throw FormatError("unknown model kind: " + s);
}

struct ModelSpec {
  ModelKind kind = ModelKind::tabular;
  int feature_dim = 0;                 // linear / mlp
  std::vector<int> hidden;             // mlp
  Activation activation = Activation::softplus;
  bool nonneg_output = false;          // softplus on the output when estimating costs
  std::vector<StateId> states;         // tabular key set

  json to_json() const {
    json j{{"kind", to_string(kind)}, {"feature_dim", feature_dim}, {"hidden", hidden},
           {"activation", activation == Activation::relu ? "relu" : "softplus"},
           {"nonneg_output", nonneg_output}};
    if (kind == ModelKind::tabular) {
      json st = json::array();
      for (const auto& s : states) st.push_back(json::array({s.hi, s.lo}));
      j["states"] = st;
    }
    return j;
  }

  static ModelSpec from_json(const json& j) {
    ModelSpec spec;
    spec.kind = model_kind_from_string(j.at("kind").get<std::string>());
    spec.feature_dim = j.value("feature_dim", 0);
    spec.hidden = j.value("hidden", std::vector<int>{});
    spec.activation = j.value("activation", std::string("softplus")) == "relu" ? Activation::relu : Activation::softplus;
    spec.nonneg_output = j.value("nonneg_output", false);
    if (j.contains("states"))
      for (const auto& s : j.at("states"))
        spec.states.push_back(StateId{s.at(0).get<std::uint64_t>(), s.at(1).get<std::uint64_t>()});
    return spec;
  }
};

// Parametric heuristic h(s, theta). Evaluation is pure; all parameters live
// in one flat vector so the optimizer treats every family identically.
//   tabular : one parameter per known state, 0 for unseen states.
//   linear  : dot(theta, features).
//   mlp     : fully connected layers with relu/softplus hidden activations
//             and a linear output (optionally softplus-clamped).
class HeuristicModel {
 public:
  HeuristicModel() = default;

  static HeuristicModel init(ModelSpec spec, std::uint64_t seed) {
    HeuristicModel m;
    m.spec_ = std::move(spec);
    m.seed_ = seed;
    switch (m.spec_.kind) {
      case ModelKind::tabular: {
        m.params_.assign(m.spec_.states.size(), 0.0);
        for (std::size_t i = 0; i < m.spec_.states.size(); ++i) m.index_.emplace(m.spec_.states[i], i);
        break;
      }
      case ModelKind::linear: {
        if (m.spec_.feature_dim <= 0) throw SpecError("linear model needs a positive feature_dim");
        m.params_.assign(static_cast<std::size_t>(m.spec_.feature_dim), 0.0);
        break;
      }
      case ModelKind::mlp: {
        if (m.spec_.feature_dim <= 0) throw SpecError("mlp model needs a positive feature_dim");
        for (int hsize : m.spec_.hidden)
          if (hsize <= 0) throw SpecError("mlp hidden sizes must be positive");
        std::mt19937_64 rng(seed);
        auto layer_sizes = m.layer_sizes();
        for (std::size_t li = 0; li + 1 < layer_sizes.size(); ++li) {
          const int fan_in = layer_sizes[li];
          const int fan_out = layer_sizes[li + 1];
          const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
          for (int i = 0; i < fan_in * fan_out; ++i) m.params_.push_back(m.uniform_sym(rng) * scale);
          for (int i = 0; i < fan_out; ++i) m.params_.push_back(0.0);
        }
        break;
      }
    }
    return m;
  }

  const ModelSpec& spec() const { return spec_; }
  ModelKind kind() const { return spec_.kind; }
  std::uint64_t seed() const { return seed_; }
  std::span<const double> params() const { return params_; }
  std::span<double> params_mutable() { return params_; }
  std::size_t param_count() const { return params_.size(); }

  double evaluate(StateId s, std::span<const double> features) const {
    switch (spec_.kind) {
      case ModelKind::tabular: {
        auto it = index_.find(s);
        return it == index_.end() ? 0.0 : params_[it->second];
      }
      case ModelKind::linear: {
        check_dim(features);
        double v = 0;
        for (std::size_t i = 0; i < features.size(); ++i) v += params_[i] * features[i];
        return spec_.nonneg_output ? softplus(v) : v;
      }
      case ModelKind::mlp:
        return forward(features, nullptr);
    }
    throw Error("unreachable");
  }

  double evaluate(const ProblemInstance& inst, StateId s) const {
    if (spec_.kind == ModelKind::tabular) return evaluate(s, {});
    const auto f = inst.features(s);
    return evaluate(s, f);
  }

  // Accumulates d_h * (d h(s) / d theta) into grad (size param_count()).
  void backprop(StateId s, std::span<const double> features, double d_h, std::span<double> grad) const {
    if (grad.size() != params_.size()) throw SpecError("backprop: gradient buffer size mismatch");
    switch (spec_.kind) {
      case ModelKind::tabular: {
        auto it = index_.find(s);
        if (it != index_.end()) grad[it->second] += d_h;  // identity Jacobian
        return;
      }
      case ModelKind::linear: {
        check_dim(features);
        double scale = d_h;
        if (spec_.nonneg_output) {
          double v = 0;
          for (std::size_t i = 0; i < features.size(); ++i) v += params_[i] * features[i];
          scale *= logistic(v);
        }
        for (std::size_t i = 0; i < features.size(); ++i) grad[i] += scale * features[i];
        return;
      }
      case ModelKind::mlp: {
        backprop_mlp(features, d_h, grad);
        return;
      }
    }
  }

  json to_json() const {
    return json{{"format_version", 1}, {"kind", to_string(spec_.kind)}, {"spec", spec_.to_json()},
                {"seed", seed_}, {"params", params_}};
  }

  static HeuristicModel from_json(const json& j) {
    if (j.value("format_version", 0) != 1) throw FormatError("checkpoint: unsupported format_version");
    HeuristicModel m = init(ModelSpec::from_json(j.at("spec")), j.value("seed", std::uint64_t{0}));
    m.params_ = j.at("params").get<std::vector<double>>();
    const std::size_t expected = init(m.spec_, m.seed_).params_.size();
    if (m.params_.size() != expected) throw FormatError("checkpoint: parameter count mismatch");
    return m;
  }

 private:
  std::vector<int> layer_sizes() const {
    std::vector<int> sizes{spec_.feature_dim};
    for (int hsize : spec_.hidden) sizes.push_back(hsize);
    sizes.push_back(1);
    return sizes;
  }

  void check_dim(std::span<const double> features) const {
    if (static_cast<int>(features.size()) != spec_.feature_dim)
      throw SpecError("feature dimension mismatch: got " + std::to_string(features.size()) + ", model expects " +
                      std::to_string(spec_.feature_dim));
  }

  static double uniform_sym(std::mt19937_64& rng) {
    // symmetric uniform in (-1, 1) from raw engine output
    return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  }

  static double act(double x, Activation a) { return a == Activation::relu ? (x > 0 ? x : 0.0) : softplus(x); }
  static double act_grad(double x, Activation a) { return a == Activation::relu ? (x > 0 ? 1.0 : 0.0) : logistic(x); }

  // Forward pass; when `pre` is given, stores the pre-activation vectors per
  // layer plus the input so the backward pass can consume them.
  double forward(std::span<const double> features, std::vector<std::vector<double>>* pre) const {
    check_dim(features);
    const auto sizes = layer_sizes();
    std::vector<double> in(features.begin(), features.end());
    if (pre) {
      pre->clear();
      pre->push_back(in);
    }
    std::size_t offset = 0;
    for (std::size_t li = 0; li + 1 < sizes.size(); ++li) {
      const int fan_in = sizes[li], fan_out = sizes[li + 1];
      std::vector<double> z(static_cast<std::size_t>(fan_out), 0.0);
      for (int o = 0; o < fan_out; ++o) {
        double v = 0;
        const double* w = &params_[offset + static_cast<std::size_t>(o) * fan_in];
        for (int i = 0; i < fan_in; ++i) v += w[i] * in[static_cast<std::size_t>(i)];
        v += params_[offset + static_cast<std::size_t>(fan_in) * fan_out + static_cast<std::size_t>(o)];
        z[static_cast<std::size_t>(o)] = v;
      }
      offset += static_cast<std::size_t>(fan_in) * fan_out + static_cast<std::size_t>(fan_out);
      const bool last = li + 2 == sizes.size();
      if (pre) pre->push_back(z);
      in.resize(z.size());
      for (std::size_t i = 0; i < z.size(); ++i)
        in[i] = last ? (spec_.nonneg_output ? softplus(z[i]) : z[i]) : act(z[i], spec_.activation);
    }
    return in[0];
  }

  void backprop_mlp(std::span<const double> features, double d_h, std::span<double> grad) const {
    std::vector<std::vector<double>> pre;
    forward(features, &pre);
    const auto sizes = layer_sizes();
    const std::size_t layers = sizes.size() - 1;

    // activations per layer input
    std::vector<std::vector<double>> act_in(layers);
    act_in[0] = pre[0];
    for (std::size_t li = 1; li < layers; ++li) {
      act_in[li].resize(pre[li].size());
      for (std::size_t i = 0; i < pre[li].size(); ++i) act_in[li][i] = act(pre[li][i], spec_.activation);
    }

    std::vector<double> delta{spec_.nonneg_output ? d_h * logistic(pre.back()[0]) : d_h};
    // walk layers backwards, accumulating weight/bias gradients
    std::vector<std::size_t> offsets(layers);
    std::size_t off = 0;
    for (std::size_t li = 0; li < layers; ++li) {
      offsets[li] = off;
      off += static_cast<std::size_t>(sizes[li]) * sizes[li + 1] + static_cast<std::size_t>(sizes[li + 1]);
    }
    for (std::size_t li = layers; li-- > 0;) {
      const int fan_in = sizes[li], fan_out = sizes[li + 1];
      const auto& input = act_in[li];
      for (int o = 0; o < fan_out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        double* wgrad = &grad[offsets[li] + static_cast<std::size_t>(o) * fan_in];
        for (int i = 0; i < fan_in; ++i) wgrad[i] += d * input[static_cast<std::size_t>(i)];
        grad[offsets[li] + static_cast<std::size_t>(fan_in) * fan_out + static_cast<std::size_t>(o)] += d;
      }
      if (li == 0) break;
      std::vector<double> prev(static_cast<std::size_t>(fan_in), 0.0);
      for (int i = 0; i < fan_in; ++i) {
        double v = 0;
        for (int o = 0; o < fan_out; ++o)
          v += delta[static_cast<std::size_t>(o)] * params_[offsets[li] + static_cast<std::size_t>(o) * fan_in + i];
        prev[static_cast<std::size_t>(i)] = v * act_grad(pre[li][static_cast<std::size_t>(i)], spec_.activation);
      }
      delta = std::move(prev);
    }
  }

  ModelSpec spec_;
  std::uint64_t seed_ = 0;
  std::vector<double> params_;
  StateMap<std::size_t> index_;
};

inline void save_model(const HeuristicModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileDependencyError("cannot write checkpoint: " + path);
  out << m.to_json().dump() << "\n";
}

inline HeuristicModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileDependencyError("cannot read checkpoint: " + path);
  json j;
  in >> j;
  return HeuristicModel::from_json(j);
}

}  // namespace heurank
