#pragma once

// Feedforward network: equal-width hidden layers with a bounded activation,
// a two-unit softmax output, cross-entropy loss and exact backpropagation.
//
// Layer l maps v^l to z^l = W^l v^l + a^l. Hidden layers emit
// h^l = act(z^l) = v^{l+1}; the output layer emits softmax(z^L).
// Batches are column-major: one sample per column.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "namelink/error.hpp"
#include "namelink/random.hpp"

namespace namelink {

enum class Activation { softsign, tanh, rectifier };

inline constexpr std::string_view activation_name(Activation a) noexcept {
    switch (a) {
    case Activation::softsign: return "softsign";
    case Activation::tanh: return "tanh";
    case Activation::rectifier: return "rectifier";
    }
    return "?";
}

inline Activation parse_activation(std::string_view name) {
    for (Activation a : {Activation::softsign, Activation::tanh, Activation::rectifier})
        if (activation_name(a) == name) return a;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

struct NetworkConfig {
    std::size_t input_dim = 30;
    std::size_t hidden_layers = 7;
    std::size_t hidden_width = 50;
    std::size_t output_classes = 2;
    Activation activation = Activation::softsign;
    std::uint64_t seed = 0;

    void validate() const {
        if (input_dim == 0) throw ConfigError("input_dim must be positive");
        if (hidden_layers == 0) throw ConfigError("hidden_layers must be positive");
        if (hidden_width == 0) throw ConfigError("hidden_width must be positive");
        if (output_classes != 2) throw ConfigError("output_classes must be 2");
    }

    bool operator==(const NetworkConfig&) const = default;
};

struct LayerParams {
    Eigen::MatrixXd weights; // fan_out x fan_in
    Eigen::VectorXd bias;    // fan_out

    std::size_t fan_in() const noexcept { return static_cast<std::size_t>(weights.cols()); }
    std::size_t fan_out() const noexcept { return static_cast<std::size_t>(weights.rows()); }
    bool operator==(const LayerParams& o) const {
        return weights.rows() == o.weights.rows() && weights.cols() == o.weights.cols() &&
               weights == o.weights && bias.size() == o.bias.size() && bias == o.bias;
    }
};

/// Hidden layers followed by the output layer.
using Parameters = std::vector<LayerParams>;

/// Same shapes as `like`, all zeros.
inline Parameters zeros_like(const Parameters& like) {
    Parameters out;
    out.reserve(like.size());
    for (const auto& l : like)
        out.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                       Eigen::VectorXd::Zero(l.bias.size())});
    return out;
}

inline std::size_t parameter_count(const Parameters& params) {
    std::size_t n = 0;
    for (const auto& l : params) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

inline bool all_finite(const Parameters& params) {
    for (const auto& l : params)
        if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
    return true;
}

/// Bound of the normalized (fan-based) uniform initialization.
inline double init_bound(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

/// Weights ~ U[-b, b] with b = sqrt(6 / (fan_in + fan_out)); biases zero.
inline Parameters init_network(const NetworkConfig& config) {
    config.validate();
    Rng rng(config.seed);
    Parameters params;
    std::size_t fan_in = config.input_dim;
    for (std::size_t l = 0; l <= config.hidden_layers; ++l) {
        const std::size_t fan_out =
            l == config.hidden_layers ? config.output_classes : config.hidden_width;
        const double bound = init_bound(fan_in, fan_out);
        std::uniform_real_distribution<double> dist(-bound, bound);
        LayerParams layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
        for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
            for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) layer.weights(r, c) = dist(rng);
        params.push_back(std::move(layer));
        fan_in = fan_out;
    }
    return params;
}

inline double activate(Activation a, double z) noexcept {
    switch (a) {
    case Activation::softsign: return z / (1.0 + std::abs(z));
    case Activation::tanh: return std::tanh(z);
    case Activation::rectifier: return z > 0.0 ? z : 0.0;
    }
    return z;
}

/// d act / dz evaluated at z.
inline double activate_derivative(Activation a, double z) noexcept {
    switch (a) {
    case Activation::softsign: {
        const double d = 1.0 + std::abs(z);
        return 1.0 / (d * d);
    }
    case Activation::tanh: {
        const double t = std::tanh(z);
        return 1.0 - t * t;
    }
    case Activation::rectifier: return z > 0.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

namespace detail {

inline Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& z) {
    return z.unaryExpr([a](double v) { return namelink::activate(a, v); });
}

inline Eigen::MatrixXd activate_derivative(Activation a, const Eigen::MatrixXd& z) {
    return z.unaryExpr([a](double v) { return namelink::activate_derivative(a, v); });
}

/// Column-wise softmax with the max logit subtracted. Components are kept
/// inside [2^-53, 1 - 2^-53] so a saturated output never reads as exactly
/// 0 or 1; for two classes the clamped pair still sums to 1 exactly.
inline Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
    constexpr double lo = std::numeric_limits<double>::epsilon() / 2;
    Eigen::MatrixXd p(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const double m = logits.col(c).maxCoeff();
        p.col(c) = (logits.col(c).array() - m).exp().matrix();
        p.col(c) /= p.col(c).sum();
    }
    return p.cwiseMax(lo).cwiseMin(1.0 - lo);
}

inline void check_input(const Parameters& params, Eigen::Index rows) {
    if (params.empty()) throw ConfigError("network has no layers");
    if (params.front().weights.cols() != rows)
        throw CompatibilityError("input dimension " + std::to_string(rows) +
                                 " does not match network input dimension " +
                                 std::to_string(params.front().weights.cols()));
}

} // namespace detail

/// Per-layer pre-activations z^l and outputs (h^l for hidden layers, the
/// softmax posteriors for the output layer) of a batch.
namespace detail {

/// z = W v + b as rank-1 updates in a fixed order over the inner index, so
/// every entry of z is summed the same way whatever the batch size. A
/// blocked matrix product would give a single sample different rounding
/// from the same sample inside a batch.
inline Eigen::MatrixXd affine(const LayerParams& layer, const Eigen::MatrixXd& v) {
    Eigen::MatrixXd z = layer.bias.replicate(1, v.cols());
    for (Eigen::Index k = 0; k < v.rows(); ++k) z.noalias() += layer.weights.col(k) * v.row(k);
    return z;
}

} // namespace detail

struct BatchTrace {
    std::vector<Eigen::MatrixXd> inputs;          // v^l, l = 0..L
    std::vector<Eigen::MatrixXd> pre_activations; // z^l
    Eigen::MatrixXd posteriors;                   // classes x samples
};

inline BatchTrace forward_batch(const Parameters& params, Activation act,
                                const Eigen::MatrixXd& inputs) {
    detail::check_input(params, inputs.rows());
    BatchTrace trace;
    trace.inputs.reserve(params.size());
    trace.pre_activations.reserve(params.size());
    Eigen::MatrixXd v = inputs;
    for (std::size_t l = 0; l < params.size(); ++l) {
        Eigen::MatrixXd z = detail::affine(params[l], v);
        trace.inputs.push_back(std::move(v));
        if (l + 1 < params.size()) v = detail::activate(act, z);
        trace.pre_activations.push_back(std::move(z));
    }
    trace.posteriors = detail::softmax_columns(trace.pre_activations.back());
    if (!trace.posteriors.allFinite()) throw NumericFault("non-finite posterior in forward pass");
    return trace;
}

/// Class posteriors of a batch, classes x samples.
inline Eigen::MatrixXd posteriors(const Parameters& params, Activation act,
                                  const Eigen::MatrixXd& inputs) {
    detail::check_input(params, inputs.rows());
    Eigen::MatrixXd v = inputs;
    for (std::size_t l = 0; l < params.size(); ++l) {
        Eigen::MatrixXd z = detail::affine(params[l], v);
        v = l + 1 < params.size() ? detail::activate(act, z) : std::move(z);
    }
    Eigen::MatrixXd p = detail::softmax_columns(v);
    if (!p.allFinite()) throw NumericFault("non-finite posterior in forward pass");
    return p;
}

/// Single-sample forward pass.
struct ForwardTrace {
    std::vector<Eigen::VectorXd> pre_activations; // z^l
    std::vector<Eigen::VectorXd> activations;     // h^l for hidden layers
    Eigen::VectorXd posteriors;
};

inline ForwardTrace forward(const Parameters& params, Activation act, std::span<const double> x) {
    const Eigen::Map<const Eigen::MatrixXd> input(x.data(), static_cast<Eigen::Index>(x.size()), 1);
    BatchTrace batch = forward_batch(params, act, input);
    ForwardTrace t;
    for (std::size_t l = 0; l < params.size(); ++l) {
        t.pre_activations.push_back(batch.pre_activations[l].col(0));
        if (l + 1 < params.size()) t.activations.push_back(batch.inputs[l + 1].col(0));
    }
    t.posteriors = batch.posteriors.col(0);
    return t;
}

struct LossAndGradients {
    double loss = 0.0;
    Parameters gradients;
};

/// Mean cross-entropy -log p(y = label | x) over the batch and its exact
/// gradient with respect to every weight and bias.
inline LossAndGradients loss_and_gradients(const Parameters& params, Activation act,
                                           const Eigen::MatrixXd& inputs,
                                           std::span<const int> labels) {
    const auto n = inputs.cols();
    if (n == 0) throw ConfigError("loss_and_gradients needs a non-empty batch");
    if (static_cast<std::size_t>(n) != labels.size())
        throw ConfigError("batch has " + std::to_string(n) + " inputs but " +
                          std::to_string(labels.size()) + " labels");
    BatchTrace trace = forward_batch(params, act, inputs);
    const Eigen::MatrixXd& logits = trace.pre_activations.back();
    const auto classes = logits.rows();

    double loss = 0.0;
    Eigen::MatrixXd delta = trace.posteriors;
    for (Eigen::Index c = 0; c < n; ++c) {
        const int y = labels[static_cast<std::size_t>(c)];
        if (y < 0 || y >= classes) throw ConfigError("label out of range: " + std::to_string(y));
        const double m = logits.col(c).maxCoeff();
        const double lse = m + std::log((logits.col(c).array() - m).exp().sum());
        loss += lse - logits(y, c);
        delta(y, c) -= 1.0;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    loss *= inv_n;
    delta *= inv_n;

    LossAndGradients out{loss, Parameters(params.size())};
    for (std::size_t l = params.size(); l-- > 0;) {
        out.gradients[l].weights = delta * trace.inputs[l].transpose();
        out.gradients[l].bias = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = params[l].weights.transpose() * delta;
            delta = back.cwiseProduct(detail::activate_derivative(act, trace.pre_activations[l - 1]));
        }
    }
    if (!std::isfinite(loss)) throw NumericFault("non-finite loss");
    return out;
}

} // namespace namelink
