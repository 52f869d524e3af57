#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "namelink/mlp.hpp"

namespace gradcheck {

/// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps entries
/// whose true gradient is ~0 from dividing noise by noise.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Largest relative error between the analytic gradient and central finite
/// differences with step eps, over every weight and bias.
inline double max_relative_error(namelink::Parameters params, namelink::Activation act,
                                 const Eigen::MatrixXd& inputs, const std::vector<int>& labels,
                                 double eps = 1e-5) {
    const auto analytic = namelink::loss_and_gradients(params, act, inputs, labels).gradients;
    auto loss = [&] { return namelink::loss_and_gradients(params, act, inputs, labels).loss; };
    double worst = 0.0;
    auto probe = [&](double& p, double g) {
        const double saved = p;
        p = saved + eps;
        const double up = loss();
        p = saved - eps;
        const double down = loss();
        p = saved;
        worst = std::max(worst, relative_error(g, (up - down) / (2 * eps)));
    };
    for (std::size_t l = 0; l < params.size(); ++l) {
        for (Eigen::Index i = 0; i < params[l].weights.size(); ++i)
            probe(params[l].weights.data()[i], analytic[l].weights.data()[i]);
        for (Eigen::Index i = 0; i < params[l].bias.size(); ++i)
            probe(params[l].bias.data()[i], analytic[l].bias.data()[i]);
    }
    return worst;
}

/// Parameters of the given shape drawn uniformly from [-scale, scale],
/// biases included, so the check does not rely on zero biases.
inline namelink::Parameters random_parameters(std::mt19937_64& rng, std::size_t input_dim, std::size_t depth,
                                              std::size_t width, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    namelink::Parameters p;
    std::size_t fan_in = input_dim;
    for (std::size_t l = 0; l <= depth; ++l) {
        const std::size_t fan_out = l == depth ? 2 : width;
        namelink::LayerParams layer;
        layer.weights = Eigen::MatrixXd::NullaryExpr(fan_out, fan_in, [&] { return u(rng); });
        layer.bias = Eigen::VectorXd::NullaryExpr(fan_out, [&] { return u(rng); });
        p.push_back(std::move(layer));
        fan_in = fan_out;
    }
    return p;
}

inline Eigen::MatrixXd random_inputs(std::mt19937_64& rng, std::size_t dim, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return Eigen::MatrixXd::NullaryExpr(dim, n, [&] { return u(rng); });
}

inline std::vector<int> random_labels(std::mt19937_64& rng, std::size_t n) {
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng() % 2);
    return y;
}

} // namespace gradcheck
