#pragma once

// iRprop- : per-parameter step sizes adapted from gradient sign agreement.
//
//   sign kept     -> step = min(step * eta_plus,  step_max), move -sign(g) * step
//   sign flipped  -> step = max(step * eta_minus, step_min), g := 0 (no move)
//   either zero   -> step unchanged, move -sign(g) * step
//
// The remembered sign is that of the (possibly zeroed) gradient.

#include <algorithm>
#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "namelink/error.hpp"
#include "namelink/mlp.hpp"

namespace namelink {

struct RpropHyperparams {
    double eta_plus = 1.2;
    double eta_minus = 0.5;
    double step_initial = 0.1;
    double step_min = 1e-6;
    double step_max = 50.0;

    void validate() const {
        if (!(eta_plus > 1.0)) throw ConfigError("rprop eta_plus must be > 1");
        if (!(eta_minus > 0.0 && eta_minus < 1.0)) throw ConfigError("rprop eta_minus must be in (0,1)");
        if (!(step_min > 0.0 && step_min <= step_initial && step_initial <= step_max))
            throw ConfigError("rprop steps must satisfy 0 < step_min <= step_initial <= step_max");
    }
};

namespace detail {

inline double sign_of(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

} // namespace detail

/// Update one flat block of parameters in place.
inline void rprop_update(std::span<double> params, std::span<const double> grads,
                         std::span<double> steps, std::span<double> prev_signs,
                         const RpropHyperparams& h) {
    const std::size_t n = params.size();
    if (grads.size() != n || steps.size() != n || prev_signs.size() != n)
        throw ConfigError("rprop_update: size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        double s = detail::sign_of(grads[i]);
        const double agreement = s * prev_signs[i];
        if (agreement > 0.0) {
            steps[i] = std::min(steps[i] * h.eta_plus, h.step_max);
        } else if (agreement < 0.0) {
            steps[i] = std::max(steps[i] * h.eta_minus, h.step_min);
            s = 0.0;
        }
        params[i] -= s * steps[i];
        prev_signs[i] = s;
    }
}

/// Optimizer memory for a whole network: one step size and one remembered
/// gradient sign per parameter.
class RpropState {
public:
    RpropState() = default;

    RpropState(const Parameters& like, RpropHyperparams hyper) : hyper_(hyper) {
        hyper_.validate();
        steps_ = zeros_like(like);
        signs_ = zeros_like(like);
        for (auto& l : steps_) {
            l.weights.setConstant(hyper_.step_initial);
            l.bias.setConstant(hyper_.step_initial);
        }
    }

    const RpropHyperparams& hyperparams() const noexcept { return hyper_; }
    const Parameters& steps() const noexcept { return steps_; }
    const Parameters& signs() const noexcept { return signs_; }

    /// Apply one step to `params` given full-batch gradients `grads`.
    void step(Parameters& params, const Parameters& grads) {
        if (params.size() != steps_.size() || grads.size() != steps_.size())
            throw ConfigError("rprop: parameter/state layer count mismatch");
        for (std::size_t l = 0; l < params.size(); ++l) {
            update_block(params[l].weights, grads[l].weights, steps_[l].weights, signs_[l].weights);
            update_block(params[l].bias, grads[l].bias, steps_[l].bias, signs_[l].bias);
        }
    }

private:
    template <class Dense>
    void update_block(Dense& p, const Dense& g, Dense& s, Dense& sign) const {
        if (p.size() != g.size() || p.size() != s.size())
            throw ConfigError("rprop: parameter/gradient shape mismatch");
        const auto n = static_cast<std::size_t>(p.size());
        rprop_update({p.data(), n}, {g.data(), n}, {s.data(), n}, {sign.data(), n}, hyper_);
    }

    RpropHyperparams hyper_;
    Parameters steps_;
    Parameters signs_;
};

inline void rprop_step(Parameters& params, const Parameters& grads, RpropState& state) {
    state.step(params, grads);
}

} // namespace namelink
