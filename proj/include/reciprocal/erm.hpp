#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "reciprocal/sample.hpp"
#include "reciprocal/vec.hpp"

namespace reciprocal {

// Ridge-logistic loss description with the analytic constants needed by the
// contraction condition. All constants are conservative closed forms:
//   gamma  = lambda                    (the ridge Hessian term dominates)
//   B_theta= sqrt(2 ln2 / lambda)      (risk at 0 is <= ln2, so the minimizer's
//                                       ridge term (lambda/2)||theta||^2 <= ln2)
//   beta   = max(1 + Bx*Bt/4, Bx, Bx^2/4 + lambda)
//            (grad_theta sensitivity to theta, y and x respectively;
//             |sigma'| <= 1/4, |sigma - y| <= 1, ||x|| <= Bx, ||theta|| <= Bt)
//   alpha  = max(Bt^2/4 + 1, 1 + Bx*Bt/4)
//            (grad_x sensitivity to theta and x/y)
//   l_ell  = max(Bt, Bx*Bt)
//            (||grad_x loss|| <= ||theta|| and |d loss/dy| = |theta.x|)
struct LossSpec {
    double ridge_coefficient = 1.0;  // lambda, equals gamma
    double feature_bound = 1.0;      // B_x
    double param_bound = 1.0;        // B_theta
    double gamma = 1.0;
    double beta = 0.0;
    double alpha = 0.0;
    double l_ell = 0.0;
};

struct ModelParams {
    Vec theta;
};

inline double sigmoid(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

// log(1 + exp(s)) without overflow
inline double softplus(double s) {
    if (s > 35.0) return s;
    return std::log1p(std::exp(s));
}

inline LossSpec derive_constants(double ridge_coefficient, double feature_bound) {
    if (ridge_coefficient <= 0.0 || feature_bound <= 0.0)
        throw std::domain_error("derive_constants: arguments must be positive");
    LossSpec spec;
    spec.ridge_coefficient = ridge_coefficient;
    spec.feature_bound = feature_bound;
    spec.gamma = ridge_coefficient;
    spec.param_bound = std::sqrt(2.0 * std::log(2.0) / ridge_coefficient);
    const double bx = feature_bound;
    const double bt = spec.param_bound;
    spec.beta = std::max({1.0 + bx * bt / 4.0, bx, bx * bx / 4.0 + ridge_coefficient});
    spec.alpha = std::max(bt * bt / 4.0 + 1.0, 1.0 + bx * bt / 4.0);
    spec.l_ell = std::max(bt, bx * bt);
    return spec;
}

inline void check_loss_domain(double y, const Vec& x, const LossSpec& spec) {
    if (y < 0.0 || y > 1.0) throw std::domain_error("loss: label outside [0,1]");
    if (norm2(x) > spec.feature_bound * (1.0 + 1e-9))
        throw std::domain_error("loss: feature norm exceeds feature_bound");
}

// cross-entropy of sigmoid(theta.x) against soft label y, plus the ridge term
inline double loss_value(double y, const Vec& x, const ModelParams& params,
                         const LossSpec& spec) {
    check_loss_domain(y, x, spec);
    const double s = dot(params.theta, x);
    const double ce = y * softplus(-s) + (1.0 - y) * softplus(s);
    return ce + 0.5 * spec.ridge_coefficient * dot(params.theta, params.theta);
}

inline Vec loss_grad_theta(double y, const Vec& x, const ModelParams& params,
                           const LossSpec& spec) {
    check_loss_domain(y, x, spec);
    const double s = dot(params.theta, x);
    Vec g = scaled(x, sigmoid(s) - y);
    axpy(spec.ridge_coefficient, params.theta, g);
    return g;
}

inline Vec loss_grad_x(double y, const Vec& x, const ModelParams& params,
                       const LossSpec& spec) {
    check_loss_domain(y, x, spec);
    const double s = dot(params.theta, x);
    return scaled(params.theta, sigmoid(s) - y);
}

inline double weighted_risk(const WeightedSample& sample, const ModelParams& params,
                            const LossSpec& spec) {
    double r = 0.0;
    for (std::size_t i = 0; i < sample.points.size(); ++i)
        r += sample.weights[i] *
             loss_value(sample.points[i].y, sample.points[i].x, params, spec);
    return r;
}

inline Vec weighted_risk_grad(const WeightedSample& sample, const ModelParams& params,
                              const LossSpec& spec) {
    Vec g(params.theta.size(), 0.0);
    for (std::size_t i = 0; i < sample.points.size(); ++i)
        axpy(sample.weights[i],
             loss_grad_theta(sample.points[i].y, sample.points[i].x, params, spec), g);
    return g;
}

// Deterministic full-batch gradient descent at the analytic step size
// 1 / (Bx^2/4 + lambda), the smoothness constant of the weighted risk.
// Unique solution by strong convexity; bit-identical across calls with
// identical inputs.
inline ModelParams erm_solve(const WeightedSample& sample, const LossSpec& spec,
                             double tol = 1e-10, int max_iter = 10000) {
    if (sample.points.empty()) throw std::invalid_argument("erm_solve: empty sample");
    if (spec.ridge_coefficient <= 0.0)
        throw std::domain_error("erm_solve: ridge coefficient must be positive");
    double wsum = 0.0;
    for (double w : sample.weights) wsum += w;
    if (std::abs(wsum - 1.0) > 1e-9)
        throw std::invalid_argument("erm_solve: weights must sum to 1");

    const double smooth =
        spec.feature_bound * spec.feature_bound / 4.0 + spec.ridge_coefficient;
    const double step = 1.0 / smooth;
    const std::size_t d = sample.points.front().x.size();
    ModelParams params{Vec(d, 0.0)};
    for (int it = 0; it < max_iter; ++it) {
        const Vec g = weighted_risk_grad(sample, params, spec);
        if (norm2(g) <= tol) return params;
        axpy(-step, g, params.theta);
    }
    throw std::runtime_error("erm_solve: iteration budget exhausted before tolerance");
}

}  // namespace reciprocal
