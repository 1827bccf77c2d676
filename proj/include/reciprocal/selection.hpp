#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "reciprocal/erm.hpp"
#include "reciprocal/rng.hpp"
#include "reciprocal/vec.hpp"

namespace reciprocal {

enum class CriterionKind { linear_score, negative_margin };

struct Box {
    Vec lo;
    Vec hi;

    bool contains(const Vec& x, double tol = 1e-12) const {
        if (x.size() != lo.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
        return true;
    }

    Vec clip(Vec x) const {
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = std::clamp(x[i], lo[i], hi[i]);
        return x;
    }
};

struct SelectionSpec {
    CriterionKind criterion = CriterionKind::linear_score;
    double kappa = 1.0;        // regularizer strength
    double l_s = 1.0;          // sensitivity constant, scales 1/L_s on the penalty
    Vec anchor;                // center of the quadratic penalty
    std::vector<Vec> pool;     // candidates for pool-based selectors
    Box box;                   // feature domain for the closed-form selector

    void validate_pool() const {
        if (pool.empty()) throw std::invalid_argument("selection: empty candidate pool");
    }
};

struct SelectionOutcome {
    Vec x;
    std::optional<std::vector<double>> draw_probabilities;
    std::optional<std::size_t> chosen_index;
};

inline double criterion_value(const Vec& x, const ModelParams& theta,
                              const SelectionSpec& spec) {
    const double s = dot(theta.theta, x);
    return spec.criterion == CriterionKind::linear_score ? s : -std::abs(s);
}

// quadratic penalty term of the regularized objective
inline double regularizer_penalty(const Vec& x, const SelectionSpec& spec) {
    Vec d = subtracted(x, spec.anchor);
    return -(spec.kappa / (2.0 * spec.l_s)) * dot(d, d);
}

inline std::vector<double> softmax(std::vector<double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double& v : logits) {
        v = std::exp(v - m);
        z += v;
    }
    for (double& v : logits) v /= z;
    return logits;
}

// softmax standardization of the criterion over the candidate pool
inline std::vector<double> normalize_criterion(const ModelParams& theta,
                                               const SelectionSpec& spec) {
    spec.validate_pool();
    std::vector<double> logits(spec.pool.size());
    for (std::size_t i = 0; i < spec.pool.size(); ++i)
        logits[i] = criterion_value(spec.pool[i], theta, spec);
    return softmax(std::move(logits));
}

inline SelectionOutcome select_deterministic(const ModelParams& theta,
                                             const SelectionSpec& spec) {
    spec.validate_pool();
    std::size_t best = 0;
    double best_c = criterion_value(spec.pool[0], theta, spec);
    for (std::size_t i = 1; i < spec.pool.size(); ++i) {
        const double c = criterion_value(spec.pool[i], theta, spec);
        if (c > best_c) {  // ties keep the lowest index
            best_c = c;
            best = i;
        }
    }
    return {spec.pool[best], std::nullopt, best};
}

inline SelectionOutcome select_stochastic(const ModelParams& theta,
                                          const SelectionSpec& spec, Rng& rng) {
    auto probs = normalize_criterion(theta, spec);
    const std::size_t idx = rng.categorical(probs);
    return {spec.pool[idx], std::move(probs), idx};
}

// Regularized deterministic selection over the box: the objective
// theta.x - (kappa / 2 L_s) ||x - anchor||^2 is strongly concave, so the
// maximizer has the closed form clip_box(anchor + (L_s/kappa) * theta).
// Lipschitz in theta with constant L_s / kappa (clipping is 1-Lipschitz).
inline SelectionOutcome select_regularized(const ModelParams& theta,
                                           const SelectionSpec& spec) {
    if (spec.criterion != CriterionKind::linear_score)
        throw std::invalid_argument(
            "select_regularized: criterion must be linear in x");
    if (spec.kappa <= 0.0 || spec.l_s <= 0.0)
        throw std::domain_error("select_regularized: kappa and l_s must be positive");
    Vec x = spec.anchor;
    axpy(spec.l_s / spec.kappa, theta.theta, x);
    return {spec.box.clip(std::move(x)), std::nullopt, std::nullopt};
}

inline std::vector<double> regularized_pool_probs(const ModelParams& theta,
                                                  const SelectionSpec& spec) {
    spec.validate_pool();
    std::vector<double> logits(spec.pool.size());
    for (std::size_t i = 0; i < spec.pool.size(); ++i)
        logits[i] = criterion_value(spec.pool[i], theta, spec) +
                    regularizer_penalty(spec.pool[i], spec);
    return softmax(std::move(logits));
}

inline SelectionOutcome select_regularized_stochastic(const ModelParams& theta,
                                                      const SelectionSpec& spec,
                                                      Rng& rng) {
    auto probs = regularized_pool_probs(theta, spec);
    const std::size_t idx = rng.categorical(probs);
    return {spec.pool[idx], std::move(probs), idx};
}

// soft label prediction p(x, theta) = sigmoid(theta.x)
inline double soft_label(const Vec& x, const ModelParams& theta) {
    return sigmoid(dot(theta.theta, x));
}

}  // namespace reciprocal
