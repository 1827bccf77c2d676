#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "reciprocal/engine.hpp"

namespace reciprocal {

enum class InstanceKind { self_training, active_learning, bandit, synthetic_affine };

struct InstanceConfig {
    InstanceKind kind = InstanceKind::self_training;
    bool greedy = false;
    Labeler labeler;
    SelectionSpec selector_spec;
    SelectorKind selector = SelectorKind::regularized;
    RemovalMode removal = RemovalMode::nearest_to_mean;
    Semantics semantics = Semantics::expected;
    LossSpec loss;
    GroundMetric metric;
    std::optional<BanditPolicy> bandit_policy;
    std::optional<BanditEnvironment> bandit_env;
    std::optional<AffineParams> affine_params;
};

namespace detail {

inline EngineConfig base_engine_config(const InstanceConfig& config) {
    EngineConfig ec;
    ec.loss = config.loss;
    ec.selection = config.selector_spec;
    ec.selector = config.selector;
    ec.labeler = config.labeler;
    ec.removal = config.removal;
    ec.greedy = config.greedy;
    ec.semantics = config.semantics;
    ec.metric = config.metric;
    return ec;
}

}  // namespace detail

// Self-training: the model labels its own selected points. Amending
// (greedy=false) swaps one atom per round; incremental (greedy=true) only adds
// and therefore never converges in the composite metric.
inline EngineConfig build_self_training(const InstanceConfig& config) {
    if (config.kind != InstanceKind::self_training)
        throw std::invalid_argument("build_self_training: wrong instance kind");
    if (config.labeler.kind != LabelerKindTag::model_prediction)
        throw std::invalid_argument(
            "build_self_training: self-training requires model_prediction labels");
    return detail::base_engine_config(config);
}

// Active learning: labels come from an external oracle. Weak oracle returns
// class probabilities (oracle_soft), strong oracle hard labels (oracle_hard).
inline EngineConfig build_active_learning(const InstanceConfig& config) {
    if (config.kind != InstanceKind::active_learning)
        throw std::invalid_argument("build_active_learning: wrong instance kind");
    if (config.labeler.kind != LabelerKindTag::oracle_soft &&
        config.labeler.kind != LabelerKindTag::oracle_hard)
        throw std::invalid_argument(
            "build_active_learning: labeler must be an oracle kind");
    if (!config.labeler.oracle_theta)
        throw std::invalid_argument("build_active_learning: oracle_theta missing");
    return detail::base_engine_config(config);
}

// Contextual bandit: arms share one concatenated parameter vector via
// block-sparse context expansion; data accumulates greedily.
inline EngineConfig build_bandit(const InstanceConfig& config,
                                 const BanditEnvironment& env) {
    if (config.kind != InstanceKind::bandit)
        throw std::invalid_argument("build_bandit: wrong instance kind");
    if (!config.bandit_policy)
        throw std::invalid_argument("build_bandit: policy missing");
    if (env.true_theta_per_arm.empty())
        throw std::invalid_argument("build_bandit: at least one arm required");
    if (env.context_pool.empty())
        throw std::invalid_argument("build_bandit: empty context pool");
    for (const auto& arm_theta : env.true_theta_per_arm)
        if (arm_theta.size() != env.context_pool.front().size())
            throw std::invalid_argument("build_bandit: arm/context dimension mismatch");
    EngineConfig ec = detail::base_engine_config(config);
    ec.step_kind = StepKind::bandit;
    ec.greedy = true;
    ec.bandit_policy = config.bandit_policy;
    ec.bandit_env = env;
    return ec;
}

// Scalar affine iteration theta <- C + L * theta with the sample held fixed;
// exhibits divergence for |L| > 1 and the fixed point C/(1-L) for |L| < 1.
inline EngineConfig build_synthetic_affine(const InstanceConfig& config) {
    if (config.kind != InstanceKind::synthetic_affine)
        throw std::invalid_argument("build_synthetic_affine: wrong instance kind");
    if (!config.affine_params)
        throw std::invalid_argument("build_synthetic_affine: affine_params missing");
    EngineConfig ec = detail::base_engine_config(config);
    ec.step_kind = StepKind::synthetic_affine;
    ec.affine = config.affine_params;
    return ec;
}

inline EngineConfig build_engine_config(const InstanceConfig& config) {
    switch (config.kind) {
        case InstanceKind::self_training:
            return build_self_training(config);
        case InstanceKind::active_learning:
            return build_active_learning(config);
        case InstanceKind::bandit:
            if (!config.bandit_env)
                throw std::invalid_argument("build_engine_config: bandit_env missing");
            return build_bandit(config, *config.bandit_env);
        case InstanceKind::synthetic_affine:
            return build_synthetic_affine(config);
    }
    throw std::logic_error("build_engine_config: unreachable");
}

}  // namespace reciprocal
