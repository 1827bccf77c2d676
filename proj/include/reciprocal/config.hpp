#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "reciprocal/instances.hpp"
#include "reciprocal/io.hpp"

namespace reciprocal {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::vector<std::string>& errors)
        : std::runtime_error(join(errors)), messages(errors) {}

    std::vector<std::string> messages;

private:
    static std::string join(const std::vector<std::string>& errors) {
        std::string out = "invalid config:";
        for (const auto& e : errors) out += "\n  - " + e;
        return out;
    }
};

struct ExperimentConfig {
    InstanceConfig instance;
    WeightedSample initial_sample;
    long max_iter = 200;
    double epsilon = 1e-8;
    long window = 5;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::vector<std::string>& allowed,
                       const std::string& where, std::vector<std::string>& errors) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const auto& k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) errors.push_back(where + ": unknown key '" + it.key() + "'");
    }
}

inline Vec parse_vec(const json& arr) {
    Vec v;
    for (const auto& e : arr) v.push_back(e.get<double>());
    return v;
}

inline std::vector<Vec> parse_vec_list(const json& arr) {
    std::vector<Vec> out;
    for (const auto& e : arr) out.push_back(parse_vec(e));
    return out;
}

}  // namespace detail

// Parses and fully validates an experiment config, reporting every validation
// problem at once rather than stopping at the first.
inline ExperimentConfig parse_config(const std::string& path) {
    using detail::json;
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file " + path});
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("parse error: ") + e.what()});
    }

    std::vector<std::string> errors;
    ExperimentConfig config;

    detail::check_keys(root,
                       {"instance", "loss", "selection", "labeler", "removal",
                        "semantics", "bandit", "affine", "initial_sample", "points",
                        "max_iter", "epsilon", "window", "seed", "output_dir"},
                       "config", errors);

    // loss
    double ridge = 1.0, feature_bound = 1.0;
    if (root.contains("loss")) {
        const auto& loss = root["loss"];
        detail::check_keys(loss, {"ridge", "feature_bound"}, "loss", errors);
        ridge = loss.value("ridge", 1.0);
        feature_bound = loss.value("feature_bound", 1.0);
    }
    if (ridge <= 0.0)
        errors.push_back(
            "loss.ridge: must be strictly positive (strong convexity of the "
            "regularized loss requires gamma = ridge > 0)");
    if (feature_bound <= 0.0) errors.push_back("loss.feature_bound: must be positive");
    if (errors.empty()) config.instance.loss = derive_constants(ridge, feature_bound);

    // instance
    std::string kind = "self_training";
    if (root.contains("instance")) {
        const auto& inst = root["instance"];
        detail::check_keys(inst, {"kind", "greedy"}, "instance", errors);
        kind = inst.value("kind", "self_training");
        config.instance.greedy = inst.value("greedy", false);
    }
    if (kind == "self_training")
        config.instance.kind = InstanceKind::self_training;
    else if (kind == "active_learning")
        config.instance.kind = InstanceKind::active_learning;
    else if (kind == "bandit")
        config.instance.kind = InstanceKind::bandit;
    else if (kind == "synthetic_affine")
        config.instance.kind = InstanceKind::synthetic_affine;
    else
        errors.push_back("instance.kind: unknown kind '" + kind + "'");

    // selection
    if (root.contains("selection")) {
        const auto& sel = root["selection"];
        detail::check_keys(sel,
                           {"criterion", "kappa", "l_s", "anchor", "pool", "box_lo",
                            "box_hi", "label_scale", "selector"},
                           "selection", errors);
        auto& spec = config.instance.selector_spec;
        const std::string crit = sel.value("criterion", "linear_score");
        if (crit == "linear_score")
            spec.criterion = CriterionKind::linear_score;
        else if (crit == "negative_margin")
            spec.criterion = CriterionKind::negative_margin;
        else
            errors.push_back("selection.criterion: unknown criterion '" + crit + "'");
        spec.kappa = sel.value("kappa", 1.0);
        spec.l_s = sel.value("l_s", 1.0);
        if (spec.kappa <= 0.0) errors.push_back("selection.kappa: must be positive");
        if (spec.l_s <= 0.0) errors.push_back("selection.l_s: must be positive");
        if (sel.contains("anchor")) spec.anchor = detail::parse_vec(sel["anchor"]);
        if (sel.contains("pool")) spec.pool = detail::parse_vec_list(sel["pool"]);
        if (sel.contains("box_lo")) spec.box.lo = detail::parse_vec(sel["box_lo"]);
        if (sel.contains("box_hi")) spec.box.hi = detail::parse_vec(sel["box_hi"]);
        if (spec.box.lo.size() != spec.box.hi.size())
            errors.push_back("selection: box_lo and box_hi must have equal dimension");
        config.instance.metric.label_scale = sel.value("label_scale", 1.0);
        const std::string selector = sel.value("selector", "regularized");
        if (selector == "deterministic")
            config.instance.selector = SelectorKind::deterministic;
        else if (selector == "stochastic")
            config.instance.selector = SelectorKind::stochastic;
        else if (selector == "regularized")
            config.instance.selector = SelectorKind::regularized;
        else if (selector == "regularized_stochastic")
            config.instance.selector = SelectorKind::regularized_stochastic;
        else
            errors.push_back("selection.selector: unknown selector '" + selector + "'");
    }

    // labeler
    if (root.contains("labeler")) {
        const auto& lab = root["labeler"];
        detail::check_keys(lab, {"kind", "oracle_theta", "noise", "hard"}, "labeler",
                           errors);
        const std::string lkind = lab.value("kind", "model_prediction");
        if (lkind == "model_prediction")
            config.instance.labeler.kind = LabelerKindTag::model_prediction;
        else if (lkind == "oracle_soft")
            config.instance.labeler.kind = LabelerKindTag::oracle_soft;
        else if (lkind == "oracle_hard")
            config.instance.labeler.kind = LabelerKindTag::oracle_hard;
        else
            errors.push_back("labeler.kind: unknown kind '" + lkind + "'");
        if (lab.contains("oracle_theta"))
            config.instance.labeler.oracle_theta = detail::parse_vec(lab["oracle_theta"]);
        config.instance.labeler.noise = lab.value("noise", 0.0);
        config.instance.labeler.hard_threshold = lab.value("hard", false);
        if (config.instance.labeler.noise < 0.0)
            errors.push_back("labeler.noise: must be nonnegative");
    }

    // removal / semantics
    const std::string removal = root.value("removal", "nearest_to_mean");
    if (removal == "uniform_random")
        config.instance.removal = RemovalMode::uniform_random;
    else if (removal == "nearest_to_mean")
        config.instance.removal = RemovalMode::nearest_to_mean;
    else
        errors.push_back("removal: unknown mode '" + removal + "'");

    const std::string semantics = root.value("semantics", "expected");
    if (semantics == "sampled")
        config.instance.semantics = Semantics::sampled;
    else if (semantics == "expected")
        config.instance.semantics = Semantics::expected;
    else
        errors.push_back("semantics: unknown value '" + semantics + "'");

    // bandit
    if (root.contains("bandit")) {
        const auto& ban = root["bandit"];
        detail::check_keys(ban, {"policy", "param", "context_pool", "true_theta_per_arm"},
                           "bandit", errors);
        BanditPolicy policy;
        const std::string pkind = ban.value("policy", "thompson");
        if (pkind == "thompson")
            policy.kind = BanditPolicyKind::thompson;
        else if (pkind == "eps_greedy")
            policy.kind = BanditPolicyKind::eps_greedy;
        else if (pkind == "ucb")
            policy.kind = BanditPolicyKind::ucb;
        else
            errors.push_back("bandit.policy: unknown policy '" + pkind + "'");
        policy.param = ban.value("param", 0.0);
        if (policy.kind == BanditPolicyKind::eps_greedy &&
            (policy.param < 0.0 || policy.param > 1.0))
            errors.push_back("bandit.param: epsilon must lie in [0,1]");
        config.instance.bandit_policy = policy;
        BanditEnvironment env;
        if (ban.contains("context_pool"))
            env.context_pool = detail::parse_vec_list(ban["context_pool"]);
        if (ban.contains("true_theta_per_arm"))
            env.true_theta_per_arm = detail::parse_vec_list(ban["true_theta_per_arm"]);
        config.instance.bandit_env = std::move(env);
    } else if (config.instance.kind == InstanceKind::bandit) {
        errors.push_back("bandit: section required for instance.kind = bandit");
    }

    // affine
    if (root.contains("affine")) {
        const auto& aff = root["affine"];
        detail::check_keys(aff, {"C", "L"}, "affine", errors);
        config.instance.affine_params = AffineParams{aff.value("C", 0.0),
                                                     aff.value("L", 0.0)};
    } else if (config.instance.kind == InstanceKind::synthetic_affine) {
        errors.push_back("affine: section required for instance.kind = synthetic_affine");
    }

    // runtime
    config.max_iter = root.value("max_iter", 200L);
    config.epsilon = root.value("epsilon", 1e-8);
    config.window = root.value("window", 5L);
    config.seed = root.value("seed", std::uint64_t{0});
    config.output_dir = root.value("output_dir", std::string("out"));
    if (config.max_iter < 1) errors.push_back("max_iter: must be >= 1");
    if (config.epsilon <= 0.0) errors.push_back("epsilon: must be positive");
    if (config.window < 1) errors.push_back("window: must be >= 1");

    // initial sample
    if (root.contains("initial_sample") && root.contains("points"))
        errors.push_back("config: give either initial_sample (path) or points, not both");
    if (root.contains("initial_sample")) {
        try {
            config.initial_sample =
                read_sample_csv(root["initial_sample"].get<std::string>());
        } catch (const std::exception& e) {
            errors.push_back(std::string("initial_sample: ") + e.what());
        }
    } else if (root.contains("points")) {
        std::vector<LabeledPoint> pts;
        for (const auto& row : root["points"]) {
            Vec v = detail::parse_vec(row);
            if (v.size() < 2) {
                errors.push_back("points: each row needs at least one feature and y");
                continue;
            }
            LabeledPoint pt;
            pt.y = v.back();
            v.pop_back();
            pt.x = std::move(v);
            pts.push_back(std::move(pt));
        }
        if (!pts.empty()) config.initial_sample = uniform_sample(std::move(pts));
    } else if (config.instance.kind != InstanceKind::synthetic_affine) {
        errors.push_back("config: initial_sample or points required");
    }

    if (!errors.empty()) throw ConfigError(errors);
    return config;
}

}  // namespace reciprocal
