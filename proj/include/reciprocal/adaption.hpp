#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "reciprocal/rng.hpp"
#include "reciprocal/sample.hpp"
#include "reciprocal/selection.hpp"

namespace reciprocal {

enum class LabelerKindTag { model_prediction, oracle_soft, oracle_hard, bandit_outcome };

struct Labeler {
    LabelerKindTag kind = LabelerKindTag::model_prediction;
    std::optional<Vec> oracle_theta;  // ground truth for the oracle kinds
    double noise = 0.0;               // additive oracle label noise
    bool hard_threshold = false;      // threshold model predictions at 1/2

    void validate() const {
        if ((kind == LabelerKindTag::oracle_soft || kind == LabelerKindTag::oracle_hard) &&
            !oracle_theta)
            throw std::invalid_argument("labeler: oracle kind requires oracle_theta");
    }
};

inline double label_point(const Vec& x, const ModelParams& theta, const Labeler& labeler,
                          Rng& rng) {
    labeler.validate();
    switch (labeler.kind) {
        case LabelerKindTag::model_prediction: {
            const double p = soft_label(x, theta);
            return labeler.hard_threshold ? (p >= 0.5 ? 1.0 : 0.0) : p;
        }
        case LabelerKindTag::oracle_soft: {
            double p = sigmoid(dot(*labeler.oracle_theta, x));
            if (labeler.noise > 0.0) p += labeler.noise * rng.normal();
            return std::clamp(p, 0.0, 1.0);
        }
        case LabelerKindTag::oracle_hard: {
            const double p = sigmoid(dot(*labeler.oracle_theta, x));
            return rng.uniform() < p ? 1.0 : 0.0;
        }
        case LabelerKindTag::bandit_outcome:
            throw std::invalid_argument(
                "label_point: bandit outcomes come from the environment");
    }
    throw std::logic_error("label_point: unreachable");
}

enum class SelectorKind {
    deterministic,
    stochastic,
    regularized,
    regularized_stochastic
};

enum class Semantics { sampled, expected };

struct AdaptionStepLog {
    LabeledPoint selected;
    std::optional<std::size_t> removed_index;
    std::optional<std::vector<double>> draw_probabilities;
    LabelerKindTag label_source = LabelerKindTag::model_prediction;
};

namespace detail {

// One selected-and-labeled candidate; expected semantics yields several with
// softmax masses.
struct Candidate {
    LabeledPoint pt;
    double mass = 1.0;
};

inline std::vector<Candidate> select_and_label(const ModelParams& theta,
                                               const SelectionSpec& spec,
                                               SelectorKind selector,
                                               const Labeler& labeler,
                                               Semantics semantics, Rng& select_rng,
                                               Rng& label_rng, AdaptionStepLog& log) {
    log.label_source = labeler.kind;
    const bool stochastic = selector == SelectorKind::stochastic ||
                            selector == SelectorKind::regularized_stochastic;
    if (!stochastic || semantics == Semantics::sampled) {
        SelectionOutcome out;
        switch (selector) {
            case SelectorKind::deterministic:
                out = select_deterministic(theta, spec);
                break;
            case SelectorKind::stochastic:
                out = select_stochastic(theta, spec, select_rng);
                break;
            case SelectorKind::regularized:
                out = select_regularized(theta, spec);
                break;
            case SelectorKind::regularized_stochastic:
                out = select_regularized_stochastic(theta, spec, select_rng);
                break;
        }
        const double y = label_point(out.x, theta, labeler, label_rng);
        log.selected = {out.x, y};
        log.draw_probabilities = out.draw_probabilities;
        return {{{out.x, y}, 1.0}};
    }

    // expected semantics: the full softmax mixture over the pool
    const std::vector<double> probs =
        selector == SelectorKind::stochastic
            ? normalize_criterion(theta, spec)
            : regularized_pool_probs(theta, spec);
    std::vector<Candidate> mix;
    mix.reserve(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double y = label_point(spec.pool[i], theta, labeler, label_rng);
        mix.push_back({{spec.pool[i], y}, probs[i]});
    }
    // barycentric representative for the log
    std::size_t top = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[top]) top = i;
    log.selected = mix[top].pt;
    log.draw_probabilities = probs;
    return mix;
}

}  // namespace detail

// Greedy sample adaption f: add one (expected: one mixture of) labeled point,
// mass arithmetic n/(n+1) vs 1/(n+1).
inline std::pair<WeightedSample, AdaptionStepLog> adapt_greedy(
    const ModelParams& theta, const WeightedSample& sample, long n,
    const SelectionSpec& spec, SelectorKind selector, const Labeler& labeler,
    Semantics semantics, Rng& rng) {
    sample.check_normalized();
    AdaptionStepLog log;
    Rng select_rng = rng.fork(1);
    Rng label_rng = rng.fork(2);
    const auto mix = detail::select_and_label(theta, spec, selector, labeler, semantics,
                                              select_rng, label_rng, log);
    const double dn = static_cast<double>(n);
    WeightedSample out;
    out.points = sample.points;
    out.weights = sample.weights;
    for (double& w : out.weights) w *= dn / (dn + 1.0);
    for (const auto& cand : mix)
        append_atom(out, cand.pt, cand.mass / (dn + 1.0));
    out.n_effective = sample.n_effective + 1.0;
    log.removed_index = std::nullopt;
    return {std::move(out), std::move(log)};
}

// Non-greedy sample adaption f_n: remove one atom's mass and refill it with
// the selected point (sampled) or the selection mixture (expected). For a
// deterministic selector both semantics coincide with the plain atom swap.
inline std::pair<WeightedSample, AdaptionStepLog> adapt_nongreedy(
    const ModelParams& theta, const WeightedSample& sample, const SelectionSpec& spec,
    SelectorKind selector, const Labeler& labeler, RemovalMode removal,
    Semantics semantics, Rng& rng) {
    sample.check_normalized();
    AdaptionStepLog log;
    Rng removal_rng = rng.fork(0);
    Rng select_rng = rng.fork(1);
    Rng label_rng = rng.fork(2);
    const std::size_t removed = removal_select(sample, removal, removal_rng);
    const auto mix = detail::select_and_label(theta, spec, selector, labeler, semantics,
                                              select_rng, label_rng, log);
    log.removed_index = removed;

    WeightedSample out;
    if (mix.size() == 1 && sample.is_uniform_atomic()) {
        out = swap_point_nongreedy(sample, mix.front().pt, removed);
    } else {
        const double freed = sample.weights[removed];
        out.points = sample.points;
        out.weights = sample.weights;
        out.points.erase(out.points.begin() + static_cast<long>(removed));
        out.weights.erase(out.weights.begin() + static_cast<long>(removed));
        for (const auto& cand : mix) append_atom(out, cand.pt, cand.mass * freed);
    }
    out.n_effective = sample.n_effective;
    return {std::move(out), std::move(log)};
}

}  // namespace reciprocal
