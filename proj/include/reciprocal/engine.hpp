#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "reciprocal/adaption.hpp"
#include "reciprocal/erm.hpp"
#include "reciprocal/sample.hpp"
#include "reciprocal/selection.hpp"
#include "reciprocal/wasserstein.hpp"

namespace reciprocal {

struct ReciprocalState {
    ModelParams theta;
    WeightedSample sample;
    std::optional<long> n;  // greedy size counter
};

// sum metric on (theta, P[, n])
inline double composite_distance(const ReciprocalState& s1, const ReciprocalState& s2,
                                 const GroundMetric& metric = {}) {
    if (s1.n.has_value() != s2.n.has_value())
        throw std::invalid_argument("composite_distance: greedy/non-greedy mismatch");
    double d = dist2(s1.theta.theta, s2.theta.theta) +
               wasserstein1(s1.sample, s2.sample, metric);
    if (s1.n) d += std::abs(static_cast<double>(*s1.n - *s2.n));
    return d;
}

struct TrajectoryRecord {
    long t = 0;
    double d_theta = 0.0;
    double w1_step = 0.0;
    double composite = 0.0;
    double risk = 0.0;
    AdaptionStepLog step_log;
};

struct ConvergenceVerdict {
    bool converged = false;
    std::optional<long> stop_iteration;
    std::optional<double> fitted_rate;  // ln(rho) of the geometric envelope
    std::optional<double> rate_bound;   // ln(L_hat * (1 + beta/gamma))
};

enum class StepKind { standard, bandit, synthetic_affine };

struct AffineParams {
    double c = 0.0;
    double l = 0.0;
};

enum class BanditPolicyKind { thompson, eps_greedy, ucb };

struct BanditPolicy {
    BanditPolicyKind kind = BanditPolicyKind::thompson;
    double param = 0.0;  // temperature / epsilon / width
};

struct BanditEnvironment {
    std::vector<Vec> context_pool;
    std::vector<Vec> true_theta_per_arm;  // one block of ground truth per arm
};

struct EngineConfig {
    LossSpec loss;
    SelectionSpec selection;
    SelectorKind selector = SelectorKind::regularized;
    Labeler labeler;
    RemovalMode removal = RemovalMode::nearest_to_mean;
    bool greedy = false;
    Semantics semantics = Semantics::expected;
    GroundMetric metric;
    double erm_tol = 1e-10;
    StepKind step_kind = StepKind::standard;
    std::optional<AffineParams> affine;
    std::optional<BanditPolicy> bandit_policy;
    std::optional<BanditEnvironment> bandit_env;
};

// per-run mutable instance state (UCB pull counts live outside theta)
struct RunScratch {
    std::vector<long> pull_counts;
};

namespace detail {

// block-sparse context expansion: feature block of the played arm holds the
// context, all other blocks are zero
inline Vec expand_context(const Vec& context, std::size_t arm, std::size_t n_arms) {
    Vec x(context.size() * n_arms, 0.0);
    for (std::size_t i = 0; i < context.size(); ++i)
        x[arm * context.size() + i] = context[i];
    return x;
}

inline std::pair<WeightedSample, AdaptionStepLog> bandit_adapt(
    const ModelParams& theta, const WeightedSample& sample, long n,
    const EngineConfig& config, RunScratch& scratch, Rng& rng) {
    const auto& env = *config.bandit_env;
    const auto& policy = *config.bandit_policy;
    const std::size_t n_arms = env.true_theta_per_arm.size();
    if (n_arms == 0) throw std::invalid_argument("bandit: no arms");
    if (scratch.pull_counts.size() != n_arms) scratch.pull_counts.assign(n_arms, 0);

    Rng context_rng = rng.fork(3);
    Rng policy_rng = rng.fork(4);
    Rng outcome_rng = rng.fork(5);

    const std::size_t ctx_idx =
        static_cast<std::size_t>(context_rng.uniform() * static_cast<double>(
                                     env.context_pool.size())) %
        env.context_pool.size();
    const Vec& context = env.context_pool[ctx_idx];
    const std::size_t dim = context.size();

    // per-arm scores from the shared parameter block
    std::vector<double> scores(n_arms, 0.0);
    for (std::size_t a = 0; a < n_arms; ++a)
        for (std::size_t i = 0; i < dim; ++i)
            scores[a] += theta.theta[a * dim + i] * context[i];

    std::size_t arm = 0;
    switch (policy.kind) {
        case BanditPolicyKind::thompson: {
            std::vector<double> perturbed = scores;
            for (double& s : perturbed) s += policy.param * policy_rng.normal();
            for (std::size_t a = 1; a < n_arms; ++a)
                if (perturbed[a] > perturbed[arm]) arm = a;
            break;
        }
        case BanditPolicyKind::eps_greedy: {
            const double u = policy_rng.uniform();
            // the exploit branch also draws, keeping streams aligned across
            // policies at their degenerate settings
            const double explore_pick = policy_rng.uniform();
            if (u < policy.param) {
                arm = static_cast<std::size_t>(explore_pick *
                                               static_cast<double>(n_arms)) %
                      n_arms;
            } else {
                for (std::size_t a = 1; a < n_arms; ++a)
                    if (scores[a] > scores[arm]) arm = a;
            }
            break;
        }
        case BanditPolicyKind::ucb: {
            policy_rng.uniform();  // stream alignment with the other policies
            policy_rng.uniform();
            std::vector<double> ucb = scores;
            for (std::size_t a = 0; a < n_arms; ++a)
                ucb[a] += policy.param /
                          std::sqrt(static_cast<double>(scratch.pull_counts[a] + 1));
            for (std::size_t a = 1; a < n_arms; ++a)
                if (ucb[a] > ucb[arm]) arm = a;
            break;
        }
    }
    scratch.pull_counts[arm] += 1;

    const double p_outcome = sigmoid(dot(env.true_theta_per_arm[arm], context));
    const double y = config.semantics == Semantics::expected
                         ? p_outcome
                         : (outcome_rng.uniform() < p_outcome ? 1.0 : 0.0);

    const LabeledPoint pt{expand_context(context, arm, n_arms), y};
    AdaptionStepLog log;
    log.selected = pt;
    log.label_source = LabelerKindTag::bandit_outcome;
    return {add_point_greedy(sample, pt, n), std::move(log)};
}

}  // namespace detail

// One reciprocal learning iteration: sample adaption first, then ERM refit.
inline std::pair<ReciprocalState, TrajectoryRecord> step(const ReciprocalState& state,
                                                         const EngineConfig& config,
                                                         RunScratch& scratch,
                                                         Rng& rng) {
    ReciprocalState next;
    TrajectoryRecord rec;

    if (config.step_kind == StepKind::synthetic_affine) {
        const auto& ap = *config.affine;
        next = state;
        for (double& v : next.theta.theta) v = ap.c + ap.l * v;
        rec.d_theta = dist2(next.theta.theta, state.theta.theta);
        rec.composite = rec.d_theta;
        return {std::move(next), std::move(rec)};
    }

    std::pair<WeightedSample, AdaptionStepLog> adapted =
        config.step_kind == StepKind::bandit
            ? detail::bandit_adapt(state.theta, state.sample,
                                   state.n.value_or(static_cast<long>(
                                       state.sample.n_effective)),
                                   config, scratch, rng)
            : (config.greedy
                   ? adapt_greedy(state.theta, state.sample,
                                  state.n.value(), config.selection,
                                  config.selector, config.labeler,
                                  config.semantics, rng)
                   : adapt_nongreedy(state.theta, state.sample, config.selection,
                                     config.selector, config.labeler, config.removal,
                                     config.semantics, rng));

    next.sample = std::move(adapted.first);
    next.theta = erm_solve(next.sample, config.loss, config.erm_tol);
    if (config.greedy || config.step_kind == StepKind::bandit)
        next.n = state.n.value_or(static_cast<long>(state.sample.n_effective)) + 1;

    rec.step_log = std::move(adapted.second);
    rec.d_theta = dist2(next.theta.theta, state.theta.theta);
    rec.w1_step = wasserstein1(state.sample, next.sample, config.metric);
    rec.composite = rec.d_theta + rec.w1_step +
                    (next.n ? std::abs(static_cast<double>(*next.n -
                                                           state.n.value_or(*next.n - 1)))
                            : 0.0);
    rec.risk = weighted_risk(next.sample, next.theta, config.loss);
    return {std::move(next), std::move(rec)};
}

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    std::vector<ReciprocalState> states;  // state after each recorded step
    ReciprocalState final_state;
    std::uint64_t seed = 0;
};

inline Trajectory run(const ReciprocalState& initial_state, const EngineConfig& config,
                      long max_iter, std::uint64_t seed, double stop_epsilon = 0.0,
                      long stop_window = 0) {
    if (max_iter < 1) throw std::invalid_argument("run: max_iter must be >= 1");
    Trajectory traj;
    traj.seed = seed;
    Rng master(seed);
    RunScratch scratch;
    ReciprocalState state = initial_state;
    long quiet = 0;
    for (long t = 1; t <= max_iter; ++t) {
        Rng step_rng = master.fork(static_cast<std::uint64_t>(t));
        auto [next, rec] = step(state, config, scratch, step_rng);
        rec.t = t;
        state = std::move(next);
        traj.records.push_back(std::move(rec));
        traj.states.push_back(state);
        if (stop_window > 0) {
            quiet = traj.records.back().composite < stop_epsilon ? quiet + 1 : 0;
            if (quiet >= stop_window) break;
        }
    }
    traj.final_state = state;
    return traj;
}

// Practical surrogate for the vanishing-envelope convergence definition:
// converged once the composite step stays below epsilon for `window`
// consecutive iterations; the tail of composite steps is also fit with a
// geometric envelope A * rho^t and ln(rho) reported.
inline ConvergenceVerdict detect_convergence(const std::vector<TrajectoryRecord>& records,
                                             double epsilon, long window,
                                             std::optional<double> rate_bound =
                                                 std::nullopt,
                                             long burn_in = 5) {
    if (records.empty())
        throw std::invalid_argument("detect_convergence: empty trajectory");
    ConvergenceVerdict verdict;
    verdict.rate_bound = rate_bound;
    long quiet = 0;
    for (const auto& rec : records) {
        quiet = rec.composite < epsilon ? quiet + 1 : 0;
        if (quiet >= window) {
            verdict.converged = true;
            verdict.stop_iteration = rec.t;
            break;
        }
    }
    // least squares on logs of the positive post-burn-in composite steps
    std::vector<std::pair<double, double>> pts;
    for (const auto& rec : records)
        if (rec.t > burn_in && rec.composite > 0.0)
            pts.emplace_back(static_cast<double>(rec.t), std::log(rec.composite));
    if (pts.size() >= 10) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = static_cast<double>(pts.size());
        const double denom = n * sxx - sx * sx;
        if (denom > 0.0) verdict.fitted_rate = (n * sxy - sx * sy) / denom;
    }
    return verdict;
}

// Contraction gate on the measured adaption Lipschitz constant: the
// fixed-point iteration is guaranteed geometric when the factor is below 1.
inline std::pair<double, bool> contraction_gate(double l_hat, const LossSpec& spec) {
    if (l_hat < 0.0) throw std::invalid_argument("contraction_gate: negative L");
    const double factor = l_hat * (1.0 + spec.beta / spec.gamma);
    return {factor, factor < 1.0};
}

// iterations sufficient to bring the composite distance below delta
inline long iteration_budget(double delta, double initial_distance, double factor) {
    if (delta <= 0.0) throw std::domain_error("iteration_budget: delta must be positive");
    if (factor <= 0.0 || factor >= 1.0)
        throw std::domain_error("iteration_budget: factor must be in (0,1)");
    if (initial_distance <= delta) return 0;
    return static_cast<long>(
        std::ceil(std::log(initial_distance / delta) / std::log(1.0 / factor)));
}

}  // namespace reciprocal
