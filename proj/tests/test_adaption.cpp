#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "reciprocal/adaption.hpp"
#include "reciprocal/wasserstein.hpp"

using namespace reciprocal;

namespace {

SelectionSpec spec_1d() {
    SelectionSpec spec;
    spec.anchor = {0.0};
    spec.box.lo = {-1.0};
    spec.box.hi = {1.0};
    spec.kappa = 4.0;
    spec.l_s = 1.0;
    spec.pool = {{-0.5}, {0.5}};
    return spec;
}

}  // namespace

TEST_CASE("label_point kinds") {
    Rng rng(1);
    Labeler model;
    CHECK(label_point({0.4}, ModelParams{{0.0}}, model, rng) == doctest::Approx(0.5));

    Labeler hard_model;
    hard_model.hard_threshold = true;
    CHECK(label_point({1.0}, ModelParams{{0.2}}, hard_model, rng) == 1.0);
    CHECK(label_point({1.0}, ModelParams{{-0.2}}, hard_model, rng) == 0.0);

    Labeler oracle;
    oracle.kind = LabelerKindTag::oracle_soft;
    oracle.oracle_theta = Vec{std::log(3.0)};
    CHECK(label_point({1.0}, ModelParams{{0.0}}, oracle, rng) ==
          doctest::Approx(0.75).epsilon(1e-12));

    Labeler strong;
    strong.kind = LabelerKindTag::oracle_hard;
    strong.oracle_theta = Vec{1000.0};  // saturated sigmoid
    CHECK(label_point({1.0}, ModelParams{{0.0}}, strong, rng) == 1.0);

    Labeler missing;
    missing.kind = LabelerKindTag::oracle_soft;
    CHECK_THROWS_AS(label_point({1.0}, ModelParams{{0.0}}, missing, rng),
                    std::invalid_argument);
}

TEST_CASE("adapt_greedy composition") {
    auto spec = spec_1d();
    spec.pool = {{0.5}};
    Labeler model;
    Rng rng(7);
    const auto base = uniform_sample({{{-0.5}, 0.0}, {{0.25}, 1.0}});
    const auto [out, log] = adapt_greedy(ModelParams{{0.0}}, base, 2, spec,
                                         SelectorKind::deterministic, model,
                                         Semantics::sampled, rng);
    REQUIRE(out.size() == 3);
    CHECK(out.points[2].x[0] == 0.5);
    CHECK(out.points[2].y == doctest::Approx(0.5));  // sigma(0)
    CHECK(out.weights[2] == doctest::Approx(1.0 / 3.0));
    CHECK(out.n_effective == 3.0);
    CHECK(!log.removed_index);

    // repeated application grows the atom count by one per call
    auto s = base;
    long n = 2;
    for (int t = 0; t < 4; ++t) {
        SelectionSpec sp = spec;
        sp.pool = {{0.1 * (t + 1)}};
        Rng step_rng(t);
        s = adapt_greedy(ModelParams{{0.3}}, s, n, sp, SelectorKind::deterministic,
                         model, Semantics::sampled, step_rng)
                .first;
        ++n;
        CHECK(s.size() == base.size() + t + 1);
        CHECK(s.n_effective == static_cast<double>(n));
    }
}

TEST_CASE("greedy n/(n+1) contraction with deterministic selection") {
    auto spec = spec_1d();
    spec.pool = {{-0.8}, {0.3}, {0.9}};
    Labeler model;
    Rng rng(33);
    const GroundMetric metric;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform() * 4.0);
        std::vector<LabeledPoint> pa, pb;
        for (int i = 0; i < n; ++i) {
            pa.push_back({{rng.uniform(-1.0, 1.0)}, rng.uniform()});
            pb.push_back({{rng.uniform(-1.0, 1.0)}, rng.uniform()});
        }
        const auto p = uniform_sample(pa);
        const auto q = uniform_sample(pb);
        const ModelParams theta{{rng.uniform(-1.0, 1.0)}};
        Rng r1(trial), r2(trial);
        const auto fp = adapt_greedy(theta, p, n, spec, SelectorKind::deterministic,
                                     model, Semantics::sampled, r1)
                            .first;
        const auto fq = adapt_greedy(theta, q, n, spec, SelectorKind::deterministic,
                                     model, Semantics::sampled, r2)
                            .first;
        CHECK(wasserstein1(fp, fq, metric) <=
              (static_cast<double>(n) / (n + 1)) * wasserstein1(p, q, metric) + 1e-9);
    }
}

TEST_CASE("adapt_nongreedy swap identity") {
    auto spec = spec_1d();
    Labeler model;
    // nearest_to_mean removes index 0 here; selector re-adds the same point
    const auto base = uniform_sample({{{0.0}, 0.5}, {{0.9}, 0.2}});
    spec.pool = {{0.0}};
    Rng rng(4);
    const auto [out, log] = adapt_nongreedy(ModelParams{{0.0}}, base, spec,
                                            SelectorKind::deterministic, model,
                                            RemovalMode::nearest_to_mean,
                                            Semantics::sampled, rng);
    CHECK(*log.removed_index == 0);
    CHECK(wasserstein1(base, out) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(out.n_effective == base.n_effective);
}

TEST_CASE("adapt_nongreedy concrete swap") {
    auto spec = spec_1d();
    spec.pool = {{0.7}};
    Labeler model;
    const auto base = uniform_sample({{{0.05}, 0.5}, {{-0.9}, 0.0}});
    Rng rng(4);
    // mean is -0.425; index 0 at 0.05 is nearer
    const auto [out, log] = adapt_nongreedy(ModelParams{{0.1}}, base, spec,
                                            SelectorKind::deterministic, model,
                                            RemovalMode::nearest_to_mean,
                                            Semantics::sampled, rng);
    REQUIRE(out.size() == 2);
    CHECK(*log.removed_index == 0);
    CHECK(out.points[0].x[0] == 0.7);
    CHECK(out.points[0].y == doctest::Approx(sigmoid(0.07)).epsilon(1e-12));
    CHECK(out.points[1].x[0] == -0.9);
    CHECK(out.weights[0] == doctest::Approx(0.5));
}

TEST_CASE("nongreedy single-step W1 bound") {
    auto spec = spec_1d();
    Labeler model;
    Rng rng(91);
    const GroundMetric metric;
    for (int trial = 0; trial < 500; ++trial) {
        const int n0 = 2 + static_cast<int>(rng.uniform() * 5.0);
        std::vector<LabeledPoint> pts;
        for (int i = 0; i < n0; ++i)
            pts.push_back({{rng.uniform(-1.0, 1.0)}, rng.uniform()});
        const auto base = uniform_sample(pts);
        const ModelParams theta{{rng.uniform(-1.0, 1.0)}};
        Rng step_rng(trial);
        const auto [out, log] = adapt_nongreedy(theta, base, spec,
                                                SelectorKind::regularized, model,
                                                RemovalMode::uniform_random,
                                                Semantics::sampled, step_rng);
        const double w1 = wasserstein1(base, out, metric);
        CHECK(w1 <= metric(base.points[*log.removed_index], log.selected) / n0 + 1e-12);
    }
}

TEST_CASE("expected semantics produces the softmax mixture") {
    auto spec = spec_1d();
    spec.pool = {{-0.5}, {0.5}};
    Labeler model;
    const auto base = uniform_sample({{{0.1}, 0.5}, {{-0.8}, 0.0}});
    Rng rng(6);
    const auto [out, log] = adapt_nongreedy(ModelParams{{0.0}}, base, spec,
                                            SelectorKind::stochastic, model,
                                            RemovalMode::nearest_to_mean,
                                            Semantics::expected, rng);
    // removed atom's 1/2 mass split uniformly over the two pool points
    REQUIRE(out.size() == 3);
    out.check_normalized(1e-12);
    CHECK(out.weights[1] == doctest::Approx(0.25));
    CHECK(out.weights[2] == doctest::Approx(0.25));
    REQUIRE(log.draw_probabilities);
    CHECK((*log.draw_probabilities)[0] == doctest::Approx(0.5));
}

TEST_CASE("labels stay in the unit interval") {
    auto spec = spec_1d();
    Rng rng(15);
    for (int i = 0; i < 200; ++i) {
        Labeler lab;
        const int kind = i % 3;
        if (kind == 1) {
            lab.kind = LabelerKindTag::oracle_soft;
            lab.oracle_theta = Vec{rng.uniform(-3.0, 3.0)};
            lab.noise = 0.3;
        } else if (kind == 2) {
            lab.kind = LabelerKindTag::oracle_hard;
            lab.oracle_theta = Vec{rng.uniform(-3.0, 3.0)};
        }
        const double y = label_point({rng.uniform(-1.0, 1.0)},
                                     ModelParams{{rng.uniform(-1.0, 1.0)}}, lab, rng);
        CHECK(y >= 0.0);
        CHECK(y <= 1.0);
        if (kind == 0) {
            CHECK(y > 0.0);
            CHECK(y < 1.0);
        }
    }
}

TEST_CASE("hard labels break the empirical Lipschitz ratio") {
    // anchor away from the origin so the selected point's score changes sign
    auto spec = spec_1d();
    spec.anchor = {0.8};
    spec.kappa = 50.0;
    Labeler soft, hard;
    hard.hard_threshold = true;
    const auto base = uniform_sample({{{0.3}, 0.4}, {{-0.6}, 0.6}, {{0.1}, 0.5}});
    const GroundMetric metric;

    auto ratio_for = [&](const Labeler& lab) {
        double max_ratio = 0.0;
        for (int i = 0; i < 400; ++i) {
            const double t = -0.02 + 0.04 * i / 399.0;
            const ModelParams t1{{t}}, t2{{-t}};
            if (std::abs(2.0 * t) < 1e-12) continue;
            Rng r1(0), r2(0);
            const auto o1 = adapt_nongreedy(t1, base, spec, SelectorKind::regularized,
                                            lab, RemovalMode::nearest_to_mean,
                                            Semantics::expected, r1)
                                .first;
            const auto o2 = adapt_nongreedy(t2, base, spec, SelectorKind::regularized,
                                            lab, RemovalMode::nearest_to_mean,
                                            Semantics::expected, r2)
                                .first;
            max_ratio = std::max(max_ratio,
                                 wasserstein1(o1, o2, metric) / std::abs(2.0 * t));
        }
        return max_ratio;
    };

    const double soft_ratio = ratio_for(soft);
    const double hard_ratio = ratio_for(hard);
    CHECK(hard_ratio >= 10.0 * soft_ratio);
}
