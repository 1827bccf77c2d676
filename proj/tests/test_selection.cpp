#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "reciprocal/rng.hpp"
#include "reciprocal/selection.hpp"

using namespace reciprocal;

namespace {

SelectionSpec pool_spec(std::vector<Vec> pool) {
    SelectionSpec spec;
    spec.pool = std::move(pool);
    const std::size_t d = spec.pool.front().size();
    spec.anchor.assign(d, 0.0);
    spec.box.lo.assign(d, -10.0);
    spec.box.hi.assign(d, 10.0);
    return spec;
}

}  // namespace

TEST_CASE("criterion values") {
    auto spec = pool_spec({{1.0}});
    CHECK(criterion_value({3.0}, ModelParams{{0.0}}, spec) == 0.0);

    spec.criterion = CriterionKind::negative_margin;
    CHECK(criterion_value({2.0}, ModelParams{{1.0}}, spec) == doctest::Approx(-2.0));
    CHECK(criterion_value({-2.0}, ModelParams{{1.0}}, spec) == doctest::Approx(-2.0));
}

TEST_CASE("linear criterion Lipschitz in theta") {
    auto spec = pool_spec({{1.0, 0.0}});
    Rng rng(3);
    const double bx = 1.5;
    for (int i = 0; i < 1000; ++i) {
        Vec x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const double n = norm2(x);
        if (n > 1e-9)
            for (double& v : x) v *= bx * rng.uniform() / n;
        const ModelParams t1{{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}};
        const ModelParams t2{{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}};
        const double dc = std::abs(criterion_value(x, t1, spec) -
                                   criterion_value(x, t2, spec));
        CHECK(dc <= bx * dist2(t1.theta, t2.theta) + 1e-12);
    }
}

TEST_CASE("softmax normalization") {
    auto spec = pool_spec({{1.0}, {2.0}, {-1.0}});
    const auto uniform = normalize_criterion(ModelParams{{0.0}}, spec);
    for (double p : uniform) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // criterion values (0, ln 3) -> probabilities (1/4, 3/4)
    auto two = pool_spec({{0.0}, {std::log(3.0)}});
    const auto probs = normalize_criterion(ModelParams{{1.0}}, two);
    CHECK(probs[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(probs[1] == doctest::Approx(0.75).epsilon(1e-12));

    Rng rng(17);
    for (int i = 0; i < 50; ++i) {
        const ModelParams t{{rng.uniform(-40.0, 40.0)}};
        const auto p = normalize_criterion(t, spec);
        double sum = 0.0;
        for (double v : p) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("deterministic selection and argmax invariance") {
    auto spec = pool_spec({{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}});
    CHECK(select_deterministic(ModelParams{{0.0, 0.0}}, spec).chosen_index == 0);
    const auto out = select_deterministic(ModelParams{{1.0, 0.0}}, spec);
    CHECK(out.x == Vec{1.0, 0.0});

    // exhaustive maximizer comparison and positive-scaling invariance
    Rng rng(23);
    for (int i = 0; i < 200; ++i) {
        const ModelParams t{{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)}};
        const auto chosen = select_deterministic(t, spec);
        for (const auto& cand : spec.pool)
            CHECK(criterion_value(cand, t, spec) <=
                  criterion_value(chosen.x, t, spec) + 1e-15);
        const double scale = 0.1 + 5.0 * rng.uniform();
        const ModelParams scaled_t{scaled(t.theta, scale)};
        CHECK(select_deterministic(scaled_t, spec).chosen_index == chosen.chosen_index);
    }
}

TEST_CASE("stochastic selection frequencies and determinism") {
    auto spec = pool_spec({{1.0}, {2.0}, {3.0}, {4.0}});
    Rng rng(555);
    int counts[4] = {0, 0, 0, 0};
    const int draws = 40000;
    for (int i = 0; i < draws; ++i)
        counts[*select_stochastic(ModelParams{{0.0}}, spec, rng).chosen_index]++;
    for (int c : counts)
        CHECK(std::abs(static_cast<double>(c) / draws - 0.25) < 0.01);

    auto single = pool_spec({{7.0}});
    Rng r2(1);
    CHECK(*select_stochastic(ModelParams{{5.0}}, single, r2).chosen_index == 0);

    Rng a(42), b(42);
    for (int i = 0; i < 20; ++i)
        CHECK(*select_stochastic(ModelParams{{0.3}}, spec, a).chosen_index ==
              *select_stochastic(ModelParams{{0.3}}, spec, b).chosen_index);
}

TEST_CASE("regularized selection closed form") {
    auto spec = pool_spec({{0.0, 0.0}});
    spec.kappa = 0.5;
    spec.l_s = 1.0;  // L_s / kappa = 2

    CHECK(select_regularized(ModelParams{{0.0, 0.0}}, spec).x == spec.anchor);
    const auto out = select_regularized(ModelParams{{1.0, -1.0}}, spec);
    CHECK(out.x[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(out.x[1] == doctest::Approx(-2.0).epsilon(1e-15));

    // grid cross-check of the maximizer
    const ModelParams t{{1.0, -1.0}};
    double best = -1e300;
    Vec best_x{0.0, 0.0};
    for (double a = -10.0; a <= 10.0; a += 0.01) {
        for (double b = -10.0; b <= 10.0; b += 0.25) {
            const Vec x{a, b};
            const double obj = criterion_value(x, t, spec) + regularizer_penalty(x, spec);
            if (obj > best) {
                best = obj;
                best_x = x;
            }
        }
    }
    CHECK(dist2(best_x, out.x) < 0.3);

    spec.criterion = CriterionKind::negative_margin;
    CHECK_THROWS_AS(select_regularized(t, spec), std::invalid_argument);
}

TEST_CASE("regularized selection Lipschitz constant") {
    auto spec = pool_spec({{0.0, 0.0}});
    spec.kappa = 4.0;
    spec.l_s = 1.0;
    Rng rng(77);
    for (int i = 0; i < 1000; ++i) {
        const ModelParams t1{{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}};
        const ModelParams t2{{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}};
        const double dt = dist2(t1.theta, t2.theta);
        if (dt < 1e-12) continue;
        const double dx = dist2(select_regularized(t1, spec).x,
                                select_regularized(t2, spec).x);
        CHECK(dx <= (spec.l_s / spec.kappa) * dt * (1.0 + 1e-12));
        // box is wide, so the map is exactly linear here
        CHECK(dx == doctest::Approx((spec.l_s / spec.kappa) * dt).epsilon(1e-9));
    }
}

TEST_CASE("regularized stochastic selection") {
    // anchor equidistant from all pool points and theta = 0: uniform draw
    auto spec = pool_spec({{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}});
    const auto probs = regularized_pool_probs(ModelParams{{0.0, 0.0}}, spec);
    double sum = 0.0;
    for (double p : probs) {
        CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
        sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    // kappa -> infinity concentrates mass on the pool point nearest the anchor
    auto near = pool_spec({{0.5, 0.0}, {3.0, 0.0}});
    near.kappa = 1e6;
    const auto conc = regularized_pool_probs(ModelParams{{1.0, 1.0}}, near);
    CHECK(conc[0] > 0.999999);
}

TEST_CASE("soft label") {
    CHECK(soft_label({1.0}, ModelParams{{0.0}}) == doctest::Approx(0.5));
    CHECK(soft_label({1.0}, ModelParams{{std::log(3.0)}}) ==
          doctest::Approx(0.75).epsilon(1e-12));

    // sigma' <= 1/4 joint Lipschitz sampling check
    Rng rng(31);
    const double bt = 1.5, bx = 1.5;
    for (int i = 0; i < 1000; ++i) {
        const Vec x1{rng.uniform(-bx, bx)}, x2{rng.uniform(-bx, bx)};
        const ModelParams t1{{rng.uniform(-bt, bt)}}, t2{{rng.uniform(-bt, bt)}};
        const double dp = std::abs(soft_label(x1, t1) - soft_label(x2, t2));
        const double lip = 0.25 * std::max(bt, bx) * (dist2(x1, x2) +
                                                      dist2(t1.theta, t2.theta));
        CHECK(dp <= lip + 1e-12);
        CHECK(soft_label(x1, t1) > 0.0);
        CHECK(soft_label(x1, t1) < 1.0);
    }
}
