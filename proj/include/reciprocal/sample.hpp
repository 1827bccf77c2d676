#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "reciprocal/rng.hpp"
#include "reciprocal/vec.hpp"

namespace reciprocal {

struct LabeledPoint {
    Vec x;
    double y = 0.0;  // soft label in [0,1]

    bool operator==(const LabeledPoint& other) const {
        return x == other.x && y == other.y;
    }
};

// Ground metric on joint (x, y) atoms: ||x - x'||_2 + label_scale * |y - y'|.
struct GroundMetric {
    double label_scale = 1.0;

    double operator()(const LabeledPoint& a, const LabeledPoint& b) const {
        return dist2(a.x, b.x) + label_scale * std::abs(a.y - b.y);
    }
};

// Weighted empirical distribution over labeled points. Weights sum to 1.
struct WeightedSample {
    std::vector<LabeledPoint> points;
    std::vector<double> weights;
    double n_effective = 0.0;  // mass denominator used by the size-counting updates

    std::size_t size() const { return points.size(); }

    void check_normalized(double tol = 1e-9) const {
        if (points.size() != weights.size())
            throw std::invalid_argument("sample: points/weights size mismatch");
        double s = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw std::invalid_argument("sample: negative weight");
            s += w;
        }
        if (std::abs(s - 1.0) > tol)
            throw std::invalid_argument("sample: weights do not sum to 1");
    }

    bool is_uniform_atomic(double tol = 1e-9) const {
        if (points.empty()) return false;
        const double w0 = 1.0 / static_cast<double>(points.size());
        for (double w : weights)
            if (std::abs(w - w0) > tol) return false;
        return true;
    }

    Vec mean_x() const {
        if (points.empty()) throw std::invalid_argument("sample: empty");
        Vec m(points.front().x.size(), 0.0);
        for (std::size_t i = 0; i < points.size(); ++i) axpy(weights[i], points[i].x, m);
        return m;
    }
};

inline WeightedSample uniform_sample(std::vector<LabeledPoint> points) {
    if (points.empty()) throw std::invalid_argument("uniform_sample: empty");
    WeightedSample s;
    const double w = 1.0 / static_cast<double>(points.size());
    s.weights.assign(points.size(), w);
    s.n_effective = static_cast<double>(points.size());
    s.points = std::move(points);
    return s;
}

// Append a point, merging into an existing atom on exact (x, y) equality.
inline void append_atom(WeightedSample& sample, const LabeledPoint& pt, double weight) {
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        if (sample.points[i] == pt) {
            sample.weights[i] += weight;
            return;
        }
    }
    sample.points.push_back(pt);
    sample.weights.push_back(weight);
}

// Drop atoms whose weight fell below the prune threshold (W1-negligible mass).
inline void prune_atoms(WeightedSample& sample, double threshold = 1e-15) {
    std::vector<LabeledPoint> pts;
    std::vector<double> ws;
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        if (sample.weights[i] >= threshold) {
            pts.push_back(sample.points[i]);
            ws.push_back(sample.weights[i]);
        }
    }
    sample.points = std::move(pts);
    sample.weights = std::move(ws);
}

// Greedy update: old mass scaled by n/(n+1), the new point enters at 1/(n+1).
inline WeightedSample add_point_greedy(const WeightedSample& sample,
                                       const LabeledPoint& pt, long n) {
    if (n <= 0) throw std::invalid_argument("add_point_greedy: n must be positive");
    sample.check_normalized();
    const double dn = static_cast<double>(n);
    WeightedSample out;
    out.points = sample.points;
    out.weights = sample.weights;
    for (double& w : out.weights) w *= dn / (dn + 1.0);
    append_atom(out, pt, 1.0 / (dn + 1.0));
    out.n_effective = sample.n_effective + 1.0;
    return out;
}

// Non-greedy update on a uniform-atomic sample: replace one atom, size fixed.
inline WeightedSample swap_point_nongreedy(const WeightedSample& sample,
                                           const LabeledPoint& add,
                                           std::size_t removed_index) {
    sample.check_normalized();
    if (removed_index >= sample.points.size())
        throw std::out_of_range("swap_point_nongreedy: removed_index out of range");
    if (!sample.is_uniform_atomic())
        throw std::invalid_argument("swap_point_nongreedy: sample is not uniform-atomic");
    WeightedSample out = sample;
    out.points[removed_index] = add;
    return out;
}

enum class RemovalMode { uniform_random, nearest_to_mean };

inline std::size_t removal_select(const WeightedSample& sample, RemovalMode mode,
                                  Rng& rng) {
    if (sample.points.empty()) throw std::invalid_argument("removal_select: empty sample");
    if (mode == RemovalMode::uniform_random) return rng.categorical(sample.weights);
    const Vec mean = sample.mean_x();
    std::size_t best = 0;
    double best_d = dist2(sample.points[0].x, mean);
    for (std::size_t i = 1; i < sample.points.size(); ++i) {
        const double d = dist2(sample.points[i].x, mean);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace reciprocal
