#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace reciprocal {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double dist2(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dist2: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline Vec scaled(const Vec& a, double c) {
    Vec out(a);
    for (double& v : out) v *= c;
    return out;
}

inline Vec added(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("added: dimension mismatch");
    Vec out(a);
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

inline Vec subtracted(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("subtracted: dimension mismatch");
    Vec out(a);
    for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
    return out;
}

// y += c * x
inline void axpy(double c, const Vec& x, Vec& y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

}  // namespace reciprocal
