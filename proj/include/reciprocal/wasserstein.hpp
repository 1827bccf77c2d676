#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "reciprocal/sample.hpp"

namespace reciprocal {

namespace detail {

// Successive shortest augmenting paths with node potentials on the bipartite
// transportation graph. Exact up to floating-point rounding.
inline double transport_min_cost(const std::vector<double>& supply,
                                 const std::vector<double>& demand,
                                 const std::vector<std::vector<double>>& cost) {
    const std::size_t m = supply.size();
    const std::size_t k = demand.size();
    const std::size_t n_nodes = m + k;
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> rs = supply;           // remaining supply
    std::vector<double> rd = demand;           // remaining demand
    std::vector<std::vector<double>> flow(m, std::vector<double>(k, 0.0));
    std::vector<double> pot(n_nodes, 0.0);     // node potentials

    const double mass_eps = 1e-14;
    double remaining = 0.0;
    for (double s : rs) remaining += s;

    const std::size_t max_rounds = 4 * n_nodes * n_nodes + 64;
    std::size_t rounds = 0;
    while (remaining > mass_eps) {
        if (++rounds > max_rounds)
            throw std::runtime_error("transport_min_cost: augmentation cap exceeded");

        // Dijkstra over reduced costs from all sources with remaining supply
        std::vector<double> dist(n_nodes, inf);
        std::vector<int> prev(n_nodes, -1);  // predecessor node
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
        for (std::size_t i = 0; i < m; ++i) {
            if (rs[i] > mass_eps) {
                dist[i] = 0.0;
                pq.push({0.0, i});
            }
        }
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > dist[u] + 1e-18) continue;
            if (u < m) {
                for (std::size_t j = 0; j < k; ++j) {
                    const double rc =
                        std::max(0.0, cost[u][j] + pot[u] - pot[m + j]);
                    if (d + rc < dist[m + j] - 1e-18) {
                        dist[m + j] = d + rc;
                        prev[m + j] = static_cast<int>(u);
                        pq.push({dist[m + j], m + j});
                    }
                }
            } else {
                const std::size_t j = u - m;
                for (std::size_t i = 0; i < m; ++i) {
                    if (flow[i][j] > mass_eps) {
                        const double rc =
                            std::max(0.0, -cost[i][j] + pot[u] - pot[i]);
                        if (d + rc < dist[i] - 1e-18) {
                            dist[i] = d + rc;
                            prev[i] = static_cast<int>(u);
                            pq.push({dist[i], i});
                        }
                    }
                }
            }
        }

        // cheapest reachable sink with remaining demand
        int best_sink = -1;
        for (std::size_t j = 0; j < k; ++j) {
            if (rd[j] > mass_eps && dist[m + j] < inf) {
                if (best_sink < 0 || dist[m + j] < dist[m + best_sink])
                    best_sink = static_cast<int>(j);
            }
        }
        if (best_sink < 0)
            throw std::runtime_error("transport_min_cost: no augmenting path");

        // walk the path back, find the bottleneck
        std::vector<std::size_t> path;
        std::size_t node = m + static_cast<std::size_t>(best_sink);
        path.push_back(node);
        while (prev[node] >= 0) {
            node = static_cast<std::size_t>(prev[node]);
            path.push_back(node);
        }
        std::reverse(path.begin(), path.end());

        double push = std::min(rs[path.front()], rd[best_sink]);
        for (std::size_t p = 0; p + 1 < path.size(); ++p) {
            if (path[p] >= m)  // backward arc sink -> source
                push = std::min(push, flow[path[p + 1]][path[p] - m]);
        }

        for (std::size_t p = 0; p + 1 < path.size(); ++p) {
            if (path[p] < m)
                flow[path[p]][path[p + 1] - m] += push;
            else
                flow[path[p + 1]][path[p] - m] -= push;
        }
        rs[path.front()] -= push;
        rd[best_sink] -= push;
        remaining -= push;

        for (std::size_t u = 0; u < n_nodes; ++u)
            if (dist[u] < inf) pot[u] += dist[u];
    }

    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) total += flow[i][j] * cost[i][j];
    return total;
}

// Two-phase dense tableau simplex with Bland's rule for min c.x, Ax=b, x>=0.
// Used only by the brute-force oracle; independent of the flow solver above.
inline double dense_lp_min(std::vector<std::vector<double>> a, std::vector<double> b,
                           std::vector<double> c) {
    const std::size_t rows = a.size();
    const std::size_t cols = c.size();
    for (std::size_t r = 0; r < rows; ++r) {
        if (b[r] < 0.0) {
            for (double& v : a[r]) v = -v;
            b[r] = -b[r];
        }
    }
    // tableau: cols structural + rows artificial + rhs
    const std::size_t width = cols + rows + 1;
    std::vector<std::vector<double>> tab(rows + 2, std::vector<double>(width, 0.0));
    std::vector<std::size_t> basis(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < cols; ++j) tab[r][j] = a[r][j];
        tab[r][cols + r] = 1.0;
        tab[r][width - 1] = b[r];
        basis[r] = cols + r;
    }
    // row rows: phase-2 objective; row rows+1: phase-1 objective
    for (std::size_t j = 0; j < cols; ++j) tab[rows][j] = c[j];
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < width; ++j)
            if (j < cols || j == width - 1) tab[rows + 1][j] -= tab[r][j];

    auto pivot = [&](std::size_t pr, std::size_t pc) {
        const double pv = tab[pr][pc];
        for (double& v : tab[pr]) v /= pv;
        for (std::size_t r = 0; r < rows + 2; ++r) {
            if (r == pr) continue;
            const double f = tab[r][pc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width; ++j) tab[r][j] -= f * tab[pr][j];
        }
        basis[pr] = pc;
    };

    auto run_phase = [&](std::size_t obj_row, std::size_t usable_cols) {
        for (std::size_t iter = 0; iter < 100000; ++iter) {
            // Bland: lowest-index entering column with negative reduced cost
            std::size_t enter = usable_cols;
            for (std::size_t j = 0; j < usable_cols; ++j) {
                if (tab[obj_row][j] < -1e-11) {
                    enter = j;
                    break;
                }
            }
            if (enter == usable_cols) return;
            std::size_t leave = rows;
            double best_ratio = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                if (tab[r][enter] > 1e-11) {
                    const double ratio = tab[r][width - 1] / tab[r][enter];
                    if (leave == rows || ratio < best_ratio - 1e-14 ||
                        (std::abs(ratio - best_ratio) <= 1e-14 &&
                         basis[r] < basis[leave])) {
                        leave = r;
                        best_ratio = ratio;
                    }
                }
            }
            if (leave == rows) throw std::runtime_error("dense_lp_min: unbounded");
            pivot(leave, enter);
        }
        throw std::runtime_error("dense_lp_min: iteration cap exceeded");
    };

    run_phase(rows + 1, cols + rows);
    if (std::abs(tab[rows + 1][width - 1]) > 1e-8)
        throw std::runtime_error("dense_lp_min: infeasible");
    // drive remaining artificials out of the basis where possible
    for (std::size_t r = 0; r < rows; ++r) {
        if (basis[r] >= cols) {
            for (std::size_t j = 0; j < cols; ++j) {
                if (std::abs(tab[r][j]) > 1e-9) {
                    pivot(r, j);
                    break;
                }
            }
        }
    }
    run_phase(rows, cols);
    return -tab[rows][width - 1];  // objective row rhs holds -z
}

}  // namespace detail

// Exact Wasserstein-1 distance between weighted atom samples.
inline double wasserstein1(const WeightedSample& a, const WeightedSample& b,
                           const GroundMetric& metric = {}) {
    a.check_normalized();
    b.check_normalized();
    std::vector<std::vector<double>> cost(a.size(), std::vector<double>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            cost[i][j] = metric(a.points[i], b.points[j]);
    return detail::transport_min_cost(a.weights, b.weights, cost);
}

// Independent oracle: the same transportation problem solved as a dense LP.
// Restricted to tiny instances; test use only.
inline double wasserstein1_bruteforce(const WeightedSample& a, const WeightedSample& b,
                                      const GroundMetric& metric = {}) {
    if (a.size() > 6 || b.size() > 6)
        throw std::invalid_argument("wasserstein1_bruteforce: more than 6 atoms");
    a.check_normalized();
    b.check_normalized();
    const std::size_t m = a.size();
    const std::size_t k = b.size();
    // variables f_ij, row-major; marginal constraints (last demand row dropped)
    const std::size_t cols = m * k;
    const std::size_t rows = m + k - 1;
    std::vector<std::vector<double>> amat(rows, std::vector<double>(cols, 0.0));
    std::vector<double> rhs(rows, 0.0);
    std::vector<double> cvec(cols, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        rhs[i] = a.weights[i];
        for (std::size_t j = 0; j < k; ++j) {
            amat[i][i * k + j] = 1.0;
            cvec[i * k + j] = metric(a.points[i], b.points[j]);
        }
    }
    for (std::size_t j = 0; j + 1 < k; ++j) {
        rhs[m + j] = b.weights[j];
        for (std::size_t i = 0; i < m; ++i) amat[m + j][i * k + j] = 1.0;
    }
    return detail::dense_lp_min(std::move(amat), std::move(rhs), std::move(cvec));
}

}  // namespace reciprocal
