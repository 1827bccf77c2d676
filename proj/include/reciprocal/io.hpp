#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "reciprocal/engine.hpp"
#include "reciprocal/sample.hpp"

namespace reciprocal {

// fixed 17-significant-digit decimal rendering for all emitted reals
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Sample CSV: header `x_0,...,x_{d-1},y[,w]`; missing weights mean uniform.
inline WeightedSample read_sample_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_sample_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("read_sample_csv: empty file " + path);
    const auto header = split_csv_line(line);
    std::size_t d = 0;
    while (d < header.size() && header[d] == "x_" + std::to_string(d)) ++d;
    if (d == 0 || d >= header.size() || header[d] != "y")
        throw std::runtime_error("read_sample_csv: bad header in " + path);
    const bool has_w = header.size() == d + 2 && header[d + 1] == "w";
    if (!has_w && header.size() != d + 1)
        throw std::runtime_error("read_sample_csv: bad header in " + path);

    WeightedSample sample;
    std::vector<double> raw_weights;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("read_sample_csv: ragged row in " + path);
        LabeledPoint pt;
        pt.x.resize(d);
        for (std::size_t i = 0; i < d; ++i) pt.x[i] = std::stod(cells[i]);
        pt.y = std::stod(cells[d]);
        sample.points.push_back(std::move(pt));
        raw_weights.push_back(has_w ? std::stod(cells[d + 1]) : 1.0);
    }
    if (sample.points.empty())
        throw std::runtime_error("read_sample_csv: no data rows in " + path);
    double total = 0.0;
    for (double w : raw_weights) {
        if (w < 0.0) throw std::runtime_error("read_sample_csv: negative weight");
        total += w;
    }
    for (double& w : raw_weights) w /= total;
    sample.weights = std::move(raw_weights);
    sample.n_effective = static_cast<double>(sample.points.size());
    return sample;
}

inline void write_sample_csv(const WeightedSample& sample, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_sample_csv: cannot open " + path);
    const std::size_t d = sample.points.empty() ? 0 : sample.points.front().x.size();
    for (std::size_t i = 0; i < d; ++i) out << "x_" << i << ",";
    out << "y,w\n";
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        for (double v : sample.points[i].x) out << fmt17(v) << ",";
        out << fmt17(sample.points[i].y) << "," << fmt17(sample.weights[i]) << "\n";
    }
}

inline void write_trajectory_csv(const Trajectory& traj, std::size_t dim,
                                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
    out << "t,d_theta,w1_step,composite,risk,n";
    for (std::size_t i = 0; i < dim; ++i) out << ",selected_x_" << i;
    out << ",selected_y,removed_index,seed\n";
    for (std::size_t k = 0; k < traj.records.size(); ++k) {
        const auto& rec = traj.records[k];
        const auto& state = traj.states[k];
        out << rec.t << "," << fmt17(rec.d_theta) << "," << fmt17(rec.w1_step) << ","
            << fmt17(rec.composite) << "," << fmt17(rec.risk) << ","
            << (state.n ? std::to_string(*state.n)
                        : std::to_string(static_cast<long>(state.sample.n_effective)));
        const auto& sel = rec.step_log.selected;
        for (std::size_t i = 0; i < dim; ++i)
            out << "," << (i < sel.x.size() ? fmt17(sel.x[i]) : std::string(""));
        out << "," << fmt17(sel.y) << ",";
        if (rec.step_log.removed_index)
            out << *rec.step_log.removed_index;
        out << "," << traj.seed << "\n";
    }
}

}  // namespace reciprocal
