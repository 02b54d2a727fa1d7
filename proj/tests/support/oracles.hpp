#pragma once

// Reference computations written independently of the library: plain arrays,
// no Eigen, brute force where the library is clever.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

using P3 = std::array<double, 3>;

// Sensor to environment: rotate about x by -tilt, then shift.
inline P3 sensor_to_env(const P3& p, double tilt, double height, double depth, double lateral) {
    const double c = std::cos(tilt), s = std::sin(tilt);
    const double m[3][3] = {{1, 0, 0}, {0, c, s}, {0, -s, c}};
    P3 out{};
    for (int r = 0; r < 3; ++r) out[r] = m[r][0] * p[0] + m[r][1] * p[1] + m[r][2] * p[2];
    out[0] += lateral;
    out[1] += height;
    out[2] += depth;
    return out;
}

inline double dist(const P3& a, const P3& b) {
    return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

struct Grid {
    double width = 4.4, height = 2.5;
    int rows = 3, cols = 3;
};

// Scans every cell's rectangle. Row 1 is the top row.
inline std::optional<int> cell_by_scan(double x, double y, const Grid& g) {
    const double cw = g.width / g.cols, ch = g.height / g.rows;
    for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) {
            const double x0 = -g.width / 2 + c * cw, x1 = x0 + cw;
            const double y1 = g.height - r * ch, y0 = y1 - ch;
            if (x >= x0 && x <= x1 && y >= y0 && y <= y1) return r * g.cols + c + 1;
        }
    }
    return std::nullopt;
}

// Distance from (x, y) to the nearest grid line or screen edge.
inline double boundary_distance(double x, double y, const Grid& g) {
    double d = 1e300;
    for (int c = 0; c <= g.cols; ++c) d = std::min(d, std::abs(x - (-g.width / 2 + c * g.width / g.cols)));
    for (int r = 0; r <= g.rows; ++r) d = std::min(d, std::abs(y - r * g.height / g.rows));
    return d;
}

// Marches from the shoulder along the arm direction in small steps until the
// point crosses z = 0, then refines the bracket by a second dense pass.
inline std::optional<std::pair<double, double>> dense_ray_hit(const P3& shoulder, const P3& hand,
                                                                double max_length = 50.0) {
    const P3 d{hand[0] - shoulder[0], hand[1] - shoulder[1], hand[2] - shoulder[2]};
    const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    auto at = [&](double s) {
        return P3{shoulder[0] + s * d[0] / len, shoulder[1] + s * d[1] / len, shoulder[2] + s * d[2] / len};
    };
    const int coarse = 100000;
    const double step = max_length / coarse;
    for (int i = 1; i <= coarse; ++i) {
        if (at(i * step)[2] > 0.0) continue;
        double lo = (i - 1) * step;
        const int fine = 100000;
        const double fstep = step / fine;
        for (int k = 1; k <= fine; ++k) {
            if (at(lo + k * fstep)[2] <= 0.0) {
                const P3 p = at(lo + k * fstep);
                return std::pair{p[0], p[1]};
            }
        }
        const P3 p = at(i * step);
        return std::pair{p[0], p[1]};
    }
    return std::nullopt;
}

struct TimedHit {
    std::int64_t t;
    std::optional<int> cell;
};

// Share of hits per cell among samples in [newest - window, newest].
inline std::map<int, double> frequency_count(const std::vector<TimedHit>& samples, std::int64_t window) {
    std::map<int, double> out;
    if (samples.empty()) return out;
    std::int64_t newest = samples.front().t;
    for (const auto& s : samples) newest = std::max(newest, s.t);
    int counts[64] = {};
    int total = 0;
    for (const auto& s : samples) {
        if (s.t < newest - window || !s.cell) continue;
        ++counts[*s.cell];
        ++total;
    }
    for (int c = 0; c < 64; ++c) {
        if (counts[c]) out[c] = static_cast<double>(counts[c]) / total;
    }
    return out;
}

// Largest probability; ties go to the lowest id.
inline std::optional<std::pair<int, double>> argmax(const std::map<int, double>& probs) {
    std::optional<std::pair<int, double>> best;
    for (int id = 1; id <= 63; ++id) {
        auto it = probs.find(id);
        if (it == probs.end()) continue;
        if (!best || it->second > best->second) best = {id, it->second};
    }
    return best;
}

// Row-major cell of an ordinal, and the reverse.
inline std::pair<int, int> ordinal_to_row_col(int n, int cols = 3) { return {(n - 1) / cols + 1, (n - 1) % cols + 1}; }

}  // namespace oracle
