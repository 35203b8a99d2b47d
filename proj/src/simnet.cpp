#include "fmm/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "fmm/common.hpp"
#include "fmm/rng.hpp"

namespace fmm::simnet {

void validate(const SimConfig& c) {
    if (!(c.duration_s > 0.0) || !(c.tick_s > 0.0) || c.tick_s > c.duration_s) {
        throw std::invalid_argument("SimConfig: need 0 < tick <= duration");
    }
    if (!(c.radio_range_m > 0.0)) {
        throw std::invalid_argument("SimConfig: radio range must be positive");
    }
    if (c.grid_rows < 1 || c.grid_cols < 1) {
        throw std::invalid_argument("SimConfig: grid dimensions must be >= 1");
    }
    if (!(c.width > 0.0) || !(c.height > 0.0)) {
        throw std::invalid_argument("SimConfig: field dimensions must be positive");
    }
}

std::uint64_t CongestionGrid::total_backoffs() const {
    return std::accumulate(backoffs.begin(), backoffs.end(), std::uint64_t{0});
}

double CongestionGrid::total_pause_seconds() const {
    return std::accumulate(pause_seconds.begin(), pause_seconds.end(), 0.0);
}

geo::FieldPoint position_at(const std::vector<mobility::Waypoint>& trace, double t) {
    if (trace.empty()) throw ContractError("position_at: empty trace");
    if (t <= trace.front().t) return trace.front().pos;
    if (t >= trace.back().t) return trace.back().pos;
    auto it = std::upper_bound(trace.begin(), trace.end(), t,
                               [](double v, const mobility::Waypoint& w) { return v < w.t; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double span = b.t - a.t;
    if (span <= 0.0) return a.pos;
    const double f = (t - a.t) / span;
    return {a.pos.x + f * (b.pos.x - a.pos.x), a.pos.y + f * (b.pos.y - a.pos.y)};
}

namespace {

struct TickAccum {
    std::uint64_t total_backoffs = 0;
    std::vector<std::uint64_t> per_node;
    std::vector<std::uint64_t> grid_backoffs;
    std::vector<double> grid_pause;

    TickAccum(std::size_t nodes, std::size_t cells)
        : per_node(nodes, 0), grid_backoffs(cells, 0), grid_pause(cells, 0.0) {}

    void merge(const TickAccum& other) {
        total_backoffs += other.total_backoffs;
        for (std::size_t i = 0; i < per_node.size(); ++i) per_node[i] += other.per_node[i];
        for (std::size_t i = 0; i < grid_backoffs.size(); ++i) {
            grid_backoffs[i] += other.grid_backoffs[i];
            grid_pause[i] += other.grid_pause[i];
        }
    }
};

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

std::size_t cell_of(const geo::FieldPoint& p, const SimConfig& c) {
    int col = static_cast<int>(p.x / c.width * c.grid_cols);
    int row = static_cast<int>(p.y / c.height * c.grid_rows);
    col = std::clamp(col, 0, c.grid_cols - 1);
    row = std::clamp(row, 0, c.grid_rows - 1);
    return static_cast<std::size_t>(row) * c.grid_cols + col;
}

// One tick of the contention model; shared by the serial and parallel drivers.
void simulate_tick(std::span<const std::vector<mobility::Waypoint>> traces,
                   const SimConfig& config,
                   std::uint64_t tick_index,
                   std::vector<geo::FieldPoint>& positions,
                   TickAccum& accum) {
    const auto n = traces.size();
    const double t = static_cast<double>(tick_index) * config.tick_s;
    for (std::size_t i = 0; i < n; ++i) positions[i] = position_at(traces[i], t);

    const double range2 = config.radio_range_m * config.radio_range_m;
    Rng rng(derive_seed(config.rng_seed, tick_index));

    auto lose = [&](std::size_t node) {
        ++accum.total_backoffs;
        ++accum.per_node[node];
        const auto cell = cell_of(positions[node], config);
        ++accum.grid_backoffs[cell];
        accum.grid_pause[cell] += config.tick_s;
    };

    auto in_range = [&](std::size_t i, std::size_t j) {
        const double dx = positions[i].x - positions[j].x;
        const double dy = positions[i].y - positions[j].y;
        return dx * dx + dy * dy <= range2;
    };

    if (config.pairwise_contention) {
        // Sensitivity-analysis mode: each in-range pair contends independently.
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!in_range(i, j)) continue;
                lose(rng.index(2) == 0 ? j : i);
            }
        }
        return;
    }

    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (in_range(i, j)) uf.unite(static_cast<int>(i), static_cast<int>(j));
        }
    }
    // Components keyed by smallest member; iteration order is ascending so
    // RNG consumption is identical regardless of scheduling.
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) {
        members[static_cast<std::size_t>(uf.find(static_cast<int>(i)))].push_back(i);
    }
    for (std::size_t root = 0; root < n; ++root) {
        const auto& set = members[root];
        if (set.size() < 2) continue;
        const std::size_t winner = set[rng.index(set.size())];
        for (const auto node : set) {
            if (node != winner) lose(node);
        }
    }
}

void check_traces(std::span<const std::vector<mobility::Waypoint>> traces,
                  const SimConfig& config) {
    if (traces.empty()) throw std::invalid_argument("run_simulation: no traces");
    for (std::size_t i = 0; i < traces.size(); ++i) {
        if (traces[i].empty()) {
            throw ContractError("node " + std::to_string(i) + " has an empty trace");
        }
        if (traces[i].back().t < config.duration_s &&
            traces[i].size() > 1) {
            throw ContractError("node " + std::to_string(i) + " trace ends at t=" +
                                std::to_string(traces[i].back().t) + " before duration " +
                                std::to_string(config.duration_s));
        }
        // Legs are straight lines, so checking the waypoints bounds every
        // interpolated position. Must happen here: exceptions cannot cross
        // the OpenMP region in run_simulation.
        for (const auto& w : traces[i]) {
            if (w.pos.x < -1e-9 || w.pos.x > config.width + 1e-9 ||
                w.pos.y < -1e-9 || w.pos.y > config.height + 1e-9) {
                throw ContractError("node " + std::to_string(i) + " outside field at t=" +
                                    std::to_string(w.t));
            }
        }
    }
}

SimReport make_report(const SimConfig& config, std::size_t nodes, const TickAccum& accum) {
    SimReport report;
    report.config = config;
    report.total_backoffs = accum.total_backoffs;
    report.per_node_backoffs = accum.per_node;
    report.grid.rows = config.grid_rows;
    report.grid.cols = config.grid_cols;
    report.grid.backoffs = accum.grid_backoffs;
    report.grid.pause_seconds = accum.grid_pause;
    (void)nodes;
    return report;
}

} // namespace

SimReport run_simulation_serial(std::span<const std::vector<mobility::Waypoint>> traces,
                                const SimConfig& config) {
    validate(config);
    check_traces(traces, config);
    const auto n = traces.size();
    const auto cells = static_cast<std::size_t>(config.grid_rows) * config.grid_cols;
    const auto ticks = static_cast<std::uint64_t>(config.duration_s / config.tick_s);

    TickAccum accum(n, cells);
    std::vector<geo::FieldPoint> positions(n);
    for (std::uint64_t tick = 0; tick < ticks; ++tick) {
        simulate_tick(traces, config, tick, positions, accum);
    }
    return make_report(config, n, accum);
}

SimReport run_simulation(std::span<const std::vector<mobility::Waypoint>> traces,
                         const SimConfig& config) {
    validate(config);
    check_traces(traces, config);
    const auto n = traces.size();
    const auto cells = static_cast<std::size_t>(config.grid_rows) * config.grid_cols;
    const auto ticks = static_cast<std::int64_t>(config.duration_s / config.tick_s);

    TickAccum accum(n, cells);
#pragma omp parallel
    {
        TickAccum local(n, cells);
        std::vector<geo::FieldPoint> positions(n);
#pragma omp for schedule(static) nowait
        for (std::int64_t tick = 0; tick < ticks; ++tick) {
            simulate_tick(traces, config, static_cast<std::uint64_t>(tick), positions, local);
        }
#pragma omp critical
        accum.merge(local);
    }
    return make_report(config, n, accum);
}

Comparison compare_models(std::span<const std::vector<mobility::Waypoint>> first_traces,
                          std::span<const std::vector<mobility::Waypoint>> second_traces,
                          const SimConfig& config) {
    Comparison cmp;
    cmp.first = run_simulation(first_traces, config);
    cmp.second = run_simulation(second_traces, config);
    cmp.backoff_ratio = cmp.second.total_backoffs == 0
                            ? std::numeric_limits<double>::infinity()
                            : static_cast<double>(cmp.first.total_backoffs) /
                                  static_cast<double>(cmp.second.total_backoffs);
    if (cmp.first.total_backoffs == 0 && cmp.second.total_backoffs == 0) {
        cmp.backoff_ratio = 1.0;
    }
    return cmp;
}

void grid_heatmap_csv(std::ostream& out, const CongestionGrid& grid) {
    out << "row,col,backoffs,pause_seconds\n";
    char buf[128];
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const auto idx = static_cast<std::size_t>(r) * grid.cols + c;
            std::snprintf(buf, sizeof(buf), "%d,%d,%llu,%.6f\n", r, c,
                          static_cast<unsigned long long>(grid.backoffs[idx]),
                          grid.pause_seconds[idx]);
            out << buf;
        }
    }
}

void write_report_csv(std::ostream& out, const SimReport& report) {
    out << "metric,value\n";
    out << "total_backoffs," << report.total_backoffs << '\n';
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", report.grid.total_pause_seconds());
    out << "total_pause_seconds," << buf << '\n';
    for (std::size_t i = 0; i < report.per_node_backoffs.size(); ++i) {
        out << "node_" << i << "_backoffs," << report.per_node_backoffs[i] << '\n';
    }
}

} // namespace fmm::simnet
