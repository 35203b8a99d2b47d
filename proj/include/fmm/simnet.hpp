#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fmm/geo.hpp"
#include "fmm/mobility.hpp"

namespace fmm::simnet {

struct SimConfig {
    double duration_s = 10000.0;
    double width = 2000.0;
    double height = 2000.0;
    double tick_s = 1.0;
    double radio_range_m = 250.0;
    int grid_rows = 10;
    int grid_cols = 10;
    std::uint64_t rng_seed = 1;
    // Contention sets are connected components of the within-range graph by
    // default; true restricts contention to direct pairs only.
    bool pairwise_contention = false;
};

void validate(const SimConfig& config);

struct CongestionGrid {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint64_t> backoffs;   // row-major
    std::vector<double> pause_seconds;

    std::uint64_t total_backoffs() const;
    double total_pause_seconds() const;
    std::uint64_t& backoff_at(int r, int c) { return backoffs[static_cast<std::size_t>(r) * cols + c]; }
    std::uint64_t backoff_at(int r, int c) const { return backoffs[static_cast<std::size_t>(r) * cols + c]; }
};

struct SimReport {
    SimConfig config;
    std::uint64_t total_backoffs = 0;
    std::vector<std::uint64_t> per_node_backoffs;
    CongestionGrid grid;
};

// Position along a trace at time t; linear interpolation between waypoints,
// stationary before the first and after the last waypoint.
geo::FieldPoint position_at(const std::vector<mobility::Waypoint>& trace, double t);

// Tick-stepped contention model: per tick, one winner per contention set,
// every other member registers a backoff and tick_s of pause attributed to
// its own grid cell. OpenMP-parallel over ticks; the per-tick RNG stream is
// derived from (seed, tick) so results match the serial reference exactly.
SimReport run_simulation(std::span<const std::vector<mobility::Waypoint>> traces,
                         const SimConfig& config);

// Serial reference implementation, kept for testing and benchmarking.
SimReport run_simulation_serial(std::span<const std::vector<mobility::Waypoint>> traces,
                                const SimConfig& config);

struct Comparison {
    SimReport first;
    SimReport second;
    double backoff_ratio = 0.0; // first / second
};

Comparison compare_models(std::span<const std::vector<mobility::Waypoint>> first_traces,
                          std::span<const std::vector<mobility::Waypoint>> second_traces,
                          const SimConfig& config);

// CSV: row,col,backoffs,pause_seconds in row-major order.
void grid_heatmap_csv(std::ostream& out, const CongestionGrid& grid);

void write_report_csv(std::ostream& out, const SimReport& report);

} // namespace fmm::simnet
