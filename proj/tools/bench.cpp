// fmm_bench: times the OpenMP kernels against their serial references.

#include <chrono>
#include <cstdio>
#include <vector>

#include "fmm/dataset.hpp"
#include "fmm/mobility.hpp"
#include "fmm/rng.hpp"
#include "fmm/simnet.hpp"
#include "fmm/social.hpp"

using namespace fmm;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void bench_simulation() {
    const std::size_t nodes = 40;
    mobility::RwpConfig cfg;
    cfg.min_speed = 1.0;
    cfg.max_speed = 5.0;
    cfg.duration_s = 20000.0;
    std::vector<std::vector<mobility::Waypoint>> traces;
    for (std::size_t i = 0; i < nodes; ++i) {
        traces.push_back(mobility::generate_rwp_trace(cfg, derive_seed(42, i)));
    }
    simnet::SimConfig sim;
    sim.duration_s = cfg.duration_s;
    sim.radio_range_m = 400.0;

    auto t0 = Clock::now();
    const auto serial = simnet::run_simulation_serial(traces, sim);
    const double serial_s = seconds_since(t0);

    t0 = Clock::now();
    const auto parallel = simnet::run_simulation(traces, sim);
    const double parallel_s = seconds_since(t0);

    std::printf("contention simulation (%zu nodes, %.0f ticks):\n", nodes,
                sim.duration_s / sim.tick_s);
    std::printf("  serial   %.3f s (%llu backoffs)\n", serial_s,
                static_cast<unsigned long long>(serial.total_backoffs));
    std::printf("  parallel %.3f s (%llu backoffs)  speedup %.2fx  results %s\n", parallel_s,
                static_cast<unsigned long long>(parallel.total_backoffs),
                serial_s / parallel_s,
                parallel.total_backoffs == serial.total_backoffs &&
                        parallel.per_node_backoffs == serial.per_node_backoffs
                    ? "identical"
                    : "DIVERGED");
}

void bench_pair_distances() {
    dataset::SocialGraph g;
    Rng rng(7);
    const std::uint32_t users = 400;
    for (std::uint32_t u = 0; u < users; ++u) {
        g.add_user("u" + std::to_string(u));
        for (int c = 0; c < 150; ++c) {
            dataset::Checkin ck;
            ck.timestamp = c;
            ck.point = {rng.uniform(-60.0, 60.0), rng.uniform(-180.0, 180.0)};
            g.add_checkin(u, ck);
        }
    }
    g.sort_checkins();
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (std::uint32_t i = 0; i < users; ++i) {
        for (std::uint32_t j = i + 1; j < users; j += 7) pairs.emplace_back(i, j);
    }

    auto t0 = Clock::now();
    const auto serial = social::pairwise_avg_distances_serial(g, pairs);
    const double serial_s = seconds_since(t0);

    t0 = Clock::now();
    const auto parallel = social::pairwise_avg_distances(g, pairs);
    const double parallel_s = seconds_since(t0);

    std::printf("pairwise average distances (%zu pairs, 150 checkins each):\n", pairs.size());
    std::printf("  serial   %.3f s\n", serial_s);
    std::printf("  parallel %.3f s  speedup %.2fx  results %s\n", parallel_s,
                serial_s / parallel_s, parallel == serial ? "identical" : "DIVERGED");
}

} // namespace

int main() {
    bench_simulation();
    bench_pair_distances();
    return 0;
}
