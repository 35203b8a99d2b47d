#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fmm/dataset.hpp"

namespace fmm::population {

// Deterministic FIFO breadth-first traversal from seed_user, neighbor order
// shuffled by rng_seed. Stops at budget nodes or component exhaustion.
std::vector<std::uint32_t> bfs_sample(const dataset::SocialGraph& graph,
                                      std::uint32_t seed_user,
                                      std::size_t budget,
                                      std::uint64_t rng_seed);

// `draws` independent draws with probability d(v)/D each, deduplicated into a
// sorted set. Throws when the graph has no edges.
std::vector<std::uint32_t> degree_weighted_sample(const dataset::SocialGraph& graph,
                                                  std::size_t draws,
                                                  std::uint64_t rng_seed);

struct SampleRun {
    std::vector<std::vector<std::uint32_t>> samples; // sorted unique node ids per sample
};

// r independent degree-weighted samples; per-sample RNG streams derive from
// (rng_seed, sample index) so draws are scheduling-independent.
SampleRun draw_samples(const dataset::SocialGraph& graph,
                       std::size_t r,
                       std::size_t sample_size,
                       std::uint64_t rng_seed);

struct PopulationEstimate {
    double n_hat = 0.0;
    std::size_t r = 0;
    std::size_t total_collisions = 0;   // summed over all sample pairs
    double mean_degree_sum = 0.0;       // E[D'] over samples
    double mean_inv_degree_sum = 0.0;   // E over samples of per-sample sum of 1/d
    double mean_pair_collisions = 0.0;  // E[I] over C(r,2) pairs
};

// Collision-counting size estimate:
//   n_hat = E[D'] * E[sum 1/d] / E[I]
// with E[D'], E[sum 1/d] empirical means over the r samples and E[I] the mean
// collision count over sample pairs. Throws DataError when no collisions
// occurred (estimate undefined; take more or larger samples).
PopulationEstimate estimate_population(const dataset::SocialGraph& graph, const SampleRun& run);

void write_estimate_csv(std::ostream& out, const PopulationEstimate& e,
                        const std::vector<std::size_t>& sample_sizes);

} // namespace fmm::population
