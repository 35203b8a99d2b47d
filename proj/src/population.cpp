#include "fmm/population.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <ostream>
#include <stdexcept>

#include "fmm/common.hpp"
#include "fmm/rng.hpp"

namespace fmm::population {

std::vector<std::uint32_t> bfs_sample(const dataset::SocialGraph& graph,
                                      std::uint32_t seed_user,
                                      std::size_t budget,
                                      std::uint64_t rng_seed) {
    if (seed_user >= graph.user_count()) {
        throw DataError("bfs_sample: unknown seed user index " + std::to_string(seed_user));
    }
    if (budget < 1) throw std::invalid_argument("bfs_sample: budget must be >= 1");

    std::vector<std::uint32_t> order;
    std::vector<bool> seen(graph.user_count(), false);
    std::deque<std::uint32_t> queue;
    queue.push_back(seed_user);
    seen[seed_user] = true;
    while (!queue.empty() && order.size() < budget) {
        const auto u = queue.front();
        queue.pop_front();
        order.push_back(u);

        auto nbrs = graph.neighbors(u); // copy, then shuffle deterministically
        Rng rng(derive_seed(rng_seed, u));
        for (std::size_t i = nbrs.size(); i > 1; --i) {
            std::swap(nbrs[i - 1], nbrs[rng.index(i)]);
        }
        for (const auto v : nbrs) {
            if (!seen[v]) {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    return order;
}

namespace {

// Cumulative degree table for proportional-to-degree draws.
std::vector<std::uint64_t> degree_cumsum(const dataset::SocialGraph& graph) {
    std::vector<std::uint64_t> cum(graph.user_count());
    std::uint64_t total = 0;
    for (std::uint32_t u = 0; u < graph.user_count(); ++u) {
        total += graph.degree(u);
        cum[u] = total;
    }
    return cum;
}

std::vector<std::uint32_t> draw_one_sample(const std::vector<std::uint64_t>& cum,
                                           std::size_t draws,
                                           std::uint64_t seed) {
    const std::uint64_t total = cum.back();
    Rng rng(seed);
    std::vector<std::uint32_t> sample;
    sample.reserve(draws);
    for (std::size_t i = 0; i < draws; ++i) {
        const std::uint64_t ticket = rng.below(total);
        const auto it = std::upper_bound(cum.begin(), cum.end(), ticket);
        sample.push_back(static_cast<std::uint32_t>(it - cum.begin()));
    }
    std::sort(sample.begin(), sample.end());
    sample.erase(std::unique(sample.begin(), sample.end()), sample.end());
    return sample;
}

} // namespace

std::vector<std::uint32_t> degree_weighted_sample(const dataset::SocialGraph& graph,
                                                  std::size_t draws,
                                                  std::uint64_t rng_seed) {
    if (draws < 1) throw std::invalid_argument("degree_weighted_sample: sample size must be >= 1");
    const auto cum = degree_cumsum(graph);
    if (cum.empty() || cum.back() == 0) {
        throw DataError("degree_weighted_sample: graph has no edges");
    }
    return draw_one_sample(cum, draws, rng_seed);
}

SampleRun draw_samples(const dataset::SocialGraph& graph,
                       std::size_t r,
                       std::size_t sample_size,
                       std::uint64_t rng_seed) {
    if (r < 2) throw std::invalid_argument("draw_samples: need r >= 2 samples");
    if (sample_size < 1) throw std::invalid_argument("draw_samples: sample size must be >= 1");
    const auto cum = degree_cumsum(graph);
    if (cum.empty() || cum.back() == 0) {
        throw DataError("draw_samples: graph has no edges");
    }

    SampleRun run;
    run.samples.resize(r);
#pragma omp parallel for schedule(static)
    for (long long s = 0; s < static_cast<long long>(r); ++s) {
        run.samples[s] = draw_one_sample(cum, sample_size, derive_seed(rng_seed, s));
    }
    return run;
}

namespace {

std::size_t intersection_size(const std::vector<std::uint32_t>& a,
                              const std::vector<std::uint32_t>& b) {
    std::size_t count = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++count;
            ++ia;
            ++ib;
        }
    }
    return count;
}

} // namespace

PopulationEstimate estimate_population(const dataset::SocialGraph& graph, const SampleRun& run) {
    const std::size_t r = run.samples.size();
    if (r < 2) throw std::invalid_argument("estimate_population: need r >= 2 samples");
    for (const auto& s : run.samples) {
        for (const auto v : s) {
            if (v >= graph.user_count()) {
                throw DataError("estimate_population: sample references unknown node");
            }
        }
    }

    PopulationEstimate est;
    est.r = r;

    double sum_dprime = 0.0;
    double sum_inv = 0.0;
    for (const auto& s : run.samples) {
        double dprime = 0.0;
        double inv = 0.0;
        for (const auto v : s) {
            const auto d = static_cast<double>(graph.degree(v));
            dprime += d;
            if (d > 0.0) inv += 1.0 / d;
        }
        sum_dprime += dprime;
        sum_inv += inv;
    }
    est.mean_degree_sum = sum_dprime / static_cast<double>(r);
    est.mean_inv_degree_sum = sum_inv / static_cast<double>(r);

    std::size_t collisions = 0;
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = i + 1; j < r; ++j) {
            collisions += intersection_size(run.samples[i], run.samples[j]);
        }
    }
    est.total_collisions = collisions;
    const double pairs = static_cast<double>(r) * static_cast<double>(r - 1) / 2.0;
    est.mean_pair_collisions = static_cast<double>(collisions) / pairs;

    if (collisions == 0) {
        throw DataError("estimate_population: insufficient collisions (I = 0); "
                        "increase the number or size of samples");
    }
    est.n_hat = est.mean_degree_sum * est.mean_inv_degree_sum / est.mean_pair_collisions;
    return est;
}

void write_estimate_csv(std::ostream& out, const PopulationEstimate& e,
                        const std::vector<std::size_t>& sample_sizes) {
    char buf[128];
    out << "metric,value\n";
    out << "r," << e.r << '\n';
    for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
        out << "sample_" << i << "_size," << sample_sizes[i] << '\n';
    }
    out << "total_collisions," << e.total_collisions << '\n';
    std::snprintf(buf, sizeof(buf), "%.6f", e.mean_pair_collisions);
    out << "mean_pair_collisions," << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.6f", e.mean_degree_sum);
    out << "mean_degree_sum," << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.6f", e.mean_inv_degree_sum);
    out << "mean_inv_degree_sum," << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.6f", e.n_hat);
    out << "estimated_population," << buf << '\n';
}

} // namespace fmm::population
