#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fmm/dataset.hpp"

namespace fmm::social {

// Two checkins count as "the same" when they fall within both epsilons.
struct MatchWindow {
    double time_epsilon_s = 3600.0;
    double space_epsilon_km = 0.1;
};

// Jaccard-style checkin similarity |C_a ∩ C_b| / |C_a ∪ C_b|, intersection
// taken as a maximum one-to-one matching under the window.
// nullopt when both users have zero checkins (undefined, not zero).
std::optional<double> checkin_similarity(const dataset::SocialGraph& graph,
                                         std::uint32_t a, std::uint32_t b,
                                         const MatchWindow& window = {});

// Arithmetic mean of latitudes and longitudes. Throws when the user has no
// checkins. Known artifact: naive averaging misbehaves across the
// antimeridian; no correction is applied.
geo::GeoPoint average_position(const dataset::SocialGraph& graph, std::uint32_t u);

double average_pair_distance_km(const dataset::SocialGraph& graph,
                                std::uint32_t a, std::uint32_t b);

struct PairFeatures {
    std::uint32_t user_a = 0;
    std::uint32_t user_b = 0;
    double avg_distance_km = 0.0;
    double checkin_similarity = 0.0;
    bool is_friend = false;
};

struct DistanceCurve {
    std::vector<double> bin_edges;            // B+1 ascending edges defining B bins
    std::vector<std::size_t> friend_counts;   // per bin
    std::vector<std::size_t> nonfriend_counts;
    std::vector<double> friend_fraction;      // normalized within class
    std::vector<double> nonfriend_fraction;
};

// Samples pairs_per_class random friend pairs and non-friend pairs (both
// users with >= 1 checkin), histograms average pair distances into the bins
// defined by bin_edges. Out-of-range distances clamp into the end bins.
DistanceCurve friendship_distance_curve(const dataset::SocialGraph& graph,
                                        std::size_t pairs_per_class,
                                        std::vector<double> bin_edges,
                                        std::uint64_t rng_seed);

// Same sampling as the curve but returns the raw per-pair feature rows.
std::vector<PairFeatures> sample_pair_features(const dataset::SocialGraph& graph,
                                               std::size_t pairs_per_class,
                                               const MatchWindow& window,
                                               std::uint64_t rng_seed);

struct KnnResult {
    bool is_friend = false;
    double vote_ratio = 0.0; // friend votes / k
};

// Majority vote among the k nearest training points under a z-scored
// Euclidean metric; ties break toward non-friend.
KnnResult knn_friend_classifier(std::span<const PairFeatures> training,
                                std::size_t k,
                                double query_distance_km,
                                double query_similarity);

// Average pair distance for many pairs; OpenMP-parallel kernel plus a serial
// reference used by the tests and the benchmark.
std::vector<double> pairwise_avg_distances(const dataset::SocialGraph& graph,
                                           std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs);
std::vector<double> pairwise_avg_distances_serial(const dataset::SocialGraph& graph,
                                                  std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs);

void write_pairs_csv(std::ostream& out, const dataset::SocialGraph& graph,
                     std::span<const PairFeatures> rows);
void write_curve_csv(std::ostream& out, const DistanceCurve& curve);

} // namespace fmm::social
