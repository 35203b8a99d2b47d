#include "fmm/social.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "fmm/common.hpp"
#include "fmm/rng.hpp"

namespace fmm::social {

namespace {

// Kuhn's augmenting-path maximum bipartite matching. Checkin windows are
// narrow so the compatibility lists stay short.
std::size_t max_matching(const std::vector<std::vector<std::uint32_t>>& compat,
                         std::size_t right_size) {
    std::vector<int> match_right(right_size, -1);
    std::vector<bool> used;

    std::function<bool(std::uint32_t)> try_kuhn = [&](std::uint32_t left) -> bool {
        for (const auto right : compat[left]) {
            if (used[right]) continue;
            used[right] = true;
            if (match_right[right] < 0 || try_kuhn(static_cast<std::uint32_t>(match_right[right]))) {
                match_right[right] = static_cast<int>(left);
                return true;
            }
        }
        return false;
    };

    std::size_t matched = 0;
    for (std::uint32_t left = 0; left < compat.size(); ++left) {
        used.assign(right_size, false);
        if (try_kuhn(left)) ++matched;
    }
    return matched;
}

} // namespace

std::optional<double> checkin_similarity(const dataset::SocialGraph& graph,
                                         std::uint32_t a, std::uint32_t b,
                                         const MatchWindow& window) {
    if (a >= graph.user_count() || b >= graph.user_count()) {
        throw DataError("checkin_similarity: unknown user index");
    }
    if (!(window.time_epsilon_s > 0.0) || !(window.space_epsilon_km > 0.0)) {
        throw std::invalid_argument("checkin_similarity: window epsilons must be positive");
    }
    const auto& ca = graph.checkins(a);
    const auto& cb = graph.checkins(b);
    if (ca.empty() && cb.empty()) return std::nullopt;
    if (ca.empty() || cb.empty()) return 0.0;

    if (a == b) return 1.0;

    // Compatibility lists: checkins of a vs checkins of b within the window.
    std::vector<std::vector<std::uint32_t>> compat(ca.size());
    const auto eps_t = static_cast<std::int64_t>(window.time_epsilon_s);
    for (std::size_t i = 0; i < ca.size(); ++i) {
        const auto lo = ca[i].timestamp - eps_t;
        const auto hi = ca[i].timestamp + eps_t;
        auto it = std::lower_bound(cb.begin(), cb.end(), lo,
                                   [](const dataset::Checkin& c, std::int64_t t) { return c.timestamp < t; });
        for (; it != cb.end() && it->timestamp <= hi; ++it) {
            if (geo::haversine_km(ca[i].point, it->point) <= window.space_epsilon_km) {
                compat[i].push_back(static_cast<std::uint32_t>(it - cb.begin()));
            }
        }
    }
    const std::size_t inter = max_matching(compat, cb.size());
    const std::size_t uni = ca.size() + cb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

geo::GeoPoint average_position(const dataset::SocialGraph& graph, std::uint32_t u) {
    if (u >= graph.user_count()) throw DataError("average_position: unknown user index");
    const auto& cs = graph.checkins(u);
    if (cs.empty()) throw std::invalid_argument("average_position: user has no checkins");
    double lat = 0.0, lng = 0.0;
    for (const auto& c : cs) {
        lat += c.point.lat;
        lng += c.point.lng;
    }
    const auto k = static_cast<double>(cs.size());
    return {lat / k, lng / k};
}

double average_pair_distance_km(const dataset::SocialGraph& graph,
                                std::uint32_t a, std::uint32_t b) {
    return geo::haversine_km(average_position(graph, a), average_position(graph, b));
}

namespace {

std::vector<geo::GeoPoint> average_positions(const dataset::SocialGraph& graph,
                                             std::vector<bool>& has_pos) {
    std::vector<geo::GeoPoint> pos(graph.user_count());
    has_pos.assign(graph.user_count(), false);
    for (std::uint32_t u = 0; u < graph.user_count(); ++u) {
        if (!graph.checkins(u).empty()) {
            pos[u] = average_position(graph, u);
            has_pos[u] = true;
        }
    }
    return pos;
}

struct SampledPairs {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> friends;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> nonfriends;
};

SampledPairs sample_pairs(const dataset::SocialGraph& graph,
                          std::size_t pairs_per_class,
                          std::uint64_t rng_seed) {
    std::vector<std::uint32_t> eligible;
    for (std::uint32_t u = 0; u < graph.user_count(); ++u) {
        if (!graph.checkins(u).empty()) eligible.push_back(u);
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> friend_edges;
    for (const auto& [a, b] : graph.edges()) {
        if (!graph.checkins(a).empty() && !graph.checkins(b).empty()) {
            friend_edges.emplace_back(a, b);
        }
    }
    if (friend_edges.size() < pairs_per_class) {
        throw DataError("insufficient friend pairs with checkins: have " +
                        std::to_string(friend_edges.size()) + ", need " +
                        std::to_string(pairs_per_class));
    }
    const std::size_t n = eligible.size();
    const std::size_t all_pairs = n * (n - 1) / 2;
    if (all_pairs < friend_edges.size() + pairs_per_class) {
        throw DataError("insufficient non-friend pairs with checkins");
    }

    SampledPairs out;
    Rng rng(derive_seed(rng_seed, 0x70617273ULL));
    out.friends.reserve(pairs_per_class);
    for (std::size_t i = 0; i < pairs_per_class; ++i) {
        out.friends.push_back(friend_edges[rng.index(friend_edges.size())]);
    }
    out.nonfriends.reserve(pairs_per_class);
    std::size_t attempts = 0;
    const std::size_t max_attempts = 1000 * (pairs_per_class + 1);
    while (out.nonfriends.size() < pairs_per_class) {
        if (++attempts > max_attempts) {
            throw DataError("non-friend pair sampling failed to converge");
        }
        const auto a = eligible[rng.index(n)];
        const auto b = eligible[rng.index(n)];
        if (a == b || graph.has_edge(a, b)) continue;
        out.nonfriends.emplace_back(std::min(a, b), std::max(a, b));
    }
    return out;
}

std::size_t bin_of(const std::vector<double>& edges, double v) {
    const std::size_t bins = edges.size() - 1;
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    if (it == edges.begin()) return 0;
    std::size_t idx = static_cast<std::size_t>(it - edges.begin()) - 1;
    return std::min(idx, bins - 1);
}

} // namespace

std::vector<double> pairwise_avg_distances_serial(
    const dataset::SocialGraph& graph,
    std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs) {
    std::vector<bool> has_pos;
    const auto pos = average_positions(graph, has_pos);
    std::vector<double> out(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        out[i] = geo::haversine_km(pos[pairs[i].first], pos[pairs[i].second]);
    }
    return out;
}

std::vector<double> pairwise_avg_distances(
    const dataset::SocialGraph& graph,
    std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs) {
    std::vector<bool> has_pos;
    const auto pos = average_positions(graph, has_pos);
    std::vector<double> out(pairs.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(pairs.size()); ++i) {
        out[i] = geo::haversine_km(pos[pairs[i].first], pos[pairs[i].second]);
    }
    return out;
}

DistanceCurve friendship_distance_curve(const dataset::SocialGraph& graph,
                                        std::size_t pairs_per_class,
                                        std::vector<double> bin_edges,
                                        std::uint64_t rng_seed) {
    if (bin_edges.size() < 2 || !std::is_sorted(bin_edges.begin(), bin_edges.end())) {
        throw std::invalid_argument("friendship_distance_curve: need >= 2 ascending bin edges");
    }
    if (pairs_per_class < 1) {
        throw std::invalid_argument("friendship_distance_curve: pairs_per_class must be >= 1");
    }
    const auto sampled = sample_pairs(graph, pairs_per_class, rng_seed);
    const auto friend_d = pairwise_avg_distances(graph, sampled.friends);
    const auto nonfriend_d = pairwise_avg_distances(graph, sampled.nonfriends);

    DistanceCurve curve;
    const std::size_t bins = bin_edges.size() - 1;
    curve.bin_edges = std::move(bin_edges);
    curve.friend_counts.assign(bins, 0);
    curve.nonfriend_counts.assign(bins, 0);
    for (const double d : friend_d) ++curve.friend_counts[bin_of(curve.bin_edges, d)];
    for (const double d : nonfriend_d) ++curve.nonfriend_counts[bin_of(curve.bin_edges, d)];

    curve.friend_fraction.resize(bins);
    curve.nonfriend_fraction.resize(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        curve.friend_fraction[i] =
            static_cast<double>(curve.friend_counts[i]) / static_cast<double>(pairs_per_class);
        curve.nonfriend_fraction[i] =
            static_cast<double>(curve.nonfriend_counts[i]) / static_cast<double>(pairs_per_class);
    }
    return curve;
}

std::vector<PairFeatures> sample_pair_features(const dataset::SocialGraph& graph,
                                               std::size_t pairs_per_class,
                                               const MatchWindow& window,
                                               std::uint64_t rng_seed) {
    const auto sampled = sample_pairs(graph, pairs_per_class, rng_seed);
    std::vector<PairFeatures> rows;
    rows.reserve(2 * pairs_per_class);
    auto emit = [&](const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
                    bool is_friend) {
        const auto dist = pairwise_avg_distances(graph, pairs);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            PairFeatures f;
            f.user_a = pairs[i].first;
            f.user_b = pairs[i].second;
            f.avg_distance_km = dist[i];
            f.checkin_similarity =
                checkin_similarity(graph, pairs[i].first, pairs[i].second, window).value_or(0.0);
            f.is_friend = is_friend;
            rows.push_back(f);
        }
    };
    emit(sampled.friends, true);
    emit(sampled.nonfriends, false);
    return rows;
}

KnnResult knn_friend_classifier(std::span<const PairFeatures> training,
                                std::size_t k,
                                double query_distance_km,
                                double query_similarity) {
    if (training.empty()) throw std::invalid_argument("knn: training set is empty");
    if (k < 1 || k > training.size()) {
        throw std::invalid_argument("knn: k must be in [1, training size]");
    }

    double mean_d = 0.0, mean_s = 0.0;
    for (const auto& t : training) {
        mean_d += t.avg_distance_km;
        mean_s += t.checkin_similarity;
    }
    const auto n = static_cast<double>(training.size());
    mean_d /= n;
    mean_s /= n;
    double var_d = 0.0, var_s = 0.0;
    for (const auto& t : training) {
        var_d += (t.avg_distance_km - mean_d) * (t.avg_distance_km - mean_d);
        var_s += (t.checkin_similarity - mean_s) * (t.checkin_similarity - mean_s);
    }
    const double sd_d = std::sqrt(var_d / n);
    const double sd_s = std::sqrt(var_s / n);
    if (sd_d == 0.0 || sd_s == 0.0) {
        std::cerr << "knn warning: zero-variance feature, its z-score is treated as 0\n";
    }
    auto z = [](double v, double mean, double sd) { return sd > 0.0 ? (v - mean) / sd : 0.0; };

    const double qd = z(query_distance_km, mean_d, sd_d);
    const double qs = z(query_similarity, mean_s, sd_s);

    std::vector<std::pair<double, std::size_t>> scored(training.size());
    for (std::size_t i = 0; i < training.size(); ++i) {
        const double dd = z(training[i].avg_distance_km, mean_d, sd_d) - qd;
        const double ds = z(training[i].checkin_similarity, mean_s, sd_s) - qs;
        scored[i] = {dd * dd + ds * ds, i};
    }
    std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(k), scored.end());

    std::size_t friend_votes = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (training[scored[i].second].is_friend) ++friend_votes;
    }
    KnnResult res;
    res.vote_ratio = static_cast<double>(friend_votes) / static_cast<double>(k);
    res.is_friend = 2 * friend_votes > k; // tie breaks toward non-friend
    return res;
}

void write_pairs_csv(std::ostream& out, const dataset::SocialGraph& graph,
                     std::span<const PairFeatures> rows) {
    out << "user_a,user_b,avg_distance_km,checkin_similarity,is_friend\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f", r.avg_distance_km, r.checkin_similarity);
        out << graph.user_id(r.user_a) << ',' << graph.user_id(r.user_b) << ','
            << buf << ',' << (r.is_friend ? 1 : 0) << '\n';
    }
}

void write_curve_csv(std::ostream& out, const DistanceCurve& curve) {
    out << "bin_lo_km,bin_hi_km,friend_count,friend_fraction,nonfriend_count,nonfriend_fraction\n";
    char buf[128];
    for (std::size_t i = 0; i + 1 < curve.bin_edges.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%zu,%.6f,%zu,%.6f",
                      curve.bin_edges[i], curve.bin_edges[i + 1],
                      curve.friend_counts[i], curve.friend_fraction[i],
                      curve.nonfriend_counts[i], curve.nonfriend_fraction[i]);
        out << buf << '\n';
    }
}

} // namespace fmm::social
