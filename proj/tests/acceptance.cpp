// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. argv[1] must point at the fmmtool binary (used by criterion 10).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fmm/common.hpp"
#include "fmm/dataset.hpp"
#include "fmm/geo.hpp"
#include "fmm/mobility.hpp"
#include "fmm/population.hpp"
#include "fmm/rng.hpp"
#include "fmm/simnet.hpp"
#include "fmm/social.hpp"

namespace fs = std::filesystem;
using namespace fmm;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// ---------------------------------------------------------------------------
// 1. haversine vs independent spherical-law-of-cosines oracle.

void criterion_1() {
    Rng rng(1001);
    const double half_circumference = geo::kPi * geo::kEarthRadiusKm;
    int checked = 0, antipodal = 0;
    bool ok = true;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const geo::GeoPoint a{rng.uniform(-90.0, 90.0), rng.uniform(-180.0, 180.0)};
        const geo::GeoPoint b{rng.uniform(-90.0, 90.0), rng.uniform(-180.0, 180.0)};
        const double d = geo::haversine_km(a, b);

        const double la = geo::deg_to_rad(a.lat), lb = geo::deg_to_rad(b.lat);
        const double dl = geo::deg_to_rad(b.lng - a.lng);
        double c = std::sin(la) * std::sin(lb) + std::cos(la) * std::cos(lb) * std::cos(dl);
        c = std::clamp(c, -1.0, 1.0);
        if (c < -0.9999) { // near-antipodal: oracle ill-conditioned
            ++antipodal;
            if (d > half_circumference + 1e-9) ok = false;
            continue;
        }
        const double oracle = geo::kEarthRadiusKm * std::acos(c);
        if (oracle < 1e-6) continue; // relative error undefined at zero
        const double rel = std::fabs(d - oracle) / oracle;
        worst = std::max(worst, rel);
        if (rel > 1e-6) ok = false;
        ++checked;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "haversine vs law-of-cosines oracle, %d pairs, worst rel err %.2e "
                  "(%d near-antipodal bounded)",
                  checked, worst, antipodal);
    report(1, ok && checked > 900, buf);
}

// ---------------------------------------------------------------------------
// 2. RWP stationary density vs the closed-form approximation.

void criterion_2() {
    mobility::RwpConfig cfg;
    cfg.width = 2000.0;
    cfg.height = 2000.0;
    cfg.min_speed = 5.0;
    cfg.max_speed = 5.0;
    cfg.pause_s = 0.0;
    cfg.duration_s = 1e6;
    const auto trace = mobility::generate_rwp_trace(cfg, 2002);

    constexpr int kBins = 10;
    std::vector<double> counts(kBins * kBins, 0.0);
    const int samples = 100000;
    for (int i = 0; i < samples; ++i) {
        const double t = (i + 0.5) * (cfg.duration_s / samples);
        const auto p = simnet::position_at(trace, t);
        const int bx = std::clamp(static_cast<int>(p.x / 200.0), 0, kBins - 1);
        const int by = std::clamp(static_cast<int>(p.y / 200.0), 0, kBins - 1);
        counts[by * kBins + bx] += 1.0 / samples;
    }

    // f(x,y) separates into per-axis densities (3/(4 m^3))(m^2 - x^2) on
    // [-m, m]; integrate analytically per bin.
    const double m = 1000.0;
    auto axis_cdf = [m](double x) { // centered coordinate
        return 0.5 + (3.0 / (4.0 * m * m * m)) * (m * m * x - x * x * x / 3.0);
    };
    std::vector<double> axis_prob(kBins);
    for (int b = 0; b < kBins; ++b) {
        axis_prob[b] = axis_cdf(-m + 200.0 * (b + 1)) - axis_cdf(-m + 200.0 * b);
    }
    double tvd = 0.0;
    for (int by = 0; by < kBins; ++by) {
        for (int bx = 0; bx < kBins; ++bx) {
            tvd += 0.5 * std::fabs(counts[by * kBins + bx] - axis_prob[bx] * axis_prob[by]);
        }
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf), "RWP stationary density TVD %.4f (limit 0.05)", tvd);
    report(2, tvd < 0.05, buf);
}

// ---------------------------------------------------------------------------
// 3. Markov chain: empirical transitions and stationary vector on a k=3 chain.

void criterion_3() {
    mobility::Matrix a(3);
    a(0, 0) = 0.1; a(0, 1) = 0.6; a(0, 2) = 0.3;
    a(1, 0) = 0.4; a(1, 1) = 0.2; a(1, 2) = 0.4;
    a(2, 0) = 0.5; a(2, 1) = 0.25; a(2, 2) = 0.25;

    const std::size_t steps = 1000000;
    const auto path = mobility::sample_state_path(a, 0, steps, 3003);

    double visit[3] = {0, 0, 0};
    double trans[3][3] = {};
    for (std::size_t i = 0; i < path.size(); ++i) {
        visit[path[i]] += 1.0;
        if (i + 1 < path.size()) trans[path[i]][path[i + 1]] += 1.0;
    }
    double worst_l1 = 0.0;
    for (int r = 0; r < 3; ++r) {
        const double row_total = trans[r][0] + trans[r][1] + trans[r][2];
        double l1 = 0.0;
        for (int c = 0; c < 3; ++c) l1 += std::fabs(trans[r][c] / row_total - a(r, c));
        worst_l1 = std::max(worst_l1, l1);
    }

    // Power-iteration stationary oracle.
    double pi[3] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    for (int it = 0; it < 500; ++it) {
        double next[3] = {0, 0, 0};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) next[c] += pi[r] * a(r, c);
        }
        std::copy(next, next + 3, pi);
    }
    double worst_rel = 0.0;
    for (int s = 0; s < 3; ++s) {
        const double freq = visit[s] / static_cast<double>(path.size());
        worst_rel = std::max(worst_rel, std::fabs(freq - pi[s]) / pi[s]);
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "k=3 chain: worst row L1 %.4f (limit 0.02), worst stationary rel err "
                  "%.4f (limit 0.01)",
                  worst_l1, worst_rel);
    report(3, worst_l1 < 0.02 && worst_rel < 0.01, buf);
}

// ---------------------------------------------------------------------------
// 4. Affinity formula vs naive brute force, exact equality.

void criterion_4() {
    Rng rng(4004);
    bool ok = true;
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const std::size_t k = 1 + rng.index(8);
        const std::size_t len = 1 + rng.index(50);
        std::vector<std::uint32_t> seq(len);
        for (auto& s : seq) s = static_cast<std::uint32_t>(rng.index(k));

        const auto a = mobility::build_affinity_matrix(seq, k);
        for (std::size_t m = 0; m < k; ++m) {
            std::size_t occurrences = 0;
            for (const auto s : seq) occurrences += s == m;
            for (std::size_t n = 0; n < k; ++n) {
                std::size_t pairs = 0;
                for (std::size_t i = 0; i + 1 < len; ++i) {
                    pairs += seq[i] == m && seq[i + 1] == n;
                }
                const double expect =
                    occurrences == 0 ? 0.0
                                     : static_cast<double>(pairs) / static_cast<double>(occurrences);
                if (a(m, n) != expect) ok = false;
            }
        }
    }
    report(4, ok, "affinity matrix equals brute-force pair counting exactly on 100 sequences");
}

// ---------------------------------------------------------------------------
// 5/6/7. Paper-scale congestion comparison, RWP centrality, FMM containment.

struct CongestionOutcome {
    double ratio = 0.0;
    bool rwp_center_heavy = false;
    bool fmm_contained = true;
};

CongestionOutcome run_congestion_seed(std::uint64_t seed) {
    constexpr int kNodes = 15;
    constexpr double kDuration = 10000.0;

    // Three geographic hotspots; jitter <= ~100 m once fitted to the field.
    const geo::GeoPoint hotspots[3] = {{0.0, 0.0}, {0.0, 0.009}, {0.009, 0.0}};
    Rng rng(derive_seed(seed, 500));

    std::vector<std::vector<dataset::Checkin>> checkins(kNodes);
    std::vector<geo::GeoPoint> all_points;
    for (int i = 0; i < kNodes; ++i) {
        int at = static_cast<int>(rng.index(3));
        for (int c = 0; c < 40; ++c) {
            if (rng.uniform01() >= 0.65) { // hop to one of the other hotspots
                at = (at + 1 + static_cast<int>(rng.index(2))) % 3;
            }
            dataset::Checkin ck;
            ck.timestamp = 1000000 + 3600 * c;
            ck.point = {hotspots[at].lat + rng.uniform(-0.00035, 0.00035),
                        hotspots[at].lng + rng.uniform(-0.00035, 0.00035)};
            ck.location_id = "h" + std::to_string(at);
            checkins[i].push_back(ck);
            all_points.push_back(ck.point);
        }
    }
    const auto fit = geo::fit_to_field(all_points, 2000.0, 2000.0);

    mobility::SpeedPolicy policy; // fixed 5 m/s
    policy.dwell_s = 600.0;       // hotspot dwell between consecutive same-place checkins
    std::vector<std::vector<mobility::Waypoint>> fmm_traces;
    std::vector<const mobility::MobilityModel*> owners;
    std::vector<mobility::MobilityModel> models;
    models.reserve(kNodes);
    for (int i = 0; i < kNodes; ++i) {
        models.push_back(mobility::build_model(checkins[i], "n" + std::to_string(i), 25.0,
                                               fit.transform));
        fmm_traces.push_back(mobility::generate_fmm_trace(models.back(), kDuration, policy,
                                                          derive_seed(seed, 100 + i)));
    }

    mobility::RwpConfig rwp; // 0..5 m/s, pause 0, 2000x2000 baseline
    rwp.duration_s = kDuration;
    std::vector<std::vector<mobility::Waypoint>> rwp_traces;
    for (int i = 0; i < kNodes; ++i) {
        rwp_traces.push_back(mobility::generate_rwp_trace(rwp, derive_seed(seed, 200 + i)));
    }

    simnet::SimConfig sim; // defaults: 10000 s, tick 1, range 250
    sim.rng_seed = derive_seed(seed, 300);
    const auto fmm_report = simnet::run_simulation(fmm_traces, sim);
    const auto rwp_report = simnet::run_simulation(rwp_traces, sim);

    CongestionOutcome out;
    out.ratio = static_cast<double>(fmm_report.total_backoffs) /
                static_cast<double>(std::max<std::uint64_t>(rwp_report.total_backoffs, 1));

    // Criterion 6: center 2x2 of the 10x10 RWP heatmap vs the border ring.
    double center = 0.0, border = 0.0;
    int border_cells = 0;
    for (int r = 0; r < 10; ++r) {
        for (int c = 0; c < 10; ++c) {
            const auto b = rwp_report.grid.backoff_at(r, c);
            if ((r == 4 || r == 5) && (c == 4 || c == 5)) center += static_cast<double>(b);
            if (r == 0 || r == 9 || c == 0 || c == 9) {
                border += static_cast<double>(b);
                ++border_cells;
            }
        }
    }
    out.rwp_center_heavy = center / 4.0 >= 2.0 * (border / border_cells);

    // Criterion 7: every FMM waypoint coincides with one of the node's own
    // states, which trivially places it inside their convex hull.
    for (int i = 0; i < kNodes; ++i) {
        for (const auto& w : fmm_traces[i]) {
            bool on_state = false;
            for (const auto& s : models[i].states) {
                if (w.pos.x == s.pos.x && w.pos.y == s.pos.y) on_state = true;
            }
            if (!on_state) out.fmm_contained = false;
        }
    }
    (void)owners;
    return out;
}

void criteria_5_6_7() {
    std::vector<double> ratios;
    int fmm_heavier = 0, center_heavy = 0;
    bool contained = true;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto out = run_congestion_seed(seed);
        ratios.push_back(out.ratio);
        fmm_heavier += out.ratio > 1.0;
        center_heavy += out.rwp_center_heavy;
        contained = contained && out.fmm_contained;
    }
    const double med = median(ratios);
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "FMM vs RWP backoffs: heavier in %d/10 seeds, median ratio %.2f "
                  "[min %.2f, max %.2f] (need >=9 and [1.5, 5])",
                  fmm_heavier, med, *lo, *hi);
    report(5, fmm_heavier >= 9 && med >= 1.5 && med <= 5.0, buf);

    std::snprintf(buf, sizeof(buf),
                  "RWP congestion center-heavy (2x2 mean >= 2x border mean) in %d/10 seeds",
                  center_heavy);
    report(6, center_heavy >= 9, buf);

    report(7, contained, contained
                             ? "all FMM waypoints lie on the generating node's states (hull containment)"
                             : "FMM waypoint found off the generating node's states");
}

// ---------------------------------------------------------------------------
// 8. Population estimator on ER(1000, mean degree 10).

void criterion_8() {
    dataset::SocialGraph g;
    for (int i = 0; i < 1000; ++i) g.add_user("u" + std::to_string(i));
    Rng rng(8008);
    const double p = 10.0 / 999.0;
    for (std::uint32_t i = 0; i < 1000; ++i) {
        for (std::uint32_t j = i + 1; j < 1000; ++j) {
            if (rng.uniform01() < p) g.add_edge(i, j);
        }
    }
    std::vector<double> estimates;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto run = population::draw_samples(g, 30, 50, derive_seed(888, seed));
        estimates.push_back(population::estimate_population(g, run).n_hat);
    }
    const double med = median(estimates);

    bool errors_cleanly = false;
    dataset::SocialGraph disjoint;
    for (int i = 0; i < 4; ++i) disjoint.add_user("d" + std::to_string(i));
    disjoint.add_edge(0, 1);
    disjoint.add_edge(2, 3);
    population::SampleRun no_overlap;
    no_overlap.samples = {{0, 1}, {2, 3}};
    try {
        population::estimate_population(disjoint, no_overlap);
    } catch (const DataError&) {
        errors_cleanly = true;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "estimator median n_hat %.0f over 20 seeds (need within [800, 1200]); "
                  "zero-collision error %s",
                  med, errors_cleanly ? "raised" : "MISSING");
    report(8, med >= 800.0 && med <= 1200.0 && errors_cleanly, buf);
}

// ---------------------------------------------------------------------------
// 9. Friendship-distance decay rate on a generative exp(-d/200) graph.

double decay_slope_for_seed(std::uint64_t seed) {
    constexpr int kPairs = 20000;      // disjoint placed pairs
    constexpr int kCurveSamples = 4000; // below the ~4900 expected friend edges
    constexpr double kMaxKm = 800.0;
    constexpr double kKmPerDegree = geo::kPi * geo::kEarthRadiusKm / 180.0;

    dataset::SocialGraph g;
    Rng rng(derive_seed(seed, 900));
    for (int i = 0; i < kPairs; ++i) {
        const double d = rng.uniform(0.0, kMaxKm);
        const auto a = g.add_user("p" + std::to_string(i) + "a");
        const auto b = g.add_user("p" + std::to_string(i) + "b");
        dataset::Checkin ca, cb;
        ca.timestamp = cb.timestamp = 0;
        ca.point = {0.0, 0.0};
        cb.point = {0.0, d / kKmPerDegree}; // equatorial: distance is exact
        g.add_checkin(a, ca);
        g.add_checkin(b, cb);
        if (rng.uniform01() < std::exp(-d / 200.0)) g.add_edge(a, b);
    }
    g.sort_checkins();

    std::vector<double> edges;
    for (int b = 0; b <= 16; ++b) edges.push_back(kMaxKm * b / 16.0);
    const auto curve =
        social::friendship_distance_curve(g, kCurveSamples, edges, derive_seed(seed, 901));

    // Least-squares fit of ln(friend fraction) against bin centers.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        if (curve.friend_fraction[b] <= 0.0) continue;
        const double x = (edges[b] + edges[b + 1]) / 2.0;
        const double y = std::log(curve.friend_fraction[b]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++n;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void criterion_9() {
    std::vector<double> slopes;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        slopes.push_back(decay_slope_for_seed(seed));
    }
    const double med = median(slopes);
    const double target = -1.0 / 200.0;
    const bool ok = med >= target * 1.25 && med <= target * 0.75;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "median log-linear decay rate %.5f per km (target %.5f, tolerance 25%%)",
                  med, target);
    report(9, ok, buf);
}

// ---------------------------------------------------------------------------
// 10. Determinism: byte-identical tool reruns plus the ns-2 golden file.

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool run_tool(const std::string& tool, const std::string& args) {
    return std::system((tool + " " + args + " > /dev/null 2>&1").c_str()) == 0;
}

void criterion_10(const std::string& tool) {
    const fs::path dir = fs::temp_directory_path() / "fmm_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    {
        std::ofstream checkins(dir / "checkins.tsv");
        for (int u = 0; u < 6; ++u) {
            for (int t = 0; t < 4; ++t) {
                const bool a = (u + t) % 2 == 0;
                checkins << "user" << u << '\t' << (1000000 + 3600 * t) << '\t'
                         << (a ? "30.0" : "30.01") << '\t' << (a ? "-97.0" : "-97.01") << '\t'
                         << (a ? "va" : "vb") << '\n';
            }
        }
        std::ofstream edges(dir / "edges.tsv");
        edges << "user0\tuser1\nuser0\tuser2\nuser1\tuser2\nuser0\tuser3\n";
    }

    bool ok = true;
    std::string failing;
    auto expect_identical = [&](const std::string& label, const std::string& args,
                                const std::vector<std::string>& outputs) {
        std::vector<std::string> first;
        for (int round = 0; round < 2 && ok; ++round) {
            if (!run_tool(tool, args)) {
                ok = false;
                failing = label + " (command failed)";
                return;
            }
            std::vector<std::string> contents;
            for (const auto& o : outputs) contents.push_back(slurp(dir / o));
            if (round == 0) {
                first = contents;
            } else if (contents != first) {
                ok = false;
                failing = label;
            }
        }
    };

    const auto d = [&](const std::string& name) { return (dir / name).string(); };
    expect_identical("ingest",
                     "ingest --checkins " + d("checkins.tsv") + " --edges " + d("edges.tsv") +
                         " --snapshot " + d("snap.bin") + " --summary " + d("summary.csv"),
                     {"snap.bin", "summary.csv", "snap.bin.manifest.json"});
    expect_identical("build-models",
                     "build-models --snapshot " + d("snap.bin") + " --user user0 --out " +
                         d("models.json"),
                     {"models.json", "models.json.manifest.json"});
    expect_identical("gen fmm csv",
                     "--seed 5 gen --models " + d("models.json") +
                         " --duration 600 --format csv --out " + d("fmm.csv"),
                     {"fmm.csv"});
    expect_identical("gen rwp ns2",
                     "--seed 5 gen --rwp --nodes 4 --duration 400 --format ns2 --out " +
                         d("rwp.tcl"),
                     {"rwp.tcl"});
    expect_identical("analyze",
                     "--seed 5 analyze --snapshot " + d("snap.bin") +
                         " --pairs 3 --bins 0,0.5,2 --out-prefix " + d("an"),
                     {"an_pairs.csv", "an_curve.csv"});
    expect_identical("simulate",
                     "--seed 5 simulate --traces " + d("fmm.csv") +
                         " --duration 500 --grid 10x10 --out-prefix " + d("sim"),
                     {"sim_report.csv", "sim_heatmap.csv"});

    // ns-2 golden file, bit exact.
    const std::vector<std::vector<mobility::Waypoint>> golden_traces{
        {{0.0, {100.0, 200.0}, 5.0}, {50.0, {350.0, 200.0}, 2.5}, {130.0, {350.0, 400.0}, 0.0}},
        {{0.0, {10.0, 20.0}, 0.0}},
    };
    std::ostringstream ns2;
    mobility::export_ns2(ns2, golden_traces, 2000.0, 2000.0);
    const std::string golden =
        "$node_(0) set X_ 100.000000\n"
        "$node_(0) set Y_ 200.000000\n"
        "$node_(0) set Z_ 0.000000\n"
        "$node_(1) set X_ 10.000000\n"
        "$node_(1) set Y_ 20.000000\n"
        "$node_(1) set Z_ 0.000000\n"
        "$ns_ at 0.000000 \"$node_(0) setdest 350.000000 200.000000 5.000000\"\n"
        "$ns_ at 50.000000 \"$node_(0) setdest 350.000000 400.000000 2.500000\"\n";
    if (ns2.str() != golden) {
        ok = false;
        failing = failing.empty() ? "ns-2 golden file" : failing + "; ns-2 golden file";
    }

    report(10, ok, ok ? "byte-identical reruns for all commands; ns-2 golden file bit-exact"
                      : "determinism broken: " + failing);
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path-to-fmmtool>\n";
        return 2;
    }
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criteria_5_6_7();
    criterion_8();
    criterion_9();
    criterion_10(argv[1]);
    std::printf("%s\n", g_failures == 0 ? "acceptance: all criteria passed"
                                        : "acceptance: FAILURES present");
    return g_failures == 0 ? 0 : 1;
}
