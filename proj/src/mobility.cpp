#include "fmm/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fmm/common.hpp"
#include "fmm/rng.hpp"

namespace fmm::mobility {

double Matrix::row_sum(std::size_t r) const {
    double s = 0.0;
    for (std::size_t c = 0; c < k_; ++c) s += data_[r * k_ + c];
    return s;
}

namespace {

struct UnionFind {
    std::vector<std::uint32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0u);
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

} // namespace

UniqueLocations unique_locations(std::span<const dataset::Checkin> checkins,
                                 double merge_radius_m) {
    if (checkins.empty()) {
        throw std::invalid_argument("unique_locations: need at least one checkin");
    }
    const std::size_t n = checkins.size();

    // Group label per checkin: location_id groups first, spatial clusters for
    // the id-less remainder (single linkage at merge_radius_m).
    UnionFind uf(static_cast<std::uint32_t>(n));
    std::unordered_map<std::string, std::uint32_t> by_id;
    std::vector<std::uint32_t> idless;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!checkins[i].location_id.empty()) {
            auto [it, inserted] = by_id.emplace(checkins[i].location_id, i);
            if (!inserted) uf.unite(it->second, i);
        } else {
            idless.push_back(i);
        }
    }
    const double radius_km = merge_radius_m / 1000.0;
    for (std::size_t a = 0; a < idless.size(); ++a) {
        for (std::size_t b = a + 1; b < idless.size(); ++b) {
            if (geo::haversine_km(checkins[idless[a]].point, checkins[idless[b]].point) <= radius_km) {
                uf.unite(idless[a], idless[b]);
            }
        }
    }

    UniqueLocations out;
    out.state_of_checkin.resize(n);
    std::unordered_map<std::uint32_t, std::uint32_t> state_of_root;
    std::vector<double> sum_lat, sum_lng;
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto root = uf.find(i);
        auto it = state_of_root.find(root);
        std::uint32_t s;
        if (it == state_of_root.end()) {
            s = static_cast<std::uint32_t>(out.states.size());
            state_of_root.emplace(root, s);
            State st;
            st.key = !checkins[i].location_id.empty()
                         ? checkins[i].location_id
                         : "cluster_" + std::to_string(s);
            out.states.push_back(std::move(st));
            sum_lat.push_back(0.0);
            sum_lng.push_back(0.0);
        } else {
            s = it->second;
        }
        out.state_of_checkin[i] = s;
        out.states[s].occurrences += 1;
        sum_lat[s] += checkins[i].point.lat;
        sum_lng[s] += checkins[i].point.lng;
    }
    for (std::size_t s = 0; s < out.states.size(); ++s) {
        const auto cnt = static_cast<double>(out.states[s].occurrences);
        out.states[s].centroid = {sum_lat[s] / cnt, sum_lng[s] / cnt};
    }
    return out;
}

Matrix build_distance_matrix(std::span<const State> states) {
    const std::size_t k = states.size();
    if (k == 0) throw std::invalid_argument("build_distance_matrix: no states");
    Matrix d(k);
    for (std::size_t m = 0; m < k; ++m) {
        for (std::size_t n = m + 1; n < k; ++n) {
            const double meters = geo::haversine_km(states[m].centroid, states[n].centroid) * 1000.0;
            d(m, n) = meters;
            d(n, m) = meters;
        }
    }
    return d;
}

Matrix build_affinity_matrix(std::span<const std::uint32_t> sequence, std::size_t k) {
    if (sequence.empty()) throw std::invalid_argument("build_affinity_matrix: empty sequence");
    Matrix a(k);
    std::vector<std::size_t> occurrences(k, 0);
    for (const auto s : sequence) {
        if (s >= k) throw std::invalid_argument("build_affinity_matrix: state index out of range");
        ++occurrences[s];
    }
    Matrix counts(k);
    for (std::size_t i = 0; i + 1 < sequence.size(); ++i) {
        counts(sequence[i], sequence[i + 1]) += 1.0;
    }
    for (std::size_t m = 0; m < k; ++m) {
        if (occurrences[m] == 0) continue;
        for (std::size_t n = 0; n < k; ++n) {
            a(m, n) = counts(m, n) / static_cast<double>(occurrences[m]);
        }
    }
    return a;
}

void patch_absorbing_states(Matrix& a) {
    const std::size_t k = a.size();
    for (std::size_t m = 0; m < k; ++m) {
        const double s = a.row_sum(m);
        if (s > 1.0 + 1e-9) {
            throw std::invalid_argument("patch_absorbing_states: row " + std::to_string(m) +
                                        " sums to " + std::to_string(s) + " > 1");
        }
        const double deficit = 1.0 - s;
        if (deficit <= 0.0) continue;
        const double share = deficit / static_cast<double>(k);
        for (std::size_t n = 0; n < k; ++n) a(m, n) += share;
    }
}

Matrix build_temporal_matrix(std::span<const std::uint32_t> sequence,
                             std::span<const std::int64_t> timestamps,
                             std::size_t k) {
    if (sequence.empty()) throw std::invalid_argument("build_temporal_matrix: empty sequence");
    if (sequence.size() != timestamps.size()) {
        throw std::invalid_argument("build_temporal_matrix: sequence/timestamp length mismatch");
    }
    Matrix sum(k), count(k);
    for (std::size_t i = 0; i + 1 < sequence.size(); ++i) {
        const auto gap = timestamps[i + 1] - timestamps[i];
        if (gap < 0) {
            throw DataError("build_temporal_matrix: negative elapsed time at index " +
                            std::to_string(i));
        }
        sum(sequence[i], sequence[i + 1]) += static_cast<double>(gap);
        count(sequence[i], sequence[i + 1]) += 1.0;
    }
    Matrix t(k, kTemporalUnobserved);
    for (std::size_t m = 0; m < k; ++m) {
        for (std::size_t n = 0; n < k; ++n) {
            if (m == n) {
                t(m, n) = 0.0;
            } else if (count(m, n) > 0.0) {
                t(m, n) = sum(m, n) / count(m, n);
            }
        }
    }
    return t;
}

CoverageStats coverage_stats(const Matrix& d) {
    const std::size_t k = d.size();
    if (k == 0) throw std::invalid_argument("coverage_stats: empty matrix");
    CoverageStats cs;
    double sum = 0.0;
    for (std::size_t m = 0; m < k; ++m) {
        for (std::size_t n = m + 1; n < k; ++n) {
            cs.rho_m = std::max(cs.rho_m, d(m, n));
            sum += d(m, n);
        }
    }
    if (k > 1) {
        cs.avg_defined = true;
        cs.avg_travel_m = 2.0 * sum / (static_cast<double>(k) * static_cast<double>(k - 1));
    }
    const double r = cs.rho_m / 2.0;
    cs.max_coverage_area_m2 = geo::kPi * r * r;
    return cs;
}

MobilityModel build_model(std::span<const dataset::Checkin> checkins,
                          const std::string& user,
                          double merge_radius_m,
                          const geo::FieldTransform& transform) {
    MobilityModel model;
    model.user = user;
    auto uniq = unique_locations(checkins, merge_radius_m);
    model.states = std::move(uniq.states);
    model.sequence = std::move(uniq.state_of_checkin);
    for (auto& st : model.states) {
        st.pos = transform.apply(st.centroid);
    }
    model.distance_m = build_distance_matrix(model.states);
    model.affinity = build_affinity_matrix(model.sequence, model.states.size());
    patch_absorbing_states(model.affinity);

    std::vector<std::int64_t> ts;
    ts.reserve(checkins.size());
    for (const auto& c : checkins) ts.push_back(c.timestamp);
    model.temporal_s = build_temporal_matrix(model.sequence, ts, model.states.size());
    return model;
}

namespace {

void check_stochastic(const Matrix& a) {
    for (std::size_t m = 0; m < a.size(); ++m) {
        if (std::abs(a.row_sum(m) - 1.0) > 1e-9) {
            throw ContractError("affinity matrix row " + std::to_string(m) +
                                " is not stochastic; patch_absorbing_states first");
        }
    }
}

std::uint32_t sample_row(const Matrix& a, std::uint32_t row, Rng& rng) {
    const double u = rng.uniform01();
    double cum = 0.0;
    const std::size_t k = a.size();
    for (std::size_t n = 0; n < k; ++n) {
        cum += a(row, n);
        if (u < cum) return static_cast<std::uint32_t>(n);
    }
    return static_cast<std::uint32_t>(k - 1);
}

} // namespace

std::vector<std::uint32_t> sample_state_path(const Matrix& a, std::uint32_t start,
                                             std::size_t steps, std::uint64_t rng_seed) {
    check_stochastic(a);
    if (start >= a.size()) throw std::invalid_argument("sample_state_path: start out of range");
    Rng rng(rng_seed);
    std::vector<std::uint32_t> path;
    path.reserve(steps + 1);
    path.push_back(start);
    for (std::size_t i = 0; i < steps; ++i) {
        path.push_back(sample_row(a, path.back(), rng));
    }
    return path;
}

std::vector<Waypoint> generate_fmm_trace(const MobilityModel& model,
                                         double duration_s,
                                         const SpeedPolicy& policy,
                                         std::uint64_t rng_seed,
                                         bool weighted_start) {
    check_stochastic(model.affinity);
    if (!(duration_s > 0.0)) throw std::invalid_argument("generate_fmm_trace: duration must be > 0");
    if (!(policy.dwell_s > 0.0)) throw std::invalid_argument("generate_fmm_trace: dwell must be > 0");
    if (!(policy.fixed_speed > 0.0)) throw std::invalid_argument("generate_fmm_trace: speed must be > 0");

    const std::size_t k = model.states.size();
    Rng rng(rng_seed);

    std::uint32_t current;
    if (weighted_start) {
        std::uint64_t total = 0;
        for (const auto& st : model.states) total += st.occurrences;
        std::uint64_t ticket = rng.below(total);
        current = 0;
        for (std::uint32_t s = 0; s < k; ++s) {
            if (ticket < model.states[s].occurrences) {
                current = s;
                break;
            }
            ticket -= model.states[s].occurrences;
        }
    } else {
        current = static_cast<std::uint32_t>(rng.index(k));
    }

    std::vector<Waypoint> trace;
    trace.push_back({0.0, model.states[current].pos, 0.0});
    double t = 0.0;
    while (t < duration_s) {
        const auto next = sample_row(model.affinity, current, rng);
        const double dist = geo::field_distance(model.states[current].pos, model.states[next].pos);
        if (next == current || dist == 0.0) {
            t += policy.dwell_s;
            trace.push_back({t, model.states[current].pos, 0.0});
            current = next;
            continue;
        }
        double speed = policy.fixed_speed;
        if (policy.kind == SpeedPolicy::Kind::Temporal) {
            const double gap = model.temporal_s(current, next);
            if (gap > 0.0) {
                speed = std::clamp(dist / std::min(gap, policy.max_gap_s),
                                   policy.min_derived_speed, policy.max_derived_speed);
            }
        }
        trace.back().speed_to_next = speed;
        t += dist / speed;
        trace.push_back({t, model.states[next].pos, 0.0});
        current = next;
    }
    return trace;
}

void validate(const RwpConfig& c) {
    if (!(c.width > 0.0) || !(c.height > 0.0)) {
        throw std::invalid_argument("RwpConfig: field dimensions must be positive");
    }
    if (c.min_speed < 0.0 || c.min_speed > c.max_speed || !(c.max_speed > 0.0)) {
        throw std::invalid_argument("RwpConfig: need 0 <= min_speed <= max_speed, max_speed > 0");
    }
    if (c.pause_s < 0.0 || !(c.duration_s > 0.0)) {
        throw std::invalid_argument("RwpConfig: pause >= 0 and duration > 0 required");
    }
}

std::vector<Waypoint> generate_rwp_trace(const RwpConfig& config, std::uint64_t rng_seed) {
    validate(config);
    if (config.min_speed == 0.0) {
        std::cerr << "rwp warning: min speed 0 causes the known long-run slowdown pathology\n";
    }
    Rng rng(rng_seed);
    std::vector<Waypoint> trace;
    geo::FieldPoint pos{rng.uniform(0.0, config.width), rng.uniform(0.0, config.height)};
    trace.push_back({0.0, pos, 0.0});
    double t = 0.0;
    while (t < config.duration_s) {
        const geo::FieldPoint dest{rng.uniform(0.0, config.width), rng.uniform(0.0, config.height)};
        double speed = rng.uniform(config.min_speed, config.max_speed);
        while (!(speed > 0.0)) speed = rng.uniform(config.min_speed, config.max_speed);
        const double dist = geo::field_distance(pos, dest);
        if (dist == 0.0) continue;
        trace.back().speed_to_next = speed;
        t += dist / speed;
        trace.push_back({t, dest, 0.0});
        pos = dest;
        if (config.pause_s > 0.0 && t < config.duration_s) {
            t += config.pause_s;
            trace.push_back({t, pos, 0.0});
        }
    }
    return trace;
}

namespace {

void check_bounds(std::span<const std::vector<Waypoint>> traces, double width, double height) {
    constexpr double eps = 1e-9;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        for (const auto& w : traces[i]) {
            if (w.pos.x < -eps || w.pos.x > width + eps || w.pos.y < -eps || w.pos.y > height + eps) {
                throw ContractError("node " + std::to_string(i) + " waypoint outside field at t=" +
                                    std::to_string(w.t));
            }
        }
    }
}

} // namespace

void export_ns2(std::ostream& out, std::span<const std::vector<Waypoint>> traces,
                double width, double height) {
    if (traces.empty()) throw std::invalid_argument("export_ns2: no traces");
    check_bounds(traces, width, height);
    char buf[256];
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& first = traces[i].front();
        std::snprintf(buf, sizeof(buf),
                      "$node_(%zu) set X_ %.6f\n$node_(%zu) set Y_ %.6f\n$node_(%zu) set Z_ 0.000000\n",
                      i, first.pos.x, i, first.pos.y, i);
        out << buf;
    }
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& tr = traces[i];
        for (std::size_t j = 0; j + 1 < tr.size(); ++j) {
            const auto& from = tr[j];
            const auto& to = tr[j + 1];
            if (from.pos.x == to.pos.x && from.pos.y == to.pos.y) continue; // pause
            std::snprintf(buf, sizeof(buf),
                          "$ns_ at %.6f \"$node_(%zu) setdest %.6f %.6f %.6f\"\n",
                          from.t, i, to.pos.x, to.pos.y, from.speed_to_next);
            out << buf;
        }
    }
}

void export_csv(std::ostream& out, std::span<const std::vector<Waypoint>> traces,
                double width, double height) {
    if (traces.empty()) throw std::invalid_argument("export_csv: no traces");
    check_bounds(traces, width, height);
    out << "node,t,x,y,speed\n";
    char buf[256];
    for (std::size_t i = 0; i < traces.size(); ++i) {
        for (const auto& w : traces[i]) {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g\n",
                          i, w.t, w.pos.x, w.pos.y, w.speed_to_next);
            out << buf;
        }
    }
}

std::vector<std::vector<Waypoint>> parse_trace_csv(std::istream& in) {
    if (!in) throw IoError("parse_trace_csv: unreadable stream");
    std::string line;
    if (!std::getline(in, line)) throw DataError("parse_trace_csv: empty file");
    std::vector<std::vector<Waypoint>> traces;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::size_t node;
        Waypoint w;
        if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf,%lf",
                        &node, &w.t, &w.pos.x, &w.pos.y, &w.speed_to_next) != 5) {
            throw DataError("parse_trace_csv: malformed row " + std::to_string(row));
        }
        if (node >= traces.size()) traces.resize(node + 1);
        traces[node].push_back(w);
    }
    return traces;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.size(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < m.size(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows) {
    Matrix m(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows.size(); ++c) {
            m(r, c) = rows[r][c].get<double>();
        }
    }
    return m;
}

} // namespace

void save_models_json(const std::string& path, std::span<const MobilityModel> models,
                      double field_width, double field_height) {
    nlohmann::json doc;
    doc["format"] = "fmm-models-1";
    doc["field"] = {{"width", field_width}, {"height", field_height}};
    nlohmann::json list = nlohmann::json::array();
    for (const auto& m : models) {
        nlohmann::json jm;
        jm["user"] = m.user;
        nlohmann::json states = nlohmann::json::array();
        for (const auto& st : m.states) {
            states.push_back({{"lat", st.centroid.lat},
                              {"lng", st.centroid.lng},
                              {"x", st.pos.x},
                              {"y", st.pos.y},
                              {"key", st.key},
                              {"occurrences", st.occurrences}});
        }
        jm["states"] = std::move(states);
        jm["sequence"] = m.sequence;
        jm["distance_m"] = matrix_to_json(m.distance_m);
        jm["affinity"] = matrix_to_json(m.affinity);
        jm["temporal_s"] = matrix_to_json(m.temporal_s);
        list.push_back(std::move(jm));
    }
    doc["models"] = std::move(list);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

ModelFile load_models_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model file parse error: " + std::string(e.what()));
    }
    if (doc.value("format", "") != "fmm-models-1") {
        throw DataError("not a model file: " + path);
    }
    ModelFile file;
    file.field_width = doc["field"]["width"].get<double>();
    file.field_height = doc["field"]["height"].get<double>();
    for (const auto& jm : doc["models"]) {
        MobilityModel m;
        m.user = jm["user"].get<std::string>();
        for (const auto& js : jm["states"]) {
            State st;
            st.centroid = {js["lat"].get<double>(), js["lng"].get<double>()};
            st.pos = {js["x"].get<double>(), js["y"].get<double>()};
            st.key = js["key"].get<std::string>();
            st.occurrences = js["occurrences"].get<std::size_t>();
            m.states.push_back(std::move(st));
        }
        m.sequence = jm["sequence"].get<std::vector<std::uint32_t>>();
        m.distance_m = matrix_from_json(jm["distance_m"]);
        m.affinity = matrix_from_json(jm["affinity"]);
        m.temporal_s = matrix_from_json(jm["temporal_s"]);
        file.models.push_back(std::move(m));
    }
    return file;
}

} // namespace fmm::mobility
