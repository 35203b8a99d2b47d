#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fmm/dataset.hpp"
#include "fmm/geo.hpp"

namespace fmm::mobility {

// Dense square matrix, row-major.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t k, double fill = 0.0) : k_(k), data_(k * k, fill) {}

    std::size_t size() const { return k_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * k_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * k_ + c]; }
    double row_sum(std::size_t r) const;

private:
    std::size_t k_ = 0;
    std::vector<double> data_;
};

struct State {
    geo::GeoPoint centroid;   // mean of member checkin coordinates
    geo::FieldPoint pos;      // projected field position (set by build_model)
    std::string key;          // location_id when present, else synthesized
    std::size_t occurrences = 0;
};

struct UniqueLocations {
    std::vector<State> states;                 // ordered by first appearance
    std::vector<std::uint32_t> state_of_checkin;
};

// Deduplicates checkin locations: by location_id when present, otherwise by
// single-linkage spatial clustering at merge_radius_m.
UniqueLocations unique_locations(std::span<const dataset::Checkin> checkins,
                                 double merge_radius_m);

// D[m][n] = haversine distance between state centroids, meters.
Matrix build_distance_matrix(std::span<const State> states);

// Raw affinity: count of consecutive m->n pairs divided by total occurrences
// of m in the sequence. Rows may sum to < 1 (fixed by patch_absorbing_states).
Matrix build_affinity_matrix(std::span<const std::uint32_t> sequence, std::size_t k);

// Makes every row stochastic: zero rows become uniform 1/k, deficits of
// sub-stochastic rows are spread uniformly over all states.
void patch_absorbing_states(Matrix& a);

constexpr double kTemporalUnobserved = -1.0;

// T[m][n] = mean elapsed seconds over observed consecutive m->n transitions;
// unobserved entries hold kTemporalUnobserved, diagonal is 0.
Matrix build_temporal_matrix(std::span<const std::uint32_t> sequence,
                             std::span<const std::int64_t> timestamps,
                             std::size_t k);

struct CoverageStats {
    double rho_m = 0.0;              // max pairwise distance
    double avg_travel_m = 0.0;       // Eq-style mean over unordered pairs
    bool avg_defined = false;        // false when k == 1
    double max_coverage_area_m2 = 0.0; // pi * (rho/2)^2
};

CoverageStats coverage_stats(const Matrix& d);

struct MobilityModel {
    std::string user;
    std::vector<State> states;
    std::vector<std::uint32_t> sequence; // state index per checkin, time order
    Matrix distance_m;
    Matrix affinity;   // patched, row-stochastic
    Matrix temporal_s; // kTemporalUnobserved sentinel off the observed set
};

// Builds the full per-user model; state field positions come from transform.
MobilityModel build_model(std::span<const dataset::Checkin> checkins,
                          const std::string& user,
                          double merge_radius_m,
                          const geo::FieldTransform& transform);

struct Waypoint {
    double t = 0.0;             // seconds since trace start
    geo::FieldPoint pos;
    double speed_to_next = 0.0; // m/s, 0 on the final waypoint / dwells
};

struct SpeedPolicy {
    enum class Kind { Fixed, Temporal } kind = Kind::Fixed;
    double fixed_speed = 5.0;   // m/s
    double dwell_s = 60.0;      // self-transition dwell, must be > 0
    double max_gap_s = 86400.0; // cap on temporal gaps used for speed derivation
    double min_derived_speed = 0.5;
    double max_derived_speed = 50.0;
};

// Samples `steps` transitions of the chain starting from `start`.
std::vector<std::uint32_t> sample_state_path(const Matrix& a, std::uint32_t start,
                                             std::size_t steps, std::uint64_t rng_seed);

// Markov walk over the model's states; straight-line legs; ends at the first
// arrival at or past duration_s. Throws ContractError when A is not
// row-stochastic.
std::vector<Waypoint> generate_fmm_trace(const MobilityModel& model,
                                         double duration_s,
                                         const SpeedPolicy& policy,
                                         std::uint64_t rng_seed,
                                         bool weighted_start = false);

struct RwpConfig {
    double width = 2000.0;
    double height = 2000.0;
    double min_speed = 0.0;
    double max_speed = 5.0;
    double pause_s = 0.0;
    double duration_s = 10000.0;
};

void validate(const RwpConfig& config);

std::vector<Waypoint> generate_rwp_trace(const RwpConfig& config, std::uint64_t rng_seed);

// ns-2 movement scenario: per-node X_/Y_/Z_ init lines, then timed setdest
// commands. Throws ContractError on out-of-field waypoints.
void export_ns2(std::ostream& out, std::span<const std::vector<Waypoint>> traces,
                double width, double height);

// Plain CSV: node,t,x,y,speed (%.17g, exact round-trip).
void export_csv(std::ostream& out, std::span<const std::vector<Waypoint>> traces,
                double width, double height);

std::vector<std::vector<Waypoint>> parse_trace_csv(std::istream& in);

// Model dump as JSON (states + matrices) and round-trip load.
void save_models_json(const std::string& path, std::span<const MobilityModel> models,
                      double field_width, double field_height);
struct ModelFile {
    std::vector<MobilityModel> models;
    double field_width = 0.0;
    double field_height = 0.0;
};
ModelFile load_models_json(const std::string& path);

} // namespace fmm::mobility
