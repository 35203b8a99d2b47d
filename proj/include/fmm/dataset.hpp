#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fmm/geo.hpp"

namespace fmm::dataset {

struct Checkin {
    std::int64_t timestamp = 0; // UTC epoch seconds
    geo::GeoPoint point;
    std::string location_id; // may be empty
};

// Users, undirected friendship edges, and per-user time-ordered checkins.
// Single-writer during ingestion, immutable afterwards.
class SocialGraph {
public:
    std::uint32_t add_user(const std::string& id);
    std::optional<std::uint32_t> find_user(const std::string& id) const;
    std::uint32_t user_index(const std::string& id) const; // throws DataError if unknown

    // Returns false for duplicates and self-loops (which are dropped).
    bool add_edge(std::uint32_t a, std::uint32_t b);
    bool has_edge(std::uint32_t a, std::uint32_t b) const;

    void add_checkin(std::uint32_t user, Checkin c);
    // Re-establishes the per-user timestamp ordering (stable).
    void sort_checkins();

    std::size_t user_count() const { return ids_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    std::size_t checkin_count() const;
    std::size_t degree(std::uint32_t u) const { return adj_[u].size(); }

    const std::string& user_id(std::uint32_t u) const { return ids_[u]; }
    const std::vector<std::uint32_t>& neighbors(std::uint32_t u) const { return adj_[u]; }
    const std::vector<Checkin>& checkins(std::uint32_t u) const { return checkins_[u]; }
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges() const { return edges_; }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<std::vector<std::uint32_t>> adj_;
    std::vector<std::vector<Checkin>> checkins_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_; // (min, max) pairs
};

// Column positions within a tab-separated row; -1 disables a column.
struct ColumnMap {
    int user = 0;
    int timestamp = 1;
    int lat = 2;
    int lng = 3;
    int location_id = 4; // optional column
};

struct IngestReport {
    std::size_t accepted = 0;
    std::vector<std::pair<std::size_t, std::string>> rejected; // (1-based row, reason)
};

// Accepts ISO-8601 (YYYY-MM-DDTHH:MM:SSZ, space separator tolerated) or raw
// epoch seconds. Returns nullopt when unparseable.
std::optional<std::int64_t> parse_timestamp(const std::string& text);

// Rows failing validation are skipped and reported. Throws DataError when more
// than half of the non-empty rows are rejected (likely wrong column mapping).
IngestReport ingest_checkins(std::istream& in, SocialGraph& graph, const ColumnMap& cols = {});

struct EdgeIngestReport {
    std::size_t accepted = 0;
    std::size_t self_loops = 0;
    std::size_t duplicates = 0;
    std::size_t malformed = 0;
};

EdgeIngestReport ingest_edges(std::istream& in, SocialGraph& graph);

struct Stat {
    double mean = 0.0;
    double stddev = 0.0;
    bool defined = false;
};

struct DatasetSummary {
    std::size_t user_count = 0;
    std::size_t checkin_count = 0;
    std::size_t edge_count = 0;       // undirected
    std::size_t half_edge_count = 0;  // directed (2x undirected)
    Stat checkins_per_user;
    Stat friends_per_user;
    Stat weekday;                     // 0 = Sunday ... 6 = Saturday
    std::optional<std::int64_t> earliest_checkin;
    Stat intercheckin_days;           // per-user consecutive gaps
    Stat consecutive_distance_km;     // per-user consecutive haversine distances
};

DatasetSummary summarize(const SocialGraph& graph);

// 0 = Sunday ... 6 = Saturday.
int weekday_of(std::int64_t epoch_seconds);

void write_summary_csv(std::ostream& out, const DatasetSummary& s);

// Self-describing binary snapshot; round-trips losslessly.
void save_snapshot(const SocialGraph& graph, const std::string& path);
SocialGraph load_snapshot(const std::string& path);

} // namespace fmm::dataset
