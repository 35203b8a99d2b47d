#include "fmm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fmm/common.hpp"

namespace fmm::dataset {

std::uint32_t SocialGraph::add_user(const std::string& id) {
    auto it = index_.find(id);
    if (it != index_.end()) return it->second;
    const auto u = static_cast<std::uint32_t>(ids_.size());
    ids_.push_back(id);
    index_.emplace(id, u);
    adj_.emplace_back();
    checkins_.emplace_back();
    return u;
}

std::optional<std::uint32_t> SocialGraph::find_user(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::uint32_t SocialGraph::user_index(const std::string& id) const {
    auto u = find_user(id);
    if (!u) throw DataError("unknown user: " + id);
    return *u;
}

bool SocialGraph::has_edge(std::uint32_t a, std::uint32_t b) const {
    const auto& shorter = adj_[a].size() <= adj_[b].size() ? adj_[a] : adj_[b];
    const std::uint32_t other = adj_[a].size() <= adj_[b].size() ? b : a;
    return std::find(shorter.begin(), shorter.end(), other) != shorter.end();
}

bool SocialGraph::add_edge(std::uint32_t a, std::uint32_t b) {
    if (a == b) return false;
    if (has_edge(a, b)) return false;
    adj_[a].push_back(b);
    adj_[b].push_back(a);
    edges_.emplace_back(std::min(a, b), std::max(a, b));
    return true;
}

void SocialGraph::add_checkin(std::uint32_t user, Checkin c) {
    checkins_[user].push_back(std::move(c));
}

void SocialGraph::sort_checkins() {
    for (auto& list : checkins_) {
        std::stable_sort(list.begin(), list.end(),
                         [](const Checkin& a, const Checkin& b) { return a.timestamp < b.timestamp; });
    }
}

std::size_t SocialGraph::checkin_count() const {
    std::size_t n = 0;
    for (const auto& list : checkins_) n += list.size();
    return n;
}

namespace {

// Howard Hinnant's civil-days algorithm.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

} // namespace

std::optional<std::int64_t> parse_timestamp(const std::string& text) {
    int y, mo, d, h, mi, s;
    char sep;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &d, &sep, &h, &mi, &s) == 7) {
        if ((sep != 'T' && sep != ' ') || mo < 1 || mo > 12 || d < 1 || d > 31 ||
            h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) {
            return std::nullopt;
        }
        return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
    }
    // Fallback: raw epoch seconds.
    if (text.empty()) return std::nullopt;
    char* end = nullptr;
    long long v = std::strtoll(text.c_str(), &end, 10);
    if (end != text.c_str() + text.size()) return std::nullopt;
    return static_cast<std::int64_t>(v);
}

IngestReport ingest_checkins(std::istream& in, SocialGraph& graph, const ColumnMap& cols) {
    if (!in) throw IoError("ingest_checkins: unreadable stream");

    IngestReport report;
    std::string line;
    std::size_t row = 0;
    std::size_t nonempty = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++nonempty;

        const auto fields = split_tabs(line);
        const int needed = std::max({cols.user, cols.timestamp, cols.lat, cols.lng});
        if (static_cast<int>(fields.size()) <= needed) {
            report.rejected.emplace_back(row, "too few columns");
            continue;
        }
        const std::string& user = fields[cols.user];
        if (user.empty()) {
            report.rejected.emplace_back(row, "empty user id");
            continue;
        }
        auto ts = parse_timestamp(fields[cols.timestamp]);
        if (!ts) {
            report.rejected.emplace_back(row, "unparseable timestamp: " + fields[cols.timestamp]);
            continue;
        }
        auto lat = parse_double(fields[cols.lat]);
        auto lng = parse_double(fields[cols.lng]);
        if (!lat || !lng || !geo::is_valid({*lat, *lng})) {
            report.rejected.emplace_back(row, "invalid coordinates");
            continue;
        }
        Checkin c;
        c.timestamp = *ts;
        c.point = {*lat, *lng};
        if (cols.location_id >= 0 && cols.location_id < static_cast<int>(fields.size())) {
            c.location_id = fields[cols.location_id];
        }
        graph.add_checkin(graph.add_user(user), std::move(c));
        ++report.accepted;
    }
    graph.sort_checkins();

    if (nonempty > 0 && report.rejected.size() * 2 > nonempty) {
        throw DataError("ingest_checkins: " + std::to_string(report.rejected.size()) + " of " +
                        std::to_string(nonempty) + " rows rejected; column mapping likely wrong");
    }
    return report;
}

EdgeIngestReport ingest_edges(std::istream& in, SocialGraph& graph) {
    if (!in) throw IoError("ingest_edges: unreadable stream");

    EdgeIngestReport report;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
            ++report.malformed;
            continue;
        }
        const auto a = graph.add_user(fields[0]);
        const auto b = graph.add_user(fields[1]);
        if (a == b) {
            ++report.self_loops;
        } else if (graph.add_edge(a, b)) {
            ++report.accepted;
        } else {
            ++report.duplicates;
        }
    }
    return report;
}

int weekday_of(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    if (epoch_seconds % 86400 < 0) --days;
    // Epoch day 0 (1970-01-01) was a Thursday; Sunday-based index 4.
    std::int64_t w = (days + 4) % 7;
    if (w < 0) w += 7;
    return static_cast<int>(w);
}

namespace {

class RunningStat {
public:
    void add(double x) {
        ++n_;
        sum_ += x;
        sumsq_ += x * x;
    }
    Stat finish() const {
        Stat s;
        if (n_ == 0) return s;
        s.defined = true;
        s.mean = sum_ / static_cast<double>(n_);
        double var = sumsq_ / static_cast<double>(n_) - s.mean * s.mean;
        s.stddev = std::sqrt(std::max(0.0, var));
        return s;
    }

private:
    std::size_t n_ = 0;
    double sum_ = 0.0;
    double sumsq_ = 0.0;
};

} // namespace

DatasetSummary summarize(const SocialGraph& graph) {
    DatasetSummary s;
    s.user_count = graph.user_count();
    s.checkin_count = graph.checkin_count();
    s.edge_count = graph.edge_count();
    s.half_edge_count = 2 * graph.edge_count();

    RunningStat per_user, friends, weekday, interval, distance;
    for (std::uint32_t u = 0; u < graph.user_count(); ++u) {
        const auto& cs = graph.checkins(u);
        per_user.add(static_cast<double>(cs.size()));
        friends.add(static_cast<double>(graph.degree(u)));
        for (std::size_t i = 0; i < cs.size(); ++i) {
            weekday.add(static_cast<double>(weekday_of(cs[i].timestamp)));
            if (!s.earliest_checkin || cs[i].timestamp < *s.earliest_checkin) {
                s.earliest_checkin = cs[i].timestamp;
            }
            if (i > 0) {
                interval.add(static_cast<double>(cs[i].timestamp - cs[i - 1].timestamp) / 86400.0);
                distance.add(geo::haversine_km(cs[i - 1].point, cs[i].point));
            }
        }
    }
    s.checkins_per_user = per_user.finish();
    s.friends_per_user = friends.finish();
    s.weekday = weekday.finish();
    s.intercheckin_days = interval.finish();
    s.consecutive_distance_km = distance.finish();
    return s;
}

namespace {

void write_stat_row(std::ostream& out, const char* name, const Stat& st) {
    out << name << ',';
    if (st.defined) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f", st.mean, st.stddev);
        out << buf;
    } else {
        out << ',';
    }
    out << '\n';
}

} // namespace

void write_summary_csv(std::ostream& out, const DatasetSummary& s) {
    out << "metric,mean,stddev\n";
    out << "users," << s.user_count << ",\n";
    out << "checkins," << s.checkin_count << ",\n";
    out << "edges_undirected," << s.edge_count << ",\n";
    out << "edges_directed," << s.half_edge_count << ",\n";
    write_stat_row(out, "checkins_per_user", s.checkins_per_user);
    write_stat_row(out, "friends_per_user", s.friends_per_user);
    write_stat_row(out, "weekday", s.weekday);
    write_stat_row(out, "intercheckin_days", s.intercheckin_days);
    write_stat_row(out, "consecutive_distance_km", s.consecutive_distance_km);
    out << "earliest_checkin,";
    if (s.earliest_checkin) out << *s.earliest_checkin;
    out << ",\n";
}

namespace {

constexpr char kMagic[8] = {'F', 'M', 'M', 'S', 'N', 'A', 'P', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw IoError("snapshot: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_i64(std::ostream& out, std::int64_t v) { write_u64(out, static_cast<std::uint64_t>(v)); }
std::int64_t read_i64(std::istream& in) { return static_cast<std::int64_t>(read_u64(in)); }

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
}

double read_f64(std::istream& in) {
    std::uint64_t bits = read_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void write_str(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& in) {
    const auto n = read_u64(in);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw IoError("snapshot: truncated string");
    return s;
}

} // namespace

void save_snapshot(const SocialGraph& graph, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(kMagic, 8);
    write_u64(out, graph.user_count());
    for (std::uint32_t u = 0; u < graph.user_count(); ++u) {
        write_str(out, graph.user_id(u));
        const auto& cs = graph.checkins(u);
        write_u64(out, cs.size());
        for (const auto& c : cs) {
            write_i64(out, c.timestamp);
            write_f64(out, c.point.lat);
            write_f64(out, c.point.lng);
            write_str(out, c.location_id);
        }
    }
    write_u64(out, graph.edge_count());
    for (const auto& [a, b] : graph.edges()) {
        write_u64(out, a);
        write_u64(out, b);
    }
    if (!out) throw IoError("write failed: " + path);
}

SocialGraph load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
        throw DataError("not a snapshot file: " + path);
    }
    SocialGraph g;
    const auto users = read_u64(in);
    for (std::uint64_t u = 0; u < users; ++u) {
        const auto id = read_str(in);
        const auto idx = g.add_user(id);
        const auto n = read_u64(in);
        for (std::uint64_t i = 0; i < n; ++i) {
            Checkin c;
            c.timestamp = read_i64(in);
            c.point.lat = read_f64(in);
            c.point.lng = read_f64(in);
            c.location_id = read_str(in);
            g.add_checkin(idx, std::move(c));
        }
    }
    const auto edges = read_u64(in);
    for (std::uint64_t e = 0; e < edges; ++e) {
        const auto a = static_cast<std::uint32_t>(read_u64(in));
        const auto b = static_cast<std::uint32_t>(read_u64(in));
        if (a >= g.user_count() || b >= g.user_count()) {
            throw DataError("snapshot: edge references unknown user");
        }
        g.add_edge(a, b);
    }
    return g;
}

} // namespace fmm::dataset
