// fmmtool: command-line front-end for the friendship mobility toolkit.
// Pipeline: ingest -> analyze / estimate -> build-models -> gen -> simulate.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fmm/common.hpp"
#include "fmm/dataset.hpp"
#include "fmm/mobility.hpp"
#include "fmm/population.hpp"
#include "fmm/rng.hpp"
#include "fmm/simnet.hpp"
#include "fmm/social.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitContract = 4;
constexpr int kExitIo = 5;

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fmm::IoError("cannot read input: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const auto n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

// Write-to-temp then rename so outputs appear atomically.
void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw fmm::IoError("cannot open for writing: " + tmp);
        out << content;
        if (!out) throw fmm::IoError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

// Reproducibility record written next to every command's primary output.
class Manifest {
public:
    Manifest(std::string command, std::uint64_t seed) {
        doc_["command"] = std::move(command);
        doc_["version"] = kVersion;
        doc_["seed"] = seed;
        doc_["config"] = nlohmann::json::object();
        doc_["inputs"] = nlohmann::json::array();
        doc_["outputs"] = nlohmann::json::array();
    }
    void config(const std::string& key, const nlohmann::json& value) { doc_["config"][key] = value; }
    void input(const std::string& path) {
        char hex[17];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a64_file(path)));
        doc_["inputs"].push_back({{"path", path}, {"fnv1a64", hex}});
    }
    void output(const std::string& path) { doc_["outputs"].push_back(path); }
    void write(const std::string& path) {
        doc_["outputs"].push_back(path);
        atomic_write(path, doc_.dump(2) + "\n");
    }

private:
    nlohmann::json doc_;
};

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

std::vector<std::string> parse_string_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Flat key = value config file mirroring the simulation parameter names.
std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fmm::IoError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw std::invalid_argument("config file: malformed line: " + line);
            }
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config file: empty key in line: " + line);
        kv[key] = value;
    }
    return kv;
}

struct IngestArgs {
    std::string checkins, edges, snapshot, summary;
    fmm::dataset::ColumnMap cols;
};

int cmd_ingest(const IngestArgs& args, std::uint64_t seed) {
    Manifest manifest("ingest", seed);
    fmm::dataset::SocialGraph graph;

    if (!args.checkins.empty()) {
        manifest.input(args.checkins);
        std::ifstream in(args.checkins, std::ios::binary);
        if (!in) throw fmm::IoError("cannot open checkins file: " + args.checkins);
        const auto report = fmm::dataset::ingest_checkins(in, graph, args.cols);
        std::cout << "checkins accepted: " << report.accepted
                  << ", rejected: " << report.rejected.size() << '\n';
        for (const auto& [row, reason] : report.rejected) {
            std::cerr << "  row " << row << ": " << reason << '\n';
        }
    }
    if (!args.edges.empty()) {
        manifest.input(args.edges);
        std::ifstream in(args.edges, std::ios::binary);
        if (!in) throw fmm::IoError("cannot open edges file: " + args.edges);
        const auto report = fmm::dataset::ingest_edges(in, graph);
        std::cout << "edges accepted: " << report.accepted
                  << ", self-loops dropped: " << report.self_loops
                  << ", duplicates: " << report.duplicates << '\n';
    }

    fmm::dataset::save_snapshot(graph, args.snapshot);
    manifest.output(args.snapshot);

    const auto summary_path = args.summary.empty() ? args.snapshot + ".summary.csv" : args.summary;
    std::ostringstream csv;
    fmm::dataset::write_summary_csv(csv, fmm::dataset::summarize(graph));
    atomic_write(summary_path, csv.str());
    manifest.output(summary_path);

    manifest.config("checkins", args.checkins);
    manifest.config("edges", args.edges);
    manifest.write(args.snapshot + ".manifest.json");
    return 0;
}

struct AnalyzeArgs {
    std::string snapshot, out_prefix;
    std::size_t pairs = 3000;
    std::string bins = "0,50,100,200,400,800,1600,3200";
    double time_eps = 3600.0, space_eps = 0.1;
};

int cmd_analyze(const AnalyzeArgs& args, std::uint64_t seed) {
    Manifest manifest("analyze", seed);
    manifest.input(args.snapshot);
    const auto graph = fmm::dataset::load_snapshot(args.snapshot);

    fmm::social::MatchWindow window{args.time_eps, args.space_eps};
    const auto rows = fmm::social::sample_pair_features(graph, args.pairs, window, seed);
    std::ostringstream pairs_csv;
    fmm::social::write_pairs_csv(pairs_csv, graph, rows);
    const auto pairs_path = args.out_prefix + "_pairs.csv";
    atomic_write(pairs_path, pairs_csv.str());
    manifest.output(pairs_path);

    auto edges = parse_double_list(args.bins);
    const auto curve = fmm::social::friendship_distance_curve(graph, args.pairs, edges, seed);
    std::ostringstream curve_csv;
    fmm::social::write_curve_csv(curve_csv, curve);
    const auto curve_path = args.out_prefix + "_curve.csv";
    atomic_write(curve_path, curve_csv.str());
    manifest.output(curve_path);

    manifest.config("pairs", args.pairs);
    manifest.config("bins", args.bins);
    manifest.config("time_epsilon_s", args.time_eps);
    manifest.config("space_epsilon_km", args.space_eps);
    manifest.write(args.out_prefix + ".manifest.json");
    return 0;
}

struct EstimateArgs {
    std::string snapshot, out;
    std::size_t samples = 30, sample_size = 50;
};

int cmd_estimate(const EstimateArgs& args, std::uint64_t seed) {
    Manifest manifest("estimate", seed);
    manifest.input(args.snapshot);
    const auto graph = fmm::dataset::load_snapshot(args.snapshot);

    const auto run = fmm::population::draw_samples(graph, args.samples, args.sample_size, seed);
    const auto estimate = fmm::population::estimate_population(graph, run);

    std::vector<std::size_t> sizes;
    for (const auto& s : run.samples) sizes.push_back(s.size());
    std::ostringstream csv;
    fmm::population::write_estimate_csv(csv, estimate, sizes);
    atomic_write(args.out, csv.str());
    manifest.output(args.out);

    std::cout << "estimated population: " << estimate.n_hat
              << " (r=" << estimate.r << ", collisions=" << estimate.total_collisions << ")\n";

    manifest.config("samples", args.samples);
    manifest.config("sample_size", args.sample_size);
    manifest.write(args.out + ".manifest.json");
    return 0;
}

struct BuildModelsArgs {
    std::string snapshot, out;
    std::string seed_user;
    std::string users; // comma list
    bool transitive = false;
    double merge_radius = 25.0;
    double width = 2000.0, height = 2000.0;
};

std::vector<std::uint32_t> select_users(const fmm::dataset::SocialGraph& graph,
                                        const BuildModelsArgs& args) {
    std::vector<std::uint32_t> selected;
    std::vector<bool> seen(graph.user_count(), false);
    auto push = [&](std::uint32_t u) {
        if (!seen[u]) {
            seen[u] = true;
            selected.push_back(u);
        }
    };
    if (!args.users.empty()) {
        for (const auto& id : parse_string_list(args.users)) {
            push(graph.user_index(id));
        }
        return selected;
    }
    const auto root = graph.user_index(args.seed_user);
    push(root);
    if (args.transitive) {
        // Whole friendship component of the seed user.
        std::size_t head = 0;
        while (head < selected.size()) {
            const auto u = selected[head++];
            for (const auto v : graph.neighbors(u)) push(v);
        }
    } else {
        for (const auto v : graph.neighbors(root)) push(v);
    }
    return selected;
}

int cmd_build_models(const BuildModelsArgs& args) {
    Manifest manifest("build-models", 0);
    manifest.input(args.snapshot);
    const auto graph = fmm::dataset::load_snapshot(args.snapshot);

    const auto selected = select_users(graph, args);
    if (selected.empty()) throw fmm::DataError("build-models: no users selected");

    // One shared similarity transform over every selected user's checkins so
    // inter-user geometry survives the projection.
    std::vector<fmm::geo::GeoPoint> all_points;
    for (const auto u : selected) {
        for (const auto& c : graph.checkins(u)) all_points.push_back(c.point);
    }
    if (all_points.empty()) throw fmm::DataError("build-models: selected users have no checkins");
    const auto fit = fmm::geo::fit_to_field(all_points, args.width, args.height);

    std::vector<fmm::mobility::MobilityModel> models;
    for (const auto u : selected) {
        const auto& cs = graph.checkins(u);
        if (cs.empty()) {
            std::cerr << "skipping user without checkins: " << graph.user_id(u) << '\n';
            continue;
        }
        models.push_back(fmm::mobility::build_model(cs, graph.user_id(u), args.merge_radius,
                                                    fit.transform));
    }
    if (models.empty()) throw fmm::DataError("build-models: no selected user has checkins");

    fmm::mobility::save_models_json(args.out, models, args.width, args.height);
    manifest.output(args.out);
    std::cout << "built " << models.size() << " models\n";

    manifest.config("seed_user", args.seed_user);
    manifest.config("users", args.users);
    manifest.config("transitive", args.transitive);
    manifest.config("merge_radius_m", args.merge_radius);
    manifest.config("width", args.width);
    manifest.config("height", args.height);
    manifest.write(args.out + ".manifest.json");
    return 0;
}

struct GenArgs {
    std::string models, out;
    bool rwp = false;
    std::string format = "csv";
    double duration = 10000.0;
    // FMM options
    std::string speed_policy = "fixed";
    double speed = 5.0, dwell = 60.0;
    bool weighted_start = false;
    // RWP options
    double width = 2000.0, height = 2000.0;
    double min_speed = 0.0, max_speed = 5.0, pause = 0.0;
    std::size_t nodes = 15;
};

int cmd_gen(const GenArgs& args, std::uint64_t seed) {
    Manifest manifest("gen", seed);
    std::vector<std::vector<fmm::mobility::Waypoint>> traces;
    double width = args.width;
    double height = args.height;

    if (args.rwp) {
        fmm::mobility::RwpConfig config;
        config.width = args.width;
        config.height = args.height;
        config.min_speed = args.min_speed;
        config.max_speed = args.max_speed;
        config.pause_s = args.pause;
        config.duration_s = args.duration;
        for (std::size_t i = 0; i < args.nodes; ++i) {
            traces.push_back(fmm::mobility::generate_rwp_trace(config, fmm::derive_seed(seed, i)));
        }
        manifest.config("model", "rwp");
        manifest.config("min_speed", args.min_speed);
        manifest.config("max_speed", args.max_speed);
        manifest.config("pause_s", args.pause);
        manifest.config("nodes", args.nodes);
    } else {
        manifest.input(args.models);
        const auto file = fmm::mobility::load_models_json(args.models);
        width = file.field_width;
        height = file.field_height;
        fmm::mobility::SpeedPolicy policy;
        policy.kind = args.speed_policy == "temporal" ? fmm::mobility::SpeedPolicy::Kind::Temporal
                                                      : fmm::mobility::SpeedPolicy::Kind::Fixed;
        policy.fixed_speed = args.speed;
        policy.dwell_s = args.dwell;
        for (std::size_t i = 0; i < file.models.size(); ++i) {
            traces.push_back(fmm::mobility::generate_fmm_trace(
                file.models[i], args.duration, policy, fmm::derive_seed(seed, i),
                args.weighted_start));
        }
        manifest.config("model", "fmm");
        manifest.config("speed_policy", args.speed_policy);
        manifest.config("speed", args.speed);
        manifest.config("dwell_s", args.dwell);
    }

    std::ostringstream text;
    if (args.format == "ns2") {
        fmm::mobility::export_ns2(text, traces, width, height);
    } else if (args.format == "csv") {
        fmm::mobility::export_csv(text, traces, width, height);
    } else {
        throw std::invalid_argument("gen: unknown format '" + args.format + "' (use ns2 or csv)");
    }
    atomic_write(args.out, text.str());
    manifest.output(args.out);

    manifest.config("duration_s", args.duration);
    manifest.config("width", width);
    manifest.config("height", height);
    manifest.config("format", args.format);
    manifest.write(args.out + ".manifest.json");
    return 0;
}

struct SimulateArgs {
    std::string traces, compare, config_file, out_prefix;
    // Flag overrides; negative means "not set on the command line".
    double duration = -1, width = -1, height = -1, radio_range = -1, tick = -1;
    std::string grid;
    bool pairwise = false;
};

fmm::simnet::SimConfig resolve_sim_config(const SimulateArgs& args, std::uint64_t seed,
                                          Manifest& manifest) {
    fmm::simnet::SimConfig config;
    config.rng_seed = seed;

    if (!args.config_file.empty()) {
        manifest.input(args.config_file);
        static const std::map<std::string, int> known = {
            {"simulation_time", 0}, {"width", 1},      {"length", 2},    {"height", 2},
            {"radio_range", 3},     {"tick", 4},       {"grid_rows", 5}, {"grid_cols", 6},
            {"seed", 7},            {"nodes", 8},
        };
        for (const auto& [key, value] : load_config_file(args.config_file)) {
            auto it = known.find(key);
            if (it == known.end()) {
                throw std::invalid_argument("simulate: unknown config key '" + key + "'");
            }
            switch (it->second) {
                case 0: config.duration_s = std::stod(value); break;
                case 1: config.width = std::stod(value); break;
                case 2: config.height = std::stod(value); break;
                case 3: config.radio_range_m = std::stod(value); break;
                case 4: config.tick_s = std::stod(value); break;
                case 5: config.grid_rows = std::stoi(value); break;
                case 6: config.grid_cols = std::stoi(value); break;
                case 7: config.rng_seed = std::stoull(value); break;
                case 8: break; // node count comes from the trace file
            }
            manifest.config("file:" + key, value);
        }
    }
    if (args.duration > 0) config.duration_s = args.duration;
    if (args.width > 0) config.width = args.width;
    if (args.height > 0) config.height = args.height;
    if (args.radio_range > 0) config.radio_range_m = args.radio_range;
    if (args.tick > 0) config.tick_s = args.tick;
    if (!args.grid.empty()) {
        int rows, cols;
        if (std::sscanf(args.grid.c_str(), "%dx%d", &rows, &cols) != 2) {
            throw std::invalid_argument("simulate: --grid expects ROWSxCOLS, e.g. 10x10");
        }
        config.grid_rows = rows;
        config.grid_cols = cols;
    }
    config.pairwise_contention = args.pairwise;

    manifest.config("duration_s", config.duration_s);
    manifest.config("width", config.width);
    manifest.config("height", config.height);
    manifest.config("radio_range_m", config.radio_range_m);
    manifest.config("tick_s", config.tick_s);
    manifest.config("grid_rows", config.grid_rows);
    manifest.config("grid_cols", config.grid_cols);
    manifest.config("pairwise_contention", config.pairwise_contention);
    return config;
}

std::vector<std::vector<fmm::mobility::Waypoint>> load_traces(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fmm::IoError("cannot open trace file: " + path);
    return fmm::mobility::parse_trace_csv(in);
}

void write_report_files(const std::string& prefix, const fmm::simnet::SimReport& report,
                        Manifest& manifest) {
    std::ostringstream rep;
    fmm::simnet::write_report_csv(rep, report);
    atomic_write(prefix + "_report.csv", rep.str());
    manifest.output(prefix + "_report.csv");

    std::ostringstream heat;
    fmm::simnet::grid_heatmap_csv(heat, report.grid);
    atomic_write(prefix + "_heatmap.csv", heat.str());
    manifest.output(prefix + "_heatmap.csv");
}

int cmd_simulate(const SimulateArgs& args, std::uint64_t seed) {
    Manifest manifest("simulate", seed);
    manifest.input(args.traces);
    auto config = resolve_sim_config(args, seed, manifest);
    const auto traces = load_traces(args.traces);

    if (args.compare.empty()) {
        const auto report = fmm::simnet::run_simulation(traces, config);
        write_report_files(args.out_prefix, report, manifest);
        std::cout << "total backoffs: " << report.total_backoffs << '\n';
    } else {
        manifest.input(args.compare);
        const auto other = load_traces(args.compare);
        const auto cmp = fmm::simnet::compare_models(traces, other, config);
        write_report_files(args.out_prefix + "_a", cmp.first, manifest);
        write_report_files(args.out_prefix + "_b", cmp.second, manifest);

        std::ostringstream diff;
        diff << "row,col,backoffs_a,backoffs_b,backoff_diff\n";
        for (int r = 0; r < cmp.first.grid.rows; ++r) {
            for (int c = 0; c < cmp.first.grid.cols; ++c) {
                const auto a = cmp.first.grid.backoff_at(r, c);
                const auto b = cmp.second.grid.backoff_at(r, c);
                diff << r << ',' << c << ',' << a << ',' << b << ','
                     << (static_cast<long long>(a) - static_cast<long long>(b)) << '\n';
            }
        }
        atomic_write(args.out_prefix + "_compare.csv", diff.str());
        manifest.output(args.out_prefix + "_compare.csv");

        char line[160];
        std::snprintf(line, sizeof(line), "backoffs a=%llu b=%llu ratio=%.4f\n",
                      static_cast<unsigned long long>(cmp.first.total_backoffs),
                      static_cast<unsigned long long>(cmp.second.total_backoffs),
                      cmp.backoff_ratio);
        std::cout << line;
    }
    manifest.write(args.out_prefix + ".manifest.json");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Friendship mobility model toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "Master RNG seed (fans out per purpose)")->capture_default_str();

    IngestArgs ingest;
    auto* sc_ingest = app.add_subcommand("ingest", "Ingest checkin/edge files into a snapshot");
    sc_ingest->add_option("--checkins", ingest.checkins, "Checkin TSV (user,ts,lat,lng[,loc])");
    sc_ingest->add_option("--edges", ingest.edges, "Edge TSV (user,user)");
    sc_ingest->add_option("--snapshot", ingest.snapshot, "Snapshot output path")->required();
    sc_ingest->add_option("--summary", ingest.summary, "Summary CSV path");
    sc_ingest->add_option("--col-user", ingest.cols.user, "User column index");
    sc_ingest->add_option("--col-time", ingest.cols.timestamp, "Timestamp column index");
    sc_ingest->add_option("--col-lat", ingest.cols.lat, "Latitude column index");
    sc_ingest->add_option("--col-lng", ingest.cols.lng, "Longitude column index");
    sc_ingest->add_option("--col-loc", ingest.cols.location_id, "Location id column index (-1 none)");

    AnalyzeArgs analyze;
    auto* sc_analyze = app.add_subcommand("analyze", "Pair features and friendship-distance curve");
    sc_analyze->add_option("--snapshot", analyze.snapshot, "Snapshot path")->required();
    sc_analyze->add_option("--pairs", analyze.pairs, "Pairs per class")->capture_default_str();
    sc_analyze->add_option("--bins", analyze.bins, "Comma list of km bin edges")->capture_default_str();
    sc_analyze->add_option("--time-eps", analyze.time_eps, "Match window seconds")->capture_default_str();
    sc_analyze->add_option("--space-eps", analyze.space_eps, "Match window km")->capture_default_str();
    sc_analyze->add_option("--out-prefix", analyze.out_prefix, "Output prefix")->required();

    EstimateArgs estimate;
    auto* sc_estimate = app.add_subcommand("estimate", "Collision-counting population estimate");
    sc_estimate->add_option("--snapshot", estimate.snapshot, "Snapshot path")->required();
    sc_estimate->add_option("--samples", estimate.samples, "Number of samples r")->capture_default_str();
    sc_estimate->add_option("--sample-size", estimate.sample_size, "Draws per sample")->capture_default_str();
    sc_estimate->add_option("--out", estimate.out, "Report CSV path")->required();

    BuildModelsArgs build;
    auto* sc_build = app.add_subcommand("build-models", "Build per-user Markov mobility models");
    sc_build->add_option("--snapshot", build.snapshot, "Snapshot path")->required();
    sc_build->add_option("--user", build.seed_user, "Seed user: build for this user plus friends");
    sc_build->add_option("--users", build.users, "Explicit comma list of user ids");
    sc_build->add_flag("--transitive", build.transitive, "Follow friendship transitively");
    sc_build->add_option("--merge-radius", build.merge_radius, "State merge radius, meters")->capture_default_str();
    sc_build->add_option("--width", build.width, "Field width, meters")->capture_default_str();
    sc_build->add_option("--height", build.height, "Field height, meters")->capture_default_str();
    sc_build->add_option("--out", build.out, "Model JSON output")->required();

    GenArgs gen;
    auto* sc_gen = app.add_subcommand("gen", "Generate FMM or RWP traces");
    sc_gen->add_option("--models", gen.models, "Model JSON (FMM mode)");
    sc_gen->add_flag("--rwp", gen.rwp, "Random waypoint mode");
    sc_gen->add_option("--duration", gen.duration, "Trace duration, seconds")->capture_default_str();
    sc_gen->add_option("--format", gen.format, "ns2 or csv")->capture_default_str();
    sc_gen->add_option("--out", gen.out, "Trace output path")->required();
    sc_gen->add_option("--speed-policy", gen.speed_policy, "fixed or temporal (FMM)")->capture_default_str();
    sc_gen->add_option("--speed", gen.speed, "Fixed speed m/s (FMM)")->capture_default_str();
    sc_gen->add_option("--dwell", gen.dwell, "Self-transition dwell seconds (FMM)")->capture_default_str();
    sc_gen->add_flag("--weighted-start", gen.weighted_start, "Occurrence-weighted start state (FMM)");
    sc_gen->add_option("--width", gen.width, "Field width (RWP)")->capture_default_str();
    sc_gen->add_option("--height", gen.height, "Field height (RWP)")->capture_default_str();
    sc_gen->add_option("--min-speed", gen.min_speed, "Min speed m/s (RWP)")->capture_default_str();
    sc_gen->add_option("--max-speed", gen.max_speed, "Max speed m/s (RWP)")->capture_default_str();
    sc_gen->add_option("--pause", gen.pause, "Pause seconds (RWP)")->capture_default_str();
    sc_gen->add_option("--nodes", gen.nodes, "Node count (RWP)")->capture_default_str();

    SimulateArgs sim;
    auto* sc_sim = app.add_subcommand("simulate", "Run the contention simulation on traces");
    sc_sim->add_option("--traces", sim.traces, "Trace CSV")->required();
    sc_sim->add_option("--compare", sim.compare, "Second trace CSV to compare against");
    sc_sim->add_option("--config", sim.config_file, "key = value config file");
    sc_sim->add_option("--duration", sim.duration, "Simulation seconds");
    sc_sim->add_option("--width", sim.width, "Field width, meters");
    sc_sim->add_option("--height", sim.height, "Field height, meters");
    sc_sim->add_option("--radio-range", sim.radio_range, "Radio range, meters");
    sc_sim->add_option("--tick", sim.tick, "Tick seconds");
    sc_sim->add_option("--grid", sim.grid, "Subarea grid ROWSxCOLS");
    sc_sim->add_flag("--pairwise", sim.pairwise, "Pairwise-only contention");
    sc_sim->add_option("--out-prefix", sim.out_prefix, "Output prefix")->required();

    try {
        app.parse(argc, argv);
        if (sc_ingest->parsed()) return cmd_ingest(ingest, seed);
        if (sc_analyze->parsed()) return cmd_analyze(analyze, seed);
        if (sc_estimate->parsed()) return cmd_estimate(estimate, seed);
        if (sc_build->parsed()) {
            if (build.seed_user.empty() == build.users.empty()) {
                throw std::invalid_argument("build-models: give exactly one of --user or --users");
            }
            return cmd_build_models(build);
        }
        if (sc_gen->parsed()) {
            if (gen.rwp == !gen.models.empty()) {
                throw std::invalid_argument("gen: give exactly one of --models or --rwp");
            }
            return cmd_gen(gen, seed);
        }
        if (sc_sim->parsed()) return cmd_simulate(sim, seed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const fmm::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const fmm::ContractError& e) {
        std::cerr << "contract violation: " << e.what() << '\n';
        return kExitContract;
    } catch (const fmm::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
