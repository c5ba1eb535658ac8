#include "bnav/netio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "bnav/policies.hpp"
#include "json.hpp"

namespace bnav {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::optional<double> parse_double(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    double v = 0.0;
    const char* begin = cell.data();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw ValidationError("not a number: '" + cell + "'");
    return v;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

const std::vector<std::string> kNetworkColumns{
    "from_id",        "to_id",     "length_m", "incline_rad", "speed_limit_mps",
    "mean_speed_mps", "speed_var", "lat1",     "lon1",        "lat2",
    "lon2"};

}  // namespace

VertexId Network::vertex(const std::string& name) const {
    const auto it = index.find(name);
    if (it == index.end()) throw ValidationError("unknown vertex id '" + name + "'");
    return it->second;
}

Network parse_network(std::istream& in, const std::string& origin) {
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw ValidationError(origin + ":" + std::to_string(line_no) + ": " + what);
    };

    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_csv(line);
            break;
        }
    }
    if (header.size() != 7 && header.size() != 11) fail("expected 7 or 11 header columns");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] != kNetworkColumns[i])
            fail("header column " + std::to_string(i + 1) + " should be '" + kNetworkColumns[i] +
                 "'");
    }

    struct Row {
        std::string from, to;
        EdgeAttributes attrs;
    };
    std::vector<Row> rows;
    Network net;
    auto intern = [&net](const std::string& name) {
        const auto [it, inserted] =
            net.index.emplace(name, static_cast<VertexId>(net.vertex_names.size()));
        if (inserted) net.vertex_names.push_back(name);
        return it->second;
    };

    std::set<std::pair<VertexId, VertexId>> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            fail("expected " + std::to_string(header.size()) + " columns, found " +
                 std::to_string(cells.size()));
        if (cells[0].empty() || cells[1].empty()) fail("missing vertex id");
        try {
            Row row{cells[0], cells[1], {}};
            const auto length = parse_double(cells[2]);
            const auto incline = parse_double(cells[3]);
            if (!length || !incline) fail("length_m and incline_rad are required");
            row.attrs.length_m = *length;
            row.attrs.incline_rad = *incline;
            row.attrs.speed_limit_mps = parse_double(cells[4]).value_or(kNaN);
            row.attrs.mean_speed_mps = parse_double(cells[5]).value_or(kNaN);
            row.attrs.speed_var = parse_double(cells[6]).value_or(kNaN);
            if (cells.size() == 11) {
                row.attrs.lat1 = parse_double(cells[7]);
                row.attrs.lon1 = parse_double(cells[8]);
                row.attrs.lat2 = parse_double(cells[9]);
                row.attrs.lon2 = parse_double(cells[10]);
            }
            const VertexId a = intern(row.from), b = intern(row.to);
            if (a == b) fail("self-loop on vertex '" + row.from + "'");
            if (!seen.emplace(a, b).second)
                warn(origin + ":" + std::to_string(line_no) + ": duplicate edge " + row.from +
                     "->" + row.to);
            rows.push_back(std::move(row));
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            if (msg.starts_with(origin + ":")) throw;
            fail(msg);
        }
    }

    net.graph = RoadGraph(net.vertex_names.size());
    for (auto& row : rows)
        net.graph.add_edge(net.index.at(row.from), net.index.at(row.to), std::move(row.attrs));
    return net;
}

Network load_network(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_network(in, path.string());
}

void write_network(std::ostream& out, const Network& net) {
    bool coords = false;
    for (const Edge& e : net.graph.edges())
        coords = coords || e.attrs.lat1 || e.attrs.lon1 || e.attrs.lat2 || e.attrs.lon2;

    const std::size_t columns = coords ? 11 : 7;
    for (std::size_t i = 0; i < columns; ++i) out << (i ? "," : "") << kNetworkColumns[i];
    out << '\n';
    for (const Edge& e : net.graph.edges()) {
        const auto& a = e.attrs;
        out << net.vertex_names.at(e.from) << ',' << net.vertex_names.at(e.to) << ','
            << format_double(a.length_m) << ',' << format_double(a.incline_rad) << ','
            << format_double(a.speed_limit_mps) << ',' << format_double(a.mean_speed_mps) << ','
            << format_double(a.speed_var);
        if (coords) {
            out << ',' << format_optional(a.lat1) << ',' << format_optional(a.lon1) << ','
                << format_optional(a.lat2) << ',' << format_optional(a.lon2);
        }
        out << '\n';
    }
}

void save_network(const std::filesystem::path& path, const Network& net) {
    auto out = open_output(path);
    write_network(out, net);
}

Network make_network(RoadGraph graph) {
    Network net;
    for (std::size_t v = 0; v < graph.num_vertices(); ++v) {
        net.vertex_names.push_back(std::to_string(v));
        net.index.emplace(net.vertex_names.back(), static_cast<VertexId>(v));
    }
    net.graph = std::move(graph);
    return net;
}

void save_ground_truth(const std::filesystem::path& path, const Network& net,
                       const GroundTruth& truth, std::span<const GaussianBelief> prior) {
    if (truth.num_edges() != net.graph.num_edges() || prior.size() != net.graph.num_edges())
        throw ValidationError("ground truth does not match the network");
    auto out = open_output(path);
    out << "edge,from_id,to_id,theta_star,sigma,prior_mu,prior_var,noise_var\n";
    for (std::size_t i = 0; i < net.graph.num_edges(); ++i) {
        const Edge& e = net.graph.edge(static_cast<EdgeId>(i));
        out << i << ',' << net.vertex_names.at(e.from) << ',' << net.vertex_names.at(e.to) << ','
            << format_double(truth.theta_star[i]) << ',' << format_double(truth.sigma[i]) << ','
            << format_double(prior[i].mu) << ',' << format_double(prior[i].var) << ','
            << format_double(prior[i].noise_var) << '\n';
    }
}

TruthFile load_ground_truth(const std::filesystem::path& path, const Network& net) {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + what);
    };
    if (!std::getline(in, line)) fail("empty file");
    ++line_no;
    if (trim(line) != "edge,from_id,to_id,theta_star,sigma,prior_mu,prior_var,noise_var")
        fail("unexpected header");

    const std::size_t m = net.graph.num_edges();
    TruthFile out;
    out.truth.theta_star.assign(m, kNaN);
    out.truth.sigma.assign(m, kNaN);
    out.prior.resize(m);
    std::vector<bool> filled(m, false);
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 8) fail("expected 8 columns");
        std::size_t edge = 0;
        const auto [ptr, ec] =
            std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), edge);
        if (ec != std::errc{} || ptr != cells[0].data() + cells[0].size() || edge >= m)
            fail("bad edge index '" + cells[0] + "'");
        const Edge& e = net.graph.edge(static_cast<EdgeId>(edge));
        if (net.vertex_names[e.from] != cells[1] || net.vertex_names[e.to] != cells[2])
            fail("edge endpoints do not match the network");
        std::array<double, 5> v{};
        for (std::size_t i = 0; i < 5; ++i) {
            const auto d = parse_double(cells[3 + i]);
            if (!d) fail("missing value");
            v[i] = *d;
        }
        out.truth.theta_star[edge] = v[0];
        out.truth.sigma[edge] = v[1];
        out.prior[edge] = {v[2], v[3], v[4]};
        filled[edge] = true;
    }
    if (std::find(filled.begin(), filled.end(), false) != filled.end())
        throw ValidationError(path.string() + ": not every edge has a ground-truth row");
    return out;
}

std::string to_string(ModelKind kind) {
    return kind == ModelKind::RectifiedGaussian ? "rectified" : "log-gaussian";
}

ModelKind parse_model(const std::string& name) {
    if (name == "rectified" || name == "rectified-gaussian") return ModelKind::RectifiedGaussian;
    if (name == "log-gaussian" || name == "lognormal") return ModelKind::LogGaussian;
    throw ValidationError("unknown model kind '" + name + "'");
}

void ScenarioConfig::validate() const {
    if (scenarios.empty()) throw ValidationError("config: no scenario given");
    for (const auto& s : scenarios) {
        if (s != "synthetic") parse_scenario(s);
    }
    if (policies.empty()) throw ValidationError("config: no policy given");
    if (horizon == 0) throw ValidationError("config: T must be at least 1");
    if (agents.empty()) throw ValidationError("config: K must not be empty");
    if (seeds.empty()) throw ValidationError("config: no seeds given");
    if (delay == 0) throw ValidationError("config: delay must be at least 1");
    if (jobs == 0) throw ValidationError("config: jobs must be at least 1");
    if (mc_samples == 0) throw ValidationError("config: mc_samples must be at least 1");
    if (!(theta_factor > 0.0)) throw ValidationError("config: theta_factor must be positive");
    if (!(noise_factor > 0.0)) throw ValidationError("config: noise_factor must be positive");
    vehicle.validate();
    if (synthetic) synthetic->validate();

    for (const auto& name : policies) {
        const auto policy = RunPolicy::parse(name);
        for (std::size_t k : agents) {
            if (k == 0) throw ValidationError("config: K must be at least 1");
            if (policy.mode == FeedbackMode::Batched) {
                if (horizon % k != 0)
                    throw ValidationError("config: batch size K=" + std::to_string(k) +
                                          " does not divide T=" + std::to_string(horizon));
                if (batches && *batches * k != horizon)
                    throw ValidationError("config: B*K must equal T for batched policies");
            }
            if (policy.mode == FeedbackMode::Delayed && k != 1)
                throw ValidationError("config: qpmd policies run a single agent (K=1)");
        }
    }
}

namespace {

using nlohmann::json;

std::size_t as_count(const json& v) {
    if (!v.is_number_unsigned()) throw ValidationError("config: expected a non-negative integer");
    return v.get<std::size_t>();
}

template <typename T>
std::vector<T> scalar_or_list(const json& v) {
    const auto one = [](const json& x) {
        if constexpr (std::is_integral_v<T>) return static_cast<T>(as_count(x));
        else return x.get<T>();
    };
    std::vector<T> out;
    if (v.is_array()) {
        for (const auto& x : v) out.push_back(one(x));
    } else {
        out.push_back(one(v));
    }
    return out;
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ValidationError("config: unknown key '" + where + key + "'");
    }
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("config: top level must be an object");
    reject_unknown(doc,
                   {"scenario", "policy", "model", "T", "K", "B", "delay", "seeds", "network",
                    "truth", "synthetic", "source", "target", "theta_factor", "noise_factor",
                    "vehicle", "mc_samples", "output_dir", "jobs"},
                   "");

    ScenarioConfig c;
    try {
        if (doc.contains("scenario")) c.scenarios = scalar_or_list<std::string>(doc["scenario"]);
        if (doc.contains("policy")) c.policies = scalar_or_list<std::string>(doc["policy"]);
        if (doc.contains("model")) c.model = parse_model(doc["model"].get<std::string>());
        if (doc.contains("T")) c.horizon = as_count(doc["T"]);
        if (doc.contains("K")) c.agents = scalar_or_list<std::size_t>(doc["K"]);
        if (doc.contains("B")) c.batches = as_count(doc["B"]);
        if (doc.contains("delay")) c.delay = as_count(doc["delay"]);
        if (doc.contains("seeds")) c.seeds = scalar_or_list<std::uint64_t>(doc["seeds"]);
        if (doc.contains("network")) c.network = doc["network"].get<std::string>();
        if (doc.contains("truth")) c.truth = doc["truth"].get<std::string>();
        if (doc.contains("synthetic")) {
            const auto& s = doc["synthetic"];
            reject_unknown(s, {"n", "o"}, "synthetic.");
            SynthSpec spec;
            spec.n = as_count(s.at("n"));
            spec.o = as_count(s.at("o"));
            c.synthetic = spec;
        }
        if (doc.contains("source")) c.source = doc["source"].get<std::string>();
        if (doc.contains("target")) c.target = doc["target"].get<std::string>();
        if (doc.contains("theta_factor")) c.theta_factor = doc["theta_factor"].get<double>();
        if (doc.contains("noise_factor")) c.noise_factor = doc["noise_factor"].get<double>();
        if (doc.contains("vehicle")) {
            const auto& v = doc["vehicle"];
            reject_unknown(v,
                           {"mass_kg", "front_area_m2", "drag_coeff", "rolling_coeff",
                            "efficiency_traction", "efficiency_regen", "gravity", "air_density"},
                           "vehicle.");
            auto& vp = c.vehicle;
            vp.mass_kg = v.value("mass_kg", vp.mass_kg);
            vp.front_area_m2 = v.value("front_area_m2", vp.front_area_m2);
            vp.drag_coeff = v.value("drag_coeff", vp.drag_coeff);
            vp.rolling_coeff = v.value("rolling_coeff", vp.rolling_coeff);
            vp.efficiency_traction = v.value("efficiency_traction", vp.efficiency_traction);
            vp.efficiency_regen = v.value("efficiency_regen", vp.efficiency_regen);
            vp.gravity = v.value("gravity", vp.gravity);
            vp.air_density = v.value("air_density", vp.air_density);
        }
        if (doc.contains("mc_samples")) c.mc_samples = as_count(doc["mc_samples"]);
        if (doc.contains("output_dir")) c.output_dir = doc["output_dir"].get<std::string>();
        if (doc.contains("jobs")) c.jobs = as_count(doc["jobs"]);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }

    std::vector<std::uint64_t> unique;
    for (auto s : c.seeds) {
        if (std::find(unique.begin(), unique.end(), s) == unique.end()) {
            unique.push_back(s);
        } else {
            warn("config: duplicate seed " + std::to_string(s) + " dropped");
        }
    }
    c.seeds = std::move(unique);

    c.validate();
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string dump_config(const ScenarioConfig& c) {
    json doc;
    doc["scenario"] = c.scenarios;
    doc["policy"] = c.policies;
    doc["model"] = to_string(c.model);
    doc["T"] = c.horizon;
    doc["K"] = c.agents;
    if (c.batches) doc["B"] = *c.batches;
    doc["delay"] = c.delay;
    doc["seeds"] = c.seeds;
    if (!c.network.empty()) doc["network"] = c.network;
    if (!c.truth.empty()) doc["truth"] = c.truth;
    if (c.synthetic) doc["synthetic"] = {{"n", c.synthetic->n}, {"o", c.synthetic->o}};
    if (!c.source.empty()) doc["source"] = c.source;
    if (!c.target.empty()) doc["target"] = c.target;
    doc["theta_factor"] = c.theta_factor;
    doc["noise_factor"] = c.noise_factor;
    const auto& vp = c.vehicle;
    doc["vehicle"] = {{"mass_kg", vp.mass_kg},
                      {"front_area_m2", vp.front_area_m2},
                      {"drag_coeff", vp.drag_coeff},
                      {"rolling_coeff", vp.rolling_coeff},
                      {"efficiency_traction", vp.efficiency_traction},
                      {"efficiency_regen", vp.efficiency_regen},
                      {"gravity", vp.gravity},
                      {"air_density", vp.air_density}};
    doc["mc_samples"] = c.mc_samples;
    doc["output_dir"] = c.output_dir;
    doc["jobs"] = c.jobs;
    return doc.dump(2) + "\n";
}

}  // namespace bnav
