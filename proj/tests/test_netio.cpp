#include <cmath>
#include <filesystem>
#include <sstream>

#include "bnav/netio.hpp"
#include "bnav/synthgen.hpp"
#include "doctest.h"

using namespace bnav;
namespace fs = std::filesystem;

namespace {

const char* kHeader = "from_id,to_id,length_m,incline_rad,speed_limit_mps,mean_speed_mps,speed_var\n";

Network parse(const std::string& text) {
    std::istringstream in(text);
    return parse_network(in, "test.csv");
}

}  // namespace

TEST_CASE("two-edge network") {
    const auto net = parse(std::string(kHeader) + "a,b,100,0.01,13.89,10,2\nb,c,250.5,-0.02,8.33,,\n");
    CHECK(net.graph.num_vertices() == 3);
    CHECK(net.graph.num_edges() == 2);
    CHECK(net.vertex("c") == 2);
    CHECK(net.graph.edge(1).attrs.length_m == 250.5);
    CHECK(std::isnan(net.graph.edge(1).attrs.mean_speed_mps));
    CHECK_FALSE(net.graph.edge(0).attrs.lat1.has_value());
    CHECK_THROWS_AS(net.vertex("zz"), ValidationError);
}

TEST_CASE("malformed network files") {
    CHECK_THROWS_AS(parse("from,to\n"), ValidationError);
    CHECK_THROWS_AS(parse(""), ValidationError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "a,b,100,0\n"), ValidationError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "a,a,100,0,1,1,1\n"), ValidationError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "a,b,,0,1,1,1\n"), ValidationError);
    try {
        parse(std::string(kHeader) + "a,b,100,0,1,1,1\nb,c,ten,0,1,1,1\n");
        FAIL("expected a parse error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("test.csv:3") != std::string::npos);
    }
}

TEST_CASE("network round trip is exact") {
    const std::string text =
        "from_id,to_id,length_m,incline_rad,speed_limit_mps,mean_speed_mps,speed_var,lat1,lon1,lat2,lon2\n"
        "x,y,123.456789012345,0.0012345678901234,13.89,11.1,0.7,57.1,11.9,57.2,11.95\n"
        "y,x,123.456789012345,-0.0012345678901234,13.89,,1.5,57.2,11.95,57.1,11.9\n";
    const auto net = parse(text);
    std::ostringstream out;
    write_network(out, net);
    const auto back = parse(out.str());
    REQUIRE(back.graph.num_edges() == 2);
    for (EdgeId e = 0; e < 2; ++e) {
        const auto& a = net.graph.edge(e).attrs;
        const auto& b = back.graph.edge(e).attrs;
        CHECK(a.length_m == b.length_m);
        CHECK(a.incline_rad == b.incline_rad);
        CHECK(a.speed_var == b.speed_var);
        CHECK(a.lat2 == b.lat2);
    }
    CHECK(std::isnan(back.graph.edge(1).attrs.mean_speed_mps));
    CHECK(back.vertex_names == net.vertex_names);
}

TEST_CASE("ground truth round trip") {
    const auto synth = generate({6, 10, 2});
    const auto net = make_network(synth.graph);
    const fs::path dir = fs::temp_directory_path() / "bnav_truth_test";
    save_network(dir / "network.csv", net);
    save_ground_truth(dir / "truth.csv", net, synth.truth, synth.prior);

    const auto loaded = load_network(dir / "network.csv");
    const auto file = load_ground_truth(dir / "truth.csv", loaded);
    CHECK(file.truth.theta_star == synth.truth.theta_star);
    CHECK(file.truth.sigma == synth.truth.sigma);
    REQUIRE(file.prior.size() == synth.prior.size());
    for (std::size_t i = 0; i < synth.prior.size(); ++i) {
        CHECK(file.prior[i].mu == synth.prior[i].mu);
        CHECK(file.prior[i].var == synth.prior[i].var);
    }

    const auto other = make_network(generate({6, 11, 2}).graph);
    CHECK_THROWS_AS(load_ground_truth(dir / "truth.csv", other), ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("config defaults") {
    const auto c = parse_config("{}");
    CHECK(c.theta_factor == 0.25);
    CHECK(c.noise_factor == 0.1);
    CHECK(c.horizon == 2000);
    CHECK(c.model == ModelKind::RectifiedGaussian);
    CHECK(c.vehicle.mass_kg == 14750.0);
    CHECK(c.agents == std::vector<std::size_t>{1});
}

TEST_CASE("config parsing") {
    const auto c = parse_config(R"({"scenario": "correlated", "policy": ["ts", "greedy"],
        "T": 100, "K": [1, 2], "seeds": 4, "model": "log-gaussian",
        "vehicle": {"mass_kg": 12000}, "synthetic": {"n": 10, "o": 20}})");
    CHECK(c.scenarios == std::vector<std::string>{"correlated"});
    CHECK(c.policies.size() == 2);
    CHECK(c.seeds == std::vector<std::uint64_t>{4});
    CHECK(c.model == ModelKind::LogGaussian);
    CHECK(c.vehicle.mass_kg == 12000.0);
    CHECK(c.synthetic->o == 20);

    const auto again = parse_config(dump_config(c));
    CHECK(dump_config(again) == dump_config(c));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config(R"({"horizon": 10})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"vehicle": {"wheels": 6}})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"policy": "batched-ts", "T": 10, "K": 3})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"policy": "batched-ts", "T": 10, "K": 5, "B": 3})"),
                    ValidationError);
    CHECK_NOTHROW(parse_config(R"({"policy": "batched-ts", "T": 10, "K": 5, "B": 2})"));
    CHECK_THROWS_AS(parse_config(R"({"policy": "qpmd-ts", "K": 2})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"T": -5})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"T": 2.5})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"scenario": "rush-hour"})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"policy": "ucb1"})"), ValidationError);
    CHECK_THROWS_AS(parse_config("{not json"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"synthetic": {"n": 4, "o": 99}})"), ValidationError);
}

TEST_CASE("duplicate seeds are dropped") {
    const auto c = parse_config(R"({"seeds": [3, 1, 3, 2, 1]})");
    CHECK(c.seeds == std::vector<std::uint64_t>{3, 1, 2});
}

TEST_CASE("model names") {
    CHECK(parse_model("rectified") == ModelKind::RectifiedGaussian);
    CHECK(parse_model("lognormal") == ModelKind::LogGaussian);
    CHECK(to_string(ModelKind::LogGaussian) == "log-gaussian");
    CHECK_THROWS_AS(parse_model("gamma"), ValidationError);
}
