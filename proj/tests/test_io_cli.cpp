#include "partopt/cli.hpp"
#include "partopt/errors.hpp"
#include "partopt/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace partopt;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("partopt_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
    args.insert(args.begin(), "partopt");
    std::ostringstream out, err;
    const int rc = cli::run(args, out, err);
    if (out_text) *out_text = out.str() + err.str();
    return rc;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

} // namespace

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 123456789.125, 1e300}) CHECK(std::stod(io::fmt(v)) == v);
    CHECK(io::fmt(-0.0) == "0");
    CHECK(io::fmt(2.0) == "2");
}

TEST_CASE("points CSV round trip") {
    const fs::path d = scratch_dir("csv");
    const std::vector<Point2> pts{{0.1, 0.2}, {1.0 / 3.0, -4.0}, {1e-9, 7.25}};
    io::write_points_csv(d / "p.csv", pts);
    CHECK(io::read_points_csv(d / "p.csv") == pts);
    write_text(d / "bad.csv", "x,y\n1,2\n3,oops\n");
    CHECK_THROWS_AS(io::read_points_csv(d / "bad.csv"), ValidationError);
    fs::remove_all(d);
}

TEST_CASE("shape JSON round trip") {
    const fs::path d = scratch_dir("json");
    RadialShape s = RadialShape::disk(1.0, 3);
    s.a = {0.1, -0.05, 1.0 / 7.0};
    s.b = {0.0, 0.02, -0.01};
    io::write_shape_json(d / "s.json", s);
    const RadialShape r = io::read_shape_json(d / "s.json");
    CHECK(r.coefficients() == s.coefficients());
    write_text(d / "extra.json", R"({"a0": 1, "a": [], "b": [], "c": 2})");
    CHECK_THROWS_AS(io::read_shape_json(d / "extra.json"), ValidationError);
    write_text(d / "neg.json", R"({"a0": 1, "a": [2.0], "b": [0.0]})");
    CHECK_THROWS_AS(io::read_shape_json(d / "neg.json"), NonPositiveRadius);
    fs::remove_all(d);
}

TEST_CASE("run configuration") {
    const fs::path d = scratch_dir("config");
    write_text(d / "ok.json", R"({"epsilon": 0.08, "n": 3, "equal": true, "seed": 5})");
    const cli::RunConfig c = cli::load_config(d / "ok.json");
    CHECK(c.epsilon == 0.08);
    CHECK(c.seed == 5);
    CHECK(c.resolved_fractions().size() == 3);
    write_text(d / "unknown.json", R"({"epsilon": 0.08, "colour": "red"})");
    CHECK_THROWS_AS(cli::load_config(d / "unknown.json"), ValidationError);
    write_text(d / "type.json", R"({"niter": "many"})");
    CHECK_THROWS_AS(cli::load_config(d / "type.json"), ValidationError);

    cli::RunConfig bad;
    bad.fractions = {0.5, 0.4};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad.fractions = {0.5, 0.5};
    bad.n = 3;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    cli::RunConfig eps;
    eps.epsilon = 0.0;
    CHECK_THROWS_AS(eps.validate(), ValidationError);
    fs::remove_all(d);
}

TEST_CASE("exit codes") {
    const fs::path d = scratch_dir("exit");
    CHECK(run_cli({"--help"}) == 0);
    CHECK(run_cli({}) == 2);
    CHECK(run_cli({"no-such-command"}) == 2);
    CHECK(run_cli({"partition", "--fractions", "0.5,0.4", "--out", (d / "p").string()}) == 2);
    write_text(d / "cfg.json", R"({"bogus": 1})");
    CHECK(run_cli({"fence", "--config", (d / "cfg.json").string()}) == 2);
    CHECK(run_cli({"fence", "--epsilon", "-1"}) == 2);
    CHECK(run_cli({"voronoi-init", "--polygon", "hexagon", "--n", "3"}) == 2);
    fs::remove_all(d);
}

TEST_CASE("voronoi-init writes its outputs deterministically") {
    const fs::path d = scratch_dir("vinit");
    std::string text;
    REQUIRE(run_cli({"voronoi-init", "--polygon", "square", "--n", "6", "--equal", "--seed", "3", "--restarts", "2",
                     "--out", (d / "a").string()},
                    &text) == 0);
    REQUIRE(run_cli({"voronoi-init", "--polygon", "square", "--n", "6", "--equal", "--seed", "3", "--restarts", "2",
                     "--out", (d / "b").string()}) == 0);
    for (const char* f : {"points.csv", "areas.csv", "cells.svg"}) CHECK(fs::exists(d / "a" / f));
    CHECK(slurp(d / "a" / "points.csv") == slurp(d / "b" / "points.csv"));
    CHECK(slurp(d / "a" / "areas.csv") == slurp(d / "b" / "areas.csv"));

    REQUIRE(run_cli({"voronoi-init", "--polygon", "square", "--n", "1", "--out", (d / "one").string()}) == 0);
    const auto one = io::read_points_csv(d / "one" / "points.csv");
    REQUIRE(one.size() == 1);
    CHECK(one[0].x == doctest::Approx(0.5));
    fs::remove_all(d);
}

TEST_CASE("fence on a coarse square") {
    const fs::path d = scratch_dir("fence");
    std::string text;
    REQUIRE(run_cli({"fence", "--polygon", "square", "--epsilon", "0.1", "--c", "0.5", "--out", d.string()}, &text) == 0);
    for (const char* f : {"density.csv", "energy_history.csv", "density.svg"}) CHECK(fs::exists(d / f));
    CHECK(text.find("energy/gamma") != std::string::npos);
    fs::remove_all(d);
}

TEST_CASE("perimtrack finds the kink and is deterministic") {
    const fs::path d = scratch_dir("track");
    std::string text;
    REQUIRE(run_cli({"perimtrack", "--out", (d / "a").string()}, &text) == 0);
    REQUIRE(run_cli({"perimtrack", "--out", (d / "b").string()}) == 0);
    CHECK(text.find("kink at t = 2.0000") != std::string::npos);
    CHECK(slurp(d / "a" / "perimeter.csv") == slurp(d / "b" / "perimeter.csv"));
    fs::remove_all(d);
}

namespace {

double value_after(const std::string& text, const std::string& key) {
    const auto at = text.find(key + " ");
    REQUIRE(at != std::string::npos);
    return std::stod(text.substr(at + key.size() + 1));
}

} // namespace

TEST_CASE("partition of the disk into three equal phases") {
    const fs::path d = scratch_dir("partition");
    std::string text;
    REQUIRE(run_cli({"partition", "--polygon", "disk", "--n", "3", "--equal", "--out", d.string()}, &text) == 0);
    // Total interface length of the Y-partition is 3; each interface carries
    // two transitions, so the length estimate is energy / (2 gamma).
    const double length = value_after(text, "perimeter estimate");
    CHECK(length >= 2.8);
    CHECK(length <= 3.05);
    CHECK(value_after(text, "energy/gamma") == doctest::Approx(2.0 * length).epsilon(1e-3));
    fs::remove_all(d);
}

TEST_CASE("fence on the disk: diameter and a shorter chord") {
    const fs::path d = scratch_dir("fence_disk");
    std::string half, quarter;
    REQUIRE(run_cli({"fence", "--polygon", "disk", "--c", "0.5", "--out", (d / "a").string()}, &half) == 0);
    REQUIRE(run_cli({"fence", "--polygon", "disk", "--c", "0.25", "--out", (d / "b").string()}, &quarter) == 0);
    CHECK(value_after(half, "energy/gamma") == doctest::Approx(2.0).epsilon(0.05));
    CHECK(value_after(quarter, "energy/gamma") < 2.0);
    fs::remove_all(d);
}
