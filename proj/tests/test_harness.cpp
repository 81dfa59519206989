// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rcabf/harness.hpp"

using namespace rcabf;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_point()
{
    ExperimentConfig c = psf_preset(false);
    c.probe = ProbeGeometry::small();
    c.point_depths = {30e-3};
    c.grid_center = {0.0, 0.0, 30e-3};
    c.grid_dims = {25, 25, 21};
    c.grid_spacing = {0.3e-3, 0.3e-3, 0.05e-3};
    return c;
}

struct TempDir {
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() /
               ("rcabf_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
                std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing applies keys and rejects unknown ones")
{
    const auto c = parse_config(R"(
[probe]
rows = 32
cols = 48
pitch_mm = 0.3
[schedule]
angles = 12
range_deg = 20
[phantom]
kind = cyst
[noise]
enabled = false
[run]
methods = das,rcfmas
workers = 3
)",
                                ExperimentConfig{});
    CHECK(c.probe.num_rows == 32);
    CHECK(c.probe.num_cols == 48);
    CHECK(c.probe.pitch == doctest::Approx(0.3e-3));
    CHECK(c.n_angles == 12);
    CHECK(c.angle_range == doctest::Approx(20.0 * std::numbers::pi / 180.0));
    CHECK(c.phantom == PhantomKind::Cyst);
    CHECK_FALSE(c.noise);
    CHECK(c.methods == std::vector<Method>{Method::DAS, Method::RCFMAS});
    CHECK(c.run.workers == 3);

    CHECK_THROWS_AS(parse_config("[probe]\nrowz = 3\n", {}), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("[probe]\nrows = many\n", {}), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("[phantom]\nkind = donut\n", {}), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("[run]\nmethods = dmas\n", {}), std::invalid_argument);
    CHECK_THROWS_AS(load_config("/nonexistent/rcabf.ini", {}), std::runtime_error);
}

TEST_CASE("canonical config round-trips and the hash tracks every field")
{
    const ExperimentConfig base = cyst_preset(false);
    const std::string text = canonical_config(base);
    const auto again = parse_config(text, ExperimentConfig{});
    CHECK(canonical_config(again) == text);
    CHECK(config_hash(again) == config_hash(base));
    CHECK(config_hash(base).size() == 16);

    std::vector<ExperimentConfig> variants(6, base);
    variants[0].n_angles = 12;
    variants[1].seed = 2;
    variants[2].probe.pitch *= 1.01;
    variants[3].grid_dims[1] = 7;
    variants[4].pair_mode = PairMode::RealRf;
    variants[5].cyst.radius = 2.5e-3;
    for (const auto& v : variants)
        CHECK(config_hash(v) != config_hash(base));

    ExperimentConfig runtime_only = base;
    runtime_only.run.workers = 8;
    runtime_only.run.output_dir = "elsewhere";
    CHECK(config_hash(runtime_only) == config_hash(base));
}

TEST_CASE("presets validate and bad configs are rejected before compute")
{
    CHECK_NOTHROW(psf_preset(false).validate());
    CHECK_NOTHROW(psf_preset(true).validate());
    CHECK_NOTHROW(cyst_preset(false).validate());
    CHECK_NOTHROW(cyst_preset(true).validate());

    auto c = tiny_point();
    c.n_angles = 7;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = tiny_point();
    c.lpf_cutoff = 6e6;
    c.decimation = 4;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = tiny_point();
    c.methods.clear();
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = cyst_preset(false);
    c.cyst.radius = 7e-3;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = cyst_preset(false);
    c.cyst.density = 2.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("cyst regions of interest sit in the right places")
{
    const auto c = cyst_preset(false);
    const auto rois = cyst_rois(c);
    REQUIRE(rois.size() == c.cyst.depths.size());
    for (std::size_t i = 0; i < rois.size(); ++i) {
        CHECK(rois[i].depth == c.cyst.depths[i]);
        CHECK(rois[i].high_scatter.center[0] == c.cyst.high_scatter_x);
        CHECK(rois[i].noise.center[0] == c.cyst.anechoic_x);
        CHECK(rois[i].tissue.center[0] == c.tissue_x);
        CHECK(rois[i].high_scatter.half_extents[0] == doctest::Approx(c.roi_fraction * c.cyst.radius));
        CHECK(rois[i].high_scatter.role == RoiRole::Tissue1);
        CHECK(rois[i].noise.role == RoiRole::Noise);
    }
}

TEST_CASE("point experiment returns one volume and one report per method")
{
    auto c = tiny_point();
    const auto r = run_experiment(c);
    REQUIRE(r.methods.size() == 3);
    REQUIRE(r.reports.size() == 3);
    CHECK(r.n_events == 10);
    CHECK(r.mask.has_value());
    CHECK(r.find(Method::FMAS)->envelope.pairs_per_voxel == 45);
    CHECK(r.find(Method::RCFMAS)->envelope.pairs_per_voxel == 25);
    for (const auto& rep : r.reports) {
        REQUIRE(rep.pir.has_value());
        CHECK(*rep.pir >= 0.0);
        CHECK(*rep.pir <= 1.0);
        CHECK(rep.configuration == "angles=10 range_deg=10");
    }

    c.methods = {Method::DAS};
    const auto only = run_experiment(c);
    CHECK(only.methods.size() == 1);
    CHECK(only.find(Method::FMAS) == nullptr);
    CHECK(only.find(Method::RCFMAS) == nullptr);
}

TEST_CASE("identical seeds give identical exports")
{
    auto c = tiny_point();
    c.methods = {Method::RCFMAS};
    TempDir dir;
    c.run.workers = 1;
    export_volume(run_experiment(c).methods[0].envelope.values, dir.path / "a");
    c.run.workers = 4;
    export_volume(run_experiment(c).methods[0].envelope.values, dir.path / "b");
    CHECK(slurp(dir.path / "a.raw") == slurp(dir.path / "b.raw"));
    c.seed = 99;
    export_volume(run_experiment(c).methods[0].envelope.values, dir.path / "c");
    CHECK(slurp(dir.path / "a.raw") != slurp(dir.path / "c.raw"));
}

TEST_CASE("sweep covers the full cross product with exact pair counts")
{
    auto c = tiny_point();
    c.grid_dims = {15, 15, 13};
    c.grid_spacing = {0.4e-3, 0.4e-3, 0.1e-3};
    const auto s = run_sweep(c, {6, 10}, {10.0, 20.0});
    REQUIRE(s.rows.size() == 12);
    for (const auto& row : s.rows) {
        const std::size_t half = row.n_angles / 2;
        const std::size_t expect = row.method == Method::FMAS     ? pair_count_fmas(row.n_angles)
                                   : row.method == Method::RCFMAS ? pair_count_rcfmas(half, half)
                                                                  : 0;
        CHECK(row.pair_count == expect);
        CHECK(row.runtime_s >= 0.0);
    }
    CHECK_THROWS_AS(run_sweep(c, {}, {10.0}), std::invalid_argument);
    CHECK_THROWS_AS(run_sweep(c, {6, 7}, {10.0}), std::invalid_argument);
}

TEST_CASE("compounding time grows with the pair count")
{
    auto c = tiny_point();
    c.grid_dims = {41, 41, 41};
    c.n_angles = 30;
    c.run.workers = 1;
    c.methods = {Method::RCFMAS, Method::FMAS};
    const auto rf = simulate(c);
    const auto r = reconstruct(c, rf);
    const auto* f = r.find(Method::FMAS);
    const auto* rc = r.find(Method::RCFMAS);
    CHECK(f->envelope.pairs_per_voxel == 435);
    CHECK(rc->envelope.pairs_per_voxel == 225);
    CHECK(f->compound_seconds > rc->compound_seconds);
}

TEST_CASE("volume export writes float32 with a sidecar and reads back")
{
    TempDir dir;
    const auto g = VoxelGrid::centered({0.0, 0.0, 10e-3}, {2, 2, 2}, {1e-3, 2e-3, 3e-3});
    Volume<double> v(g);
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = 0.5 * double(i) - 1.25;
    export_volume(v, dir.path / "vol", {{"method", "das"}, {"config_hash", "abc"}});
    CHECK(fs::file_size(dir.path / "vol.raw") == 32);

    Metadata meta;
    const auto back = read_volume(dir.path / "vol", &meta);
    CHECK(back.grid().dims == g.dims);
    for (int a = 0; a < 3; ++a) {
        CHECK(back.grid().spacing[a] == doctest::Approx(g.spacing[a]));
        CHECK(back.grid().origin[a] == doctest::Approx(g.origin[a]));
    }
    for (std::size_t i = 0; i < v.size(); ++i)
        CHECK(back[i] == v[i]);
    CHECK(meta["method"] == "das");
    CHECK(meta["config_hash"] == "abc");
    CHECK(meta["byte_order"] == "little");

    const std::string raw = slurp(dir.path / "vol.raw");
    float first;
    std::memcpy(&first, raw.data(), 4);
    CHECK(first == -1.25f);
}

TEST_CASE("slices map the dynamic range onto 8 bits")
{
    TempDir dir;
    const auto g = VoxelGrid::centered({0.0, 0.0, 10e-3}, {5, 3, 4}, {1e-3, 1e-3, 1e-3});
    Volume<double> db(g, -60.0);
    db(2, 1, 0) = 0.0;
    db(4, 1, 3) = -30.0;
    export_slice(db, SlicePlane::XZ, 1, 60.0, dir.path / "s.pgm");
    const std::string img = slurp(dir.path / "s.pgm");
    const std::string header = "P5\n5 4\n255\n";
    REQUIRE(img.size() == header.size() + 20);
    CHECK(img.substr(0, header.size()) == header);
    const auto* px = reinterpret_cast<const unsigned char*>(img.data() + header.size());
    CHECK(px[0 * 5 + 2] == 255);
    CHECK(px[3 * 5 + 4] == 128);
    CHECK(px[0] == 0);
    CHECK_THROWS_AS(export_slice(db, SlicePlane::XY, 4, 60.0, dir.path / "t.pgm"), std::out_of_range);

    // A mirror-symmetric volume gives a mirror-symmetric image.
    Volume<double> sym(g);
    for (std::size_t iz = 0; iz < 4; ++iz)
        for (std::size_t iy = 0; iy < 3; ++iy)
            for (std::size_t ix = 0; ix < 5; ++ix)
                sym(ix, iy, iz) = -10.0 * std::abs(double(ix) - 2.0) - double(iz);
    export_slice(sym, SlicePlane::XZ, 1, 60.0, dir.path / "m.pgm");
    const std::string m = slurp(dir.path / "m.pgm");
    const auto* q = reinterpret_cast<const unsigned char*>(m.data() + header.size());
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t col = 0; col < 5; ++col)
            CHECK(q[r * 5 + col] == q[r * 5 + 4 - col]);
}

TEST_CASE("profiles list one row per voxel along the axis")
{
    TempDir dir;
    const auto g = VoxelGrid::centered({0.0, 0.0, 10e-3}, {7, 3, 3}, {1e-3, 1e-3, 1e-3});
    Volume<double> db(g, -40.0);
    db(3, 1, 1) = 0.0;
    export_profile(db, 0, {3, 1, 1}, dir.path / "p.csv");
    std::ifstream in(dir.path / "p.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "position_mm,amplitude_db");
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    REQUIRE(rows.size() == 7);
    CHECK(rows[3].first == doctest::Approx(0.0));
    CHECK(rows[3].second == 0.0);
    for (const auto& r : rows)
        CHECK(r.second <= 0.0);
}

TEST_CASE("depth study gives one row per depth per method")
{
    auto c = cyst_preset(false);
    c.probe = ProbeGeometry::small();
    c.cyst.depths = {20e-3};
    c.cyst.lo = {-3.2e-3, -3.2e-3, 14e-3};
    c.cyst.hi = {3.2e-3, 3.2e-3, 26e-3};
    c.cyst.anechoic_x = -3e-3;
    c.cyst.high_scatter_x = 3e-3;
    c.cyst.radius = 1.5e-3;
    c.cyst.density = 5.0;
    c.tissue_x = 0.0;
    c.grid_center = {0.0, 0.0, 20e-3};
    c.grid_dims = {41, 3, 41};
    c.grid_spacing = {0.2e-3, 0.2e-3, 0.1e-3};
    const auto r = run_experiment(c);
    CHECK(r.reports.size() == 3);
    const auto rows = depth_study(c, r);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
        CHECK(row.depth == 20e-3);
        CHECK(row.tcr_db.values.size() == c.roi_splits);
        CHECK(row.tnr_db.values.size() == c.roi_splits);
    }

    TempDir dir;
    write_depth_study_csv(rows, dir.path / "d.csv");
    std::ifstream in(dir.path / "d.csv");
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        ++n;
    CHECK(n == 4);
}
