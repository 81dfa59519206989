// SPDX-License-Identifier: Apache-2.0
//
// rcabf: point-spread, cyst, sweep and depth-study runs from the command line.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rcabf/harness.hpp"

namespace fs = std::filesystem;
using namespace rcabf;

namespace {

struct Overrides {
    std::string config;
    bool full = false;
    std::optional<std::string> angles;
    std::optional<std::string> range_deg;
    std::vector<std::string> methods;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> workers;
    bool no_noise = false;
    std::optional<double> snr_db;
    std::optional<double> depth_mm;
};

void add_common(CLI::App* cmd, Overrides& o, bool sweep)
{
    cmd->add_option("-c,--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
    cmd->add_flag("--full", o.full, "Full-scale preset (fine grid, whole phantom)");
    cmd->add_option("--angles", o.angles,
                    sweep ? "Total transmissions: N, a,b,c or start:stop:step"
                          : "Total transmissions (rows + columns)");
    cmd->add_option("--range-deg", o.range_deg,
                    sweep ? "Angle range in degrees: R, a,b,c or start:stop:step"
                          : "Full steering range in degrees");
    cmd->add_option("-m,--method", o.methods, "das, fmas or rcfmas (repeatable)");
    cmd->add_option("--seed", o.seed, "Random seed for phantom and noise");
    cmd->add_option("-o,--out", o.out, "Output directory");
    cmd->add_option("-j,--workers", o.workers, "Worker threads (0 = all cores)");
    cmd->add_flag("--no-noise", o.no_noise, "Skip additive noise");
    cmd->add_option("--snr-db", o.snr_db, "Noise level in dB");
}

template <typename T>
std::vector<T> parse_axis(const std::string& spec, const char* what)
{
    std::vector<T> out;
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(std::string("bad ") + what + " value '" + s + "'");
        return v;
    };
    if (const auto c1 = spec.find(':'); c1 != std::string::npos) {
        const auto c2 = spec.find(':', c1 + 1);
        if (c2 == std::string::npos)
            throw std::invalid_argument(std::string(what) + " range needs start:stop:step");
        const double start = number(spec.substr(0, c1));
        const double stop = number(spec.substr(c1 + 1, c2 - c1 - 1));
        const double step = number(spec.substr(c2 + 1));
        if (!(step > 0.0) || stop < start)
            throw std::invalid_argument(std::string(what) + " range must increase with a positive step");
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i)
            out.push_back(static_cast<T>(start + static_cast<double>(i) * step));
        return out;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(static_cast<T>(number(item)));
    if (out.empty())
        throw std::invalid_argument(std::string("empty ") + what + " list");
    return out;
}

std::size_t parse_count(const std::string& s)
{
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size() || v < 0)
        throw std::invalid_argument("--angles expects a non-negative integer, got '" + s + "'");
    return static_cast<std::size_t>(v);
}

ExperimentConfig build_config(ExperimentConfig base, const Overrides& o, bool sweep)
{
    if (!o.config.empty())
        base = load_config(o.config, std::move(base));
    if (!sweep) {
        if (o.angles)
            base.n_angles = parse_count(*o.angles);
        if (o.range_deg)
            base.angle_range = std::stod(*o.range_deg) * std::numbers::pi / 180.0;
    }
    if (!o.methods.empty()) {
        base.methods.clear();
        for (const auto& m : o.methods)
            base.methods.push_back(method_from_string(m));
    }
    if (o.seed)
        base.seed = *o.seed;
    if (o.out)
        base.run.output_dir = *o.out;
    if (o.workers)
        base.run.workers = *o.workers;
    if (o.no_noise)
        base.noise = false;
    if (o.snr_db)
        base.snr_db = *o.snr_db;
    if (o.depth_mm) {
        base.point_depths = {*o.depth_mm * 1e-3};
        base.grid_center[2] = *o.depth_mm * 1e-3;
    }
    return base;
}

fs::path prepare_output(const ExperimentConfig& config)
{
    const fs::path dir = config.run.output_dir;
    fs::create_directories(dir);
    std::ofstream(dir / "config.ini") << canonical_config(config);
    return dir;
}

void export_method(const ExperimentConfig& config, const MethodResult& mr, const fs::path& dir,
                   bool point)
{
    const std::string name = to_string(mr.envelope.method);
    export_volume(mr.envelope.values, dir / name,
                  {{"method", name},
                   {"config_hash", config_hash(config)},
                   {"quantity", "envelope"},
                   {"pairs_per_voxel", std::to_string(mr.envelope.pairs_per_voxel)}});
    const Volume<double> db = log_compress(mr.envelope, config.dynamic_range_db);
    const Peak peak = find_peak(mr.envelope.values);
    const auto& g = db.grid();
    if (point) {
        export_slice(db, SlicePlane::XY, peak.index[2], config.dynamic_range_db, dir / (name + "_xy.pgm"));
        export_slice(db, SlicePlane::XZ, peak.index[1], config.dynamic_range_db, dir / (name + "_xz.pgm"));
        export_profile(db, 0, peak.index, dir / (name + "_profile_x.csv"));
        export_profile(db, 2, peak.index, dir / (name + "_profile_z.csv"));
    } else {
        export_slice(db, SlicePlane::XZ, g.dims[1] / 2, config.dynamic_range_db, dir / (name + "_xz.pgm"));
    }
}

void print_reports(const std::vector<MetricsReport>& reports)
{
    auto cell = [](const std::optional<double>& v, double scale) {
        char buf[32];
        if (v)
            std::snprintf(buf, sizeof buf, "%10.4g", *v * scale);
        else
            std::snprintf(buf, sizeof buf, "%10s", "-");
        return std::string(buf);
    };
    std::printf("%-7s %8s %10s %10s %10s %10s %10s %10s %10s\n", "method", "depth_mm", "fwhm_x_mm",
                "fwhm_y_mm", "fwhm_z_mm", "pir", "pmslr_db", "tcr_db", "tnr_db");
    for (const auto& r : reports)
        std::printf("%-7s %8.1f %s %s %s %s %s %s %s\n", r.method.c_str(), r.depth * 1e3,
                    cell(r.fwhm_x, 1e3).c_str(), cell(r.fwhm_y, 1e3).c_str(),
                    cell(r.fwhm_z, 1e3).c_str(), cell(r.pir, 1).c_str(),
                    cell(r.pmslr_db, 1).c_str(), cell(r.tcr_db, 1).c_str(),
                    cell(r.tnr_db, 1).c_str());
}

int run_single(const ExperimentConfig& config, bool depth_table)
{
    config.validate();
    const ExperimentResult result = run_experiment(config);
    std::vector<DepthStudyRow> rows;
    if (depth_table)
        rows = depth_study(config, result);

    const fs::path dir = prepare_output(config);
    write_metrics_csv(result.reports, dir / "metrics.csv");
    for (const auto& mr : result.methods)
        export_method(config, mr, dir, config.phantom == PhantomKind::Point);
    if (depth_table)
        write_depth_study_csv(rows, dir / "depth_study.csv");
    print_reports(result.reports);
    return 0;
}

int run_sweep_cmd(const ExperimentConfig& config, const Overrides& o)
{
    const auto angles = parse_axis<std::size_t>(o.angles.value_or("6:30:4"), "angles");
    const auto ranges = parse_axis<double>(o.range_deg.value_or("5:45:5"), "range");
    const SweepResult sweep = run_sweep(config, angles, ranges);
    const fs::path dir = prepare_output(config);
    write_sweep_csv(sweep, dir / "sweep.csv");
    std::printf("%zu sweep rows written to %s\n", sweep.rows.size(), (dir / "sweep.csv").c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Row-column array beamforming experiments"};
    app.require_subcommand(1);

    Overrides psf_o, cyst_o, sweep_o, depth_o;
    auto* psf = app.add_subcommand("psf", "Point-target PSF, metrics and slices");
    add_common(psf, psf_o, false);
    psf->add_option("--depth-mm", psf_o.depth_mm, "Target depth (grid follows)");
    auto* cyst = app.add_subcommand("cyst", "Cyst phantom, contrast metrics and slices");
    add_common(cyst, cyst_o, false);
    auto* sweep = app.add_subcommand("sweep", "Angle count x angle range sweep on the point target");
    add_common(sweep, sweep_o, true);
    auto* depth = app.add_subcommand("depth-study", "Cyst TCR and TNR per depth with sub-region errors");
    add_common(depth, depth_o, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (psf->parsed())
            return run_single(build_config(psf_preset(psf_o.full), psf_o, false), false);
        if (cyst->parsed())
            return run_single(build_config(cyst_preset(cyst_o.full), cyst_o, false), false);
        if (depth->parsed())
            return run_single(build_config(cyst_preset(depth_o.full), depth_o, false), true);
        if (sweep->parsed())
            return run_sweep_cmd(build_config(psf_preset(sweep_o.full), sweep_o, true), sweep_o);
    } catch (const std::exception& e) {
        std::cerr << "rcabf: error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
