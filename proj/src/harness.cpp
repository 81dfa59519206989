// SPDX-License-Identifier: Apache-2.0

#include "rcabf/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rcabf/beamform.hpp"

namespace rcabf {

namespace {

constexpr double kMm = 1e-3;
constexpr double kMHz = 1e6;
constexpr double kDeg = std::numbers::pi / 180.0;

std::string fmt_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

double parse_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': '" + v + "' is not a number");
    }
}

std::uint64_t parse_uint(const std::string& key, const std::string& v)
{
    try {
        if (v.empty() || v.front() == '-')
            throw std::invalid_argument(v);
        std::size_t used = 0;
        const auto n = std::stoull(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': '" + v +
                                    "' is not a non-negative integer");
    }
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw std::invalid_argument("config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v, double scale)
{
    std::vector<double> out;
    for (const auto& item : split_list(v))
        out.push_back(parse_double(key, item) * scale);
    return out;
}

Vec3 parse_vec3(const std::string& key, const std::string& v, double scale)
{
    const auto d = parse_doubles(key, v, scale);
    if (d.size() != 3)
        throw std::invalid_argument("config key '" + key + "' needs three comma-separated values");
    return {d[0], d[1], d[2]};
}

std::string join(const std::vector<double>& v, double scale)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + fmt_double(v[i] / scale);
    return out;
}

std::string join(const Vec3& v, double scale)
{
    return join(std::vector<double>(v.begin(), v.end()), scale);
}

struct Field {
    std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)> set;
    std::function<std::string(const ExperimentConfig&)> get;  // empty: not canonical
};

template <typename T>
Field scaled(T ExperimentConfig::*member, double scale)
{
    return {[member, scale](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.*member = parse_double(k, v) * scale;
            },
            [member, scale](const ExperimentConfig& c) { return fmt_double(c.*member / scale); }};
}

template <typename T>
Field count(T ExperimentConfig::*member)
{
    return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.*member = static_cast<T>(parse_uint(k, v));
            },
            [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

#define RCABF_PROBE_SCALED(name, scale)                                                        \
    Field                                                                                      \
    {                                                                                          \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {                  \
            c.probe.name = parse_double(k, v) * (scale);                                       \
        },                                                                                     \
            [](const ExperimentConfig& c) { return fmt_double(c.probe.name / (scale)); }       \
    }

#define RCABF_CYST_SCALED(name, scale)                                                         \
    Field                                                                                      \
    {                                                                                          \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {                  \
            c.cyst.name = parse_double(k, v) * (scale);                                        \
        },                                                                                     \
            [](const ExperimentConfig& c) { return fmt_double(c.cyst.name / (scale)); }        \
    }

const std::map<std::string, Field>& fields()
{
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        t["probe.rows"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                               c.probe.num_rows = parse_uint(k, v);
                           },
                           [](const ExperimentConfig& c) { return std::to_string(c.probe.num_rows); }};
        t["probe.cols"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                               c.probe.num_cols = parse_uint(k, v);
                           },
                           [](const ExperimentConfig& c) { return std::to_string(c.probe.num_cols); }};
        t["probe.pitch_mm"] = RCABF_PROBE_SCALED(pitch, kMm);
        t["probe.center_frequency_mhz"] = RCABF_PROBE_SCALED(center_frequency, kMHz);
        t["probe.bandwidth_mhz"] = RCABF_PROBE_SCALED(bandwidth, kMHz);
        t["probe.sampling_frequency_mhz"] = RCABF_PROBE_SCALED(sampling_frequency, kMHz);
        t["probe.sound_speed"] = RCABF_PROBE_SCALED(sound_speed, 1.0);

        t["schedule.angles"] = count(&ExperimentConfig::n_angles);
        t["schedule.range_deg"] = scaled(&ExperimentConfig::angle_range, kDeg);

        t["phantom.kind"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                                 if (v == "point")
                                     c.phantom = PhantomKind::Point;
                                 else if (v == "cyst")
                                     c.phantom = PhantomKind::Cyst;
                                 else
                                     throw std::invalid_argument("config key '" + k +
                                                                 "': unknown phantom '" + v + "'");
                             },
                             [](const ExperimentConfig& c) {
                                 return std::string(c.phantom == PhantomKind::Point ? "point"
                                                                                    : "cyst");
                             }};
        t["phantom.depths_mm"] = {
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.point_depths = parse_doubles(k, v, kMm);
            },
            [](const ExperimentConfig& c) { return join(c.point_depths, kMm); }};
        t["phantom.cyst_depths_mm"] = {
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.cyst.depths = parse_doubles(k, v, kMm);
            },
            [](const ExperimentConfig& c) { return join(c.cyst.depths, kMm); }};
        t["phantom.radius_mm"] = RCABF_CYST_SCALED(radius, kMm);
        t["phantom.anechoic_x_mm"] = RCABF_CYST_SCALED(anechoic_x, kMm);
        t["phantom.high_scatter_x_mm"] = RCABF_CYST_SCALED(high_scatter_x, kMm);
        t["phantom.high_scatter_gain"] = RCABF_CYST_SCALED(high_scatter_gain, 1.0);
        t["phantom.density"] = RCABF_CYST_SCALED(density, 1.0);
        t["phantom.band_half_height_mm"] = RCABF_CYST_SCALED(band_half_height, kMm);
        t["phantom.resolution_cell_mm3"] = RCABF_CYST_SCALED(resolution_cell, kMm * kMm * kMm);
        t["phantom.box_lo_mm"] = {[](ExperimentConfig& c, const std::string& k,
                                     const std::string& v) { c.cyst.lo = parse_vec3(k, v, kMm); },
                                  [](const ExperimentConfig& c) { return join(c.cyst.lo, kMm); }};
        t["phantom.box_hi_mm"] = {[](ExperimentConfig& c, const std::string& k,
                                     const std::string& v) { c.cyst.hi = parse_vec3(k, v, kMm); },
                                  [](const ExperimentConfig& c) { return join(c.cyst.hi, kMm); }};

        t["grid.center_mm"] = {[](ExperimentConfig& c, const std::string& k,
                                  const std::string& v) { c.grid_center = parse_vec3(k, v, kMm); },
                               [](const ExperimentConfig& c) { return join(c.grid_center, kMm); }};
        t["grid.spacing_mm"] = {
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.grid_spacing = parse_vec3(k, v, kMm);
            },
            [](const ExperimentConfig& c) { return join(c.grid_spacing, kMm); }};
        t["grid.dims"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                              const auto items = split_list(v);
                              if (items.size() != 3)
                                  throw std::invalid_argument("config key '" + k +
                                                              "' needs three counts");
                              for (int a = 0; a < 3; ++a)
                                  c.grid_dims[a] = parse_uint(k, items[a]);
                          },
                          [](const ExperimentConfig& c) {
                              return std::to_string(c.grid_dims[0]) + "," +
                                     std::to_string(c.grid_dims[1]) + "," +
                                     std::to_string(c.grid_dims[2]);
                          }};

        t["noise.enabled"] = {[](ExperimentConfig& c, const std::string& k,
                                 const std::string& v) { c.noise = parse_bool(k, v); },
                              [](const ExperimentConfig& c) {
                                  return std::string(c.noise ? "true" : "false");
                              }};
        t["noise.snr_db"] = scaled(&ExperimentConfig::snr_db, 1.0);
        t["noise.seed"] = count(&ExperimentConfig::seed);

        t["processing.tx_apod_alpha"] = scaled(&ExperimentConfig::tx_apod_alpha, 1.0);
        t["processing.rx_apod_alpha"] = scaled(&ExperimentConfig::rx_apod_alpha, 1.0);
        t["processing.lpf_cutoff_mhz"] = scaled(&ExperimentConfig::lpf_cutoff, kMHz);
        t["processing.lpf_transition_mhz"] = scaled(&ExperimentConfig::lpf_transition, kMHz);
        t["processing.decimation"] = count(&ExperimentConfig::decimation);
        t["processing.pulse_oversampling"] = count(&ExperimentConfig::pulse_oversampling);
        t["processing.dynamic_range_db"] = scaled(&ExperimentConfig::dynamic_range_db, 1.0);
        t["processing.pair_mode"] = {
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                if (v == "complex")
                    c.pair_mode = PairMode::ComplexBaseband;
                else if (v == "real")
                    c.pair_mode = PairMode::RealRf;
                else
                    throw std::invalid_argument("config key '" + k + "': unknown mode '" + v + "'");
            },
            [](const ExperimentConfig& c) {
                return std::string(c.pair_mode == PairMode::RealRf ? "real" : "complex");
            }};

        t["roi.fraction"] = scaled(&ExperimentConfig::roi_fraction, 1.0);
        t["roi.half_y_mm"] = scaled(&ExperimentConfig::roi_half_y, kMm);
        t["roi.tissue_x_mm"] = scaled(&ExperimentConfig::tissue_x, kMm);
        t["roi.splits"] = count(&ExperimentConfig::roi_splits);

        t["run.methods"] = {[](ExperimentConfig& c, const std::string&, const std::string& v) {
                                c.methods.clear();
                                for (const auto& m : split_list(v))
                                    c.methods.push_back(method_from_string(m));
                            },
                            [](const ExperimentConfig& c) {
                                std::string out;
                                for (std::size_t i = 0; i < c.methods.size(); ++i)
                                    out += (i ? "," : "") + std::string(to_string(c.methods[i]));
                                return out;
                            }};
        t["run.workers"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                                c.run.workers = static_cast<unsigned>(parse_uint(k, v));
                            },
                            {}};
        t["run.output"] = {[](ExperimentConfig& c, const std::string&, const std::string& v) {
                               c.run.output_dir = v;
                           },
                           {}};
        return t;
    }();
    return table;
}

#undef RCABF_PROBE_SCALED
#undef RCABF_CYST_SCALED

}  // namespace

TransmitSchedule ExperimentConfig::schedule() const
{
    if (n_angles < 2 || n_angles % 2 != 0)
        throw std::invalid_argument("angle count must be even and at least 2 (rows + columns)");
    return make_schedule(n_angles / 2, angle_range);
}

PulseModel ExperimentConfig::pulse() const
{
    return PulseModel::from_probe(probe);
}

IqOptions ExperimentConfig::iq_options() const
{
    IqOptions o;
    o.carrier = probe.center_frequency;
    o.cutoff = lpf_cutoff;
    o.decimation = decimation;
    o.transition_width = lpf_transition;
    o.workers = run.workers;
    return o;
}

void ExperimentConfig::validate() const
{
    probe.validate();
    schedule();
    grid().validate();
    pulse().validate();
    for (double a : {tx_apod_alpha, rx_apod_alpha})
        if (!(a >= 0.0 && a <= 1.0))
            throw std::invalid_argument("apodization alpha must lie in [0, 1]");
    if (decimation < 1)
        throw std::invalid_argument("decimation must be at least 1");
    if (!(lpf_cutoff <= probe.sampling_frequency / (2.0 * static_cast<double>(decimation))))
        throw std::invalid_argument("low-pass cutoff exceeds the decimated Nyquist frequency");
    design_lowpass(lpf_cutoff, probe.sampling_frequency, lpf_transition);
    if (pulse_oversampling < 1)
        throw std::invalid_argument("pulse oversampling must be at least 1");
    if (!(dynamic_range_db > 0.0))
        throw std::invalid_argument("dynamic range must be positive");
    if (!std::isfinite(snr_db))
        throw std::invalid_argument("SNR must be finite");
    if (methods.empty())
        throw std::invalid_argument("no reconstruction method selected");

    if (phantom == PhantomKind::Point) {
        if (point_depths.empty())
            throw std::invalid_argument("point phantom needs at least one depth");
        for (double d : point_depths)
            if (!(d > 0.0))
                throw std::invalid_argument("point target depth must be positive");
    } else {
        if (cyst.depths.empty())
            throw std::invalid_argument("cyst phantom needs at least one tube depth");
        if (cyst.density < 5.0)
            throw std::invalid_argument("speckle needs at least 5 scatterers per resolution cell");
        if (roi_splits < 1)
            throw std::invalid_argument("ROI splits must be at least 1");
        if (!(roi_fraction > 0.0 && roi_fraction < 1.0))
            throw std::invalid_argument("ROI fraction must lie in (0, 1)");
        // Catches overlapping tubes and an unusable box without drawing scatterers.
        CystPhantomSpec probe_spec = cyst;
        probe_spec.density = 5.0;
        probe_spec.resolution_cell = 1.0;
        make_cyst_phantom(probe_spec, seed);
        const VoxelGrid g = grid();
        const Volume<double> empty(g, 1.0);
        for (const auto& r : cyst_rois(*this))
            for (const auto& box : {r.high_scatter, r.tissue, r.noise})
                roi_mean(empty, box);
    }
}

ExperimentConfig psf_preset(bool full)
{
    ExperimentConfig c;
    c.phantom = PhantomKind::Point;
    c.point_depths = {50e-3};
    c.grid_center = {0.0, 0.0, 50e-3};
    // Laterally the grid spans the aperture so the cross-shaped side lobes are
    // inside the field of view; odd counts put the target on a voxel.
    if (full) {
        c.grid_dims = {257, 257, 97};
        c.grid_spacing = {0.1e-3, 0.1e-3, 0.025e-3};
    } else {
        c.grid_dims = {129, 129, 49};
        c.grid_spacing = {0.2e-3, 0.2e-3, 0.05e-3};
    }
    return c;
}

ExperimentConfig cyst_preset(bool full)
{
    ExperimentConfig c;
    c.phantom = PhantomKind::Cyst;
    c.cyst = CystPhantomSpec{};
    const double half_aperture = 0.5 * c.probe.element_length(ElementSet::Rows);
    c.cyst.lo = {-half_aperture, -half_aperture, 10e-3};
    c.cyst.hi = {half_aperture, half_aperture, 80e-3};
    // Desk scale only draws speckle in slabs around the tube depths.
    c.cyst.band_half_height = full ? 0.0 : 4.5e-3;

    const double x_half = std::max(std::abs(c.cyst.anechoic_x), std::abs(c.cyst.high_scatter_x)) +
                          c.cyst.radius + 1.5e-3;
    const double z_lo = c.cyst.depths.front() - c.cyst.radius - 1e-3;
    const double z_hi = c.cyst.depths.back() + c.cyst.radius + 1e-3;
    c.grid_spacing = full ? Vec3{0.1e-3, 0.1e-3, 0.05e-3} : Vec3{0.2e-3, 0.2e-3, 0.1e-3};
    auto odd_count = [](double span, double step) {
        return 2 * static_cast<std::size_t>(std::ceil(0.5 * span / step)) + 1;
    };
    c.grid_dims = {odd_count(2.0 * x_half, c.grid_spacing[0]), full ? std::size_t{21} : std::size_t{5},
                   odd_count(z_hi - z_lo, c.grid_spacing[2])};
    c.grid_center = {0.0, 0.0, 0.5 * (z_lo + z_hi)};
    return c;
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    const auto& table = fields();
    for (const auto& [section, keys] : tree) {
        if (keys.empty() && !keys.data().empty())
            throw std::invalid_argument("config: key '" + section + "' outside any section");
        for (const auto& [key, node] : keys) {
            const std::string full = section + "." + key;
            const auto it = table.find(full);
            if (it == table.end())
                throw std::invalid_argument("config: unknown key '" + full + "'");
            it->second.set(base, full, trim(node.data()));
        }
    }
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string canonical_config(const ExperimentConfig& config)
{
    // Sections in table order (std::map keeps keys sorted).
    std::string out;
    std::string current;
    for (const auto& [key, field] : fields()) {
        if (!field.get)
            continue;
        const auto dot = key.find('.');
        const std::string section = key.substr(0, dot);
        if (section != current) {
            out += (out.empty() ? "[" : "\n[") + section + "]\n";
            current = section;
        }
        out += key.substr(dot + 1) + " = " + field.get(config) + "\n";
    }
    return out;
}

std::string config_hash(const ExperimentConfig& config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_config(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<CystRois> cyst_rois(const ExperimentConfig& config)
{
    std::vector<CystRois> out;
    const double hx = config.roi_fraction * config.cyst.radius;
    const Vec3 half{hx, config.roi_half_y, hx};
    for (double d : config.cyst.depths) {
        CystRois r;
        r.depth = d;
        r.high_scatter = {{config.cyst.high_scatter_x, 0.0, d}, half, RoiRole::Tissue1};
        r.tissue = {{config.tissue_x, 0.0, d}, half, RoiRole::Tissue};
        r.noise = {{config.cyst.anechoic_x, 0.0, d}, half, RoiRole::Noise};
        out.push_back(r);
    }
    return out;
}

const MethodResult* ExperimentResult::find(Method m) const
{
    for (const auto& r : methods)
        if (r.envelope.method == m)
            return &r;
    return nullptr;
}

Phantom build_phantom(const ExperimentConfig& config)
{
    if (config.phantom == PhantomKind::Point)
        return make_point_phantom(config.point_depths);
    CystPhantomSpec spec = config.cyst;
    if (spec.resolution_cell <= 0.0) {
        double mean_depth = 0.0;
        for (double d : spec.depths)
            mean_depth += d;
        mean_depth /= static_cast<double>(spec.depths.size());
        spec.resolution_cell = resolution_cell_volume(config.probe, mean_depth);
    }
    return make_cyst_phantom(spec, config.seed);
}

RfDataSet simulate(const ExperimentConfig& config)
{
    config.validate();
    const auto schedule = config.schedule();
    const auto pulse = config.pulse();
    SynthesisOptions opt;
    opt.window = acquisition_window(config.probe, schedule, config.grid(), pulse);
    opt.tx_apod_alpha = config.tx_apod_alpha;
    opt.pulse_oversampling = config.pulse_oversampling;
    opt.workers = config.run.workers;
    RfDataSet rf = simulate_rf(config.probe, build_phantom(config), schedule, pulse, opt);
    if (config.noise)
        rf = add_noise(rf, config.snr_db, config.seed);
    return rf;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename Fn>
std::optional<double> guarded(Fn&& fn)
{
    try {
        return fn();
    } catch (const std::domain_error&) {
        return std::nullopt;
    }
}

std::string describe(const ExperimentConfig& c)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "angles=%zu range_deg=%g", c.n_angles, c.angle_range / kDeg);
    return buf;
}

}  // namespace

ExperimentResult reconstruct(const ExperimentConfig& config, const RfDataSet& rf)
{
    config.validate();
    const unsigned workers = config.run.workers;
    const VoxelGrid grid = config.grid();
    const IqDataSet iq = iq_demodulate(rf, config.iq_options());
    const auto volumes = das_volumes(iq, grid, config.probe, {config.rx_apod_alpha, workers});

    ExperimentResult result;
    result.n_events = volumes.size();

    auto t0 = Clock::now();
    EnvelopeVolume das = coherent_compound(volumes, workers);
    const double das_seconds = seconds_since(t0);

    for (Method m : config.methods) {
        if (result.find(m))
            continue;
        MethodResult r;
        t0 = Clock::now();
        switch (m) {
        case Method::DAS:
            r.envelope = das;
            r.compound_seconds = das_seconds;
            break;
        case Method::FMAS:
            r.envelope = fmas(volumes, config.pair_mode, workers);
            r.compound_seconds = seconds_since(t0);
            break;
        case Method::RCFMAS:
            r.envelope = rc_fmas(volumes, config.pair_mode, workers);
            r.compound_seconds = seconds_since(t0);
            break;
        }
        result.methods.push_back(std::move(r));
    }

    if (config.phantom == PhantomKind::Point) {
        try {
            result.mask = fwhm_mask(das.values);
        } catch (const std::domain_error&) {
            result.mask.reset();
        }
        for (const auto& mr : result.methods) {
            const auto& env = mr.envelope.values;
            MetricsReport rep;
            rep.method = to_string(mr.envelope.method);
            rep.configuration = describe(config);
            rep.depth = config.grid_center[2];
            const Peak peak = find_peak(env);
            rep.fwhm_x = guarded([&] { return fwhm(env, peak, 0); });
            rep.fwhm_y = guarded([&] { return fwhm(env, peak, 1); });
            rep.fwhm_z = guarded([&] { return fwhm(env, peak, 2); });
            if (result.mask) {
                rep.pir = pir(env, *result.mask);
                rep.pmslr_db = guarded([&] { return pmslr_db(env, *result.mask); });
            }
            result.reports.push_back(rep);
        }
    } else {
        for (const auto& rois : cyst_rois(config))
            for (const auto& mr : result.methods) {
                const auto& env = mr.envelope.values;
                MetricsReport rep;
                rep.method = to_string(mr.envelope.method);
                rep.configuration = describe(config);
                rep.depth = rois.depth;
                rep.tcr_db = tcr_db(env, rois.high_scatter, rois.tissue);
                rep.tnr_db = tnr_db(env, rois.tissue, rois.noise);
                result.reports.push_back(rep);
            }
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    return reconstruct(config, simulate(config));
}

SweepResult run_sweep(const ExperimentConfig& base, const std::vector<std::size_t>& angle_counts,
                      const std::vector<double>& ranges_deg)
{
    if (angle_counts.empty() || ranges_deg.empty())
        throw std::invalid_argument("sweep axes must not be empty");
    ExperimentConfig probe_cfg = base;
    probe_cfg.phantom = PhantomKind::Point;
    for (std::size_t n : angle_counts)
        for (double r : ranges_deg) {
            probe_cfg.n_angles = n;
            probe_cfg.angle_range = r * kDeg;
            probe_cfg.validate();
        }

    SweepResult out;
    for (std::size_t n : angle_counts)
        for (double r : ranges_deg) {
            ExperimentConfig cfg = probe_cfg;
            cfg.n_angles = n;
            cfg.angle_range = r * kDeg;
            const auto res = run_experiment(cfg);
            for (std::size_t i = 0; i < res.methods.size(); ++i) {
                const auto& mr = res.methods[i];
                const auto& rep = res.reports[i];
                SweepRow row;
                row.n_angles = n;
                row.range_deg = r;
                row.method = mr.envelope.method;
                row.fwhm_x = rep.fwhm_x;
                row.fwhm_z = rep.fwhm_z;
                row.pir = rep.pir;
                row.pmslr_db = rep.pmslr_db;
                row.runtime_s = mr.compound_seconds;
                row.pair_count = mr.envelope.pairs_per_voxel;
                out.rows.push_back(row);
            }
        }
    return out;
}

std::vector<DepthStudyRow> depth_study(const ExperimentConfig& config,
                                       const ExperimentResult& result)
{
    std::vector<DepthStudyRow> rows;
    for (const auto& rois : cyst_rois(config))
        for (const auto& mr : result.methods) {
            const auto& env = mr.envelope.values;
            DepthStudyRow row;
            row.depth = rois.depth;
            row.method = mr.envelope.method;
            row.tcr_db = subregion_ratio_db(env, rois.high_scatter, rois.tissue, config.roi_splits);
            row.tnr_db = subregion_ratio_db(env, rois.tissue, rois.noise, config.roi_splits);
            rows.push_back(row);
        }
    return rows;
}

// ---- exports ---------------------------------------------------------------

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false)
{
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

std::filesystem::path with_suffix(const std::filesystem::path& base, const char* suffix)
{
    return base.string() + suffix;
}

std::string opt(const std::optional<double>& v, double scale = 1.0)
{
    return v ? fmt_double(*v / scale) : std::string{};
}

}  // namespace

void export_volume(const Volume<double>& volume, const std::filesystem::path& base,
                   const Metadata& extra)
{
    const auto& g = volume.grid();
    std::vector<char> bytes(volume.size() * 4);
    for (std::size_t i = 0; i < volume.size(); ++i) {
        auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(volume[i]));
        for (int b = 0; b < 4; ++b)
            bytes[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
    auto raw = open_out(with_suffix(base, ".raw"), true);
    raw.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!raw)
        throw std::runtime_error("short write to '" + with_suffix(base, ".raw").string() + "'");

    Metadata meta = extra;
    meta["dims"] = std::to_string(g.dims[0]) + "," + std::to_string(g.dims[1]) + "," +
                   std::to_string(g.dims[2]);
    meta["spacing_m"] = join(g.spacing, 1.0);
    meta["origin_m"] = join(g.origin, 1.0);
    meta["dtype"] = "float32";
    meta["byte_order"] = "little";
    meta["order"] = "x-fastest";
    auto side = open_out(with_suffix(base, ".txt"));
    for (const auto& [k, v] : meta)
        side << k << " = " << v << "\n";
}

Volume<double> read_volume(const std::filesystem::path& base, Metadata* extra)
{
    std::ifstream side(with_suffix(base, ".txt"));
    if (!side)
        throw std::runtime_error("cannot read sidecar for '" + base.string() + "'");
    Metadata meta;
    std::string line;
    while (std::getline(side, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            continue;
        meta[trim(line.substr(0, eq))] = trim(line.substr(eq + 1))
            ;
    }
    VoxelGrid g;
    const auto dims = split_list(meta.at("dims"));
    if (dims.size() != 3)
        throw std::runtime_error("malformed dims in sidecar");
    for (int a = 0; a < 3; ++a)
        g.dims[a] = parse_uint("dims", dims[a]);
    g.spacing = parse_vec3("spacing_m", meta.at("spacing_m"), 1.0);
    g.origin = parse_vec3("origin_m", meta.at("origin_m"), 1.0);

    Volume<double> v(g);
    std::ifstream raw(with_suffix(base, ".raw"), std::ios::binary);
    std::vector<unsigned char> bytes(v.size() * 4);
    raw.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!raw)
        throw std::runtime_error("raw volume shorter than its sidecar dims");
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b)
            bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
        v[i] = std::bit_cast<float>(bits);
    }
    if (extra)
        *extra = meta;
    return v;
}

void export_slice(const Volume<double>& volume_db, SlicePlane plane, std::size_t index,
                  double dynamic_range_db, const std::filesystem::path& path)
{
    const auto& g = volume_db.grid();
    const int normal = plane == SlicePlane::XY ? 2 : plane == SlicePlane::XZ ? 1 : 0;
    if (index >= g.dims[normal])
        throw std::out_of_range("slice index outside the grid");
    if (!(dynamic_range_db > 0.0))
        throw std::invalid_argument("dynamic range must be positive");
    // Image columns run along the first in-plane axis, rows along the second.
    const int col_axis = plane == SlicePlane::YZ ? 1 : 0;
    const int row_axis = plane == SlicePlane::XY ? 1 : 2;
    const std::size_t width = g.dims[col_axis];
    const std::size_t height = g.dims[row_axis];

    std::vector<unsigned char> pixels(width * height);
    std::array<std::size_t, 3> idx{};
    idx[normal] = index;
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) {
            idx[row_axis] = r;
            idx[col_axis] = c;
            const double db = volume_db(idx[0], idx[1], idx[2]);
            const double level = std::clamp((db + dynamic_range_db) / dynamic_range_db, 0.0, 1.0);
            pixels[r * width + c] = static_cast<unsigned char>(std::lround(255.0 * level));
        }
    auto out = open_out(path, true);
    out << "P5\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
}

void export_profile(const Volume<double>& volume_db, int axis,
                    const std::array<std::size_t, 3>& through, const std::filesystem::path& path)
{
    const auto& g = volume_db.grid();
    for (int a = 0; a < 3; ++a)
        if (through[a] >= g.dims[a])
            throw std::out_of_range("profile anchor outside the grid");
    auto out = open_out(path);
    out << "position_mm,amplitude_db\n";
    auto idx = through;
    for (std::size_t i = 0; i < g.dims[axis]; ++i) {
        idx[axis] = i;
        out << fmt_double(g.coord(axis, i) / kMm) << ","
            << fmt_double(volume_db(idx[0], idx[1], idx[2])) << "\n";
    }
}

void write_metrics_csv(const std::vector<MetricsReport>& reports,
                       const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "method,configuration,depth_mm,fwhm_x_mm,fwhm_y_mm,fwhm_z_mm,pir,pmslr_db,tcr_db,"
           "tnr_db\n";
    for (const auto& r : reports)
        out << r.method << "," << r.configuration << "," << fmt_double(r.depth / kMm) << ","
            << opt(r.fwhm_x, kMm) << "," << opt(r.fwhm_y, kMm) << "," << opt(r.fwhm_z, kMm)
            << "," << opt(r.pir) << "," << opt(r.pmslr_db) << "," << opt(r.tcr_db) << ","
            << opt(r.tnr_db) << "\n";
}

void write_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "n_angles,range_deg,method,fwhm_x_mm,fwhm_z_mm,pir,pmslr_db,runtime_s,pair_count\n";
    for (const auto& r : sweep.rows)
        out << r.n_angles << "," << fmt_double(r.range_deg) << "," << to_string(r.method) << ","
            << opt(r.fwhm_x, kMm) << "," << opt(r.fwhm_z, kMm) << "," << opt(r.pir) << ","
            << opt(r.pmslr_db) << "," << fmt_double(r.runtime_s) << "," << r.pair_count << "\n";
}

void write_depth_study_csv(const std::vector<DepthStudyRow>& rows,
                           const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "depth_mm,method,tcr_db,tcr_se_db,tnr_db,tnr_se_db\n";
    for (const auto& r : rows)
        out << fmt_double(r.depth / kMm) << "," << to_string(r.method) << ","
            << fmt_double(r.tcr_db.mean) << "," << fmt_double(r.tcr_db.std_error) << ","
            << fmt_double(r.tnr_db.mean) << "," << fmt_double(r.tnr_db.std_error) << "\n";
}

}  // namespace rcabf
