// SPDX-License-Identifier: Apache-2.0

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rcabf/harness.hpp"

namespace py = pybind11;
using namespace rcabf;

namespace {

// Envelope volume as a (z, y, x) array; x varies fastest, as in memory.
py::array_t<double> to_array(const Volume<double>& v)
{
    const auto& d = v.grid().dims;
    py::array_t<double> out({d[2], d[1], d[0]});
    std::copy(v.data().begin(), v.data().end(), out.mutable_data());
    return out;
}

py::dict report_dict(const MetricsReport& r)
{
    py::dict d;
    d["method"] = r.method;
    d["configuration"] = r.configuration;
    d["depth"] = r.depth;
    d["fwhm_x"] = r.fwhm_x;
    d["fwhm_y"] = r.fwhm_y;
    d["fwhm_z"] = r.fwhm_z;
    d["pir"] = r.pir;
    d["pmslr_db"] = r.pmslr_db;
    d["tcr_db"] = r.tcr_db;
    d["tnr_db"] = r.tnr_db;
    return d;
}

}  // namespace

PYBIND11_MODULE(_rcabf, m)
{
    m.doc() = "Row-column array beamforming";

    py::enum_<Orientation>(m, "Orientation")
        .value("RowTx", Orientation::RowTx)
        .value("ColumnTx", Orientation::ColumnTx);
    py::enum_<Method>(m, "Method")
        .value("DAS", Method::DAS)
        .value("FMAS", Method::FMAS)
        .value("RCFMAS", Method::RCFMAS);
    py::enum_<PairMode>(m, "PairMode")
        .value("RealRf", PairMode::RealRf)
        .value("ComplexBaseband", PairMode::ComplexBaseband);

    py::class_<ProbeGeometry>(m, "ProbeGeometry")
        .def(py::init<>())
        .def_static("small", &ProbeGeometry::small)
        .def_readwrite("num_rows", &ProbeGeometry::num_rows)
        .def_readwrite("num_cols", &ProbeGeometry::num_cols)
        .def_readwrite("pitch", &ProbeGeometry::pitch)
        .def_readwrite("center_frequency", &ProbeGeometry::center_frequency)
        .def_readwrite("bandwidth", &ProbeGeometry::bandwidth)
        .def_readwrite("sampling_frequency", &ProbeGeometry::sampling_frequency)
        .def_readwrite("sound_speed", &ProbeGeometry::sound_speed)
        .def("wavelength", &ProbeGeometry::wavelength)
        .def("validate", &ProbeGeometry::validate);

    m.def("element_position",
          [](const ProbeGeometry& g, bool rows, std::size_t n) {
              return element_position(g, rows ? ElementSet::Rows : ElementSet::Columns, n);
          },
          py::arg("geom"), py::arg("rows"), py::arg("n"));
    m.def("tukey_window", &tukey_window, py::arg("count"), py::arg("alpha"));
    m.def("make_schedule",
          [](std::size_t n, double range) {
              py::list out;
              for (const auto& e : make_schedule(n, range).events)
                  out.append(py::make_tuple(e.orientation, e.steer_angle));
              return out;
          },
          py::arg("n_per_orientation"), py::arg("range"),
          "List of (orientation, steering angle) in firing order.");

    m.def("tx_delay", &tx_delay, py::arg("u"), py::arg("z"), py::arg("angle"), py::arg("c"));
    m.def("rx_delay", &rx_delay, py::arg("v"), py::arg("z"), py::arg("r_n"), py::arg("c"));
    m.def("total_delay",
          [](Orientation o, double angle, const std::array<double, 3>& voxel, std::size_t n,
             const ProbeGeometry& g) { return total_delay({o, angle, 0}, voxel, n, g); },
          py::arg("orientation"), py::arg("angle"), py::arg("voxel"), py::arg("n"), py::arg("geom"));

    m.def("pair_count_fmas", &pair_count_fmas);
    m.def("pair_count_rcfmas", &pair_count_rcfmas);
    m.def("signed_sqrt_pair", &signed_sqrt_pair, py::arg("vi"), py::arg("vj"),
          py::arg("mode") = PairMode::ComplexBaseband);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("probe", &ExperimentConfig::probe)
        .def_readwrite("n_angles", &ExperimentConfig::n_angles)
        .def_readwrite("angle_range", &ExperimentConfig::angle_range)
        .def_readwrite("point_depths", &ExperimentConfig::point_depths)
        .def_readwrite("grid_center", &ExperimentConfig::grid_center)
        .def_readwrite("grid_dims", &ExperimentConfig::grid_dims)
        .def_readwrite("grid_spacing", &ExperimentConfig::grid_spacing)
        .def_readwrite("noise", &ExperimentConfig::noise)
        .def_readwrite("snr_db", &ExperimentConfig::snr_db)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("pair_mode", &ExperimentConfig::pair_mode)
        .def_readwrite("methods", &ExperimentConfig::methods)
        .def_property(
            "workers", [](const ExperimentConfig& c) { return c.run.workers; },
            [](ExperimentConfig& c, unsigned w) { c.run.workers = w; })
        .def("validate", &ExperimentConfig::validate);

    m.def("psf_preset", &psf_preset, py::arg("full") = false);
    m.def("cyst_preset", &cyst_preset, py::arg("full") = false);
    m.def("parse_config", &parse_config, py::arg("text"), py::arg("base") = ExperimentConfig{});
    m.def("canonical_config", &canonical_config);
    m.def("config_hash", &config_hash);

    m.def(
        "run_experiment",
        [](const ExperimentConfig& c) {
            ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = run_experiment(c);
            }
            py::dict volumes, pairs;
            for (const auto& mr : r.methods) {
                volumes[to_string(mr.envelope.method)] = to_array(mr.envelope.values);
                pairs[to_string(mr.envelope.method)] = mr.envelope.pairs_per_voxel;
            }
            py::list reports;
            for (const auto& rep : r.reports)
                reports.append(report_dict(rep));
            py::dict out;
            out["volumes"] = volumes;
            out["pairs_per_voxel"] = pairs;
            out["reports"] = reports;
            return out;
        },
        py::arg("config"),
        "Simulate and reconstruct. Volumes are (z, y, x) arrays keyed by method name.");

    py::register_exception<std::invalid_argument>(m, "ConfigError", PyExc_ValueError);
}
