#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sagin/experiment.hpp"

namespace py = pybind11;
using namespace sagin;

namespace {

using ComplexArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

ComplexMatrix matrix_from_numpy(const ComplexArray& arr) {
  if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-D complex array");
  ComplexMatrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
  auto view = arr.unchecked<2>();
  for (py::ssize_t r = 0; r < arr.shape(0); ++r)
    for (py::ssize_t c = 0; c < arr.shape(1); ++c)
      m(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = view(r, c);
  return m;
}

py::array_t<std::complex<double>> matrix_to_numpy(const ComplexMatrix& m) {
  py::array_t<std::complex<double>> arr({m.rows(), m.cols()});
  auto view = arr.mutable_unchecked<2>();
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      view(static_cast<py::ssize_t>(r), static_cast<py::ssize_t>(c)) = m(r, c);
  return arr;
}

py::dict sinr_to_dict(const SinrReport& report) {
  py::dict d;
  d["sinr"] = report.sinr;
  d["signal_w"] = report.signal_w;
  d["interference_w"] = report.interference_w;
  d["noise_w"] = report.noise_w;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "saginsim core: steering-vector channels, zero-forcing beamforming, "
            "RIS phase profiles and the DDPG experiment runner";

  py::register_exception<InfeasibleError>(m, "InfeasibleError");
  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<SingularMatrixError>(m, "SingularMatrixError");

  py::class_<GeometryConfig>(m, "GeometryConfig")
      .def(py::init<>())
      .def_readwrite("area_x_m", &GeometryConfig::area_x_m)
      .def_readwrite("area_y_m", &GeometryConfig::area_y_m)
      .def_readwrite("sat_height_m", &GeometryConfig::sat_height_m)
      .def_readwrite("haps_height_m", &GeometryConfig::haps_height_m)
      .def_readwrite("ris_position_m", &GeometryConfig::ris_position_m)
      .def_readwrite("carrier_freq_hz", &GeometryConfig::carrier_freq_hz)
      .def_readwrite("bandwidth_hz", &GeometryConfig::bandwidth_hz)
      .def_readwrite("n_antennas", &GeometryConfig::n_antennas)
      .def_readwrite("ris_side", &GeometryConfig::ris_side)
      .def_readwrite("ris_spacing_m", &GeometryConfig::ris_spacing_m)
      .def_readwrite("sat_aoa_rad", &GeometryConfig::sat_aoa_rad)
      .def_readwrite("k_sat", &GeometryConfig::k_sat)
      .def_readwrite("k_ue", &GeometryConfig::k_ue)
      .def_readwrite("p_t_watts", &GeometryConfig::p_t_watts)
      .def_readwrite("gamma_min", &GeometryConfig::gamma_min)
      .def_readwrite("backlobe_gain", &GeometryConfig::backlobe_gain)
      .def("ris_spacing", &GeometryConfig::ris_spacing)
      .def("ris_elements", &GeometryConfig::ris_elements)
      .def("n_streams", &GeometryConfig::n_streams)
      .def("zf_feasible", &GeometryConfig::zf_feasible);

  m.def("steering_vector", &steering_vector, py::arg("angle_rad"), py::arg("n"),
        "Half-wavelength array response [exp(-1j*pi*(n-1)*sin(angle))]");

  m.def(
      "ris_phase_profile",
      [](double win, double wout, const GeometryConfig& cfg) {
        return ris_phase_profile(win, wout, cfg).phases;
      },
      py::arg("omega_in"), py::arg("omega_out"), py::arg("cfg"),
      "Per-element RIS phases wrapped into [0, 2*pi)");

  m.def(
      "ris_arrival_vector",
      [](double angle, const GeometryConfig& cfg) { return ris_arrival_vector(angle, cfg); },
      py::arg("angle_rad"), py::arg("cfg"));
  m.def(
      "ris_departure_vector",
      [](double angle, const GeometryConfig& cfg) { return ris_departure_vector(angle, cfg); },
      py::arg("angle_rad"), py::arg("cfg"));

  m.def(
      "noise_power_w",
      [](double bandwidth_hz, double noise_figure_db) {
        return noise_power(NoiseModel{-174.0, noise_figure_db}, bandwidth_hz);
      },
      py::arg("bandwidth_hz"), py::arg("noise_figure_db") = 7.0,
      "Thermal noise power in watts");

  m.def(
      "zf_directions",
      [](const ComplexArray& h) { return matrix_to_numpy(zf_directions(matrix_from_numpy(h)).w); },
      py::arg("h"), "Unit-norm zero-forcing beam directions (columns)");

  m.def(
      "zf_solve",
      [](const ComplexArray& h, double gamma_min, double sigma2) {
        const ComplexMatrix hm = matrix_from_numpy(h);
        const BeamformingMatrix dirs = zf_directions(hm);
        return matrix_to_numpy(min_power_scaling(dirs, hm, gamma_min, sigma2).w);
      },
      py::arg("h"), py::arg("gamma_min"), py::arg("sigma2"),
      "Minimum-power ZF beamforming matrix meeting the SINR floor with equality");

  m.def(
      "compute_sinr",
      [](const ComplexArray& h, const ComplexArray& w, double sigma2) {
        return sinr_to_dict(
            compute_sinr(matrix_from_numpy(h), BeamformingMatrix{matrix_from_numpy(w)}, sigma2));
      },
      py::arg("h"), py::arg("w"), py::arg("sigma2"));

  m.def(
      "total_power",
      [](const ComplexArray& w) { return total_power(BeamformingMatrix{matrix_from_numpy(w)}); },
      py::arg("w"));

  m.def(
      "project_power",
      [](const ComplexArray& w, double p_t) {
        return matrix_to_numpy(project_power(BeamformingMatrix{matrix_from_numpy(w)}, p_t).w);
      },
      py::arg("w"), py::arg("p_t_watts"));

  m.def(
      "per_user_rates",
      [](const std::vector<double>& sinr, double bandwidth_hz, int n_uplink) {
        SinrReport rep;
        rep.sinr = sinr;
        rep.signal_w.assign(sinr.size(), 0.0);
        rep.interference_w.assign(sinr.size(), 0.0);
        rep.noise_w = 1.0;
        const RateReport rr = per_user_rates(rep, bandwidth_hz, n_uplink);
        return py::make_tuple(rr.per_user_rate_bps, rr.sum_rate_bps);
      },
      py::arg("sinr"), py::arg("bandwidth_hz"), py::arg("n_uplink_streams") = 0);

  m.def(
      "alpha_fair_throughput",
      [](const std::vector<double>& rates, double alpha) {
        const AlphaFairResult r = alpha_fair_throughput(rates, alpha);
        return py::make_tuple(r.utility, r.fair_throughput_bps);
      },
      py::arg("rates_bps"), py::arg("alpha"));

  m.def("improvement_percent", &improvement_percent, py::arg("a"), py::arg("b"));

  m.def(
      "gradient_check",
      [](int instances, std::uint64_t seed) {
        const auto rep = neural::gradient_check(instances, seed);
        return py::make_tuple(rep.max_rel_error, rep.parameters_checked);
      },
      py::arg("instances") = 10, py::arg("seed") = 42,
      "Finite-difference check of the manual backprop; returns (max_rel_error, n_params)");

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const ExperimentConfig cfg = parse_config_json(config_json);
        const RunSummary s = run(cfg);
        py::dict d;
        if (s.zf) {
          d["zf_mean_sum_rate_bps"] = s.zf->mean_sum_rate_bps;
          d["zf_mean_reward"] = s.zf->mean_reward;
        }
        if (s.ddpg) {
          d["ddpg_mean_sum_rate_bps"] = s.ddpg->mean_sum_rate_bps;
          d["ddpg_mean_reward"] = s.ddpg->mean_reward;
        }
        if (s.training) {
          d["train_steps"] = s.training->log.size();
          d["final_reward"] = s.training->log.back().reward;
        }
        d["out_dir"] = cfg.out_dir;
        return d;
      },
      py::arg("config_json"),
      "Parse a config JSON string, run the experiment and return summary metrics");

  m.def("selftest", []() {
    std::ostringstream os;
    const bool ok = run_selftest(os);
    return py::make_tuple(ok, os.str());
  });

  m.attr("__version__") = "0.1.0";
}
