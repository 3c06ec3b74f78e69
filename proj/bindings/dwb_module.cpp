#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dwb/beamformer.hpp"
#include "dwb/experiments.hpp"
#include "dwb/qp_core.hpp"
#include "dwb/radar.hpp"
#include "dwb/signal_model.hpp"

namespace py = pybind11;
using namespace dwb;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deceptive wireless beamforming: OFDM signal model, power-minimal "
            "precoding and the eavesdropper's range-Doppler estimator";

  py::register_exception<RankError>(m, "RankError");
  py::register_exception<SolverError>(m, "SolverError");
  py::register_exception<ConfigError>(m, "ConfigError");

  m.attr("SPEED_OF_LIGHT") = signal::kSpeedOfLight;

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", py::overload_cast<>(&Rng::uniform))
      .def("normal", &Rng::normal);

  py::class_<signal::ArrayGeometry>(m, "ArrayGeometry")
      .def(py::init([](int n_antennas, double spacing) {
             signal::ArrayGeometry g{n_antennas, spacing};
             g.validate();
             return g;
           }),
           py::arg("n_antennas"), py::arg("spacing_over_wavelength") = 0.5)
      .def_readwrite("n_antennas", &signal::ArrayGeometry::n_antennas)
      .def_readwrite("spacing_over_wavelength",
                     &signal::ArrayGeometry::spacing_over_wavelength);

  py::class_<signal::Bearings>(m, "Bearings")
      .def(py::init([](std::vector<double> comm, std::vector<double> eve) {
             signal::Bearings b{std::move(comm), std::move(eve)};
             b.validate();
             return b;
           }),
           py::arg("comm_angles_rad"), py::arg("eve_angles_rad"))
      .def_readwrite("comm_angles_rad", &signal::Bearings::comm_angles_rad)
      .def_readwrite("eve_angles_rad", &signal::Bearings::eve_angles_rad);

  py::class_<signal::OfdmGrid>(m, "OfdmGrid")
      .def(py::init([](int l, double df, int mm, double fc, int cp) {
             signal::OfdmGrid g{l, df, mm, fc, cp};
             g.validate();
             return g;
           }),
           py::arg("n_subcarriers") = 64, py::arg("subcarrier_spacing_hz") = 312.5e3,
           py::arg("n_symbols") = 32, py::arg("carrier_hz") = 5.9e9,
           py::arg("cp_len") = 16)
      .def_readwrite("n_subcarriers", &signal::OfdmGrid::n_subcarriers)
      .def_readwrite("subcarrier_spacing_hz", &signal::OfdmGrid::subcarrier_spacing_hz)
      .def_readwrite("n_symbols", &signal::OfdmGrid::n_symbols)
      .def_readwrite("carrier_hz", &signal::OfdmGrid::carrier_hz)
      .def_readwrite("cp_len", &signal::OfdmGrid::cp_len)
      .def_property_readonly("symbol_duration_s", &signal::OfdmGrid::symbol_duration_s)
      .def_property_readonly("sample_rate_hz", &signal::OfdmGrid::sample_rate_hz);

  py::class_<signal::QamConstellation>(m, "QamConstellation")
      .def_static("make", &signal::QamConstellation::make, py::arg("order"),
                  py::arg("symbol_power_w") = 1.0)
      .def_property_readonly("order", &signal::QamConstellation::order)
      .def_property_readonly("symbol_power_w", &signal::QamConstellation::symbol_power_w)
      .def_property_readonly("per_axis_levels", &signal::QamConstellation::per_axis_levels)
      .def("scaled_levels", &signal::QamConstellation::scaled_levels)
      .def("points", &signal::QamConstellation::points)
      .def("random_symbol", &signal::QamConstellation::random_symbol)
      .def("with_power", &signal::QamConstellation::with_power);

  py::class_<signal::SpoofProfile>(m, "SpoofProfile")
      .def(py::init<double, double>(), py::arg("fake_range_m") = 0.0,
           py::arg("fake_doppler_hz") = 0.0)
      .def_readwrite("fake_range_m", &signal::SpoofProfile::fake_range_m)
      .def_readwrite("fake_doppler_hz", &signal::SpoofProfile::fake_doppler_hz);

  py::class_<signal::ChannelRealization>(m, "ChannelRealization")
      .def(py::init<>())
      .def_readwrite("taps", &signal::ChannelRealization::taps)
      .def_readwrite("path_gain", &signal::ChannelRealization::path_gain)
      .def_readwrite("range_m", &signal::ChannelRealization::range_m)
      .def_readwrite("velocity_mps", &signal::ChannelRealization::velocity_mps)
      .def_readwrite("noise_var", &signal::ChannelRealization::noise_var)
      .def("doppler_hz", &signal::ChannelRealization::doppler_hz);

  m.def("steering_vector", &signal::steering_vector, py::arg("geometry"),
        py::arg("angle_rad"));
  m.def("steering_matrix", &signal::steering_matrix, py::arg("geometry"),
        py::arg("angles_rad"));
  m.def("idft_matrix", &signal::idft_matrix, py::arg("n"));
  m.def("dft_matrix", &signal::dft_matrix, py::arg("n"));
  m.def("qam_nearest", &signal::qam_nearest, py::arg("value"), py::arg("constellation"));
  m.def("spoof_matrix_diag", &signal::spoof_matrix_diag, py::arg("grid"),
        py::arg("profile"), py::arg("symbol_index"));
  m.def("deceptive_time_signal", &signal::deceptive_time_signal, py::arg("grid"),
        py::arg("profile"), py::arg("eve_symbols"), py::arg("symbol_index"));
  m.def("circulant_channel", &signal::circulant_channel, py::arg("taps"), py::arg("n"));
  m.def("freq_channel_diag", &signal::freq_channel_diag, py::arg("channel"),
        py::arg("grid"), py::arg("symbol_index"));
  m.def("simulate_rx", &signal::simulate_rx, py::arg("tx_signal"), py::arg("steer"),
        py::arg("channel"), py::arg("grid"), py::arg("symbol_index"),
        py::arg("rng_seed"));
  m.def("ofdm_demod", &signal::ofdm_demod, py::arg("time_samples"));

  m.def("least_norm_solve",
        py::overload_cast<const Eigen::MatrixXcd&, const Eigen::MatrixXcd&>(
            &qp::least_norm_solve),
        py::arg("constraint_matrix"), py::arg("targets"));

  py::class_<beam::SolveDiagnostics>(m, "SolveDiagnostics")
      .def_readonly("iterations", &beam::SolveDiagnostics::iterations)
      .def_readonly("converged", &beam::SolveDiagnostics::converged)
      .def_readonly("comm_residual_rel", &beam::SolveDiagnostics::comm_residual_rel)
      .def_readonly("eve_residual_rel", &beam::SolveDiagnostics::eve_residual_rel);

  py::class_<beam::DwbProblem>(m, "DwbProblem")
      .def(py::init<>())
      .def_readwrite("geometry", &beam::DwbProblem::geometry)
      .def_readwrite("bearings", &beam::DwbProblem::bearings)
      .def_readwrite("grid", &beam::DwbProblem::grid)
      .def_readwrite("constellation", &beam::DwbProblem::constellation)
      .def_readwrite("spoof", &beam::DwbProblem::spoof)
      .def_readwrite("comm_symbols", &beam::DwbProblem::comm_symbols)
      .def_readwrite("tx_snr_db", &beam::DwbProblem::tx_snr_db)
      .def_readwrite("noise_var", &beam::DwbProblem::noise_var)
      .def_readwrite("symbol_index", &beam::DwbProblem::symbol_index)
      .def_readwrite("tol", &beam::DwbProblem::tol)
      .def_readwrite("max_iter", &beam::DwbProblem::max_iter)
      .def_readwrite("resolve_after_rounding", &beam::DwbProblem::resolve_after_rounding);

  py::class_<beam::DwbSolution>(m, "DwbSolution")
      .def_readonly("tx_signal", &beam::DwbSolution::tx_signal)
      .def_readonly("deceptive_symbols_relaxed",
                    &beam::DwbSolution::deceptive_symbols_relaxed)
      .def_readonly("deceptive_symbols_rounded",
                    &beam::DwbSolution::deceptive_symbols_rounded)
      .def_readonly("power_w", &beam::DwbSolution::power_w)
      .def_readonly("relaxed_power_w", &beam::DwbSolution::relaxed_power_w)
      .def_readonly("solver_diag", &beam::DwbSolution::solver_diag);

  py::class_<beam::NullingSolution>(m, "NullingSolution")
      .def_readonly("tx_signal", &beam::NullingSolution::tx_signal)
      .def_readonly("power_w", &beam::NullingSolution::power_w);

  m.def("power_per_symbol", &beam::power_per_symbol, py::arg("tx_snr_db"),
        py::arg("noise_var"));
  m.def("scale_comm_symbols", &beam::scale_comm_symbols, py::arg("symbols"),
        py::arg("p_s"));
  m.def("solve_dwb", &beam::solve_dwb, py::arg("problem"));
  m.def("solve_nulling", &beam::solve_nulling, py::arg("problem"));
  m.def("tx_power", &beam::tx_power, py::arg("tx_signal"));
  m.def("tx_snr_toward", &beam::tx_snr_toward, py::arg("tx_signal"), py::arg("geometry"),
        py::arg("angle_rad"), py::arg("noise_var"));

  py::class_<radar::RxFrame>(m, "RxFrame")
      .def_readonly("grid", &radar::RxFrame::grid)
      .def_readonly("fd_samples", &radar::RxFrame::fd_samples);
  m.def("collect_frame", &radar::collect_frame, py::arg("grid"), py::arg("fd_symbols"));

  py::enum_<radar::Equalization>(m, "Equalization")
      .value("NONE", radar::Equalization::kNone)
      .value("PHASE_ONLY", radar::Equalization::kPhaseOnly);

  py::class_<radar::SymbolKnowledge>(m, "SymbolKnowledge")
      .def_static("known", &radar::SymbolKnowledge::known, py::arg("symbols"))
      .def_static("blind", &radar::SymbolKnowledge::blind, py::arg("constellation"),
                  py::arg("equalization") = radar::Equalization::kNone);

  m.def("remove_symbols", &radar::remove_symbols, py::arg("frame"), py::arg("knowledge"));
  m.def("blind_demod", &radar::blind_demod, py::arg("frame"), py::arg("constellation"),
        py::arg("equalization") = radar::Equalization::kNone);

  py::class_<radar::RangeDopplerMap>(m, "RangeDopplerMap")
      .def_readonly("magnitudes", &radar::RangeDopplerMap::magnitudes)
      .def_readonly("range_axis_m", &radar::RangeDopplerMap::range_axis_m)
      .def_readonly("doppler_axis_hz", &radar::RangeDopplerMap::doppler_axis_hz);
  m.def("range_doppler_map", &radar::range_doppler_map, py::arg("z"), py::arg("grid"),
        py::arg("pad_range") = 4, py::arg("pad_doppler") = 4);

  py::class_<radar::PeakEstimate>(m, "PeakEstimate")
      .def_readonly("range_m", &radar::PeakEstimate::range_m)
      .def_readonly("doppler_hz", &radar::PeakEstimate::doppler_hz)
      .def_readonly("peak_to_floor_db", &radar::PeakEstimate::peak_to_floor_db);
  m.def("find_peak", &radar::find_peak, py::arg("map"), py::arg("interpolate") = true);
  m.def("aliases", &radar::aliases, py::arg("grid"), py::arg("range_m"),
        py::arg("doppler_hz"));

  py::class_<experiments::ArrayResponse>(m, "ArrayResponse")
      .def_readonly("angles_rad", &experiments::ArrayResponse::angles_rad)
      .def_readonly("magnitude_db", &experiments::ArrayResponse::magnitude_db);
  m.def("array_response", &experiments::array_response, py::arg("tx_signal"),
        py::arg("geometry"), py::arg("angle_grid_rad"));
  m.def("psl_db", &experiments::psl_db, py::arg("response"));

  py::class_<experiments::Topology>(m, "Topology")
      .def_readonly("bearings", &experiments::Topology::bearings)
      .def_readonly("comm_distances_m", &experiments::Topology::comm_distances_m)
      .def_readonly("eve_distances_m", &experiments::Topology::eve_distances_m);
  m.def(
      "random_topology",
      [](std::uint64_t seed, int n_comm, int n_eve) {
        Rng rng(seed);
        return experiments::random_topology(rng, n_comm, n_eve);
      },
      py::arg("seed"), py::arg("n_comm"), py::arg("n_eve"));

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
