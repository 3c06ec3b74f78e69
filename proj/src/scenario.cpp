#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dwb/experiments.hpp"

namespace dwb::experiments {

namespace {

using nlohmann::json;

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

void reject_unknown_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
    }
  }
}

const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + " must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
  return v.get<int>();
}

std::vector<double> as_number_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_number(e, where + " entry"));
  return out;
}

std::vector<int> as_int_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array of integers");
  std::vector<int> out;
  for (const auto& e : v) out.push_back(as_int(e, where + " entry"));
  return out;
}

std::vector<double> degrees_to_radians(const std::vector<double>& deg) {
  std::vector<double> rad;
  rad.reserve(deg.size());
  for (double d : deg) rad.push_back(d * kDegToRad);
  return rad;
}

void parse_geometry(const json& v, signal::ArrayGeometry& g) {
  reject_unknown_keys(v, "geometry", {"n_antennas", "spacing_over_wavelength"});
  if (const json* n = find(v, "n_antennas")) g.n_antennas = as_int(*n, "n_antennas");
  if (const json* s = find(v, "spacing_over_wavelength")) {
    g.spacing_over_wavelength = as_number(*s, "spacing_over_wavelength");
  }
}

void parse_grid(const json& v, signal::OfdmGrid& g) {
  reject_unknown_keys(v, "grid",
                      {"n_subcarriers", "subcarrier_spacing_hz", "n_symbols",
                       "carrier_hz", "cp_len"});
  if (const json* e = find(v, "n_subcarriers")) g.n_subcarriers = as_int(*e, "n_subcarriers");
  if (const json* e = find(v, "subcarrier_spacing_hz")) {
    g.subcarrier_spacing_hz = as_number(*e, "subcarrier_spacing_hz");
  }
  if (const json* e = find(v, "n_symbols")) g.n_symbols = as_int(*e, "n_symbols");
  if (const json* e = find(v, "carrier_hz")) g.carrier_hz = as_number(*e, "carrier_hz");
  if (const json* e = find(v, "cp_len")) g.cp_len = as_int(*e, "cp_len");
}

void parse_spoof(const json& v, signal::SpoofProfile& s) {
  reject_unknown_keys(v, "spoof", {"fake_range_m", "fake_doppler_hz"});
  if (const json* e = find(v, "fake_range_m")) s.fake_range_m = as_number(*e, "fake_range_m");
  if (const json* e = find(v, "fake_doppler_hz")) {
    s.fake_doppler_hz = as_number(*e, "fake_doppler_hz");
  }
}

signal::Bearings parse_bearings(const json& v) {
  reject_unknown_keys(v, "bearings", {"comm_angles_deg", "eve_angles_deg"});
  signal::Bearings b;
  if (const json* e = find(v, "comm_angles_deg")) {
    b.comm_angles_rad = degrees_to_radians(as_number_list(*e, "comm_angles_deg"));
  }
  if (const json* e = find(v, "eve_angles_deg")) {
    b.eve_angles_rad = degrees_to_radians(as_number_list(*e, "eve_angles_deg"));
  }
  return b;
}

SweepAxes parse_sweep(const json& v) {
  reject_unknown_keys(v, "sweep", {"n_antennas", "n_comm", "n_eve", "snr_db"});
  SweepAxes s;
  if (const json* e = find(v, "n_antennas")) s.n_antennas = as_int_list(*e, "sweep.n_antennas");
  if (const json* e = find(v, "n_comm")) s.n_comm = as_int_list(*e, "sweep.n_comm");
  if (const json* e = find(v, "n_eve")) s.n_eve = as_int_list(*e, "sweep.n_eve");
  if (const json* e = find(v, "snr_db")) s.snr_db = as_number_list(*e, "sweep.snr_db");
  if (s.n_comm.empty() || s.n_eve.empty()) {
    throw ConfigError("sweep requires non-empty n_comm and n_eve lists");
  }
  return s;
}

void parse_channel(const json& v, ChannelConfig& c) {
  reject_unknown_keys(v, "channel",
                      {"range_m", "velocity_mps", "noise_var", "path_gain"});
  if (const json* e = find(v, "range_m")) c.range_m = as_number(*e, "channel.range_m");
  if (const json* e = find(v, "velocity_mps")) {
    c.velocity_mps = as_number(*e, "channel.velocity_mps");
  }
  if (const json* e = find(v, "noise_var")) c.noise_var = as_number(*e, "channel.noise_var");
  if (const json* e = find(v, "path_gain")) c.path_gain = as_number(*e, "channel.path_gain");
}

void parse_radar(const json& v, RadarConfig& r) {
  reject_unknown_keys(v, "radar", {"pad_range", "pad_doppler", "knowledge"});
  if (const json* e = find(v, "pad_range")) r.pad_range = as_int(*e, "radar.pad_range");
  if (const json* e = find(v, "pad_doppler")) r.pad_doppler = as_int(*e, "radar.pad_doppler");
  if (const json* e = find(v, "knowledge")) {
    if (!e->is_string()) throw ConfigError("radar.knowledge must be a string");
    r.knowledge = e->get<std::string>();
    if (r.knowledge != "known" && r.knowledge != "blind") {
      throw ConfigError("radar.knowledge must be \"known\" or \"blind\"");
    }
  }
}

void parse_solver(const json& v, SolverOverrides& s) {
  reject_unknown_keys(v, "solver", {"tol", "max_iter", "resolve_after_rounding"});
  if (const json* e = find(v, "tol")) s.tol = as_number(*e, "solver.tol");
  if (const json* e = find(v, "max_iter")) s.max_iter = as_int(*e, "solver.max_iter");
  if (const json* e = find(v, "resolve_after_rounding")) {
    if (!e->is_boolean()) throw ConfigError("solver.resolve_after_rounding must be a bool");
    s.resolve_after_rounding = e->get<bool>();
  }
}

void validate_config(const ScenarioConfig& c) {
  try {
    c.geometry.validate();
    c.grid.validate();
    if (c.bearings) c.bearings->validate();
    signal::QamConstellation::make(c.qam_order);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(c.noise_var > 0.0)) throw ConfigError("noise_var must be positive");
  if (c.n_trials < 1) throw ConfigError("n_trials must be >= 1");
  if (c.radar.pad_range < 1 || c.radar.pad_doppler < 1) {
    throw ConfigError("radar pad factors must be >= 1");
  }
  if (!(c.solver.tol > 0.0) || c.solver.max_iter < 1) {
    throw ConfigError("solver.tol must be positive and max_iter >= 1");
  }
  if (c.sweep) {
    for (int n : c.sweep->n_antennas) {
      for (int nc : c.sweep->n_comm) {
        for (int ne : c.sweep->n_eve) {
          if (nc < 0 || ne < 0) throw ConfigError("sweep counts must be nonnegative");
          if (n <= nc + ne) {
            throw ConfigError(
                "sweep point violates n_antennas > n_comm + n_eve (" +
                std::to_string(n) + " antennas, " + std::to_string(nc) + "+" +
                std::to_string(ne) + " receivers)");
          }
        }
      }
    }
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  reject_unknown_keys(doc, "config",
                      {"geometry", "grid", "qam_order", "spoof", "bearings", "sweep",
                       "tx_snr_db", "noise_var", "n_trials", "seed", "output_dir",
                       "channel", "radar", "solver"});

  ScenarioConfig c;
  if (const json* e = find(doc, "geometry")) parse_geometry(*e, c.geometry);
  if (const json* e = find(doc, "grid")) parse_grid(*e, c.grid);
  if (const json* e = find(doc, "qam_order")) c.qam_order = as_int(*e, "qam_order");
  if (const json* e = find(doc, "spoof")) parse_spoof(*e, c.spoof);
  if (const json* e = find(doc, "bearings")) c.bearings = parse_bearings(*e);
  if (const json* e = find(doc, "sweep")) c.sweep = parse_sweep(*e);
  if (const json* e = find(doc, "tx_snr_db")) c.tx_snr_db = as_number(*e, "tx_snr_db");
  if (const json* e = find(doc, "noise_var")) c.noise_var = as_number(*e, "noise_var");
  if (const json* e = find(doc, "n_trials")) c.n_trials = as_int(*e, "n_trials");
  if (const json* e = find(doc, "seed")) {
    if (!e->is_number_integer()) throw ConfigError("seed must be an integer");
    c.seed = e->get<std::uint64_t>();
  }
  if (const json* e = find(doc, "output_dir")) {
    if (!e->is_string()) throw ConfigError("output_dir must be a string");
    c.output_dir = e->get<std::string>();
  }
  if (const json* e = find(doc, "channel")) parse_channel(*e, c.channel);
  if (const json* e = find(doc, "radar")) parse_radar(*e, c.radar);
  if (const json* e = find(doc, "solver")) parse_solver(*e, c.solver);

  if (c.sweep && c.sweep->n_antennas.empty()) {
    c.sweep->n_antennas = {c.geometry.n_antennas};
  }
  if (c.sweep && c.sweep->snr_db.empty()) {
    c.sweep->snr_db = {c.tx_snr_db};
  }
  validate_config(c);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace dwb::experiments
