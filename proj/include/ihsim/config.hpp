#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ihsim/control.hpp"
#include "ihsim/errors.hpp"
#include "ihsim/plant.hpp"
#include "ihsim/spwm.hpp"

// Flat key=value configuration: one key per line, '#' comments, unknown keys
// rejected with the offending line number, missing keys filled from the
// built-in defaults (the reference operating point: f_s=250 Hz, f_c=1000 Hz,
// V_dc=400 V, M=0.8 into a 21.90 mOhm / 0.190 mH / 2.133 mF series load).

namespace ihsim {

enum class SimMode { open_loop, closed_loop };

struct SimConfig {
  // sim.*
  double dt = 1e-6;          // integration step, s
  double duration = 20.0;    // simulated time, s
  SimMode mode = SimMode::closed_loop;
  long trace_decimation = 20;
  std::string output_path = "trace.csv";
  bool trace_switch = false;  // append the raw switching column 's'

  LoadParams plant;
  SpwmConfig spwm;

  // ctrl.*  (unset gains derive from S_rated = V_dc * I_rated and the
  // nominal frequencies; unset P_ref derives from the cold resonant power)
  std::optional<double> P_ref;
  double I_rated = 15000.0;  // A, normalization rating
  std::optional<double> K_qe, K_dqe, K_pe, K_dpe, K_fs, K_fc;
  double f_s_min = 150.0, f_s_max = 450.0;
  double f_c_min = 800.0, f_c_max = 5000.0;
  double sign_fc = -1.0;
  bool sync_carrier = true;
  std::string resonance_rules = "resonance5";
  std::string power_rules = "power9";

  // Average power a resonance-locked drive delivers into the cold load.
  double cold_resonant_power() const {
    const double v1 = spwm.modulation_index * spwm.v_dc;
    return 0.5 * v1 * v1 / plant.R0;
  }

  double resolved_P_ref() const { return P_ref ? *P_ref : cold_resonant_power(); }

  ControllerState make_controller_state() const {
    const double s_rated = spwm.v_dc * I_rated;
    const double k_q = K_qe ? *K_qe : 1.0 / s_rated;
    const double k_p = K_pe ? *K_pe : 1.0 / s_rated;
    ControllerState st;
    st.P_ref = resolved_P_ref();
    st.f_s = spwm.f_s;
    st.f_c = spwm.f_c;
    st.f_c_cmd = spwm.f_c;
    st.K_qe = k_q;
    st.K_dqe = K_dqe ? *K_dqe : 5.0 * k_q;
    st.K_pe = k_p;
    st.K_dpe = K_dpe ? *K_dpe : 5.0 * k_p;
    st.K_fs = K_fs ? *K_fs : 0.02 * spwm.f_s;
    st.K_fc = K_fc ? *K_fc : 0.05 * spwm.f_c;
    st.f_s_min = f_s_min;
    st.f_s_max = f_s_max;
    st.f_c_min = f_c_min;
    st.f_c_max = f_c_max;
    st.sign_fc = sign_fc;
    st.sync_carrier = sync_carrier;
    return st;
  }

  void validate() const {
    plant.validate();
    spwm.validate();
    if (!(dt > 0.0)) throw ConfigError("sim.dt must be positive");
    if (!(duration > 0.0)) throw ConfigError("sim.duration must be positive");
    if (trace_decimation < 1) throw ConfigError("sim.trace_decimation must be >= 1");

    // Integration stability guards: resolve the fastest carrier the run can
    // apply and the highest resonant frequency the Curie collapse can reach.
    const double max_carrier = mode == SimMode::closed_loop
                                   ? std::max(f_c_max, spwm.f_c)
                                   : spwm.f_c;
    const double carrier_limit = 1.0 / (50.0 * max_carrier);
    if (dt > carrier_limit) {
      std::ostringstream msg;
      msg << "sim.dt violates the carrier stability guard dt <= 1/(50*f_c_max): dt="
          << dt << ", limit=" << carrier_limit;
      throw ConfigError(msg.str());
    }
    const double f0_hot = resonant_frequency(plant.L_air_frac * plant.L0, plant.C);
    const double f0_limit = 1.0 / (50.0 * f0_hot);
    if (dt > f0_limit) {
      std::ostringstream msg;
      msg << "sim.dt violates the resonance stability guard dt <= 1/(50*f0_max): dt="
          << dt << ", limit=" << f0_limit;
      throw ConfigError(msg.str());
    }

    if (mode == SimMode::closed_loop) {
      ControllerState st = make_controller_state();
      st.validate();
      if (spwm.f_c < st.min_carrier_ratio * spwm.f_s)
        throw ConfigError("spwm.f_c must start at or above 4*f_s in closed_loop mode");
      // The fuzzy controllers must build (throws on a malformed inline grid).
      controller_from_config(resonance_rules);
      controller_from_config(power_rules);
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& value, const std::string& where) {
  try {
    size_t pos = 0;
    const double d = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + value + "'");
  }
}

inline long parse_long(const std::string& value, const std::string& where) {
  try {
    size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected an integer, got '" + value + "'");
  }
}

inline bool parse_bool(const std::string& value, const std::string& where) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(where + ": expected true/false, got '" + value + "'");
}

using KeySetter = std::function<void(SimConfig&, const std::string&, const std::string&)>;

inline const std::map<std::string, KeySetter>& key_table() {
  static const std::map<std::string, KeySetter> table = [] {
    std::map<std::string, KeySetter> t;
    const auto dbl = [](double SimConfig::* field) {
      return [field](SimConfig& c, const std::string& v, const std::string& w) {
        c.*field = parse_double(v, w);
      };
    };
    const auto opt = [](std::optional<double> SimConfig::* field) {
      return [field](SimConfig& c, const std::string& v, const std::string& w) {
        c.*field = parse_double(v, w);
      };
    };
    const auto plant_dbl = [](double LoadParams::* field) {
      return [field](SimConfig& c, const std::string& v, const std::string& w) {
        c.plant.*field = parse_double(v, w);
      };
    };
    const auto spwm_dbl = [](double SpwmConfig::* field) {
      return [field](SimConfig& c, const std::string& v, const std::string& w) {
        c.spwm.*field = parse_double(v, w);
      };
    };

    t["sim.dt"] = dbl(&SimConfig::dt);
    t["sim.duration"] = dbl(&SimConfig::duration);
    t["sim.mode"] = [](SimConfig& c, const std::string& v, const std::string& w) {
      if (v == "open_loop") c.mode = SimMode::open_loop;
      else if (v == "closed_loop") c.mode = SimMode::closed_loop;
      else throw ConfigError(w + ": expected open_loop or closed_loop, got '" + v + "'");
    };
    t["sim.trace_decimation"] = [](SimConfig& c, const std::string& v, const std::string& w) {
      c.trace_decimation = parse_long(v, w);
    };
    t["sim.output_path"] = [](SimConfig& c, const std::string& v, const std::string&) {
      c.output_path = v;
    };
    t["sim.trace_switch"] = [](SimConfig& c, const std::string& v, const std::string& w) {
      c.trace_switch = parse_bool(v, w);
    };

    t["plant.R0"] = plant_dbl(&LoadParams::R0);
    t["plant.L0"] = plant_dbl(&LoadParams::L0);
    t["plant.C"] = plant_dbl(&LoadParams::C);
    t["plant.alpha"] = plant_dbl(&LoadParams::alpha);
    t["plant.T0"] = plant_dbl(&LoadParams::T0);
    t["plant.T_curie"] = plant_dbl(&LoadParams::T_curie);
    t["plant.curie_width"] = plant_dbl(&LoadParams::curie_width);
    t["plant.L_air_frac"] = plant_dbl(&LoadParams::L_air_frac);
    t["plant.c_heat"] = plant_dbl(&LoadParams::c_heat);
    t["plant.m"] = plant_dbl(&LoadParams::mass);
    t["plant.eta"] = plant_dbl(&LoadParams::eta);
    t["plant.cooling"] = plant_dbl(&LoadParams::cooling);

    t["spwm.f_s"] = spwm_dbl(&SpwmConfig::f_s);
    t["spwm.f_c"] = spwm_dbl(&SpwmConfig::f_c);
    t["spwm.M"] = spwm_dbl(&SpwmConfig::modulation_index);
    t["spwm.V_dc"] = spwm_dbl(&SpwmConfig::v_dc);

    t["ctrl.P_ref"] = opt(&SimConfig::P_ref);
    t["ctrl.I_rated"] = dbl(&SimConfig::I_rated);
    t["ctrl.K_qe"] = opt(&SimConfig::K_qe);
    t["ctrl.K_dqe"] = opt(&SimConfig::K_dqe);
    t["ctrl.K_pe"] = opt(&SimConfig::K_pe);
    t["ctrl.K_dpe"] = opt(&SimConfig::K_dpe);
    t["ctrl.K_fs"] = opt(&SimConfig::K_fs);
    t["ctrl.K_fc"] = opt(&SimConfig::K_fc);
    t["ctrl.f_s_min"] = dbl(&SimConfig::f_s_min);
    t["ctrl.f_s_max"] = dbl(&SimConfig::f_s_max);
    t["ctrl.f_c_min"] = dbl(&SimConfig::f_c_min);
    t["ctrl.f_c_max"] = dbl(&SimConfig::f_c_max);
    t["ctrl.sign_fc"] = dbl(&SimConfig::sign_fc);
    t["ctrl.sync_carrier"] = [](SimConfig& c, const std::string& v, const std::string& w) {
      c.sync_carrier = parse_bool(v, w);
    };
    t["ctrl.resonance_rules"] = [](SimConfig& c, const std::string& v, const std::string&) {
      c.resonance_rules = v;
    };
    t["ctrl.power_rules"] = [](SimConfig& c, const std::string& v, const std::string&) {
      c.power_rules = v;
    };
    return t;
  }();
  return table;
}

}  // namespace detail

// Parses a configuration stream; missing keys keep the built-in defaults.
inline SimConfig parse_config(std::istream& in, const std::string& name) {
  SimConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const std::string where = name + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key");

    const auto& table = detail::key_table();
    const auto it = table.find(key);
    if (it == table.end())
      throw ConfigError(where + ": unknown key '" + key + "'");
    it->second(cfg, value, where + " (" + key + ")");
  }
  cfg.validate();
  return cfg;
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

// Built-in presets: the default scenario plus the two shipped rule grids.
inline std::vector<std::pair<std::string, std::string>> preset_list() {
  return {
      {"default",
       "reference operating point (f_s=250 Hz, f_c=1000 Hz, V_dc=400 V, M=0.8);"
       " any key left out of a config file takes these values"},
      {"resonance5",
       "5x5 rule grid for the resonance controller (reactive-power error x delta)"},
      {"power9",
       "9x9 rule grid for the power controller (power error x delta)"},
  };
}

}  // namespace ihsim
