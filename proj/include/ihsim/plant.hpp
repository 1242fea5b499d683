#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "ihsim/errors.hpp"

// Electro-thermal series R-L-C load. Resistance rises linearly with charge
// temperature; inductance collapses through the Curie point on a logistic
// curve. Heating follows the calorimetric law dT/dt = 0.24*eta*P/(c*m).

namespace ihsim {

// Tank capacitance that resonates the cold coil (0.190 mH) at 250 Hz.
inline constexpr double default_tank_capacitance() {
  constexpr double w = 2.0 * std::numbers::pi * 250.0;
  return 1.0 / (w * w * 0.19e-3);
}

struct LoadParams {
  double R0 = 0.0219;         // coil resistance at T0, ohm
  double L0 = 0.19e-3;        // coil inductance at T0, H
  double C = default_tank_capacitance();  // series compensation capacitor, F
  double alpha = 0.004;       // resistance temperature coefficient, 1/degC
  double T0 = 25.0;           // reference temperature, degC
  double T_curie = 770.0;     // Curie temperature, degC
  double curie_width = 30.0;  // logistic transition width, degC
  double L_air_frac = 0.4;    // inductance fraction retained above Curie
  double c_heat = 0.11;       // specific heat of the charge, cal/(g*degC)
  double mass = 55000.0;      // charge mass, g
  double eta = 0.8;           // power-transfer efficiency
  double cooling = 0.0;       // linear loss to ambient (T0), cal/(s*degC)

  void validate() const {
    if (!(R0 > 0.0)) throw ConfigError("plant.R0 must be positive");
    if (!(L0 > 0.0)) throw ConfigError("plant.L0 must be positive");
    if (!(C > 0.0)) throw ConfigError("plant.C must be positive");
    if (!(L_air_frac > 0.0 && L_air_frac < 1.0))
      throw ConfigError("plant.L_air_frac must be in (0, 1)");
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("plant.eta must be in (0, 1]");
    if (!(curie_width > 0.0)) throw ConfigError("plant.curie_width must be positive");
    if (!(c_heat > 0.0)) throw ConfigError("plant.c_heat must be positive");
    if (!(mass > 0.0)) throw ConfigError("plant.m must be positive");
    if (cooling < 0.0) throw ConfigError("plant.cooling must be non-negative");
    if (!std::isfinite(alpha)) throw ConfigError("plant.alpha must be finite");
  }
};

struct PlantState {
  double i_L = 0.0;  // inductor current, A
  double v_C = 0.0;  // capacitor voltage, V
  double T = 25.0;   // charge temperature, degC
};

// Linear tempco law, floored at 0.1*R0.
inline double resistance_at(const LoadParams& p, double T) {
  return std::max(0.1 * p.R0, p.R0 * (1.0 + p.alpha * (T - p.T0)));
}

// L0 far below the Curie point, L_air_frac*L0 far above, logistic between.
inline double inductance_at(const LoadParams& p, double T) {
  const double l_air = p.L_air_frac * p.L0;
  const double z = (p.T_curie - T) / p.curie_width;
  const double sigma = 1.0 / (1.0 + std::exp(-z));
  return l_air + (p.L0 - l_air) * sigma;
}

inline double resonant_frequency(double L, double C) {
  return 1.0 / (2.0 * std::numbers::pi * std::sqrt(L * C));
}

// R + j(wL - 1/(wC)): capacitive below resonance, inductive above.
inline std::complex<double> series_impedance(double f, double R, double L,
                                             double C) {
  const double w = 2.0 * std::numbers::pi * f;
  return {R, w * L - 1.0 / (w * C)};
}

// Parallel-tank impedance form: Rp / (1 + j*Qp*(f/fo - fo/f)).
inline std::complex<double> parallel_tank_impedance(double f, double Rp,
                                                    double Qp, double fo) {
  const std::complex<double> den{1.0, Qp * (f / fo - fo / f)};
  return Rp / den;
}

// Per-step energy tallies, integrated with the same quadrature as the state.
struct EnergyAudit {
  double input = 0.0;       // integral of v_in * i dt, J
  double dissipated = 0.0;  // integral of R * i^2 dt, J
};

// One fixed-step RK4 update of (i_L, v_C) with v_in held constant over the
// step and R, L frozen at the entry temperature.
//
//   L di/dt = v_in - R i - v_C
//   C dv/dt = i
//
// Caller guarantees dt <= 1/(50*f0); configuration validation enforces it.
inline PlantState step_circuit(const PlantState& s, double v_in,
                               const LoadParams& p, double dt,
                               EnergyAudit* audit = nullptr) {
  const double R = resistance_at(p, s.T);
  const double L = inductance_at(p, s.T);

  const auto di = [&](double i, double v) { return (v_in - R * i - v) / L; };
  const auto dv = [&](double i) { return i / p.C; };

  const double i1 = s.i_L, v1 = s.v_C;
  const double a1 = di(i1, v1), b1 = dv(i1);
  const double i2 = i1 + 0.5 * dt * a1, v2 = v1 + 0.5 * dt * b1;
  const double a2 = di(i2, v2), b2 = dv(i2);
  const double i3 = i1 + 0.5 * dt * a2, v3 = v1 + 0.5 * dt * b2;
  const double a3 = di(i3, v3), b3 = dv(i3);
  const double i4 = i1 + dt * a3, v4 = v1 + dt * b3;
  const double a4 = di(i4, v4), b4 = dv(i4);

  PlantState out = s;
  out.i_L = i1 + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  out.v_C = v1 + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);

  if (audit) {
    // v_in is constant over the step, so its energy integral reduces to the
    // charge moved; dissipation uses the matching stage quadrature.
    audit->input += v_in * p.C * (out.v_C - v1);
    audit->dissipated +=
        dt / 6.0 * R * (i1 * i1 + 2.0 * i2 * i2 + 2.0 * i3 * i3 + i4 * i4);
  }
  return out;
}

// Calorimetric heating with optional linear loss to ambient (= T0).
inline PlantState update_thermal(const PlantState& s, double p_delivered,
                                 const LoadParams& p, double dt) {
  const double heat_rate_cal = 0.24 * p.eta * p_delivered - p.cooling * (s.T - p.T0);
  PlantState out = s;
  out.T += heat_rate_cal * dt / (p.c_heat * p.mass);
  return out;
}

}  // namespace ihsim
