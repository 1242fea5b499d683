#pragma once

#include <cmath>
#include <numbers>

#include "ihsim/errors.hpp"

// Bipolar sinusoidal PWM: a sine reference against a triangular carrier,
// two-level full-bridge output. Both waves run on free phase accumulators so
// frequency commands never cause phase jumps.

namespace ihsim {

struct SpwmConfig {
  double f_s = 250.0;              // fundamental (reference) frequency, Hz
  double f_c = 1000.0;             // triangular carrier frequency, Hz
  double modulation_index = 0.8;   // reference amplitude / carrier amplitude
  double v_dc = 400.0;             // DC-link voltage, V

  void validate() const {
    if (!(f_s > 0.0)) throw ConfigError("spwm.f_s must be positive");
    if (!(f_c >= 2.0 * f_s)) throw ConfigError("spwm.f_c must be at least 2*f_s");
    if (!(modulation_index > 0.0 && modulation_index <= 1.0))
      throw ConfigError("spwm.M must be in (0, 1]");
    if (!(v_dc > 0.0)) throw ConfigError("spwm.V_dc must be positive");
  }
};

struct PhaseState {
  double theta_s = 0.0;  // reference phase, rad in [0, 2pi)
  double theta_c = 0.0;  // carrier phase, cycles in [0, 1)
};

inline double reference_wave(const PhaseState& phase, double modulation_index) {
  return modulation_index * std::sin(phase.theta_s);
}

// Triangle from -1 at phase 0 up to +1 at phase 0.5 and back.
inline double carrier_wave(const PhaseState& phase) {
  return 1.0 - 4.0 * std::abs(phase.theta_c - 0.5);
}

// Bipolar two-level comparison; ties resolve high.
inline int switch_state(double ref, double car) { return ref >= car ? +1 : -1; }

// Ideal full bridge: no dead time, no device drops.
inline double inverter_voltage(int s, double v_dc) { return s * v_dc; }

inline PhaseState advance_phases(PhaseState phase, double f_s, double f_c,
                                 double dt) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  phase.theta_s = std::fmod(phase.theta_s + two_pi * f_s * dt, two_pi);
  phase.theta_c = std::fmod(phase.theta_c + f_c * dt, 1.0);
  return phase;
}

}  // namespace ihsim
