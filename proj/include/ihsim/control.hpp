#pragma once

#include <algorithm>
#include <cmath>

#include "ihsim/errors.hpp"
#include "ihsim/fuzzy.hpp"
#include "ihsim/power_meter.hpp"

// Once per fundamental cycle the two controllers turn (Q, dQ) into a
// fundamental-frequency increment and (P_e, dP_e) into a carrier-frequency
// increment (velocity form). Commands are clamped and the carrier is kept at
// or above four times the fundamental.

namespace ihsim {

struct ControllerState {
  double P_ref = 0.0;   // W
  double prev_P = 0.0;  // W, last cycle's measured power
  double prev_Q = 0.0;  // var
  double f_s = 250.0;   // applied fundamental, Hz
  double f_c = 1000.0;  // applied carrier, Hz
  double f_c_cmd = 1000.0;  // continuous carrier command before ratio locking

  double K_qe = 0.0;   // 1/VA
  double K_dqe = 0.0;  // 1/VA
  double K_pe = 0.0;   // 1/W
  double K_dpe = 0.0;  // 1/W
  double K_fs = 0.0;   // Hz per unit controller output
  double K_fc = 0.0;   // Hz per unit controller output

  double f_s_min = 150.0, f_s_max = 450.0;
  double f_c_min = 800.0, f_c_max = 5000.0;
  double sign_fc = -1.0;  // -1: positive power error lowers the carrier

  // Lock the applied carrier to an integer multiple of f_s. Keeps every
  // switching sideband on an exact harmonic of the measurement window, which
  // the per-cycle single-bin DFT rejects; free-running low ratios leak the
  // carrier component into the fundamental bin and bias Q.
  bool sync_carrier = true;
  long min_carrier_ratio = 4;

  double last_u_res = 0.0;  // most recent controller outputs, for logging
  double last_u_pow = 0.0;

  void validate() const {
    if (!(f_s_min > 0.0 && f_s_min <= f_s_max))
      throw ConfigError("ctrl.f_s_min/f_s_max must satisfy 0 < min <= max");
    if (!(f_c_min > 0.0 && f_c_min <= f_c_max))
      throw ConfigError("ctrl.f_c_min/f_c_max must satisfy 0 < min <= max");
    if (!(f_c_max >= min_carrier_ratio * f_s_max))
      throw ConfigError("ctrl.f_c_max must allow the carrier ratio guard: f_c_max >= 4*f_s_max");
    if (!(f_c_max - f_c_min >= f_s_max))
      throw ConfigError("ctrl carrier band too narrow: f_c_max - f_c_min must exceed f_s_max");
    if (!(std::abs(sign_fc) == 1.0)) throw ConfigError("ctrl.sign_fc must be +1 or -1");
    if (!(P_ref > 0.0)) throw ConfigError("ctrl.P_ref must be positive");
    if (!(K_qe > 0.0 && K_dqe > 0.0 && K_pe > 0.0 && K_dpe > 0.0))
      throw ConfigError("ctrl normalization gains must be positive");
    if (!(K_fs > 0.0 && K_fc > 0.0))
      throw ConfigError("ctrl output gains must be positive");
    if (!(f_s_min <= f_s && f_s <= f_s_max))
      throw ConfigError("spwm.f_s must start inside [ctrl.f_s_min, ctrl.f_s_max]");
    if (min_carrier_ratio < 2)
      throw ConfigError("ctrl carrier ratio guard must be at least 2");
  }
};

struct ControlCommand {
  double f_s = 0.0;
  double f_c = 0.0;
};

namespace detail {

inline double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

// Smallest/largest admissible integer carrier ratios for a given f_s.
inline long carrier_ratio_lo(const ControllerState& st, double f_s) {
  const long from_min = static_cast<long>(std::ceil(st.f_c_min / f_s - 1e-9));
  return std::max(st.min_carrier_ratio, from_min);
}

inline long carrier_ratio_hi(const ControllerState& st, double f_s) {
  return static_cast<long>(std::floor(st.f_c_max / f_s + 1e-9));
}

}  // namespace detail

// Resonance tracking: Q_e = K_qe*Q toward zero. With the rule grid's Z column
// {PS, PS, Z, NS, NS} top-to-bottom, inductive load (Q > 0) lowers f_s and
// capacitive load raises it.
inline double resonance_update(ControllerState& st, const FuzzyController& ctl,
                               const MeasurementFrame& frame) {
  if (!frame.valid) return st.f_s;
  const double q_e = detail::clamp_unit(st.K_qe * frame.Q);
  const double dq_e = detail::clamp_unit(st.K_dqe * (frame.Q - st.prev_Q));
  const double u = ctl.eval(q_e, dq_e);
  st.last_u_res = u;
  st.prev_Q = frame.Q;
  st.f_s = std::clamp(st.f_s + st.K_fs * u, st.f_s_min, st.f_s_max);
  return st.f_s;
}

// Power regulation: under-delivery (P < P_ref) raises u; with sign_fc = -1
// that lowers the carrier command.
inline double power_update(ControllerState& st, const FuzzyController& ctl,
                           const MeasurementFrame& frame) {
  if (!frame.valid) return st.f_c;
  const double p_e = detail::clamp_unit(st.K_pe * (st.P_ref - frame.P));
  const double dp_e = detail::clamp_unit(st.K_dpe * (st.prev_P - frame.P));
  const double u = ctl.eval(p_e, dp_e);
  st.last_u_pow = u;
  st.prev_P = frame.P;
  st.f_c_cmd = std::clamp(st.f_c_cmd + st.sign_fc * st.K_fc * u, st.f_c_min, st.f_c_max);
  return st.f_c_cmd;
}

// Runs both updates on the same frame, then resolves the applied carrier:
// ratio guard first ( f_c >= min_ratio * f_s ), then optional integer-ratio
// locking within [f_c_min, f_c_max]. Range validation guarantees an
// admissible ratio exists for every f_s in [f_s_min, f_s_max].
inline ControlCommand closed_loop_step(ControllerState& st,
                                       const FuzzyController& resonance_ctl,
                                       const FuzzyController& power_ctl,
                                       const MeasurementFrame& frame) {
  resonance_update(st, resonance_ctl, frame);
  power_update(st, power_ctl, frame);

  const double guard = static_cast<double>(st.min_carrier_ratio) * st.f_s;
  st.f_c_cmd = std::max(st.f_c_cmd, guard);

  if (st.sync_carrier) {
    const long lo = detail::carrier_ratio_lo(st, st.f_s);
    const long hi = detail::carrier_ratio_hi(st, st.f_s);
    const long ratio = std::clamp(std::lround(st.f_c_cmd / st.f_s), lo, hi);
    st.f_c = static_cast<double>(ratio) * st.f_s;
  } else {
    st.f_c = std::min(st.f_c_cmd, st.f_c_max);
  }
  return {st.f_s, st.f_c};
}

}  // namespace ihsim
