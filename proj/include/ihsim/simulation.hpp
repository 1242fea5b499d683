#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ihsim/config.hpp"
#include "ihsim/control.hpp"
#include "ihsim/errors.hpp"
#include "ihsim/fuzzy.hpp"
#include "ihsim/plant.hpp"
#include "ihsim/power_meter.hpp"
#include "ihsim/spwm.hpp"

// Deterministic fixed-step driver. Inner loop per dt: advance phases ->
// compare -> bridge voltage -> RK4 circuit step -> sample buffers. Per
// fundamental cycle: measurement frame -> thermal update -> (closed loop)
// controller commands, applied at the cycle boundary.

namespace ihsim {

struct TraceRow {
  double t;      // s
  double v_inv;  // V, bridge output applied during the step
  double i_L;    // A, end of step
  double P;      // W, last completed cycle
  double Q;      // var, last completed cycle
  double f_s;    // Hz
  double f_c;    // Hz
  double T;      // degC
  double R;      // ohm
  double L;      // H
  int s;         // switching state, +1/-1
};

struct CycleRecord {
  long cycle = 0;
  double t_end = 0.0;  // s, end of the measurement window
  MeasurementFrame frame;
  double f_s = 0.0;  // command applied for the next cycle
  double f_c = 0.0;
  double u_res = 0.0;
  double u_pow = 0.0;
  // plant curve values during this cycle, for summaries and oracles
  double T = 0.0;
  double R = 0.0;
  double L = 0.0;
  double f0 = 0.0;
};

struct Summary {
  // steady-state window = last 20% of completed cycles
  double steady_P = 0.0;
  double steady_P_err_mean = 0.0;  // |P - P_ref| / P_ref
  double steady_P_err_max = 0.0;
  double steady_q_over_s_mean = 0.0;
  double steady_q_over_s_max = 0.0;
  double steady_fs_err_mean = 0.0;  // |f_s - f0| / f0
  double steady_fs_err_max = 0.0;
  double final_T = 0.0;
  double energy_in = 0.0;          // J
  double energy_dissipated = 0.0;  // J
  double energy_balance_err = 0.0; // relative residual of the audit
  long lock_cycle = 0;  // first cycle after which fs stays within 2% of f0
  double lock_time = 0.0;  // s
  long cycles = 0;
  long steps = 0;
};

class Simulator {
 public:
  explicit Simulator(SimConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    plant_.T = cfg_.plant.T0;
    ctl_ = cfg_.make_controller_state();
    if (cfg_.mode == SimMode::closed_loop) {
      resonance_ctl_ = controller_from_config(cfg_.resonance_rules);
      power_ctl_ = controller_from_config(cfg_.power_rules);
    }
  }

  bool finished() const {
    const long n = samples_per_cycle();
    return (static_cast<double>(steps_ + n) * cfg_.dt) > cfg_.duration * (1.0 + 1e-12);
  }

  // Advances exactly one fundamental cycle and runs the per-cycle stages.
  const CycleRecord& run_cycle() {
    const long n = samples_per_cycle();
    const double dt = cfg_.dt;
    const double f_s = ctl_.f_s;
    const double f_c = ctl_.f_c;
    const double m_index = cfg_.spwm.modulation_index;
    const double v_dc = cfg_.spwm.v_dc;

    v_buf_.resize(n);
    i_buf_.resize(n);

    // R, L are frozen for the whole cycle: T only changes at boundaries.
    const double R_cyc = resistance_at(cfg_.plant, plant_.T);
    const double L_cyc = inductance_at(cfg_.plant, plant_.T);
    const double stored0 = stored_energy(L_cyc);

    double sum_i_sq = 0.0;
    for (long k = 0; k < n; ++k) {
      const double ref = reference_wave(phase_, m_index);
      const double car = carrier_wave(phase_);
      const int s = switch_state(ref, car);
      const double v_in = inverter_voltage(s, v_dc);
      plant_ = step_circuit(plant_, v_in, cfg_.plant, dt, &audit_);
      v_buf_[static_cast<size_t>(k)] = v_in;
      i_buf_[static_cast<size_t>(k)] = plant_.i_L;
      sum_i_sq += plant_.i_L * plant_.i_L;
      phase_ = advance_phases(phase_, f_s, f_c, dt);
      ++steps_;
      if (steps_ % cfg_.trace_decimation == 0) {
        trace_.push_back({static_cast<double>(steps_) * dt, v_in, plant_.i_L,
                          last_P_, last_Q_, f_s, f_c, plant_.T, R_cyc, L_cyc, s});
      }
    }
    stored_delta_ += stored_energy(L_cyc) - stored0;

    const double t_now = static_cast<double>(steps_) * dt;
    if (!std::isfinite(plant_.i_L) || !std::isfinite(plant_.v_C) ||
        !std::isfinite(plant_.T)) {
      char msg[96];
      std::snprintf(msg, sizeof msg, "non-finite plant state at t=%.9g s", t_now);
      throw NumericError(msg, t_now);
    }

    ++cycle_count_;
    const MeasurementFrame frame = measure_cycle(v_buf_, i_buf_, cycle_count_);
    if (frame.valid) {
      last_P_ = frame.P;
      last_Q_ = frame.Q;
    }

    const double p_delivered = R_cyc * sum_i_sq / static_cast<double>(n);
    plant_ = update_thermal(plant_, p_delivered, cfg_.plant,
                            static_cast<double>(n) * dt);

    if (cfg_.mode == SimMode::closed_loop && frame.valid)
      closed_loop_step(ctl_, resonance_ctl_, power_ctl_, frame);

    CycleRecord rec;
    rec.cycle = cycle_count_;
    rec.t_end = t_now;
    rec.frame = frame;
    rec.f_s = ctl_.f_s;
    rec.f_c = ctl_.f_c;
    rec.u_res = ctl_.last_u_res;
    rec.u_pow = ctl_.last_u_pow;
    rec.T = plant_.T;
    rec.R = R_cyc;
    rec.L = L_cyc;
    rec.f0 = resonant_frequency(L_cyc, cfg_.plant.C);
    cycles_.push_back(rec);
    return cycles_.back();
  }

  void run_all() {
    while (!finished()) run_cycle();
    if (cycles_.empty())
      throw ConfigError("sim.duration is shorter than one fundamental cycle");
  }

  const SimConfig& config() const { return cfg_; }
  const std::vector<TraceRow>& trace() const { return trace_; }
  const std::vector<CycleRecord>& cycles() const { return cycles_; }
  const PlantState& plant_state() const { return plant_; }
  ControllerState& controller() { return ctl_; }
  const EnergyAudit& audit() const { return audit_; }
  long steps() const { return steps_; }
  double time() const { return static_cast<double>(steps_) * cfg_.dt; }

  // Relative residual of input = stored + dissipated, with stored-energy
  // deltas taken at the per-cycle frozen inductance.
  double energy_balance_error() const {
    const double residual =
        std::abs(audit_.input - stored_delta_ - audit_.dissipated);
    const double scale = std::max({std::abs(audit_.input),
                                   std::abs(audit_.dissipated), 1e-9});
    return residual / scale;
  }

 private:
  long samples_per_cycle() const {
    return std::lround(1.0 / (ctl_.f_s * cfg_.dt));
  }

  double stored_energy(double L) const {
    return 0.5 * L * plant_.i_L * plant_.i_L +
           0.5 * cfg_.plant.C * plant_.v_C * plant_.v_C;
  }

  SimConfig cfg_;
  PlantState plant_;
  PhaseState phase_;
  ControllerState ctl_;
  FuzzyController resonance_ctl_;
  FuzzyController power_ctl_;
  EnergyAudit audit_;
  double stored_delta_ = 0.0;
  double last_P_ = 0.0;
  double last_Q_ = 0.0;
  long steps_ = 0;
  long cycle_count_ = 0;
  std::vector<double> v_buf_, i_buf_;
  std::vector<TraceRow> trace_;
  std::vector<CycleRecord> cycles_;
};

// Steady-state statistics over the last 20% of cycles, plus the lock cycle:
// the first cycle after which |f_s - f0|/f0 stays within 2%.
inline Summary summarize(const SimConfig& cfg,
                         const std::vector<CycleRecord>& cycles,
                         const EnergyAudit& audit, double balance_err,
                         double final_T, long steps) {
  Summary s;
  s.cycles = static_cast<long>(cycles.size());
  s.steps = steps;
  s.final_T = final_T;
  s.energy_in = audit.input;
  s.energy_dissipated = audit.dissipated;
  s.energy_balance_err = balance_err;
  if (cycles.empty()) return s;

  const double p_ref = cfg.resolved_P_ref();
  const size_t begin = cycles.size() - std::max<size_t>(1, cycles.size() / 5);
  double p_acc = 0, pe_acc = 0, qs_acc = 0, fe_acc = 0;
  size_t count = 0;
  for (size_t k = begin; k < cycles.size(); ++k) {
    const CycleRecord& c = cycles[k];
    if (!c.frame.valid) continue;
    const double pe = std::abs(c.frame.P - p_ref) / p_ref;
    const double qs = c.frame.S1 > 0 ? std::abs(c.frame.Q) / c.frame.S1 : 0.0;
    const double fe = std::abs(c.f_s - c.f0) / c.f0;
    p_acc += c.frame.P;
    pe_acc += pe;
    qs_acc += qs;
    fe_acc += fe;
    s.steady_P_err_max = std::max(s.steady_P_err_max, pe);
    s.steady_q_over_s_max = std::max(s.steady_q_over_s_max, qs);
    s.steady_fs_err_max = std::max(s.steady_fs_err_max, fe);
    ++count;
  }
  if (count > 0) {
    s.steady_P = p_acc / count;
    s.steady_P_err_mean = pe_acc / count;
    s.steady_q_over_s_mean = qs_acc / count;
    s.steady_fs_err_mean = fe_acc / count;
  }

  long lock = 0;
  for (size_t k = 0; k < cycles.size(); ++k) {
    const double fe = std::abs(cycles[k].f_s - cycles[k].f0) / cycles[k].f0;
    if (fe > 0.02) lock = cycles[k].cycle;
  }
  s.lock_cycle = lock;
  s.lock_time = lock > 0 && static_cast<size_t>(lock) <= cycles.size()
                    ? cycles[static_cast<size_t>(lock) - 1].t_end
                    : 0.0;
  return s;
}

namespace detail {

inline void write_num(std::FILE* f, double v, bool lead_comma) {
  std::fprintf(f, lead_comma ? ",%.10g" : "%.10g", v);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace detail

inline void write_trace_csv(const std::string& path,
                            const std::vector<TraceRow>& rows,
                            bool with_switch) {
  std::unique_ptr<std::FILE, detail::FileCloser> f(std::fopen(path.c_str(), "wb"));
  if (!f) throw ConfigError("cannot write trace file '" + path + "'");
  std::fprintf(f.get(), "t,v_inv,i_L,P,Q,f_s,f_c,T,R,L%s\n", with_switch ? ",s" : "");
  for (const TraceRow& r : rows) {
    detail::write_num(f.get(), r.t, false);
    detail::write_num(f.get(), r.v_inv, true);
    detail::write_num(f.get(), r.i_L, true);
    detail::write_num(f.get(), r.P, true);
    detail::write_num(f.get(), r.Q, true);
    detail::write_num(f.get(), r.f_s, true);
    detail::write_num(f.get(), r.f_c, true);
    detail::write_num(f.get(), r.T, true);
    detail::write_num(f.get(), r.R, true);
    detail::write_num(f.get(), r.L, true);
    if (with_switch) std::fprintf(f.get(), ",%d", r.s);
    std::fputc('\n', f.get());
  }
}

inline void write_cycles_csv(const std::string& path,
                             const std::vector<CycleRecord>& records) {
  std::unique_ptr<std::FILE, detail::FileCloser> f(std::fopen(path.c_str(), "wb"));
  if (!f) throw ConfigError("cannot write cycle file '" + path + "'");
  std::fprintf(f.get(), "cycle,P,Q,S1,f_s,f_c,u_res,u_pow\n");
  for (const CycleRecord& r : records) {
    std::fprintf(f.get(), "%ld", r.cycle);
    detail::write_num(f.get(), r.frame.P, true);
    detail::write_num(f.get(), r.frame.Q, true);
    detail::write_num(f.get(), r.frame.S1, true);
    detail::write_num(f.get(), r.f_s, true);
    detail::write_num(f.get(), r.f_c, true);
    detail::write_num(f.get(), r.u_res, true);
    detail::write_num(f.get(), r.u_pow, true);
    std::fputc('\n', f.get());
  }
}

// Sibling path for the per-cycle log: trace.csv -> trace.cycles.csv.
inline std::string cycles_path_for(const std::string& trace_path) {
  const auto dot = trace_path.rfind('.');
  const auto slash = trace_path.find_last_of("/\\");
  const bool has_ext = dot != std::string::npos &&
                       (slash == std::string::npos || dot > slash);
  if (has_ext) return trace_path.substr(0, dot) + ".cycles" + trace_path.substr(dot);
  return trace_path + ".cycles.csv";
}

struct RunResult {
  Summary summary;
  std::vector<TraceRow> trace;
  std::vector<CycleRecord> cycles;
};

// Full scenario: run to completion and, when an output path is configured,
// write the step trace and the per-cycle log next to it.
inline RunResult run_simulation(const SimConfig& cfg) {
  Simulator sim(cfg);
  sim.run_all();
  RunResult out;
  out.summary = summarize(cfg, sim.cycles(), sim.audit(),
                          sim.energy_balance_error(), sim.plant_state().T,
                          sim.steps());
  out.trace = sim.trace();
  out.cycles = sim.cycles();
  if (!cfg.output_path.empty()) {
    write_trace_csv(cfg.output_path, out.trace, cfg.trace_switch);
    write_cycles_csv(cycles_path_for(cfg.output_path), out.cycles);
  }
  return out;
}

inline void print_summary(std::FILE* f, const Summary& s) {
  std::fprintf(f, "cycles=%ld\n", s.cycles);
  std::fprintf(f, "steps=%ld\n", s.steps);
  std::fprintf(f, "steady_P=%.10g\n", s.steady_P);
  std::fprintf(f, "steady_P_err_mean=%.10g\n", s.steady_P_err_mean);
  std::fprintf(f, "steady_P_err_max=%.10g\n", s.steady_P_err_max);
  std::fprintf(f, "steady_Q_over_S_mean=%.10g\n", s.steady_q_over_s_mean);
  std::fprintf(f, "steady_Q_over_S_max=%.10g\n", s.steady_q_over_s_max);
  std::fprintf(f, "steady_fs_err_mean=%.10g\n", s.steady_fs_err_mean);
  std::fprintf(f, "steady_fs_err_max=%.10g\n", s.steady_fs_err_max);
  std::fprintf(f, "lock_cycle=%ld\n", s.lock_cycle);
  std::fprintf(f, "lock_time=%.10g\n", s.lock_time);
  std::fprintf(f, "final_T=%.10g\n", s.final_T);
  std::fprintf(f, "energy_in=%.10g\n", s.energy_in);
  std::fprintf(f, "energy_dissipated=%.10g\n", s.energy_dissipated);
  std::fprintf(f, "energy_balance_err=%.10g\n", s.energy_balance_err);
}

}  // namespace ihsim
