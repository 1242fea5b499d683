#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <utility>

// Per-fundamental-cycle power measurement from sampled inverter voltage and
// load current. Q is the fundamental-frequency reactive power (sign positive
// for lagging/inductive current); P is the full-waveform average of v*i so
// harmonic power reaches the thermal model.

namespace ihsim {

inline constexpr int kMinCycleSamples = 64;

struct MeasurementFrame {
  double P = 0.0;   // W, mean of v*i over the cycle
  double Q = 0.0;   // var, 0.5*Im(V1*conj(I1))
  double S1 = 0.0;  // VA, 0.5*|V1|*|I1|
  std::complex<double> V1{};
  std::complex<double> I1{};
  long cycle_index = 0;
  bool valid = false;
};

// Single-bin DFT at the window fundamental: X = (2/N) sum x[k] e^{-j2pik/N}.
// A pure sine of amplitude A maps to magnitude A; DC and exact harmonics of
// the window vanish.
inline std::pair<std::complex<double>, std::complex<double>>
fundamental_phasors(std::span<const double> v_samples,
                    std::span<const double> i_samples) {
  const size_t n = v_samples.size();
  const double ang = -2.0 * std::numbers::pi / static_cast<double>(n);
  const std::complex<double> rot{std::cos(ang), std::sin(ang)};
  std::complex<double> w{1.0, 0.0};
  std::complex<double> v_acc{}, i_acc{};
  for (size_t k = 0; k < n; ++k) {
    v_acc += v_samples[k] * w;
    i_acc += i_samples[k] * w;
    w *= rot;
  }
  const double scale = 2.0 / static_cast<double>(n);
  return {scale * v_acc, scale * i_acc};
}

inline MeasurementFrame compute_powers(std::complex<double> V1,
                                       std::complex<double> I1,
                                       std::span<const double> v_samples,
                                       std::span<const double> i_samples) {
  MeasurementFrame f;
  f.V1 = V1;
  f.I1 = I1;
  double acc = 0.0;
  for (size_t k = 0; k < v_samples.size(); ++k) acc += v_samples[k] * i_samples[k];
  f.P = acc / static_cast<double>(v_samples.size());
  const std::complex<double> s1 = V1 * std::conj(I1);
  f.Q = 0.5 * s1.imag();
  f.S1 = 0.5 * std::abs(V1) * std::abs(I1);
  f.valid = true;
  return f;
}

// Full per-cycle measurement; windows shorter than kMinCycleSamples are
// marked invalid and carry zeros.
inline MeasurementFrame measure_cycle(std::span<const double> v_samples,
                                      std::span<const double> i_samples,
                                      long cycle_index) {
  if (v_samples.size() != i_samples.size() ||
      v_samples.size() < static_cast<size_t>(kMinCycleSamples)) {
    MeasurementFrame f;
    f.cycle_index = cycle_index;
    return f;
  }
  const auto [V1, I1] = fundamental_phasors(v_samples, i_samples);
  MeasurementFrame f = compute_powers(V1, I1, v_samples, i_samples);
  f.cycle_index = cycle_index;
  return f;
}

}  // namespace ihsim
