#pragma once

// Optical Bloch equations for a two-level system driven by a Gaussian
// double pulse, plus the second-order decomposition of the second pulse's
// effect into decay, stimulated-emission, absorption and phase terms.

#include <functional>
#include <string>
#include <vector>

#include "stimem/core_model.hpp"

namespace stimem {

// E0(t) = A { s1 exp[-(t-L1)^2 r^2] + s2 exp[-(t-L2)^2 r^2 + i phi] },
// r = sigma c is the envelope rate (temporal width 1/r).
struct PulsePair {
  double amplitude = 0.0;
  double rate = 0.25;
  double first_center = 30.0;
  double second_center = 50.0;
  double relative_phase = 0.0;
  double first_scale = 1.0;
  double second_scale = 1.0;

  double delay() const noexcept { return second_center - first_center; }
  cdouble envelope(double t) const noexcept;
  // Throws ModelError unless rate > 0 and second_center > first_center.
  void validate() const;
};

// Density matrix of the two-level system (1 = ground, 2 = excited).
// Only rho12 is stored; rho21 = conj(rho12).
struct DensityState {
  double rho11 = 1.0;
  double rho22 = 0.0;
  cdouble rho12{0.0, 0.0};
  double time = 0.0;

  cdouble rho21() const noexcept { return std::conj(rho12); }
  double trace() const noexcept { return rho11 + rho22; }
  double purity() const noexcept { return rho11 * rho11 + rho22 * rho22 + 2.0 * std::norm(rho12); }
};

struct ObeParams {
  double gamma = 0.05;
  double detuning = 0.0;
  // Rabi frequency per unit field: Omega(t) = dipole * E0(t) (dipole/hbar in SI).
  double dipole = 0.0;
};

struct ObeOptions {
  double dt = 0.01;
  int stride = 10;
  double trace_tolerance = 1e-10;
};

struct ObeTrajectory {
  std::vector<DensityState> samples;
  DensityState final_state;
  double max_trace_drift = 0.0;
};

// Integrates d rho/dt = M(t) rho from `initial.time` to t_end with RK4.
// Requires dt <= 1/(20 rate). Throws IntegratorError on trace drift.
ObeTrajectory evolve_obe(const PulsePair& pulses, const ObeParams& params, const DensityState& initial,
                         double t_end, const ObeOptions& options = {});

enum class EnergyConvention {
  // Each pulse carries n_res hbar omega0 (both pulses together: n_res 2 hbar omega0).
  per_pulse,
  // A single pulse carries n_res 2 hbar omega0.
  single_pulse_doubled,
};

// Amplitude such that eps0 A int E^2 dz (carrier-averaged) equals the pulse
// energy; dimensionless units.
double normalize_amplitude_1d(double n_res, double beam_area, double sigma, double omega0,
                              EnergyConvention convention = EnergyConvention::per_pulse);

struct PerturbativeBreakdown {
  double spontaneous_decay = 0.0;  // R_sd
  double stimulated = 0.0;         // R_se
  double absorption = 0.0;         // R_ab
  double phase_first = 0.0;        // R_Phi1
  double phase_second = 0.0;       // R_Phi2
  double phase = 0.0;
  double t_int = 0.0;
  double duration = 0.0;
  std::vector<std::string> warnings;

  // rho22(t_int) - R_sd - R_se + R_ab - R_Phi1 + R_Phi2
  double predicted_excited(double rho22_at_t_int) const noexcept;
};

// Real single-pulse Rabi envelope Omega(t) on [t_int, t_int + duration].
using RabiEnvelope = std::function<double(double)>;

struct BreakdownOptions {
  // Simpson intervals per pulse duration (even).
  int nodes = 200;
  // |Omega| T_P above this adds a validity warning.
  double validity_limit = 0.3;
};

PerturbativeBreakdown perturbative_terms(const DensityState& at_t_int, const RabiEnvelope& rabi,
                                         double phase, double duration, double gamma,
                                         const BreakdownOptions& options = {});

// N_se with the phase reduced into [0, 2pi): R_se + |R_Phi2| on [pi/2, 3pi/2],
// R_se + |R_Phi1| otherwise.
double stimulated_count(const PerturbativeBreakdown& breakdown);

// t_int = -ln(1 - loss) / gamma
double t_int_from_loss(double loss_fraction, double gamma);

}  // namespace stimem
