#pragma once

// 57Fe nuclei in a thin-film x-ray cavity driven by broadband double pulses.
// SI units throughout.

#include <string>
#include <vector>

#include "stimem/semiclassical.hpp"

namespace stimem::nuclear {

namespace si {
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double c = 299792458.0;              // m/s
inline constexpr double eps0 = 8.8541878128e-12;      // F/m
inline constexpr double electron_volt = 1.602176634e-19;  // J
inline constexpr double atomic_mass = 1.66053906660e-27;  // kg
}  // namespace si

struct NuclearTarget {
  double gamma_single = 7.1e6;               // 1/s
  double dipole = 1.3e-35;                   // C m
  double transition_energy_ev = 14.4e3;
  double grazing_angle = 2.5e-3;             // rad
  double beam_width = 10e-6;                 // m; unpublished, user supplied
  double layer_thickness = 1.2e-9;           // m
  double quality_factor = 50.0;              // (0, 100)
  double iron_density = 7874.0;              // kg/m^3
  double nucleus_mass = 56.94 * si::atomic_mass;  // kg
  double coherent_nuclei = 25.0;             // N_coh

  void validate() const;

  double omega() const noexcept { return transition_energy_ev * si::electron_volt / si::hbar; }
  double lifetime() const noexcept { return 1.0 / gamma_single; }
  // A_target = d_beam^2 / sin(phi)
  double target_area() const noexcept;
  double effective_thickness() const noexcept { return layer_thickness * quality_factor; }
  double irradiated_nuclei() const noexcept;
  // M_coh = N_n / N_coh
  double coherence_volumes() const noexcept { return irradiated_nuclei() / coherent_nuclei; }
  double gamma_collective() const noexcept { return coherent_nuclei * gamma_single; }
};

struct XrayPulseSpec {
  double duration = 100e-15;  // FWHM T_P, s
  double n_res = 1.0;
  double delay = 5e-12;       // tau_d, s
  double phase = kPi;         // Phi_M
  // Resonant-photon number of pulse 2 relative to pulse 1.
  double second_fraction = 1.0;

  void validate() const;

  // T_P = 2 sqrt(ln 2) sigma_t
  double sigma_t() const noexcept;
  double sigma_omega() const noexcept { return 1.0 / sigma_t(); }
  // W_P = (2 sqrt(ln 2))^2 / T_P
  double spectral_width() const noexcept;
};

struct BroadbandAmplitude {
  double amplitude = 0.0;            // V/m
  double ratio_single = 0.0;         // W_P / Gamma_A
  double ratio_collective = 0.0;     // W_P / Gamma_Ncoh
  std::vector<std::string> warnings;
};

// E0 = (n_res hbar omega0 / (c A_target eps0 Gamma_A sigma_t^2))^(1/2)
BroadbandAmplitude broadband_amplitude(const XrayPulseSpec& spec, const NuclearTarget& target);

// Gamma = omega^3 |d|^2 / (3 pi eps0 hbar c^3)
double wigner_weisskopf_3d(double omega, double dipole);

struct CollectiveScaling {
  double rabi = 0.0;
  double gamma = 0.0;
};

// Omega -> sqrt(N_coh) Omega, Gamma -> N_coh Gamma_A.
CollectiveScaling collective_scale(const NuclearTarget& target, double rabi);

struct DelayedSignal {
  double value = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
};

// End of the detection window: population down by `decades` orders of magnitude.
double detection_end(double gamma, double decades = 10.0);

// M_coh / (T_end - T_start) * int_{T_start}^{T_end} rho22(T_start) exp(-Gamma t) dt, closed form.
DelayedSignal delayed_signal(double rho22_at_start, const NuclearTarget& target, double t_start,
                             double t_end);

// D_ref - D_signal; throws ModelError when the windows differ.
double delta_d(const DelayedSignal& reference, const DelayedSignal& signal);

// M_coh * N_se
double stimulated_event_rate(double stimulated_photons, const NuclearTarget& target);

struct DecayCurvePoint {
  double time = 0.0;
  double reference = 0.0;
  double signal = 0.0;
};

struct NuclearScenarioResult {
  BroadbandAmplitude broadband;
  double rabi_peak = 0.0;        // collective peak Rabi frequency of pulse 1, 1/s
  double t_start = 0.0;
  double t_end = 0.0;
  double rho22_reference = 0.0;  // single pulse, at T_start
  double rho22_signal = 0.0;     // double pulse, at T_start
  DelayedSignal reference;
  DelayedSignal signal;
  double delta_d = 0.0;
  PerturbativeBreakdown breakdown;
  double stimulated_photons = 0.0;
  double event_rate = 0.0;
  double max_trace_drift = 0.0;
  // Delayed emission on [T_start, T_end], log-spaced, normalized so the
  // larger of the two curves peaks at 1.
  std::vector<DecayCurvePoint> decay_curve;
};

struct NuclearScenarioOptions {
  // OBE steps per sigma_t.
  int steps_per_sigma = 40;
  // Integration starts this many sigma_t before pulse 1.
  double lead_sigmas = 6.0;
  // Half-width of the perturbative window around pulse 2, in sigma_t.
  double breakdown_half_width = 3.0;
  std::size_t curve_points = 200;
};

// Pulse 1 centred at t = 0, pulse 2 at tau_d, delayed window from T_start = tau_d + T_P.
NuclearScenarioResult run_nuclear_scenario(const XrayPulseSpec& spec, const NuclearTarget& target,
                                           const NuclearScenarioOptions& options = {});

}  // namespace stimem::nuclear
