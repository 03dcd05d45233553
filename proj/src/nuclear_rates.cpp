#include "stimem/nuclear_rates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stimem/errors.hpp"

namespace stimem::nuclear {

namespace {

const double kTwoSqrtLn2 = 2.0 * std::sqrt(std::log(2.0));

// Below this W_P/Gamma the spectral-overlap approximation is questionable.
constexpr double kBroadbandLimit = 100.0;

}  // namespace

void NuclearTarget::validate() const {
  if (!(gamma_single > 0.0)) throw ModelError("nuclear decay rate must be positive");
  if (!(dipole > 0.0)) throw ModelError("dipole moment must be positive");
  if (!(transition_energy_ev > 0.0)) throw ModelError("transition energy must be positive");
  if (!(grazing_angle > 0.0 && grazing_angle < 0.5 * kPi))
    throw ModelError("grazing angle must lie in (0, pi/2)");
  if (!(beam_width > 0.0)) throw ModelError("beam width must be positive");
  if (!(layer_thickness > 0.0)) throw ModelError("layer thickness must be positive");
  if (!(quality_factor > 0.0 && quality_factor < 100.0))
    throw ModelError("cavity Q factor must lie in (0, 100)");
  if (!(iron_density > 0.0 && nucleus_mass > 0.0)) throw ModelError("material constants must be positive");
  if (!(coherent_nuclei >= 1.0)) throw ModelError("N_coh must be >= 1");
}

double NuclearTarget::target_area() const noexcept {
  return beam_width * beam_width / std::sin(grazing_angle);
}

double NuclearTarget::irradiated_nuclei() const noexcept {
  return iron_density * target_area() * effective_thickness() / nucleus_mass;
}

void XrayPulseSpec::validate() const {
  if (!(duration > 0.0)) throw ModelError("pulse duration must be positive");
  if (!(n_res > 0.0)) throw ModelError("resonant photon number must be positive");
  if (!(delay > 0.0)) throw ModelError("pulse delay must be positive");
  if (!(second_fraction >= 0.0)) throw ModelError("second-pulse fraction must be non-negative");
}

double XrayPulseSpec::sigma_t() const noexcept { return duration / kTwoSqrtLn2; }

double XrayPulseSpec::spectral_width() const noexcept {
  return kTwoSqrtLn2 * kTwoSqrtLn2 / duration;
}

BroadbandAmplitude broadband_amplitude(const XrayPulseSpec& spec, const NuclearTarget& target) {
  spec.validate();
  target.validate();
  BroadbandAmplitude out;
  const double st = spec.sigma_t();
  out.amplitude = std::sqrt(spec.n_res * si::hbar * target.omega() /
                            (si::c * target.target_area() * si::eps0 * target.gamma_single * st * st));
  out.ratio_single = spec.spectral_width() / target.gamma_single;
  out.ratio_collective = spec.spectral_width() / target.gamma_collective();
  if (out.ratio_collective < kBroadbandLimit) {
    std::ostringstream os;
    os << "broadband approximation questionable: W_P / Gamma_Ncoh = " << out.ratio_collective;
    out.warnings.push_back(os.str());
  }
  return out;
}

double wigner_weisskopf_3d(double omega, double dipole) {
  if (!(omega > 0.0)) throw ModelError("transition frequency must be positive");
  return omega * omega * omega * dipole * dipole / (3.0 * kPi * si::eps0 * si::hbar * si::c * si::c * si::c);
}

CollectiveScaling collective_scale(const NuclearTarget& target, double rabi) {
  if (!(target.coherent_nuclei >= 1.0)) throw ModelError("N_coh must be >= 1");
  return {std::sqrt(target.coherent_nuclei) * rabi, target.gamma_collective()};
}

double detection_end(double gamma, double decades) {
  if (!(gamma > 0.0)) throw ModelError("decay rate must be positive");
  return decades * std::log(10.0) / gamma;
}

DelayedSignal delayed_signal(double rho22_at_start, const NuclearTarget& target, double t_start,
                             double t_end) {
  if (!(t_end > t_start)) throw ModelError("detection window needs T_end > T_start");
  const double g = target.gamma_collective();
  // rho22(T_start) is constant in the integrand
  const double integral = rho22_at_start * (std::exp(-g * t_start) - std::exp(-g * t_end)) / g;
  return {target.coherence_volumes() * integral / (t_end - t_start), t_start, t_end};
}

double delta_d(const DelayedSignal& reference, const DelayedSignal& signal) {
  if (reference.t_start != signal.t_start || reference.t_end != signal.t_end)
    throw ModelError("reference and signal use different detection windows");
  return reference.value - signal.value;
}

double stimulated_event_rate(double stimulated_photons, const NuclearTarget& target) {
  return target.coherence_volumes() * stimulated_photons;
}

NuclearScenarioResult run_nuclear_scenario(const XrayPulseSpec& spec, const NuclearTarget& target,
                                           const NuclearScenarioOptions& options) {
  NuclearScenarioResult out;
  out.broadband = broadband_amplitude(spec, target);

  const double st = spec.sigma_t();
  const CollectiveScaling coll = collective_scale(target, target.dipole / si::hbar);
  const double gamma = coll.gamma;

  PulsePair pulses;
  pulses.amplitude = out.broadband.amplitude;
  pulses.rate = 1.0 / (std::sqrt(2.0) * st);
  pulses.first_center = 0.0;
  pulses.second_center = spec.delay;
  pulses.relative_phase = spec.phase;
  pulses.second_scale = std::sqrt(spec.second_fraction);
  out.rabi_peak = coll.rabi * pulses.amplitude;

  const ObeParams params{gamma, 0.0, coll.rabi};
  ObeOptions obe;
  obe.dt = st / options.steps_per_sigma;
  obe.stride = 1 << 30;

  out.t_start = spec.delay + spec.duration;
  out.t_end = detection_end(gamma);
  if (!(out.t_end > out.t_start)) throw ModelError("pulses end after the detection window closes");

  DensityState ground;
  ground.time = -options.lead_sigmas * st;

  const auto with_both = evolve_obe(pulses, params, ground, out.t_start, obe);
  PulsePair single = pulses;
  single.second_scale = 0.0;
  const auto with_first = evolve_obe(single, params, ground, out.t_start, obe);
  out.max_trace_drift = std::max(with_both.max_trace_drift, with_first.max_trace_drift);

  out.rho22_signal = with_both.final_state.rho22;
  out.rho22_reference = with_first.final_state.rho22;
  out.signal = delayed_signal(out.rho22_signal, target, out.t_start, out.t_end);
  out.reference = delayed_signal(out.rho22_reference, target, out.t_start, out.t_end);
  out.delta_d = delta_d(out.reference, out.signal);

  // Second-order decomposition of pulse 2, starting from the single-pulse
  // state just before it.
  const double half = options.breakdown_half_width * st;
  const double t_int = spec.delay - half;
  const DensityState before = evolve_obe(single, params, ground, t_int, obe).final_state;
  const double peak2 = coll.rabi * pulses.amplitude * pulses.second_scale;
  const double rate = pulses.rate;
  const double center = spec.delay;
  out.breakdown = perturbative_terms(
      before,
      [=](double t) { return peak2 * std::exp(-(t - center) * (t - center) * rate * rate); },
      spec.phase, 2.0 * half, gamma);
  out.stimulated_photons = stimulated_count(out.breakdown);
  out.event_rate = stimulated_event_rate(out.stimulated_photons, target);

  const double scale = std::max(out.rho22_reference, out.rho22_signal);
  const std::size_t points = std::max<std::size_t>(options.curve_points, 2);
  const double log_a = std::log(out.t_start);
  const double log_b = std::log(out.t_end);
  out.decay_curve.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double t =
        std::exp(log_a + (log_b - log_a) * static_cast<double>(i) / static_cast<double>(points - 1));
    const double decay = std::exp(-gamma * (t - out.t_start));
    out.decay_curve.push_back({t, scale > 0.0 ? out.rho22_reference * decay / scale : 0.0,
                               scale > 0.0 ? out.rho22_signal * decay / scale : 0.0});
  }
  return out;
}

}  // namespace stimem::nuclear
