#include "stimem/semiclassical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "stimem/errors.hpp"
#include "stimem/integrator.hpp"

namespace stimem {

cdouble PulsePair::envelope(double t) const noexcept {
  const double a = t - first_center;
  const double b = t - second_center;
  const double r2 = rate * rate;
  return amplitude * (first_scale * std::exp(-a * a * r2) +
                      second_scale * std::exp(-b * b * r2) * std::polar(1.0, relative_phase));
}

void PulsePair::validate() const {
  if (!(rate > 0.0)) throw ModelError("pulse envelope rate must be positive");
  if (!(second_center > first_center)) throw ModelError("second pulse must arrive after the first");
}

ObeTrajectory evolve_obe(const PulsePair& pulses, const ObeParams& params, const DensityState& initial,
                         double t_end, const ObeOptions& options) {
  pulses.validate();
  if (!(options.dt > 0.0)) throw ModelError("time step must be positive");
  if (options.stride < 1) throw ModelError("sampling stride must be >= 1");
  if (t_end < initial.time) throw ModelError("t_end lies before the initial time");
  if (options.dt > 1.0 / (20.0 * pulses.rate) * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt=" << options.dt << " does not resolve the pulse (need dt <= 1/(20 sigma c) = "
       << 1.0 / (20.0 * pulses.rate) << ")";
    throw IntegratorError(os.str(), 1.0 / (20.0 * pulses.rate));
  }

  // y = (rho11, rho22, rho12); matrix form with H12 = Omega^*/2:
  //   rho11' =  i Omega/2 rho12 - i Omega^*/2 rho21 + Gamma rho22
  //   rho12' =  i Omega^*/2 (rho11 - rho22) - (Gamma/2 + i Delta) rho12
  //   rho22' = -rho11'
  using Vec = std::array<cdouble, 3>;
  auto rhs = [&](double t, std::span<const cdouble> y, std::span<cdouble> dy) {
    const cdouble omega = params.dipole * pulses.envelope(t);
    const cdouble i(0.0, 1.0);
    const cdouble r12 = y[2];
    const cdouble r21 = std::conj(r12);
    const double d11 = (i * omega * 0.5 * r12 - i * std::conj(omega) * 0.5 * r21).real() +
                       params.gamma * y[1].real();
    dy[0] = d11;
    dy[1] = -d11;
    dy[2] = i * std::conj(omega) * 0.5 * (y[0] - y[1]) - (0.5 * params.gamma + i * params.detuning) * r12;
  };

  ObeTrajectory out;
  Vec y{cdouble(initial.rho11), cdouble(initial.rho22), initial.rho12};
  const double t0 = initial.time;
  const auto steps = static_cast<std::size_t>(std::ceil((t_end - t0) / options.dt - 1e-9));
  const double dt = steps > 0 ? (t_end - t0) / static_cast<double>(steps) : 0.0;
  const double trace0 = initial.trace();

  auto snapshot = [&](double t) {
    DensityState s{y[0].real(), y[1].real(), y[2], t};
    const double drift = std::abs(s.trace() - trace0);
    out.max_trace_drift = std::max(out.max_trace_drift, drift);
    if (drift > options.trace_tolerance) {
      std::ostringstream os;
      os << "trace drift " << drift << " at t=" << t;
      throw IntegratorError(os.str(), 0.5 * dt);
    }
    return s;
  };

  out.samples.push_back(snapshot(t0));
  Rk4Stepper<Vec> stepper(3);
  for (std::size_t i = 1; i <= steps; ++i) {
    stepper.step(rhs, t0 + static_cast<double>(i - 1) * dt, dt, y);
    // populations stay real; drop rounding noise in their imaginary parts
    y[0] = y[0].real();
    y[1] = y[1].real();
    if (i % static_cast<std::size_t>(options.stride) == 0 || i == steps)
      out.samples.push_back(snapshot(t0 + static_cast<double>(i) * dt));
  }
  out.final_state = out.samples.back();
  out.final_state.time = t_end;
  return out;
}

double normalize_amplitude_1d(double n_res, double beam_area, double sigma, double omega0,
                              EnergyConvention convention) {
  if (!(n_res > 0.0 && beam_area > 0.0 && sigma > 0.0 && omega0 > 0.0))
    throw ModelError("amplitude normalization needs positive inputs");
  const double energy = (convention == EnergyConvention::per_pulse ? 1.0 : 2.0) * n_res * omega0;
  // eps0 A E^2 int exp(-2 sigma^2 z^2) <cos^2> dz = A E^2 sqrt(pi/2) / (2 sigma)
  const double per_unit = beam_area * std::sqrt(0.5 * kPi) / (2.0 * sigma);
  return std::sqrt(energy / per_unit);
}

double PerturbativeBreakdown::predicted_excited(double rho22_at_t_int) const noexcept {
  return rho22_at_t_int - spontaneous_decay - stimulated + absorption - phase_first + phase_second;
}

PerturbativeBreakdown perturbative_terms(const DensityState& at_t_int, const RabiEnvelope& rabi,
                                         double phase, double duration, double gamma,
                                         const BreakdownOptions& options) {
  if (!(duration > 0.0)) throw ModelError("pulse duration must be positive");
  if (options.nodes < 2 || options.nodes % 2 != 0)
    throw ModelError("Simpson quadrature needs an even number of intervals");

  const auto n = static_cast<std::size_t>(options.nodes);
  const double t0 = at_t_int.time;
  const double h = duration / static_cast<double>(n);
  std::vector<double> t(n + 1), omega(n + 1);
  double peak = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    t[i] = t0 + static_cast<double>(i) * h;
    omega[i] = rabi(t[i]);
    peak = std::max(peak, std::abs(omega[i]));
  }

  // Cumulative integral int_{t0}^{t_i} f: Simpson over pairs, with a
  // three-point rule for the half step at odd nodes.
  auto cumulative = [&](const std::vector<double>& f) {
    std::vector<double> c(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
      if (i % 2 == 0) {
        c[i] = c[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
      } else {
        // n is even, so i + 1 <= n
        c[i] = c[i - 1] + h / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1]);
      }
    }
    return c;
  };
  auto simpson = [&](const std::vector<double>& f) {
    double s = f[0] + f[n];
    for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
    return s * h / 3.0;
  };

  const std::vector<double> inner = cumulative(omega);  // int_{t0}^{t'} Omega(t'')
  std::vector<double> f_se(n + 1), f_nested(n + 1), f_lever(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    f_se[i] = omega[i] * inner[i];
    f_nested[i] = inner[i];
    f_lever[i] = omega[i] * (t[i] - t0);  // int_{t0}^{t'} dt'' Omega(t')
  }
  const double area = inner[n];
  const double kernel = simpson(f_se);
  const double nested = simpson(f_nested);
  const double lever = simpson(f_lever);
  const double im12 = at_t_int.rho12.imag();
  const double c = std::cos(phase);

  PerturbativeBreakdown out;
  out.phase = phase;
  out.t_int = t0;
  out.duration = duration;
  out.spontaneous_decay = (duration * gamma - 0.5 * gamma * gamma * duration * duration) * at_t_int.rho22;
  out.stimulated = 0.5 * kernel * at_t_int.rho22;
  out.absorption = 0.5 * kernel * at_t_int.rho11;
  out.phase_first = c * (nested + 0.5 * lever) * im12 * gamma;
  out.phase_second = c * area * im12;
  if (peak * duration > options.validity_limit) {
    std::ostringstream os;
    os << "low-excitation expansion outside its validity range: |Omega| T_P = " << peak * duration;
    out.warnings.push_back(os.str());
  }
  return out;
}

double stimulated_count(const PerturbativeBreakdown& breakdown) {
  double phi = std::fmod(breakdown.phase, kTwoPi);
  if (phi < 0.0) phi += kTwoPi;
  const bool second_branch = phi >= 0.5 * kPi && phi <= 1.5 * kPi;
  return breakdown.stimulated +
         std::abs(second_branch ? breakdown.phase_second : breakdown.phase_first);
}

double t_int_from_loss(double loss_fraction, double gamma) {
  if (!(loss_fraction > 0.0 && loss_fraction < 1.0))
    throw ModelError("loss fraction must lie in (0, 1)");
  if (!(gamma > 0.0)) throw ModelError("decay rate must be positive");
  return -std::log1p(-loss_fraction) / gamma;
}

}  // namespace stimem
