#include <doctest.h>

#include <cmath>

#include "stimem/errors.hpp"
#include "stimem/semiclassical.hpp"

using namespace stimem;

namespace {

const double kDipole = std::sqrt(0.05 / 1000.0);

PulsePair published(double phase) {
  PulsePair p;
  p.amplitude = normalize_amplitude_1d(1.0, 1.0, 0.25, 1000.0);
  p.relative_phase = phase;
  return p;
}

}  // namespace

TEST_CASE("published amplitude normalization") {
  const double e0 = normalize_amplitude_1d(1.0, 1.0, 0.25, 1000.0);
  CHECK(e0 == doctest::Approx(19.97).epsilon(1e-3));
  CHECK(kDipole * e0 == doctest::Approx(0.1412).epsilon(1e-3));
  // Pulse area of one Gaussian term.
  CHECK(kDipole * e0 * std::sqrt(kPi) / 0.25 == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("amplitude scaling") {
  const double e0 = normalize_amplitude_1d(1.0, 1.0, 0.25, 1000.0);
  CHECK(normalize_amplitude_1d(4.0, 1.0, 0.25, 1000.0) == doctest::Approx(2.0 * e0));
  CHECK(normalize_amplitude_1d(1.0, 1.0, 0.125, 1000.0) == doctest::Approx(e0 / std::sqrt(2.0)));
  CHECK(normalize_amplitude_1d(1.0, 1.0, 0.25, 1000.0, EnergyConvention::single_pulse_doubled) ==
        doctest::Approx(std::sqrt(2.0) * e0));
  CHECK(normalize_amplitude_1d(1.0, 4.0, 0.25, 1000.0) == doctest::Approx(0.5 * e0));
  CHECK_THROWS_AS(normalize_amplitude_1d(0.0, 1.0, 0.25, 1000.0), ModelError);
}

TEST_CASE("undriven OBE is pure exponential decay") {
  PulsePair off;
  off.amplitude = 0.0;
  DensityState s;
  s.rho11 = 0.3;
  s.rho22 = 0.7;
  const auto tr = evolve_obe(off, {0.05, 0.0, kDipole}, s, 40.0);
  CHECK(tr.final_state.rho22 == doctest::Approx(0.7 * std::exp(-2.0)).epsilon(1e-9));
  CHECK(tr.final_state.trace() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("driven OBE: trace, bounds, purity") {
  for (double phi : {0.0, 1.0, kPi, 4.71}) {
    const auto tr = evolve_obe(published(phi), {0.05, 0.0, kDipole}, DensityState{}, 100.0);
    CHECK(tr.max_trace_drift < 1e-10);
    for (const auto& s : tr.samples) {
      CHECK(s.rho22 >= -1e-8);
      CHECK(s.rho22 <= 1.0 + 1e-8);
      CHECK(s.purity() <= 1.0 + 1e-10);
      // |rho12|^2 <= rho11 rho22 for a positive matrix
      CHECK(std::norm(s.rho12) <= s.rho11 * s.rho22 + 1e-10);
      CHECK(s.rho21() == std::conj(s.rho12));
    }
  }
}

TEST_CASE("OBE extremal phases of the double pulse") {
  // In phase, the second pulse keeps exciting; out of phase, it undoes the first.
  const auto in = evolve_obe(published(0.0), {0.05, 0.0, kDipole}, DensityState{}, 66.0);
  const auto out = evolve_obe(published(kPi), {0.05, 0.0, kDipole}, DensityState{}, 66.0);
  const auto mid = evolve_obe(published(kPi / 2), {0.05, 0.0, kDipole}, DensityState{}, 66.0);
  CHECK(in.final_state.rho22 > mid.final_state.rho22);
  CHECK(mid.final_state.rho22 > out.final_state.rho22);
}

TEST_CASE("OBE step-size guard and pulse validation") {
  ObeOptions o;
  o.dt = 0.5;
  CHECK_THROWS_AS(evolve_obe(published(0.0), {0.05, 0.0, kDipole}, DensityState{}, 10.0, o), IntegratorError);
  PulsePair bad = published(0.0);
  bad.second_center = bad.first_center;
  CHECK_THROWS_AS(bad.validate(), ModelError);
  CHECK(published(0.0).delay() == 20.0);
}

TEST_CASE("perturbative terms: closed forms for a flat envelope") {
  DensityState s;
  s.rho11 = 0.8;
  s.rho22 = 0.2;
  s.rho12 = {0.0, 0.3};
  s.time = 5.0;
  const double omega = 0.01, T = 2.0, g = 0.05;
  for (double phi : {0.0, 0.7, kPi}) {
    const auto b = perturbative_terms(s, [=](double) { return omega; }, phi, T, g);
    CHECK(b.spontaneous_decay == doctest::Approx((T * g - 0.5 * g * g * T * T) * 0.2));
    CHECK(b.stimulated == doctest::Approx(omega * omega * T * T / 4.0 * 0.2));
    CHECK(b.absorption == doctest::Approx(omega * omega * T * T / 4.0 * 0.8));
    CHECK(b.phase_second == doctest::Approx(std::cos(phi) * omega * T * 0.3));
    CHECK(b.phase_first == doctest::Approx(std::cos(phi) * 0.75 * omega * T * T * 0.3 * g));
    CHECK(b.warnings.empty());
    CHECK(b.t_int == 5.0);
  }
}

TEST_CASE("perturbative terms: structural properties") {
  DensityState s;
  s.rho11 = 0.6;
  s.rho22 = 0.4;
  auto pulse = [](double t) { return 0.05 * std::exp(-(t - 8.0) * (t - 8.0) * 0.0625); };
  // No coherence: no phase terms.
  auto b = perturbative_terms(s, pulse, 0.3, 16.0, 0.05);
  CHECK(b.phase_first == 0.0);
  CHECK(b.phase_second == 0.0);
  // R_se and R_ab share one kernel.
  CHECK(b.stimulated / b.absorption == doctest::Approx(0.4 / 0.6));
  CHECK(b.spontaneous_decay >= 0.0);
  // cos(pi/2) = 0 kills both phase terms.
  s.rho12 = {0.0, 0.2};
  b = perturbative_terms(s, pulse, kPi / 2, 16.0, 0.05);
  CHECK(std::abs(b.phase_first) < 1e-16);
  CHECK(std::abs(b.phase_second) < 1e-16);
  // Strong pulse triggers the validity warning.
  b = perturbative_terms(s, [](double) { return 1.0; }, 0.0, 16.0, 0.05);
  CHECK(b.warnings.size() == 1);
  BreakdownOptions odd;
  odd.nodes = 7;
  CHECK_THROWS_AS(perturbative_terms(s, pulse, 0.0, 16.0, 0.05, odd), ModelError);
}

TEST_CASE("stimulated-photon count branches") {
  PerturbativeBreakdown b;
  b.stimulated = 1.0;
  b.phase_first = -0.25;
  b.phase_second = 0.5;
  b.phase = kPi;
  CHECK(stimulated_count(b) == 1.5);
  b.phase = 0.0;
  CHECK(stimulated_count(b) == 1.25);
  b.phase = 2.0 * kPi + 0.1;  // reduced mod 2 pi
  CHECK(stimulated_count(b) == 1.25);
  b.phase = 1.4 * kPi;
  CHECK(stimulated_count(b) == 1.5);
  PerturbativeBreakdown empty;
  CHECK(stimulated_count(empty) == 0.0);
}

TEST_CASE("t_int from the excitation loss") {
  CHECK(t_int_from_loss(0.1, 0.05) == doctest::Approx(2.107).epsilon(1e-3));
  CHECK(t_int_from_loss(0.1, 1.775e8) == doctest::Approx(0.594e-9).epsilon(1e-3));
  CHECK(t_int_from_loss(1e-12, 0.05) < 1e-10);
  CHECK_THROWS_AS(t_int_from_loss(1.0, 0.05), ModelError);
  CHECK_THROWS_AS(t_int_from_loss(0.1, 0.0), ModelError);
}

TEST_CASE("second-order prediction tracks the full OBE for a weak pulse") {
  const ObeParams params{0.05, 0.0, kDipole};
  PulsePair first = published(0.0);
  first.second_scale = 0.0;
  const double t_int = 38.0 + t_int_from_loss(0.1, 0.05);
  const auto start = evolve_obe(first, params, DensityState{}, t_int).final_state;
  CHECK(start.rho12.imag() != 0.0);
  CHECK(std::abs(start.rho12.real()) < 1e-12);

  const double omega = kDipole * first.amplitude;
  const double rate = omega * std::sqrt(kPi) / 0.075;
  const double T = 4.0 / rate, c = t_int + 0.5 * T;
  PulsePair second = first;
  second.first_scale = 0.0;
  second.second_scale = 1.0;
  second.rate = rate;
  second.first_center = c - 1.0;
  second.second_center = c;
  second.relative_phase = kPi;
  ObeOptions o;
  o.dt = 1.0 / (40.0 * rate);
  const auto full = evolve_obe(second, params, start, t_int + T, o);
  const auto b = perturbative_terms(start, [=](double t) { return omega * std::exp(-(t - c) * (t - c) * rate * rate); },
                                    kPi, T, 0.05);
  const double change = full.final_state.rho22 - start.rho22;
  CHECK(std::abs(b.predicted_excited(start.rho22) - full.final_state.rho22) < 0.01 * std::abs(change));
}
