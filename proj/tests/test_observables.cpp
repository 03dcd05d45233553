#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "stimem/errors.hpp"
#include "stimem/observables.hpp"

using namespace stimem;

namespace {

CavityModel small_model(double position = 0.37) {
  CavityParams p;
  p.num_modes = 6;
  p.atom_position = position * p.length;
  return CavityModel::build(p).with_coupling_scale(3.0);
}

TwoExcitationState mixed_two_excitation(const CavityModel& m) {
  TwoExcitationState s(m.num_modes());
  s.excited()[2] = {0.5, 0.1};
  s.doubled()[3] = {0.2, -0.4};
  s.doubled()[0] = {0.1, 0.1};
  s.set_pair(0, 4, {0.3, 0.3});
  s.set_pair(1, 5, {-0.2, 0.1});
  s.set_pair(3, 4, {0.05, -0.25});
  s.scale(1.0 / std::sqrt(s.norm()));
  return evolve_two_excitation(s, m, 7.0).final_state;
}

}  // namespace

TEST_CASE("decay rate of an exact exponential") {
  TimeSeries p;
  for (int i = 0; i <= 1000; ++i) p.push(0.1 * i, std::exp(-0.05 * 0.1 * i));
  DecayRateOptions o;
  o.smoothing_window = 0;
  const auto r = decay_rate(p, o);
  CHECK(r.gap_count == 0);
  REQUIRE(r.rate.size() == p.size());
  for (double v : r.rate.values) CHECK(std::abs(v / 0.05 - 1.0) < 1e-3);
  // Smoothing keeps a constant rate constant.
  const auto smooth = decay_rate(p);
  for (double v : smooth.rate.values) CHECK(std::abs(v / 0.05 - 1.0) < 1e-3);
  CHECK(smooth.rate.kind == SeriesKind::decay_rate);
}

TEST_CASE("decay rate: growth is negative, populations below the floor are gaps") {
  TimeSeries p;
  for (int i = 0; i <= 100; ++i) p.push(0.1 * i, i < 50 ? 1e-3 * std::exp(0.2 * 0.1 * i) : 0.0);
  DecayRateOptions o;
  o.smoothing_window = 1;
  const auto r = decay_rate(p, o);
  CHECK(r.rate.values[20] == doctest::Approx(-0.2).epsilon(1e-3));
  CHECK(r.gap_count >= 50);
  CHECK(std::isnan(r.rate.values[80]));
}

TEST_CASE("raw intensity equals the normal-ordered operator expectation") {
  const auto m = small_model();
  const oracle::FockSpace space(m.num_modes());
  const auto grid = uniform_grid(m.length(), 301);

  const auto s3 = mixed_two_excitation(m);
  const auto i3 = intensity(s3, m, grid, IntensityMode::raw);
  const auto psi3 = space.embed(s3);
  double err = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    err = std::max(err, std::abs(i3.values[i] - space.normal_ordered_intensity(psi3, m, grid[i])));
  CHECK(err < 1e-10);

  OneExcitationState s2(m.num_modes());
  s2.excited() = 0.6;
  s2.field()[2] = {0.0, 0.8};
  s2 = evolve_one_excitation(s2, m, 9.0).final_state;
  const auto i2 = intensity(s2, m, grid, IntensityMode::raw);
  const auto psi2 = space.embed(s2);
  err = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    err = std::max(err, std::abs(i2.values[i] - space.normal_ordered_intensity(psi2, m, grid[i])));
  CHECK(err < 1e-10);
}

TEST_CASE("spectrum equals <a_n^dagger a_n> and sums to the excitation number") {
  const auto m = small_model();
  const oracle::FockSpace space(m.num_modes());
  const auto s3 = mixed_two_excitation(m);
  const auto psi = space.embed(s3);
  const auto spec = spectrum(s3);
  for (int n = 0; n < m.num_modes(); ++n) {
    const auto a = space.annihilate(n);
    CHECK(spec[n] == doctest::Approx((a * psi).squaredNorm()).epsilon(1e-12));
  }
  const double total = std::accumulate(spec.begin(), spec.end(), 0.0) + population(s3);
  CHECK(std::abs(total - 2.0 * s3.norm()) < 1e-10);
}

TEST_CASE("spectrum sum identity on published-size states") {
  const auto m = CavityModel::build({});
  const auto r2 = evolve_one_excitation(init_excited_atom(m), m, 30.0).final_state;
  const auto s2 = spectrum(r2);
  CHECK(std::abs(std::accumulate(s2.begin(), s2.end(), 0.0) + population(r2) - r2.norm()) < 1e-10);

  const auto r3 = evolve_two_excitation(init_photon_plus_excited_atom(m, {117.7, 1000.0, 0.25}), m, 10.0)
                      .final_state;
  const auto s3 = spectrum(r3);
  CHECK(std::abs(std::accumulate(s3.begin(), s3.end(), 0.0) + population(r3) - 2.0 * r3.norm()) < 1e-10);
}

TEST_CASE("no photons, no intensity; intensity is non-negative") {
  const auto m = CavityModel::build({});
  const auto grid = uniform_grid(m.length(), 1024);
  const auto atom = init_excited_atom(m);
  for (auto mode : {IntensityMode::raw, IntensityMode::envelope}) {
    const auto i = intensity(atom, m, grid, mode);
    for (double v : i.values) CHECK(v == 0.0);
  }
  const auto r = evolve_one_excitation(atom, m, 20.0).final_state;
  for (double v : intensity(r, m, grid).values) CHECK(v >= 0.0);
}

TEST_CASE("envelope intensity is the carrier average of the raw intensity") {
  const auto m = CavityModel::build({});
  const auto s = init_free_packet(m, {60.0, 1000.0, 0.25});
  const auto raw = intensity(s, m, uniform_grid(m.length(), raw_grid_points(m)), IntensityMode::raw);
  const auto env = intensity(s, m, uniform_grid(m.length(), 4096), IntensityMode::envelope);
  const double a = integrate_profile(raw, 0.0, m.length());
  const double b = integrate_profile(env, 0.0, m.length());
  CHECK(a == doctest::Approx(b).epsilon(1e-3));
  CHECK(env.mode == IntensityMode::envelope);
  CHECK(std::string(to_string(raw.mode)) == "raw");
}

TEST_CASE("free packet keeps its shape while propagating") {
  CavityParams p;
  p.num_modes = 1000;
  const auto m = CavityModel::build(p);
  const auto grid = uniform_grid(m.length(), 4096);
  const double dz = grid[1] - grid[0];
  const auto s = init_free_packet(m, {30.0, 1000.0, 0.25});
  const auto i0 = intensity(s, m, grid);
  // Shift by an integer number of grid cells so no interpolation is needed.
  const double t = 1000 * dz;
  const auto it = intensity(evolve_free(s, m, t), m, grid);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 1000; i < grid.size(); ++i) {
    num += std::pow(it.values[i] - i0.values[i - 1000], 2);
    den += std::pow(i0.values[i - 1000], 2);
  }
  CHECK(std::sqrt(num / den) < 0.01);
}

TEST_CASE("spontaneous emission is mirror symmetric about the centred atom") {
  const auto m = CavityModel::build({});
  const auto grid = uniform_grid(m.length(), 2001);
  const auto r = evolve_one_excitation(init_excited_atom(m), m, 40.0).final_state;
  const auto i2 = intensity(r, m, grid);
  const double peak = *std::max_element(i2.values.begin(), i2.values.end());
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(i2.values[i] - i2.values[grid.size() - 1 - i]) < 1e-9 * peak);
}

TEST_CASE("decoupled atom: no intensity differences, no induced packet") {
  const auto m = CavityModel::build({}).with_coupling_scale(0.0);
  const auto grid = uniform_grid(m.length(), 2048);
  const WavePacketSpec spec{117.7, 1000.0, 0.25};
  const auto s3 = evolve_two_excitation(init_photon_plus_excited_atom(m, spec), m, 20.0).final_state;
  const auto s2 = evolve_one_excitation(init_excited_atom(m), m, 20.0).final_state;
  const auto s1 = evolve_free(init_free_packet(m, spec), m, 20.0);
  const auto i1 = intensity(s1, m, grid), i2 = intensity(s2, m, grid), i3 = intensity(s3, m, grid);
  const auto d = intensity_differences(i1, i2, i3, m.length());
  CHECK(std::abs(d.left) < 1e-8);
  CHECK(std::abs(d.right) < 1e-8);
  // With I3 = I1 only the mirrored tail of the free packet survives.
  const auto induced = induced_packet(i3, i1, m);
  const std::size_t n = grid.size();
  for (std::size_t j = 0; j < induced.z.size(); ++j)
    CHECK(std::abs(induced.values[j] + i1.values[n - 1 - (n / 2 + j)]) < 1e-7);
}

TEST_CASE("signature helpers validate their inputs") {
  const auto m = CavityModel::build({});
  const auto s = init_free_packet(m, {117.7, 1000.0, 0.25});
  const auto a = intensity(s, m, uniform_grid(m.length(), 100));
  const auto b = intensity(s, m, uniform_grid(m.length(), 101));
  CHECK_THROWS_AS(intensity_differences(a, a, b, m.length()), ModelError);
  auto c = a;
  c.time = 1.0;
  CHECK_THROWS_AS(intensity_differences(a, a, c, m.length()), ModelError);
  const auto off = small_model(0.3);
  CHECK_THROWS_AS(induced_packet(a, a, off), ModelError);
  const std::vector<double> outside = {-1.0, 0.0};
  CHECK_THROWS_AS(intensity(s, m, outside), ModelError);
}

TEST_CASE("integrate_profile: trapezoid with interpolated ends") {
  SpatialProfile p;
  for (int i = 0; i <= 10; ++i) {
    p.z.push_back(i);
    p.values.push_back(2.0 * i);
  }
  CHECK(integrate_profile(p, 0.0, 10.0) == doctest::Approx(100.0));
  CHECK(integrate_profile(p, 2.5, 7.5) == doctest::Approx(50.0));
}

TEST_CASE("periodic extremum refinement recovers an off-grid extremum") {
  const std::size_t n = 64;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::cos(kTwoPi * i / n - 1.3);
  const auto mx = refine_periodic_extremum(v, kTwoPi, true);
  const auto mn = refine_periodic_extremum(v, kTwoPi, false);
  CHECK(mx.position == doctest::Approx(1.3).epsilon(1e-3));
  CHECK(mn.position == doctest::Approx(1.3 + kPi).epsilon(1e-3));
  CHECK(mx.value == doctest::Approx(1.0).epsilon(1e-3));

  // Extremum next to the wrap-around point.
  for (std::size_t i = 0; i < n; ++i) v[i] = std::cos(kTwoPi * i / n - 6.25);
  CHECK(refine_periodic_extremum(v, kTwoPi, true).position == doctest::Approx(6.25).epsilon(1e-3));
}

TEST_CASE("scan_phases evaluates a uniform periodic grid") {
  const auto scan = scan_phases(32, [](double phi) { return std::sin(phi); });
  REQUIRE(scan.phases.size() == 32);
  CHECK(scan.phases[8] == doctest::Approx(kPi / 2));
  CHECK(scan.maximum.position == doctest::Approx(kPi / 2).epsilon(1e-3));
  CHECK(scan.minimum.position == doctest::Approx(3 * kPi / 2).epsilon(1e-3));
  CHECK_THROWS(scan_phases(8, [](double) -> double { throw NumericalError("boom"); }));
}
