#pragma once

// Populations, time-dependent decay rates, field intensities, mode spectra,
// and the stimulated-emission signatures built on them.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "stimem/core_model.hpp"
#include "stimem/quantum_dynamics.hpp"

namespace stimem {

enum class IntensityMode {
  raw,       // sin(k_n z) evaluated exactly; needs >= 8 points per carrier wavelength
  envelope,  // carrier-averaged: both travelling components, spatial carrier removed
};

const char* to_string(IntensityMode mode) noexcept;

struct SpatialProfile {
  std::vector<double> z;
  std::vector<double> values;
  double time = 0.0;
  IntensityMode mode = IntensityMode::envelope;
};

enum class SeriesKind { population, decay_rate, spectrum_slice, delta_i };

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
  SeriesKind kind = SeriesKind::population;

  void push(double t, double v) {
    times.push_back(t);
    values.push_back(v);
  }
  std::size_t size() const noexcept { return times.size(); }
};

// Uniform grid z_i = i L / (points - 1), symmetric about L/2.
std::vector<double> uniform_grid(double length, std::size_t points);

// Minimum raw-mode grid size: 8 points per carrier wavelength.
std::size_t raw_grid_points(const CavityModel& model);

double population(const OneExcitationState& state) noexcept;
double population(const TwoExcitationState& state) noexcept;

struct DecayRateOptions {
  // Boxcar width in samples; <= 1 disables smoothing.
  int smoothing_window = 5;
  // Samples with P below this become gaps (NaN).
  double floor = 1e-10;
};

struct DecayRate {
  TimeSeries rate;
  std::size_t gap_count = 0;
};

// Gamma(t) = -P'(t) / P(t) with second-order finite differences.
DecayRate decay_rate(const TimeSeries& population, const DecayRateOptions& options = {});

SpatialProfile intensity(const FieldOnlyState& state, const CavityModel& model,
                         std::span<const double> grid, IntensityMode mode = IntensityMode::envelope);
SpatialProfile intensity(const OneExcitationState& state, const CavityModel& model,
                         std::span<const double> grid, IntensityMode mode = IntensityMode::envelope);
SpatialProfile intensity(const TwoExcitationState& state, const CavityModel& model,
                         std::span<const double> grid, IntensityMode mode = IntensityMode::envelope);

// Per-mode photon number <a_n^dagger a_n>.
std::vector<double> spectrum(const FieldOnlyState& state);
std::vector<double> spectrum(const OneExcitationState& state);
std::vector<double> spectrum(const TwoExcitationState& state);

// Trapezoidal integral of the profile over [a, b], interpolating at the ends.
double integrate_profile(const SpatialProfile& profile, double a, double b);

struct IntensityDifferences {
  double left = 0.0;
  double right = 0.0;
  // |left| + right
  double total = 0.0;
};

IntensityDifferences intensity_differences(const SpatialProfile& free_packet,
                                           const SpatialProfile& spontaneous,
                                           const SpatialProfile& stimulated, double length);

// I3 - I3* - I1 on the right half, with I3*(z) = I3(L - z).
SpatialProfile induced_packet(const SpatialProfile& stimulated, const SpatialProfile& free_packet,
                              const CavityModel& model);

// Centre of mass of the positive part of the profile.
double profile_centroid(const SpatialProfile& profile);

struct Extremum {
  double position = 0.0;
  double value = 0.0;
  std::size_t grid_index = 0;
};

// Quadratic refinement around the grid extremum of a periodic, uniformly
// sampled function on [0, period).
Extremum refine_periodic_extremum(std::span<const double> values, double period, bool maximum);

struct PhaseScan {
  std::vector<double> phases;
  std::vector<double> values;
  Extremum minimum;
  Extremum maximum;
};

// Evaluates f on points uniform phases in [0, 2pi) (in parallel when built
// with OpenMP) and locates both extrema.
PhaseScan scan_phases(std::size_t points, const std::function<double(double)>& f);

struct PhaseScanOptions {
  double width = 0.25;
  double window_start = 50.0;
  double window_end = 66.0;
  IntegrationOptions integration{};
};

// Max P3 over [window_start, window_end] for the phase-coherent double pulse.
double max_excitation_after_second_pulse(const CavityModel& model, double z1, double z2, double phase,
                                         const PhaseScanOptions& options);

PhaseScan phase_scan(const CavityModel& model, double z1, double z2, std::size_t points,
                     const PhaseScanOptions& options);

}  // namespace stimem
