#include "stimem/observables.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "stimem/errors.hpp"

namespace stimem {

namespace {

using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

constexpr std::size_t kGridChunk = 2048;

// I(z) = sum_j |field_j(z)|^2 for one-photon amplitude columns V (N x J).
SpatialProfile column_intensity(const ComplexMatrix& columns, const CavityModel& model,
                                std::span<const double> grid, IntensityMode mode, double time) {
  for (double z : grid)
    if (z < 0.0 || z > model.length()) throw ModelError("intensity grid must lie within [0, L]");

  const auto k = model.wavenumbers();
  const Eigen::Index n = model.num_modes();
  Eigen::VectorXd norm_factor(n);
  for (Eigen::Index i = 0; i < n; ++i)
    norm_factor[i] = std::sqrt(2.0 * k[static_cast<std::size_t>(i)] / model.length());

  SpatialProfile out;
  out.z.assign(grid.begin(), grid.end());
  out.values.resize(grid.size());
  out.time = time;
  out.mode = mode;

  for (std::size_t start = 0; start < grid.size(); start += kGridChunk) {
    const auto rows = static_cast<Eigen::Index>(std::min(kGridChunk, grid.size() - start));
    if (mode == IntensityMode::raw) {
      RealMatrix profile(rows, n);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const double z = grid[start + static_cast<std::size_t>(r)];
        for (Eigen::Index i = 0; i < n; ++i)
          profile(r, i) = norm_factor[i] * std::sin(k[static_cast<std::size_t>(i)] * z);
      }
      const ComplexMatrix field = profile.cast<cdouble>() * columns;
      for (Eigen::Index r = 0; r < rows; ++r)
        out.values[start + static_cast<std::size_t>(r)] = field.row(r).squaredNorm();
    } else {
      // sin(kz) = [e^{ikz} - e^{-ikz}]/(2i): the right-moving part on [0, L]
      // and the left-moving part, which sits at -z in the e^{ikz} sum.
      ComplexMatrix forward(rows, n);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const double z = grid[start + static_cast<std::size_t>(r)];
        for (Eigen::Index i = 0; i < n; ++i)
          forward(r, i) = 0.5 * norm_factor[i] * std::polar(1.0, k[static_cast<std::size_t>(i)] * z);
      }
      const ComplexMatrix right = forward * columns;
      const ComplexMatrix left = forward.conjugate() * columns;
      for (Eigen::Index r = 0; r < rows; ++r)
        out.values[start + static_cast<std::size_t>(r)] =
            right.row(r).squaredNorm() + left.row(r).squaredNorm();
    }
  }
  return out;
}

ComplexMatrix single_column(std::span<const cdouble> amplitudes) {
  ComplexMatrix v(static_cast<Eigen::Index>(amplitudes.size()), 1);
  for (std::size_t i = 0; i < amplitudes.size(); ++i) v(static_cast<Eigen::Index>(i), 0) = amplitudes[i];
  return v;
}

double lagrange_derivative(double t0, double t1, double t2, double p0, double p1, double p2,
                           double at) {
  return p0 * ((at - t1) + (at - t2)) / ((t0 - t1) * (t0 - t2)) +
         p1 * ((at - t0) + (at - t2)) / ((t1 - t0) * (t1 - t2)) +
         p2 * ((at - t0) + (at - t1)) / ((t2 - t0) * (t2 - t1));
}

void require_same_grid(const SpatialProfile& a, const SpatialProfile& b) {
  if (a.z != b.z) throw ModelError("intensity profiles live on different grids");
  if (a.mode != b.mode) throw ModelError("intensity profiles use different modes");
  if (a.time != b.time) throw ModelError("intensity profiles have different time stamps");
}

}  // namespace

const char* to_string(IntensityMode mode) noexcept {
  return mode == IntensityMode::raw ? "raw" : "envelope";
}

std::vector<double> uniform_grid(double length, std::size_t points) {
  if (points < 2) throw ModelError("grid needs at least two points");
  std::vector<double> z(points);
  const double h = length / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) z[i] = static_cast<double>(i) * h;
  z.back() = length;
  return z;
}

std::size_t raw_grid_points(const CavityModel& model) {
  const double wavelength = kTwoPi / model.omega_carrier();
  return static_cast<std::size_t>(std::ceil(8.0 * model.length() / wavelength)) + 1;
}

double population(const OneExcitationState& state) noexcept { return std::norm(state.excited()); }

double population(const TwoExcitationState& state) noexcept {
  double p = 0.0;
  for (const auto& d : state.excited()) p += std::norm(d);
  return p;
}

DecayRate decay_rate(const TimeSeries& population, const DecayRateOptions& options) {
  const auto& t = population.times;
  const auto& p = population.values;
  const std::size_t n = t.size();
  if (n != p.size()) throw ModelError("time series has mismatched lengths");
  if (n < 3) throw ModelError("decay rate needs at least three samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(t[i] > t[i - 1])) throw ModelError("sample times must be strictly increasing");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deriv;
    if (i == 0)
      deriv = lagrange_derivative(t[0], t[1], t[2], p[0], p[1], p[2], t[0]);
    else if (i == n - 1)
      deriv = lagrange_derivative(t[n - 3], t[n - 2], t[n - 1], p[n - 3], p[n - 2], p[n - 1], t[n - 1]);
    else
      deriv = lagrange_derivative(t[i - 1], t[i], t[i + 1], p[i - 1], p[i], p[i + 1], t[i]);
    raw[i] = p[i] > options.floor ? -deriv / p[i] : nan;
  }

  DecayRate out;
  out.rate.kind = SeriesKind::decay_rate;
  out.rate.times = t;
  out.rate.values.resize(n);
  const int half = options.smoothing_window > 1 ? options.smoothing_window / 2 : 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(raw[i])) {
      out.rate.values[i] = nan;
      ++out.gap_count;
      continue;
    }
    const std::size_t lo = i >= static_cast<std::size_t>(half) ? i - static_cast<std::size_t>(half) : 0;
    const std::size_t hi = std::min(n - 1, i + static_cast<std::size_t>(half));
    double sum = 0.0;
    int count = 0;
    for (std::size_t j = lo; j <= hi; ++j) {
      if (std::isnan(raw[j])) continue;
      sum += raw[j];
      ++count;
    }
    out.rate.values[i] = sum / count;
  }
  return out;
}

SpatialProfile intensity(const FieldOnlyState& state, const CavityModel& model,
                         std::span<const double> grid, IntensityMode mode) {
  return column_intensity(single_column(state.amplitudes), model, grid, mode, state.time);
}

SpatialProfile intensity(const OneExcitationState& state, const CavityModel& model,
                         std::span<const double> grid, IntensityMode mode) {
  return column_intensity(single_column(state.field()), model, grid, mode, state.time);
}

SpatialProfile intensity(const TwoExcitationState& state, const CavityModel& model,
                         std::span<const double> grid, IntensityMode mode) {
  // Column 0: the D sector. Column 1+k: the one-photon amplitude a_m|psi>
  // projected on |1_k>, i.e. sqrt2 E_k delta_mk + F_mk.
  const int n = state.num_modes();
  const auto en = static_cast<Eigen::Index>(n);
  ComplexMatrix columns = ComplexMatrix::Zero(en, en + 1);
  const auto d = state.excited();
  const auto e = state.doubled();
  const auto f = state.pairs();
  std::size_t p = 0;
  for (int a = 0; a < n; ++a) {
    const auto ia = static_cast<Eigen::Index>(a);
    columns(ia, 0) = d[static_cast<std::size_t>(a)];
    columns(ia, ia + 1) = std::numbers::sqrt2 * e[static_cast<std::size_t>(a)];
    for (int b = a + 1; b < n; ++b, ++p) {
      const auto ib = static_cast<Eigen::Index>(b);
      columns(ia, ib + 1) = f[p];
      columns(ib, ia + 1) = f[p];
    }
  }
  return column_intensity(columns, model, grid, mode, state.time);
}

std::vector<double> spectrum(const FieldOnlyState& state) {
  std::vector<double> s(state.amplitudes.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::norm(state.amplitudes[i]);
  return s;
}

std::vector<double> spectrum(const OneExcitationState& state) {
  const auto c = state.field();
  std::vector<double> s(c.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::norm(c[i]);
  return s;
}

std::vector<double> spectrum(const TwoExcitationState& state) {
  const int n = state.num_modes();
  const auto d = state.excited();
  const auto e = state.doubled();
  const auto f = state.pairs();
  std::vector<double> s(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::norm(d[i]) + 2.0 * std::norm(e[i]);
  std::size_t p = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b, ++p) {
      const double w = std::norm(f[p]);
      s[static_cast<std::size_t>(a)] += w;
      s[static_cast<std::size_t>(b)] += w;
    }
  return s;
}

double integrate_profile(const SpatialProfile& profile, double a, double b) {
  const auto& z = profile.z;
  const auto& v = profile.values;
  if (z.size() < 2 || !(b > a)) return 0.0;
  auto value_at = [&](double x) {
    const auto it = std::upper_bound(z.begin(), z.end(), x);
    if (it == z.begin()) return v.front();
    if (it == z.end()) return v.back();
    const auto j = static_cast<std::size_t>(it - z.begin());
    const double w = (x - z[j - 1]) / (z[j] - z[j - 1]);
    return (1.0 - w) * v[j - 1] + w * v[j];
  };
  a = std::max(a, z.front());
  b = std::min(b, z.back());
  double sum = 0.0;
  double prev_z = a;
  double prev_v = value_at(a);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] <= a) continue;
    if (z[i] >= b) break;
    sum += 0.5 * (z[i] - prev_z) * (v[i] + prev_v);
    prev_z = z[i];
    prev_v = v[i];
  }
  sum += 0.5 * (b - prev_z) * (value_at(b) + prev_v);
  return sum;
}

IntensityDifferences intensity_differences(const SpatialProfile& free_packet,
                                           const SpatialProfile& spontaneous,
                                           const SpatialProfile& stimulated, double length) {
  require_same_grid(free_packet, stimulated);
  require_same_grid(spontaneous, stimulated);
  SpatialProfile diff = stimulated;
  for (std::size_t i = 0; i < diff.values.size(); ++i)
    diff.values[i] -= spontaneous.values[i] + free_packet.values[i];
  IntensityDifferences out;
  out.left = integrate_profile(diff, 0.0, 0.5 * length);
  out.right = integrate_profile(diff, 0.5 * length, length);
  out.total = std::abs(out.left) + out.right;
  return out;
}

SpatialProfile induced_packet(const SpatialProfile& stimulated, const SpatialProfile& free_packet,
                              const CavityModel& model) {
  if (!model.atom_centered())
    throw ModelError("induced-packet extraction needs the atom at L/2 (mirror symmetry)");
  require_same_grid(stimulated, free_packet);
  const auto& z = stimulated.z;
  const std::size_t n = z.size();
  const double tol = 1e-9 * model.length();
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(z[i] + z[n - 1 - i] - model.length()) > tol)
      throw ModelError("induced-packet extraction needs a grid symmetric about L/2");

  SpatialProfile out;
  out.time = stimulated.time;
  out.mode = stimulated.mode;
  for (std::size_t i = 0; i < n; ++i) {
    if (z[i] < 0.5 * model.length() - tol) continue;
    out.z.push_back(z[i]);
    out.values.push_back(stimulated.values[i] - stimulated.values[n - 1 - i] - free_packet.values[i]);
  }
  return out;
}

double profile_centroid(const SpatialProfile& profile) {
  double w = 0.0;
  double m = 0.0;
  for (std::size_t i = 0; i < profile.z.size(); ++i) {
    const double v = std::max(0.0, profile.values[i]);
    w += v;
    m += v * profile.z[i];
  }
  if (w <= 0.0) throw NumericalError("profile has no positive weight");
  return m / w;
}

Extremum refine_periodic_extremum(std::span<const double> values, double period, bool maximum) {
  const std::size_t n = values.size();
  if (n < 3) throw ModelError("extremum refinement needs at least three samples");
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (maximum ? values[i] > values[best] : values[i] < values[best]) best = i;
  const double h = period / static_cast<double>(n);
  const double ym = values[(best + n - 1) % n];
  const double y0 = values[best];
  const double yp = values[(best + 1) % n];
  const double curvature = ym - 2.0 * y0 + yp;
  double offset = 0.0;
  double value = y0;
  if (curvature != 0.0) {
    offset = std::clamp(0.5 * (ym - yp) / curvature, -0.5, 0.5);
    value = y0 - 0.25 * (ym - yp) * offset;
  }
  double position = (static_cast<double>(best) + offset) * h;
  position = std::fmod(position + period, period);
  return {position, value, best};
}

PhaseScan scan_phases(std::size_t points, const std::function<double(double)>& f) {
  if (points < 3) throw ModelError("phase scan needs at least three points");
  PhaseScan scan;
  scan.phases.resize(points);
  scan.values.resize(points);
  for (std::size_t i = 0; i < points; ++i)
    scan.phases[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(points);

  std::exception_ptr failure;
  const auto count = static_cast<long>(points);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      scan.values[static_cast<std::size_t>(i)] = f(scan.phases[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  scan.minimum = refine_periodic_extremum(scan.values, kTwoPi, false);
  scan.maximum = refine_periodic_extremum(scan.values, kTwoPi, true);
  return scan;
}

double max_excitation_after_second_pulse(const CavityModel& model, double z1, double z2, double phase,
                                         const PhaseScanOptions& options) {
  const auto prepared = init_phase_coherent_double(model, z1, z2, phase, options.width);
  double best = 0.0;
  evolve_two_excitation(prepared.state, model, options.window_end, options.integration,
                        [&](const TwoExcitationState& s) {
                          if (s.time >= options.window_start - 1e-9)
                            best = std::max(best, population(s));
                        });
  return best;
}

PhaseScan phase_scan(const CavityModel& model, double z1, double z2, std::size_t points,
                     const PhaseScanOptions& options) {
  return scan_phases(points, [&](double phase) {
    return max_excitation_after_second_pulse(model, z1, z2, phase, options);
  });
}

}  // namespace stimem
