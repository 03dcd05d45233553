#include "stimem/quantum_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "stimem/errors.hpp"
#include "stimem/integrator.hpp"

namespace stimem {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

inline cdouble times_minus_i(cdouble z) noexcept { return {z.imag(), -z.real()}; }

double squared_norm(std::span<const cdouble> v) noexcept {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

void one_excitation_rhs(const CavityModel& model, std::span<const cdouble> y, std::span<cdouble> dy) {
  const auto g = model.couplings();
  const auto delta = model.detunings();
  const cdouble b = y[0];
  cdouble coupled{0.0, 0.0};
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    const cdouble c = y[i + 1];
    coupled += g[i] * c;
    dy[i + 1] = times_minus_i(delta[i] * c - g[i] * b);
  }
  // i dB/dt = -sum g_n C_n
  dy[0] = times_minus_i(-coupled);
}

// i dD_n = Delta_n D_n - sum_{m!=n} g_m F_nm - sqrt2 g_n E_n
// i dE_n = 2 Delta_n E_n - sqrt2 g_n D_n
// i dF_nm = (Delta_n + Delta_m) F_nm - g_n D_m - g_m D_n
void two_excitation_rhs(const CavityModel& model, std::vector<cdouble>& scratch,
                        std::span<const cdouble> y, std::span<cdouble> dy) {
  const auto g = model.couplings();
  const auto delta = model.detunings();
  const std::size_t n = g.size();
  const cdouble* d = y.data();
  const cdouble* e = d + n;
  const cdouble* f = e + n;
  cdouble* dd = dy.data();
  cdouble* de = dd + n;
  cdouble* df = de + n;

  scratch.assign(n, cdouble{0.0, 0.0});
  cdouble* acc = scratch.data();
  std::size_t p = 0;
  for (std::size_t a = 0; a < n; ++a) {
    const double ga = g[a];
    const double da = delta[a];
    const cdouble d_a = d[a];
    cdouble acc_a{0.0, 0.0};
    for (std::size_t b = a + 1; b < n; ++b, ++p) {
      const cdouble fab = f[p];
      acc_a += g[b] * fab;
      acc[b] += ga * fab;
      df[p] = times_minus_i((da + delta[b]) * fab - ga * d[b] - g[b] * d_a);
    }
    acc[a] += acc_a;
  }
  for (std::size_t a = 0; a < n; ++a) {
    dd[a] = times_minus_i(delta[a] * d[a] - acc[a] - kSqrt2 * g[a] * e[a]);
    de[a] = times_minus_i(2.0 * delta[a] * e[a] - kSqrt2 * g[a] * d[a]);
  }
}

template <class State, class Rhs>
EvolutionResult<State> integrate(const State& initial, const CavityModel& model, double t_end,
                                 const IntegrationOptions& options,
                                 const SampleObserver<State>& observer, Rhs&& rhs) {
  if (!(options.dt > 0.0)) throw ModelError("time step must be positive");
  if (options.stride < 1) throw ModelError("sampling stride must be >= 1");
  if (t_end < initial.time) throw ModelError("t_end lies before the state's time stamp");
  const double guard = options.dt * model.max_abs_detuning();
  if (guard > options.stability_limit) {
    std::ostringstream os;
    os << "dt * max|Delta| = " << guard << " exceeds the stability limit "
       << options.stability_limit;
    throw IntegratorError(os.str(), options.stability_limit / model.max_abs_detuning());
  }

  EvolutionResult<State> result{initial, 0.0, 0};
  State& state = result.final_state;
  const double t0 = initial.time;
  const double span = t_end - t0;
  const auto steps = static_cast<std::size_t>(std::ceil(span / options.dt - 1e-9));
  const double dt = steps > 0 ? span / static_cast<double>(steps) : 0.0;
  const double norm0 = state.norm();

  auto check_norm = [&](double t) {
    const double drift = std::abs(state.norm() - norm0);
    result.max_norm_drift = std::max(result.max_norm_drift, drift);
    if (drift > options.norm_tolerance) {
      std::ostringstream os;
      os << "norm drift " << drift << " at t=" << t << " exceeds " << options.norm_tolerance
         << " (dt=" << dt << ")";
      throw IntegratorError(os.str(), 0.5 * dt);
    }
  };

  if (observer) observer(state);
  Rk4Stepper<CVector> stepper(state.data().size());
  auto bound = [&](double, std::span<const cdouble> y, std::span<cdouble> dy) { rhs(y, dy); };
  for (std::size_t i = 1; i <= steps; ++i) {
    stepper.step(bound, t0 + static_cast<double>(i - 1) * dt, dt, state.data());
    state.time = t0 + static_cast<double>(i) * dt;
    if (i % static_cast<std::size_t>(options.stride) == 0 || i == steps) {
      check_norm(state.time);
      if (observer) observer(state);
    }
  }
  state.time = t_end;
  result.steps = steps;
  return result;
}

template <class State, class Rhs>
double expectation_energy(const State& state, Rhs&& rhs) {
  const auto& y = state.data();
  CVector dy(y.size());
  rhs(std::span<const cdouble>(y), std::span<cdouble>(dy));
  // H y = i dy/dt
  cdouble e{0.0, 0.0};
  for (std::size_t i = 0; i < y.size(); ++i) e += std::conj(y[i]) * cdouble(0.0, 1.0) * dy[i];
  return e.real();
}

}  // namespace

double FieldOnlyState::norm() const noexcept { return squared_norm(amplitudes); }

OneExcitationState::OneExcitationState(int num_modes)
    : data_(static_cast<std::size_t>(num_modes) + 1, cdouble{0.0, 0.0}) {}

double OneExcitationState::norm() const noexcept { return squared_norm(data_); }

PairIndex::PairIndex(int num_modes) : n_(num_modes) {
  const auto n = static_cast<std::size_t>(num_modes);
  size_ = n * (n - 1) / 2;
  offsets_.resize(n);
  std::size_t off = 0;
  for (std::size_t a = 0; a < n; ++a) {
    offsets_[a] = off;
    off += n - a - 1;
  }
}

std::size_t PairIndex::operator()(int n, int m) const noexcept {
  if (n > m) std::swap(n, m);
  return offsets_[static_cast<std::size_t>(n)] + static_cast<std::size_t>(m - n - 1);
}

TwoExcitationState::TwoExcitationState(int num_modes)
    : pairs_(num_modes),
      data_(2 * static_cast<std::size_t>(num_modes) + pairs_.size(), cdouble{0.0, 0.0}) {}

cdouble TwoExcitationState::pair(int n, int m) const noexcept {
  if (n == m) return {0.0, 0.0};
  return pairs()[pairs_(n, m)];
}

void TwoExcitationState::set_pair(int n, int m, cdouble value) noexcept {
  if (n == m) return;
  pairs()[pairs_(n, m)] = value;
}

double TwoExcitationState::norm() const noexcept { return squared_norm(data_); }

void TwoExcitationState::scale(double factor) noexcept {
  for (auto& z : data_) z *= factor;
}

FieldOnlyState evolve_free(const FieldOnlyState& state, const CavityModel& model, double t) {
  if (state.amplitudes.size() != static_cast<std::size_t>(model.num_modes()))
    throw ModelError("state and model have different mode counts");
  FieldOnlyState out{state.amplitudes, t};
  const auto omega = model.frequencies();
  const double elapsed = t - state.time;
  for (std::size_t i = 0; i < out.amplitudes.size(); ++i)
    out.amplitudes[i] *= std::polar(1.0, -omega[i] * elapsed);
  return out;
}

FieldOnlyState init_free_packet(const CavityModel& model, const WavePacketSpec& spec) {
  return FieldOnlyState{gaussian_weight(spec, model), 0.0};
}

OneExcitationState init_excited_atom(const CavityModel& model) {
  OneExcitationState s(model.num_modes());
  s.excited() = 1.0;
  return s;
}

EvolutionResult<OneExcitationState> evolve_one_excitation(
    const OneExcitationState& state, const CavityModel& model, double t_end,
    const IntegrationOptions& options, const SampleObserver<OneExcitationState>& observer) {
  if (state.num_modes() != model.num_modes())
    throw ModelError("state and model have different mode counts");
  return integrate(state, model, t_end, options, observer,
                   [&](std::span<const cdouble> y, std::span<cdouble> dy) {
                     one_excitation_rhs(model, y, dy);
                   });
}

TwoExcitationState init_photon_plus_excited_atom(const CavityModel& model, const WavePacketSpec& spec,
                                                 std::vector<std::string>* warnings) {
  if (warnings && std::abs(spec.carrier - model.omega_atom()) > 1e-12 * model.omega_atom()) {
    std::ostringstream os;
    os << "off-resonant packet: carrier " << spec.carrier << " vs atomic frequency "
       << model.omega_atom();
    warnings->push_back(os.str());
  }
  const CVector a = gaussian_weight(spec, model);
  TwoExcitationState s(model.num_modes());
  std::copy(a.begin(), a.end(), s.excited().begin());
  return s;
}

namespace {

CVector packet_amplitudes(const CavityModel& model, double z, double width) {
  return gaussian_weight(WavePacketSpec{z, model.omega_carrier(), width}, model);
}

PreparedTwoPhotonState normalized(TwoExcitationState s) {
  const double raw = s.norm();
  if (raw < 1e-8) {
    std::ostringstream os;
    os << "two-photon state is degenerate (norm " << raw << " before normalization)";
    throw NumericalError(os.str());
  }
  s.scale(1.0 / std::sqrt(raw));
  return {std::move(s), raw};
}

}  // namespace

PreparedTwoPhotonState init_two_photons(const CavityModel& model, double z1, double z2, double width) {
  const CVector u = packet_amplitudes(model, z1, width);
  const CVector v = packet_amplitudes(model, z2, width);
  const int n = model.num_modes();
  TwoExcitationState s(n);
  auto e = s.doubled();
  auto f = s.pairs();
  std::size_t p = 0;
  for (int a = 0; a < n; ++a) {
    const auto ia = static_cast<std::size_t>(a);
    e[ia] = kSqrt2 * u[ia] * v[ia];
    for (int b = a + 1; b < n; ++b, ++p) {
      const auto ib = static_cast<std::size_t>(b);
      f[p] = u[ia] * v[ib] + u[ib] * v[ia];
    }
  }
  return normalized(std::move(s));
}

PreparedTwoPhotonState init_phase_coherent_double(const CavityModel& model, double z1, double z2,
                                                  double phase, double width) {
  if (!(phase >= 0.0 && phase < kTwoPi)) throw ModelError("relative phase must lie in [0, 2pi)");
  const CVector u = packet_amplitudes(model, z1, width);
  const CVector v = packet_amplitudes(model, z2, width);
  const cdouble rot = std::polar(1.0, phase);
  CVector w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) w[i] = u[i] + rot * v[i];

  // (sum_n w_n a_n^dagger)^2 |0> = sum_n sqrt2 w_n^2 |2_n> + sum_{n<m} 2 w_n w_m |1_n 1_m>
  const int n = model.num_modes();
  TwoExcitationState s(n);
  auto e = s.doubled();
  auto f = s.pairs();
  std::size_t p = 0;
  for (int a = 0; a < n; ++a) {
    const auto ia = static_cast<std::size_t>(a);
    e[ia] = kSqrt2 * w[ia] * w[ia];
    for (int b = a + 1; b < n; ++b, ++p) f[p] = 2.0 * w[ia] * w[static_cast<std::size_t>(b)];
  }
  return normalized(std::move(s));
}

EvolutionResult<TwoExcitationState> evolve_two_excitation(
    const TwoExcitationState& state, const CavityModel& model, double t_end,
    const IntegrationOptions& options, const SampleObserver<TwoExcitationState>& observer) {
  if (state.num_modes() != model.num_modes())
    throw ModelError("state and model have different mode counts");
  std::vector<cdouble> scratch;
  return integrate(state, model, t_end, options, observer,
                   [&](std::span<const cdouble> y, std::span<cdouble> dy) {
                     two_excitation_rhs(model, scratch, y, dy);
                   });
}

double interaction_energy(const OneExcitationState& state, const CavityModel& model) {
  return expectation_energy(state, [&](std::span<const cdouble> y, std::span<cdouble> dy) {
    one_excitation_rhs(model, y, dy);
  });
}

double interaction_energy(const TwoExcitationState& state, const CavityModel& model) {
  std::vector<cdouble> scratch;
  return expectation_energy(state, [&](std::span<const cdouble> y, std::span<cdouble> dy) {
    two_excitation_rhs(model, scratch, y, dy);
  });
}

double atomic_excitation(const OneExcitationState& state) noexcept {
  return std::norm(state.excited());
}

double atomic_excitation(const TwoExcitationState& state) noexcept {
  return squared_norm(state.excited());
}

double field_excitation(const OneExcitationState& state) noexcept {
  return squared_norm(state.field());
}

// <sum a^dagger a>: one photon in the D sector, two in the E and F sectors.
double field_excitation(const TwoExcitationState& state) noexcept {
  return squared_norm(state.excited()) +
         2.0 * (squared_norm(state.doubled()) + squared_norm(state.pairs()));
}

}  // namespace stimem
