#include "stimem/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stimem/errors.hpp"

namespace stimem {

CavityModel CavityModel::build(const CavityParams& params) {
  if (!(params.length > 0.0)) throw ModelError("cavity length must be positive");
  if (!(params.omega_atom > 0.0)) throw ModelError("atomic frequency must be positive");
  if (!(params.gamma_atom > 0.0)) throw ModelError("decay rate must be positive");
  if (!(params.omega_carrier > 0.0)) throw ModelError("carrier frequency must be positive");
  if (params.num_modes <= 0 || params.num_modes % 2 != 0)
    throw ModelError("number of modes must be a positive even integer");

  CavityModel m;
  m.length_ = params.length;
  m.omega_atom_ = params.omega_atom;
  m.gamma_atom_ = params.gamma_atom;
  m.omega_carrier_ = params.omega_carrier;
  m.atom_position_ = params.atom_position.value_or(0.5 * params.length);
  if (!(m.atom_position_ > 0.0 && m.atom_position_ < params.length))
    throw ModelError("atom position must lie strictly inside (0, L)");

  m.resonant_index_ = std::lround(params.omega_carrier * params.length / kPi);
  const long half = params.num_modes / 2;
  if (half >= m.resonant_index_) {
    std::ostringstream os;
    os << "mode window of " << params.num_modes << " modes around n0=" << m.resonant_index_
       << " would include non-positive mode numbers";
    throw ModelError(os.str());
  }
  m.first_index_ = m.resonant_index_ - half + 1;

  // Gamma_A = omega_A |d|^2 / (eps0 hbar c)
  m.dipole_ = std::sqrt(params.gamma_atom / params.omega_atom);

  const auto n_modes = static_cast<std::size_t>(params.num_modes);
  m.k_.resize(n_modes);
  m.detuning_.resize(n_modes);
  m.coupling_.resize(n_modes);
  const bool centered = m.atom_centered();
  for (std::size_t i = 0; i < n_modes; ++i) {
    const long n = m.first_index_ + static_cast<long>(i);
    const double k = static_cast<double>(n) * kPi / m.length_;
    m.k_[i] = k;
    m.detuning_[i] = k - m.omega_atom_;
    double s;
    if (centered) {
      // sin(n pi / 2) evaluated exactly
      const long r = ((n % 4) + 4) % 4;
      s = (r == 1) ? 1.0 : (r == 3) ? -1.0 : 0.0;
    } else {
      s = std::sin(k * m.atom_position_);
    }
    m.coupling_[i] = std::sqrt(k / m.length_) * m.dipole_ * s;
  }
  return m;
}

bool CavityModel::atom_centered() const noexcept {
  return std::abs(atom_position_ - 0.5 * length_) <= 1e-12 * length_;
}

long CavityModel::shifted_index(int i) const noexcept {
  return physical_index(i) - resonant_index_ + num_modes() / 2;
}

double CavityModel::max_abs_detuning() const noexcept {
  double m = 0.0;
  for (double d : detuning_) m = std::max(m, std::abs(d));
  return m;
}

double CavityModel::golden_rule_rate() const noexcept {
  double sum = 0.0;
  for (double g : coupling_) sum += g * g;
  const double mean = sum / static_cast<double>(coupling_.size());
  return kTwoPi * mean * (length_ / kPi);
}

CavityModel CavityModel::with_coupling_scale(double factor) const {
  CavityModel copy = *this;
  for (double& g : copy.coupling_) g *= factor;
  return copy;
}

CavityModel build_model(double length, double omega_atom, double gamma_atom, double omega_carrier,
                        int num_modes, std::optional<double> atom_position) {
  return CavityModel::build(
      CavityParams{length, omega_atom, gamma_atom, omega_carrier, num_modes, atom_position});
}

double gaussian_profile(double k, double carrier, double width) noexcept {
  const double dk = k - carrier;
  return std::pow(kTwoPi * width * width, -0.25) * std::exp(-dk * dk / (4.0 * width * width));
}

double captured_mass(const WavePacketSpec& spec, const CavityModel& model) {
  if (!(spec.width > 0.0)) throw ModelError("wave packet width must be positive");
  double mass = 0.0;
  for (double k : model.wavenumbers()) {
    const double g = gaussian_profile(k, spec.carrier, spec.width);
    mass += g * g;
  }
  return mass * model.mode_spacing();
}

void check_consistency(const WavePacketSpec& spec, const CavityModel& model, double tolerance) {
  const double mass = captured_mass(spec, model);
  if (mass < 1.0 - tolerance || mass > 1.0 + 1e-12) {
    std::ostringstream os;
    os << "mode window captures probability mass " << mass << " of the wave packet (tolerance "
       << tolerance << "); widen the window or reduce sigma";
    throw ConsistencyError(os.str(), mass);
  }
}

CVector gaussian_weight(const WavePacketSpec& spec, const CavityModel& model, double tolerance) {
  check_consistency(spec, model, tolerance);
  const double inv_sqrt_omega = 1.0 / std::sqrt(model.length() / kPi);
  CVector a;
  a.reserve(static_cast<std::size_t>(model.num_modes()));
  for (double k : model.wavenumbers()) {
    const double g = gaussian_profile(k, spec.carrier, spec.width);
    a.push_back(g * inv_sqrt_omega * std::polar(1.0, -k * spec.center));
  }
  return a;
}

}  // namespace stimem
