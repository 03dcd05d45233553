#pragma once

// Cavity, mode window, and atom-field couplings for the 1D multimode
// Jaynes-Cummings model. Units: hbar = c = eps0 = 1.

#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace stimem {

using cdouble = std::complex<double>;
using CVector = std::vector<cdouble>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct CavityParams {
  double length = 80.0 * kPi;
  double omega_atom = 1000.0;
  double gamma_atom = 0.05;
  double omega_carrier = 1000.0;
  int num_modes = 200;
  // Defaults to the cavity centre.
  std::optional<double> atom_position;
};

class CavityModel {
public:
  static CavityModel build(const CavityParams& params);

  double length() const noexcept { return length_; }
  double atom_position() const noexcept { return atom_position_; }
  double omega_atom() const noexcept { return omega_atom_; }
  double gamma_atom() const noexcept { return gamma_atom_; }
  double omega_carrier() const noexcept { return omega_carrier_; }
  double dipole() const noexcept { return dipole_; }
  int num_modes() const noexcept { return static_cast<int>(k_.size()); }
  long resonant_index() const noexcept { return resonant_index_; }
  double mode_spacing() const noexcept { return kPi / length_; }
  // Atom sits at L/2 to within floating-point rounding.
  bool atom_centered() const noexcept;

  // Physical mode number n of window slot i.
  long physical_index(int i) const noexcept { return first_index_ + i; }
  // n_s = n - n0 + N/2, the plotting index.
  long shifted_index(int i) const noexcept;

  std::span<const double> wavenumbers() const noexcept { return k_; }
  std::span<const double> frequencies() const noexcept { return k_; }
  std::span<const double> detunings() const noexcept { return detuning_; }
  std::span<const double> couplings() const noexcept { return coupling_; }

  double max_abs_detuning() const noexcept;
  // 2*pi * <g^2> over the window * mode density L/pi; approximates gamma_atom.
  double golden_rule_rate() const noexcept;

  // Same mode table with every coupling multiplied by `factor` (0 decouples the atom).
  CavityModel with_coupling_scale(double factor) const;

private:
  CavityModel() = default;

  double length_ = 0.0;
  double atom_position_ = 0.0;
  double omega_atom_ = 0.0;
  double gamma_atom_ = 0.0;
  double omega_carrier_ = 0.0;
  double dipole_ = 0.0;
  long resonant_index_ = 0;
  long first_index_ = 0;
  std::vector<double> k_;
  std::vector<double> detuning_;
  std::vector<double> coupling_;
};

CavityModel build_model(double length, double omega_atom, double gamma_atom, double omega_carrier,
                        int num_modes, std::optional<double> atom_position = std::nullopt);

// Gaussian single-photon packet. `width` is the momentum-space sigma.
struct WavePacketSpec {
  double center = 0.0;
  double carrier = 1000.0;
  double width = 0.25;

  // T_P ~ 4/(c sigma)
  double duration() const noexcept { return 4.0 / width; }
};

inline constexpr double kDefaultConsistencyTolerance = 1e-3;

// G(k) = (2 pi sigma^2)^(-1/4) exp(-(k-k0)^2 / (4 sigma^2))
double gaussian_profile(double k, double carrier, double width) noexcept;

// sum_n |G(k_n)|^2 dk over the window.
double captured_mass(const WavePacketSpec& spec, const CavityModel& model);

// Throws ConsistencyError unless captured_mass lies in [1 - tolerance, 1 + 1e-12].
void check_consistency(const WavePacketSpec& spec, const CavityModel& model,
                       double tolerance = kDefaultConsistencyTolerance);

// A_n(0) = G(k_n) exp(-i k_n z0) / sqrt(Omega_N), Omega_N = L/pi.
CVector gaussian_weight(const WavePacketSpec& spec, const CavityModel& model,
                        double tolerance = kDefaultConsistencyTolerance);

}  // namespace stimem
