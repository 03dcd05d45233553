#pragma once

// Initial states and Schroedinger-equation integration in the one- and
// two-excitation subspaces (interaction picture).

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stimem/core_model.hpp"

namespace stimem {

// |psi_1> = sum_n A_n |1_n>, no atom.
struct FieldOnlyState {
  CVector amplitudes;
  double time = 0.0;

  double norm() const noexcept;
};

// |psi_2> = B |e,0> + sum_n C_n |g,1_n>. Stored flat as [B, C_0 .. C_{N-1}].
class OneExcitationState {
public:
  OneExcitationState() = default;
  explicit OneExcitationState(int num_modes);

  int num_modes() const noexcept { return static_cast<int>(data_.size()) - 1; }
  cdouble& excited() noexcept { return data_[0]; }
  cdouble excited() const noexcept { return data_[0]; }
  std::span<cdouble> field() noexcept { return std::span(data_).subspan(1); }
  std::span<const cdouble> field() const noexcept { return std::span(data_).subspan(1); }

  CVector& data() noexcept { return data_; }
  const CVector& data() const noexcept { return data_; }
  double norm() const noexcept;

  double time = 0.0;

private:
  CVector data_;
};

// Packing of unordered pairs n < m into a flat array, row by row.
class PairIndex {
public:
  PairIndex() = default;
  explicit PairIndex(int num_modes);

  int num_modes() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }
  // Requires n != m; argument order is irrelevant.
  std::size_t operator()(int n, int m) const noexcept;
  std::size_t row_offset(int n) const noexcept { return offsets_[static_cast<std::size_t>(n)]; }

private:
  int n_ = 0;
  std::size_t size_ = 0;
  std::vector<std::size_t> offsets_;
};

// |psi_3> = sum D_n |e,1_n> + sum E_n |g,2_n> + sum_{n<m} F_nm |g,1_n,1_m>.
// Flat storage [D (N), E (N), F (N(N-1)/2)]. Only n<m is stored, so the
// symmetry F_nm = F_mn holds by construction.
class TwoExcitationState {
public:
  TwoExcitationState() = default;
  explicit TwoExcitationState(int num_modes);

  int num_modes() const noexcept { return pairs_.num_modes(); }
  const PairIndex& pair_index() const noexcept { return pairs_; }

  std::span<cdouble> excited() noexcept { return std::span(data_).subspan(0, mode_count()); }
  std::span<const cdouble> excited() const noexcept {
    return std::span(data_).subspan(0, mode_count());
  }
  std::span<cdouble> doubled() noexcept { return std::span(data_).subspan(mode_count(), mode_count()); }
  std::span<const cdouble> doubled() const noexcept {
    return std::span(data_).subspan(mode_count(), mode_count());
  }
  std::span<cdouble> pairs() noexcept { return std::span(data_).subspan(2 * mode_count()); }
  std::span<const cdouble> pairs() const noexcept { return std::span(data_).subspan(2 * mode_count()); }

  // F_nm for n != m (symmetric); 0 on the diagonal.
  cdouble pair(int n, int m) const noexcept;
  void set_pair(int n, int m, cdouble value) noexcept;

  CVector& data() noexcept { return data_; }
  const CVector& data() const noexcept { return data_; }

  // sum |D|^2 + sum |E|^2 + 1/2 sum_{n!=m} |F|^2
  double norm() const noexcept;
  void scale(double factor) noexcept;

  double time = 0.0;

private:
  std::size_t mode_count() const noexcept { return static_cast<std::size_t>(pairs_.num_modes()); }

  PairIndex pairs_;
  CVector data_;
};

struct IntegrationOptions {
  double dt = 0.01;
  int stride = 10;
  double norm_tolerance = 1e-6;
  // dt * max|Delta_n| must not exceed this.
  double stability_limit = 0.1;
};

template <class State>
struct EvolutionResult {
  State final_state;
  double max_norm_drift = 0.0;
  std::size_t steps = 0;
};

template <class State>
using SampleObserver = std::function<void(const State&)>;

// A_n(t) = A_n(t0) exp(-i omega_n (t - t0)); exact.
FieldOnlyState evolve_free(const FieldOnlyState& state, const CavityModel& model, double t);

FieldOnlyState init_free_packet(const CavityModel& model, const WavePacketSpec& spec);

// B = 1, C = 0.
OneExcitationState init_excited_atom(const CavityModel& model);

// Integrates to t_end with fixed-step RK4. The observer is invoked for the
// initial state and every `stride` steps (and at t_end). Throws
// IntegratorError on a stability-guard violation or when the norm drifts
// by more than options.norm_tolerance.
EvolutionResult<OneExcitationState> evolve_one_excitation(
    const OneExcitationState& state, const CavityModel& model, double t_end,
    const IntegrationOptions& options = {}, const SampleObserver<OneExcitationState>& observer = {});

// D_n(0) = exp(-i k_n z0) G(k_n) / sqrt(Omega_N), E = F = 0.
TwoExcitationState init_photon_plus_excited_atom(const CavityModel& model, const WavePacketSpec& spec,
                                                 std::vector<std::string>* warnings = nullptr);

struct PreparedTwoPhotonState {
  TwoExcitationState state;
  // Norm of the state before numerical renormalization.
  double raw_norm = 0.0;
};

// W^dagger(z1) W^dagger(z2) |0>, renormalized to unit norm.
PreparedTwoPhotonState init_two_photons(const CavityModel& model, double z1, double z2, double width);

// [W^dagger(z1) + exp(i phi) W^dagger(z2)]^2 |0> / N_phi. raw_norm is N_phi^2.
PreparedTwoPhotonState init_phase_coherent_double(const CavityModel& model, double z1, double z2,
                                                  double phase, double width);

EvolutionResult<TwoExcitationState> evolve_two_excitation(
    const TwoExcitationState& state, const CavityModel& model, double t_end,
    const IntegrationOptions& options = {}, const SampleObserver<TwoExcitationState>& observer = {});

// <H_int>, constant in time for exact evolution.
double interaction_energy(const OneExcitationState& state, const CavityModel& model);
double interaction_energy(const TwoExcitationState& state, const CavityModel& model);

// Expectation values of Q_A and Q_F.
double atomic_excitation(const OneExcitationState& state) noexcept;
double atomic_excitation(const TwoExcitationState& state) noexcept;
double field_excitation(const OneExcitationState& state) noexcept;
double field_excitation(const TwoExcitationState& state) noexcept;

}  // namespace stimem
