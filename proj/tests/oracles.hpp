#pragma once

// Brute-force references for small mode counts: explicit Fock basis with
// up to two excitations, operator matrices, dense propagator.

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <vector>

#include "stimem/core_model.hpp"
#include "stimem/quantum_dynamics.hpp"

namespace oracle {

using stimem::cdouble;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct BasisState {
  int atom = 0;  // 0 ground, 1 excited
  std::vector<int> occ;
  bool operator<(const BasisState& o) const { return atom != o.atom ? atom < o.atom : occ < o.occ; }
};

// Every state with atom + photons <= 2.
class FockSpace {
public:
  explicit FockSpace(int modes) : modes_(modes) {
    for (int atom = 0; atom <= 1; ++atom) enumerate(atom, std::vector<int>(modes, 0), 0, 2 - atom);
  }

  int size() const { return static_cast<int>(states_.size()); }
  int modes() const { return modes_; }
  int index(const BasisState& s) const { return index_.at(s); }

  Matrix annihilate(int mode) const {
    Matrix a = Matrix::Zero(size(), size());
    for (int j = 0; j < size(); ++j) {
      BasisState s = states_[j];
      if (s.occ[mode] == 0) continue;
      const double amp = std::sqrt(static_cast<double>(s.occ[mode]));
      --s.occ[mode];
      a(index(s), j) = amp;
    }
    return a;
  }

  // sigma_- : |e> -> |g>
  Matrix lower() const {
    Matrix m = Matrix::Zero(size(), size());
    for (int j = 0; j < size(); ++j) {
      BasisState s = states_[j];
      if (s.atom == 0) continue;
      s.atom = 0;
      m(index(s), j) = 1.0;
    }
    return m;
  }

  Matrix excited_projector() const {
    Matrix m = Matrix::Zero(size(), size());
    for (int j = 0; j < size(); ++j)
      if (states_[j].atom == 1) m(j, j) = 1.0;
    return m;
  }

  // H = sum Delta_n a+a - sum g_n (sigma+ a_n + a_n+ sigma-), frame rotating at omega_A.
  Matrix hamiltonian(const stimem::CavityModel& model) const {
    Matrix h = Matrix::Zero(size(), size());
    const Matrix sm = lower();
    for (int n = 0; n < modes_; ++n) {
      const Matrix a = annihilate(n);
      const double g = model.couplings()[n];
      h += model.detunings()[n] * a.adjoint() * a;
      h -= g * (sm.adjoint() * a + a.adjoint() * sm);
    }
    return h;
  }

  Vector embed(const stimem::OneExcitationState& s) const {
    Vector v = Vector::Zero(size());
    std::vector<int> occ(modes_, 0);
    v(index({1, occ})) = s.excited();
    for (int n = 0; n < modes_; ++n) {
      occ.assign(modes_, 0);
      occ[n] = 1;
      v(index({0, occ})) = s.field()[n];
    }
    return v;
  }

  Vector embed(const stimem::TwoExcitationState& s) const {
    Vector v = Vector::Zero(size());
    for (int n = 0; n < modes_; ++n) {
      std::vector<int> occ(modes_, 0);
      occ[n] = 1;
      v(index({1, occ})) = s.excited()[n];
      occ[n] = 2;
      v(index({0, occ})) = s.doubled()[n];
      for (int m = n + 1; m < modes_; ++m) {
        std::vector<int> pair(modes_, 0);
        pair[n] = pair[m] = 1;
        v(index({0, pair})) = s.pair(n, m);
      }
    }
    return v;
  }

  // ||E+(z) psi||^2 with E+(z) = sum_n sqrt(2 omega_n / L) sin(k_n z) a_n.
  double normal_ordered_intensity(const Vector& psi, const stimem::CavityModel& model, double z) const {
    Matrix e = Matrix::Zero(size(), size());
    for (int n = 0; n < modes_; ++n) {
      const double k = model.wavenumbers()[n];
      e += std::sqrt(2.0 * k / model.length()) * std::sin(k * z) * annihilate(n);
    }
    return (e * psi).squaredNorm();
  }

private:
  void enumerate(int atom, std::vector<int> occ, int from, int budget) {
    add({atom, occ});
    if (budget == 0) return;
    for (int n = from; n < modes_; ++n) {
      ++occ[n];
      enumerate(atom, occ, n, budget - 1);
      --occ[n];
    }
  }
  void add(const BasisState& s) {
    if (index_.count(s)) return;
    index_[s] = static_cast<int>(states_.size());
    states_.push_back(s);
  }

  int modes_;
  std::vector<BasisState> states_;
  std::map<BasisState, int> index_;
};

// exp(-i H t) via the eigen-decomposition of the Hermitian H.
inline Matrix propagator(const Matrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, -es.eigenvalues()(i) * t);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace oracle
