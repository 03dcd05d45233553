#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stimem {

// Classical fixed-step RK4 for y' = f(t, y). `Vector` is any contiguous
// container of a field type; the right-hand side writes dy in place:
//   rhs(double t, std::span<const T> y, std::span<T> dy)
template <class Vector>
class Rk4Stepper {
public:
  using value_type = typename Vector::value_type;

  explicit Rk4Stepper(std::size_t size)
      : k1_(make(size)), k2_(make(size)), k3_(make(size)), k4_(make(size)), tmp_(make(size)) {}

  template <class Rhs>
  void step(Rhs&& rhs, double t, double dt, Vector& y) {
    const std::size_t n = y.size();
    rhs(t, std::span<const value_type>(y), std::span<value_type>(k1_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + (0.5 * dt) * k1_[i];
    rhs(t + 0.5 * dt, std::span<const value_type>(tmp_), std::span<value_type>(k2_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + (0.5 * dt) * k2_[i];
    rhs(t + 0.5 * dt, std::span<const value_type>(tmp_), std::span<value_type>(k3_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + dt * k3_[i];
    rhs(t + dt, std::span<const value_type>(tmp_), std::span<value_type>(k4_));
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i)
      y[i] += w * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

private:
  static Vector make(std::size_t size) {
    Vector v{};
    if constexpr (requires { v.resize(size); }) v.resize(size);
    return v;
  }

  Vector k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace stimem
