#pragma once

// Firing-rate functions f with derivative f' and antiderivative phi, phi(0) = 0.

#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>

#include "amari/errors.hpp"

namespace amari {

enum class GainFamily { Sigmoid, Tanh, Cubic, Constant, Zero };

constexpr std::string_view to_string(GainFamily g) noexcept {
  switch (g) {
    case GainFamily::Sigmoid: return "sigmoid";
    case GainFamily::Tanh: return "tanh";
    case GainFamily::Cubic: return "cubic";
    case GainFamily::Constant: return "constant";
    case GainFamily::Zero: return "zero";
  }
  return "unknown";
}

class GainSpec {
 public:
  explicit GainSpec(GainFamily family = GainFamily::Sigmoid, double c = 1.0)
      : family_(family), c_(c) {
    detail::require(std::isfinite(c), ErrorKind::RangeError, "gain constant must be finite");
  }

  static GainSpec sigmoid() { return GainSpec(GainFamily::Sigmoid); }
  static GainSpec tanh() { return GainSpec(GainFamily::Tanh); }
  /// (s + 1)(1 - s)(s - 0.1)
  static GainSpec cubic() { return GainSpec(GainFamily::Cubic); }
  static GainSpec constant(double c) { return GainSpec(GainFamily::Constant, c); }
  static GainSpec zero() { return GainSpec(GainFamily::Zero); }

  GainFamily family() const noexcept { return family_; }
  double c() const noexcept { return c_; }

  double f(double s) const noexcept {
    switch (family_) {
      case GainFamily::Sigmoid:
        return s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
      case GainFamily::Tanh: return 0.5 * (std::tanh(s) + 1.0);
      case GainFamily::Cubic: return (s + 1.0) * (1.0 - s) * (s - 0.1);
      case GainFamily::Constant: return c_;
      case GainFamily::Zero: return 0.0;
    }
    return 0.0;
  }

  double df(double s) const noexcept {
    switch (family_) {
      case GainFamily::Sigmoid: {
        const double y = f(s);
        return y * (1.0 - y);
      }
      case GainFamily::Tanh: {
        const double t = std::tanh(s);
        return 0.5 * (1.0 - t * t);
      }
      case GainFamily::Cubic: return 1.0 + 0.2 * s - 3.0 * s * s;
      case GainFamily::Constant:
      case GainFamily::Zero: return 0.0;
    }
    return 0.0;
  }

  double phi(double s) const noexcept {
    constexpr double ln2 = std::numbers::ln2;
    switch (family_) {
      case GainFamily::Sigmoid: {
        // log(1 + e^s) - log 2
        const double softplus = s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
        return softplus - ln2;
      }
      case GainFamily::Tanh: {
        // (log cosh s + s) / 2
        const double a = std::abs(s);
        const double log_cosh = a + std::log1p(std::exp(-2.0 * a)) - ln2;
        return 0.5 * (log_cosh + s);
      }
      case GainFamily::Cubic: {
        const double s2 = s * s;
        return -0.25 * s2 * s2 + 0.1 * s2 * s / 3.0 + 0.5 * s2 - 0.1 * s;
      }
      case GainFamily::Constant: return c_ * s;
      case GainFamily::Zero: return 0.0;
    }
    return 0.0;
  }

  /// Global Lipschitz constant of f; empty when f is not globally Lipschitz.
  std::optional<double> lipschitz() const noexcept {
    switch (family_) {
      case GainFamily::Sigmoid: return 0.25;
      case GainFamily::Tanh: return 0.5;
      case GainFamily::Cubic: return std::nullopt;
      case GainFamily::Constant:
      case GainFamily::Zero: return 0.0;
    }
    return std::nullopt;
  }

  bool operator==(const GainSpec&) const = default;

 private:
  GainFamily family_;
  double c_;
};

}  // namespace amari
