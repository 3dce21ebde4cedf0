#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace amari;
using namespace amari::kernels;

namespace {

std::vector<GainSpec> gains() {
  return {GainSpec::sigmoid(), GainSpec::tanh(), GainSpec::cubic(), GainSpec::constant(0.7),
          GainSpec::zero()};
}

}  // namespace

TEST(Gain, PotentialDerivativeIsGain) {
  for (const auto& g : gains())
    for (double s = -6.0; s <= 6.0; s += 0.37) {
      const double t = 1e-5;
      const double fd = (g.phi(s + t) - g.phi(s - t)) / (2.0 * t);
      EXPECT_NEAR(fd, g.f(s), 1e-8) << to_string(g.family()) << " s=" << s;
      const double dfd = (g.f(s + t) - g.f(s - t)) / (2.0 * t);
      EXPECT_NEAR(dfd, g.df(s), 1e-8) << to_string(g.family()) << " s=" << s;
    }
}

TEST(Gain, PotentialVanishesAtZeroAndIsStable) {
  for (const auto& g : gains()) EXPECT_NEAR(g.phi(0.0), 0.0, 1e-15) << to_string(g.family());
  EXPECT_TRUE(std::isfinite(GainSpec::sigmoid().phi(800.0)));
  EXPECT_TRUE(std::isfinite(GainSpec::tanh().phi(-800.0)));
  EXPECT_NEAR(GainSpec::sigmoid().phi(800.0), 800.0 - std::log(2.0), 1e-9);
}

TEST(Gain, CubicMatchesOracle) {
  for (double u = -2.0; u <= 2.0; u += 0.1) EXPECT_NEAR(GainSpec::cubic().f(u), oracle::cubic(u), 1e-14);
  EXPECT_EQ(GainSpec::cubic().f(1.0), 0.0);
  EXPECT_EQ(GainSpec::cubic().f(-1.0), 0.0);
  EXPECT_FALSE(GainSpec::cubic().lipschitz().has_value());
  EXPECT_EQ(*GainSpec::sigmoid().lipschitz(), 0.25);
}

TEST(Energy, PhiFunctionalIsQuadratureSum) {
  const Grid g(0.0, 2.0, 4);
  const Field u(g, Eigen::Vector4d(0.1, -0.2, 0.3, 0.4));
  double ref = 0.0;
  for (int j = 0; j < 4; ++j) ref += GainSpec::tanh().phi(u.values(j));
  EXPECT_DOUBLE_EQ(phi_functional(GainSpec::tanh(), u), 0.5 * ref);
}

TEST(Energy, ThetaModesAgreesWithFieldForm) {
  const Grid g(-5.0, 5.0, 96);
  const auto dec = spectral_decompose(KernelSpec(Gaussian{1.0}), g);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const Field u = oracle::random_in_S(dec, 5, rng);
    const Eigen::VectorXd c = dec.coefficients(u).head(5);
    EXPECT_NEAR(theta_modes(dec, GainSpec::sigmoid(), 0.8, c),
                theta_functional(dec, GainSpec::sigmoid(), 0.8, u), 1e-10);
  }
}

// D Theta(u)[v] = <grad Theta(u), v>_{-1} for u, v in S.
TEST(Energy, GradientRepresentsDerivativeInHminus1) {
  const Grid g(-5.0, 5.0, 128);
  for (const auto& spec : {KernelSpec(Gaussian{1.0}), KernelSpec(Exponential{1.0})}) {
    const auto dec = spectral_decompose(spec, g);
    std::mt19937_64 rng(17);
    for (const auto& gain : {GainSpec::sigmoid(), GainSpec::tanh()})
      for (int trial = 0; trial < 10; ++trial) {
        const Field u = oracle::random_in_S(dec, 8, rng);
        const Field v = oracle::random_in_S(dec, 8, rng);
        const double alpha = 1.3;
        auto theta = [&](const Field& w) { return theta_functional(dec, gain, alpha, w); };
        const double fd = fd_directional(theta, u, v, 1e-4);
        const double exact = inner_hminus1(dec, grad_theta(dec, gain, alpha, u), v);
        EXPECT_LE(std::abs(fd - exact), 1e-5 * std::max(1.0, std::abs(exact)));
      }
  }
}

TEST(Energy, GradientIsNegatedDrift) {
  const Grid g(-5.0, 5.0, 128);
  const auto K = IntegralOperator::make(KernelSpec(Gaussian{1.0}), g);
  const Field u = Field::from_function(g, [](double x) { return std::sin(x); });
  const Field grad = grad_theta(K, GainSpec::tanh(), 0.5, u);
  const Eigen::VectorXd drift = amari_drift(K, GainSpec::tanh(), 0.5, u.values);
  EXPECT_LE((grad.values + drift).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Energy, FiniteDifferenceIsSecondOrder) {
  const Grid g(-5.0, 5.0, 64);
  const auto dec = spectral_decompose(KernelSpec(Gaussian{1.0}), g);
  std::mt19937_64 rng(5);
  const Field u = oracle::random_in_S(dec, 6, rng, 2.0);
  const Field v = oracle::random_in_S(dec, 6, rng, 2.0);
  auto theta = [&](const Field& w) { return theta_functional(dec, GainSpec::sigmoid(), 1.0, w); };
  const double exact = inner_hminus1(dec, grad_theta(dec, GainSpec::sigmoid(), 1.0, u), v);
  const double e1 = std::abs(fd_directional(theta, u, v, 0.1) - exact);
  const double e2 = std::abs(fd_directional(theta, u, v, 0.05) - exact);
  EXPECT_NEAR(e1 / e2, 4.0, 0.2);
  EXPECT_THROW(fd_directional(theta, u, v, 0.0), Error);
}

TEST(Energy, GradientRequiresMembership) {
  const Grid g(-5.0, 5.0, 128);
  const auto dec = spectral_decompose(KernelSpec(Gaussian{1.0}), g);
  Field spike(g);
  spike.values(10) = 1.0;
  try {
    grad_theta(dec, GainSpec::sigmoid(), 1.0, spike);
    FAIL() << "expected NotInS";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotInS);
  }
}

// Constant fields on a periodic domain with a translation-invariant kernel are
// critical exactly when alpha u = R f(u), R the discrete row sum.
TEST(Energy, HomogeneousCriticalPoints) {
  const Grid g(-10.0, 10.0, 200, Boundary::Periodic);
  const KernelSpec spec(Gaussian{1.0}, 1.0 / std::sqrt(2.0 * std::numbers::pi));
  const auto dec = spectral_decompose(spec, g);
  double R = 0.0;
  for (std::size_t j = 0; j < g.n(); ++j) R += g.h() * spec(g.difference(0, j));
  const double alpha = 0.5;
  const auto gain = GainSpec::cubic();
  auto residual = [&](double u) { return alpha * u - R * oracle::cubic(u); };
  for (auto [lo, hi] : {std::pair{-2.0, -0.5}, std::pair{0.0, 0.5}, std::pair{0.5, 2.0}}) {
    const double root = oracle::bisect(residual, lo, hi);
    const Field u = Field::constant(g, root);
    EXPECT_LE(norm_h(grad_theta(dec, gain, alpha, u, 1e-6)), 1e-9) << "root " << root;
  }
  EXPECT_NEAR(homogeneous_root(gain, alpha, R, 0.5, 2.0), oracle::bisect(residual, 0.5, 2.0), 1e-12);
}
