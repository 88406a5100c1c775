#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ldplab/levy.hpp"
#include "ldplab/ratefn.hpp"
#include "ldplab/sde.hpp"
#include "ldplab/vector_field.hpp"
#include "oracles.hpp"

using namespace ldplab;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }
Matrix m1(double a) { return Matrix::Constant(1, 1, a); }

CadlagPath ramp(double slope, double T = 1.0) { return CadlagPath::line(v1(0.0), v1(slope * T), T); }

CadlagPath pure_jumps(const std::vector<double>& at, const std::vector<double>& sizes, double T = 1.0) {
  PathBuilder b(v1(0.0));
  for (std::size_t i = 0; i < at.size(); ++i) b.hold_to(at[i]).jump_by(v1(sizes[i]));
  return b.hold_to(T).build();
}

double sup_diff(const CadlagPath& a, const CadlagPath& b, int points = 2001) {
  double w = 0.0;
  for (int k = 0; k < points; ++k) {
    const double t = a.horizon() * k / (points - 1);
    w = std::max(w, (a(t) - b(t)).norm());
    w = std::max(w, (a.left_limit(t) - b.left_limit(t)).norm());
  }
  return w;
}

}  // namespace

TEST(VectorField, DeclaredConstantsAreChecked) {
  const auto c = fields::constant(m1(2.0));
  EXPECT_DOUBLE_EQ(c.bound(), 2.0);
  EXPECT_EQ(c.lipschitz(), 0.0);
  EXPECT_THROW(VectorField(
                   1, 1, [](const Eigen::Ref<const Vector>& y, Eigen::Ref<Matrix> out) { out(0, 0) = std::sin(3.0 * y[0]); },
                   1.0, 1.0, "too_steep"),
               DomainError);
  EXPECT_THROW(VectorField(
                   1, 1, [](const Eigen::Ref<const Vector>& y, Eigen::Ref<Matrix> out) { out(0, 0) = 2.0 * std::sin(y[0]); },
                   1.0, 2.0, "too_big"),
               DomainError);
  EXPECT_NO_THROW(VectorField(
      1, 1, [](const Eigen::Ref<const Vector>& y, Eigen::Ref<Matrix> out) { out(0, 0) = std::sin(y[0]); }, 1.0, 1.0,
      "sine"));
}

TEST(VectorField, UnboundedRejectedUnlessAllowed) {
  EXPECT_THROW(fields::linear(m1(1.0), false), DomainError);
  const auto lin = fields::linear(m1(1.0), true);
  EXPECT_TRUE(is_infinite(lin.bound()));
  EXPECT_DOUBLE_EQ(lin(v1(3.0))(0, 0), 3.0);
}

TEST(VectorField, CatalogValues) {
  const auto cl = fields::clamp_linear(m1(1.0), -10.0, 10.0);
  EXPECT_DOUBLE_EQ(cl(v1(3.0))(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(cl(v1(30.0))(0, 0), 10.0);
  const auto th = fields::tanh_scaled(m1(2.0), 0.5, 1.0);
  EXPECT_DOUBLE_EQ(th(v1(1.0))(0, 0), 2.0 * (1.0 + std::tanh(0.5)));
  Matrix A(2, 3);
  A << 1, 2, 3, 4, 5, 6;
  const auto h = fields::hstack({fields::constant(A.leftCols(1)), fields::constant(A.rightCols(2))});
  EXPECT_TRUE(h(Vector::Zero(2)).isApprox(A, 0.0));
}

TEST(SolveSde, ZeroFieldReturnsControl) {
  const auto u = PathBuilder(v1(1.0)).linear_to(0.4, v1(2.0)).jump_by(v1(-1.0)).linear_to(1.0, v1(0.5)).build();
  const auto y = solve_sde(fields::constant(m1(0.0)), u, ramp(3.0), 0.01);
  EXPECT_LT(sup_diff(y, u), 1e-14);
}

TEST(SolveSde, ConstantFieldTelescopes) {
  Matrix A(2, 2);
  A << 1.0, -0.5, 0.3, 2.0;
  auto tr = LevyTriplet::make(2);
  tr.diffusion.setIdentity();
  tr.jumps.atoms.push_back({Vector::Ones(2), 3.0});
  const auto x = simulate(tr, 0.5, 1.0, 0.05, 7);
  Vector u0(2);
  u0 << 0.2, -1.0;
  const auto u = CadlagPath::constant(u0, 1.0);
  for (double step : {0.5, 0.01}) {
    const auto y = solve_sde(fields::constant(A), u, x, step);
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double t = y.time(k);
      EXPECT_LT((y.value(k) - (u0 + A * (x(t) - x(0.0)))).norm(), 1e-12);
    }
  }
}

TEST(SolveSde, DoleansDadeProduct) {
  const auto x = pure_jumps({0.2, 0.5, 0.8}, {0.5, -0.2, 0.1});
  const auto u = CadlagPath::constant(v1(1.0), 1.0);
  const auto F = fields::clamp_linear(m1(1.0), -10.0, 10.0);
  EXPECT_NEAR(solve_sde(F, u, x, 1e-3)(1.0)[0], 1.32, 4e-16);
  EXPECT_NEAR(solve_skeleton(F, u, x, 1e-3)(1.0)[0], 1.32, 4e-16);
}

TEST(SolveSde, RejectsMismatchedInput) {
  const auto F = fields::constant(m1(1.0));
  EXPECT_THROW(solve_sde(F, CadlagPath::zero(2, 1.0), ramp(1.0), 0.1), DimensionError);
  EXPECT_THROW(solve_sde(F, CadlagPath::zero(1, 2.0), ramp(1.0), 0.1), DimensionError);
  EXPECT_THROW(solve_sde(F, CadlagPath::zero(1, 1.0), ramp(1.0), 0.0), DomainError);
  EXPECT_THROW(solve_skeleton(F, CadlagPath::zero(1, 1.0), ramp(1.0), -1.0), DomainError);
}

TEST(SolveSkeleton, Examples) {
  const auto u0 = CadlagPath::zero(1, 1.0);
  EXPECT_LT(sup_diff(solve_skeleton(fields::constant(m1(1.0)), u0, CadlagPath::zero(1, 1.0), 0.01), u0), 1e-15);
  const auto y = solve_skeleton(fields::constant(m1(1.0)), u0, ramp(1.7), 0.01);
  EXPECT_LT(sup_diff(y, ramp(1.7)), 1e-13);
  const auto F = fields::clamp_linear(m1(1.0), -10.0, 10.0);
  const auto e = solve_skeleton(F, CadlagPath::constant(v1(1.0), 1.0), ramp(1.0), 1e-3);
  EXPECT_NEAR(e(1.0)[0], std::exp(1.0), 1e-6);
  EXPECT_NEAR(e(0.5)[0], std::exp(0.5), 1e-6);
}

TEST(SolveSkeleton, GridRefinementConverges) {
  // smooth segments: RK4 error should fall by far more than 1.5 per halving
  const auto F = fields::tanh_scaled(m1(1.0), 1.3, 0.2);
  const auto x = PathBuilder(v1(0.0)).linear_to(0.3, v1(1.5)).linear_to(0.7, v1(-0.5)).linear_to(1.0, v1(2.0)).build();
  const auto u = CadlagPath::line(v1(0.3), v1(-0.4), 1.0);
  double last = -1.0;
  for (double step : {0.1, 0.05, 0.025, 0.0125}) {
    const double diff = sup_diff(solve_skeleton(F, u, x, step), solve_skeleton(F, u, x, step / 2));
    if (last > 0.0) {
      EXPECT_LE(diff * 1.5, last) << "step " << step;
    }
    last = diff;
  }
}

TEST(SolveSde, EulerIsCauchyUnderRefinement) {
  auto tr = LevyTriplet::make(1);
  tr.diffusion(0, 0) = 1.0;
  tr.jumps.atoms.push_back({v1(1.0), 2.0});
  const auto x = simulate(tr, 0.3, 1.0, 0.05, 21);
  const auto F = fields::tanh_scaled(m1(1.0), 1.0, 0.5);
  const auto u = CadlagPath::constant(v1(0.1), 1.0);
  double last = -1.0;
  for (double step : {0.05, 0.01, 0.002, 0.0004}) {
    const double diff = sup_diff(solve_sde(F, u, x, step), solve_sde(F, u, x, step / 2));
    if (last > 0.0) {
      EXPECT_LT(diff, last);
    }
    last = diff;
  }
  EXPECT_LT(last, 1e-3);
}

TEST(Solvers, PureJumpRecursionExact) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto F = fields::tanh_scaled(m1(0.8), 1.1, 0.3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> at, dx;
    for (int k = 1; k <= 6; ++k) {
      at.push_back(k / 7.0);
      dx.push_back(unif(rng));
    }
    const auto x = pure_jumps(at, dx);
    PathBuilder ub(v1(0.5));
    std::vector<double> du;
    for (std::size_t k = 0; k < at.size(); ++k) {
      du.push_back(k % 2 ? unif(rng) : 0.0);
      ub.hold_to(at[k]).jump_by(v1(du.back()));
    }
    const auto u = ub.hold_to(1.0).build();
    double y = 0.5;
    for (std::size_t k = 0; k < at.size(); ++k) y = y + du[k] + 0.8 * (0.3 + std::tanh(1.1 * y)) * dx[k];
    EXPECT_NEAR(solve_sde(F, u, x, 0.01)(1.0)[0], y, 1e-14);
    EXPECT_NEAR(solve_skeleton(F, u, x, 0.01)(1.0)[0], y, 1e-14);
  }
}

TEST(Solvers, JumpSizeBound) {
  auto tr = LevyTriplet::make(2);
  tr.diffusion = 0.5 * Matrix::Identity(2, 2);
  Vector a(2), b(2);
  a << 1.0, -2.0;
  b << -0.5, 0.7;
  tr.jumps.atoms.push_back({a, 3.0});
  tr.jumps.atoms.push_back({b, 2.0});
  Matrix A(2, 2);
  A << 1.0, 0.5, -0.3, 0.8;
  const auto F = fields::tanh_scaled(A, 2.0, 0.1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = simulate(tr, 0.5, 1.0, 0.02, seed);
    const auto ub = PathBuilder(Vector::Zero(2)).linear_to(0.45, Vector::Ones(2)).jump_by(-a).hold_to(1.0).build();
    for (const auto& y : {solve_sde(F, ub, x, 0.01), solve_skeleton(F, ub, x, 0.01)}) {
      for (std::size_t k = 1; k < y.size(); ++k) {
        const double t = y.time(k);
        const double du = (ub(t) - ub.left_limit(t)).norm();
        const double dx = (x(t) - x.left_limit(t)).norm();
        EXPECT_LE(y.jump(k).norm(), du + F.bound() * dx + 1e-12);
      }
    }
  }
}

TEST(SolveIto, ReducesToDriftOde) {
  const auto F1 = fields::clamp_linear(m1(1.0), -10.0, 10.0);
  const auto zero = fields::constant(m1(0.0));
  const auto B = ramp(1.0);
  const NoiseParts parts{B, ramp(5.0), CadlagPath::zero(1, 1.0), ramp(-2.0)};
  const auto u = CadlagPath::constant(v1(1.0), 1.0);
  const auto y = solve_ito(F1, zero, zero, u, parts, 1e-3);
  const auto ref = solve_sde(F1, u, B, 1e-3);
  EXPECT_LT(sup_diff(y, ref), 1e-14);
}

TEST(SolveIto, ConstantContinuousCoefficient) {
  const auto zero = fields::constant(m1(0.0));
  const auto A = fields::constant(m1(2.5));
  auto tr = LevyTriplet::make(1);
  tr.diffusion(0, 0) = 1.0;
  const auto xc = simulate(tr, 0.5, 1.0, 0.01, 3);
  const NoiseParts parts{ramp(1.0), xc, CadlagPath::zero(1, 1.0), CadlagPath::zero(1, 1.0)};
  const auto u = CadlagPath::line(v1(0.2), v1(1.0), 1.0);
  const auto y = solve_ito(zero, A, zero, u, parts, 0.01);
  for (std::size_t k = 0; k < xc.size(); ++k) {
    const double t = xc.time(k);
    EXPECT_NEAR(y(t)[0], u(t)[0] + 2.5 * xc(t)[0], 1e-12);
  }
}

TEST(SolveIto, EqualsStackedSystem) {
  auto tr = LevyTriplet::make(1);
  tr.diffusion(0, 0) = 1.0;
  tr.jumps.atoms.push_back({v1(0.4), 3.0});
  tr.jumps.atoms.push_back({v1(2.0), 1.0});
  const auto x = simulate(tr, 0.5, 1.0, 0.02, 8);
  const auto split = truncation_split(x, 0.5);
  const NoiseParts parts{ramp(0.7), simulate(tr, 0.5, 1.0, 0.02, 9), CadlagPath::zero(1, 1.0), split.large_jumps};
  const auto F1 = fields::tanh_scaled(m1(1.0), 1.0, 0.0);
  const auto F2 = fields::tanh_scaled(m1(0.5), 2.0, 1.0);
  const auto F3 = fields::clamp_linear(m1(1.0), -3.0, 3.0);
  const auto u = CadlagPath::constant(v1(0.1), 1.0);
  const auto y = solve_ito(F1, F2, F3, u, parts, 0.01);

  const CadlagPath* ps[] = {&parts.drift, &parts.continuous, &split.large_jumps};
  const auto stacked = stack(std::span<const CadlagPath* const>(ps));
  const auto direct = solve_sde(fields::hstack({F1, F2, F3}), u, stacked, 0.01);
  EXPECT_EQ(y.times(), direct.times());
  EXPECT_EQ(y.raw_values(), direct.raw_values());
  EXPECT_EQ(y.raw_left_values(), direct.raw_left_values());
}

TEST(SolveIto, EqualConstantFieldsMatchSummedNoise) {
  const auto A = fields::constant(m1(1.7));
  auto tr = LevyTriplet::make(1);
  tr.diffusion(0, 0) = 1.0;
  tr.jumps.atoms.push_back({v1(1.0), 2.0});
  const auto xc = simulate(tr, 0.5, 1.0, 0.02, 11);
  const auto big = pure_jumps({0.33, 0.81}, {1.0, -0.4});
  const NoiseParts parts{ramp(0.6), xc, CadlagPath::zero(1, 1.0), big};
  const auto u = CadlagPath::zero(1, 1.0);
  const auto y = solve_ito(A, A, A, u, parts, 0.01);
  const CadlagPath* ps[] = {&parts.drift, &xc, &big};
  const double w[] = {1.0, 1.0, 1.0};
  const auto sum = combine(std::span<const CadlagPath* const>(ps), w);
  EXPECT_LT(sup_diff(y, solve_sde(A, u, sum, 0.01)), 1e-12);
}

TEST(Residual, Examples) {
  const auto F = fields::clamp_linear(m1(1.0), -10.0, 10.0);
  const auto u = CadlagPath::constant(v1(1.0), 1.0);
  const auto x = PathBuilder(v1(0.0)).linear_to(0.6, v1(0.6)).jump_by(v1(0.3)).linear_to(1.0, v1(1.3)).build();
  const auto y = solve_skeleton(F, u, x, 1e-3);
  EXPECT_LE(residual(F, u, x, y, 1e-3), 1e-6);

  const auto zero = fields::constant(m1(0.0));
  const auto bumped = PathBuilder(v1(1.0)).hold_to(0.5).jump_by(v1(1.0)).hold_to(1.0).build();
  EXPECT_NEAR(residual(zero, u, x, bumped, 1e-3), 1.0, 1e-15);
  EXPECT_EQ(residual(F, u, CadlagPath::zero(1, 1.0), u, 1e-3), 0.0);
}

TEST(Residual, SkeletonOutputIsConsistentOnRandomControls) {
  std::mt19937_64 rng(12);
  const auto F = fields::tanh_scaled(m1(1.0), 1.0, 0.5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = oracle::random_grid_path(rng, 1, 6);
    const auto xs = subtract(x, CadlagPath::constant(x(0.0), 1.0));
    const auto u = CadlagPath::constant(v1(0.2), 1.0);
    const auto y = solve_skeleton(F, u, xs, 1e-3);
    EXPECT_LE(residual(F, u, xs, y, 1e-3), kMembershipTol);
  }
}
