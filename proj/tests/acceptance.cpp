// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances and sample sizes are pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "ldplab/diagnostics.hpp"
#include "oracles.hpp"

using namespace ldplab;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }
Matrix m1(double a) { return Matrix::Constant(1, 1, a); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double three_sigma(double p, std::size_t n) { return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

LevyTriplet brownian() {
  auto tr = LevyTriplet::make(1);
  tr.diffusion(0, 0) = 1.0;
  return tr;
}

LevyTriplet unit_poisson() {
  auto tr = LevyTriplet::make(1);
  tr.jumps.atoms.push_back({v1(1.0), 1.0});
  return tr;
}

EventSpec terminal(double level) {
  EventSpec e;
  e.event = {EndpointEvent::Type::terminal_ge, 0, level, 1e-3};
  return e;
}

EndpointEvent terminal_event(double level) { return {EndpointEvent::Type::terminal_ge, 0, level, 1e-3}; }

// ---------------------------------------------------------------------------

Outcome gaussian_baseline() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::vector<double> eps{0.1, 0.05, 0.02, 0.01, 0.005};
  const auto c = exact_tail_curve(TailFamily{}, 1.0, eps);
  double last_gap = kInfinity;
  bool monotone = true;
  for (const auto& e : c.entries) {
    const double gap = std::abs(*e.eps_log_p + 0.5);
    monotone = monotone && gap < last_gap;
    last_gap = gap;
  }
  const double at_small = *c.entries.back().eps_log_p;
  o.check(std::abs(at_small + 0.5) <= 0.06, "eps log p at 0.005 within 0.06 of -0.5");
  o.check(monotone, "monotone toward -0.5");

  const auto r = minimize_endpoint(RateModel::brownian(m1(1.0), 1.0, 1.0), fields::constant(m1(1.0)),
                                   CadlagPath::zero(1, 1.0), terminal_event(1.0), ControlGrid{16});
  o.check(std::abs(r.rate - 0.5) <= 0.01, "minimize_endpoint 0.5 +- 0.01");
  const double secs = seconds_since(t0);
  o.check(secs < 10.0, "runtime < 10 s");
  o.detail << "eps log p(0.005) = " << at_small << ", monotone = " << monotone << ", rate(m=16) = " << r.rate
           << ", " << secs << " s";
  return o;
}

Outcome gaussian_monte_carlo() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::size_t N = 1000000;
  SamplingConfig cfg;  // single worker, grid step 0.01
  const auto c = rate_curve(brownian(), fields::constant(m1(1.0)), CadlagPath::zero(1, 1.0), terminal(0.5), {0.05}, N,
                            20240601, cfg);
  const auto& e = c.entries[0];
  const double exact = oracle::normal_tail(0.5 / std::sqrt(0.05));
  const double tol = three_sigma(exact, N);
  o.check(std::abs(e.p_hat - exact) <= tol, "|p_hat - exact| <= 3 sigma");
  const double secs = seconds_since(t0);
  o.check(secs < 120.0, "runtime < 2 min");
  o.detail << "p_hat = " << e.p_hat << " CI [" << e.ci_low << ", " << e.ci_high << "], exact = " << exact
           << ", 3 sigma = " << tol << ", " << secs << " s";
  return o;
}

Outcome poisson_baseline() {
  Outcome o;
  const auto t0 = Clock::now();
  const double I = 2.0 * std::log(2.0) - 1.0;
  const double leg = legendre_value(unit_poisson(), 2.0);
  o.check(std::abs(leg - I) <= 1e-4, "legendre 2ln2-1 +- 1e-4");

  TailFamily p;
  p.kind = TailFamily::Kind::poisson;
  const auto c = exact_tail_curve(p, 2.0, {0.1, 0.05, 0.02, 0.01, 0.005});
  double last_gap = kInfinity;
  bool monotone = true;
  for (const auto& e : c.entries) {
    const double gap = std::abs(*e.eps_log_p + I);
    monotone = monotone && gap < last_gap;
    last_gap = gap;
  }
  const double at_small = *c.entries.back().eps_log_p;
  o.check(std::abs(at_small + I) <= 0.08, "exact curve within 0.08 at eps 0.005");
  o.check(monotone, "exact curve monotone toward the limit");

  const std::size_t N = 1000000;
  SamplingConfig cfg;
  const auto mc = rate_curve(unit_poisson(), fields::constant(m1(1.0)), CadlagPath::zero(1, 1.0), terminal(2.0), {0.1},
                             N, 7, cfg);
  const double exact = oracle::poisson_tail(20, 10.0);
  const double tol = three_sigma(exact, N);
  o.check(std::abs(mc.entries[0].p_hat - exact) <= tol, "Monte Carlo within 3 sigma of P(Pois(10) >= 20)");
  const double secs = seconds_since(t0);
  o.check(secs < 120.0, "runtime < 2 min");
  o.detail << "legendre = " << leg << ", eps log p(0.005) = " << at_small << ", p_hat = " << mc.entries[0].p_hat
           << ", exact = " << exact << ", 3 sigma = " << tol << ", " << secs << " s";
  return o;
}

CadlagPath pure_jumps(const std::vector<double>& times, const std::vector<double>& sizes) {
  PathBuilder b(v1(0.0));
  for (std::size_t i = 0; i < times.size(); ++i) b.hold_to(times[i]).jump_by(v1(sizes[i]));
  b.hold_to(1.0);
  return b.build();
}

Outcome skeleton_oracles() {
  Outcome o;
  // y = 1 + int y dt: F(y) = y (clamped far away), u = 1, x(t) = t
  const auto F = fields::clamp_linear(m1(1.0), -10.0, 10.0);
  const auto u = CadlagPath::constant(v1(1.0), 1.0);
  const auto x = CadlagPath::line(v1(0.0), v1(1.0), 1.0);
  const auto y = solve_skeleton(F, u, x, 1e-3);
  const double err = std::abs(y(1.0)[0] - std::exp(1.0));
  o.check(err <= 1e-6, "exponential ODE within 1e-6");

  // (1 + 0.5)(1 - 0.2)(1 + 0.1) = 1.32
  const auto xj = pure_jumps({0.2, 0.5, 0.8}, {0.5, -0.2, 0.1});
  const double dd = solve_skeleton(F, u, xj, 1e-3)(1.0)[0];
  const double dd_err = std::abs(dd - 1.32);
  o.check(dd_err <= 4.0 * std::numeric_limits<double>::epsilon() * 1.32, "Doleans-Dade product to machine precision");

  const double res = residual(F, u, x, y, 1e-3);
  const double res_j = residual(F, u, xj, solve_skeleton(F, u, xj, 1e-3), 1e-3);
  o.check(res <= 1e-6 && res_j <= 1e-6, "residual <= 1e-6");
  o.detail << "|y(1) - e| = " << err << ", |product - 1.32| = " << dd_err << ", residuals " << res << ", " << res_j;
  return o;
}

Outcome characteristics_closed_forms() {
  Outcome o;
  bool exact_b = true, exact_c = true;
  for (double lam : {0.5, 1.0, 3.0}) {
    auto tr = LevyTriplet::make(1);
    tr.jumps.atoms.push_back({v1(2.0), lam});
    tr.diffusion(0, 0) = 0.7;
    const auto ch = characteristics(tr, 0.5, 1.0);
    for (double t : {0.0, 0.25, 1.0, 3.0}) {
      exact_b = exact_b && ch.B(t)[0] == 2.0 * lam * t;
      exact_c = exact_c && ch.C_over_eps(t)(0, 0) == t * 0.7;
    }
  }
  o.check(exact_b, "B_t = 2 lambda t exactly");
  o.check(exact_c, "C_t / eps = t Sigma exactly");
  auto tr = LevyTriplet::make(1);
  tr.jumps.atoms.push_back({v1(2.0), 1.5});
  const double ref = three_families(tr, 0.5, 1.0, 1.0, 1.0).exp_jump_integral;
  double worst = 0.0;
  for (double eps : {0.1, 0.02}) worst = std::max(worst, std::abs(three_families(tr, eps, 1.0, 1.0, 1.0).exp_jump_integral - ref));
  o.check(worst <= 1e-12, "v3 equal across eps to 1e-12");
  o.detail << "v3 = " << ref << ", max spread = " << worst;
  return o;
}

Outcome concentration_bound() {
  Outcome o;
  const auto t0 = Clock::now();
  std::size_t cells = 0, bad = 0;
  double worst_ratio = 0.0;
  JumpMeasure sym;
  sym.atoms.push_back({v1(0.1), 5.0});
  sym.atoms.push_back({v1(-0.1), 5.0});
  JumpMeasure skew;
  skew.atoms.push_back({v1(1.0), 2.0});
  skew.atoms.push_back({v1(-0.5), 1.0});
  struct Setup {
    const JumpMeasure* nu;
    double eps;
  };
  for (const auto& s : {Setup{&sym, 1.0}, Setup{&skew, 0.5}, Setup{&skew, 0.2}}) {
    const auto rows =
        pure_disc_bound_check(*s.nu, s.eps, 1.0, default_bound_a_grid(), default_bound_b_grid(), 100000, 2024);
    for (const auto& r : rows) {
      ++cells;
      bad += r.ok ? 0 : 1;
      if (r.bound > 0) worst_ratio = std::max(worst_ratio, r.empirical / r.bound);
    }
  }
  o.check(bad == 0, "empirical <= bound + 3 sigma in every cell");
  const double secs = seconds_since(t0);
  o.check(secs < 60.0, "runtime < 1 min");
  o.detail << cells << " cells, " << bad << " violations, max empirical/bound = " << worst_ratio << ", " << secs
           << " s";
  return o;
}

Outcome modulus_oracle() {
  Outcome o;
  std::mt19937_64 rng(7);
  const auto grid = oracle::uniform_grid(1.0, 100);
  const double rhos[] = {0.05, 0.1, 0.2, 0.3};
  int mismatches = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto p = oracle::random_grid_path(rng, 1 + rep % 2, 6);
    const double rho = rhos[rep % 4];
    const double w = skorokhod_modulus(p, 1.0, rho, 101).value;
    const double b = oracle::brute_modulus(p, grid, rho);
    worst = std::max(worst, std::abs(w - b));
    if (std::abs(w - b) > 1e-12) ++mismatches;
  }
  o.check(mismatches == 0, "modulus equals brute force on all 200 paths");
  o.detail << "200 paths, " << mismatches << " mismatches, max |diff| = " << worst;
  return o;
}

Outcome property_suites() {
  Outcome o;
  // refinement monotonicity of the optimizer
  {
    const auto model = RateModel::brownian(m1(1.0), 1.0, 1.0);
    const auto F = fields::tanh_scaled(m1(1.0), 1.0, 0.5);
    double last = kInfinity;
    bool ok = true;
    for (std::size_t m : {2u, 4u, 8u, 16u}) {
      const double r = minimize_endpoint(model, F, CadlagPath::zero(1, 1.0), terminal_event(0.8), ControlGrid{m}).rate;
      ok = ok && r <= last + 1e-3;
      last = r;
    }
    o.check(ok, "refinement monotonicity");
  }
  // grid-Cauchy: successive halvings shrink the sup difference
  {
    const auto F = fields::tanh_scaled(m1(1.0), 1.0, 0.5);
    const auto x = PathBuilder(v1(0.0)).linear_to(0.3, v1(1.5)).jump_by(v1(-0.4)).linear_to(1.0, v1(2.0)).build();
    const auto u = CadlagPath::line(v1(0.3), v1(-0.4), 1.0);
    auto sup_diff = [](const CadlagPath& a, const CadlagPath& b) {
      double m = 0.0;
      for (int k = 0; k <= 1000; ++k) m = std::max(m, (a(k / 1000.0) - b(k / 1000.0)).norm());
      return m;
    };
    bool ok = true;
    for (auto solver : {&solve_skeleton, &solve_sde}) {
      double last = kInfinity;
      for (double step : {0.05, 0.025, 0.0125, 0.00625}) {
        const double d = sup_diff((*solver)(F, u, x, step), (*solver)(F, u, x, step / 2));
        ok = ok && d < last;
        last = d;
      }
    }
    o.check(ok, "grid-Cauchy of solvers");
  }
  // truncation_split reassembly
  {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      const auto p = oracle::random_grid_path(rng, 1 + rep % 2, 6);
      const auto sp = truncation_split(p, 0.2 + 2.0 * unif(rng));
      for (int k = 0; k < 100; ++k) {
        const double t = unif(rng);
        worst = std::max(worst, (sp.large_jumps(t) + sp.remainder(t) - p(t)).norm());
      }
    }
    o.check(worst <= 1e-12, "truncation_split reassembly");
  }
  // |dY| <= |dU| + C_F |dX|
  {
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
    const auto ub = PathBuilder(Vector::Zero(2)).linear_to(0.45, Vector::Ones(2)).jump_by(-a).hold_to(1.0).build();
    bool ok = true;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto x = simulate(tr, 0.5, 1.0, 0.02, seed);
      for (const auto& y : {solve_sde(F, ub, x, 0.01), solve_skeleton(F, ub, x, 0.01)})
        for (std::size_t k = 1; k < y.size(); ++k) {
          const double t = y.time(k);
          const double du = (ub(t) - ub.left_limit(t)).norm();
          const double dx = (x(t) - x.left_limit(t)).norm();
          ok = ok && y.jump(k).norm() <= du + F.bound() * dx + 1e-12;
        }
    }
    o.check(ok, "jump-size bound");
  }
  // bitwise determinism
  {
    auto tr = brownian();
    tr.jumps.atoms.push_back({v1(0.5), 2.0});
    const auto p1 = simulate(tr, 0.2, 1.0, 0.01, 5), p2 = simulate(tr, 0.2, 1.0, 0.01, 5);
    bool ok = p1.times() == p2.times() && p1.raw_values() == p2.raw_values() &&
              p1.raw_left_values() == p2.raw_left_values();
    SamplingConfig one, four;
    one.sharding = {1000, 1};
    four.sharding = {1000, 4};
    const auto F = fields::tanh_scaled(m1(1.0), 1.0, 0.2);
    const auto u = CadlagPath::zero(1, 1.0);
    const auto c1 = rate_curve(tr, F, u, terminal(0.4), {0.2, 0.1}, 5000, 3, one);
    const auto c4 = rate_curve(tr, F, u, terminal(0.4), {0.2, 0.1}, 5000, 3, four);
    for (std::size_t i = 0; i < c1.entries.size(); ++i) ok = ok && c1.entries[i].hits == c4.entries[i].hits;
    o.check(ok, "bitwise determinism");
  }
  o.detail << "refinement, grid-Cauchy, truncation reassembly, jump bound, determinism";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion all[] = {
      {1, "Gaussian LDP baseline", gaussian_baseline},
      {2, "Monte Carlo vs normal tail", gaussian_monte_carlo},
      {3, "Poisson LDP baseline", poisson_baseline},
      {4, "skeleton solver oracles", skeleton_oracles},
      {5, "characteristics closed forms", characteristics_closed_forms},
      {6, "concentration bound", concentration_bound},
      {7, "modulus oracle", modulus_oracle},
      {8, "property suites", property_suites},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::printf("CRITERION %d %s: %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.str().c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of 8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
