// Acceptance suite. One PASS/FAIL line per criterion; exit status is the
// number of failed criteria (0 when everything holds).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "rppac/rppac.hpp"
#include "rppac/spectrum_check.hpp"
#include "test_support.hpp"

namespace {

using namespace rppac;
using rppac::testing::fig1;
using rppac::testing::index_init;

int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << id << ": " << title << "\n       " << detail
            << std::endl;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

DelaySchedule uniform(const Digraph& g, int tau, std::uint64_t seed) {
  DelaySpec spec;
  spec.kind = DelayKind::uniform_iid;
  spec.tau_bar = tau;
  spec.seed = seed;
  return make_schedule(spec, g);
}

void cross_oracle() {
  const Digraph g = fig1();
  double dx = 0.0, ds = 0.0;
  for (int tau : {0, 2, 5}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto delays = uniform(g, tau, seed);
      const auto d = max_difference(run_rppac(g, delays, 0.1, index_init(10), 300),
                                    run_matrix_form(g, delays, 0.1, index_init(10), 300));
      dx = std::max(dx, d.x);
      ds = std::max(ds, d.s);
    }
  }
  report(1, "node-level RPPAC equals augmented matrix form", dx < 1e-10 && ds < 1e-10,
         "max|dx|=" + sci(dx) + " max|ds|=" + sci(ds) + " (tol 1e-10; tau_bar 0,2,5; seeds 1-3; K=300)");
}

void convergence_and_conservation() {
  const Digraph g = fig1();
  const double limits[] = {1e-4, 1e-3, 1e-2};
  const int taus[] = {0, 2, 5};
  double err[3], smax[3];
  double drift = 0.0;
  bool ok = true;
  for (int i = 0; i < 3; ++i) {
    ScenarioConfig cfg;
    cfg.tau_bar = taus[i];
    cfg.seed = 1;
    cfg.runs = 100;
    cfg.iters = 300;
    const auto runs = simulate_runs(cfg, g);
    err[i] = mean_error_curve(runs).back();
    smax[i] = 0.0;
    for (const auto& t : runs) {
      smax[i] = std::max(smax[i], t.s.back().cwiseAbs().maxCoeff());
      drift = std::max(drift, conservation_drift(t));
    }
    ok = ok && err[i] < limits[i] && smax[i] < 1e-1;
  }
  ok = ok && err[0] <= err[1] && err[1] <= err[2];
  std::ostringstream d;
  for (int i = 0; i < 3; ++i) {
    d << "tau_bar=" << taus[i] << ": error(300)=" << sci(err[i]) << " (< " << sci(limits[i])
      << "), max|s(300)|=" << sci(smax[i]) << " (< 1e-1)";
    if (i < 2) d << "\n       ";
  }
  d << "\n       ordering error(0) <= error(2) <= error(5): "
    << (err[0] <= err[1] && err[1] <= err[2] ? "yes" : "no");
  report(2, "convergence to the exact average, 100 runs, gamma=0.1", ok, d.str());
  report(3, "mass conservation including in-flight surplus", drift < 1e-9,
         "max_k |sum x + sum s~ - sum x(0)| = " + sci(drift) + " over 300 runs (tol 1e-9)");
}

void stochasticity() {
  const Digraph g = fig1();
  std::mt19937_64 rng(4242);
  double worst = 0.0;
  bool layers = true;
  for (int tau : {2, 5}) {
    for (int i = 0; i < 1000; ++i) {
      const auto sm = build_snapshot_matrices(g, random_snapshot(g, tau, rng), 0.1);
      worst = std::max({worst, row_sum_error(sm.R_tilde), col_sum_error(sm.C_tilde)});
      layers = layers && single_push_layer_per_edge(g, sm);
    }
  }
  report(4, "augmented row/column stochasticity on 2x1000 snapshots", worst <= 1e-12 && layers,
         "max |sum - 1| = " + sci(worst) + " (tol 1e-12); one push layer per edge: " + (layers ? "yes" : "no"));
}

void appendix_algebra() {
  const Digraph g = fig1();
  double m1 = 0.0, union_gap = 0.0, rho_e = 0.0, rho_r_dev = 0.0;
  for (int tau : {2, 5}) {
    for (int w = 0; w < 20; ++w) {
      const auto delays = uniform(g, tau, 100 + static_cast<std::uint64_t>(w));
      const long k_start = 7L * w;
      const auto sm = build_snapshot_matrices(g, snapshot_at(delays, k_start + 1), 0.1);
      const auto M1 = split_M0_M1(sm).M1;
      m1 = std::max(m1, (M1 * M1).cwiseAbs().maxCoeff());
      union_gap = std::max(union_gap, spectrum_union_mismatch(sm));
      const auto words = word_products(g, delays, 0.1, k_start, tau + 1);
      rho_e = std::max(rho_e, eigen_moduli(words.E_bar).spectral_radius());
      rho_r_dev = std::max(rho_r_dev, std::abs(eigen_moduli(words.R_bar).spectral_radius() - 1.0));
    }
  }
  const bool ok = m1 == 0.0 && union_gap < 1e-8 && rho_e < 1.0 && rho_r_dev <= 1e-9;
  report(5, "M1^2 = 0, block spectrum of M0, beta-length word radii", ok,
         "max|M1^2|=" + sci(m1) + " (exact 0); spectrum mismatch=" + sci(union_gap) +
             " (tol 1e-8)\n       max rho(E_bar)=" + sci(rho_e) + " (< 1); max |rho(R_bar) - 1|=" +
             sci(rho_r_dev) + " (tol 1e-9); 20 windows at tau_bar 2 and 5");
}

void delay_free_reduction() {
  double worst = 0.0;
  {
    const Digraph g = fig1();
    const auto d = max_difference(run_rppac(g, make_schedule(DelaySpec{}, g), 0.1, index_init(10), 300),
                                  run_ppac(g, 0.1, index_init(10), 300));
    worst = std::max({worst, d.x, d.s});
  }
  std::mt19937_64 rng(606);
  for (int i = 0; i < 20; ++i) {
    const Digraph g = rppac::testing::random_strongly_connected(2 + i % 7, 0.3, rng);
    const double gamma = 0.5 * gamma_upper_bound(g);
    Eigen::VectorXd x0(g.size());
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int j = 0; j < g.size(); ++j) x0[j] = u(rng);
    const auto d = max_difference(run_rppac(g, make_schedule(DelaySpec{}, g), gamma, x0, 300),
                                  run_ppac(g, gamma, x0, 300));
    worst = std::max({worst, d.x, d.s});
  }
  report(6, "zero-delay RPPAC reduces to PPAC", worst < 1e-12,
         "max difference=" + sci(worst) + " (tol 1e-12; fig1 + 20 random strongly connected graphs, n<=8)");
}

void spectral_trends() {
  const Digraph g = fig1();
  const auto by_delay = mean_gap_vs_delay(g, 0.1, {0, 2, 5}, 100, 77);
  const bool delay_order = by_delay[0].second > by_delay[1].second && by_delay[1].second > by_delay[2].second;
  const auto by_gamma = sweep_gamma(g, 0, {0.01, 0.1}, 1, 77);
  const bool gamma_order = by_gamma[1].second > by_gamma[0].second;

  bool simple = true;
  std::ostringstream lam;
  for (double gamma : {0.05, 0.1, 0.2, 0.3}) {
    const auto sm = build_snapshot_matrices(g, snapshot_at(make_schedule(DelaySpec{}, g), 0), gamma);
    const auto spec = eigen_moduli(assemble_M(sm));
    const bool ok = std::abs(spec.moduli[0] - 1.0) < 1e-9 && spec.moduli[1] < 1.0 - 1e-6;
    simple = simple && ok;
    lam << " gamma=" << gamma << ":|l2|=" << sci(spec.moduli[1]);
  }
  report(7, "spectral-gap trends", delay_order && gamma_order && simple,
         "mean gap tau_bar 0/2/5 = " + sci(by_delay[0].second) + " / " + sci(by_delay[1].second) + " / " +
             sci(by_delay[2].second) + "\n       gap(tau_bar=0) gamma 0.01 / 0.1 = " + sci(by_gamma[0].second) +
             " / " + sci(by_gamma[1].second) + "\n       simple unit eigenvalue:" + lam.str());
}

void gamma_ordering() {
  const Digraph g = fig1();
  double err[3];
  const double gammas[] = {0.01, 0.1, 0.3};
  for (int i = 0; i < 3; ++i) {
    ScenarioConfig cfg;
    cfg.tau_bar = 2;
    cfg.seed = 1;
    cfg.runs = 100;
    cfg.iters = 300;
    cfg.gamma = gammas[i];
    err[i] = monte_carlo(cfg, g).back();
  }
  report(8, "gamma=0.1 beats 0.01 and 0.3 at tau_bar=2", err[1] < err[0] && err[1] < err[2],
         "error(300) for gamma 0.01 / 0.1 / 0.3 = " + sci(err[0]) + " / " + sci(err[1]) + " / " + sci(err[2]));
}

void hand_traces() {
  const Digraph g = rppac::testing::two_node();
  const Eigen::Vector2d x0(0.0, 2.0);
  const auto sym = run_rppac(g, make_schedule(DelaySpec{}, g), 0.1, x0, 2);

  DelaySpec lag;
  lag.kind = DelayKind::constant;
  lag.tau_bar = 1;
  lag.per_link_bounds[{1, 0}] = 0;
  const auto delayed = run_rppac(g, make_schedule(lag, g), 0.1, x0, 2);

  double dev = 0.0;
  auto cmp = [&](double got, double want) { dev = std::max(dev, std::abs(got - want)); };
  cmp(sym.x[1][0], 1.0), cmp(sym.x[1][1], 1.0), cmp(sym.s[1][0], -1.0), cmp(sym.s[1][1], 1.0);
  cmp(sym.x[2][0], 0.9), cmp(sym.x[2][1], 1.1), cmp(sym.s[2][0], 0.1), cmp(sym.s[2][1], -0.1);
  cmp(delayed.x[1][0], 0.0), cmp(delayed.x[1][1], 1.0), cmp(delayed.s[1][0], 0.0), cmp(delayed.s[1][1], 1.0);
  cmp(delayed.x[2][0], 1.0), cmp(delayed.x[2][1], 0.6), cmp(delayed.s[2][0], -1.0), cmp(delayed.s[2][1], 0.9);
  cmp(delayed.inflight_surplus[2], 0.5);
  report(9, "two-node hand traces", dev <= 1e-12, "max deviation=" + sci(dev) + " (tol 1e-12)");
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  cross_oracle();
  convergence_and_conservation();
  stochasticity();
  appendix_algebra();
  delay_free_reduction();
  spectral_trends();
  gamma_ordering();
  hand_traces();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << " in "
            << sci(secs) << " s" << std::endl;
  return failures;
}
