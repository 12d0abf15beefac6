#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rppac/augmented.hpp"
#include "rppac/digraph.hpp"

namespace rppac {

struct SpectrumSummary {
  std::vector<double> moduli;  ///< descending
  double gap = 0.0;            ///< |lambda_1| - |lambda_2|, 0 for a 1x1 input

  double spectral_radius() const { return moduli.empty() ? 0.0 : moduli.front(); }
};

/// Differences below this are reported as an exact tie.
inline constexpr double kGapTieTolerance = 1e-12;

inline SpectrumSummary eigen_moduli(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("eigen_moduli needs a square matrix");
  SpectrumSummary out;
  if (A.rows() == 0) return out;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(A, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigenvalue iteration did not converge");
  const auto& ev = solver.eigenvalues();
  out.moduli.reserve(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) out.moduli.push_back(std::abs(ev[i]));
  std::sort(out.moduli.begin(), out.moduli.end(), std::greater<>());
  if (out.moduli.size() >= 2) {
    const double diff = out.moduli[0] - out.moduli[1];
    out.gap = diff < kGapTieTolerance ? 0.0 : diff;
  }
  return out;
}

inline double spectral_gap_of(const Digraph& g, double gamma, const ArrivalSnapshot& snapshot) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  return eigen_moduli(assemble_M(build_snapshot_matrices(g, snapshot, gamma))).gap;
}

/// Gap of M(k) realised by a delay schedule at step k.
inline double spectral_gap_of(const Digraph& g, double gamma, const DelaySchedule& delays, long k) {
  return spectral_gap_of(g, gamma, snapshot_at(delays, k));
}

/// Gaps of `samples` independent random snapshots. With tau_bar = 0 there is
/// only one possible snapshot, so a single matrix is evaluated.
inline std::vector<double> sample_spectral_gaps(const Digraph& g, double gamma, int tau_bar, int samples,
                                                std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  std::mt19937_64 rng(seed);
  const int draws = tau_bar == 0 ? 1 : samples;
  std::vector<double> gaps;
  gaps.reserve(static_cast<std::size_t>(draws));
  for (int i = 0; i < draws; ++i) gaps.push_back(spectral_gap_of(g, gamma, random_snapshot(g, tau_bar, rng)));
  return gaps;
}

inline double mean_spectral_gap(const Digraph& g, double gamma, int tau_bar, int samples,
                                std::uint64_t seed) {
  const auto gaps = sample_spectral_gaps(g, gamma, tau_bar, samples, seed);
  double total = 0.0;
  for (double v : gaps) total += v;
  return total / static_cast<double>(gaps.size());
}

/// (gamma, mean gap). Every gamma sees the same snapshot stream.
inline std::vector<std::pair<double, double>> sweep_gamma(const Digraph& g, int tau_bar,
                                                          const std::vector<double>& gammas,
                                                          int samples, std::uint64_t seed) {
  std::vector<std::pair<double, double>> table;
  table.reserve(gammas.size());
  for (double gamma : gammas) table.emplace_back(gamma, mean_spectral_gap(g, gamma, tau_bar, samples, seed));
  return table;
}

/// (tau_bar, mean gap) at fixed gamma.
inline std::vector<std::pair<int, double>> mean_gap_vs_delay(const Digraph& g, double gamma,
                                                             const std::vector<int>& tau_bars,
                                                             int samples, std::uint64_t seed) {
  std::vector<std::pair<int, double>> table;
  table.reserve(tau_bars.size());
  for (int tau : tau_bars) table.emplace_back(tau, mean_spectral_gap(g, gamma, tau, samples, seed));
  return table;
}

/// Conservative surplus-gain bound: the smallest push weight.
inline double gamma_upper_bound(const Digraph& g) { return min_push_weight(build_push_weights(g)); }

}  // namespace rppac
