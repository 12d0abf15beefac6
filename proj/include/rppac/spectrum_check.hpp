#pragma once

// Spectrum comparison for the block-triangular split M0 = [[R~, 0], [J, C~ - H]].
//
// The buffer shift registers give R~ a defective zero eigenvalue whose Jordan
// chains reach length 15-20 on the sample graph at tau_bar = 5. A chain of
// length m is resolved only to about eps^(1/m), so double precision smears the
// zero cluster out to ~1e-1 and even 100 digits leave it near 1e-6. The
// eigenvalues are therefore computed in 200-digit binary floating point.

#include <algorithm>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

#include "rppac/augmented.hpp"

namespace rppac {

using WideReal = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>,
                                               boost::multiprecision::et_off>;

inline std::vector<std::complex<double>> wide_eigenvalues(const Eigen::MatrixXd& A) {
  using WideMatrix = Eigen::Matrix<WideReal, Eigen::Dynamic, Eigen::Dynamic>;
  const WideMatrix wide = A.cast<WideReal>();
  Eigen::EigenSolver<WideMatrix> solver;
  solver.setMaxIterations(400 * std::max<Eigen::Index>(A.rows(), 1));
  solver.compute(wide, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("wide eigenvalue iteration did not converge");
  const auto& ev = solver.eigenvalues();
  std::vector<std::complex<double>> out;
  out.reserve(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    out.emplace_back(static_cast<double>(ev[i].real()), static_cast<double>(ev[i].imag()));
  }
  return out;
}

/// Largest distance in a nearest-neighbour matching of the two multisets.
/// Returns +inf when the sizes differ.
inline double match_eigenvalues(const std::vector<std::complex<double>>& a,
                                std::vector<std::complex<double>> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& z : a) {
    auto best = std::min_element(b.begin(), b.end(), [&](const auto& p, const auto& q) {
      return std::abs(z - p) < std::abs(z - q);
    });
    worst = std::max(worst, std::abs(z - *best));
    b.erase(best);
  }
  return worst;
}

/// Distance between sigma(M0) and sigma(R~) U sigma(C~ - H).
inline double spectrum_union_mismatch(const SystemMatrices& sm) {
  const auto M0 = split_M0_M1(sm).M0;
  auto blocks = wide_eigenvalues(sm.R_tilde);
  const auto lower = wide_eigenvalues(sm.C_tilde - sm.H);
  blocks.insert(blocks.end(), lower.begin(), lower.end());
  return match_eigenvalues(wide_eigenvalues(M0), std::move(blocks));
}

}  // namespace rppac
