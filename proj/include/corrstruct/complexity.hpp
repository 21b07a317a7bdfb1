#pragma once

#include <cstdint>
#include <vector>

#include "corrstruct/core.hpp"
#include "corrstruct/spectral.hpp"

namespace corrstruct {

/// Linear map from the pairwise perturbation vector xi_{X_iX_j} to vec(Xi_ij),
/// both in column-major order with the X_i index fastest. The i = j case uses
/// the diagonal pairwise table.
Eigen::MatrixXd build_L(const DistributionSet& dist, int i, int j);

/// Normalized quadruple-distribution block with rows indexed by (x_i, x'_j)
/// and columns by (x_s, x'_t), zero where either pair probability vanishes.
/// Needs the full joint.
Eigen::MatrixXd build_quadruple(const DistributionSet& dist, int i, int j, int s, int t);

/// m^2 x m^2 block matrix J with blocks L_ij B_{ij;st} L_st^T, pair blocks
/// ordered with the first index fastest: (1,1), (2,1), ..., (d,d).
Eigen::MatrixXd build_J(const DistributionSet& dist);

/// m^2 x |X^d| factor with J0 J0^T = J.
Eigen::MatrixXd build_J0(const DistributionSet& dist);

/// Tracy-Singh stacking of two partitioned vectors: blocks kron(a_t, b_s)
/// ordered with s fastest.
Eigen::VectorXd tracy_singh(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            const std::vector<int>& dims);

/// Eigengap-weighted sum of Tracy-Singh outer products over the top-k /
/// trailing split of the BTilde spectrum. Throws NumericalError when the gap
/// condition fails.
Eigen::MatrixXd build_Gk(const Spectrum& btilde_spec, int k, double gap_tol = 1e-9);

struct ExponentResult {
  int k = 0;
  double alpha_k = 0.0;
  double exponent = 0.0;  // 1 / (2 alpha_k); +inf when alpha_k ~ 0
  bool gap_ok = false;
};

ExponentResult error_exponent(const DistributionSet& dist, int k);

/// Independent route for alpha_k: the spectral norm of J0^T G_k J0.
double alpha_via_j0(const DistributionSet& dist, int k);

/// Empirical BTilde from possibly-degenerate empirical marginals and pairwise
/// tables (entries with vanishing marginal mass are zeroed).
Eigen::MatrixXd empirical_b_tilde(const std::vector<Eigen::VectorXd>& marginals,
                                  const std::vector<std::vector<Eigen::MatrixXd>>& pairs);

struct ExceedanceCurve {
  std::vector<long> n_grid;
  std::vector<long> exceed_counts;
  std::vector<double> frequencies;
  int trials = 0;
  double eps = 0.0;
  double decay_rate = 0.0;  // least-squares slope of -log(freq) against n
  bool has_zero_frequency = false;

  void validate() const;
};

/// Repeatedly samples n-point datasets, measures the top-k trace loss of the
/// empirical spectrum on the true BTilde, and reports exceedance frequencies
/// of loss > eps^2 per grid point.
ExceedanceCurve monte_carlo_check(const DistributionSet& dist, int k,
                                  const std::vector<long>& n_grid, int trials, double eps,
                                  std::uint64_t seed = 0);

}  // namespace corrstruct
