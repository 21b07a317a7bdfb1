#pragma once

#include <string>
#include <vector>

#include "corrstruct/core.hpp"
#include "corrstruct/spectral.hpp"

namespace corrstruct {

/// Joint distribution P_{U^k X^d} over k binary attributes and the d data
/// variables, stored flat with the attribute indices slow and data indices
/// fast (last index fastest within each group).
struct JointWithAttribute {
  std::vector<int> u_dims;
  std::vector<Eigen::VectorXd> p_u;      // attribute marginals used in the construction
  std::vector<int> x_dims;
  Eigen::VectorXd joint;
  double delta = 0.0;
  std::vector<Eigen::VectorXd> h;        // h_l over U_l, zero-mean unit-variance
  Eigen::MatrixXd q;                     // k0 x k0 orthogonal mixing matrix

  int k() const { return static_cast<int>(u_dims.size()); }
  long u_cells() const;
  long x_cells() const;

  Eigen::MatrixXd marginal_u_xi(int i) const;    // |U^k| x |X_i|
  Eigen::MatrixXd marginal_ul_xd(int ell) const; // |U_l| x |X^d|
  Eigen::MatrixXd marginal_uk_xd() const;        // |U^k| x |X^d|
  Eigen::VectorXd marginal_xd() const;

  void validate(double tol = 1e-9) const;
};

/// Total correlation D(P_{X^d} || prod_i P_{X_i}) in nats.
double total_correlation(const FullJoint& joint);
double total_correlation(const DistributionSet& dist);

/// L = sum_i I(U^k; X_i) - sum_l I(U_l; X^d), exactly from the joint table.
double correlation_reduction(const JointWithAttribute& jwa);
/// Same quantity through the divergence route
/// C(X^d) - E_{u^k}[ C(X^d | U^k = u^k) ]; used as the independent cross-check.
double correlation_reduction_divergence(const JointWithAttribute& jwa);

/// Exponential embedding of a single binary attribute along the top feature
/// direction. h must be zero-mean unit-variance over the uniform binary U.
JointWithAttribute build_embedding(const DistributionSet& dist, const Spectrum& spec,
                                   double delta, const Eigen::Vector2d& h = {1.0, -1.0});

/// k mutually independent uniform binary attributes tilted along the top k0
/// feature directions mixed by the orthogonal q (k0 = min(k, k*), with
/// k* the number of eigenvalues above 1). Attributes past k0 stay independent
/// of the data variables.
JointWithAttribute build_embedding_k(const DistributionSet& dist, const Spectrum& spec,
                                     double delta, int k,
                                     const std::vector<Eigen::Vector2d>& h_list = {},
                                     const Eigen::MatrixXd& q = Eigen::MatrixXd());

int count_informative_attributes(const Spectrum& spec);  // k*

struct TheoremReport {
  struct Row {
    double delta;
    double L;
    double L_over_delta;
    double target;
    double gap;  // relative when the target is nonzero
  };
  int k = 0;
  double target = 0.0;
  std::vector<Row> rows;
  bool pass = false;
  std::string note;
};

/// Builds the embedding at each delta (descending grid), reports the
/// convergence of L/delta toward the small-delta optimum.
TheoremReport verify_theorem(const DistributionSet& dist, int k,
                             const std::vector<double>& delta_grid = {1e-2, 1e-3, 1e-4});

}  // namespace corrstruct
