#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "corrstruct/core.hpp"
#include "corrstruct/spectral.hpp"

namespace corrstruct {

struct MaceConfig {
  int max_iters = 500;
  double rel_tol = 1e-9;  // relative change of the objective
  std::uint64_t seed = 0;
  int k = 1;
  int reorthogonalize_every = 1;

  void validate() const {
    if (max_iters < 1) throw DomainError("max_iters must be >= 1");
    if (!(rel_tol > 0)) throw DomainError("rel_tol must be positive");
    if (k < 1) throw DomainError("k must be >= 1");
    if (reorthogonalize_every < 1) throw DomainError("reorthogonalize_every must be >= 1");
  }
};

struct MaceTrace {
  std::vector<double> objective;
  bool converged = false;
  int iters_used = 0;
};

/// One power step expressed on functions: f_i <- f_i + E[sum_{j!=i} f_j | X_i],
/// applied column-wise. Zero-mean inputs stay zero-mean.
FeatureSet conditional_expectation_step(const FeatureSet& fs, const DistributionSet& dist);

/// Scales each column so sum_i E[f_i^2] = 1. Zero-norm columns raise
/// NumericalError (degenerate initialization; caller re-seeds).
FeatureSet normalize(const FeatureSet& fs, const DistributionSet& dist);

/// Power iteration toward the second eigenvector of B (k = 1).
std::pair<FeatureSet, MaceTrace> mace_fit(const DistributionSet& dist, const MaceConfig& cfg);

/// Sequential top-k with Gram-Schmidt deflation under <f,g> = sum_i E[f_i g_i].
std::pair<FeatureSet, std::vector<MaceTrace>> mace_fit_k(const DistributionSet& dist,
                                                         const MaceConfig& cfg);

/// E[sum_{i != j} f_i^(l) f_j^(l)] per column, from the pairwise tables.
Eigen::VectorXd joint_correlation(const FeatureSet& fs, const DistributionSet& dist);

/// rho* = (lambda^(1) - 1)/(d - 1), via the dense spectral identity.
double generalized_maximal_correlation(const DistributionSet& dist);

/// Second singular value of B_12 for a two-variable distribution.
double hgr_maximal_correlation(const DistributionSet& dist);

}  // namespace corrstruct
