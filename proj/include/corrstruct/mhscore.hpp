#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "corrstruct/core.hpp"
#include "corrstruct/spectral.hpp"

namespace corrstruct {

struct HTrainConfig {
  int k = 1;
  int steps = 5000;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  double init_scale = 0.1;

  void validate() const {
    if (k < 1) throw DomainError("k must be >= 1");
    if (steps < 1) throw DomainError("steps must be >= 1");
    if (!(learning_rate > 0)) throw DomainError("learning_rate must be positive");
  }
};

/// Pairwise score E[f_i^T f_j] - E[f_i]^T E[f_j] - (1/2) tr(E[f_i f_i^T] E[f_j f_j^T]);
/// the i = j case uses the diagonal pairwise table.
double h_score_pair(const DistributionSet& dist, int i, int j, const Eigen::MatrixXd& fi,
                    const Eigen::MatrixXd& fj);

/// Double sum over all (i, j) ordered pairs, i = j included.
double mh_score(const std::vector<Eigen::MatrixXd>& tables, const DistributionSet& dist);

/// Residual of the low-rank identity | ||Bt - Psi Psi^T||_F^2 - (||Bt||_F^2 - 2H) |
/// with Psi_i rows sqrt(P_i(x)) f_i(x)^T.
double check_mh_identity(const std::vector<Eigen::MatrixXd>& tables, const DistributionSet& dist);

/// Analytic gradient of mh_score with respect to every table entry.
std::vector<Eigen::MatrixXd> mh_score_gradient(const std::vector<Eigen::MatrixXd>& tables,
                                               const DistributionSet& dist);

struct MhTrainResult {
  std::vector<Eigen::MatrixXd> tables;
  std::vector<double> score_curve;  // one entry per step
};

/// Plain gradient ascent on the MH-score over dense per-symbol tables.
MhTrainResult mh_train(const DistributionSet& dist, const HTrainConfig& cfg);

/// Center, whiten by the inverse square root of sum_i E[f_i f_i^T], then rotate
/// to the principal axes of the joint-correlation matrix (descending), restoring
/// the FeatureSet normalization for subspace and per-column comparisons.
FeatureSet whiten_features(const std::vector<Eigen::MatrixXd>& tables,
                           const DistributionSet& dist);

}  // namespace corrstruct
