#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "corrstruct/core.hpp"

namespace corrstruct {

/// Block matrix over the stacked per-variable coordinate spaces. Off-diagonal
/// blocks carry the normalized pairwise joints; the diagonal is identity for
/// variant B and I - v_i v_i^T after the rank-one removal for variant BTilde.
struct BMatrix {
  enum class Variant { B, BTilde };

  std::vector<int> dims;
  std::vector<int> offsets;  // size d+1, offsets[d] == m
  int m = 0;
  Variant variant = Variant::B;
  Eigen::MatrixXd dense;

  int d() const { return static_cast<int>(dims.size()); }
  Eigen::Block<const Eigen::MatrixXd> block(int i, int j) const {
    return dense.block(offsets[i], offsets[j], dims[i], dims[j]);
  }
};

struct Spectrum {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns, deterministic signs
  std::vector<int> dims;
  std::vector<int> offsets;

  int m() const { return static_cast<int>(eigenvalues.size()); }
  /// Subvector psi_i of eigenvector ell.
  Eigen::VectorXd subvector(int ell, int i) const {
    return eigenvectors.col(ell).segment(offsets[i], dims[i]);
  }
};

/// k score functions per variable, stored as |X_i| x k lookup tables.
struct FeatureSet {
  int k = 0;
  std::vector<Eigen::MatrixXd> tables;
  std::optional<Eigen::VectorXd> eigenvalues_hint;

  int d() const { return static_cast<int>(tables.size()); }
};

constexpr int kDefaultDenseCap = 4000;

BMatrix build_b(const DistributionSet& dist);
BMatrix build_b_tilde(const BMatrix& b, const DistributionSet& dist);

/// Full symmetric eigendecomposition, eigenvalues descending. Sign convention:
/// the entry of largest absolute value in each eigenvector is positive, ties
/// broken by lowest index.
Spectrum eigendecompose(const BMatrix& b, int dense_cap = kDefaultDenseCap);

struct Lemma1Report {
  struct Check {
    std::string name;
    bool pass = false;
    double residual = 0.0;
    std::string note;
  };
  std::vector<Check> checks;
  bool degenerate_kernel = false;  // more numerical zeros than the d-1 guaranteed ones

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

Lemma1Report check_lemma1(const BMatrix& b, const Spectrum& spec, const DistributionSet& dist);

/// f_i^(l)(x_i) = psi_i^(l)(x_i) / sqrt(P_{X_i}(x_i)) for l = 1..k; the top
/// eigenvector psi^(0) is skipped.
FeatureSet features_from_spectrum(const Spectrum& spec, const DistributionSet& dist, int k);

/// Joint second-moment matrix Sigma_i E[f_i f_i^T] (k x k).
Eigen::MatrixXd feature_gram(const FeatureSet& fs, const DistributionSet& dist);
/// Per-column means E[f_i^(l)] stacked as d x k.
Eigen::MatrixXd feature_means(const FeatureSet& fs, const DistributionSet& dist);
/// Stacks sqrt(P_i(x_i)) * f_i(x_i) into the m x k matrix Psi.
Eigen::MatrixXd features_to_psi(const FeatureSet& fs, const DistributionSet& dist);

/// Frobenius distance between the orthogonal projectors onto the column spans.
double projector_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace corrstruct
