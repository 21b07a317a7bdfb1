#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "corrstruct/errors.hpp"

namespace corrstruct {

/// Ordered list of distinct symbol strings for one variable.
/// index(symbol(i)) == i for all i in [0, size).
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> symbols);

  int size() const { return static_cast<int>(symbols_.size()); }
  const std::string& symbol(int idx) const;
  int index(const std::string& sym) const;  // throws DomainError if unknown
  std::optional<int> find(const std::string& sym) const;
  const std::vector<std::string>& symbols() const { return symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

/// n samples of d variables, each value an index into that variable's alphabet.
class DiscreteDataset {
 public:
  DiscreteDataset(std::vector<Alphabet> alphabets,
                  std::vector<std::string> variable_names,
                  std::vector<int> samples_flat);

  int n() const { return n_; }
  int d() const { return static_cast<int>(alphabets_.size()); }
  int value(int row, int var) const { return samples_[static_cast<std::size_t>(row) * d() + var]; }
  std::span<const int> row(int r) const {
    return {samples_.data() + static_cast<std::size_t>(r) * d(), static_cast<std::size_t>(d())};
  }
  const Alphabet& alphabet(int i) const { return alphabets_[i]; }
  const std::vector<Alphabet>& alphabets() const { return alphabets_; }
  const std::vector<std::string>& variable_names() const { return names_; }

 private:
  std::vector<Alphabet> alphabets_;
  std::vector<std::string> names_;
  std::vector<int> samples_;
  int n_ = 0;
};

struct CsvOptions {
  char delimiter = ',';
  bool header = true;
};

DiscreteDataset load_csv(const std::string& path, const CsvOptions& opts = {});
DiscreteDataset parse_csv(const std::string& text, const CsvOptions& opts = {},
                          const std::string& origin = "<string>");
void write_csv(const DiscreteDataset& ds, const std::string& path, char delimiter = ',');

/// Probability table over the product space X_1 x ... x X_d, stored flat
/// with the last variable's index moving fastest.
class FullJoint {
 public:
  FullJoint(std::vector<int> dims, Eigen::VectorXd probs);

  const std::vector<int>& dims() const { return dims_; }
  int d() const { return static_cast<int>(dims_.size()); }
  std::size_t cells() const { return static_cast<std::size_t>(p_.size()); }
  const Eigen::VectorXd& probs() const { return p_; }
  Eigen::VectorXd& probs() { return p_; }

  std::size_t flat_index(std::span<const int> idx) const;
  void unflatten(std::size_t flat, std::span<int> idx_out) const;
  double at(std::span<const int> idx) const { return p_[flat_index(idx)]; }

  Eigen::VectorXd marginal(int i) const;
  Eigen::MatrixXd pair_marginal(int i, int j) const;  // i != j, |X_i| x |X_j|

 private:
  std::vector<int> dims_;
  Eigen::VectorXd p_;
};

constexpr std::size_t kDefaultJointCellCap = 10'000'000;

/// Marginals and pairwise joints of d discrete variables, plus an optional
/// full joint for small instances. Immutable after construction.
class DistributionSet {
 public:
  int d() const { return static_cast<int>(alphabets_.size()); }
  const std::vector<Alphabet>& alphabets() const { return alphabets_; }
  const Alphabet& alphabet(int i) const { return alphabets_[i]; }
  std::vector<int> dims() const;

  const Eigen::VectorXd& marginal(int i) const { return marginals_[i]; }
  /// P_{X_i X_j} as an |X_i| x |X_j| table. pairwise(i,i) is diagonal with
  /// the marginal on the diagonal; pairwise(j,i) is the transpose.
  Eigen::MatrixXd pairwise(int i, int j) const;

  bool has_full_joint() const { return full_joint_.has_value(); }
  const FullJoint& full_joint() const;

  long sample_count() const { return n_; }
  double smoothing_alpha() const { return alpha_; }

  /// Maximum-likelihood counting estimates (optionally add-alpha smoothed at
  /// the full-joint cell level so all consistency invariants stay exact).
  static DistributionSet estimate(const DiscreteDataset& ds, bool with_full_joint,
                                  double alpha = 0.0,
                                  std::size_t cell_cap = kDefaultJointCellCap);
  /// Exact marginalization of a given full joint (small-instance oracle path).
  static DistributionSet from_joint(std::vector<Alphabet> alphabets, FullJoint joint);

  /// d=2 view of variables (i, j); full joint of the pair is materialized.
  DistributionSet restrict_pair(int i, int j) const;

  /// Checks every DistributionSet invariant, throwing DomainError on violation.
  void validate(double tol = 1e-12) const;

 private:
  DistributionSet() = default;
  std::vector<Alphabet> alphabets_;
  std::vector<Eigen::VectorXd> marginals_;
  std::vector<Eigen::MatrixXd> upper_;  // tables for i<j, row-major over pairs
  std::optional<FullJoint> full_joint_;
  long n_ = 0;
  double alpha_ = 0.0;

  int upper_index(int i, int j) const;  // requires i<j
};

DistributionSet estimate_distributions(const DiscreteDataset& ds, bool with_full_joint,
                                       double alpha = 0.0,
                                       std::size_t cell_cap = kDefaultJointCellCap);

}  // namespace corrstruct
