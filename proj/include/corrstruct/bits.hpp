#pragma once

#include <string>
#include <vector>

#include "corrstruct/core.hpp"
#include "corrstruct/spectral.hpp"

namespace corrstruct {

/// Variables built from subsets of r independent uniform +/-1 bits:
/// X_i observes the bits indexed by index_sets[i] (1-based bit ids).
struct BitsInstance {
  int r = 0;
  std::vector<std::vector<int>> index_sets;  // each sorted ascending, non-empty

  int d() const { return static_cast<int>(index_sets.size()); }
  void validate() const;  // throws DomainError / CapacityError
};

BitsInstance parse_bits_sets(int r, const std::string& sets_spec);  // "1,2;2,3;1,3"

/// Exact distribution: uniform over the 2^r bit patterns, each X_i a
/// deterministic projection. Alphabets are the bit-value tuples in ascending
/// bit order, symbols like "+-" enumerated with the first bit slowest.
DistributionSet bits_joint(const BitsInstance& inst);

/// Inclusion count w(J) over a subset J of bit ids.
int bits_weight(const BitsInstance& inst, const std::vector<int>& subset);

/// All 2^r subsets in the canonical order: w descending, then size ascending,
/// then lexicographic. Element 0 is the empty set with w = d.
std::vector<std::vector<int>> bits_subsets_ordered(const BitsInstance& inst);

/// Analytic eigenvalues of B: the positive w values sorted descending, padded
/// with zeros to length m = sum_i 2^{|I_i|}.
Eigen::VectorXd bits_spectrum(const BitsInstance& inst);

/// Analytic feature column for subset index ell >= 1 in the canonical order.
/// Requires w(J_ell) > 0.
FeatureSet bits_features(const BitsInstance& inst, int ell);

}  // namespace corrstruct
