#pragma once

#include <random>
#include <vector>

#include "corrstruct/core.hpp"

namespace corrstruct::testing {

inline Alphabet numbered_alphabet(int size, const std::string& prefix = "s") {
  std::vector<std::string> symbols;
  for (int i = 0; i < size; ++i) symbols.push_back(prefix + std::to_string(i));
  return Alphabet(symbols);
}

/// Doubly symmetric binary source: P(x, y) = (1-p)/2 on the diagonal, p/2 off.
inline DistributionSet dsbs(double p) {
  Eigen::VectorXd joint(4);
  joint << (1 - p) / 2, p / 2, p / 2, (1 - p) / 2;
  return DistributionSet::from_joint({numbered_alphabet(2), numbered_alphabet(2)},
                                     FullJoint({2, 2}, joint));
}

/// Product of the given marginals as a full joint.
inline DistributionSet product_distribution(const std::vector<Eigen::VectorXd>& marginals) {
  std::vector<int> dims;
  std::vector<Alphabet> alphabets;
  long cells = 1;
  for (const auto& m : marginals) {
    dims.push_back(static_cast<int>(m.size()));
    alphabets.push_back(numbered_alphabet(static_cast<int>(m.size())));
    cells *= m.size();
  }
  Eigen::VectorXd joint(cells);
  FullJoint shape(dims, Eigen::VectorXd::Zero(cells));
  std::vector<int> idx(dims.size());
  for (long f = 0; f < cells; ++f) {
    shape.unflatten(static_cast<std::size_t>(f), idx);
    double v = 1.0;
    for (std::size_t i = 0; i < dims.size(); ++i) v *= marginals[i][idx[i]];
    joint[f] = v;
  }
  return DistributionSet::from_joint(std::move(alphabets), FullJoint(dims, joint));
}

/// Dirichlet(1)-random full joint over the given dimensions, entries bounded
/// away from zero so every construction is well-conditioned.
inline DistributionSet random_joint(const std::vector<int>& dims, std::uint64_t seed,
                                    double floor = 1e-3) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  long cells = 1;
  for (int s : dims) cells *= s;
  Eigen::VectorXd joint(cells);
  for (long f = 0; f < cells; ++f) joint[f] = expo(rng) + floor;
  joint /= joint.sum();
  std::vector<Alphabet> alphabets;
  for (int s : dims) alphabets.push_back(numbered_alphabet(s));
  return DistributionSet::from_joint(std::move(alphabets), FullJoint(dims, joint));
}

/// Random dimensions with d in [d_min, d_max], |X_i| in [a_min, a_max].
inline std::vector<int> random_dims(std::mt19937_64& rng, int d_min, int d_max, int a_min,
                                    int a_max) {
  std::uniform_int_distribution<int> d_draw(d_min, d_max);
  std::uniform_int_distribution<int> a_draw(a_min, a_max);
  std::vector<int> dims(d_draw(rng));
  for (auto& s : dims) s = a_draw(rng);
  return dims;
}

/// Pairwise-independent but mutually dependent triple: X3 = X1 xor X2.
inline DistributionSet xor_triple() {
  Eigen::VectorXd joint = Eigen::VectorXd::Zero(8);
  FullJoint shape({2, 2, 2}, Eigen::VectorXd::Zero(8));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const int c = a ^ b;
      std::vector<int> idx = {a, b, c};
      joint[shape.flat_index(idx)] = 0.25;
    }
  return DistributionSet::from_joint(
      {numbered_alphabet(2), numbered_alphabet(2), numbered_alphabet(2)},
      FullJoint({2, 2, 2}, joint));
}

}  // namespace corrstruct::testing
