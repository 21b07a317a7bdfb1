#include "corrstruct/bits.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace corrstruct {

namespace {

// Bit patterns for a variable observing `count` bits, first bit slowest;
// pattern p maps bit slot s to +1 when the corresponding symbol char is '+'.
int pattern_count(int bits) { return 1 << bits; }

int bit_of_pattern(int pattern, int slot, int bits) {
  // slot 0 is the first (slowest) bit
  return ((pattern >> (bits - 1 - slot)) & 1) ? -1 : +1;
}

std::string pattern_symbol(int pattern, int bits) {
  std::string s(bits, '+');
  for (int slot = 0; slot < bits; ++slot)
    if (bit_of_pattern(pattern, slot, bits) < 0) s[slot] = '-';
  return s;
}

}  // namespace

void BitsInstance::validate() const {
  if (r < 1) throw DomainError("bits instance requires r >= 1");
  if (r > 20) throw CapacityError("bits instance with r = " + std::to_string(r) +
                                  " exceeds the 2^20-state cap");
  if (d() < 2) throw DomainError("bits instance requires d >= 2 variables");
  for (const auto& set : index_sets) {
    if (set.empty()) throw DomainError("index sets must be non-empty");
    for (std::size_t k = 0; k < set.size(); ++k) {
      if (set[k] < 1 || set[k] > r) throw DomainError("bit index out of range 1..r");
      if (k > 0 && set[k] <= set[k - 1]) throw DomainError("index sets must be strictly ascending");
    }
  }
}

BitsInstance parse_bits_sets(int r, const std::string& sets_spec) {
  BitsInstance inst;
  inst.r = r;
  std::istringstream ss(sets_spec);
  std::string group;
  while (std::getline(ss, group, ';')) {
    std::vector<int> set;
    std::istringstream gs(group);
    std::string tok;
    while (std::getline(gs, tok, ',')) {
      if (tok.empty()) continue;
      set.push_back(std::stoi(tok));
    }
    std::sort(set.begin(), set.end());
    inst.index_sets.push_back(std::move(set));
  }
  inst.validate();
  return inst;
}

DistributionSet bits_joint(const BitsInstance& inst) {
  inst.validate();
  const int d = inst.d();
  std::vector<Alphabet> alphabets;
  std::vector<int> dims(d);
  for (int i = 0; i < d; ++i) {
    const int bits = static_cast<int>(inst.index_sets[i].size());
    dims[i] = pattern_count(bits);
    std::vector<std::string> symbols(dims[i]);
    for (int p = 0; p < dims[i]; ++p) symbols[p] = pattern_symbol(p, bits);
    alphabets.emplace_back(std::move(symbols));
  }

  std::size_t cells = 1;
  for (int s : dims) cells *= static_cast<std::size_t>(s);
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(static_cast<long>(cells));
  FullJoint joint(dims, probs);

  const long states = 1L << inst.r;
  const double mass = 1.0 / static_cast<double>(states);
  std::vector<int> idx(d);
  for (long state = 0; state < states; ++state) {
    // bit j value: +1 when state bit (j-1) is 0
    for (int i = 0; i < d; ++i) {
      const auto& set = inst.index_sets[i];
      int pattern = 0;
      for (std::size_t slot = 0; slot < set.size(); ++slot) {
        const int bit = (state >> (set[slot] - 1)) & 1;
        pattern = (pattern << 1) | bit;
      }
      idx[i] = pattern;
    }
    joint.probs()[static_cast<long>(joint.flat_index(idx))] += mass;
  }
  return DistributionSet::from_joint(std::move(alphabets), std::move(joint));
}

int bits_weight(const BitsInstance& inst, const std::vector<int>& subset) {
  int w = 0;
  for (const auto& set : inst.index_sets) {
    bool contained = true;
    for (int b : subset)
      if (!std::binary_search(set.begin(), set.end(), b)) {
        contained = false;
        break;
      }
    if (contained) ++w;
  }
  return w;
}

std::vector<std::vector<int>> bits_subsets_ordered(const BitsInstance& inst) {
  inst.validate();
  const long total = 1L << inst.r;
  std::vector<std::vector<int>> subsets;
  subsets.reserve(total);
  for (long mask = 0; mask < total; ++mask) {
    std::vector<int> s;
    for (int b = 1; b <= inst.r; ++b)
      if ((mask >> (b - 1)) & 1) s.push_back(b);
    subsets.push_back(std::move(s));
  }
  std::stable_sort(subsets.begin(), subsets.end(),
                   [&](const std::vector<int>& a, const std::vector<int>& b) {
                     const int wa = bits_weight(inst, a), wb = bits_weight(inst, b);
                     if (wa != wb) return wa > wb;
                     if (a.size() != b.size()) return a.size() < b.size();
                     return a < b;
                   });
  return subsets;
}

Eigen::VectorXd bits_spectrum(const BitsInstance& inst) {
  const auto subsets = bits_subsets_ordered(inst);
  int m = 0;
  for (const auto& set : inst.index_sets) m += pattern_count(static_cast<int>(set.size()));
  Eigen::VectorXd ev = Eigen::VectorXd::Zero(m);
  int out = 0;
  for (const auto& s : subsets) {
    const int w = bits_weight(inst, s);
    if (w <= 0) break;  // descending order: the rest are zeros
    ev[out++] = static_cast<double>(w);
  }
  return ev;
}

FeatureSet bits_features(const BitsInstance& inst, int ell) {
  const auto subsets = bits_subsets_ordered(inst);
  if (ell < 1 || ell >= static_cast<int>(subsets.size()))
    throw DomainError("subset index out of range");
  const auto& J = subsets[ell];
  const int w = bits_weight(inst, J);
  if (w <= 0) throw DomainError("subset has zero inclusion count; no feature defined");

  FeatureSet fs;
  fs.k = 1;
  fs.tables.resize(inst.d());
  for (int i = 0; i < inst.d(); ++i) {
    const auto& set = inst.index_sets[i];
    const int bits = static_cast<int>(set.size());
    fs.tables[i] = Eigen::MatrixXd::Zero(pattern_count(bits), 1);
    bool contained = true;
    for (int b : J)
      if (!std::binary_search(set.begin(), set.end(), b)) {
        contained = false;
        break;
      }
    if (!contained) continue;
    for (int p = 0; p < pattern_count(bits); ++p) {
      double prod = 1.0;
      for (int b : J) {
        const int slot =
            static_cast<int>(std::lower_bound(set.begin(), set.end(), b) - set.begin());
        prod *= bit_of_pattern(p, slot, bits);
      }
      fs.tables[i](p, 0) = prod / std::sqrt(static_cast<double>(w));
    }
  }
  fs.eigenvalues_hint = Eigen::VectorXd::Constant(1, static_cast<double>(w));
  return fs;
}

}  // namespace corrstruct
