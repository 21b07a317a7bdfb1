#include "corrstruct/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace corrstruct {

Alphabet::Alphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  if (symbols_.empty()) throw DomainError("alphabet must have size >= 1");
  index_.reserve(symbols_.size());
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    auto [it, inserted] = index_.emplace(symbols_[i], static_cast<int>(i));
    (void)it;
    if (!inserted) throw DomainError("duplicate symbol in alphabet: " + symbols_[i]);
  }
}

const std::string& Alphabet::symbol(int idx) const {
  if (idx < 0 || idx >= size()) throw DomainError("symbol index out of range");
  return symbols_[idx];
}

int Alphabet::index(const std::string& sym) const {
  auto it = index_.find(sym);
  if (it == index_.end()) throw DomainError("unknown symbol: " + sym);
  return it->second;
}

std::optional<int> Alphabet::find(const std::string& sym) const {
  auto it = index_.find(sym);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

DiscreteDataset::DiscreteDataset(std::vector<Alphabet> alphabets,
                                 std::vector<std::string> variable_names,
                                 std::vector<int> samples_flat)
    : alphabets_(std::move(alphabets)),
      names_(std::move(variable_names)),
      samples_(std::move(samples_flat)) {
  const int dd = static_cast<int>(alphabets_.size());
  if (dd < 2) throw DomainError("dataset requires d >= 2 variables");
  if (names_.size() != alphabets_.size())
    throw DomainError("variable name count does not match alphabet count");
  if (samples_.empty() || samples_.size() % static_cast<std::size_t>(dd) != 0)
    throw DomainError("sample buffer size must be a positive multiple of d");
  n_ = static_cast<int>(samples_.size() / static_cast<std::size_t>(dd));
  for (int r = 0; r < n_; ++r)
    for (int i = 0; i < dd; ++i) {
      const int v = value(r, i);
      if (v < 0 || v >= alphabets_[i].size())
        throw DomainError("sample value out of alphabet range at row " + std::to_string(r));
    }
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(field);
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

}  // namespace

DiscreteDataset parse_csv(const std::string& text, const CsvOptions& opts,
                          const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_line(line, opts.delimiter));
  }
  if (rows.empty()) throw FormatError(origin + ": empty input");

  std::vector<std::string> names;
  std::size_t first_data = 0;
  if (opts.header) {
    names = rows[0];
    first_data = 1;
    if (rows.size() == 1) throw FormatError(origin + ": header only, no data rows");
  } else {
    for (std::size_t i = 0; i < rows[0].size(); ++i) names.push_back("x" + std::to_string(i + 1));
  }
  const std::size_t d = names.size();
  if (d < 2) throw DomainError(origin + ": d >= 2 columns required");

  std::vector<std::vector<std::string>> symbols(d);
  std::vector<std::unordered_map<std::string, int>> lookup(d);
  std::vector<int> samples;
  samples.reserve((rows.size() - first_data) * d);
  for (std::size_t r = first_data; r < rows.size(); ++r) {
    if (rows[r].size() != d)
      throw FormatError(origin + ": row " + std::to_string(r + 1) + " has " +
                        std::to_string(rows[r].size()) + " fields, expected " + std::to_string(d));
    for (std::size_t i = 0; i < d; ++i) {
      auto& lut = lookup[i];
      auto it = lut.find(rows[r][i]);
      int idx;
      if (it == lut.end()) {
        idx = static_cast<int>(symbols[i].size());
        symbols[i].push_back(rows[r][i]);
        lut.emplace(rows[r][i], idx);
      } else {
        idx = it->second;
      }
      samples.push_back(idx);
    }
  }
  std::vector<Alphabet> alphabets;
  alphabets.reserve(d);
  for (auto& s : symbols) alphabets.emplace_back(std::move(s));
  return DiscreteDataset(std::move(alphabets), std::move(names), std::move(samples));
}

DiscreteDataset load_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str(), opts, path);
}

void write_csv(const DiscreteDataset& ds, const std::string& path, char delimiter) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file for writing: " + path);
  for (int i = 0; i < ds.d(); ++i) f << (i ? std::string(1, delimiter) : "") << ds.variable_names()[i];
  f << "\n";
  for (int r = 0; r < ds.n(); ++r) {
    for (int i = 0; i < ds.d(); ++i)
      f << (i ? std::string(1, delimiter) : "") << ds.alphabet(i).symbol(ds.value(r, i));
    f << "\n";
  }
}

FullJoint::FullJoint(std::vector<int> dims, Eigen::VectorXd probs)
    : dims_(std::move(dims)), p_(std::move(probs)) {
  std::size_t cells = 1;
  for (int s : dims_) {
    if (s < 1) throw DomainError("full joint dimension must be >= 1");
    cells *= static_cast<std::size_t>(s);
  }
  if (static_cast<std::size_t>(p_.size()) != cells)
    throw DomainError("full joint size does not match dimensions");
}

std::size_t FullJoint::flat_index(std::span<const int> idx) const {
  std::size_t f = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) f = f * dims_[i] + idx[i];
  return f;
}

void FullJoint::unflatten(std::size_t flat, std::span<int> idx_out) const {
  for (int i = d() - 1; i >= 0; --i) {
    idx_out[i] = static_cast<int>(flat % dims_[i]);
    flat /= dims_[i];
  }
}

Eigen::VectorXd FullJoint::marginal(int i) const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dims_[i]);
  std::vector<int> idx(dims_.size());
  for (std::size_t f = 0; f < cells(); ++f) {
    unflatten(f, idx);
    m[idx[i]] += p_[f];
  }
  return m;
}

Eigen::MatrixXd FullJoint::pair_marginal(int i, int j) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dims_[i], dims_[j]);
  std::vector<int> idx(dims_.size());
  for (std::size_t f = 0; f < cells(); ++f) {
    unflatten(f, idx);
    m(idx[i], idx[j]) += p_[f];
  }
  return m;
}

std::vector<int> DistributionSet::dims() const {
  std::vector<int> out(alphabets_.size());
  for (std::size_t i = 0; i < alphabets_.size(); ++i) out[i] = alphabets_[i].size();
  return out;
}

int DistributionSet::upper_index(int i, int j) const {
  // position of (i,j), i<j, in row-major upper-triangle enumeration
  const int dd = d();
  return i * dd - i * (i + 1) / 2 + (j - i - 1);
}

Eigen::MatrixXd DistributionSet::pairwise(int i, int j) const {
  if (i == j) return Eigen::MatrixXd(marginals_[i].asDiagonal());
  if (i < j) return upper_[upper_index(i, j)];
  return upper_[upper_index(j, i)].transpose();
}

const FullJoint& DistributionSet::full_joint() const {
  if (!full_joint_) throw DomainError("full joint not available");
  return *full_joint_;
}

DistributionSet DistributionSet::estimate(const DiscreteDataset& ds, bool with_full_joint,
                                          double alpha, std::size_t cell_cap) {
  const int dd = ds.d();
  const long n = ds.n();
  DistributionSet out;
  out.alphabets_ = ds.alphabets();
  out.n_ = n;
  out.alpha_ = alpha;

  double total_cells = 1.0;
  for (int i = 0; i < dd; ++i) total_cells *= ds.alphabet(i).size();
  if (with_full_joint && total_cells > static_cast<double>(cell_cap))
    throw CapacityError("full joint needs " + std::to_string(total_cells) +
                        " cells, cap is " + std::to_string(cell_cap) +
                        "; omit the full joint");

  // integer counts first, one normalization at the end
  std::vector<Eigen::VectorX<std::int64_t>> mcount(dd);
  for (int i = 0; i < dd; ++i) mcount[i] = Eigen::VectorX<std::int64_t>::Zero(ds.alphabet(i).size());
  std::vector<Eigen::MatrixX<std::int64_t>> pcount;
  for (int i = 0; i < dd; ++i)
    for (int j = i + 1; j < dd; ++j)
      pcount.emplace_back(Eigen::MatrixX<std::int64_t>::Zero(ds.alphabet(i).size(), ds.alphabet(j).size()));
  for (int r = 0; r < n; ++r) {
    auto row = ds.row(r);
    int pi = 0;
    for (int i = 0; i < dd; ++i) {
      mcount[i][row[i]] += 1;
      for (int j = i + 1; j < dd; ++j) pcount[pi++](row[i], row[j]) += 1;
    }
  }

  const double denom = static_cast<double>(n) + alpha * total_cells;
  out.marginals_.resize(dd);
  for (int i = 0; i < dd; ++i) {
    const double pseudo = alpha * total_cells / ds.alphabet(i).size();
    out.marginals_[i] = (mcount[i].cast<double>().array() + pseudo).matrix() / denom;
  }
  int pi = 0;
  for (int i = 0; i < dd; ++i)
    for (int j = i + 1; j < dd; ++j) {
      const double pseudo =
          alpha * total_cells / (static_cast<double>(ds.alphabet(i).size()) * ds.alphabet(j).size());
      out.upper_.push_back(((pcount[pi].cast<double>().array() + pseudo) / denom).matrix());
      ++pi;
    }

  if (with_full_joint) {
    std::vector<int> dims = out.dims();
    Eigen::VectorXd p = Eigen::VectorXd::Constant(static_cast<long>(total_cells), alpha / denom);
    FullJoint fj(dims, p);
    for (int r = 0; r < n; ++r) {
      auto row = ds.row(r);
      fj.probs()[static_cast<long>(fj.flat_index(row))] += 1.0 / denom;
    }
    out.full_joint_ = std::move(fj);
  }
  return out;
}

DistributionSet DistributionSet::from_joint(std::vector<Alphabet> alphabets, FullJoint joint) {
  if (alphabets.size() != static_cast<std::size_t>(joint.d()))
    throw DomainError("alphabet count does not match joint dimensionality");
  for (std::size_t i = 0; i < alphabets.size(); ++i)
    if (alphabets[i].size() != joint.dims()[i])
      throw DomainError("alphabet size does not match joint dimension " + std::to_string(i));
  if ((joint.probs().array() < 0).any())
    throw DomainError("full joint has negative entries");
  const double sum = joint.probs().sum();
  if (std::abs(sum - 1.0) > 1e-9)
    throw DomainError("full joint not normalized: sum = " + std::to_string(sum));

  DistributionSet out;
  out.alphabets_ = std::move(alphabets);
  const int dd = out.d();
  out.marginals_.resize(dd);
  for (int i = 0; i < dd; ++i) out.marginals_[i] = joint.marginal(i);
  for (int i = 0; i < dd; ++i)
    for (int j = i + 1; j < dd; ++j) out.upper_.push_back(joint.pair_marginal(i, j));
  out.full_joint_ = std::move(joint);
  return out;
}

DistributionSet DistributionSet::restrict_pair(int i, int j) const {
  if (i == j) throw DomainError("pair restriction needs two distinct variables");
  Eigen::MatrixXd table = pairwise(i, j);
  Eigen::VectorXd flat(table.size());
  // FullJoint stores the last variable fastest
  int idx = 0;
  for (int a = 0; a < table.rows(); ++a)
    for (int b = 0; b < table.cols(); ++b) flat[idx++] = table(a, b);
  return from_joint({alphabet(i), alphabet(j)},
                    FullJoint({static_cast<int>(table.rows()), static_cast<int>(table.cols())}, flat));
}

void DistributionSet::validate(double tol) const {
  const int dd = d();
  for (int i = 0; i < dd; ++i) {
    if ((marginals_[i].array() < 0).any()) throw DomainError("negative marginal entry");
    if (std::abs(marginals_[i].sum() - 1.0) > tol)
      throw DomainError("marginal " + std::to_string(i) + " does not sum to 1");
  }
  for (int i = 0; i < dd; ++i)
    for (int j = i + 1; j < dd; ++j) {
      const Eigen::MatrixXd t = pairwise(i, j);
      if ((t.array() < 0).any()) throw DomainError("negative pairwise entry");
      if (std::abs(t.sum() - 1.0) > tol) throw DomainError("pairwise table does not sum to 1");
      if ((t.rowwise().sum() - marginals_[i]).cwiseAbs().maxCoeff() > tol)
        throw DomainError("pairwise row sums disagree with marginal");
      if ((t.colwise().sum().transpose() - marginals_[j]).cwiseAbs().maxCoeff() > tol)
        throw DomainError("pairwise column sums disagree with marginal");
    }
  if (full_joint_) {
    for (int i = 0; i < dd; ++i)
      for (int j = i + 1; j < dd; ++j)
        if ((full_joint_->pair_marginal(i, j) - pairwise(i, j)).cwiseAbs().maxCoeff() > tol)
          throw DomainError("full joint marginalization disagrees with pairwise table");
  }
}

DistributionSet estimate_distributions(const DiscreteDataset& ds, bool with_full_joint,
                                       double alpha, std::size_t cell_cap) {
  return DistributionSet::estimate(ds, with_full_joint, alpha, cell_cap);
}

}  // namespace corrstruct
