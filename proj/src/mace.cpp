#include "corrstruct/mace.hpp"

#include <cmath>
#include <random>

namespace corrstruct {

namespace {

void center(FeatureSet& fs, const DistributionSet& dist) {
  for (int i = 0; i < fs.d(); ++i) {
    const Eigen::RowVectorXd mean = dist.marginal(i).transpose() * fs.tables[i];
    fs.tables[i].rowwise() -= mean;
  }
}

Eigen::VectorXd column_norms_sq(const FeatureSet& fs, const DistributionSet& dist) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(fs.k);
  for (int i = 0; i < fs.d(); ++i) {
    const Eigen::MatrixXd& t = fs.tables[i];
    s += (t.array().square().matrix().transpose() * dist.marginal(i));
  }
  return s;
}

FeatureSet random_features(const DistributionSet& dist, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  FeatureSet fs;
  fs.k = k;
  fs.tables.resize(dist.d());
  for (int i = 0; i < dist.d(); ++i) {
    fs.tables[i].resize(dist.alphabet(i).size(), k);
    for (int c = 0; c < k; ++c)
      for (int r = 0; r < fs.tables[i].rows(); ++r) fs.tables[i](r, c) = gauss(rng);
  }
  center(fs, dist);
  return fs;
}

// Deflate col against previously fixed columns: f <- f - sum_l <f^(l), f> f^(l)
void gram_schmidt(FeatureSet& col, const FeatureSet& fixed, int n_fixed,
                  const DistributionSet& dist) {
  if (n_fixed == 0) return;
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(n_fixed);
  for (int j = 0; j < col.d(); ++j)
    coeffs += fixed.tables[j].leftCols(n_fixed).transpose() * dist.marginal(j).asDiagonal() *
              col.tables[j].col(0);
  for (int j = 0; j < col.d(); ++j)
    col.tables[j].col(0) -= fixed.tables[j].leftCols(n_fixed) * coeffs;
}

// Single-column power iteration with optional deflation against fixed columns.
MaceTrace fit_column(FeatureSet& col, const FeatureSet& fixed, int n_fixed,
                     const DistributionSet& dist, const MaceConfig& cfg) {
  MaceTrace trace;
  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    col = conditional_expectation_step(col, dist);
    center(col, dist);
    if (n_fixed > 0 && (iter % cfg.reorthogonalize_every) == 0)
      gram_schmidt(col, fixed, n_fixed, dist);
    col = normalize(col, dist);
    const double obj = joint_correlation(col, dist)[0];
    trace.objective.push_back(obj);
    trace.iters_used = iter;
    if (iter > 1) {
      const double rel = std::abs(obj - prev) / std::max(1.0, std::abs(obj));
      if (rel < cfg.rel_tol) {
        trace.converged = true;
        break;
      }
    }
    prev = obj;
  }
  if (n_fixed > 0) {  // final iterate: project then renormalize
    gram_schmidt(col, fixed, n_fixed, dist);
    col = normalize(col, dist);
  }
  return trace;
}

}  // namespace

FeatureSet conditional_expectation_step(const FeatureSet& fs, const DistributionSet& dist) {
  const int d = fs.d();
  FeatureSet out = fs;
  for (int i = 0; i < d; ++i) {
    const Eigen::VectorXd inv_pi = dist.marginal(i).cwiseInverse();
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      // E[f_j | X_i = x](l) = sum_{x_j} P(x_j | x_i) f_j(x_j, l)
      out.tables[i] += inv_pi.asDiagonal() * (dist.pairwise(i, j) * fs.tables[j]);
    }
  }
  return out;
}

FeatureSet normalize(const FeatureSet& fs, const DistributionSet& dist) {
  FeatureSet out = fs;
  const Eigen::VectorXd s = column_norms_sq(fs, dist);
  for (int c = 0; c < fs.k; ++c) {
    if (!(s[c] > 0))
      throw NumericalError("degenerate initialization: column " + std::to_string(c) +
                           " has zero joint norm; re-seed");
    const double scale = 1.0 / std::sqrt(s[c]);
    for (int i = 0; i < fs.d(); ++i) out.tables[i].col(c) *= scale;
  }
  return out;
}

std::pair<FeatureSet, MaceTrace> mace_fit(const DistributionSet& dist, const MaceConfig& cfg) {
  cfg.validate();
  if (cfg.k != 1) throw DomainError("mace_fit requires k = 1; use mace_fit_k");
  FeatureSet col = normalize(random_features(dist, 1, cfg.seed), dist);
  FeatureSet none;
  none.k = 0;
  MaceTrace trace = fit_column(col, none, 0, dist, cfg);
  return {std::move(col), std::move(trace)};
}

std::pair<FeatureSet, std::vector<MaceTrace>> mace_fit_k(const DistributionSet& dist,
                                                         const MaceConfig& cfg) {
  cfg.validate();
  int m = 0;
  for (int i = 0; i < dist.d(); ++i) m += dist.alphabet(i).size();
  if (cfg.k > m - dist.d())
    throw DomainError("k exceeds m - d = " + std::to_string(m - dist.d()));

  FeatureSet result;
  result.k = cfg.k;
  result.tables.resize(dist.d());
  for (int i = 0; i < dist.d(); ++i)
    result.tables[i] = Eigen::MatrixXd::Zero(dist.alphabet(i).size(), cfg.k);

  std::vector<MaceTrace> traces;
  traces.reserve(cfg.k);
  for (int c = 0; c < cfg.k; ++c) {
    FeatureSet col = normalize(random_features(dist, 1, cfg.seed + static_cast<std::uint64_t>(c)), dist);
    gram_schmidt(col, result, c, dist);
    col = normalize(col, dist);
    traces.push_back(fit_column(col, result, c, dist, cfg));
    for (int i = 0; i < dist.d(); ++i) result.tables[i].col(c) = col.tables[i].col(0);
  }
  return {std::move(result), std::move(traces)};
}

Eigen::VectorXd joint_correlation(const FeatureSet& fs, const DistributionSet& dist) {
  Eigen::VectorXd obj = Eigen::VectorXd::Zero(fs.k);
  for (int i = 0; i < fs.d(); ++i)
    for (int j = 0; j < fs.d(); ++j) {
      if (i == j) continue;
      obj += (fs.tables[i].transpose() * dist.pairwise(i, j) * fs.tables[j]).diagonal();
    }
  return obj;
}

double generalized_maximal_correlation(const DistributionSet& dist) {
  const Spectrum spec = eigendecompose(build_b(dist));
  return (spec.eigenvalues[1] - 1.0) / (dist.d() - 1);
}

double hgr_maximal_correlation(const DistributionSet& dist) {
  if (dist.d() != 2) throw DomainError("HGR maximal correlation needs a two-variable view");
  const Eigen::VectorXd s1 = dist.marginal(0).cwiseSqrt();
  const Eigen::VectorXd s2 = dist.marginal(1).cwiseSqrt();
  const Eigen::MatrixXd b12 =
      s1.cwiseInverse().asDiagonal() * dist.pairwise(0, 1) * s2.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b12);
  const auto& sv = svd.singularValues();
  if (sv.size() < 2) return 0.0;
  return sv[1];
}

}  // namespace corrstruct
