#include "corrstruct/mhscore.hpp"

#include <cmath>
#include <random>

namespace corrstruct {

namespace {

void check_tables(const std::vector<Eigen::MatrixXd>& tables, const DistributionSet& dist) {
  if (static_cast<int>(tables.size()) != dist.d())
    throw DomainError("table count does not match variable count");
  const long k = tables.empty() ? 0 : tables[0].cols();
  for (int i = 0; i < dist.d(); ++i) {
    if (tables[i].rows() != dist.alphabet(i).size())
      throw DomainError("table rows do not match alphabet of variable " + std::to_string(i));
    if (tables[i].cols() != k) throw DomainError("tables disagree on k");
  }
}

Eigen::MatrixXd second_moment(const Eigen::MatrixXd& f, const Eigen::VectorXd& p) {
  return f.transpose() * p.asDiagonal() * f;
}

}  // namespace

double h_score_pair(const DistributionSet& dist, int i, int j, const Eigen::MatrixXd& fi,
                    const Eigen::MatrixXd& fj) {
  if (fi.rows() != dist.alphabet(i).size() || fj.rows() != dist.alphabet(j).size() ||
      fi.cols() != fj.cols())
    throw DomainError("h_score_pair: table dimensions do not match alphabets or k");
  const Eigen::MatrixXd pij = dist.pairwise(i, j);
  const double cross = (fi.transpose() * pij * fj).trace();
  const Eigen::VectorXd mi = fi.transpose() * dist.marginal(i);
  const Eigen::VectorXd mj = fj.transpose() * dist.marginal(j);
  const Eigen::MatrixXd Mi = second_moment(fi, dist.marginal(i));
  const Eigen::MatrixXd Mj = second_moment(fj, dist.marginal(j));
  return cross - mi.dot(mj) - 0.5 * (Mi * Mj).trace();
}

double mh_score(const std::vector<Eigen::MatrixXd>& tables, const DistributionSet& dist) {
  check_tables(tables, dist);
  double h = 0.0;
  for (int i = 0; i < dist.d(); ++i)
    for (int j = 0; j < dist.d(); ++j) h += h_score_pair(dist, i, j, tables[i], tables[j]);
  return h;
}

double check_mh_identity(const std::vector<Eigen::MatrixXd>& tables, const DistributionSet& dist) {
  check_tables(tables, dist);
  const BMatrix bt = build_b_tilde(build_b(dist), dist);
  const long k = tables[0].cols();
  Eigen::MatrixXd psi(bt.m, k);
  for (int i = 0; i < dist.d(); ++i)
    psi.middleRows(bt.offsets[i], bt.dims[i]) =
        dist.marginal(i).cwiseSqrt().asDiagonal() * tables[i];
  const double lhs = (bt.dense - psi * psi.transpose()).squaredNorm();
  const double rhs = bt.dense.squaredNorm() - 2.0 * mh_score(tables, dist);
  return std::abs(lhs - rhs);
}

std::vector<Eigen::MatrixXd> mh_score_gradient(const std::vector<Eigen::MatrixXd>& tables,
                                               const DistributionSet& dist) {
  check_tables(tables, dist);
  const int d = dist.d();
  const long k = tables[0].cols();

  Eigen::VectorXd mu_total = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd gram_total = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < d; ++i) {
    mu_total += tables[i].transpose() * dist.marginal(i);
    gram_total += second_moment(tables[i], dist.marginal(i));
  }

  std::vector<Eigen::MatrixXd> grad(d);
  for (int i = 0; i < d; ++i) {
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(tables[i].rows(), k);
    for (int j = 0; j < d; ++j) cross += dist.pairwise(i, j) * tables[j];
    grad[i] = 2.0 * (cross - dist.marginal(i) * mu_total.transpose() -
                     dist.marginal(i).asDiagonal() * tables[i] * gram_total);
  }
  return grad;
}

MhTrainResult mh_train(const DistributionSet& dist, const HTrainConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  MhTrainResult res;
  res.tables.resize(dist.d());
  for (int i = 0; i < dist.d(); ++i) {
    res.tables[i].resize(dist.alphabet(i).size(), cfg.k);
    for (int c = 0; c < cfg.k; ++c)
      for (int r = 0; r < res.tables[i].rows(); ++r)
        res.tables[i](r, c) = cfg.init_scale * gauss(rng);
  }

  res.score_curve.reserve(cfg.steps);
  for (int step = 0; step < cfg.steps; ++step) {
    const auto grad = mh_score_gradient(res.tables, dist);
    for (int i = 0; i < dist.d(); ++i) res.tables[i] += cfg.learning_rate * grad[i];
    const double h = mh_score(res.tables, dist);
    if (!std::isfinite(h))
      throw NumericalError("mh_train diverged at step " + std::to_string(step) +
                           "; reduce learning_rate");
    res.score_curve.push_back(h);
  }
  return res;
}

FeatureSet whiten_features(const std::vector<Eigen::MatrixXd>& tables,
                           const DistributionSet& dist) {
  check_tables(tables, dist);
  const int d = dist.d();
  const long k = tables[0].cols();

  std::vector<Eigen::MatrixXd> centered(tables.begin(), tables.end());
  for (int i = 0; i < d; ++i) {
    const Eigen::RowVectorXd mean = dist.marginal(i).transpose() * centered[i];
    centered[i].rowwise() -= mean;
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < d; ++i) gram += second_moment(centered[i], dist.marginal(i));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double floor = 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff());
  if (es.eigenvalues().minCoeff() < floor)
    throw NumericalError("whitening failed: feature gram matrix is rank deficient");
  const Eigen::MatrixXd inv_sqrt = es.eigenvectors() *
                                   es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                   es.eigenvectors().transpose();

  FeatureSet fs;
  fs.k = static_cast<int>(k);
  fs.tables.resize(d);
  for (int i = 0; i < d; ++i) fs.tables[i] = centered[i] * inv_sqrt;

  // principal-axis rotation of the joint-correlation matrix, descending
  Eigen::MatrixXd obj = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      obj += fs.tables[i].transpose() * dist.pairwise(i, j) * fs.tables[j];
    }
  obj = 0.5 * (obj + obj.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> axes(obj);
  Eigen::MatrixXd rot(k, k);
  for (long c = 0; c < k; ++c) rot.col(c) = axes.eigenvectors().col(k - 1 - c);
  for (int i = 0; i < d; ++i) fs.tables[i] = fs.tables[i] * rot;
  return fs;
}

}  // namespace corrstruct
