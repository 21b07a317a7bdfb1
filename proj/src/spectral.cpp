#include "corrstruct/spectral.hpp"

#include <cmath>

namespace corrstruct {

namespace {

std::vector<int> prefix_offsets(const std::vector<int>& dims) {
  std::vector<int> off(dims.size() + 1, 0);
  for (std::size_t i = 0; i < dims.size(); ++i) off[i + 1] = off[i] + dims[i];
  return off;
}

Eigen::VectorXd sqrt_marginal_vector(const DistributionSet& dist, int i) {
  return dist.marginal(i).cwiseSqrt();
}

// psi^(0) = (1/sqrt d) [v_1; ...; v_d], v_i(x) = sqrt P_i(x)
Eigen::VectorXd psi0_vector(const DistributionSet& dist, const std::vector<int>& offsets, int m) {
  Eigen::VectorXd psi0(m);
  for (int i = 0; i < dist.d(); ++i)
    psi0.segment(offsets[i], dist.alphabet(i).size()) = sqrt_marginal_vector(dist, i);
  return psi0 / std::sqrt(static_cast<double>(dist.d()));
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  int arg = 0;
  double best = std::abs(v[0]);
  for (int i = 1; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best) {
      best = a;
      arg = i;
    }
  }
  if (v[arg] < 0) v = -v;
}

}  // namespace

BMatrix build_b(const DistributionSet& dist) {
  const int d = dist.d();
  BMatrix b;
  b.dims = dist.dims();
  b.offsets = prefix_offsets(b.dims);
  b.m = b.offsets[d];
  b.variant = BMatrix::Variant::B;
  b.dense = Eigen::MatrixXd::Zero(b.m, b.m);

  for (int i = 0; i < d; ++i) {
    if ((dist.marginal(i).array() <= 0).any())
      throw DomainError("marginal of variable " + std::to_string(i) +
                        " has a zero entry; B is undefined");
  }
  for (int i = 0; i < d; ++i) {
    b.dense.block(b.offsets[i], b.offsets[i], b.dims[i], b.dims[i]) =
        Eigen::MatrixXd::Identity(b.dims[i], b.dims[i]);
    const Eigen::VectorXd si = sqrt_marginal_vector(dist, i);
    for (int j = i + 1; j < d; ++j) {
      const Eigen::VectorXd sj = sqrt_marginal_vector(dist, j);
      const Eigen::MatrixXd blk =
          si.cwiseInverse().asDiagonal() * dist.pairwise(i, j) * sj.cwiseInverse().asDiagonal();
      b.dense.block(b.offsets[i], b.offsets[j], b.dims[i], b.dims[j]) = blk;
      b.dense.block(b.offsets[j], b.offsets[i], b.dims[j], b.dims[i]) = blk.transpose();
    }
  }
  return b;
}

BMatrix build_b_tilde(const BMatrix& b, const DistributionSet& dist) {
  if (b.variant != BMatrix::Variant::B) throw DomainError("build_b_tilde expects variant B");
  BMatrix bt = b;
  bt.variant = BMatrix::Variant::BTilde;
  const Eigen::VectorXd psi0 = psi0_vector(dist, b.offsets, b.m);
  bt.dense -= static_cast<double>(b.d()) * (psi0 * psi0.transpose());
  return bt;
}

Spectrum eigendecompose(const BMatrix& b, int dense_cap) {
  if (b.m > dense_cap)
    throw CapacityError("matrix dimension " + std::to_string(b.m) + " exceeds dense cap " +
                        std::to_string(dense_cap) + "; use the MACE route");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b.dense);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");

  Spectrum s;
  s.dims = b.dims;
  s.offsets = b.offsets;
  const int m = b.m;
  s.eigenvalues.resize(m);
  s.eigenvectors.resize(m, m);
  for (int i = 0; i < m; ++i) {  // ascending -> descending
    s.eigenvalues[i] = solver.eigenvalues()[m - 1 - i];
    s.eigenvectors.col(i) = solver.eigenvectors().col(m - 1 - i);
    fix_sign(s.eigenvectors.col(i));
  }
  return s;
}

Lemma1Report check_lemma1(const BMatrix& b, const Spectrum& spec, const DistributionSet& dist) {
  Lemma1Report rep;
  const int d = dist.d();
  const int m = b.m;
  const Eigen::VectorXd& ev = spec.eigenvalues;

  // (1) positive semidefinite
  {
    const double lmin = ev[m - 1];
    rep.checks.push_back({"psd", lmin >= -1e-9, std::max(0.0, -lmin), ""});
  }
  // (2) top eigenpair
  {
    const Eigen::VectorXd psi0 = psi0_vector(dist, b.offsets, m);
    const double val_res = std::abs(ev[0] - d);
    const double vec_res =
        std::min((spec.eigenvectors.col(0) - psi0).norm(), (spec.eigenvectors.col(0) + psi0).norm());
    const double res = std::max(val_res, vec_res);
    rep.checks.push_back({"top_eigenpair", res <= 1e-8, res, ""});
  }
  // (3) second eigenvalue at least 1
  rep.checks.push_back({"second_eigenvalue_ge_1", ev[1] >= 1.0 - 1e-9, std::max(0.0, 1.0 - ev[1]), ""});

  // kernel dimension at threshold 1e-9
  int kernel_dim = 0;
  while (kernel_dim < m && ev[m - 1 - kernel_dim] <= 1e-9) ++kernel_dim;
  rep.degenerate_kernel = kernel_dim > d - 1;

  // analytic null family: [alpha_1 v_1; ...; alpha_d v_d], sum alpha = 0
  Eigen::MatrixXd alpha_basis(d, d - 1);  // orthonormal basis of {sum alpha = 0}
  {
    Eigen::MatrixXd proj =
        Eigen::MatrixXd::Identity(d, d) - Eigen::MatrixXd::Constant(d, d, 1.0 / d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(proj);
    int c = 0;
    for (int i = 0; i < d; ++i)
      if (es.eigenvalues()[i] > 0.5) alpha_basis.col(c++) = es.eigenvectors().col(i);
  }
  Eigen::MatrixXd family(m, d - 1);
  for (int c = 0; c < d - 1; ++c)
    for (int i = 0; i < d; ++i)
      family.col(c).segment(b.offsets[i], b.dims[i]) =
          alpha_basis(i, c) * sqrt_marginal_vector(dist, i);

  // (4) trailing d-1 eigenvalues vanish and their span matches the family
  {
    const double tail_max = ev.tail(d - 1).cwiseAbs().maxCoeff();
    bool pass = tail_max <= 1e-9;
    double angle = 0.0;
    std::string note;
    if (!rep.degenerate_kernel) {
      const Eigen::MatrixXd tail_vecs = spec.eigenvectors.rightCols(d - 1);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(tail_vecs.transpose() * family);
      const double cos_min = svd.singularValues().minCoeff();
      angle = std::acos(std::min(1.0, cos_min));
    } else {
      // extra numerical zeros: check the analytic family lies inside the kernel
      const Eigen::MatrixXd kernel_vecs = spec.eigenvectors.rightCols(kernel_dim);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(kernel_vecs.transpose() * family);
      const double cos_min = svd.singularValues().minCoeff();
      angle = std::acos(std::min(1.0, cos_min));
      note = "kernel dimension " + std::to_string(kernel_dim) + " exceeds d-1; null family membership checked instead of span equality";
    }
    pass = pass && angle <= 1e-6;
    rep.checks.push_back({"null_space", pass, std::max(tail_max, angle), note});
  }
  // (5) subvector orthogonality for 1 <= l <= m-d with positive eigenvalue
  {
    double worst = 0.0;
    int skipped = 0;
    for (int ell = 1; ell <= m - d; ++ell) {
      if (ev[ell] <= 1e-8) {  // zero-tied index: basis within the kernel is arbitrary
        ++skipped;
        continue;
      }
      for (int i = 0; i < d; ++i) {
        const double ip = std::abs(spec.subvector(ell, i).dot(sqrt_marginal_vector(dist, i)));
        worst = std::max(worst, ip);
      }
    }
    std::string note;
    if (skipped > 0)
      note = std::to_string(skipped) + " zero-tied indices skipped (eigenvalue <= 1e-8)";
    rep.checks.push_back({"subvector_orthogonality", worst <= 1e-7, worst, note});
  }
  return rep;
}

FeatureSet features_from_spectrum(const Spectrum& spec, const DistributionSet& dist, int k) {
  const int d = dist.d();
  const int m = spec.m();
  if (k < 1 || k > m - d)
    throw DomainError("k must be in [1, m-d] = [1, " + std::to_string(m - d) + "]");
  FeatureSet fs;
  fs.k = k;
  fs.tables.resize(d);
  for (int i = 0; i < d; ++i) {
    const Eigen::VectorXd inv_sqrt = dist.marginal(i).cwiseSqrt().cwiseInverse();
    fs.tables[i].resize(spec.dims[i], k);
    for (int ell = 1; ell <= k; ++ell)
      fs.tables[i].col(ell - 1) = spec.subvector(ell, i).cwiseProduct(inv_sqrt);
  }
  fs.eigenvalues_hint = spec.eigenvalues.segment(1, k);
  return fs;
}

Eigen::MatrixXd feature_gram(const FeatureSet& fs, const DistributionSet& dist) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(fs.k, fs.k);
  for (int i = 0; i < fs.d(); ++i)
    g += fs.tables[i].transpose() * dist.marginal(i).asDiagonal() * fs.tables[i];
  return g;
}

Eigen::MatrixXd feature_means(const FeatureSet& fs, const DistributionSet& dist) {
  Eigen::MatrixXd mu(fs.d(), fs.k);
  for (int i = 0; i < fs.d(); ++i) mu.row(i) = dist.marginal(i).transpose() * fs.tables[i];
  return mu;
}

Eigen::MatrixXd features_to_psi(const FeatureSet& fs, const DistributionSet& dist) {
  int m = 0;
  for (int i = 0; i < fs.d(); ++i) m += static_cast<int>(fs.tables[i].rows());
  Eigen::MatrixXd psi(m, fs.k);
  int off = 0;
  for (int i = 0; i < fs.d(); ++i) {
    psi.middleRows(off, fs.tables[i].rows()) =
        dist.marginal(i).cwiseSqrt().asDiagonal() * fs.tables[i];
    off += static_cast<int>(fs.tables[i].rows());
  }
  return psi;
}

double projector_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  auto orthonormalize = [](const Eigen::MatrixXd& x) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(x.rows(), x.cols());
    return q;
  };
  const Eigen::MatrixXd qa = orthonormalize(a);
  const Eigen::MatrixXd qb = orthonormalize(b);
  return (qa * qa.transpose() - qb * qb.transpose()).norm();
}

}  // namespace corrstruct
