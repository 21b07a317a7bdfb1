#include "corrstruct/complexity.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace corrstruct {

namespace {

struct PairLayout {
  std::vector<int> dims;
  std::vector<long> offsets;  // per (i,j) pair, first index fastest
  long total = 0;
  int d = 0;

  explicit PairLayout(const std::vector<int>& dims_in) : dims(dims_in) {
    d = static_cast<int>(dims.size());
    offsets.resize(static_cast<std::size_t>(d) * d + 1, 0);
    long off = 0;
    for (int t = 0; t < d; ++t)
      for (int s = 0; s < d; ++s) {
        offsets[pair_index(s, t)] = off;
        off += static_cast<long>(dims[s]) * dims[t];
      }
    offsets.back() = off;
    total = off;
  }
  long pair_index(int s, int t) const { return static_cast<long>(t) * d + s; }
  long offset(int s, int t) const { return offsets[pair_index(s, t)]; }
};

Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clamped.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

double spectral_norm_sym(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Eigen::MatrixXd build_L(const DistributionSet& dist, int i, int j) {
  const Eigen::VectorXd pi = dist.marginal(i);
  const Eigen::VectorXd pj = dist.marginal(j);
  const Eigen::MatrixXd pij = dist.pairwise(i, j);
  const int ni = static_cast<int>(pi.size());
  const int nj = static_cast<int>(pj.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<long>(ni) * nj, static_cast<long>(ni) * nj);
  for (int xj = 0; xj < nj; ++xj)
    for (int xi = 0; xi < ni; ++xi) {
      const long row = static_cast<long>(xj) * ni + xi;
      for (int hj = 0; hj < nj; ++hj)
        for (int hi = 0; hi < ni; ++hi) {
          const long col = static_cast<long>(hj) * ni + hi;
          const double lead = std::sqrt(pij(hi, hj) / (pi[xi] * pj[xj]));
          if (lead == 0.0) continue;
          double t = (xi == hi && xj == hj) ? 1.0 : 0.0;
          double corr = 0.0;
          if (xi == hi) corr += 1.0 / pi[xi];
          if (xj == hj) corr += 1.0 / pj[xj];
          t -= 0.5 * corr * (pij(xi, xj) + pi[xi] * pj[xj]);
          L(row, col) = lead * t;
        }
    }
  return L;
}

Eigen::MatrixXd build_quadruple(const DistributionSet& dist, int i, int j, int s, int t) {
  const FullJoint& fj = dist.full_joint();
  const std::vector<int>& dims = fj.dims();
  const int ni = dims[i], nj = dims[j], ns = dims[s], nt = dims[t];
  Eigen::MatrixXd quad =
      Eigen::MatrixXd::Zero(static_cast<long>(ni) * nj, static_cast<long>(ns) * nt);
  std::vector<int> idx(dims.size());
  for (std::size_t f = 0; f < fj.cells(); ++f) {
    const double p = fj.probs()[static_cast<long>(f)];
    if (p <= 0) continue;
    fj.unflatten(f, idx);
    quad(static_cast<long>(idx[j]) * ni + idx[i], static_cast<long>(idx[t]) * ns + idx[s]) += p;
  }
  const Eigen::MatrixXd pij = dist.pairwise(i, j);
  const Eigen::MatrixXd pst = dist.pairwise(s, t);
  for (int xj = 0; xj < nj; ++xj)
    for (int xi = 0; xi < ni; ++xi)
      for (int ht = 0; ht < nt; ++ht)
        for (int hs = 0; hs < ns; ++hs) {
          const long r = static_cast<long>(xj) * ni + xi;
          const long c = static_cast<long>(ht) * ns + hs;
          const double denom = pij(xi, xj) * pst(hs, ht);
          quad(r, c) = denom > 0 ? quad(r, c) / std::sqrt(denom) : 0.0;
        }
  return quad;
}

Eigen::MatrixXd build_J(const DistributionSet& dist) {
  const PairLayout layout(dist.dims());
  const int d = layout.d;
  std::vector<Eigen::MatrixXd> L(static_cast<std::size_t>(d) * d);
  for (int t = 0; t < d; ++t)
    for (int s = 0; s < d; ++s) L[layout.pair_index(s, t)] = build_L(dist, s, t);

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(layout.total, layout.total);
  for (int t = 0; t < d; ++t)
    for (int s = 0; s < d; ++s)
      for (int tt = 0; tt < d; ++tt)
        for (int ss = 0; ss < d; ++ss) {
          const Eigen::MatrixXd quad = build_quadruple(dist, s, t, ss, tt);
          J.block(layout.offset(s, t), layout.offset(ss, tt), quad.rows(), quad.cols()) =
              L[layout.pair_index(s, t)] * quad * L[layout.pair_index(ss, tt)].transpose();
        }
  return J;
}

Eigen::MatrixXd build_J0(const DistributionSet& dist) {
  const FullJoint& fj = dist.full_joint();
  const PairLayout layout(dist.dims());
  const int d = layout.d;
  const long n_cells = static_cast<long>(fj.cells());

  Eigen::MatrixXd J0 = Eigen::MatrixXd::Zero(layout.total, n_cells);
  std::vector<int> idx(fj.dims().size());
  for (int t = 0; t < d; ++t)
    for (int s = 0; s < d; ++s) {
      // C_st maps xi_{X^d} to xi_{X_sX_t}
      Eigen::MatrixXd C =
          Eigen::MatrixXd::Zero(static_cast<long>(fj.dims()[s]) * fj.dims()[t], n_cells);
      const Eigen::MatrixXd pst = dist.pairwise(s, t);
      for (long f = 0; f < n_cells; ++f) {
        const double p = fj.probs()[f];
        if (p <= 0) continue;
        fj.unflatten(static_cast<std::size_t>(f), idx);
        const double pp = pst(idx[s], idx[t]);
        if (pp <= 0) continue;
        C(static_cast<long>(idx[t]) * fj.dims()[s] + idx[s], f) = std::sqrt(p / pp);
      }
      J0.middleRows(layout.offset(s, t), C.rows()) = build_L(dist, s, t) * C;
    }
  return J0;
}

Eigen::VectorXd tracy_singh(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            const std::vector<int>& dims) {
  const int d = static_cast<int>(dims.size());
  std::vector<int> off(dims.size() + 1, 0);
  for (int i = 0; i < d; ++i) off[i + 1] = off[i] + dims[i];

  const PairLayout layout(dims);
  Eigen::VectorXd out(layout.total);
  for (int t = 0; t < d; ++t)
    for (int s = 0; s < d; ++s) {
      long pos = layout.offset(s, t);
      for (int at = 0; at < dims[t]; ++at)
        for (int bs = 0; bs < dims[s]; ++bs)
          out[pos++] = a[off[t] + at] * b[off[s] + bs];
    }
  return out;
}

Eigen::MatrixXd build_Gk(const Spectrum& btilde_spec, int k, double gap_tol) {
  const int m = btilde_spec.m();
  if (k < 1 || k >= m) throw DomainError("k must be in [1, m-1]");
  const Eigen::VectorXd& ev = btilde_spec.eigenvalues;
  if (!(ev[k - 1] > ev[k] + gap_tol))
    throw NumericalError("eigengap condition violated: lambda^(k) = " + std::to_string(ev[k - 1]) +
                         " is not separated from lambda^(k+1) = " + std::to_string(ev[k]));

  const PairLayout layout(btilde_spec.dims);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(layout.total, layout.total);
  for (int i = 0; i < k; ++i)
    for (int j = k; j < m; ++j) {
      const Eigen::VectorXd v = tracy_singh(btilde_spec.eigenvectors.col(j),
                                            btilde_spec.eigenvectors.col(i), btilde_spec.dims);
      G.noalias() += (v * v.transpose()) / (ev[i] - ev[j]);
    }
  return G;
}

ExponentResult error_exponent(const DistributionSet& dist, int k) {
  const Spectrum spec = eigendecompose(build_b_tilde(build_b(dist), dist));
  const Eigen::MatrixXd G = build_Gk(spec, k);  // throws on gap violation
  const Eigen::MatrixXd J = build_J(dist);
  const Eigen::MatrixXd Gh = sqrt_psd(G);
  const double alpha = spectral_norm_sym(Gh * J * Gh);

  ExponentResult res;
  res.k = k;
  res.gap_ok = true;
  res.alpha_k = alpha;
  res.exponent =
      alpha > 1e-12 ? 1.0 / (2.0 * alpha) : std::numeric_limits<double>::infinity();
  return res;
}

double alpha_via_j0(const DistributionSet& dist, int k) {
  const Spectrum spec = eigendecompose(build_b_tilde(build_b(dist), dist));
  const Eigen::MatrixXd G = build_Gk(spec, k);
  const Eigen::MatrixXd J0 = build_J0(dist);
  return spectral_norm_sym(J0.transpose() * G * J0);
}

Eigen::MatrixXd empirical_b_tilde(const std::vector<Eigen::VectorXd>& marginals,
                                  const std::vector<std::vector<Eigen::MatrixXd>>& pairs) {
  const int d = static_cast<int>(marginals.size());
  std::vector<int> off(d + 1, 0);
  for (int i = 0; i < d; ++i) off[i + 1] = off[i] + static_cast<int>(marginals[i].size());
  const int m = off[d];
  Eigen::MatrixXd bt = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < d; ++i) {
    const Eigen::VectorXd si = marginals[i].cwiseSqrt();
    bt.block(off[i], off[i], si.size(), si.size()) =
        Eigen::MatrixXd::Identity(si.size(), si.size()) - si * si.transpose();
    for (int j = i + 1; j < d; ++j) {
      const Eigen::VectorXd sj = marginals[j].cwiseSqrt();
      Eigen::MatrixXd blk(si.size(), sj.size());
      for (long a = 0; a < si.size(); ++a)
        for (long b = 0; b < sj.size(); ++b) {
          const double denom = si[a] * sj[b];
          blk(a, b) = denom > 0
                          ? (pairs[i][j](a, b) - marginals[i][a] * marginals[j][b]) / denom
                          : 0.0;
        }
      bt.block(off[i], off[j], blk.rows(), blk.cols()) = blk;
      bt.block(off[j], off[i], blk.cols(), blk.rows()) = blk.transpose();
    }
  }
  return bt;
}

void ExceedanceCurve::validate() const {
  if (n_grid.size() != frequencies.size() || n_grid.size() != exceed_counts.size())
    throw DomainError("exceedance curve arrays disagree in length");
}

ExceedanceCurve monte_carlo_check(const DistributionSet& dist, int k,
                                  const std::vector<long>& n_grid, int trials, double eps,
                                  std::uint64_t seed) {
  const FullJoint& fj = dist.full_joint();
  const std::vector<int> dims = fj.dims();
  int m = 0;
  for (int s : dims) m += s;
  if (m > 20) throw CapacityError("monte_carlo_check supports m <= 20");
  if (trials < 1) throw DomainError("trials must be >= 1");
  const int d = static_cast<int>(dims.size());

  const Spectrum spec = eigendecompose(build_b_tilde(build_b(dist), dist));
  const Eigen::MatrixXd bt_true = build_b_tilde(build_b(dist), dist).dense;
  const double base = spec.eigenvalues.head(k).sum();

  std::vector<double> weights(fj.cells());
  for (std::size_t f = 0; f < fj.cells(); ++f) weights[f] = fj.probs()[static_cast<long>(f)];

  ExceedanceCurve curve;
  curve.n_grid = n_grid;
  curve.trials = trials;
  curve.eps = eps;

  std::vector<int> idx(dims.size());
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const long n = n_grid[gi];
    long exceed = 0;
    for (int trial = 0; trial < trials; ++trial) {
      std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (gi * trials + trial + 1));
      std::discrete_distribution<long> draw(weights.begin(), weights.end());

      std::vector<Eigen::VectorXd> emarg(d);
      std::vector<std::vector<Eigen::MatrixXd>> epair(d, std::vector<Eigen::MatrixXd>(d));
      for (int i = 0; i < d; ++i) {
        emarg[i] = Eigen::VectorXd::Zero(dims[i]);
        for (int j = i + 1; j < d; ++j) epair[i][j] = Eigen::MatrixXd::Zero(dims[i], dims[j]);
      }
      const double w = 1.0 / static_cast<double>(n);
      for (long s = 0; s < n; ++s) {
        fj.unflatten(static_cast<std::size_t>(draw(rng)), idx);
        for (int i = 0; i < d; ++i) {
          emarg[i][idx[i]] += w;
          for (int j = i + 1; j < d; ++j) epair[i][j](idx[i], idx[j]) += w;
        }
      }
      const Eigen::MatrixXd bt_hat = empirical_b_tilde(emarg, epair);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bt_hat);
      const Eigen::MatrixXd psi_hat = es.eigenvectors().rightCols(k);
      const double loss = base - (psi_hat.transpose() * bt_true * psi_hat).trace();
      if (loss > eps * eps) ++exceed;
    }
    curve.exceed_counts.push_back(exceed);
    curve.frequencies.push_back(static_cast<double>(exceed) / trials);
    if (exceed == 0) curve.has_zero_frequency = true;
  }

  // least-squares fit of -log(freq) = a + rate * n over observed frequencies
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int npts = 0;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    if (curve.frequencies[gi] <= 0) continue;
    const double x = static_cast<double>(n_grid[gi]);
    const double y = -std::log(curve.frequencies[gi]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++npts;
  }
  curve.decay_rate =
      npts >= 2 ? (npts * sxy - sx * sy) / (npts * sxx - sx * sx) : 0.0;
  return curve;
}

}  // namespace corrstruct
