#include "corrstruct/theory.hpp"

#include <cmath>

namespace corrstruct {

namespace {

long cells_of(const std::vector<int>& dims) {
  long c = 1;
  for (int s : dims) c *= s;
  return c;
}

double mutual_information(const Eigen::MatrixXd& pxy) {
  const Eigen::VectorXd px = pxy.rowwise().sum();
  const Eigen::VectorXd py = pxy.colwise().sum();
  double s = 0.0;
  for (long a = 0; a < pxy.rows(); ++a)
    for (long b = 0; b < pxy.cols(); ++b)
      if (pxy(a, b) > 0) s += pxy(a, b) * std::log(pxy(a, b) / (px[a] * py[b]));
  return s;
}

// total correlation of a distribution given as a flat table over x_dims
double total_correlation_flat(const Eigen::VectorXd& p, const std::vector<int>& dims) {
  const int d = static_cast<int>(dims.size());
  std::vector<Eigen::VectorXd> marg(d);
  for (int i = 0; i < d; ++i) marg[i] = Eigen::VectorXd::Zero(dims[i]);
  std::vector<int> idx(d);
  FullJoint shape(dims, Eigen::VectorXd::Zero(p.size()));
  for (long f = 0; f < p.size(); ++f) {
    shape.unflatten(f, idx);
    for (int i = 0; i < d; ++i) marg[i][idx[i]] += p[f];
  }
  double s = 0.0;
  for (long f = 0; f < p.size(); ++f) {
    if (p[f] <= 0) continue;
    shape.unflatten(f, idx);
    double prod = 1.0;
    for (int i = 0; i < d; ++i) prod *= marg[i][idx[i]];
    s += p[f] * std::log(p[f] / prod);
  }
  return s;
}

}  // namespace

long JointWithAttribute::u_cells() const { return cells_of(u_dims); }
long JointWithAttribute::x_cells() const { return cells_of(x_dims); }

Eigen::MatrixXd JointWithAttribute::marginal_u_xi(int i) const {
  const long nu = u_cells();
  const long nx = x_cells();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nu, x_dims[i]);
  FullJoint shape(x_dims, Eigen::VectorXd::Zero(nx));
  std::vector<int> idx(x_dims.size());
  for (long u = 0; u < nu; ++u)
    for (long x = 0; x < nx; ++x) {
      shape.unflatten(static_cast<std::size_t>(x), idx);
      out(u, idx[i]) += joint[u * nx + x];
    }
  return out;
}

Eigen::MatrixXd JointWithAttribute::marginal_ul_xd(int ell) const {
  const long nu = u_cells();
  const long nx = x_cells();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(u_dims[ell], nx);
  FullJoint ushape(u_dims, Eigen::VectorXd::Zero(nu));
  std::vector<int> uidx(u_dims.size());
  for (long u = 0; u < nu; ++u) {
    ushape.unflatten(static_cast<std::size_t>(u), uidx);
    out.row(uidx[ell]) += joint.segment(u * nx, nx).transpose();
  }
  return out;
}

Eigen::MatrixXd JointWithAttribute::marginal_uk_xd() const {
  const long nx = x_cells();
  Eigen::MatrixXd out(u_cells(), nx);
  for (long u = 0; u < u_cells(); ++u) out.row(u) = joint.segment(u * nx, nx).transpose();
  return out;
}

Eigen::VectorXd JointWithAttribute::marginal_xd() const {
  const long nx = x_cells();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nx);
  for (long u = 0; u < u_cells(); ++u) out += joint.segment(u * nx, nx);
  return out;
}

void JointWithAttribute::validate(double tol) const {
  if ((joint.array() < 0).any()) throw DomainError("attribute joint has negative entries");
  if (std::abs(joint.sum() - 1.0) > tol) throw DomainError("attribute joint does not sum to 1");
  for (int ell = 0; ell < k(); ++ell) {
    const double mean = p_u[ell].dot(h[ell]);
    const double var = p_u[ell].dot(h[ell].cwiseProduct(h[ell])) - mean * mean;
    if (std::abs(mean) > 1e-8 || std::abs(var - 1.0) > 1e-8)
      throw DomainError("h_" + std::to_string(ell) + " is not zero-mean unit-variance");
  }
}

double total_correlation(const FullJoint& joint) {
  return total_correlation_flat(joint.probs(), joint.dims());
}

double total_correlation(const DistributionSet& dist) {
  return total_correlation(dist.full_joint());
}

double correlation_reduction(const JointWithAttribute& jwa) {
  double L = 0.0;
  for (std::size_t i = 0; i < jwa.x_dims.size(); ++i)
    L += mutual_information(jwa.marginal_u_xi(static_cast<int>(i)));
  for (int ell = 0; ell < jwa.k(); ++ell) L -= mutual_information(jwa.marginal_ul_xd(ell));
  return L;
}

double correlation_reduction_divergence(const JointWithAttribute& jwa) {
  const Eigen::VectorXd px = jwa.marginal_xd();
  double L = total_correlation_flat(px, jwa.x_dims);
  const long nx = jwa.x_cells();
  for (long u = 0; u < jwa.u_cells(); ++u) {
    const double pu = jwa.joint.segment(u * nx, nx).sum();
    if (pu <= 0) continue;
    L -= pu * total_correlation_flat(jwa.joint.segment(u * nx, nx) / pu, jwa.x_dims);
  }
  return L;
}

namespace {

// per-ell tilt direction g_l(x) = sum_j q(j,l) / sqrt(lambda^(j)) * sum_i f_i^(j)(x_i)
Eigen::MatrixXd tilt_directions(const DistributionSet& dist, const Spectrum& spec, int k0,
                                const Eigen::MatrixXd& q) {
  const FullJoint& fj = dist.full_joint();
  const long nx = static_cast<long>(fj.cells());
  Eigen::MatrixXd sums(nx, k0);  // column j: sum_i f_i^(j+1)(x_i) / sqrt(lambda^(j+1))
  const FeatureSet fs = k0 > 0 ? features_from_spectrum(spec, dist, k0) : FeatureSet{};
  std::vector<int> idx(fj.d());
  for (long x = 0; x < nx; ++x) {
    fj.unflatten(static_cast<std::size_t>(x), idx);
    for (int j = 0; j < k0; ++j) {
      double s = 0.0;
      for (int i = 0; i < dist.d(); ++i) s += fs.tables[i](idx[i], j);
      sums(x, j) = s / std::sqrt(spec.eigenvalues[j + 1]);
    }
  }
  return sums * q;
}

JointWithAttribute assemble_embedding(const DistributionSet& dist, double delta, int k, int k0,
                                      const std::vector<Eigen::Vector2d>& h_list,
                                      const Eigen::MatrixXd& q, const Eigen::MatrixXd& g) {
  const FullJoint& fj = dist.full_joint();
  const long nx = static_cast<long>(fj.cells());
  if (!(delta >= 0)) throw DomainError("delta must be non-negative");

  // positivity guard on the linearized density 1 + sqrt(2 delta) * sum_l h_l g_l;
  // attributes are independent, so the most negative exponent maximizes each
  // term separately
  double worst = 0.0;
  for (long x = 0; x < nx; ++x) {
    if (fj.probs()[x] <= 0) continue;
    double s = 0.0;
    for (int ell = 0; ell < k0; ++ell)
      s += std::max(-h_list[ell][0] * g(x, ell), -h_list[ell][1] * g(x, ell));
    worst = std::max(worst, s);
  }
  if (worst > 0) {
    const double delta_max = 1.0 / (2.0 * worst * worst);
    if (delta >= delta_max)
      throw NumericalError("delta too large for a valid embedding; max admissible delta is " +
                           std::to_string(delta_max));
  }

  JointWithAttribute jwa;
  jwa.u_dims.assign(k, 2);
  jwa.x_dims = fj.dims();
  jwa.delta = delta;
  jwa.q = q;
  jwa.p_u.assign(k, Eigen::Vector2d(0.5, 0.5));
  jwa.h.reserve(k);
  for (int ell = 0; ell < k; ++ell) jwa.h.push_back(h_list[ell]);

  const long nu = 1L << k;
  jwa.joint.resize(nu * nx);
  const double scale = std::sqrt(2.0 * delta);
  for (long u = 0; u < nu; ++u) {
    // attribute ell takes value bit ell of u, first attribute slowest
    double pu = 1.0;
    for (int ell = 0; ell < k; ++ell) pu *= 0.5;
    for (long x = 0; x < nx; ++x) {
      double expo = 0.0;
      for (int ell = 0; ell < k0; ++ell) {
        const int u_ell = static_cast<int>((u >> (k - 1 - ell)) & 1);
        expo += h_list[ell][u_ell] * g(x, ell);
      }
      jwa.joint[u * nx + x] = pu * fj.probs()[x] * std::exp(scale * expo);
    }
  }
  jwa.joint /= jwa.joint.sum();
  jwa.validate();
  return jwa;
}

}  // namespace

int count_informative_attributes(const Spectrum& spec) {
  int kstar = 0;
  for (int i = 1; i < spec.m(); ++i) {
    if (spec.eigenvalues[i] > 1.0 + 1e-12)
      kstar = i;
    else
      break;
  }
  return kstar;
}

JointWithAttribute build_embedding(const DistributionSet& dist, const Spectrum& spec,
                                   double delta, const Eigen::Vector2d& h) {
  const Eigen::MatrixXd q = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd g = tilt_directions(dist, spec, 1, q);
  return assemble_embedding(dist, delta, 1, 1, {h}, q, g);
}

JointWithAttribute build_embedding_k(const DistributionSet& dist, const Spectrum& spec,
                                     double delta, int k,
                                     const std::vector<Eigen::Vector2d>& h_list,
                                     const Eigen::MatrixXd& q) {
  if (k < 1) throw DomainError("k must be >= 1");
  const int k0 = std::min(k, count_informative_attributes(spec));

  std::vector<Eigen::Vector2d> h = h_list;
  if (h.empty()) h.assign(k, Eigen::Vector2d(1.0, -1.0));
  if (static_cast<int>(h.size()) != k) throw DomainError("h_list must have k entries");

  Eigen::MatrixXd qm = q;
  if (qm.size() == 0) qm = Eigen::MatrixXd::Identity(k0, k0);
  if (qm.rows() != k0 || qm.cols() != k0)
    throw DomainError("q must be k0 x k0 with k0 = " + std::to_string(k0));
  if ((qm.transpose() * qm - Eigen::MatrixXd::Identity(k0, k0)).cwiseAbs().maxCoeff() > 1e-9)
    throw DomainError("q is not orthogonal");

  const Eigen::MatrixXd g = tilt_directions(dist, spec, k0, qm);
  return assemble_embedding(dist, delta, k, k0, h, qm, g);
}

TheoremReport verify_theorem(const DistributionSet& dist, int k,
                             const std::vector<double>& delta_grid) {
  if (delta_grid.empty()) throw DomainError("delta grid must be non-empty");
  for (std::size_t i = 1; i < delta_grid.size(); ++i)
    if (delta_grid[i] >= delta_grid[i - 1]) throw DomainError("delta grid must be descending");

  const Spectrum spec = eigendecompose(build_b(dist));
  const int k0 = std::min(k, count_informative_attributes(spec));

  TheoremReport rep;
  rep.k = k;
  double target = 0.0;
  for (int ell = 1; ell <= k0; ++ell) target += spec.eigenvalues[ell] - 1.0;
  rep.target = target;

  const bool zero_target = target <= 1e-9;
  for (double delta : delta_grid) {
    const JointWithAttribute jwa = (k == 1) ? build_embedding(dist, spec, delta)
                                            : build_embedding_k(dist, spec, delta, k);
    const double L = correlation_reduction(jwa);
    const double ratio = L / delta;
    const double gap =
        zero_target ? std::abs(ratio) : std::abs(target - ratio) / std::abs(target);
    rep.rows.push_back({delta, L, ratio, target, gap});
  }

  if (zero_target) {
    rep.pass = true;
    for (const auto& r : rep.rows) rep.pass = rep.pass && std::abs(r.L_over_delta) <= 1e-6;
    rep.note = "target is zero; absolute check |L/delta| <= 1e-6";
  } else {
    bool shrinking = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
      shrinking = shrinking && rep.rows[i].gap <= rep.rows[i - 1].gap + 1e-12;
    rep.pass = shrinking && rep.rows.back().gap <= 0.05;
  }
  return rep;
}

}  // namespace corrstruct
