#include <doctest.h>

#include <random>

#include "corrstruct/bits.hpp"
#include "corrstruct/json_io.hpp"
#include "corrstruct/spectral.hpp"
#include "support.hpp"

using namespace corrstruct;
using namespace corrstruct::testing;

namespace {

BitsInstance triangle() {
  BitsInstance inst;
  inst.r = 3;
  inst.index_sets = {{1, 2}, {2, 3}, {1, 3}};
  return inst;
}

}  // namespace

TEST_CASE("B matrix structure for independent uniform bits") {
  Eigen::VectorXd u = Eigen::VectorXd::Constant(2, 0.5);
  DistributionSet dist = product_distribution({u, u});
  BMatrix b = build_b(dist);
  CHECK(b.m == 4);
  CHECK((b.block(0, 0) - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-15);
  // independence gives B_ij = v_i v_j^T, all entries 0.5 here
  CHECK((b.block(0, 1) - Eigen::MatrixXd::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((b.dense - b.dense.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("zero marginal entry is rejected") {
  // hand-built degenerate distribution: symbol 1 of X_1 never occurs
  Eigen::VectorXd joint(4);
  joint << 0.6, 0.4, 0.0, 0.0;
  DistributionSet dist = DistributionSet::from_joint(
      {numbered_alphabet(2), numbered_alphabet(2)}, FullJoint({2, 2}, joint));
  CHECK_THROWS_AS(build_b(dist), DomainError);
}

TEST_CASE("spectrum of the bits triangle instance") {
  DistributionSet dist = bits_joint(triangle());
  BMatrix b = build_b(dist);
  CHECK(b.m == 12);
  Spectrum spec = eigendecompose(b);
  Eigen::VectorXd expected(12);
  expected << 3, 2, 2, 2, 1, 1, 1, 0, 0, 0, 0, 0;
  CHECK((spec.eigenvalues - expected).cwiseAbs().maxCoeff() <= 1e-9);

  BMatrix bt = build_b_tilde(b, dist);
  Spectrum spec_t = eigendecompose(bt);
  CHECK(spec_t.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("largest eigenvalue is d with the sqrt-marginal eigenvector") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    DistributionSet dist = random_joint(random_dims(rng, 2, 4, 2, 5), 1000 + trial);
    Spectrum spec = eigendecompose(build_b(dist));
    CHECK(spec.eigenvalues[0] == doctest::Approx(dist.d()).epsilon(1e-9));
    // exactly d-1 trailing eigenvalues below 1e-9
    int zeros = 0;
    for (int i = 0; i < spec.m(); ++i)
      if (spec.eigenvalues[i] < 1e-9) ++zeros;
    CHECK(zeros == dist.d() - 1);
  }
}

TEST_CASE("b_tilde removes the top component") {
  DistributionSet dist = random_joint({3, 4, 2}, 5);
  BMatrix b = build_b(dist);
  BMatrix bt = build_b_tilde(b, dist);
  Spectrum sb = eigendecompose(b);
  Spectrum st = eigendecompose(bt);
  // top eigenvalue of BTilde equals lambda^(1) of B
  CHECK(st.eigenvalues[0] == doctest::Approx(sb.eigenvalues[1]).epsilon(1e-10));
  // psi^(0) lies in the null space of BTilde
  CHECK((bt.dense * sb.eigenvectors.col(0)).norm() <= 1e-9);
}

TEST_CASE("pairwise independent variables give unit spectral radius for b_tilde") {
  DistributionSet dist = xor_triple();
  BMatrix bt = build_b_tilde(build_b(dist), dist);
  Spectrum st = eigendecompose(bt);
  CHECK(st.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("dsbs second eigenvalue is 1 + (1 - 2p)") {
  // 2x2 block oracle: singular values of B_12 are 1 and 1-2p
  for (double p : {0.05, 0.1, 0.25}) {
    Spectrum spec = eigendecompose(build_b(dsbs(p)));
    CHECK(spec.eigenvalues[1] == doctest::Approx(1.0 + (1.0 - 2.0 * p)).epsilon(1e-12));
  }
}

TEST_CASE("eigendecomposition reconstruction and orthonormality") {
  DistributionSet dist = random_joint({4, 3, 3}, 21);
  BMatrix b = build_b(dist);
  Spectrum spec = eigendecompose(b);
  const Eigen::MatrixXd recon = spec.eigenvectors * spec.eigenvalues.asDiagonal() *
                                spec.eigenvectors.transpose();
  CHECK((recon - b.dense).norm() <= 1e-8 * b.dense.norm());
  CHECK((spec.eigenvectors.transpose() * spec.eigenvectors -
         Eigen::MatrixXd::Identity(b.m, b.m)).norm() <= 1e-9);
  // deterministic sign convention
  for (int c = 0; c < spec.m(); ++c) {
    int arg = 0;
    spec.eigenvectors.col(c).cwiseAbs().maxCoeff(&arg);
    CHECK(spec.eigenvectors(arg, c) > 0.0);
  }
}

TEST_CASE("dense cap raises capacity error") {
  DistributionSet dist = random_joint({3, 3}, 3);
  CHECK_THROWS_AS(eigendecompose(build_b(dist), 5), CapacityError);
}

TEST_CASE("lemma1 checks pass on random dirichlet joints") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    DistributionSet dist = random_joint(random_dims(rng, 2, 4, 2, 5), 5000 + trial);
    BMatrix b = build_b(dist);
    Spectrum spec = eigendecompose(b);
    Lemma1Report rep = check_lemma1(b, spec, dist);
    CAPTURE(trial);
    CHECK(rep.all_pass());
    CHECK(!rep.degenerate_kernel);
  }
}

TEST_CASE("lemma1 on the degenerate bits triangle") {
  DistributionSet dist = bits_joint(triangle());
  BMatrix b = build_b(dist);
  Spectrum spec = eigendecompose(b);
  Lemma1Report rep = check_lemma1(b, spec, dist);
  CHECK(rep.all_pass());
  CHECK(rep.degenerate_kernel);  // five exact zeros, flagged not failed
  CHECK(spec.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("lemma1 check 3 is tight for product distributions") {
  Eigen::VectorXd p(3), q(2), r(4);
  p << 0.2, 0.3, 0.5;
  q << 0.6, 0.4;
  r << 0.1, 0.2, 0.3, 0.4;
  DistributionSet dist = product_distribution({p, q, r});
  Spectrum spec = eigendecompose(build_b(dist));
  CHECK(spec.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-9));
  Lemma1Report rep = check_lemma1(build_b(dist), spec, dist);
  CHECK(rep.all_pass());
}

TEST_CASE("features from spectrum: normalization invariants") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    DistributionSet dist = random_joint(random_dims(rng, 2, 4, 2, 5), 300 + trial);
    Spectrum spec = eigendecompose(build_b(dist));
    int m = spec.m();
    const int k = std::min(3, m - dist.d());
    FeatureSet fs = features_from_spectrum(spec, dist, k);
    // zero mean under the marginals
    CHECK(feature_means(fs, dist).cwiseAbs().maxCoeff() <= 1e-8);
    // joint orthonormality
    CHECK((feature_gram(fs, dist) - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() <=
          1e-6);
  }
}

TEST_CASE("feature k range is validated") {
  DistributionSet dist = dsbs(0.1);
  Spectrum spec = eigendecompose(build_b(dist));
  CHECK_THROWS_AS(features_from_spectrum(spec, dist, 3), DomainError);  // m - d = 2
  CHECK_NOTHROW(features_from_spectrum(spec, dist, 2));
}

TEST_CASE("dsbs features are the sign functions over sqrt(2)") {
  DistributionSet dist = dsbs(0.1);
  Spectrum spec = eigendecompose(build_b(dist));
  FeatureSet fs = features_from_spectrum(spec, dist, 1);
  const double a = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(fs.tables[i](0, 0)) == doctest::Approx(a).epsilon(1e-10));
    CHECK(std::abs(fs.tables[i](1, 0)) == doctest::Approx(a).epsilon(1e-10));
    CHECK(fs.tables[i](0, 0) * fs.tables[i](1, 0) < 0);
  }
  // the two variables' features are aligned for positive correlation
  CHECK(fs.tables[0](0, 0) * fs.tables[1](0, 0) > 0);
}

TEST_CASE("quadratic form identity: features recover eigenvalues") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    DistributionSet dist = random_joint(random_dims(rng, 2, 4, 2, 5), 900 + trial);
    BMatrix b = build_b(dist);
    Spectrum spec = eigendecompose(b);
    int m = spec.m();
    const int k = std::min(3, m - dist.d());
    FeatureSet fs = features_from_spectrum(spec, dist, k);
    // sum_i sum_j E[f_i^(l) f_j^(l)] = lambda^(l), all ordered pairs including i = j
    for (int ell = 0; ell < k; ++ell) {
      double total = 0.0;
      for (int i = 0; i < dist.d(); ++i)
        for (int j = 0; j < dist.d(); ++j)
          total += (fs.tables[i].col(ell).transpose() * dist.pairwise(i, j) *
                    fs.tables[j].col(ell))(0, 0);
      CHECK(total == doctest::Approx(spec.eigenvalues[ell + 1]).epsilon(1e-6));
    }
  }
}

TEST_CASE("rayleigh quotient of constrained unit vectors") {
  // psi^T B psi = 1 + E[sum_{i != j} f_i f_j] for unit psi with psi_i orthogonal to v_i
  std::mt19937_64 rng(31);
  DistributionSet dist = random_joint({3, 4, 2}, 6);
  BMatrix b = build_b(dist);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::VectorXd psi(b.m);
    for (int i = 0; i < b.m; ++i) psi[i] = gauss(rng);
    // project each subvector orthogonal to v_i
    for (int i = 0; i < dist.d(); ++i) {
      Eigen::VectorXd v = dist.marginal(i).cwiseSqrt();
      auto seg = psi.segment(b.offsets[i], b.dims[i]);
      seg -= v * v.dot(seg);
    }
    psi /= psi.norm();
    const double lhs = psi.transpose() * b.dense * psi;
    double cross = 0.0;
    for (int i = 0; i < dist.d(); ++i)
      for (int j = 0; j < dist.d(); ++j) {
        if (i == j) continue;
        const Eigen::VectorXd fi =
            psi.segment(b.offsets[i], b.dims[i]).cwiseQuotient(dist.marginal(i).cwiseSqrt());
        const Eigen::VectorXd fj =
            psi.segment(b.offsets[j], b.dims[j]).cwiseQuotient(dist.marginal(j).cwiseSqrt());
        cross += fi.transpose() * dist.pairwise(i, j) * fj;
      }
    CHECK(lhs == doctest::Approx(1.0 + cross).epsilon(1e-10));
  }
}

TEST_CASE("feature set json round trip is exact") {
  DistributionSet dist = random_joint({3, 2, 4}, 654);
  Spectrum spec = eigendecompose(build_b(dist));
  FeatureSet fs = features_from_spectrum(spec, dist, 2);
  json j = feature_set_to_json(fs, dist.alphabets());
  // through text and back: doubles survive exactly
  json reparsed = json::parse(j.dump());
  std::vector<Alphabet> alphabets;
  FeatureSet back = feature_set_from_json(reparsed, &alphabets);
  REQUIRE(back.k == fs.k);
  for (int i = 0; i < fs.d(); ++i)
    CHECK((back.tables[i] - fs.tables[i]).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < dist.d(); ++i)
    CHECK(alphabets[i].symbols() == dist.alphabet(i).symbols());
  CHECK((*back.eigenvalues_hint - *fs.eigenvalues_hint).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("degenerate eigenspaces compared by projector distance") {
  DistributionSet dist = bits_joint(triangle());
  Spectrum spec = eigendecompose(build_b(dist));
  // numeric eigenvectors 1..3 against analytic features for the three singleton subsets
  Eigen::MatrixXd numeric = spec.eigenvectors.middleCols(1, 3);
  Eigen::MatrixXd analytic(spec.m(), 3);
  for (int ell = 1; ell <= 3; ++ell) {
    FeatureSet col = bits_features(triangle(), ell);
    analytic.col(ell - 1) = features_to_psi(col, dist);
  }
  CHECK(projector_distance(numeric, analytic) <= 1e-9);
}
