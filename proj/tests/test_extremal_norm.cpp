#include "oracles.hpp"

#include "jsr/extremal_norm.hpp"
#include "jsr/linprog.hpp"
#include "jsr/spectral_bounds.hpp"

#include <doctest.h>

using namespace jsr;
using oracle::kPhi;

namespace {

// Gauge of the symmetric convex hull of 2-D points: max over hull edges of
// <n, x> / <n, p>, with the hull from Andrew's monotone chain.
double gauge_2d(std::vector<Eigen::Vector2d> pts, const Eigen::Vector2d& x) {
  const std::size_t m = pts.size();
  for (std::size_t i = 0; i < m; ++i) pts.push_back(-pts[i]);
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
  };
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  double g = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Eigen::Vector2d a = hull[i], b = hull[(i + 1) % hull.size()];
    const Eigen::Vector2d n(b.y() - a.y(), a.x() - b.x());  // outward for a ccw hull
    g = std::max(g, n.dot(x) / n.dot(a));
  }
  return g;
}

NormCertificate cross_polytope(int d) {
  std::vector<Eigen::RowVectorXd> vs;
  for (int i = 0; i < d; ++i) vs.push_back(Eigen::RowVectorXd::Unit(d, i));
  return NormCertificate::polytope(vs);
}

}  // namespace

TEST_CASE("linear programs") {
  // min x + y  s.t.  x - y = 1, x, y >= 0  ->  1 at (1, 0)
  Eigen::MatrixXd A(1, 2);
  A << 1, -1;
  Eigen::VectorXd b(1), c(2);
  b << 1;
  c << 1, 1;
  auto r = lp::solve_standard_form(A, b, c);
  CHECK(r.status == lp::Status::optimal);
  CHECK(r.objective == doctest::Approx(1.0));
  // x + y = -1 has no nonnegative solution.
  A << 1, 1;
  b << -1;
  CHECK(lp::solve_standard_form(A, b, c).status == lp::Status::infeasible);
  // min -x  s.t.  x - y = 0 is unbounded.
  A << 1, -1;
  b << 0;
  c << -1, 0;
  CHECK(lp::solve_standard_form(A, b, c).status == lp::Status::unbounded);
}

TEST_CASE("polytope gauges") {
  const NormCertificate l1 = cross_polytope(3);
  Eigen::RowVectorXd x(3);
  x << 0.5, -2.0, 1.0;
  CHECK(norm_value(l1, x) == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(norm_value(l1, Eigen::RowVectorXd(Eigen::RowVectorXd::Zero(3))) == 0.0);

  // Degenerate vertex sets do not define a norm.
  CHECK_THROWS_AS(validate_norm(NormCertificate::polytope({Eigen::RowVectorXd::Unit(2, 0)})), ValidationError);
  NormCertificate flat = NormCertificate::polytope({Eigen::RowVectorXd::Unit(2, 0)});
  CHECK(std::isinf(norm_value(flat, Eigen::RowVectorXd(Eigen::RowVectorXd::Unit(2, 1)))));

  const RowVector cx = RowVector::Constant(3, Complex(0.0, 1.0));
  CHECK_THROWS_AS(norm_value(l1, cx), UnsupportedError);
  CHECK(norm_value(NormCertificate::euclidean(3), cx) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("property: induced l1 norm is the largest absolute row sum") {
  oracle::Gen gen(41);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = gen.integer(1, 4);
    const Matrix a = gen.real(d);
    // x -> x A with the l1 norm: max_i sum_j |a_ij|.
    const double oracle_value = a.real().cwiseAbs().rowwise().sum().maxCoeff();
    CHECK(induced_norm(cross_polytope(d), a) == doctest::Approx(oracle_value).epsilon(1e-10));
  }
}

TEST_CASE("property: 2-D gauges agree with the convex hull oracle") {
  oracle::Gen gen(42);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Eigen::RowVectorXd> vs;
    std::vector<Eigen::Vector2d> pts;
    for (int i = gen.integer(2, 6); i > 0; --i) {
      Eigen::Vector2d p(gen.uniform(), gen.uniform());
      pts.push_back(p);
      vs.push_back(p.transpose());
    }
    const NormCertificate n = NormCertificate::polytope(vs);
    const Eigen::Vector2d x(gen.uniform(-3, 3), gen.uniform(-3, 3));
    CHECK(norm_value(n, Eigen::RowVectorXd(x.transpose())) == doctest::Approx(gauge_2d(pts, x)).epsilon(1e-9));
  }
}

TEST_CASE("euclidean extremality") {
  const auto g = check_extremal_norm(oracle::golden_pair(), NormCertificate::euclidean(2), kPhi);
  CHECK(g.extremal);
  CHECK(g.attained == doctest::Approx(kPhi).epsilon(1e-13));

  Eigen::Matrix2d a;
  a << 1, 1, 0, 1;
  const auto s = check_extremal_norm(oracle::shear(), NormCertificate::euclidean(2), 1.0, 1.0);
  CHECK_FALSE(s.extremal);
  CHECK(s.attained == doctest::Approx(oracle::singular_max_2x2(a)).epsilon(1e-13));
  CHECK(s.gap == doctest::Approx(kPhi - 1.0).epsilon(1e-12));
  CHECK(s.sound);
  CHECK_THROWS_AS(check_extremal_norm(oracle::shear(), NormCertificate::euclidean(3), 1.0), ValidationError);
}

TEST_CASE("boundedness probe") {
  const MatrixFamily rot{jsr::real_matrix({{0, -1}, {1, 0}}), jsr::real_matrix({{0.6, -0.8}, {0.8, 0.6}})};
  CHECK(boundedness_probe(rot, 12).verdict == Boundedness::bounded_likely);

  const ProbeResult sh = boundedness_probe(oracle::shear(), 64);
  CHECK(sh.verdict == Boundedness::inconclusive);
  CHECK(sh.running_max.back() == doctest::Approx(std::sqrt(1.0 + 64.0 * 64.0 / 4.0) + 32.0).epsilon(1e-9));

  const ProbeResult big = boundedness_probe(MatrixFamily{Matrix(2.0 * Matrix::Identity(2, 2))}, 100);
  CHECK(big.verdict == Boundedness::unbounded);
  CHECK(big.witness == Word(std::vector<int>(20, 1)));

  const ProbeResult big2 = boundedness_probe(oracle::golden_pair().scaled(2.0), 40);
  CHECK(big2.verdict == Boundedness::unbounded);
  CHECK(big2.max_norm > 1e6);
}

TEST_CASE("golden pair certification") {
  const FinitenessCertificate c = certify_finiteness(oracle::golden_pair(), Word{1, 2});
  CHECK(c.verdict == FinitenessVerdict::certified);
  CHECK(c.value == doctest::Approx(kPhi).epsilon(1e-12));
  CHECK(c.upper() <= kPhi * (1 + 1e-9));
  CHECK(c.certificate.status == CertificateStatus::verified);
  CHECK(c.seed_rotation == Word{1, 2});
  if (c.certificate.kind == NormCertificate::Kind::polytope) {
    // Independent check of invariance with the convex hull oracle.
    std::vector<Eigen::Vector2d> pts;
    for (const auto& v : c.certificate.vertices) pts.emplace_back(v(0), v(1));
    for (const Matrix& s : oracle::golden_pair())
      for (const auto& p : pts) {
        const Eigen::Vector2d img = (p.transpose() * s.real() / kPhi).transpose();
        CHECK(gauge_2d(pts, img) <= 1.0 + 1e-9);
      }
  }
}

TEST_CASE("certification outcomes") {
  const MatrixFamily diag{jsr::real_matrix({{0.5, 0}, {0, 0.25}}), jsr::real_matrix({{0.25, 0}, {0, 0.5}})};
  const auto d = certify_finiteness(diag, Word{1});
  CHECK(d.verdict == FinitenessVerdict::certified);
  CHECK(d.upper() == doctest::Approx(0.5).epsilon(1e-12));

  const auto s = certify_finiteness(oracle::shear(), Word{1});
  CHECK(s.verdict == FinitenessVerdict::inconclusive);
  CHECK(s.reason.find("not simple") != std::string::npos);

  const auto r = certify_finiteness(MatrixFamily{jsr::real_matrix({{0, -1}, {1, 0}})}, Word{1});
  CHECK(r.verdict == FinitenessVerdict::certified);
  CHECK(r.certificate.kind == NormCertificate::Kind::euclidean);

  // Word (1) of the golden pair is not spectrum maximizing.
  const auto bad = certify_finiteness(oracle::golden_pair(), Word{1});
  CHECK(bad.verdict == FinitenessVerdict::inconclusive);

  CertifyOptions tiny;
  tiny.vertex_budget = 2;
  const MatrixFamily g2{oracle::golden_a(), Matrix(oracle::golden_b() * 0.9)};
  CHECK(certify_finiteness(g2, Word{1, 2}, tiny).verdict == FinitenessVerdict::inconclusive);

  Matrix cz = Matrix::Identity(2, 2);
  cz(0, 1) = Complex(0, 1);
  CHECK_THROWS_AS(certify_finiteness(MatrixFamily{cz}, Word{1}), UnsupportedError);
  CHECK_THROWS_AS(certify_finiteness(oracle::golden_pair(), Word{}), ValidationError);
  CHECK_THROWS_AS(certify_finiteness(oracle::golden_pair(), Word{3}), std::out_of_range);
}

TEST_CASE("property: certified values are consistent with exhaustive brackets") {
  oracle::Gen gen(43);
  int certified = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixFamily f = gen.real_family(2, 2);
    const BoundsBracket b = exhaustive_bracket(f, 8);
    CertifyOptions o;
    o.vertex_budget = 300;
    const FinitenessCertificate c = certify_finiteness(f, b.best_word, o);
    if (c.verdict != FinitenessVerdict::certified) continue;
    ++certified;
    CAPTURE(trial);
    CHECK(c.value == doctest::Approx(b.lower).epsilon(1e-10));
    CHECK(c.upper() <= b.upper * (1 + 1e-10));
    const NormCheck nc = check_extremal_norm(f, c.certificate, c.value);
    CHECK(nc.attained <= c.upper() * (1 + 1e-8));
  }
  CHECK(certified >= 5);
}
