#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pdenet/analysis.hpp"
#include "pdenet/dictionary.hpp"
#include "pdenet/null_space.hpp"
#include "pdenet/random.hpp"

using namespace pdenet;

namespace {

const std::vector<std::string> kXT{"x", "t"};

const Factor& only_factor(const Term& t) {
  EXPECT_EQ(t.factors.size(), 1u);
  return t.factors.front();
}

}  // namespace

TEST(Parse, SecondTimeDerivative) {
  const Term t = parse_term(kXT, "u_tt");
  const Factor& f = only_factor(t);
  EXPECT_EQ(f.kind, Factor::Kind::Derivative);
  EXPECT_EQ(f.alpha, (MultiIndex{0, 2}));
  EXPECT_EQ(f.exponent, 1);
}

TEST(Parse, JuxtaposedProduct) {
  const Term t = parse_term(kXT, "uu_x");
  ASSERT_EQ(t.factors.size(), 2u);
  EXPECT_EQ(t.factors[0].alpha, (MultiIndex{0, 0}));
  EXPECT_EQ(t.factors[1].alpha, (MultiIndex{1, 0}));
  EXPECT_EQ(render_term(t, kXT), "u*u_x");
}

TEST(Parse, CoordinateTimesDerivative) {
  const std::vector<std::string> vars{"x", "y", "t"};
  const Term t = parse_term(vars, "x u_y");
  ASSERT_EQ(t.factors.size(), 2u);
  EXPECT_EQ(t.factors[0].kind, Factor::Kind::Coordinate);
  EXPECT_EQ(t.factors[0].coordinate, 0);
  EXPECT_EQ(t.factors[1].alpha, (MultiIndex{0, 1, 0}));
}

TEST(Parse, PowersAndCanonicalMerge) {
  EXPECT_EQ(parse_term(kXT, "u*u"), parse_term(kXT, "u^2"));
  EXPECT_EQ(render_term(parse_term(kXT, "u_x^2"), kXT), "u_x^2");
  EXPECT_EQ(parse_term(kXT, "u_{xx}"), parse_term(kXT, "u_xx"));
  EXPECT_EQ(parse_term(kXT, "u_xt"), parse_term(kXT, "u_tx"));
  const std::vector<std::string> v{"x0", "x1"};
  EXPECT_EQ(only_factor(parse_term(v, "u_x0x1")).alpha, (MultiIndex{1, 1}));
}

TEST(Parse, Errors) {
  EXPECT_THROW(parse_term(kXT, "u_xxxx"), DictionaryError);
  EXPECT_THROW(parse_term(kXT, "u_z"), DictionaryError);
  EXPECT_THROW(parse_term(kXT, ""), DictionaryError);
  EXPECT_THROW(parse_term(kXT, "u^0"), DictionaryError);
  EXPECT_THROW(parse_dictionary(kXT, "u_x, u_x"), DictionaryError);
  EXPECT_THROW(parse_dictionary(kXT, "u*u, u^2"), DictionaryError);
  EXPECT_THROW(parse_dictionary(kXT, "u_x"), DictionaryError);
  EXPECT_THROW(parse_dictionary(kXT, "u_x, , u"), DictionaryError);
  EXPECT_THROW(parse_dictionary({"x", "x"}, "u_x, u"), DictionaryError);
}

TEST(Dictionary, RequiredOrder) {
  EXPECT_EQ(required_order(parse_dictionary(kXT, "u_tt, u_xx, u_t, u_x, u, u^2, uu_x, uu_t")), 2);
  EXPECT_EQ(required_order(parse_dictionary(kXT, "u_xxx, u_tt, u_xx, u_t, u_x, u, uu_x, u_x^2")), 3);
  EXPECT_EQ(required_order(parse_dictionary(kXT, "u, u^2")), 0);
}

TEST(Dictionary, EvaluateTermExamples) {
  const auto s = MultiIndexSet::full(2, 1);
  Jet j(s);
  j[0] = 3.0;
  const std::vector<double> x{0.0, 0.0};
  EXPECT_EQ(evaluate_term(parse_term(kXT, "u^2"), x, j), 9.0);
  j[0] = 2.0;
  j[s->position({1, 0})] = 5.0;
  EXPECT_EQ(evaluate_term(parse_term(kXT, "uu_x"), x, j), 10.0);

  const std::vector<std::string> xy{"x", "y"};
  Jet k(s);
  k[s->position({0, 1})] = 4.0;
  EXPECT_EQ(evaluate_term(parse_term(xy, "x u_y"), std::vector<double>{0.5, 2.0}, k), 2.0);
}

// x*u_y on the polynomial u = x^2 y + y^3 against its hand-derived value.
TEST(Dictionary, EvaluateTermOnPolynomial) {
  const std::vector<std::string> xy{"x", "y"};
  const auto s = MultiIndexSet::full(2, 3);
  const double x = 0.7, y = -1.2;
  const Jet X = Jet::variable(s, x, 0), Y = Jet::variable(s, y, 1);
  const Jet u = X * X * Y + Y * Y * Y;
  const double expected = x * (x * x + 3 * y * y);
  EXPECT_NEAR(evaluate_term(parse_term(xy, "x u_y"), std::vector<double>{x, y}, u), expected, 1e-14);
  EXPECT_NEAR(evaluate_term(parse_term(xy, "u_xxy"), std::vector<double>{x, y}, u), 2.0, 1e-14);
}

TEST(FeatureMatrix, WaveOracleIsInTheNullSpace) {
  const DictionarySpec spec = parse_dictionary(kXT, "u_tt, u_xx, u_t, u_x, u, u^2, uu_x, uu_t");
  const auto set = MultiIndexSet::full(2, 2);
  Rng rng(21);
  const int K = 200;
  Matrix pts(2, K);
  std::vector<Jet> jets;
  for (int k = 0; k < K; ++k) {
    pts(0, k) = rng.uniform(0, 6.28);
    pts(1, k) = rng.uniform(0, 6.28);
    jets.push_back(sin(Jet::variable(set, pts(0, k), 0) - Jet::variable(set, pts(1, k), 1)));
  }
  const Matrix d = feature_matrix(spec, pts, jets);
  ASSERT_EQ(d.rows(), K);
  ASSERT_EQ(d.cols(), 8);
  Vector phi = Vector::Zero(8);
  phi(0) = 1.0, phi(1) = -1.0;
  EXPECT_LT((d * phi).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FeatureMatrix, ConstantSolution) {
  const std::vector<std::string> v{"x"};
  const DictionarySpec spec = parse_dictionary(v, "u, u_x");
  const auto s = MultiIndexSet::full(1, 1);
  const Matrix pts = Matrix::Random(1, 4);
  const std::vector<Jet> jets(4, Jet::constant(s, 2.5));
  const Matrix d = feature_matrix(spec, pts, jets);
  EXPECT_TRUE((d.col(0).array() == 2.5).all());
  EXPECT_TRUE((d.col(1).array() == 0.0).all());
}

TEST(FeatureMatrix, Preconditions) {
  const DictionarySpec spec = parse_dictionary(kXT, "u, u_x, u_t");
  const auto s = MultiIndexSet::full(2, 1);
  const Matrix pts = Matrix::Zero(2, 2);
  EXPECT_THROW(feature_matrix(spec, pts, std::vector<Jet>(2, Jet::constant(s, 1.0))), DictionaryError);

  Matrix pts3 = Matrix::Zero(2, 3);
  pts3(0, 1) = 0.25;
  std::vector<Jet> jets(3, Jet::constant(s, 1.0));
  jets[1][0] = std::numeric_limits<double>::infinity();
  try {
    feature_matrix(spec, pts3, jets);
    FAIL() << "expected a DictionaryError";
  } catch (const DictionaryError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("non-finite"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(0.25, 0)"), std::string::npos) << msg;
  }
}

TEST(FeatureMatrix, SquareTermScalesQuadratically) {
  const DictionarySpec spec = parse_dictionary(kXT, "u^2, u_x");
  const auto s = MultiIndexSet::full(2, 1);
  Rng rng(2);
  const Matrix pts = Matrix::Zero(2, 5);
  std::vector<Jet> jets, scaled;
  const double c = -1.7;
  for (int k = 0; k < 5; ++k) {
    Jet j(s);
    for (std::size_t i = 0; i < j.size(); ++i) j[i] = rng.uniform(-1, 1);
    jets.push_back(j);
    scaled.push_back(c * j);
  }
  const Matrix a = feature_matrix(spec, pts, jets), b = feature_matrix(spec, pts, scaled);
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(b(k, 0), c * c * a(k, 0), 1e-14);
}

TEST(NullSpace, RankDeficientExample) {
  Matrix m(2, 2);
  m << 1, 0, 0, 0;
  const SingularPair p = smallest_singular_vector(m);
  EXPECT_NEAR(p.sigma_min, 0.0, 1e-15);
  EXPECT_NEAR(p.vector(0), 0.0, 1e-15);
  EXPECT_NEAR(p.vector(1), 1.0, 1e-15);
  EXPECT_NEAR(p.gap, 1.0, 1e-15);
}

TEST(NullSpace, IdentityTieBreaksToFirstAxis) {
  const SingularPair p = smallest_singular_vector(Matrix::Identity(3, 3));
  EXPECT_NEAR(p.sigma_min, 1.0, 1e-15);
  EXPECT_NEAR(p.gap, 0.0, 1e-15);
  EXPECT_EQ(p.vector(0), 1.0);
  EXPECT_EQ(p.vector(1), 0.0);
  EXPECT_EQ(p.vector(2), 0.0);
}

TEST(NullSpace, PlantedNullVector) {
  Rng rng(99);
  Matrix m(50, 5);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.normal();
  Vector w(5);
  for (Eigen::Index i = 0; i < 5; ++i) w(i) = rng.normal();
  w.normalize();
  m -= (m * w) * w.transpose();  // rows orthogonal to w
  const SingularPair p = smallest_singular_vector(m);
  EXPECT_LT(recovery_error(p.vector, w), 1e-10);
  EXPECT_NEAR((m * p.vector).norm(), p.sigma_min, 1e-10);
  EXPECT_NEAR(p.vector.norm(), 1.0, 1e-14);

  // Brute force over random unit vectors can never beat the returned minimum.
  double best = std::numeric_limits<double>::infinity();
  Vector v(5);
  for (int trial = 0; trial < 1000000; ++trial) {
    for (Eigen::Index i = 0; i < 5; ++i) v(i) = rng.normal();
    best = std::min(best, (m * v).norm() / v.norm());
  }
  EXPECT_LE(p.sigma_min, best + 1e-12);
}

TEST(NullSpace, ResidualNormEqualsSigmaMin) {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix m(30, 8);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform(-1, 1);
    const SingularPair p = smallest_singular_vector(m);
    EXPECT_NEAR((m * p.vector).norm(), p.sigma_min, 1e-10);
    const Eigen::JacobiSVD<Matrix> svd(m);
    EXPECT_NEAR(p.sigma_min, svd.singularValues()(7), 1e-10);
    EXPECT_NEAR(p.gap, svd.singularValues()(6) - svd.singularValues()(7), 1e-9);
    // Sign convention: first component above the noise floor is positive.
    Eigen::Index first = 0;
    while (std::abs(p.vector(first)) <= 1e-10) ++first;
    EXPECT_GT(p.vector(first), 0.0);
  }
}

TEST(NullSpace, RowPermutationInvariance) {
  Rng rng(14);
  Matrix m(40, 6);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.normal();
  std::vector<int> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[3], perm[17]);
  Matrix pm(40, 6);
  for (int i = 0; i < 40; ++i) pm.row(i) = m.row(perm[static_cast<std::size_t>(i)]);
  const SingularPair a = smallest_singular_vector(m), b = smallest_singular_vector(pm);
  EXPECT_LT((a.vector - b.vector).norm(), 1e-10);
}

TEST(NullSpace, JacobiReconstructs) {
  Rng rng(8);
  Matrix a(6, 6);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.uniform(-1, 1);
  const Matrix s = a + a.transpose();
  const SymmetricEigen e = jacobi_eigen(s);
  const Matrix rebuilt = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  EXPECT_LT((rebuilt - s).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((e.vectors.transpose() * e.vectors - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_THROW(smallest_singular_vector(Matrix::Zero(2, 3)), std::invalid_argument);
}
