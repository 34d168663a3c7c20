#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "buchirank/polynomial.hpp"
#include "buchirank/rational.hpp"

using namespace buchirank;

namespace {

// Independent count oracle: |M_V^D| = C(n + d, d).
unsigned long long binom(unsigned long long n, unsigned long long k) {
  if (k > n) return 0;
  unsigned long long r = 1;
  for (unsigned long long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<Rational> random_point(std::mt19937& rng, std::size_t n) {
  std::uniform_int_distribution<int> num(-9, 9);
  std::uniform_int_distribution<int> den(1, 5);
  std::vector<Rational> p;
  for (std::size_t i = 0; i < n; ++i) p.push_back(rat(num(rng), den(rng)));
  return p;
}

Polynomial random_poly(std::mt19937& rng, std::size_t n, unsigned d) {
  auto basis = monomial_basis(n, d);
  std::uniform_int_distribution<int> c(-5, 5);
  Polynomial p(n);
  for (const auto& m : basis) p.add_term(m, rat(c(rng)));
  return p;
}

}  // namespace

TEST(Rational, ParseAndPrint) {
  EXPECT_EQ(parse_rational("3/4"), rat(3, 4));
  EXPECT_EQ(parse_rational("-7"), rat(-7));
  EXPECT_EQ(parse_rational("-6/4"), rat(-3, 2));
  EXPECT_EQ(to_string(rat(5)), "5");
  EXPECT_EQ(to_string(rat(-1, 3)), "-1/3");
  EXPECT_THROW(parse_rational("x"), std::invalid_argument);
  EXPECT_THROW(parse_rational(""), std::invalid_argument);
}

TEST(Rational, Rationalize) {
  EXPECT_EQ(rationalize(0.5, 1000), rat(1, 2));
  EXPECT_EQ(rationalize(-0.25, 1000), rat(-1, 4));
  EXPECT_EQ(rationalize(1.0 / 3.0, 100), rat(1, 3));
  EXPECT_EQ(rationalize(3.0, 1), rat(3));
  // classic convergent of pi under a 1000 denominator cap
  EXPECT_EQ(rationalize(3.14159265358979, 1000), rat(355, 113));
}

TEST(Monomial, DegreeAndProduct) {
  Monomial a({2, 0, 1});
  Monomial b({0, 3, 1});
  EXPECT_EQ(a.degree(), 3u);
  Monomial p = a * b;
  EXPECT_EQ(p.exponents, (std::vector<unsigned>{2, 3, 2}));
  EXPECT_EQ(p.degree(), 7u);
}

TEST(Monomial, BasisCountMatchesBinomial) {
  for (std::size_t n = 1; n <= 4; ++n) {
    for (unsigned d = 0; d <= 4; ++d) {
      auto basis = monomial_basis(n, d);
      EXPECT_EQ(basis.size(), binom(n + d, d)) << "n=" << n << " d=" << d;
      for (const auto& m : basis) EXPECT_LE(m.degree(), d);
      for (std::size_t i = 0; i + 1 < basis.size(); ++i)
        EXPECT_TRUE(grlex_less(basis[i], basis[i + 1]));
    }
  }
}

TEST(Monomial, GrlexGoldenOrderTwoVars) {
  auto basis = monomial_basis(2, 2);
  std::vector<std::vector<unsigned>> want = {{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}};
  ASSERT_EQ(basis.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(basis[i].exponents, want[i]);
}

TEST(Polynomial, EvalIsRingHomomorphism) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = 1 + trial % 3;
    Polynomial p = random_poly(rng, n, 2);
    Polynomial q = random_poly(rng, n, 2);
    auto x = random_point(rng, n);
    EXPECT_EQ((p + q).eval(x), p.eval(x) + q.eval(x));
    EXPECT_EQ((p - q).eval(x), p.eval(x) - q.eval(x));
    EXPECT_EQ((p * q).eval(x), p.eval(x) * q.eval(x));
    EXPECT_EQ((-p).eval(x), -p.eval(x));
    EXPECT_EQ((rat(3, 2) * p).eval(x), rat(3, 2) * p.eval(x));
    Rational cube = p.eval(x);
    EXPECT_EQ(p.pow(3).eval(x), cube * cube * cube);
  }
}

TEST(Polynomial, NoZeroTermsStored) {
  Polynomial p(2);
  Monomial m({1, 1});
  p.add_term(m, rat(2));
  p.add_term(m, rat(-2));
  EXPECT_TRUE(p.is_zero());
  EXPECT_EQ(p, Polynomial(2));
  std::mt19937 rng(3);
  Polynomial q = random_poly(rng, 2, 2);
  EXPECT_TRUE((q - q).is_zero());
}

TEST(Polynomial, SubstituteIdentityAndComposition) {
  std::mt19937 rng(11);
  Polynomial p = random_poly(rng, 2, 3);
  EXPECT_EQ(p.substitute(identity_update(2)), p);

  // p(q1, q2) evaluated at a point equals p evaluated at (q1(a), q2(a))
  Polynomial q1 = random_poly(rng, 2, 2);
  Polynomial q2 = random_poly(rng, 2, 2);
  Polynomial comp = p.substitute({q1, q2});
  for (int trial = 0; trial < 10; ++trial) {
    auto a = random_point(rng, 2);
    std::vector<Rational> inner = {q1.eval(a), q2.eval(a)};
    EXPECT_EQ(comp.eval(a), p.eval(inner));
  }
}

TEST(Polynomial, ToStringGolden) {
  std::vector<std::string> names = {"x"};
  Polynomial p(1);
  p.add_term(Monomial(std::vector<unsigned>{2}), rat(2));
  p.add_term(Monomial(std::vector<unsigned>{1}), rat(-1, 2));
  p.add_term(Monomial(std::vector<unsigned>{0}), rat(3));
  EXPECT_EQ(p.to_string(names), "2*x^2 - 1/2*x + 3");

  Polynomial z(1);
  EXPECT_EQ(z.to_string(names), "0");

  Polynomial lead_neg(1);
  lead_neg.add_term(Monomial(std::vector<unsigned>{1}), rat(-1));
  lead_neg.add_term(Monomial(std::vector<unsigned>{0}), rat(1));
  EXPECT_EQ(lead_neg.to_string(names), "-x + 1");

  std::vector<std::string> names2 = {"x0", "x1"};
  Polynomial m(2);
  m.add_term(Monomial({1, 2}), rat(1));
  EXPECT_EQ(m.to_string(names2), "x0*x1^2");
}

TEST(Polynomial, DegreeAndCoeff) {
  Polynomial p(2);
  p.add_term(Monomial({2, 1}), rat(4));
  p.add_term(Monomial({0, 0}), rat(-1));
  EXPECT_EQ(p.degree(), 3u);
  EXPECT_EQ(p.coeff(Monomial({2, 1})), rat(4));
  EXPECT_EQ(p.coeff(Monomial({1, 1})), rat(0));
  EXPECT_EQ(p.constant_value(), rat(-1));
}
