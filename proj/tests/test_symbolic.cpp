#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "buchirank/buchi.hpp"
#include "buchirank/product.hpp"
#include "buchirank/program.hpp"
#include "buchirank/symbolic.hpp"
#include "buchirank/witness.hpp"

using namespace buchirank;

namespace {

Rational random_rat(std::mt19937& rng) {
  std::uniform_int_distribution<int> num(-6, 6);
  std::uniform_int_distribution<int> den(1, 4);
  return rat(num(rng), den(rng));
}

CoeffExpr random_expr(std::mt19937& rng, int nids, int maxterms) {
  std::uniform_int_distribution<int> id(0, nids - 1);
  std::uniform_int_distribution<int> nt(0, maxterms);
  std::uniform_int_distribution<int> shape(0, 2);
  CoeffExpr e;
  int terms = nt(rng);
  for (int t = 0; t < terms; ++t) {
    CMono m;
    switch (shape(rng)) {
      case 0: break;
      case 1: m = {{id(rng), 1}}; break;
      default: {
        int a = id(rng), b = id(rng);
        if (a == b) m = {{a, 2}};
        else m = {{std::min(a, b), 1u}, {std::max(a, b), 1u}};
      }
    }
    e.add_term(m, random_rat(rng));
  }
  return e;
}

std::vector<Rational> random_assignment(std::mt19937& rng, int nids) {
  std::vector<Rational> v;
  for (int i = 0; i < nids; ++i) v.push_back(random_rat(rng));
  return v;
}

TEST(Symbolic, CMonoMulMergesSortedExponents) {
  CMono a = {{0, 1}, {2, 2}};
  CMono b = {{1, 1}, {2, 1}};
  CMono want = {{0, 1}, {1, 1}, {2, 3}};
  EXPECT_EQ(cmono_mul(a, b), want);
  EXPECT_EQ(cmono_mul({}, b), b);
  EXPECT_EQ(cmono_degree(want), 5u);
}

TEST(Symbolic, CoeffExprRingLaws) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    CoeffExpr a = random_expr(rng, 5, 4);
    CoeffExpr b = random_expr(rng, 5, 4);
    CoeffExpr c = random_expr(rng, 5, 4);
    EXPECT_EQ((a + b) * c, a * c + b * c);
    EXPECT_EQ(a * b, b * a);
    auto v = random_assignment(rng, 5);
    EXPECT_EQ((a * b).eval(v), a.eval(v) * b.eval(v));
    EXPECT_EQ((a + b).eval(v), a.eval(v) + b.eval(v));
    EXPECT_EQ((a - b).eval(v), a.eval(v) - b.eval(v));
  }
}

TEST(Symbolic, CoeffExprNoZeroTerms) {
  CoeffExpr a = CoeffExpr::var(0) + CoeffExpr::constant(rat(2));
  CoeffExpr b = CoeffExpr::constant(rat(-2)) - CoeffExpr::var(0);
  EXPECT_TRUE((a + b).is_zero());
  EXPECT_EQ((a + b).degree(), 0u);
}

TEST(Symbolic, CoeffExprToString) {
  CoeffPool pool;
  int x = pool.add("c0");
  int y = pool.add("c1");
  CoeffExpr e = CoeffExpr::var(x) * CoeffExpr::var(y) +
                rat(-1, 2) * CoeffExpr::var(x) + CoeffExpr::constant(rat(3));
  EXPECT_EQ(e.to_string(pool), "3 - 1/2*c0 + c0*c1");
}

SymbolicPolynomial random_sym_poly(std::mt19937& rng, std::size_t nvars, int degree,
                                   int nids) {
  auto basis = monomial_basis(nvars, degree);
  SymbolicPolynomial s(nvars);
  for (const auto& m : basis) s.add_term(m, random_expr(rng, nids, 2));
  return s;
}

Polynomial random_poly(std::mt19937& rng, std::size_t nvars, int degree) {
  auto basis = monomial_basis(nvars, degree);
  Polynomial p(nvars);
  for (const auto& m : basis) p.add_term(m, random_rat(rng));
  return p;
}

TEST(Symbolic, SubstituteCommutesWithInstantiate) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 120; ++trial) {
    SymbolicPolynomial s = random_sym_poly(rng, 2, 2, 4);
    std::vector<Polynomial> update = {random_poly(rng, 2, 2), random_poly(rng, 2, 1)};
    auto assignment = random_assignment(rng, 4);
    Polynomial a = s.substitute(update).instantiate(assignment);
    Polynomial b = s.instantiate(assignment).substitute(update);
    EXPECT_EQ(a, b);
  }
}

TEST(Symbolic, GroundAgreesWithInstantiateAndEval) {
  std::mt19937 rng(13);
  CoeffPool pool;
  for (int i = 0; i < 4; ++i) pool.add("c" + std::to_string(i));
  std::vector<int> t_ids = {pool.add("t0"), pool.add("t1")};
  for (int trial = 0; trial < 120; ++trial) {
    SymbolicPolynomial s = random_sym_poly(rng, 2, 2, 4);
    auto vals = random_assignment(rng, 6);
    CoeffExpr g = s.ground(t_ids);
    Rational direct = g.eval(vals);
    std::vector<Rational> point = {vals[4], vals[5]};
    Rational via_poly = s.instantiate(vals).eval(point);
    EXPECT_EQ(direct, via_poly);
  }
}

TEST(Symbolic, SymbolicProductMatchesEvaluation) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    SymbolicPolynomial a = random_sym_poly(rng, 2, 1, 3);
    SymbolicPolynomial b = random_sym_poly(rng, 2, 1, 3);
    auto assignment = random_assignment(rng, 3);
    EXPECT_EQ((a * b).instantiate(assignment),
              a.instantiate(assignment) * b.instantiate(assignment));
    EXPECT_EQ((a + b).instantiate(assignment),
              a.instantiate(assignment) + b.instantiate(assignment));
  }
}

TEST(Symbolic, TemplateSetShape) {
  TransitionSystem ts = parse_program(
      "pre: x0 >= 0\n"
      "invariant l1: x0 >= 0\n"
      "l1: while x0 >= 0 do\n"
      "  x0 = x0 + 1\n"
      "done\n");
  Nbw aut = translate_ltl(parse_ltl("G F at(l1)", ts), ts);
  ProductSystem prod = build_product(ts, aut);
  CoeffPool pool;
  TemplateSet t = fix_templates(prod, 2, pool);
  ASSERT_EQ(t.basis.size(), 3u);
  EXPECT_EQ(pool.size(), prod.sys.nlocs() * 3);
  EXPECT_EQ(pool.names[0], "c0_0");
  SymbolicPolynomial f0 = t.at(0);
  EXPECT_EQ(f0.terms.size(), 3u);
  // f0 instantiated with coefficients (5, -1, 2) is 5 - x + 2x^2.
  std::vector<Rational> vals(pool.size(), rat(0));
  vals[t.coeff_ids[0][0]] = rat(5);
  vals[t.coeff_ids[0][1]] = rat(-1);
  vals[t.coeff_ids[0][2]] = rat(2);
  Polynomial x = Polynomial::variable(1, 0);
  EXPECT_EQ(f0.instantiate(vals),
            Polynomial::constant(1, rat(5)) + rat(-1) * x + rat(2) * (x * x));
}

}  // namespace
