#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "buchirank/buchi.hpp"
#include "buchirank/product.hpp"
#include "buchirank/program.hpp"
#include "buchirank/witness.hpp"

using namespace buchirank;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  EXPECT_TRUE(in.good()) << path;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SquaringSetup {
  TransitionSystem ts;
  ProductSystem prod;
  int li, a1, a2, a3, at_, b1;
};

SquaringSetup squaring_setup() {
  SquaringSetup s;
  s.ts = parse_program(read_file(std::string(BR_BENCH_DIR) + "/fig1.brp"));
  Nbw aut = parse_hoa(read_file(std::string(BR_BENCH_DIR) + "/gf_at_l2.hoa"), s.ts);
  s.prod = build_product(s.ts, aut);
  auto id = [&](const char* loc, int q) {
    int v = s.prod.find(*s.ts.find_location(loc), q);
    EXPECT_GE(v, 0) << loc;
    return v;
  };
  s.li = id("l_init", 0);
  s.a1 = id("l1", 0);
  s.a2 = id("l2", 0);
  s.a3 = id("l3", 0);
  s.at_ = id("l_t", 0);
  s.b1 = id("l1", 1);
  return s;
}

Polynomial poly1(std::vector<Rational> coeffs) {
  Polynomial p(1);
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    p.add_term(Monomial(std::vector<unsigned>{static_cast<unsigned>(i)}), coeffs[i]);
  return p;
}

// The hand-made ranking witness for the squaring loop against G F at(l2):
// count down to the next visit of the accepting component.
ConcreteWitness golden_squaring_witness(const SquaringSetup& s) {
  ConcreteWitness w;
  w.universal = false;
  w.degree = 1;
  w.f.assign(s.prod.sys.nlocs(), poly1({rat(-1)}));
  w.f[s.li] = poly1({rat(3), rat(1)});
  w.f[s.a1] = poly1({rat(2), rat(1)});
  w.f[s.a2] = poly1({rat(1), rat(1)});
  w.f[s.b1] = poly1({rat(0)});
  w.init_vals = std::vector<Rational>{rat(0)};
  return w;
}

TEST(Witness, GoldenSquaringWitnessChecks) {
  SquaringSetup s = squaring_setup();
  ConcreteWitness w = golden_squaring_witness(s);
  auto states = box_states(s.prod, -4, 4);
  WitnessCheck rep = check_witness(s.prod, w, states);
  EXPECT_TRUE(rep.ok) << (rep.violations.empty() ? "" : rep.violations[0]);
  EXPECT_GT(rep.checked, 0u);
}

TEST(Witness, PerturbedSquaringWitnessFails) {
  SquaringSetup s = squaring_setup();
  auto states = box_states(s.prod, -4, 4);

  ConcreteWitness w1 = golden_squaring_witness(s);
  w1.f[s.a2] = poly1({rat(0), rat(1)});  // breaks the decrease into (l1,q1)
  EXPECT_FALSE(check_witness(s.prod, w1, states).ok);

  ConcreteWitness w2 = golden_squaring_witness(s);
  w2.init_vals = std::vector<Rational>{rat(-2)};  // violates the precondition
  EXPECT_FALSE(check_witness(s.prod, w2, states).ok);

  ConcreteWitness w3 = golden_squaring_witness(s);
  w3.f[s.b1] = poly1({rat(-5)});  // Büchi location loses nonnegativity
  EXPECT_FALSE(check_witness(s.prod, w3, states).ok);
}

struct CountdownSetup {
  TransitionSystem ts;
  ProductSystem prod;
  int i0, l1, s0, t0, t1;
};

CountdownSetup countdown_setup() {
  CountdownSetup c;
  c.ts = parse_program(
      "l1: while x >= 1 do\n"
      "  x = x - 1\n"
      "done\n");
  Nbw aut = parse_hoa(
      "HOA: v1\n"
      "States: 2\n"
      "Start: 0\n"
      "AP: 1 \"at(l_t)\"\n"
      "acc-name: Buchi\n"
      "Acceptance: 1 Inf(0)\n"
      "--BODY--\n"
      "State: 0\n"
      "[!0] 0\n"
      "[0] 1\n"
      "State: 1 {0}\n"
      "[t] 1\n"
      "--END--\n",
      c.ts);
  c.prod = build_product(c.ts, aut);
  auto id = [&](const char* loc, int q) {
    int v = c.prod.find(*c.ts.find_location(loc), q);
    EXPECT_GE(v, 0) << loc;
    return v;
  };
  c.i0 = id("l_init", 0);
  c.l1 = id("l1", 0);
  c.s0 = id("_s0", 0);
  c.t0 = id("l_t", 0);
  c.t1 = id("l_t", 1);
  return c;
}

ConcreteWitness golden_countdown_witness(const CountdownSetup& c) {
  ConcreteWitness w;
  w.universal = true;
  w.degree = 2;
  w.f.assign(c.prod.sys.nlocs(), poly1({rat(0)}));
  w.f[c.i0] = poly1({rat(3), rat(0), rat(2)});
  w.f[c.l1] = poly1({rat(2), rat(0), rat(2)});
  w.f[c.s0] = poly1({rat(5), rat(-4), rat(2)});
  w.f[c.t0] = poly1({rat(1)});
  w.f[c.t1] = poly1({rat(0)});
  return w;
}

TEST(Witness, GoldenCountdownUniversalWitnessChecks) {
  CountdownSetup c = countdown_setup();
  ASSERT_EQ(c.prod.sys.nlocs(), 5u);
  std::vector<bool> want_b(5, false);
  want_b[c.t1] = true;
  EXPECT_EQ(c.prod.buchi, want_b);

  ConcreteWitness w = golden_countdown_witness(c);
  auto states = box_states(c.prod, -5, 5);
  WitnessCheck rep = check_witness(c.prod, w, states);
  EXPECT_TRUE(rep.ok) << (rep.violations.empty() ? "" : rep.violations[0]);
}

TEST(Witness, PerturbedCountdownWitnessFails) {
  CountdownSetup c = countdown_setup();
  auto states = box_states(c.prod, -5, 5);

  ConcreteWitness w1 = golden_countdown_witness(c);
  w1.f[c.l1] = poly1({rat(1), rat(0), rat(2)});  // exit edge stops decreasing enough
  EXPECT_FALSE(check_witness(c.prod, w1, states).ok);

  ConcreteWitness w2 = golden_countdown_witness(c);
  w2.f[c.i0] = poly1({rat(-1)});  // initial nonnegativity breaks
  EXPECT_FALSE(check_witness(c.prod, w2, states).ok);
}

TEST(Witness, TabularWitnessChecks) {
  SquaringSetup s = squaring_setup();
  // The concrete lasso 1 -> (l3) 0 -> (l2) 1 -> ... visits (l1,q1) forever;
  // values count down to the next Büchi visit.
  ConcreteWitness w;
  w.universal = false;
  auto put = [&](int loc, long x, long v) {
    w.table[State{loc, {rat(x)}}] = rat(v);
  };
  put(s.li, 1, 5);
  put(s.a1, 1, 4);
  put(s.a3, 1, 3);
  put(s.a1, 0, 2);
  put(s.a2, 0, 1);
  put(s.b1, 1, 0);
  std::vector<State> domain;
  for (const auto& [st, v] : w.table) domain.push_back(st);
  WitnessCheck rep = check_witness(s.prod, w, domain);
  EXPECT_TRUE(rep.ok) << (rep.violations.empty() ? "" : rep.violations[0]);

  w.table[State{s.a2, {rat(0)}}] = rat(5);  // (l1,q0)[0] loses its ranked successor
  EXPECT_FALSE(check_witness(s.prod, w, domain).ok);
}

TEST(Witness, EbrfEntailmentGenerationGolden) {
  SquaringSetup s = squaring_setup();
  CoeffPool pool;
  TemplateSet t = fix_templates(s.prod, 2, pool);
  auto ents = gen_ebrf_constraints(s.prod, t);
  EXPECT_EQ(ents.size(), 22u);

  auto with_note = [&](const std::string& frag) {
    std::vector<const EntailmentConstraint*> out;
    for (const auto& e : ents)
      if (e.note.find(frag) != std::string::npos) out.push_back(&e);
    return out;
  };

  // Single transition at (l2,q0): premises are the invariant and f >= 0, and
  // the two conclusions are target nonnegativity and the ranked decrease.
  auto at_l2 = with_note("(l2,q0) chooses");
  ASSERT_EQ(at_l2.size(), 2u);
  Polynomial sq_update = poly1({rat(1), rat(0), rat(1)});
  SymbolicPolynomial f_l2 = t.at(s.a2);
  SymbolicPolynomial f_b1_up = t.at(s.b1).substitute({sq_update});
  ASSERT_EQ(at_l2[0]->lhs.size(), 2u);
  EXPECT_EQ(at_l2[0]->lhs[0], SymbolicPolynomial::from(poly1({rat(0), rat(1)})));
  EXPECT_EQ(at_l2[0]->lhs[1], f_l2);
  EXPECT_EQ(at_l2[0]->rhs, f_b1_up);
  SymbolicPolynomial minus_one(1);
  minus_one.add_term(Monomial(1), CoeffExpr::constant(rat(-1)));
  EXPECT_EQ(at_l2[1]->rhs, f_l2 + minus_one - f_b1_up);

  // At (l1,q0) the guard-failure choices contradict the invariant and are
  // pruned, leaving two rank-failure choices per earlier transition.
  EXPECT_EQ(with_note("(l1,q0) chooses").size(), 12u);

  // The strict exit guard -x0 > 0 lands on the conclusion side with the
  // margin subtracted.
  SymbolicPolynomial eps_guard = SymbolicPolynomial::from(poly1({rat(-1, 1000), rat(-1)}));
  int eps_rhs = 0;
  for (const auto* e : with_note("(l1,q0) chooses"))
    if (e->rhs == eps_guard) ++eps_rhs;
  EXPECT_EQ(eps_rhs, 4);

  // Büchi location (l1,q1) has no decrease conjunct: one failure choice per
  // earlier transition, two conclusions for the final one.
  EXPECT_EQ(with_note("(l1,q1) chooses").size(), 2u);
}

TEST(Witness, UbrfEntailmentGenerationGolden) {
  CountdownSetup c = countdown_setup();
  CoeffPool pool;
  TemplateSet t = fix_templates(c.prod, 2, pool);
  auto ents = gen_ubrf_constraints(c.prod, t);
  EXPECT_EQ(ents.size(), 11u);
  auto init = gen_ubrf_init(c.prod, t);
  ASSERT_EQ(init.size(), 1u);
  EXPECT_TRUE(init[0].lhs.empty());
  EXPECT_EQ(init[0].rhs, t.at(c.prod.sys.init));

  // The guarded loop edge carries its guard as a premise.
  int guarded = 0;
  SymbolicPolynomial guard = SymbolicPolynomial::from(poly1({rat(-1), rat(1)}));
  for (const auto& e : ents)
    for (const auto& p : e.lhs)
      if (p == guard) ++guarded;
  EXPECT_EQ(guarded, 2);
}

TEST(Witness, EbrfInitGroundConstraints) {
  SquaringSetup s = squaring_setup();
  CoeffPool pool;
  TemplateSet t = fix_templates(s.prod, 2, pool);
  auto t_ids = add_init_vars(s.prod, pool);
  ASSERT_EQ(t_ids.size(), 1u);
  EXPECT_EQ(pool.names[t_ids[0]], "t0");
  ASSERT_EQ(count_init_branches(s.prod), 1u);
  auto grounds = gen_ebrf_init(s.prod, t, t_ids, 0);
  ASSERT_EQ(grounds.size(), 2u);
  EXPECT_EQ(grounds[0].expr, CoeffExpr::var(t_ids[0]));
  EXPECT_FALSE(grounds[0].strict);
  CoeffExpr want = CoeffExpr::var(t.coeff_ids[s.li][0]) +
                   CoeffExpr::var(t.coeff_ids[s.li][1]) * CoeffExpr::var(t_ids[0]) +
                   CoeffExpr::var(t.coeff_ids[s.li][2]) * CoeffExpr::var(t_ids[0]) *
                       CoeffExpr::var(t_ids[0]);
  EXPECT_EQ(grounds[1].expr, want);
}

// Every generated entailment must hold pointwise once the templates are
// resolved with a witness that satisfies the ranking conditions.
TEST(Witness, GeneratedEntailmentsHoldForGoldenWitness) {
  SquaringSetup s = squaring_setup();
  CoeffPool pool;
  TemplateSet t = fix_templates(s.prod, 2, pool);
  auto t_ids = add_init_vars(s.prod, pool);
  auto ents = gen_ebrf_constraints(s.prod, t);
  auto grounds = gen_ebrf_init(s.prod, t, t_ids, 0);

  ConcreteWitness w = golden_squaring_witness(s);
  std::vector<Rational> vals(pool.size(), rat(0));
  for (std::size_t l = 0; l < s.prod.sys.nlocs(); ++l)
    for (std::size_t j = 0; j < t.basis.size(); ++j)
      vals[t.coeff_ids[l][j]] = w.f[l].coeff(t.basis[j]);
  vals[t_ids[0]] = rat(0);

  std::mt19937 rng(23);
  std::uniform_int_distribution<int> num(-40, 40);
  std::uniform_int_distribution<int> den(1, 5);
  for (const auto& e : ents) {
    std::vector<Polynomial> lhs;
    for (const auto& p : e.lhs) lhs.push_back(p.instantiate(vals));
    Polynomial rhs = e.rhs.instantiate(vals);
    for (int trial = 0; trial < 400; ++trial) {
      std::vector<Rational> x = {rat(num(rng), den(rng))};
      bool premises = true;
      for (const auto& p : lhs)
        if (p.eval(x) < 0) premises = false;
      if (premises) {
        EXPECT_GE(rhs.eval(x), 0) << e.note << " at x=" << to_string(x[0]);
      }
    }
  }
  for (const auto& g : grounds) {
    Rational v = g.expr.eval(vals);
    EXPECT_TRUE(g.strict ? v > 0 : v >= 0) << g.note;
  }
}

TEST(Witness, JsonRoundTripPolynomial) {
  SquaringSetup s = squaring_setup();
  ConcreteWitness w = golden_squaring_witness(s);
  nlohmann::json j = witness_to_json(s.prod, w);
  ConcreteWitness back = witness_from_json(s.prod, j);
  EXPECT_EQ(back.universal, w.universal);
  ASSERT_EQ(back.f.size(), w.f.size());
  for (std::size_t l = 0; l < w.f.size(); ++l) EXPECT_EQ(back.f[l], w.f[l]);
  ASSERT_TRUE(back.init_vals.has_value());
  EXPECT_EQ(*back.init_vals, *w.init_vals);
  EXPECT_EQ(j["kind"], "polynomial");
  EXPECT_EQ(j["f"]["(l3,q0)"]["0"], "-1");
  EXPECT_TRUE(j["f"]["(l1,q1)"].empty());  // the zero polynomial has no terms
}

TEST(Witness, JsonRoundTripTabular) {
  SquaringSetup s = squaring_setup();
  ConcreteWitness w;
  w.universal = false;
  w.table[State{s.li, {rat(0)}}] = rat(3);
  w.table[State{s.a1, {rat(1, 2)}}] = rat(-7, 3);
  nlohmann::json j = witness_to_json(s.prod, w);
  ConcreteWitness back = witness_from_json(s.prod, j);
  EXPECT_TRUE(back.tabular());
  EXPECT_EQ(back.table, w.table);
}

}  // namespace
