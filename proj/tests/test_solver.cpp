#include <gtest/gtest.h>
#include <sys/stat.h>

#include <chrono>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "buchirank/buchi.hpp"
#include "buchirank/product.hpp"
#include "buchirank/program.hpp"
#include "buchirank/solver.hpp"

using namespace buchirank;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  EXPECT_TRUE(in.good()) << path;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> qsolve_only() { return {std::string(BR_QSOLVE_BIN)}; }

TEST(Smtlib, RationalForms) {
  EXPECT_EQ(smt_rational(rat(3)), "3");
  EXPECT_EQ(smt_rational(rat(-3)), "(- 3)");
  EXPECT_EQ(smt_rational(rat(1, 2)), "(/ 1 2)");
  EXPECT_EQ(smt_rational(rat(-5, 4)), "(- (/ 5 4))");
  EXPECT_EQ(smt_rational(rat(0)), "0");
}

TEST(Smtlib, TermGolden) {
  CoeffPool pool;
  int a = pool.add("a");
  int b = pool.add("b");
  CoeffExpr e = CoeffExpr::constant(rat(3)) + rat(-1, 2) * CoeffExpr::var(a) +
                CoeffExpr::var(a) * CoeffExpr::var(a) * CoeffExpr::var(b);
  EXPECT_EQ(smt_term(e, pool), "(+ 3 (* (- (/ 1 2)) a) (* a a b))");
  EXPECT_EQ(smt_term(CoeffExpr(), pool), "0");
  EXPECT_EQ(smt_term(CoeffExpr::var(b), pool), "b");
  EXPECT_EQ(smt_term(rat(2) * CoeffExpr::var(b), pool), "(* 2 b)");
}

TEST(Smtlib, EmitGolden) {
  CoeffPool pool;
  int x = pool.add("x");
  int y = pool.add("y");
  QpSystem qp;
  qp.constraints.push_back({CoeffExpr::var(x) + CoeffExpr::var(y) - CoeffExpr::constant(rat(3)),
                            CRel::Eq, "sum"});
  qp.constraints.push_back({CoeffExpr::var(x), CRel::Geq, ""});
  qp.constraints.push_back({CoeffExpr::var(y) - CoeffExpr::constant(rat(1)), CRel::Gt, "gap"});
  std::string expect =
      "(set-logic QF_NRA)\n"
      "(declare-const x Real)\n"
      "(declare-const y Real)\n"
      "; sum\n"
      "(assert (= (+ (- 3) x y) 0))\n"
      "(assert (>= x 0))\n"
      "; gap\n"
      "(assert (> (+ (- 1) y) 0))\n"
      "(check-sat)\n(get-model)\n";
  EXPECT_EQ(emit_smtlib(qp, pool), expect);
}

TEST(Solver, ParseModelForms) {
  CoeffPool pool;
  pool.add("a");
  pool.add("b");
  pool.add("c");
  pool.add("d");
  pool.add("e");
  std::string text =
      "sat\n(\n"
      "  (define-fun a () Real 7)\n"
      "  (define-fun b () Real (- 2))\n"
      "  (define-fun c () Real (/ 1 3))\n"
      "  (define-fun d () Real (- (/ 7 2)))\n"
      "  (define-fun e () Real 1.25)\n"
      "  (define-fun stray () Real 9)\n"
      ")\n";
  auto vals = parse_smt_model(text, pool);
  ASSERT_TRUE(vals.has_value());
  EXPECT_EQ((*vals)[0], rat(7));
  EXPECT_EQ((*vals)[1], rat(-2));
  EXPECT_EQ((*vals)[2], rat(1, 3));
  EXPECT_EQ((*vals)[3], rat(-7, 2));
  EXPECT_EQ((*vals)[4], rat(5, 4));

  EXPECT_FALSE(parse_smt_model("(define-fun a () Real (root-obj x 2))", pool).has_value());
}

TEST(Solver, PortfolioSatAndUnsat) {
  CoeffPool pool;
  int x = pool.add("x");
  QpSystem sat_qp;
  sat_qp.constraints.push_back({CoeffExpr::var(x) - CoeffExpr::constant(rat(2)), CRel::Eq, ""});
  auto r = run_portfolio(emit_smtlib(sat_qp, pool), qsolve_only(), 10000);
  EXPECT_EQ(r.verdict, "sat");
  EXPECT_EQ(r.command, std::string(BR_QSOLVE_BIN));

  QpSystem unsat_qp;
  unsat_qp.constraints.push_back({CoeffExpr::var(x), CRel::Geq, ""});
  unsat_qp.constraints.push_back({rat(-1) * CoeffExpr::var(x) - CoeffExpr::constant(rat(1)),
                                  CRel::Geq, ""});
  r = run_portfolio(emit_smtlib(unsat_qp, pool), qsolve_only(), 10000);
  EXPECT_EQ(r.verdict, "unsat");
}

TEST(Solver, PortfolioDropsFailingCommandAndTimesOut) {
  CoeffPool pool;
  int x = pool.add("x");
  QpSystem qp;
  qp.constraints.push_back({CoeffExpr::var(x), CRel::Geq, ""});

  auto r = run_portfolio(emit_smtlib(qp, pool), {"/bin/false", std::string(BR_QSOLVE_BIN)},
                         10000);
  EXPECT_EQ(r.verdict, "sat");
  EXPECT_EQ(r.command, std::string(BR_QSOLVE_BIN));

  auto start = std::chrono::steady_clock::now();
  r = run_portfolio(emit_smtlib(qp, pool), {"tail -f"}, 400);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count();
  EXPECT_EQ(r.verdict, "");
  EXPECT_LT(ms, 5000);
}

TEST(Solver, SolveQpValidatesModels) {
  CoeffPool pool;
  int x = pool.add("x");
  int y = pool.add("y");
  QpSystem qp;
  qp.constraints.push_back({CoeffExpr::var(x) * CoeffExpr::var(y) - CoeffExpr::constant(rat(6)),
                            CRel::Eq, "product"});
  qp.constraints.push_back({CoeffExpr::var(x) - CoeffExpr::constant(rat(2)), CRel::Eq, ""});
  auto res = solve_qp(qp, pool, qsolve_only(), 10000);
  ASSERT_EQ(res.status, SolveStatus::Sat);
  EXPECT_EQ(res.values[0], rat(2));
  EXPECT_EQ(res.values[1], rat(3));

  QpSystem bad;
  bad.constraints.push_back({CoeffExpr::var(x), CRel::Geq, ""});
  bad.constraints.push_back({rat(-1) * CoeffExpr::var(x) - CoeffExpr::constant(rat(1)),
                             CRel::Geq, ""});
  EXPECT_EQ(solve_qp(bad, pool, qsolve_only(), 10000).status, SolveStatus::Unsat);
}

// A solver that answers sat with a model violating the constraints must be
// caught by the exact recheck and demoted to Unknown.
TEST(Solver, LyingSolverIsRejected) {
  std::string script = "/tmp/buchirank-lying-solver.sh";
  {
    std::ofstream out(script);
    out << "#!/bin/sh\nprintf 'sat\\n(\\n  (define-fun x () Real 5)\\n)\\n'\n";
  }
  ::chmod(script.c_str(), 0755);

  CoeffPool pool;
  int x = pool.add("x");
  QpSystem qp;
  qp.constraints.push_back({CoeffExpr::var(x), CRel::Eq, "x must be zero"});
  auto res = solve_qp(qp, pool, {script}, 5000);
  EXPECT_EQ(res.status, SolveStatus::Unknown);
  std::remove(script.c_str());
}

TEST(Solver, ReconstructWitnessFromValues) {
  TransitionSystem ts = parse_program(read_file(std::string(BR_BENCH_DIR) + "/fig1.brp"));
  Nbw aut = parse_hoa(read_file(std::string(BR_BENCH_DIR) + "/gf_at_l2.hoa"), ts);
  ProductSystem prod = build_product(ts, aut);
  CoeffPool pool;
  TemplateSet templates = fix_templates(prod, 2, pool);
  auto t_ids = add_init_vars(prod, pool);

  std::vector<Rational> vals(pool.size(), rat(0));
  auto set_c = [&](const char* loc_name, int q, std::vector<Rational> cs) {
    int loc = prod.find(*ts.find_location(loc_name), q);
    for (std::size_t j = 0; j < cs.size(); ++j)
      vals[templates.coeff_ids[loc][j]] = cs[j];
  };
  set_c("l_init", 0, {rat(3), rat(1)});
  set_c("l1", 0, {rat(2), rat(1)});
  set_c("l2", 0, {rat(1), rat(1)});
  set_c("l3", 0, {rat(-1)});
  set_c("l_t", 0, {rat(-1)});

  ConcreteWitness w = reconstruct_witness(prod, templates, vals, false, t_ids);
  EXPECT_FALSE(w.universal);
  EXPECT_EQ(w.degree, 2);
  ASSERT_TRUE(w.init_vals.has_value());
  EXPECT_EQ(w.init_vals->size(), 1u);

  Polynomial x = Polynomial::variable(1, 0);
  int li = prod.find(*ts.find_location("l_init"), 0);
  EXPECT_EQ(w.f[li], x + Polynomial::constant(1, rat(3)));

  auto states = box_states(prod, -4, 4);
  auto rep = check_witness(prod, w, states);
  EXPECT_TRUE(rep.ok) << (rep.violations.empty() ? std::string() : rep.violations[0]);
}

// Full chain: generate the existential ranking constraints for the squaring
// loop under "infinitely often at l2", reduce to a quadratic system, hand it
// to the bundled solver, rebuild the witness, and check it semantically.
TEST(Solver, EndToEndSquaringLoop) {
  TransitionSystem ts = parse_program(read_file(std::string(BR_BENCH_DIR) + "/fig1.brp"));
  Nbw aut = parse_hoa(read_file(std::string(BR_BENCH_DIR) + "/gf_at_l2.hoa"), ts);
  ProductSystem prod = build_product(ts, aut);
  CoeffPool pool;
  TemplateSet templates = fix_templates(prod, 2, pool);
  auto ents = gen_ebrf_constraints(prod, templates);
  auto t_ids = add_init_vars(prod, pool);
  auto grounds = gen_ebrf_init(prod, templates, t_ids, 0);
  QpSystem qp = encode_qp(ents, grounds, SosMode::Diagonal, -1, pool);

  auto res = solve_qp(qp, pool, qsolve_only(), 60000);
  ASSERT_EQ(res.status, SolveStatus::Sat) << "solver " << res.solver;

  ConcreteWitness w = reconstruct_witness(prod, templates, res.values, false, t_ids);
  auto states = box_states(prod, -4, 4);
  auto rep = check_witness(prod, w, states);
  EXPECT_TRUE(rep.ok) << (rep.violations.empty() ? std::string() : rep.violations[0]);
  EXPECT_GT(rep.checked, 0);
}

}  // namespace
