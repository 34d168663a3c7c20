#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "buchirank/program.hpp"

using namespace buchirank;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  EXPECT_TRUE(in.good()) << "cannot open " << path;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string bench(const std::string& name) { return std::string(BR_BENCH_DIR) + "/" + name; }

Polynomial px(const TransitionSystem& ts) {
  return Polynomial::variable(ts.nvars(), 0);
}

bool same_transition(const Transition& a, const Transition& b) {
  return a.source == b.source && a.target == b.target && a.guard == b.guard &&
         a.update == b.update;
}

}  // namespace

TEST(Program, SquaringLoopGolden) {
  TransitionSystem ts = parse_program(read_file(bench("fig1.brp")));

  ASSERT_EQ(ts.location_names.size(), 5u);
  EXPECT_EQ(ts.location_names[0], "l_init");
  EXPECT_EQ(ts.location_names[1], "l_t");
  EXPECT_EQ(ts.location_names[2], "l1");
  EXPECT_EQ(ts.location_names[3], "l2");
  EXPECT_EQ(ts.location_names[4], "l3");
  EXPECT_EQ(ts.init, 0);
  ASSERT_TRUE(ts.terminal.has_value());
  EXPECT_EQ(*ts.terminal, 1);
  ASSERT_EQ(ts.var_names.size(), 1u);
  EXPECT_EQ(ts.var_names[0], "x0");

  // theta_init is x0 >= 0
  Predicate want_pre = Predicate::mk_atom(Atom::geq(px(ts)));
  EXPECT_EQ(ts.theta_init, want_pre);

  // declaration order: branch edges of the loop head first, then branch
  // bodies, then the loop exit, the init edge, and the terminal self-loop
  ASSERT_EQ(ts.transitions.size(), 7u);
  auto l = [&](const std::string& n) { return *ts.find_location(n); };
  EXPECT_EQ(ts.transitions[0].source, l("l1"));
  EXPECT_EQ(ts.transitions[0].target, l("l2"));
  EXPECT_EQ(ts.transitions[1].source, l("l1"));
  EXPECT_EQ(ts.transitions[1].target, l("l3"));
  EXPECT_EQ(ts.transitions[2].source, l("l2"));
  EXPECT_EQ(ts.transitions[2].target, l("l1"));
  EXPECT_EQ(ts.transitions[3].source, l("l3"));
  EXPECT_EQ(ts.transitions[3].target, l("l1"));
  EXPECT_EQ(ts.transitions[4].source, l("l1"));
  EXPECT_EQ(ts.transitions[4].target, l("l_t"));
  EXPECT_EQ(ts.transitions[5].source, l("l_init"));
  EXPECT_EQ(ts.transitions[5].target, l("l1"));
  EXPECT_EQ(ts.transitions[6].source, l("l_t"));
  EXPECT_EQ(ts.transitions[6].target, l("l_t"));

  // guards: loop-entry edges test x0 >= 0, the exit edge tests -x0 > 0
  EXPECT_EQ(ts.transitions[0].guard, Predicate::mk_atom(Atom::geq(px(ts))));
  EXPECT_EQ(ts.transitions[4].guard, Predicate::mk_atom(Atom::gt(-px(ts))));
  EXPECT_TRUE(ts.transitions[2].guard.is_true());

  // updates: squaring on the edges leaving l2 / l3, identity elsewhere
  Polynomial sq_plus = px(ts) * px(ts) + Polynomial::constant(1, rat(1));
  Polynomial sq_minus = px(ts) * px(ts) - Polynomial::constant(1, rat(1));
  EXPECT_EQ(ts.transitions[2].update[0], sq_plus);
  EXPECT_EQ(ts.transitions[3].update[0], sq_minus);
  EXPECT_EQ(ts.transitions[0].update[0], px(ts));

  // invariant annotations land on the named locations, default true elsewhere
  Predicate nonneg = Predicate::mk_atom(Atom::geq(px(ts)));
  EXPECT_EQ(ts.invariants[l("l_init")], nonneg);
  EXPECT_EQ(ts.invariants[l("l1")], nonneg);
  EXPECT_EQ(ts.invariants[l("l2")], nonneg);
  EXPECT_TRUE(ts.invariants[l("l3")].is_true());
  EXPECT_TRUE(ts.invariants[l("l_t")].is_true());
}

TEST(Program, SuccessorsFollowGuardsAndUpdates) {
  TransitionSystem ts = parse_program(read_file(bench("fig1.brp")));
  auto l = [&](const std::string& n) { return *ts.find_location(n); };

  State at_l1{l("l1"), {rat(2)}};
  auto succ = successors(ts, at_l1);
  ASSERT_EQ(succ.size(), 2u);
  EXPECT_EQ(succ[0].second, (State{l("l2"), {rat(2)}}));
  EXPECT_EQ(succ[1].second, (State{l("l3"), {rat(2)}}));

  State at_l2{l("l2"), {rat(2)}};
  succ = successors(ts, at_l2);
  ASSERT_EQ(succ.size(), 1u);
  EXPECT_EQ(succ[0].second, (State{l("l1"), {rat(5)}}));

  State at_l3{l("l3"), {rat(0)}};
  succ = successors(ts, at_l3);
  ASSERT_EQ(succ.size(), 1u);
  EXPECT_EQ(succ[0].second, (State{l("l1"), {rat(-1)}}));

  State neg_l1{l("l1"), {rat(-1)}};
  succ = successors(ts, neg_l1);
  ASSERT_EQ(succ.size(), 1u);
  EXPECT_EQ(succ[0].second, (State{l("l_t"), {rat(-1)}}));

  State term{l("l_t"), {rat(-1)}};
  succ = successors(ts, term);
  ASSERT_EQ(succ.size(), 1u);
  EXPECT_EQ(succ[0].second, term);

  EXPECT_TRUE(ts.is_initial(State{ts.init, {rat(0)}}));
  EXPECT_FALSE(ts.is_initial(State{ts.init, {rat(-1)}}));
  EXPECT_FALSE(ts.is_initial(State{l("l1"), {rat(0)}}));
}

TEST(Program, TotalityCompletionIsIdempotentOnTotalSystems) {
  TransitionSystem ts = parse_program(read_file(bench("fig1.brp")));
  std::size_t before = ts.transitions.size();
  TransitionSystem total = complete_totality(ts);
  EXPECT_EQ(total.transitions.size(), before);
}

TEST(Program, TotalityCompletionAddsFallThrough) {
  TransitionSystem ts = parse_program("assume(x0 >= 2)\nx0 = x0 - 1\n");
  TransitionSystem total = complete_totality(ts);
  ASSERT_TRUE(total.terminal.has_value());

  // the assume location must gain an edge for x0 < 2
  State blocked{*ts.find_location("_s0"), {rat(0)}};
  auto succ_before = successors(ts, blocked);
  EXPECT_TRUE(succ_before.empty());
  auto succ_after = successors(total, blocked);
  ASSERT_EQ(succ_after.size(), 1u);
  EXPECT_EQ(succ_after[0].second.loc, *total.terminal);
  EXPECT_EQ(succ_after[0].second.vals[0], rat(0));

  State open{*ts.find_location("_s0"), {rat(5)}};
  auto succ_open = successors(total, open);
  ASSERT_EQ(succ_open.size(), 1u);
  EXPECT_EQ(succ_open[0].second.loc, *ts.find_location("_s1"));
}

TEST(Program, AssertRecordsObservationPoint) {
  TransitionSystem ts = parse_program("x0 = x0 + 1\nassert(x0 >= 1)\nx0 = 0\n");
  ASSERT_EQ(ts.assertions.size(), 1u);
  auto [loc, pred] = ts.assertions[0];
  EXPECT_EQ(ts.location_names[loc], "_s1");
  Polynomial want = px(ts) - Polynomial::constant(1, rat(1));
  EXPECT_EQ(pred, Predicate::mk_atom(Atom::geq(want)));
  // assert does not restrict flow
  State s{loc, {rat(-7)}};
  EXPECT_EQ(successors(ts, s).size(), 1u);
}

TEST(Program, NondeterministicChoiceWithMoreThanTwoArms) {
  TransitionSystem ts = parse_program(
      "while x0 >= 0 do\n"
      "  if * then x0 = x0 + 1\n"
      "  elif * then x0 = x0 + 2\n"
      "  else x0 = x0 - 1 fi\n"
      "done\n");
  auto head = *ts.find_location("_s0");
  State s{head, {rat(0)}};
  auto succ = successors(ts, s);
  ASSERT_EQ(succ.size(), 3u);
  State a = succ[0].second, b = succ[1].second, c = succ[2].second;
  auto step = [&](const State& st) {
    auto nx = successors(ts, st);
    EXPECT_EQ(nx.size(), 1u);
    return nx[0].second.vals[0];
  };
  EXPECT_EQ(step(a), rat(1));
  EXPECT_EQ(step(b), rat(2));
  EXPECT_EQ(step(c), rat(-1));
}

TEST(Program, LabeledChoiceGetsOwnLocation) {
  TransitionSystem ts = parse_program(
      "ch: if * then x0 = 1 else x0 = 2 fi\n");
  auto ch = ts.find_location("ch");
  ASSERT_TRUE(ch.has_value());
  State s{*ch, {rat(0)}};
  auto succ = successors(ts, s);
  EXPECT_EQ(succ.size(), 2u);
  // choice edges carry the identity; assignment happens one step later
  EXPECT_EQ(succ[0].second.vals[0], rat(0));
}

TEST(Program, IfWithPredicateSplitsOnGuard) {
  TransitionSystem ts = parse_program(
      "br: if x0 >= 5 then x0 = 1 else x0 = 0 fi\n");
  auto br = *ts.find_location("br");
  auto hi = successors(ts, State{br, {rat(5)}});
  ASSERT_EQ(hi.size(), 1u);
  auto hi2 = successors(ts, hi[0].second);
  ASSERT_EQ(hi2.size(), 1u);
  EXPECT_EQ(hi2[0].second.vals[0], rat(1));
  auto lo = successors(ts, State{br, {rat(4)}});
  ASSERT_EQ(lo.size(), 1u);
  auto lo2 = successors(ts, lo[0].second);
  EXPECT_EQ(lo2[0].second.vals[0], rat(0));
}

TEST(Program, TrailingLabelNamesTerminal) {
  TransitionSystem ts = parse_program("x0 = x0 + 1\nfinish:\n");
  ASSERT_TRUE(ts.terminal.has_value());
  EXPECT_EQ(ts.location_names[*ts.terminal], "finish");
  // aliases still resolve
  EXPECT_EQ(ts.find_location("l_term"), ts.terminal);
  EXPECT_EQ(ts.find_location("l_t"), ts.terminal);
}

TEST(Program, RationalLiteralsAndPrecedence) {
  TransitionSystem ts = parse_program("x = 1/2*x + (x - 3)*x^2\n");
  // 1/2 x + x^3 - 3 x^2
  Polynomial x = Polynomial::variable(1, 0);
  Polynomial want = rat(1, 2) * x + (x - Polynomial::constant(1, rat(3))) * x.pow(2);
  State s{*ts.find_location("_s0"), {rat(2)}};
  auto succ = successors(ts, s);
  ASSERT_EQ(succ.size(), 1u);
  EXPECT_EQ(succ[0].second.vals[0], want.eval(std::vector<Rational>{rat(2)}));
}

TEST(Program, ParseErrors) {
  EXPECT_THROW(parse_program("while x0 >= 0 do x0 = x0 - 1\n"), ParseError);  // missing done
  EXPECT_THROW(parse_program("a: skip\na: skip\n"), ParseError);              // duplicate label
  EXPECT_THROW(parse_program("_s1: skip\n"), ParseError);                     // reserved label
  EXPECT_THROW(parse_program("pre: x >= 0\npre: x >= 1\nskip\n"), ParseError);
  EXPECT_THROW(parse_program("x = \n"), ParseError);
  EXPECT_THROW(parse_program("x = 1/0\n"), ParseError);
  EXPECT_THROW(parse_program("invariant nowhere: x >= 0\nskip\n"), ParseError);
  EXPECT_THROW(parse_program("if x > 1 then skip fi extra)\n"), ParseError);
}

TEST(Program, RoundTripThroughPrinter) {
  std::string src = read_file(bench("fig1.brp"));
  ProgramAst ast = parse_program_ast(src);
  std::string printed = program_to_string(ast);
  TransitionSystem a = lower_program(ast);
  TransitionSystem b = parse_program(printed);

  ASSERT_EQ(a.location_names, b.location_names);
  ASSERT_EQ(a.var_names, b.var_names);
  EXPECT_EQ(a.init, b.init);
  EXPECT_EQ(a.terminal, b.terminal);
  EXPECT_EQ(a.theta_init, b.theta_init);
  ASSERT_EQ(a.transitions.size(), b.transitions.size());
  for (std::size_t i = 0; i < a.transitions.size(); ++i)
    EXPECT_TRUE(same_transition(a.transitions[i], b.transitions[i])) << "transition " << i;
  ASSERT_EQ(a.invariants.size(), b.invariants.size());
  for (std::size_t i = 0; i < a.invariants.size(); ++i)
    EXPECT_EQ(a.invariants[i], b.invariants[i]);
}

TEST(Program, ImplicationAndEqualityDesugar) {
  TransitionSystem ts = parse_program("pre: x == 2 => y >= 1\nskip\n");
  // x == 2 => y >= 1 is !(x == 2) || y >= 1
  std::vector<Rational> sat_pt = {rat(2), rat(1)};
  std::vector<Rational> sat_pt2 = {rat(3), rat(-5)};
  std::vector<Rational> unsat_pt = {rat(2), rat(0)};
  EXPECT_TRUE(ts.theta_init.eval(sat_pt));
  EXPECT_TRUE(ts.theta_init.eval(sat_pt2));
  EXPECT_FALSE(ts.theta_init.eval(unsat_pt));
}
