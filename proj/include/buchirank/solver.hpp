#pragma once

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "buchirank/product.hpp"
#include "buchirank/smtlib.hpp"
#include "buchirank/witness.hpp"

namespace buchirank {

enum class SolveStatus { Sat, Unsat, Unknown };

struct SolveResult {
  SolveStatus status = SolveStatus::Unknown;
  std::vector<Rational> values;  // by pool index, only for Sat
  std::string solver;            // winning command
};

inline std::vector<std::string> split_commands(const std::string& spec) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : spec) {
    if (ch == ';') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// BUCHI_RANK_SOLVERS holds semicolon-separated commands; each is run with the
// query file path appended. Falls back to the bundled solver on PATH.
inline std::vector<std::string> default_solver_commands() {
  if (const char* env = std::getenv("BUCHI_RANK_SOLVERS")) {
    auto cmds = split_commands(env);
    if (!cmds.empty()) return cmds;
  }
  return {"buchi-rank-qsolve"};
}

namespace solver_detail {

inline std::vector<std::string> tokenize_sexpr(const std::string& text) {
  std::vector<std::string> toks;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) toks.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (ch == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (ch == '(' || ch == ')') {
      flush();
      toks.push_back(std::string(1, ch));
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      cur += ch;
    }
  }
  flush();
  return toks;
}

// Numeric value grammar solvers actually print: integers, decimals, and
// (/ a b), (- x), (+ ...), (* ...) combinations thereof.
inline std::optional<Rational> parse_value(const std::vector<std::string>& toks,
                                           std::size_t& i) {
  if (i >= toks.size()) return std::nullopt;
  if (toks[i] != "(") {
    const std::string& a = toks[i++];
    auto dot = a.find('.');
    try {
      if (dot == std::string::npos) return rat(std::stol(a));
      std::string frac = a.substr(dot + 1);
      long scale = 1;
      for (std::size_t k = 0; k < frac.size(); ++k) scale *= 10;
      long whole = dot == 0 ? 0 : std::stol(a.substr(0, dot));
      bool neg = a[0] == '-';
      Rational r = rat(std::abs(whole)) + Rational(rat(frac.empty() ? 0 : std::stol(frac)) /
                                                   rat(scale));
      return neg ? Rational(-r) : r;
    } catch (...) {
      return std::nullopt;
    }
  }
  ++i;  // '('
  if (i >= toks.size()) return std::nullopt;
  std::string op = toks[i++];
  std::vector<Rational> args;
  while (i < toks.size() && toks[i] != ")") {
    auto v = parse_value(toks, i);
    if (!v) return std::nullopt;
    args.push_back(*v);
  }
  if (i >= toks.size()) return std::nullopt;
  ++i;  // ')'
  if (args.empty()) return std::nullopt;
  Rational acc = args[0];
  if (op == "-") {
    if (args.size() == 1) return Rational(-acc);
    for (std::size_t k = 1; k < args.size(); ++k) acc = acc - args[k];
    return acc;
  }
  if (op == "+") {
    for (std::size_t k = 1; k < args.size(); ++k) acc = acc + args[k];
    return acc;
  }
  if (op == "*") {
    for (std::size_t k = 1; k < args.size(); ++k) acc = acc * args[k];
    return acc;
  }
  if (op == "/") {
    for (std::size_t k = 1; k < args.size(); ++k) {
      if (args[k] == 0) return std::nullopt;
      acc = acc / args[k];
    }
    return acc;
  }
  return std::nullopt;
}

}  // namespace solver_detail

// Extracts (define-fun name () Real value) bindings; unnamed pool variables
// default to zero. Returns nullopt on any value we cannot read exactly.
inline std::optional<std::vector<Rational>> parse_smt_model(const std::string& text,
                                                            const CoeffPool& pool) {
  auto toks = solver_detail::tokenize_sexpr(text);
  std::vector<Rational> vals(pool.size(), rat(0));
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i] != "define-fun") continue;
    if (i + 1 >= toks.size()) return std::nullopt;
    std::string name = toks[i + 1];
    std::size_t j = i + 2;
    if (j < toks.size() && toks[j] == "(") {
      int depth = 0;
      for (; j < toks.size(); ++j) {
        if (toks[j] == "(") ++depth;
        if (toks[j] == ")" && --depth == 0) {
          ++j;
          break;
        }
      }
    }
    ++j;  // return sort
    auto v = solver_detail::parse_value(toks, j);
    if (!v) return std::nullopt;
    if (auto id = pool.find(name)) vals[*id] = *v;
    i = j - 1;
  }
  return vals;
}

struct PortfolioResult {
  std::string verdict;  // "sat", "unsat", or "" when nothing conclusive
  std::string output;
  std::string command;
};

namespace solver_detail {

inline std::vector<std::string> split_argv(const std::string& cmd) {
  std::vector<std::string> parts;
  std::istringstream is(cmd);
  std::string w;
  while (is >> w) parts.push_back(w);
  return parts;
}

inline pid_t spawn(const std::vector<std::string>& parts, const std::string& outfile) {
  pid_t pid = fork();
  if (pid != 0) return pid;
  int fd = open(outfile.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
  if (fd >= 0) {
    dup2(fd, 1);
    dup2(fd, 2);
    close(fd);
  }
  std::vector<char*> argv;
  for (const auto& p : parts) argv.push_back(const_cast<char*>(p.c_str()));
  argv.push_back(nullptr);
  execvp(argv[0], argv.data());
  _exit(127);
}

inline std::string first_word_line(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
      line.pop_back();
    if (!line.empty()) return line;
  }
  return "";
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace solver_detail

// Runs every command on the same query file and takes the first conclusive
// sat/unsat answer; stragglers are killed. Commands that exit without a
// verdict are dropped silently.
inline PortfolioResult run_portfolio(const std::string& smt_text,
                                     const std::vector<std::string>& commands,
                                     int timeout_ms) {
  using namespace solver_detail;
  PortfolioResult result;
  char tmpl[] = "/tmp/buchirank-XXXXXX";
  int qfd = mkstemp(tmpl);
  if (qfd < 0) return result;
  std::string qfile = tmpl;
  std::string qpath = qfile + ".smt2";
  {
    ssize_t n = write(qfd, smt_text.data(), smt_text.size());
    close(qfd);
    if (n != static_cast<ssize_t>(smt_text.size())) {
      std::remove(qfile.c_str());
      return result;
    }
    std::rename(qfile.c_str(), qpath.c_str());
  }

  struct Child {
    pid_t pid;
    std::string outfile;
    std::string command;
    bool live;
  };
  std::vector<Child> children;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    auto parts = split_argv(commands[k]);
    if (parts.empty()) continue;
    parts.push_back(qpath);
    std::string out = qpath + ".out" + std::to_string(k);
    pid_t pid = spawn(parts, out);
    if (pid > 0) children.push_back({pid, out, commands[k], true});
  }

  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  std::size_t live = children.size();
  while (live > 0 && result.verdict.empty() &&
         std::chrono::steady_clock::now() < deadline) {
    for (auto& ch : children) {
      if (!ch.live) continue;
      int st = 0;
      pid_t r = waitpid(ch.pid, &st, WNOHANG);
      if (r == 0) continue;
      ch.live = false;
      --live;
      std::string out = slurp(ch.outfile);
      std::string verdict = first_word_line(out);
      if (verdict == "sat" || verdict == "unsat") {
        result.verdict = verdict;
        result.output = std::move(out);
        result.command = ch.command;
        break;
      }
    }
    if (live > 0 && result.verdict.empty())
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  for (auto& ch : children) {
    if (!ch.live) continue;
    kill(ch.pid, SIGKILL);
    waitpid(ch.pid, nullptr, 0);
  }
  for (const auto& ch : children) std::remove(ch.outfile.c_str());
  std::remove(qpath.c_str());
  return result;
}

// Solve and re-validate: a model is only reported Sat after every constraint
// has been rechecked in exact arithmetic, so solver bugs and rounded models
// degrade to Unknown instead of unsound answers.
inline SolveResult solve_qp(const QpSystem& qp, const CoeffPool& pool,
                            const std::vector<std::string>& commands, int timeout_ms) {
  SolveResult res;
  auto raw = run_portfolio(emit_smtlib(qp, pool), commands, timeout_ms);
  res.solver = raw.command;
  if (raw.verdict == "unsat") {
    res.status = SolveStatus::Unsat;
    return res;
  }
  if (raw.verdict != "sat") return res;
  auto vals = parse_smt_model(raw.output, pool);
  if (!vals) return res;
  for (const auto& c : qp.constraints) {
    Rational v = c.expr.eval(*vals);
    bool ok = c.rel == CRel::Eq ? v == 0 : c.rel == CRel::Geq ? v >= 0 : v > 0;
    if (!ok) return res;
  }
  res.status = SolveStatus::Sat;
  res.values = std::move(*vals);
  return res;
}

inline ConcreteWitness reconstruct_witness(const ProductSystem& prod,
                                           const TemplateSet& templates,
                                           const std::vector<Rational>& vals,
                                           bool universal,
                                           const std::vector<int>& t_ids = {}) {
  ConcreteWitness w;
  w.universal = universal;
  w.degree = templates.degree;
  for (std::size_t loc = 0; loc < prod.sys.location_names.size(); ++loc)
    w.f.push_back(templates.at(static_cast<int>(loc)).instantiate(vals));
  if (!t_ids.empty()) {
    std::vector<Rational> iv;
    for (int id : t_ids) iv.push_back(vals.at(id));
    w.init_vals = std::move(iv);
  }
  return w;
}

}  // namespace buchirank
