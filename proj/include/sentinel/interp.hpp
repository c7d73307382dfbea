#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sentinel/ast.hpp"

namespace sentinel {

// Concrete execution at a fixed bit width. The machine runs the surface
// program directly (loops included); every addition or subtraction whose
// exact result does not survive the width is recorded as an overflow event
// against the method whose body contains the operation.

struct ConcreteHeap {
  // addr -> (data type, field values); address 0 is null, never allocated
  std::map<long long, std::pair<std::string, std::vector<long long>>> cells;
  long long next = 1;

  long long alloc(std::string type, std::vector<long long> fields) {
    long long a = next++;
    cells[a] = {std::move(type), std::move(fields)};
    return a;
  }
};

struct OverflowEvent {
  std::string frame;  // method whose body contains the operation
  Span span;          // its operator token
  std::string op_text;
  long long lhs = 0, rhs = 0;
};

enum class RunStatus { ok, null_deref, step_budget, external_call, unsupported };

struct RunResult {
  RunStatus status = RunStatus::ok;
  long long value = 0;
  std::vector<OverflowEvent> events;
};

inline long long wrap_to_width(long long v, int width, bool uns) {
  unsigned long long m = 1ULL << width;
  unsigned long long r = static_cast<unsigned long long>(v) & (m - 1);
  if (!uns && r >= (m >> 1))
    return static_cast<long long>(r) - static_cast<long long>(m);
  return static_cast<long long>(r);
}

class Machine {
 public:
  Machine(const Program& prog, int width, bool wrapped = true)
      : prog_(prog), width_(width), wrapped_(wrapped) {}

  ConcreteHeap heap;  // pre-populate to pass reference arguments
  int budget = 10000;

  RunResult run(const std::string& method, const std::vector<long long>& args) {
    RunResult rr;
    status_ = RunStatus::ok;
    events_.clear();
    steps_ = 0;
    try {
      rr.value = call_method(method, args);
    } catch (const Halt&) {
    }
    rr.status = status_;
    rr.events = events_;
    return rr;
  }

 private:
  struct Halt {};
  struct ReturnV {
    long long v;
  };
  using Env = std::map<std::string, long long>;

  const Program& prog_;
  int width_;
  bool wrapped_;  // continue with wrapped results (machine semantics)
  RunStatus status_ = RunStatus::ok;
  std::vector<OverflowEvent> events_;
  int steps_ = 0;

  [[noreturn]] void halt(RunStatus s) {
    status_ = s;
    throw Halt{};
  }

  void tick() {
    if (++steps_ > budget) halt(RunStatus::step_budget);
  }

  long long arith(bool is_sub, bool uns, long long a, long long b,
                  const Span& sp, const std::string& text,
                  const std::string& frame) {
    long long exact = 0;
    bool wide = is_sub ? __builtin_sub_overflow(a, b, &exact)
                       : __builtin_add_overflow(a, b, &exact);
    if (wide) halt(RunStatus::unsupported);
    long long w = wrap_to_width(exact, width_, uns);
    if (w != exact) events_.push_back({frame, sp, text, a, b});
    return wrapped_ ? w : exact;
  }

  long long call_method(const std::string& name,
                        const std::vector<long long>& args) {
    const Method* m = prog_.find_method(name);
    if (!m || !m->body) halt(RunStatus::external_call);
    Env env;
    for (std::size_t i = 0; i < m->params.size() && i < args.size(); ++i)
      env[m->params[i].name] = args[i];
    try {
      exec_block(*m->body, env, m->name);
    } catch (const ReturnV& r) {
      return r.v;
    }
    return 0;
  }

  std::pair<std::string, std::vector<long long>>& deref(long long addr) {
    auto it = heap.cells.find(addr);
    if (addr == 0 || it == heap.cells.end()) halt(RunStatus::null_deref);
    return it->second;
  }

  int field_of(const std::string& type, const std::string& field) {
    const DataDecl* dd = prog_.find_data(type);
    int fi = dd ? dd->field_index(field) : -1;
    if (fi < 0) halt(RunStatus::unsupported);
    return fi;
  }

  void exec_block(const Block& b, Env& env, const std::string& frame) {
    for (const StmtPtr& s : b) exec_stmt(*s, env, frame);
  }

  void exec_stmt(const Stmt& st, Env& env, const std::string& frame) {
    tick();
    switch (st.kind) {
      case Stmt::Kind::decl:
        env[st.name] = st.expr ? eval(st.expr, env, frame) : 0;
        return;
      case Stmt::Kind::assign:
        env[st.name] = eval(st.expr, env, frame);
        return;
      case Stmt::Kind::field_write: {
        long long addr = eval(st.lhs->a, env, frame);
        long long val = eval(st.expr, env, frame);
        auto& cell = deref(addr);
        cell.second[static_cast<std::size_t>(
            field_of(cell.first, st.lhs->name))] = val;
        return;
      }
      case Stmt::Kind::call_stmt:
        eval(st.expr, env, frame);
        return;
      case Stmt::Kind::return_:
        throw ReturnV{st.expr ? eval(st.expr, env, frame) : 0};
      case Stmt::Kind::if_:
        exec_block(eval(st.expr, env, frame) != 0 ? st.then_body : st.else_body,
                   env, frame);
        return;
      case Stmt::Kind::while_:
        while (eval(st.expr, env, frame) != 0) {
          tick();
          exec_block(st.body, env, frame);
        }
        return;
    }
  }

  long long eval(const ExprPtr& e, Env& env, const std::string& frame) {
    tick();
    switch (e->kind) {
      case Expr::Kind::null_lit:
        return 0;
      case Expr::Kind::int_lit:
        return e->ival;  // literals are taken exactly, whatever the width
      case Expr::Kind::float_lit:
        halt(RunStatus::unsupported);
      case Expr::Kind::var: {
        auto it = env.find(e->name);
        if (it == env.end()) halt(RunStatus::unsupported);
        return it->second;
      }
      case Expr::Kind::field_read: {
        long long addr = eval(e->a, env, frame);
        auto& cell = deref(addr);
        return cell.second[static_cast<std::size_t>(
            field_of(cell.first, e->name))];
      }
      case Expr::Kind::new_obj: {
        std::vector<long long> fs;
        fs.reserve(e->args.size());
        for (const ExprPtr& a : e->args) fs.push_back(eval(a, env, frame));
        return heap.alloc(e->name, std::move(fs));
      }
      case Expr::Kind::add:
      case Expr::Kind::sub: {
        long long a = eval(e->a, env, frame);
        long long b = eval(e->b, env, frame);
        bool uns = e->a->type.kind == TyKind::uint_ &&
                   e->b->type.kind == TyKind::uint_;
        return arith(e->kind == Expr::Kind::sub, uns, a, b, e->op_span,
                     e->op_text, frame);
      }
      case Expr::Kind::cmp: {
        long long a = eval(e->a, env, frame);
        long long b = eval(e->b, env, frame);
        switch (e->op) {
          case CmpOp::eq: return a == b;
          case CmpOp::ne: return a != b;
          case CmpOp::lt: return a < b;
          case CmpOp::le: return a <= b;
          case CmpOp::gt: return a > b;
          case CmpOp::ge: return a >= b;
        }
        return 0;
      }
      case Expr::Kind::call: {
        const Method* callee = prog_.find_method(e->name);
        if (callee && callee->builtin) {
          long long a = eval(e->args[0], env, frame);
          long long b = eval(e->args[1], env, frame);
          bool uns = e->name == "uadd" || e->name == "usub";
          bool is_sub = e->name == "sub" || e->name == "usub";
          Span sp = e->op_span.known() ? e->op_span : e->span;
          std::string tx = e->op_text.empty() ? e->name : e->op_text;
          return arith(is_sub, uns, a, b, sp, tx, frame);
        }
        std::vector<long long> as;
        as.reserve(e->args.size());
        for (const ExprPtr& a : e->args) as.push_back(eval(a, env, frame));
        return call_method(e->name, as);
      }
    }
    return 0;
  }
};

// ---------------------------------------------------------------------------
// Numeric reading of specs
//
// To decide whether a concrete input satisfies a spec formula, the logical
// constants take the width's extreme values: inf is the largest signed (or,
// for methods whose scalar parameters are all uint, unsigned) value, -inf
// the smallest signed one. Reading bounds this way keeps the width
// instantiation consistent with the proofs: a method verified under n < inf
// is only obliged to be overflow-free while n stays below the width's top
// value, so that value must not count as a permitted input.

inline long long inf_value(int width, bool uns) {
  return uns ? (1LL << width) - 1 : (1LL << (width - 1)) - 1;
}
inline long long ninf_value(int width) { return -(1LL << (width - 1)); }

using NumEnv = std::map<Var, long long>;

inline std::optional<long long> eval_term_num(const TermPtr& t,
                                              const NumEnv& env, int width,
                                              bool uns) {
  switch (t->kind) {
    case Term::Kind::linear: {
      long long acc = t->lin.k;
      for (const auto& [v, c] : t->lin.coef) {
        auto it = env.find(v);
        if (it == env.end()) return std::nullopt;
        acc += c * it->second;
      }
      return acc;
    }
    case Term::Kind::inf:
      return t->sign > 0 ? inf_value(width, uns) : ninf_value(width);
    case Term::Kind::minmax: {
      auto a = eval_term_num(t->a, env, width, uns);
      auto b = eval_term_num(t->b, env, width, uns);
      if (!a || !b) return std::nullopt;
      return t->is_min ? std::min(*a, *b) : std::max(*a, *b);
    }
  }
  return std::nullopt;
}

inline std::optional<bool> eval_atom_num(Cmp cmp, const TermPtr& l,
                                         const TermPtr& r, const NumEnv& env,
                                         int width, bool uns) {
  auto lv = eval_term_num(l, env, width, uns);
  auto rv = eval_term_num(r, env, width, uns);
  if (!lv || !rv) return std::nullopt;
  return cmp == Cmp::eq ? *lv == *rv : *lv <= *rv;
}

// Three-valued: an atom over names with no value yet is unknown.
inline std::optional<bool> eval_pure_num(const PurePtr& p, const NumEnv& env,
                                         int width, bool uns) {
  switch (p->kind) {
    case Pure::Kind::truth:
      return p->value;
    case Pure::Kind::atom:
      return eval_atom_num(p->cmp, p->lhs, p->rhs, env, width, uns);
    case Pure::Kind::neg: {
      auto v = eval_pure_num(p->a, env, width, uns);
      if (!v) return std::nullopt;
      return !*v;
    }
    case Pure::Kind::conj: {
      auto a = eval_pure_num(p->a, env, width, uns);
      auto b = eval_pure_num(p->b, env, width, uns);
      if (a && !*a) return false;
      if (b && !*b) return false;
      if (a && b) return true;
      return std::nullopt;
    }
    case Pure::Kind::disj: {
      auto a = eval_pure_num(p->a, env, width, uns);
      auto b = eval_pure_num(p->b, env, width, uns);
      if (a && *a) return true;
      if (b && *b) return true;
      if (a && b) return false;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

// Does a concrete argument tuple satisfy a spec formula? Heap assertions
// match structurally against the concrete heap, reading ghost arguments off
// the structure; a defining equality assigns a name that is still free; the
// remaining pure part is evaluated numerically. Matching is first-fit over
// disjuncts, which are expected to be mutually exclusive on concrete data.
struct SpecEval {
  const Program& prog;
  const ConcreteHeap& heap;
  int width;
  bool uns;

  bool satisfies(const SepFormula& f, const NumEnv& args) const {
    for (const SepDisjunct& d : f.disjuncts) {
      NumEnv env = args;
      if (match_disjunct(d, env, 0)) return true;
    }
    return false;
  }

  bool match_disjunct(const SepDisjunct& d, NumEnv& env, int depth) const {
    if (depth > static_cast<int>(heap.cells.size()) + 2) return false;
    for (const HeapAtom& h : d.heap)
      if (!match_atom(h, env, depth)) return false;
    return solve_pure(d.pure, env);
  }

  bool match_atom(const HeapAtom& h, NumEnv& env, int depth) const {
    auto rit = env.find(h.root);
    if (rit == env.end()) return false;  // roots must already be determined
    long long addr = rit->second;
    if (!h.is_pred) {
      auto cit = heap.cells.find(addr);
      if (addr == 0 || cit == heap.cells.end()) return false;
      if (cit->second.first != h.name) return false;
      const std::vector<long long>& fs = cit->second.second;
      if (fs.size() != h.args.size()) return false;
      for (std::size_t i = 0; i < fs.size(); ++i)
        if (!unify(h.args[i], fs[i], env)) return false;
      return true;
    }
    const PredDecl* pd = prog.find_pred(h.name);
    if (!pd || pd->params.size() != h.args.size() + 1) return false;
    for (const SepDisjunct& bd : pd->body.disjuncts) {
      NumEnv inner;
      inner[pd->params[0]] = addr;
      for (std::size_t i = 1; i < pd->params.size(); ++i) {
        auto it = env.find(h.args[i - 1]);
        if (it != env.end()) inner[pd->params[i]] = it->second;
      }
      if (!match_disjunct(bd, inner, depth + 1)) continue;
      NumEnv saved = env;
      bool ok = true;
      for (std::size_t i = 1; i < pd->params.size() && ok; ++i) {
        auto it = inner.find(pd->params[i]);
        ok = it != inner.end() && unify(h.args[i - 1], it->second, env);
      }
      if (ok) return true;
      env = std::move(saved);
    }
    return false;
  }

  bool unify(const Var& v, long long val, NumEnv& env) const {
    auto it = env.find(v);
    if (it == env.end()) {
      env[v] = val;
      return true;
    }
    return it->second == val;
  }

  bool solve_pure(const PurePtr& p, NumEnv& env) const {
    if (p->kind == Pure::Kind::conj)
      return solve_pure(p->a, env) && solve_pure(p->b, env);
    if (p->kind == Pure::Kind::atom && p->cmp == Cmp::eq) {
      auto lv = as_lone_var(p->lhs), rv = as_lone_var(p->rhs);
      if (lv && !env.count(*lv)) {
        if (auto val = eval_term_num(p->rhs, env, width, uns)) {
          env[*lv] = *val;
          return true;
        }
      } else if (rv && !env.count(*rv)) {
        if (auto val = eval_term_num(p->lhs, env, width, uns)) {
          env[*rv] = *val;
          return true;
        }
      }
    }
    return eval_pure_num(p, env, width, uns).value_or(false);
  }
};

}  // namespace sentinel
