#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "sentinel/ast.hpp"
#include "sentinel/parser.hpp"
#include "sentinel/resolve.hpp"

namespace sentinel {

// The arithmetic contracts. Overflow detection reduces to ordinary call
// verification: instrumentation turns every + and - into a call to one of
// these, and the err/ok spec pairs partition each operand region, so for
// every evaluation exactly one pair applies.
inline std::string builtin_source(bool enable_sub) {
  std::string src = R"(int uadd(uint k1, uint k2)
  requires k1 + k2 > inf ensures_err true;
  requires k1 + k2 <= inf ensures res = k1 + k2;

int add(int k1, int k2)
  requires k1 > 0 & k2 > 0 & k1 + k2 > inf
         | k1 > 0 & k2 <= 0 & k1 + k2 < -inf
         | k1 <= 0 & k2 > 0 & k1 + k2 < -inf
         | k1 <= 0 & k2 <= 0 & k1 + k2 < -inf & k1 != 0
  ensures_err true;
  requires k1 > 0 & k2 > 0 & k1 + k2 <= inf
         | k1 > 0 & k2 <= 0 & k1 + k2 >= -inf
         | k1 <= 0 & k2 > 0 & k1 + k2 >= -inf
         | k1 <= 0 & k2 <= 0 & (k1 + k2 >= -inf | k1 = 0)
  ensures res = k1 + k2;
)";
  if (enable_sub)
    src += R"(
int sub(int k1, int k2)
  requires k1 >= 0 & k2 < 0 & k1 - k2 > inf
         | k1 < 0 & k2 > 0 & k1 - k2 < -inf
  ensures_err true;
  requires k1 >= 0 & k2 < 0 & k1 - k2 <= inf
         | k1 < 0 & k2 > 0 & k1 - k2 >= -inf
         | k1 >= 0 & k2 >= 0
         | k1 < 0 & k2 <= 0
  ensures res = k1 - k2;

int usub(uint k1, uint k2)
  requires k1 - k2 < 0 ensures_err true;
  requires k1 - k2 >= 0 ensures res = k1 - k2;
)";
  return src;
}

inline void inject_builtins(Program& p, NameSupply& names,
                            bool enable_sub = false) {
  Program b = parse_program(builtin_source(enable_sub), "<builtin>", names);
  for (Method& m : b.methods) {
    m.builtin = true;
    p.methods.push_back(std::move(m));
  }
}

// ---------------------------------------------------------------------------
// Loop synthesis
//
// while (c) S_1..S_k { B } becomes a fresh tail-recursive void method
//
//   void owner.loop@L:C(ref t x1.., t y1..)
//     S_1 .. S_k
//   { if (c) { B; owner.loop@L:C(x.., y..); } else {} }
//
// whose ref parameters are the outer variables the body assigns and whose
// value parameters are the other outer variables the loop reads. The while
// statement itself becomes a call. Primed names in the loop postcondition
// refer to the exit values of ref parameters.

namespace lower_detail {

inline void expr_var_uses(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->kind == Expr::Kind::var) out.insert(e->name);
  expr_var_uses(e->a, out);
  expr_var_uses(e->b, out);
  for (const auto& arg : e->args) expr_var_uses(arg, out);
}

struct LoopSynth {
  Program& prog;
  std::vector<Method>& fresh;
  const Method& owner;

  const Method* find_callee(const std::string& n) const {
    for (const Method& m : fresh)
      if (m.name == n) return &m;
    return prog.find_method(n);
  }

  void body_uses(const Block& b, std::set<std::string>& used,
                 std::set<std::string>& mutated,
                 std::set<std::string>& declared) const {
    for (const StmtPtr& s : b) {
      expr_var_uses(s->expr, used);
      expr_var_uses(s->lhs, used);
      switch (s->kind) {
        case Stmt::Kind::decl:
          declared.insert(s->name);
          break;
        case Stmt::Kind::assign:
          used.insert(s->name);
          mutated.insert(s->name);
          break;
        case Stmt::Kind::call_stmt: {
          const Method* callee = find_callee(s->expr->name);
          if (callee)
            for (std::size_t i = 0;
                 i < callee->params.size() && i < s->expr->args.size(); ++i)
              if (callee->params[i].by_ref &&
                  s->expr->args[i]->kind == Expr::Kind::var)
                mutated.insert(s->expr->args[i]->name);
          break;
        }
        case Stmt::Kind::return_:
          throw ResolveError(s->span,
                             "return is not allowed inside a loop body");
        default:
          break;
      }
      body_uses(s->then_body, used, mutated, declared);
      body_uses(s->else_body, used, mutated, declared);
      body_uses(s->body, used, mutated, declared);
    }
  }

  static void spec_uses(const std::vector<SpecPair>& specs,
                        std::set<std::string>& out) {
    std::set<Var> vs;
    for (const SpecPair& sp : specs) {
      for (const auto& d : sp.requires_.disjuncts) disjunct_vars(d, vs);
      for (const auto& d : sp.ensures_.disjuncts) disjunct_vars(d, vs);
    }
    for (const Var& v : vs) out.insert(v.substr(0, v.find('\'')));
  }

  Block walk(const Block& b, std::map<std::string, Type> scope) {
    Block out;
    for (const StmtPtr& s : b) {
      switch (s->kind) {
        case Stmt::Kind::decl: {
          if (scope.count(s->name))
            throw ResolveError(s->span,
                               "'" + s->name + "' shadows an existing name");
          scope[s->name] = s->type;
          out.push_back(s);
          break;
        }
        case Stmt::Kind::if_: {
          auto n = std::make_shared<Stmt>(*s);
          n->then_body = walk(s->then_body, scope);
          n->else_body = walk(s->else_body, scope);
          out.push_back(n);
          break;
        }
        case Stmt::Kind::while_:
          out.push_back(synthesize(*s, scope));
          break;
        default:
          out.push_back(s);
          break;
      }
    }
    return out;
  }

  StmtPtr synthesize(const Stmt& w, const std::map<std::string, Type>& scope) {
    if (w.specs.empty())
      throw ResolveError(w.span, "loop needs at least one specification pair");
    Block body = walk(w.body, scope);  // inner loops first

    std::set<std::string> used, mutated, declared;
    expr_var_uses(w.expr, used);
    body_uses(body, used, mutated, declared);
    spec_uses(w.specs, used);

    std::vector<std::string> refs, vals;
    for (const auto& v : mutated)
      if (scope.count(v) && !declared.count(v)) refs.push_back(v);
    for (const auto& v : used)
      if (scope.count(v) && !declared.count(v) && !mutated.count(v))
        vals.push_back(v);

    for (const SpecPair& sp : w.specs) {
      std::set<Var> vs;
      for (const auto& d : sp.ensures_.disjuncts) disjunct_vars(d, vs);
      for (const Var& v : vs) {
        if (v.find('\'') == std::string::npos) continue;
        std::string base = v.substr(0, v.find('\''));
        if (std::find(refs.begin(), refs.end(), base) == refs.end())
          throw ResolveError(sp.span, "primed variable '" + v +
                                          "' must be assigned in the loop body");
      }
    }

    Method s;
    s.ret = ty_void();
    s.name = owner.name + ".loop@" + std::to_string(w.span.line) + ":" +
             std::to_string(w.span.col);
    s.span = w.span;
    s.synthetic = true;
    s.owner = owner.name;
    s.specs = w.specs;
    std::vector<std::string> order = refs;
    order.insert(order.end(), vals.begin(), vals.end());
    for (const auto& v : refs)
      s.params.push_back({scope.at(v), v, true});
    for (const auto& v : vals)
      s.params.push_back({scope.at(v), v, false});

    auto self = std::make_shared<Expr>();
    self->kind = Expr::Kind::call;
    self->name = s.name;
    self->span = w.span;
    for (const auto& v : order) self->args.push_back(e_var(v, w.span));
    auto recur = std::make_shared<Stmt>();
    recur->kind = Stmt::Kind::call_stmt;
    recur->span = w.span;
    recur->expr = self;

    auto iff = std::make_shared<Stmt>();
    iff->kind = Stmt::Kind::if_;
    iff->span = w.span;
    iff->expr = w.expr;
    iff->then_body = std::move(body);
    iff->then_body.push_back(recur);
    s.body = Block{iff};
    fresh.push_back(std::move(s));

    auto entry = std::make_shared<Expr>();
    *entry = *self;  // same callee, same argument order
    auto call = std::make_shared<Stmt>();
    call->kind = Stmt::Kind::call_stmt;
    call->span = w.span;
    call->expr = entry;
    return call;
  }
};

}  // namespace lower_detail

inline void synthesize_loops(Program& p) {
  std::vector<Method> fresh;
  for (Method& m : p.methods) {
    if (!m.body || m.builtin) continue;
    lower_detail::LoopSynth synth{p, fresh, m};
    std::map<std::string, Type> scope;
    for (const auto& par : m.params) scope[par.name] = par.type;
    m.body = synth.walk(*m.body, scope);
  }
  for (Method& s : fresh) p.methods.push_back(std::move(s));
}

// ---------------------------------------------------------------------------
// A-normalization
//
// After this pass, operands of + - and comparisons, call and constructor
// arguments, field-read bases and stored values are variables or literals;
// if conditions are single boolean variables. Field reads, nested calls and
// comparisons get fresh typed temporaries.

namespace lower_detail {

struct Lowerer {
  Method& m;
  NameSupply& names;
  Block* out = nullptr;

  static bool is_atom(const ExprPtr& e) {
    switch (e->kind) {
      case Expr::Kind::null_lit:
      case Expr::Kind::int_lit:
      case Expr::Kind::float_lit:
      case Expr::Kind::var:
        return true;
      default:
        return false;
    }
  }

  ExprPtr temp_for(const ExprPtr& e) {
    std::string t = names.fresh("t");
    m.var_types[t] = e->type;
    auto d = std::make_shared<Stmt>();
    d->kind = Stmt::Kind::decl;
    d->span = e->span;
    d->type = e->type;
    d->name = t;
    d->expr = e;
    out->push_back(d);
    ExprPtr v = e_var(t, e->span);
    v->type = e->type;
    return v;
  }

  ExprPtr atom(const ExprPtr& e) {
    if (is_atom(e)) return e;
    return temp_for(rhs(e));
  }

  // A legal right-hand side: atom, var.field, call/new over atoms,
  // + - or comparison over atoms.
  ExprPtr rhs(const ExprPtr& e) {
    switch (e->kind) {
      case Expr::Kind::null_lit:
      case Expr::Kind::int_lit:
      case Expr::Kind::float_lit:
      case Expr::Kind::var:
        return e;
      case Expr::Kind::field_read: {
        auto n = std::make_shared<Expr>(*e);
        n->a = atom(e->a);
        return n;
      }
      case Expr::Kind::call:
      case Expr::Kind::new_obj: {
        auto n = std::make_shared<Expr>(*e);
        for (auto& arg : n->args) arg = atom(arg);
        return n;
      }
      case Expr::Kind::add:
      case Expr::Kind::sub:
      case Expr::Kind::cmp: {
        auto n = std::make_shared<Expr>(*e);
        n->a = atom(e->a);
        n->b = atom(e->b);
        return n;
      }
    }
    return e;
  }

  ExprPtr cond(const ExprPtr& e) {
    if (e->kind == Expr::Kind::var) return e;
    return temp_for(rhs(e));
  }

  Block block(const Block& b) {
    Block result;
    Block* saved = out;
    out = &result;
    for (const StmtPtr& s : b) stmt(s);
    out = saved;
    return result;
  }

  void stmt(const StmtPtr& s) {
    auto n = std::make_shared<Stmt>(*s);
    switch (s->kind) {
      case Stmt::Kind::decl:
      case Stmt::Kind::assign:
        if (s->expr) n->expr = rhs(s->expr);
        break;
      case Stmt::Kind::field_write: {
        auto lhs = std::make_shared<Expr>(*s->lhs);
        lhs->a = atom(s->lhs->a);
        n->lhs = lhs;
        n->expr = atom(s->expr);
        break;
      }
      case Stmt::Kind::call_stmt:
        n->expr = rhs(s->expr);
        break;
      case Stmt::Kind::return_:
        if (s->expr) n->expr = rhs(s->expr);
        break;
      case Stmt::Kind::if_:
        n->expr = cond(s->expr);
        n->then_body = block(s->then_body);
        n->else_body = block(s->else_body);
        break;
      case Stmt::Kind::while_:
        n->body = block(s->body);
        break;
    }
    out->push_back(n);
  }
};

}  // namespace lower_detail

inline void a_normalize(Program& p, NameSupply& names) {
  for (Method& m : p.methods) {
    if (!m.body) continue;
    lower_detail::Lowerer lw{m, names};
    m.body = lw.block(*m.body);
  }
}

// ---------------------------------------------------------------------------
// Instrumentation: rewrite + and - into builtin calls, carrying the operator
// span and source text of the original expression for findings.

namespace lower_detail {

inline ExprPtr instrument_expr(const ExprPtr& e) {
  if (!e) return e;
  if (e->kind != Expr::Kind::add && e->kind != Expr::Kind::sub) return e;
  bool both_uint = e->a->type.kind == TyKind::uint_ &&
                   e->b->type.kind == TyKind::uint_;
  auto call = std::make_shared<Expr>();
  call->kind = Expr::Kind::call;
  call->name = e->kind == Expr::Kind::add ? (both_uint ? "uadd" : "add")
                                          : (both_uint ? "usub" : "sub");
  call->args = {e->a, e->b};
  call->span = e->span;
  call->op_span = e->op_span;
  call->op_text = e->op_text;
  call->type = e->type;
  return call;
}

inline void instrument_block(Block& b) {
  for (StmtPtr& s : b) {
    auto n = std::make_shared<Stmt>(*s);
    if (n->expr) n->expr = instrument_expr(n->expr);
    instrument_block(n->then_body);
    instrument_block(n->else_body);
    instrument_block(n->body);
    s = n;
  }
}

}  // namespace lower_detail

inline void instrument_arith(Program& p) {
  for (Method& m : p.methods)
    if (m.body) lower_detail::instrument_block(*m.body);
}

// Full pipeline from a resolved program to the core form the verifier runs
// on. The input is left untouched; the concrete oracle keeps executing it.
inline Program lower_for_verification(const Program& p, NameSupply& names,
                                      const ResolveOptions& ropt = {}) {
  Program v = p;
  synthesize_loops(v);
  resolve(v, ropt);
  a_normalize(v, names);
  instrument_arith(v);
  return v;
}

}  // namespace sentinel
