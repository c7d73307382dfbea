#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sentinel/ast.hpp"
#include "sentinel/entail.hpp"
#include "sentinel/lia.hpp"
#include "sentinel/printer.hpp"
#include "sentinel/sepform.hpp"

namespace sentinel {

// ---------------------------------------------------------------------------
// Findings and verdicts

enum class Severity { may_overflow, must_overflow, verification_failure };

inline const char* severity_str(Severity s) {
  switch (s) {
    case Severity::may_overflow: return "may-overflow";
    case Severity::must_overflow: return "must-overflow";
    case Severity::verification_failure: return "verification-failure";
  }
  return "?";
}

struct Finding {
  Severity severity = Severity::may_overflow;
  Span span;              // operator token of the offending operation
  std::string op_text;    // source text of the operation (or the failing site)
  std::string condition;  // pure condition under which it overflows, or a note
};

enum class VerdictStatus { verified, failed, assumed };

// Loop bodies are verified as their own methods and report under
// "owner.loop@line:col"; owner names the method the loop came from.
struct MethodVerdict {
  std::string name;
  std::string owner;
  VerdictStatus status = VerdictStatus::verified;
  bool has_err_contract = false;
  std::vector<Finding> findings;
  std::string reason;  // first failure explanation
  Span span;
};

struct VerifyOptions {
  int fuel = 3;  // unfold/fold depth for entailment
  std::ostream* trace = nullptr;
};

namespace verify_detail {

// How suspect the path is so far; only ever escalates.
enum class PathStatus { safe = 0, may = 1, must = 2 };

struct SymState {
  std::vector<HeapAtom> heap;
  PurePtr pure = p_true();
  std::map<std::string, TermPtr> latest;  // program variable -> current value
  PathStatus status = PathStatus::safe;
  bool returned = false;
  TermPtr ret;
  std::vector<Finding> pending;  // discharged or reported once covered
};

inline void escalate(SymState& s, PathStatus st) {
  if (static_cast<int>(st) > static_cast<int>(s.status)) s.status = st;
}

inline PurePtr cmp_pure(CmpOp op, const TermPtr& l, const TermPtr& r) {
  switch (op) {
    case CmpOp::eq: return p_eq(l, r);
    case CmpOp::ne: return p_ne(l, r);
    case CmpOp::lt: return p_lt(l, r);
    case CmpOp::le: return p_le(l, r);
    case CmpOp::gt: return p_gt(l, r);
    case CmpOp::ge: return p_ge(l, r);
  }
  return p_true();
}

constexpr int kSettleCap = 64;
constexpr std::size_t kStateCap = 256;

struct Exec {
  const Program& prog;  // lowered: loops synthesized, arithmetic instrumented
  Lia& lia;
  NameSupply& names;
  const Method& m;
  const VerifyOptions& opt;

  struct Failure {
    Span span;
    std::string site;
    std::string reason;
  };
  std::vector<Failure> failures;

  // Pure context including the heap's implicit facts.
  PurePtr ctx(const SymState& s) const {
    return p_and(s.pure, xpure(prog, s.heap));
  }
  bool sat(const SymState& s) { return lia.sat_bool(ctx(s)); }
  bool holds(const SymState& s, const PurePtr& c) {
    return lia.implies(ctx(s), {}, c);
  }

  void fail(const Span& sp, const std::string& site, const std::string& why) {
    failures.push_back({sp, site, why});
  }

  Type type_of(const std::string& var) const {
    auto it = m.var_types.find(var);
    return it != m.var_types.end() ? it->second : ty_int();
  }

  // A variable naming the term, reusing it when it already is one.
  Var as_var(SymState& s, const TermPtr& t, const std::string& base) {
    if (auto v = as_lone_var(t)) return *v;
    Var w = names.fresh(base);
    s.pure = p_and(s.pure, p_eq(t_var(w), t));
    return w;
  }

  TermPtr atom_term(const SymState& s, const ExprPtr& e) {
    switch (e->kind) {
      case Expr::Kind::null_lit:
        return t_int(0);
      case Expr::Kind::int_lit:
        return t_int(e->ival);
      case Expr::Kind::float_lit:
        return t_var(names.fresh("fl"));  // opaque to the integer logic
      case Expr::Kind::var: {
        auto it = s.latest.find(e->name);
        if (it == s.latest.end())
          throw ResolveError(e->span, "unbound variable '" + e->name + "'");
        return it->second;
      }
      default:
        throw ResolveError(e->span, "operand is not atomic");
    }
  }

  // Bind a program variable to a value. Scalar type invariants attach here
  // so they hold at every introduction site.
  void intro(SymState& s, const std::string& var, const TermPtr& val) {
    s.latest[var] = val;
    Type t = type_of(var);
    if (t.kind == TyKind::uint_)
      s.pure = p_and(s.pure, p_ge(val, t_int(0)));
    else if (t.kind == TyKind::bool_)
      s.pure = p_and(s.pure, p_or(p_eq(val, t_int(0)), p_eq(val, t_int(1))));
  }

  // Replace predicate instances whose root is known null or non-null by the
  // surviving branches of their definition. Folded knowledge (list emptiness
  // after a null test, say) becomes explicit this way.
  std::vector<SymState> settle(SymState s) {
    std::vector<SymState> done, work;
    work.push_back(std::move(s));
    int steps = 0;
    while (!work.empty()) {
      SymState cur = std::move(work.back());
      work.pop_back();
      bool expanded = false;
      for (std::size_t i = 0; i < cur.heap.size() && !expanded; ++i) {
        const HeapAtom h = cur.heap[i];
        if (!h.is_pred) continue;
        bool null_here = holds(cur, p_eq(t_var(h.root), t_int(0)));
        bool nonnull = !null_here && holds(cur, p_ne(t_var(h.root), t_int(0)));
        if (!null_here && !nonnull) continue;
        if (++steps > kSettleCap)
          throw ResourceLimit("predicate unfolding did not converge");
        cur.heap.erase(cur.heap.begin() + static_cast<long>(i));
        for (UnfoldBranch& b : unfold(prog, h, names)) {
          SymState nxt = cur;
          nxt.heap.insert(nxt.heap.end(), b.heap.begin(), b.heap.end());
          nxt.pure = p_and(nxt.pure, b.pure);
          if (sat(nxt)) work.push_back(std::move(nxt));
        }
        expanded = true;
      }
      if (!expanded) done.push_back(std::move(cur));
    }
    return done;
  }

  struct Located {
    SymState state;
    std::size_t idx;  // record atom in state.heap
  };

  // The record atom at an address, demand-unfolding any predicate that sits
  // there. An address covered by no branch is a possible bad dereference.
  std::vector<Located> locate(SymState s, const TermPtr& addr, const Span& sp,
                              const std::string& site, int depth = 0) {
    if (depth > 8) throw ResourceLimit("dereference chased too many unfolds");
    auto lone = as_lone_var(addr);
    auto same_root = [&](const HeapAtom& h) {
      return (lone && *lone == h.root) || holds(s, p_eq(t_var(h.root), addr));
    };
    for (std::size_t i = 0; i < s.heap.size(); ++i)
      if (!s.heap[i].is_pred && same_root(s.heap[i]))
        return {{std::move(s), i}};
    for (std::size_t i = 0; i < s.heap.size(); ++i) {
      if (!s.heap[i].is_pred || !same_root(s.heap[i])) continue;
      const HeapAtom h = s.heap[i];
      s.heap.erase(s.heap.begin() + static_cast<long>(i));
      std::vector<Located> out;
      for (UnfoldBranch& b : unfold(prog, h, names)) {
        SymState nxt = s;
        nxt.heap.insert(nxt.heap.end(), b.heap.begin(), b.heap.end());
        nxt.pure = p_and(nxt.pure, b.pure);
        if (!sat(nxt)) continue;
        auto sub = locate(std::move(nxt), addr, sp, site, depth + 1);
        out.insert(out.end(), std::make_move_iterator(sub.begin()),
                   std::make_move_iterator(sub.end()));
      }
      return out;
    }
    fail(sp, site, "possible null or invalid dereference");
    return {};
  }

  std::vector<std::pair<SymState, TermPtr>> read_field(SymState s,
                                                       const ExprPtr& e) {
    TermPtr base = atom_term(s, e->a);
    std::vector<std::pair<SymState, TermPtr>> out;
    for (Located& l : locate(std::move(s), base, e->span, fmt_expr(e))) {
      const HeapAtom& h = l.state.heap[l.idx];
      const DataDecl* dd = prog.find_data(h.name);
      int fi = dd ? dd->field_index(e->name) : -1;
      if (fi < 0) {
        fail(e->span, fmt_expr(e), "no such field");
        continue;
      }
      TermPtr val = t_var(h.args[static_cast<std::size_t>(fi)]);
      out.emplace_back(std::move(l.state), std::move(val));
    }
    return out;
  }

  std::vector<SymState> write_field(SymState s, const Stmt& st) {
    TermPtr base = atom_term(s, st.lhs->a);
    TermPtr val = atom_term(s, st.expr);
    std::vector<SymState> out;
    for (Located& l : locate(std::move(s), base, st.span, fmt_expr(st.lhs))) {
      HeapAtom& h = l.state.heap[l.idx];
      const DataDecl* dd = prog.find_data(h.name);
      int fi = dd ? dd->field_index(st.lhs->name) : -1;
      if (fi < 0) {
        fail(st.span, fmt_expr(st.lhs), "no such field");
        continue;
      }
      h.args[static_cast<std::size_t>(fi)] = as_var(l.state, val, "f");
      out.push_back(std::move(l.state));
    }
    return out;
  }

  std::pair<SymState, TermPtr> alloc(SymState s, const ExprPtr& e) {
    HeapAtom h;
    h.root = names.fresh(e->name);
    h.name = e->name;
    h.span = e->span;
    const DataDecl* dd = prog.find_data(e->name);
    for (std::size_t i = 0; i < e->args.size(); ++i) {
      std::string base =
          dd && i < dd->fields.size() ? dd->fields[i].name : "f";
      h.args.push_back(as_var(s, atom_term(s, e->args[i]), base));
    }
    s.heap.push_back(h);
    TermPtr v = t_var(h.root);
    return {std::move(s), v};
  }

  // -------------------------------------------------------------------------
  // Calls

  struct CallOut {
    SymState state;
    TermPtr value;  // null for void callees
  };

  static bool pure_only(const SepFormula& f) {
    for (const SepDisjunct& d : f.disjuncts)
      if (!d.heap.empty()) return false;
    return true;
  }

  // Disjunction of a formula's pure parts, binders skolemized fresh. The
  // fresh names are appended to ex_out so callers can quantify them.
  PurePtr flatten(const SepFormula& f, std::vector<Var>* ex_out) {
    PurePtr out = p_false();
    for (const SepDisjunct& d : f.disjuncts)
      out = p_or(out, freshen_ex(d, names, ex_out).pure);
    return out;
  }

  // Ghost variables of a spec pair (spec names that are not parameters) get
  // one fresh symbol each; requires-side ghosts are collected separately so
  // precondition checks can quantify exactly them.
  std::map<Var, Var> ghost_map(const Method& callee, const SpecPair& pair,
                               const std::map<Var, Var>& formals,
                               std::vector<Var>* req_ghosts) {
    std::map<Var, Var> r = formals;
    for (const Var& v : free_vars(pair.requires_)) {
      if (callee.find_param(v) || r.count(v)) continue;
      r[v] = names.fresh(v);
      if (req_ghosts) req_ghosts->push_back(r[v]);
    }
    for (const Var& v : free_vars(pair.ensures_)) {
      if (callee.find_param(v) || r.count(v)) continue;
      if (v == "res" || (!v.empty() && v.back() == '\'')) continue;
      r[v] = names.fresh(v);
    }
    return r;
  }

  // One continuation per ensures disjunct on top of each residue: the frame
  // plus the renamed postcondition heap, the result and by-ref exit values
  // as fresh symbols, error-flavored pairs escalating the path.
  std::vector<CallOut> continue_with(const SymState& s, const Method& callee,
                                     const SpecPair& pair,
                                     const std::map<Var, Var>& r,
                                     const std::vector<Residue>& residues,
                                     const Span& fsp, const std::string& ftext,
                                     const ExprPtr& call) {
    std::vector<CallOut> out;
    for (const Residue& res : residues) {
      for (const SepDisjunct& ed : pair.ensures_.disjuncts) {
        SymState nxt = s;
        nxt.heap = res.frame;
        nxt.pure = res.pure;

        std::map<Var, Var> r2 = r;
        TermPtr value;
        if (callee.ret.kind != TyKind::void_) {
          Var rv = names.fresh("ret");
          r2["res"] = rv;
          value = t_var(rv);
          if (callee.ret.kind == TyKind::uint_)
            nxt.pure = p_and(nxt.pure, p_ge(value, t_int(0)));
        }
        for (std::size_t i = 0; i < callee.params.size(); ++i) {
          const Method::Param& p = callee.params[i];
          if (!p.by_ref) continue;
          Var pv = names.fresh(p.name);
          r2[p.name + "'"] = pv;
          intro(nxt, call->args[i]->name, t_var(pv));
        }

        SepDisjunct post = rename(freshen_ex(ed, names), r2);
        for (const HeapAtom& ha : post.heap) {
          HeapAtom h = ha;
          h.root = bound_var(nxt, h.root, res.bind);
          for (Var& a : h.args) a = bound_var(nxt, a, res.bind);
          nxt.heap.push_back(std::move(h));
        }
        nxt.pure = p_and(nxt.pure, pure_subst(post.pure, res.bind));
        if (!sat(nxt)) continue;
        if (pair.is_err) {
          escalate(nxt, PathStatus::must);
          nxt.pending.push_back({Severity::must_overflow, fsp, ftext,
                                 guard_text(callee, true, r)});
        }
        out.push_back({std::move(nxt), value});
      }
    }
    return out;
  }

  Var bound_var(SymState& s, const Var& v, const std::map<Var, TermPtr>& bind) {
    auto it = bind.find(v);
    if (it == bind.end()) return v;
    return as_var(s, it->second, v);
  }

  std::string guard_text(const Method& callee, bool err,
                         const std::map<Var, Var>& r) {
    PurePtr g = p_false();
    for (const SpecPair& sp : callee.specs) {
      if (sp.is_err != err) continue;
      for (const SepDisjunct& d : sp.requires_.disjuncts) g = p_or(g, d.pure);
    }
    return fmt_pure(pure_subst(g, lift_renaming(r)));
  }

  // The first spec pair whose precondition the state entails decides the
  // call. A purely scalar precondition is checked as one disjunction (so a
  // case split across its disjuncts still proves it); heap preconditions go
  // through the entailment engine and may split the state. When no pair
  // applies but the callee separates an error region from a safe region
  // over scalars only, the call degrades to a conditional-overflow report.
  std::vector<CallOut> apply_call(const SymState& st, const ExprPtr& call) {
    const Method* callee = prog.find_method(call->name);
    if (!callee)
      throw ResolveError(call->span, "unknown method '" + call->name + "'");

    SymState s = st;
    std::map<Var, Var> formals;
    for (std::size_t i = 0; i < callee->params.size(); ++i) {
      const Method::Param& p = callee->params[i];
      formals[p.name] = as_var(s, atom_term(s, call->args[i]), p.name);
    }

    Span fsp = call->op_span.known() ? call->op_span : call->span;
    std::string ftext = !call->op_text.empty() ? call->op_text : fmt_expr(call);

    for (const SpecPair& pair : callee->specs) {
      std::vector<Var> req_ghosts;
      std::map<Var, Var> r = ghost_map(*callee, pair, formals, &req_ghosts);
      SepFormula req = rename(pair.requires_, r);

      std::vector<Residue> residues;
      bool applies = false;
      if (pure_only(req)) {
        std::vector<Var> ys = req_ghosts;
        PurePtr target = flatten(req, &ys);
        if (lia.implies(ctx(s), ys, target)) {
          applies = true;
          residues.push_back({s.heap, p_and(s.pure, target), {}});
        }
      } else {
        SepFormula req2;
        for (const SepDisjunct& d : req.disjuncts)
          req2.disjuncts.push_back(freshen_ex(d, names));
        EntailOptions eo{opt.fuel, opt.trace};
        if (auto rs =
                entail(prog, lia, names, s.heap, s.pure, req2, req_ghosts, eo)) {
          if (rs->empty()) return {};  // state itself is infeasible
          applies = true;
          residues = std::move(*rs);
        }
      }
      if (applies)
        return continue_with(s, *callee, pair, r, residues, fsp, ftext, call);
    }

    return fallback(s, *callee, formals, fsp, ftext, call);
  }

  std::vector<CallOut> fallback(const SymState& s, const Method& callee,
                                const std::map<Var, Var>& formals,
                                const Span& fsp, const std::string& ftext,
                                const ExprPtr& call) {
    bool have_err = false, have_safe = false, scalar_specs = true;
    for (const SpecPair& sp : callee.specs) {
      (sp.is_err ? have_err : have_safe) = true;
      if (!pure_only(sp.requires_)) scalar_specs = false;
    }
    if (!have_err || !have_safe || !scalar_specs) {
      fail(fsp, ftext,
           "cannot establish the precondition of '" + callee.name + "'");
      return {};
    }

    auto region = [&](bool err) {
      PurePtr g = p_false();
      for (const SpecPair& sp : callee.specs) {
        if (sp.is_err != err) continue;
        for (const SepDisjunct& d : sp.requires_.disjuncts)
          g = p_or(g, freshen_ex(d, names).pure);
      }
      return pure_subst(g, lift_renaming(formals));
    };
    PurePtr err_region = region(true);
    PurePtr safe_region = region(false);
    bool err_sat = lia.sat_bool(p_and(ctx(s), err_region));
    bool safe_sat = lia.sat_bool(p_and(ctx(s), safe_region));
    if (!err_sat && !safe_sat) return {};

    bool through_err = err_sat && !safe_sat;
    std::optional<Finding> report;
    PathStatus st = PathStatus::safe;
    if (err_sat && safe_sat) {
      st = PathStatus::may;
      report = Finding{Severity::may_overflow, fsp, ftext, fmt_pure(err_region)};
    } else if (through_err) {
      st = PathStatus::must;
      report =
          Finding{Severity::must_overflow, fsp, ftext, fmt_pure(err_region)};
    }

    std::vector<CallOut> out;
    for (const SpecPair& sp : callee.specs) {
      if (sp.is_err != through_err) continue;
      std::map<Var, Var> r = ghost_map(callee, sp, formals, nullptr);
      for (const SepDisjunct& rd : sp.requires_.disjuncts) {
        Residue base{s.heap,
                     p_and(s.pure, rename(freshen_ex(rd, names), r).pure),
                     {}};
        for (CallOut& c :
             continue_with(s, callee, sp, r, {base}, fsp, ftext, call))
          out.push_back(std::move(c));
      }
    }
    for (CallOut& c : out) {
      escalate(c.state, st);
      if (report) c.state.pending.push_back(*report);
    }
    return out;
  }

  // -------------------------------------------------------------------------
  // Statements

  std::vector<std::pair<SymState, TermPtr>> eval_rhs(SymState s,
                                                     const ExprPtr& e) {
    switch (e->kind) {
      case Expr::Kind::null_lit:
      case Expr::Kind::int_lit:
      case Expr::Kind::float_lit:
      case Expr::Kind::var: {
        TermPtr v = atom_term(s, e);
        return {{std::move(s), v}};
      }
      case Expr::Kind::field_read:
        return read_field(std::move(s), e);
      case Expr::Kind::new_obj: {
        auto [st, v] = alloc(std::move(s), e);
        return {{std::move(st), v}};
      }
      case Expr::Kind::cmp: {
        TermPtr l = atom_term(s, e->a);
        TermPtr r = atom_term(s, e->b);
        PurePtr at = cmp_pure(e->op, l, r);
        Var b = names.fresh("b");
        s.pure = p_and(s.pure, p_or(p_and(at, p_eq(t_var(b), t_int(1))),
                                    p_and(p_not(at), p_eq(t_var(b), t_int(0)))));
        return {{std::move(s), t_var(b)}};
      }
      case Expr::Kind::call: {
        std::vector<std::pair<SymState, TermPtr>> out;
        for (CallOut& c : apply_call(s, e))
          out.emplace_back(std::move(c.state), c.value);
        return out;
      }
      default:
        throw ResolveError(e->span, "expression was not lowered");
    }
  }

  std::vector<SymState> fork_cond(const SymState& s, const ExprPtr& c,
                                  bool taken) {
    PurePtr at;
    if (c->kind == Expr::Kind::var) {
      auto it = s.latest.find(c->name);
      if (it == s.latest.end())
        throw ResolveError(c->span, "unbound variable '" + c->name + "'");
      at = p_eq(it->second, t_int(taken ? 1 : 0));
    } else if (c->kind == Expr::Kind::cmp) {
      SymState tmp = s;
      PurePtr a = cmp_pure(c->op, atom_term(tmp, c->a), atom_term(tmp, c->b));
      at = taken ? a : p_not(a);
    } else {
      throw ResolveError(c->span, "condition was not lowered");
    }
    SymState nxt = s;
    nxt.pure = p_and(nxt.pure, at);
    if (!sat(nxt)) return {};
    return settle(std::move(nxt));
  }

  std::vector<SymState> run_stmt(SymState s, const Stmt& st) {
    std::vector<SymState> out;
    switch (st.kind) {
      case Stmt::Kind::decl: {
        if (!st.expr) {
          intro(s, st.name, t_var(names.fresh(st.name)));
          out.push_back(std::move(s));
          return out;
        }
        for (auto& [s2, v] : eval_rhs(std::move(s), st.expr)) {
          intro(s2, st.name, v);
          out.push_back(std::move(s2));
        }
        return out;
      }
      case Stmt::Kind::assign: {
        for (auto& [s2, v] : eval_rhs(std::move(s), st.expr)) {
          intro(s2, st.name, v);
          out.push_back(std::move(s2));
        }
        return out;
      }
      case Stmt::Kind::field_write:
        return write_field(std::move(s), st);
      case Stmt::Kind::call_stmt: {
        for (auto& [s2, v] : eval_rhs(std::move(s), st.expr))
          out.push_back(std::move(s2));
        return out;
      }
      case Stmt::Kind::return_: {
        if (!st.expr) {
          s.returned = true;
          out.push_back(std::move(s));
          return out;
        }
        for (auto& [s2, v] : eval_rhs(std::move(s), st.expr)) {
          s2.returned = true;
          s2.ret = v;
          out.push_back(std::move(s2));
        }
        return out;
      }
      case Stmt::Kind::if_: {
        for (SymState& t : fork_cond(s, st.expr, true))
          for (SymState& r : run_block({std::move(t)}, st.then_body))
            out.push_back(std::move(r));
        for (SymState& e : fork_cond(s, st.expr, false))
          for (SymState& r : run_block({std::move(e)}, st.else_body))
            out.push_back(std::move(r));
        return out;
      }
      case Stmt::Kind::while_:
        throw ResolveError(st.span, "loop was not lowered");
    }
    return out;
  }

  std::vector<SymState> run_block(std::vector<SymState> states,
                                  const Block& b) {
    for (const StmtPtr& st : b) {
      std::vector<SymState> nxt;
      for (SymState& s : states) {
        if (s.returned) {
          nxt.push_back(std::move(s));
          continue;
        }
        for (SymState& s2 : run_stmt(std::move(s), *st))
          nxt.push_back(std::move(s2));
      }
      states = std::move(nxt);
      if (states.size() > kStateCap)
        throw ResourceLimit("too many symbolic states");
    }
    return states;
  }
};

// Does the exit state satisfy the pair's postcondition? res and the primes
// of by-ref parameters are read off the state; unprimed parameters denote
// entry values, which are the parameter names themselves. Spec names fixed
// by the precondition stay fixed; names the postcondition introduces are
// existential. Leftover heap is tolerated as frame.
inline bool covers(const Program& prog, Lia& lia, NameSupply& names, Exec& ex,
                   const Method& m, const SpecPair& sp,
                   const std::set<Var>& fixed, const SymState& fin,
                   const VerifyOptions& opt) {
  SymState s = fin;
  std::map<Var, Var> r2;
  if (m.ret.kind != TyKind::void_ && s.ret)
    r2["res"] = ex.as_var(s, s.ret, "res");
  for (const Method::Param& p : m.params) {
    if (!p.by_ref) continue;
    r2[p.name + "'"] = ex.as_var(s, s.latest.at(p.name), p.name);
  }
  std::vector<Var> ens_ex;
  for (const Var& gv : free_vars(sp.ensures_)) {
    if (m.find_param(gv) || fixed.count(gv) || r2.count(gv)) continue;
    if (gv == "res" || (!gv.empty() && gv.back() == '\'')) continue;
    r2[gv] = names.fresh(gv);
    ens_ex.push_back(r2[gv]);
  }
  SepFormula cons;
  for (const SepDisjunct& d : sp.ensures_.disjuncts)
    cons.disjuncts.push_back(rename(freshen_ex(d, names), r2));
  EntailOptions eo{opt.fuel, opt.trace};
  return entail(prog, lia, names, s.heap, s.pure, cons, ens_ex, eo).has_value();
}

inline void dedup_findings(std::vector<Finding>& fs) {
  std::vector<Finding> out;
  for (Finding& f : fs) {
    bool dup = false;
    for (const Finding& g : out)
      dup = dup || (g.severity == f.severity && g.span.line == f.span.line &&
                    g.span.col == f.span.col);
    if (!dup) out.push_back(std::move(f));
  }
  fs = std::move(out);
}

}  // namespace verify_detail

// Verify one method of a lowered program. Pairs sharing a precondition are
// checked against one symbolic run from that precondition; each exit state
// must be covered by a pair of matching flavor (safe exits by an ordinary
// pair, guaranteed-overflow exits by an error pair). Overflow findings on an
// exit that its error contract covers are discharged; everything else is
// reported and fails the method.
inline MethodVerdict verify_method(const Program& prog, Lia& lia,
                                   NameSupply& names, const Method& m,
                                   const VerifyOptions& opt = {}) {
  using verify_detail::PathStatus;
  using verify_detail::SymState;

  MethodVerdict v;
  v.name = m.name;
  v.owner = m.owner;
  v.span = m.span;
  for (const SpecPair& sp : m.specs)
    if (sp.is_err) v.has_err_contract = true;
  if (!m.body) {
    v.status = VerdictStatus::assumed;
    return v;
  }

  struct Group {
    std::string key;
    const SepFormula* req;
    std::vector<const SpecPair*> pairs;
  };
  std::vector<Group> groups;
  for (const SpecPair& sp : m.specs) {
    std::string key = fmt_sep(sp.requires_);
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return g.key == key; });
    if (it == groups.end())
      groups.push_back({std::move(key), &sp.requires_, {&sp}});
    else
      it->pairs.push_back(&sp);
  }

  verify_detail::Exec ex{prog, lia, names, m, opt};
  for (const Group& g : groups) {
    std::vector<SymState> finals;
    for (const SepDisjunct& d : g.req->disjuncts) {
      SepDisjunct d2 = freshen_ex(d, names);
      SymState st;
      st.heap = d2.heap;
      st.pure = d2.pure;
      for (const Method::Param& p : m.params)
        ex.intro(st, p.name, t_var(p.name));
      if (!ex.sat(st)) continue;  // vacuous precondition disjunct
      for (SymState& s2 : ex.settle(std::move(st)))
        for (SymState& f : ex.run_block({std::move(s2)}, *m.body))
          finals.push_back(std::move(f));
    }

    std::set<Var> fixed;  // precondition ghosts stay universally fixed
    for (const Var& gv : free_vars(*g.req))
      if (!m.find_param(gv)) fixed.insert(gv);

    for (SymState& f : finals) {
      if (!f.returned && m.ret.kind != TyKind::void_) {
        f.ret = t_var(names.fresh("res"));
        if (m.ret.kind == TyKind::uint_)
          f.pure = p_and(f.pure, p_ge(f.ret, t_int(0)));
      }
      bool covered = false;
      if (f.status != PathStatus::may) {
        bool want_err = f.status == PathStatus::must;
        for (const SpecPair* sp : g.pairs) {
          if (sp->is_err != want_err) continue;
          if (verify_detail::covers(prog, lia, names, ex, m, *sp, fixed, f,
                                    opt)) {
            covered = true;
            break;
          }
        }
      }
      if (covered) {
        f.pending.clear();  // discharged by the matching contract
        continue;
      }
      v.status = VerdictStatus::failed;
      std::string why =
          f.status == PathStatus::may
              ? "a possible overflow has no matching error contract"
          : f.status == PathStatus::must
              ? "a guaranteed overflow has no matching error contract"
              : "cannot establish the postcondition";
      if (v.reason.empty()) v.reason = why;
      if (f.pending.empty())
        v.findings.push_back(
            {Severity::verification_failure, m.span, m.name, why});
      for (Finding& fi : f.pending) v.findings.push_back(std::move(fi));
    }
  }

  for (const verify_detail::Exec::Failure& fl : ex.failures) {
    v.status = VerdictStatus::failed;
    if (v.reason.empty()) v.reason = fl.reason;
    v.findings.push_back(
        {Severity::verification_failure, fl.span, fl.site, fl.reason});
  }
  verify_detail::dedup_findings(v.findings);
  return v;
}

// Verdicts for every user-visible method of a lowered program, in program
// order (synthesized loop bodies follow their owners). Injected builtins are
// assumed, not reported.
inline std::vector<MethodVerdict> verify_program(const Program& lowered,
                                                 Lia& lia, NameSupply& names,
                                                 const VerifyOptions& opt = {}) {
  std::vector<MethodVerdict> out;
  for (const Method& m : lowered.methods) {
    if (m.builtin) continue;
    out.push_back(verify_method(lowered, lia, names, m, opt));
  }
  return out;
}

}  // namespace sentinel
