#pragma once

#include <set>
#include <string>
#include <vector>

#include "sentinel/ast.hpp"
#include "sentinel/sepform.hpp"

namespace sentinel {

struct ResolveOptions {
  bool enable_sub = false;
};

inline bool reserved_method_name(const std::string& n) {
  return n == "add" || n == "uadd" || n == "sub" || n == "usub";
}

namespace resolve_detail {

inline bool has_prime(const std::string& n) {
  return n.find('\'') != std::string::npos;
}

inline bool num_type(const Type& t) {
  return t.kind == TyKind::int_ || t.kind == TyKind::uint_;
}

// null carries an empty class name and matches any reference type.
inline bool compat(const Type& dst, const Type& src) {
  if (num_type(dst) && num_type(src)) return true;
  if (dst.kind != src.kind) return false;
  if (dst.kind == TyKind::ref_)
    return src.cls.empty() || dst.cls.empty() || dst.cls == src.cls;
  return true;
}

struct Scope {
  std::vector<std::vector<std::string>> frames;
  std::map<std::string, Type> types;

  void push() { frames.emplace_back(); }
  void pop() {
    for (const auto& n : frames.back()) types.erase(n);
    frames.pop_back();
  }
  bool declared(const std::string& n) const { return types.count(n) != 0; }
  void declare(const std::string& n, const Type& t) {
    frames.back().push_back(n);
    types.emplace(n, t);
  }
};

class Resolver {
 public:
  Resolver(Program& p, const ResolveOptions& opt) : prog_(p), opt_(opt) {}

  void run() {
    check_toplevel_names();
    for (auto& d : prog_.datas) check_data(d);
    for (auto& pr : prog_.preds) check_pred(pr);
    for (auto& m : prog_.methods) check_method(m);
  }

 private:
  Program& prog_;
  const ResolveOptions& opt_;
  Method* cur_ = nullptr;
  Scope scope_;
  std::set<std::string> method_names_;

  [[noreturn]] void fail(const Span& sp, const std::string& msg) const {
    throw ResolveError(sp, msg);
  }

  void check_toplevel_names() {
    std::set<std::string> shapes;  // data and pred share the heap namespace
    for (const auto& d : prog_.datas)
      if (!shapes.insert(d.name).second)
        fail(d.span, "duplicate data type '" + d.name + "'");
    for (const auto& pr : prog_.preds)
      if (!shapes.insert(pr.name).second)
        fail(pr.span, "duplicate heap shape name '" + pr.name + "'");
    for (const auto& m : prog_.methods)
      if (!method_names_.insert(m.name).second)
        fail(m.span, "duplicate method '" + m.name + "'");
  }

  void check_value_type(const Type& t, const Span& sp) const {
    if (t.kind == TyKind::void_) fail(sp, "void is not a value type");
    if (t.kind == TyKind::ref_ && !prog_.find_data(t.cls))
      fail(sp, "unknown data type '" + t.cls + "'");
  }

  void check_data(const DataDecl& d) const {
    std::set<std::string> seen;
    for (const auto& f : d.fields) {
      if (!seen.insert(f.name).second)
        fail(d.span, "duplicate field '" + f.name + "' in '" + d.name + "'");
      check_value_type(f.type, d.span);
    }
  }

  // Spatial atoms name either a data type (arity = field count) or a
  // predicate (arity = parameter count minus the root).
  void check_heap_atom(HeapAtom& h) const {
    if (const DataDecl* d = prog_.find_data(h.name)) {
      h.is_pred = false;
      if (h.args.size() != d->fields.size())
        fail(h.span, "'" + h.name + "' has " +
                         std::to_string(d->fields.size()) + " fields, got " +
                         std::to_string(h.args.size()) + " arguments");
      return;
    }
    if (const PredDecl* pr = prog_.find_pred(h.name)) {
      h.is_pred = true;
      std::size_t want = pr->params.size() - 1;
      if (h.args.size() != want)
        fail(h.span, "'" + h.name + "' takes " + std::to_string(want) +
                         " arguments besides the root, got " +
                         std::to_string(h.args.size()));
      return;
    }
    fail(h.span, "unknown heap shape '" + h.name + "'");
  }

  // strict = every variable must come from `bound` (predicate bodies);
  // otherwise free variables are specification ghosts and are accepted.
  void check_sep(SepFormula& f, const std::set<Var>& bound, bool strict,
                 const Span& sp) const {
    for (auto& d : f.disjuncts) {
      for (auto& h : d.heap) check_heap_atom(h);
      if (!strict) continue;
      for (const auto& v : free_vars(d))
        if (!bound.count(v))
          fail(sp, "unbound variable '" + v + "' in predicate body");
    }
  }

  void check_pred(PredDecl& pr) const {
    std::set<std::string> seen;
    for (const auto& p : pr.params)
      if (!seen.insert(p).second)
        fail(pr.span, "duplicate parameter '" + p + "' in '" + pr.name + "'");
    if (pr.params.empty()) fail(pr.span, "predicate needs a root parameter");
    std::set<Var> bound(pr.params.begin(), pr.params.end());
    check_sep(pr.body, bound, true, pr.span);
    std::set<Var> iv;
    pure_vars(pr.inv, iv);
    for (const auto& v : iv)
      if (!bound.count(v))
        fail(pr.span, "invariant of '" + pr.name + "' mentions unbound '" + v +
                          "'");
  }

  static std::set<Var> all_vars(const SepFormula& f) {
    std::set<Var> out;
    for (const auto& d : f.disjuncts) disjunct_vars(d, out);
    return out;
  }

  void ban_primes_in(const SepFormula& f, const Span& sp,
                     const std::string& where) const {
    for (const auto& v : all_vars(f))
      if (has_prime(v))
        fail(sp, "primed variable '" + v + "' is not allowed in " + where);
  }

  void ban_res_in(const SepFormula& f, const Span& sp,
                  const std::string& where) const {
    for (const auto& v : all_vars(f))
      if (v == "res") fail(sp, "'res' is not allowed in " + where);
  }

  void check_specs(Method& m, std::vector<SpecPair>& specs, bool loop_spec,
                   const Span& sp) {
    if (specs.empty())
      fail(sp, loop_spec ? "loop needs at least one specification pair"
                         : "method '" + m.name + "' has no specification");
    for (auto& pair : specs) {
      std::set<Var> none;
      check_sep(pair.requires_, none, false, pair.span);
      check_sep(pair.ensures_, none, false, pair.span);
      ban_primes_in(pair.requires_, pair.span, "a precondition");
      ban_res_in(pair.requires_, pair.span, "a precondition");
      bool primes_ok = loop_spec || m.synthetic;
      if (!primes_ok) ban_primes_in(pair.ensures_, pair.span, "this postcondition");
      if (m.ret.kind == TyKind::void_ && !loop_spec)
        ban_res_in(pair.ensures_, pair.span, "the postcondition of a void method");
      if (loop_spec) ban_res_in(pair.ensures_, pair.span, "a loop postcondition");
    }
  }

  void check_method(Method& m) {
    cur_ = &m;
    if (!m.builtin && reserved_method_name(m.name))
      fail(m.span, "'" + m.name + "' is a reserved method name");
    if (m.ret.kind == TyKind::ref_ && !prog_.find_data(m.ret.cls))
      fail(m.span, "unknown return type '" + m.ret.cls + "'");

    m.var_types.clear();
    scope_ = Scope{};
    scope_.push();
    std::set<std::string> seen;
    for (const auto& p : m.params) {
      if (!seen.insert(p.name).second)
        fail(m.span, "duplicate parameter '" + p.name + "'");
      if (p.name == "res") fail(m.span, "'res' is a reserved name");
      if (has_prime(p.name))
        fail(m.span, "primed parameter name '" + p.name + "'");
      check_value_type(p.type, m.span);
      if (p.by_ref && !p.type.is_scalar())
        fail(m.span, "ref parameter '" + p.name + "' must be scalar");
      scope_.declare(p.name, p.type);
      m.var_types[p.name] = p.type;
    }

    check_specs(m, m.specs, false, m.span);

    if (m.body) {
      scope_.push();
      check_block(*m.body, false);
      scope_.pop();
    }
    scope_.pop();
    cur_ = nullptr;
  }

  void check_block(Block& b, bool in_loop) {
    for (auto& s : b) check_stmt(*s, in_loop);
  }

  void check_stmt(Stmt& s, bool in_loop) {
    using K = Stmt::Kind;
    switch (s.kind) {
      case K::decl: {
        if (has_prime(s.name) || s.name == "res")
          fail(s.span, "'" + s.name + "' cannot be declared");
        if (scope_.declared(s.name))
          fail(s.span, "'" + s.name + "' shadows an existing name");
        check_value_type(s.type, s.span);
        if (s.expr) {
          Type t = type_expr(*s.expr);
          if (!compat(s.type, t))
            fail(s.span, "initializer type does not match '" + s.name + "'");
        }
        scope_.declare(s.name, s.type);
        cur_->var_types[s.name] = s.type;
        return;
      }
      case K::assign: {
        if (!scope_.declared(s.name))
          fail(s.span, "assignment to unknown variable '" + s.name + "'");
        Type dst = scope_.types.at(s.name);
        Type src = type_expr(*s.expr);
        if (!compat(dst, src))
          fail(s.span, "type mismatch assigning to '" + s.name + "'");
        return;
      }
      case K::field_write: {
        Type ft = type_expr(*s.lhs);
        Type src = type_expr(*s.expr);
        if (!compat(ft, src)) fail(s.span, "type mismatch in field assignment");
        return;
      }
      case K::call_stmt: {
        type_expr(*s.expr);
        return;
      }
      case K::return_: {
        if (in_loop) fail(s.span, "return is not allowed inside a loop body");
        if (cur_->ret.kind == TyKind::void_) {
          if (s.expr) fail(s.span, "void method cannot return a value");
        } else {
          if (!s.expr) fail(s.span, "missing return value");
          Type t = type_expr(*s.expr);
          if (!compat(cur_->ret, t)) fail(s.span, "return type mismatch");
        }
        return;
      }
      case K::if_: {
        check_cond(*s.expr);
        scope_.push();
        check_block(s.then_body, in_loop);
        scope_.pop();
        scope_.push();
        check_block(s.else_body, in_loop);
        scope_.pop();
        return;
      }
      case K::while_: {
        check_cond(*s.expr);
        check_specs(*cur_, s.specs, true, s.span);
        for (const auto& pair : s.specs)
          for (const auto& v : all_vars(pair.ensures_))
            if (has_prime(v)) {
                std::string base = v.substr(0, v.find('\''));
                if (!scope_.declared(base))
                  fail(pair.span, "primed variable '" + v +
                                      "' has no matching variable in scope");
              }
        scope_.push();
        check_block(s.body, true);
        scope_.pop();
        return;
      }
    }
  }

  void check_cond(Expr& e) {
    Type t = type_expr(e);
    if (e.kind == Expr::Kind::cmp) return;
    if (e.kind == Expr::Kind::var && t.kind == TyKind::bool_) return;
    fail(e.span, "condition must be a comparison");
  }

  Type type_expr(Expr& e) {
    using K = Expr::Kind;
    switch (e.kind) {
      case K::null_lit: e.type = ty_ref(""); return e.type;
      case K::int_lit: e.type = ty_int(); return e.type;
      case K::float_lit: e.type = ty_float(); return e.type;
      case K::var: {
        if (!scope_.declared(e.name))
          fail(e.span, "unbound variable '" + e.name + "'");
        e.type = scope_.types.at(e.name);
        return e.type;
      }
      case K::field_read: {
        Type base = type_expr(*e.a);
        if (base.kind != TyKind::ref_ || base.cls.empty())
          fail(e.span, "field access on a non-reference");
        const DataDecl* d = prog_.find_data(base.cls);
        int fi = d->field_index(e.name);
        if (fi < 0)
          fail(e.span, "'" + base.cls + "' has no field '" + e.name + "'");
        e.type = d->fields[static_cast<std::size_t>(fi)].type;
        return e.type;
      }
      case K::add:
      case K::sub: {
        if (e.kind == K::sub && !opt_.enable_sub)
          fail(e.op_span, "subtraction is disabled; pass --enable-sub");
        Type a = type_expr(*e.a);
        Type b = type_expr(*e.b);
        if (!num_type(a) || !num_type(b))
          fail(e.op_span, "arithmetic needs integer operands");
        e.type = (a.kind == TyKind::uint_ && b.kind == TyKind::uint_)
                     ? ty_uint()
                     : ty_int();
        return e.type;
      }
      case K::cmp: {
        Type a = type_expr(*e.a);
        Type b = type_expr(*e.b);
        bool refs = (a.kind == TyKind::ref_ && b.kind == TyKind::ref_);
        if (refs) {
          if (e.op != CmpOp::eq && e.op != CmpOp::ne)
            fail(e.op_span, "references only compare with == and !=");
          if (!compat(a, b)) fail(e.op_span, "comparison of unrelated types");
        } else if (!num_type(a) || !num_type(b)) {
          fail(e.op_span, "comparison needs integer or reference operands");
        }
        e.type = ty_bool();
        return e.type;
      }
      case K::call: {
        const Method* callee = prog_.find_method(e.name);
        if (!callee) {
          std::string hint =
              (e.name == "sub" || e.name == "usub") && !opt_.enable_sub
                  ? " (subtraction support needs --enable-sub)"
                  : "";
          fail(e.span, "unknown method '" + e.name + "'" + hint);
        }
        if (e.args.size() != callee->params.size())
          fail(e.span, "'" + e.name + "' takes " +
                           std::to_string(callee->params.size()) +
                           " arguments, got " + std::to_string(e.args.size()));
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          Type at = type_expr(*e.args[i]);
          const auto& p = callee->params[i];
          if (!compat(p.type, at))
            fail(e.args[i]->span,
                 "argument " + std::to_string(i + 1) + " of '" + e.name +
                     "' has the wrong type");
          if (p.by_ref && e.args[i]->kind != K::var)
            fail(e.args[i]->span, "ref argument must be a variable");
        }
        e.type = callee->ret;
        return e.type;
      }
      case K::new_obj: {
        const DataDecl* d = prog_.find_data(e.name);
        if (!d) fail(e.span, "unknown data type '" + e.name + "'");
        if (e.args.size() != d->fields.size())
          fail(e.span, "'new " + e.name + "' needs " +
                           std::to_string(d->fields.size()) + " arguments");
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          Type at = type_expr(*e.args[i]);
          if (!compat(d->fields[i].type, at))
            fail(e.args[i]->span, "field initializer type mismatch");
        }
        e.type = ty_ref(e.name);
        return e.type;
      }
    }
    fail(e.span, "cannot type this expression");
  }
};

}  // namespace resolve_detail

inline void resolve(Program& p, const ResolveOptions& opt = {}) {
  resolve_detail::Resolver(p, opt).run();
}

}  // namespace sentinel
