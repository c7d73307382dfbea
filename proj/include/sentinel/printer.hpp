#pragma once

#include <string>

#include "sentinel/ast.hpp"
#include "sentinel/sepform.hpp"

namespace sentinel {

// Canonical source rendering. Printing is a fixpoint of the parser: parsing
// the printed form and printing again reproduces the same text. Comparisons
// are printed sugared (a != b, a < b) even though the core representation
// only has =, <= and negation.

inline std::string fmt_term(const TermPtr& t) { return term_str(t); }

namespace printer_detail {

// 0 = disjunction, 1 = conjunction, 2 = unit
inline void fmt_pure_prec(const PurePtr& p, int ctx, std::string& out) {
  switch (p->kind) {
    case Pure::Kind::truth:
      out += p->value ? "true" : "false";
      return;
    case Pure::Kind::atom:
      out += term_str(p->lhs);
      out += p->cmp == Cmp::eq ? " = " : " <= ";
      out += term_str(p->rhs);
      return;
    case Pure::Kind::neg: {
      const PurePtr& in = p->a;
      if (in->kind == Pure::Kind::atom) {
        if (in->cmp == Cmp::eq) {
          out += term_str(in->lhs);
          out += " != ";
          out += term_str(in->rhs);
        } else {
          out += term_str(in->rhs);
          out += " < ";
          out += term_str(in->lhs);
        }
        return;
      }
      out += "!(";
      fmt_pure_prec(in, 0, out);
      out += ')';
      return;
    }
    case Pure::Kind::conj: {
      bool paren = ctx > 1;
      if (paren) out += '(';
      fmt_pure_prec(p->a, 1, out);
      out += " & ";
      fmt_pure_prec(p->b, 1, out);
      if (paren) out += ')';
      return;
    }
    case Pure::Kind::disj: {
      bool paren = ctx > 0;
      if (paren) out += '(';
      fmt_pure_prec(p->a, 0, out);
      out += " | ";
      fmt_pure_prec(p->b, 0, out);
      if (paren) out += ')';
      return;
    }
  }
}

}  // namespace printer_detail

inline std::string fmt_pure(const PurePtr& p) {
  std::string out;
  printer_detail::fmt_pure_prec(p, 0, out);
  return out;
}

inline std::string fmt_heap_atom(const HeapAtom& h) {
  std::string out = h.root + "::" + h.name + "<";
  for (std::size_t i = 0; i < h.args.size(); ++i) {
    if (i) out += ", ";
    out += h.args[i];
  }
  out += '>';
  return out;
}

inline std::string fmt_disjunct(const SepDisjunct& d) {
  std::string out;
  if (!d.ex.empty()) {
    out += "exists ";
    for (std::size_t i = 0; i < d.ex.size(); ++i) {
      if (i) out += ", ";
      out += d.ex[i];
    }
    out += ": ";
  }
  std::string body;
  for (std::size_t i = 0; i < d.heap.size(); ++i) {
    if (i) body += " * ";
    body += fmt_heap_atom(d.heap[i]);
  }
  bool trivially_true =
      d.pure->kind == Pure::Kind::truth && d.pure->value;
  if (!trivially_true || d.heap.empty()) {
    if (!body.empty()) body += " & ";
    body += fmt_pure(d.pure);
  }
  return out + body;
}

inline std::string fmt_sep(const SepFormula& f) {
  std::string out;
  for (std::size_t i = 0; i < f.disjuncts.size(); ++i) {
    if (i) out += " | ";
    out += fmt_disjunct(f.disjuncts[i]);
  }
  return out;
}

inline std::string fmt_type(const Type& t) {
  switch (t.kind) {
    case TyKind::int_: return "int";
    case TyKind::uint_: return "uint";
    case TyKind::bool_: return "bool";
    case TyKind::float_: return "float";
    case TyKind::void_: return "void";
    case TyKind::ref_: return t.cls;
  }
  return "?";
}

inline std::string fmt_expr(const ExprPtr& e);

namespace printer_detail {

inline std::string fmt_cmp_op(CmpOp op) {
  switch (op) {
    case CmpOp::eq: return "==";
    case CmpOp::ne: return "!=";
    case CmpOp::lt: return "<";
    case CmpOp::le: return "<=";
    case CmpOp::gt: return ">";
    case CmpOp::ge: return ">=";
  }
  return "?";
}

// Right operands at the same additive level need parens to keep
// left associativity through a reparse.
inline std::string fmt_addend(const ExprPtr& e, bool rhs) {
  bool paren = rhs && (e->kind == Expr::Kind::add || e->kind == Expr::Kind::sub);
  std::string s = fmt_expr(e);
  return paren ? "(" + s + ")" : s;
}

}  // namespace printer_detail

inline std::string fmt_expr(const ExprPtr& e) {
  using K = Expr::Kind;
  switch (e->kind) {
    case K::null_lit: return "null";
    case K::int_lit: return std::to_string(e->ival);
    case K::float_lit: {
      std::string s = std::to_string(e->fval);
      return s;
    }
    case K::var: return e->name;
    case K::field_read: return fmt_expr(e->a) + "." + e->name;
    case K::call:
    case K::new_obj: {
      std::string out = e->kind == K::new_obj ? "new " + e->name : e->name;
      out += '(';
      for (std::size_t i = 0; i < e->args.size(); ++i) {
        if (i) out += ", ";
        out += fmt_expr(e->args[i]);
      }
      out += ')';
      return out;
    }
    case K::add:
    case K::sub:
      return printer_detail::fmt_addend(e->a, false) +
             (e->kind == K::add ? " + " : " - ") +
             printer_detail::fmt_addend(e->b, true);
    case K::cmp:
      return fmt_expr(e->a) + " " + printer_detail::fmt_cmp_op(e->op) + " " +
             fmt_expr(e->b);
  }
  return "?";
}

inline std::string fmt_spec(const SpecPair& sp) {
  return "requires " + fmt_sep(sp.requires_) +
         (sp.is_err ? " ensures_err " : " ensures ") + fmt_sep(sp.ensures_) +
         ";";
}

inline void fmt_block(const Block& b, int indent, std::string& out);

inline void fmt_stmt(const StmtPtr& s, int indent, std::string& out) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  using K = Stmt::Kind;
  switch (s->kind) {
    case K::decl:
      out += pad + fmt_type(s->type) + " " + s->name;
      if (s->expr) out += " = " + fmt_expr(s->expr);
      out += ";\n";
      return;
    case K::assign:
      out += pad + s->name + " = " + fmt_expr(s->expr) + ";\n";
      return;
    case K::field_write:
      out += pad + fmt_expr(s->lhs) + " = " + fmt_expr(s->expr) + ";\n";
      return;
    case K::call_stmt:
      out += pad + fmt_expr(s->expr) + ";\n";
      return;
    case K::return_:
      out += pad + "return";
      if (s->expr) out += " " + fmt_expr(s->expr);
      out += ";\n";
      return;
    case K::if_:
      out += pad + "if (" + fmt_expr(s->expr) + ") {\n";
      fmt_block(s->then_body, indent + 1, out);
      out += pad + "}";
      if (!s->else_body.empty()) {
        out += " else {\n";
        fmt_block(s->else_body, indent + 1, out);
        out += pad + "}";
      }
      out += '\n';
      return;
    case K::while_:
      out += pad + "while (" + fmt_expr(s->expr) + ")\n";
      for (const auto& sp : s->specs) out += pad + "  " + fmt_spec(sp) + "\n";
      out += pad + "{\n";
      fmt_block(s->body, indent + 1, out);
      out += pad + "}\n";
      return;
  }
}

inline void fmt_block(const Block& b, int indent, std::string& out) {
  for (const auto& s : b) fmt_stmt(s, indent, out);
}

inline std::string fmt_method(const Method& m) {
  std::string out = fmt_type(m.ret) + " " + m.name + "(";
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    if (i) out += ", ";
    if (m.params[i].by_ref) out += "ref ";
    out += fmt_type(m.params[i].type) + " " + m.params[i].name;
  }
  out += ")\n";
  for (const auto& sp : m.specs) out += "  " + fmt_spec(sp) + "\n";
  if (m.body) {
    out += "{\n";
    fmt_block(*m.body, 1, out);
    out += "}\n";
  }
  return out;
}

inline std::string fmt_program(const Program& p) {
  std::string out;
  bool first = true;
  for (const auto& d : p.datas) {
    if (!first) out += '\n';
    first = false;
    out += "data " + d.name + " {\n";
    for (const auto& f : d.fields)
      out += "  " + fmt_type(f.type) + " " + f.name + ";\n";
    out += "}\n";
  }
  for (const auto& pr : p.preds) {
    if (!first) out += '\n';
    first = false;
    out += "pred " + pr.name + "<";
    for (std::size_t i = 0; i < pr.params.size(); ++i) {
      if (i) out += ", ";
      out += pr.params[i];
    }
    out += "> == " + fmt_sep(pr.body);
    bool triv = pr.inv->kind == Pure::Kind::truth && pr.inv->value;
    if (!triv) out += " inv " + fmt_pure(pr.inv);
    out += ";\n";
  }
  for (const auto& m : p.methods) {
    if (m.builtin) continue;
    if (!first) out += '\n';
    first = false;
    out += fmt_method(m);
  }
  return out;
}

}  // namespace sentinel
