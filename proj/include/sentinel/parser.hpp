#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sentinel/ast.hpp"
#include "sentinel/lexer.hpp"
#include "sentinel/names.hpp"

namespace sentinel {

// Recursive descent over the eager token stream. Formulas and program code
// share the lexer but have separate expression grammars: formula terms are
// the logic's linear terms (with inf, min, max), while program expressions
// are the C-like fragment that lowering later reduces to core form.
//
// Two grammar quirks are handled locally:
//
//  * '*' separates spatial atoms inside a disjunct but multiplies inside a
//    pure term. A conjunct starting with `v::` or `emp` is spatial and '*'
//    continues the chain; anywhere else '*' is scaling.
//  * '(' at the start of a pure conjunct may open either a grouped formula
//    or a parenthesized term. The parser first tries the formula reading
//    and backtracks to the term reading when that fails or when the closing
//    parenthesis is followed by an operator.

class Parser {
 public:
  Parser(std::string src, std::string path, NameSupply& names)
      : src_(std::move(src)), path_(std::move(path)), names_(names) {
    toks_ = lex(src_, path_);
  }

  Program parse_program() {
    Program p;
    p.path = path_;
    p.source = src_;
    while (!at(Tok::eof)) {
      if (at(Tok::kw_data))
        p.datas.push_back(parse_data());
      else if (at(Tok::kw_pred))
        p.preds.push_back(parse_pred());
      else
        p.methods.push_back(parse_method());
    }
    return p;
  }

  SepFormula parse_formula_only() {
    SepFormula f = parse_sep_formula();
    expect(Tok::eof, "end of formula");
    return f;
  }

 private:
  std::string src_;
  std::string path_;
  NameSupply& names_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t n = 1) const {
    std::size_t i = pos_ + n;
    return toks_[i < toks_.size() ? i : toks_.size() - 1];
  }
  bool at(Tok k) const { return cur().kind == k; }

  Token take() { return toks_[pos_++]; }

  bool accept(Tok k) {
    if (!at(k)) return false;
    ++pos_;
    return true;
  }

  Token expect(Tok k, const std::string& what) {
    if (!at(k))
      throw ParseError(cur().span,
                       "expected " + what + ", found '" + describe(cur()) + "'");
    return take();
  }

  static std::string describe(const Token& t) {
    return t.kind == Tok::eof ? "end of input" : t.text;
  }

  std::string slice(std::size_t from_tok, std::size_t to_tok_excl) const {
    const Token& a = toks_[from_tok];
    const Token& b = toks_[to_tok_excl - 1];
    return src_.substr(a.off, b.off + b.len - a.off);
  }

  // ------------------------------------------------------------------
  // Declarations

  Type parse_type() {
    Token t = take();
    switch (t.kind) {
      case Tok::kw_int: return ty_int();
      case Tok::kw_uint: return ty_uint();
      case Tok::kw_float: return ty_float();
      case Tok::kw_bool: return ty_bool();
      case Tok::kw_void: return ty_void();
      case Tok::ident: return ty_ref(t.text);
      default:
        throw ParseError(t.span, "expected a type, found '" + describe(t) + "'");
    }
  }

  bool at_type() const {
    switch (cur().kind) {
      case Tok::kw_int:
      case Tok::kw_uint:
      case Tok::kw_float:
      case Tok::kw_bool:
      case Tok::kw_void:
      case Tok::ident:
        return true;
      default:
        return false;
    }
  }

  DataDecl parse_data() {
    DataDecl d;
    d.span = expect(Tok::kw_data, "'data'").span;
    d.name = expect(Tok::ident, "data type name").text;
    expect(Tok::lbrace, "'{'");
    while (!accept(Tok::rbrace)) {
      DataDecl::Field f;
      f.type = parse_type();
      f.name = expect(Tok::ident, "field name").text;
      d.fields.push_back(std::move(f));
      if (!at(Tok::rbrace)) expect(Tok::semi, "';' between fields");
    }
    return d;
  }

  PredDecl parse_pred() {
    PredDecl p;
    p.span = expect(Tok::kw_pred, "'pred'").span;
    p.name = expect(Tok::ident, "predicate name").text;
    expect(Tok::lt, "'<'");
    p.params.push_back(expect(Tok::ident, "predicate parameter").text);
    while (accept(Tok::comma))
      p.params.push_back(expect(Tok::ident, "predicate parameter").text);
    expect(Tok::gt, "'>'");
    expect(Tok::eq, "'=='");
    p.body = parse_sep_formula();
    if (accept(Tok::kw_inv)) p.inv = parse_pure_or();
    expect(Tok::semi, "';' after predicate");
    return p;
  }

  Method parse_method() {
    Method m;
    m.ret = parse_type();
    Token name = expect(Tok::ident, "method name");
    m.name = name.text;
    m.span = name.span;
    expect(Tok::lparen, "'('");
    if (!at(Tok::rparen)) {
      do {
        Method::Param p;
        p.by_ref = accept(Tok::kw_ref);
        p.type = parse_type();
        p.name = expect(Tok::ident, "parameter name").text;
        m.params.push_back(std::move(p));
      } while (accept(Tok::comma));
    }
    expect(Tok::rparen, "')'");
    m.specs = parse_spec_pairs();
    if (at(Tok::lbrace)) m.body = parse_block();
    return m;
  }

  std::vector<SpecPair> parse_spec_pairs() {
    std::vector<SpecPair> out;
    while (at(Tok::kw_requires)) {
      SpecPair sp;
      sp.span = cur().span;
      take();
      sp.requires_ = parse_sep_formula();
      if (accept(Tok::kw_ensures_err)) {
        sp.is_err = true;
      } else {
        expect(Tok::kw_ensures, "'ensures' or 'ensures_err'");
      }
      sp.ensures_ = parse_sep_formula();
      expect(Tok::semi, "';' after spec pair");
      out.push_back(std::move(sp));
    }
    return out;
  }

  // ------------------------------------------------------------------
  // Formulas

  SepFormula parse_sep_formula() {
    SepFormula f;
    f.disjuncts.push_back(parse_sep_disjunct());
    while (accept(Tok::pipe)) f.disjuncts.push_back(parse_sep_disjunct());
    return f;
  }

  SepDisjunct parse_sep_disjunct() {
    SepDisjunct d;
    d.span = cur().span;
    if (accept(Tok::kw_exists)) {
      d.ex.push_back(expect(Tok::ident, "bound variable").text);
      while (accept(Tok::comma))
        d.ex.push_back(expect(Tok::ident, "bound variable").text);
      expect(Tok::colon, "':' after exists binders");
    }
    parse_conjunct(d);
    while (accept(Tok::amp)) parse_conjunct(d);
    return d;
  }

  void parse_conjunct(SepDisjunct& d) {
    if (at(Tok::kw_emp) || (at(Tok::ident) && peek().kind == Tok::coloncolon)) {
      parse_heap_chain(d);
      return;
    }
    d.pure = p_and(d.pure, parse_pure_unit(&d));
  }

  void parse_heap_chain(SepDisjunct& d) {
    parse_heap_atom(d);
    while (accept(Tok::star)) parse_heap_atom(d);
  }

  void parse_heap_atom(SepDisjunct& d) {
    if (accept(Tok::kw_emp)) return;  // the empty heap adds no atoms
    HeapAtom h;
    Token root = expect(Tok::ident, "spatial atom root");
    h.root = root.text;
    h.span = root.span;
    expect(Tok::coloncolon, "'::'");
    h.name = expect(Tok::ident, "data type or predicate name").text;
    expect(Tok::lt, "'<'");
    if (!at(Tok::gt)) {
      do {
        h.args.push_back(parse_heap_arg(d));
      } while (accept(Tok::comma));
    }
    expect(Tok::gt, "'>'");
    d.heap.push_back(std::move(h));
  }

  // Spatial arguments are variables; literal arguments are sugar for a
  // fresh existential with a defining equality.
  Var parse_heap_arg(SepDisjunct& d) {
    if (at(Tok::ident)) return take().text;
    TermPtr lit;
    Span sp = cur().span;
    if (accept(Tok::kw_null)) {
      lit = t_int(0);
    } else if (at(Tok::int_lit)) {
      lit = t_int(take().ival);
    } else if (accept(Tok::kw_inf)) {
      lit = t_inf(1);
    } else if (accept(Tok::minus)) {
      if (at(Tok::int_lit))
        lit = t_int(-take().ival);
      else if (accept(Tok::kw_inf))
        lit = t_inf(-1);
      else
        throw ParseError(cur().span, "expected a literal spatial argument");
    } else {
      throw ParseError(sp, "expected a spatial argument");
    }
    Var v = names_.fresh("k");
    d.ex.push_back(v);
    d.pure = p_and(d.pure, p_eq(t_var(v), lit));
    return v;
  }

  PurePtr parse_pure_or() {
    PurePtr a = parse_pure_and();
    while (accept(Tok::pipe)) a = p_or(a, parse_pure_and());
    return a;
  }

  PurePtr parse_pure_and() {
    PurePtr a = parse_pure_unit(nullptr);
    while (accept(Tok::amp)) a = p_and(a, parse_pure_unit(nullptr));
    return a;
  }

  PurePtr parse_pure_unit(SepDisjunct*) {
    if (accept(Tok::kw_true)) return p_true();
    if (accept(Tok::kw_false)) return p_false();
    if (accept(Tok::bang)) return p_not(parse_pure_unit(nullptr));
    if (at(Tok::lparen)) {
      std::size_t save = pos_;
      try {
        take();  // (
        PurePtr f = parse_pure_or();
        expect(Tok::rparen, "')'");
        if (!starts_operator(cur().kind)) return f;
      } catch (const ParseError&) {
        // fall through to the term reading
      }
      pos_ = save;
    }
    return parse_cmp_chain();
  }

  static bool starts_operator(Tok k) {
    switch (k) {
      case Tok::plus:
      case Tok::minus:
      case Tok::star:
      case Tok::lt:
      case Tok::le:
      case Tok::gt:
      case Tok::ge:
      case Tok::assign:
      case Tok::eq:
      case Tok::ne:
        return true;
      default:
        return false;
    }
  }

  static bool is_cmp(Tok k) {
    switch (k) {
      case Tok::lt:
      case Tok::le:
      case Tok::gt:
      case Tok::ge:
      case Tok::assign:
      case Tok::eq:
      case Tok::ne:
        return true;
      default:
        return false;
    }
  }

  // t0 op t1 op t2 ... ; each adjacent pair becomes one atom, the chain is
  // their conjunction (0 <= n + 1 < inf).
  PurePtr parse_cmp_chain() {
    TermPtr prev = parse_term_add();
    if (!is_cmp(cur().kind))
      throw ParseError(cur().span, "expected a comparison operator");
    PurePtr acc = p_true();
    while (is_cmp(cur().kind)) {
      Tok op = take().kind;
      TermPtr next = parse_term_add();
      acc = p_and(acc, make_atom(prev, op, next));
      prev = next;
    }
    return acc;
  }

  static PurePtr make_atom(const TermPtr& l, Tok op, const TermPtr& r) {
    switch (op) {
      case Tok::assign:
      case Tok::eq: return p_eq(l, r);
      case Tok::ne: return p_ne(l, r);
      case Tok::lt: return p_lt(l, r);
      case Tok::le: return p_le(l, r);
      case Tok::gt: return p_gt(l, r);
      case Tok::ge: return p_ge(l, r);
      default: return p_true();
    }
  }

  // The logical constants stand alone: a comparison side or a min/max
  // argument may be inf, but inf never combines with + - *.
  void reject_inf(const TermPtr& t, const Span& sp) {
    if (term_has_inf(t))
      throw ParseError(sp, "inf cannot appear inside arithmetic");
  }

  TermPtr parse_term_add() {
    TermPtr t = parse_term_mul();
    while (at(Tok::plus) || at(Tok::minus)) {
      Token op = take();
      TermPtr r = parse_term_mul();
      reject_inf(t, op.span);
      reject_inf(r, op.span);
      t = op.kind == Tok::plus ? t_add(t, r) : t_sub(t, r);
    }
    return t;
  }

  TermPtr parse_term_mul() {
    TermPtr t = parse_term_atom();
    while (at(Tok::star)) {
      Token op = take();
      TermPtr r = parse_term_atom();
      reject_inf(t, op.span);
      reject_inf(r, op.span);
      auto kl = sentinel::as_const(t);
      auto kr = sentinel::as_const(r);
      if (kl)
        t = t_scale(*kl, r);
      else if (kr)
        t = t_scale(*kr, t);
      else
        throw ParseError(op.span, "nonlinear multiplication in formula");
    }
    return t;
  }

  TermPtr parse_term_atom() {
    if (at(Tok::int_lit)) return t_int(take().ival);
    if (at(Tok::ident)) return t_var(take().text);
    if (accept(Tok::kw_null)) return t_int(0);
    if (accept(Tok::kw_inf)) return t_inf(1);
    if (accept(Tok::minus)) return t_neg(parse_term_atom());
    if (at(Tok::kw_min) || at(Tok::kw_max)) {
      bool is_min = take().kind == Tok::kw_min;
      expect(Tok::lparen, "'('");
      TermPtr a = parse_term_add();
      expect(Tok::comma, "','");
      TermPtr b = parse_term_add();
      expect(Tok::rparen, "')'");
      return t_minmax(is_min, a, b);
    }
    if (accept(Tok::lparen)) {
      TermPtr t = parse_term_add();
      expect(Tok::rparen, "')'");
      return t;
    }
    throw ParseError(cur().span,
                     "expected a term, found '" + describe(cur()) + "'");
  }

  // ------------------------------------------------------------------
  // Statements

  Block parse_block() {
    expect(Tok::lbrace, "'{'");
    Block b;
    while (!accept(Tok::rbrace)) b.push_back(parse_stmt());
    return b;
  }

  StmtPtr parse_stmt() {
    switch (cur().kind) {
      case Tok::kw_if: return parse_if();
      case Tok::kw_while: return parse_while();
      case Tok::kw_return: return parse_return();
      case Tok::kw_int:
      case Tok::kw_uint:
      case Tok::kw_float:
      case Tok::kw_bool:
        return parse_decl();
      case Tok::ident:
        if (peek().kind == Tok::ident) return parse_decl();
        if (peek().kind == Tok::assign || peek().kind == Tok::walrus)
          return parse_assign();
        if (peek().kind == Tok::dot) return parse_field_write_or_error();
        if (peek().kind == Tok::lparen) return parse_call_stmt();
        throw ParseError(cur().span, "cannot parse statement starting at '" +
                                         cur().text + "'");
      default:
        throw ParseError(cur().span, "cannot parse statement starting at '" +
                                         describe(cur()) + "'");
    }
  }

  StmtPtr parse_decl() {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::decl;
    s->span = cur().span;
    s->type = parse_type();
    s->name = expect(Tok::ident, "variable name").text;
    if (accept(Tok::assign) || accept(Tok::walrus)) s->expr = parse_expr();
    expect(Tok::semi, "';'");
    return s;
  }

  StmtPtr parse_assign() {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::assign;
    s->span = cur().span;
    s->name = take().text;
    take();  // = or :=
    s->expr = parse_expr();
    expect(Tok::semi, "';'");
    return s;
  }

  StmtPtr parse_field_write_or_error() {
    std::size_t start = pos_;
    ExprPtr lhs = parse_postfix();
    if (lhs->kind != Expr::Kind::field_read)
      throw ParseError(toks_[start].span, "expected a field assignment");
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::field_write;
    s->span = toks_[start].span;
    s->lhs = lhs;
    if (!accept(Tok::assign) && !accept(Tok::walrus))
      throw ParseError(cur().span, "expected '=' in field assignment");
    s->expr = parse_expr();
    expect(Tok::semi, "';'");
    return s;
  }

  StmtPtr parse_call_stmt() {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::call_stmt;
    s->span = cur().span;
    s->expr = parse_expr();
    if (s->expr->kind != Expr::Kind::call)
      throw ParseError(s->span, "expected a call statement");
    expect(Tok::semi, "';'");
    return s;
  }

  StmtPtr parse_if() {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::if_;
    s->span = expect(Tok::kw_if, "'if'").span;
    expect(Tok::lparen, "'('");
    s->expr = parse_expr();
    expect(Tok::rparen, "')'");
    s->then_body = parse_block();
    if (accept(Tok::kw_else)) s->else_body = parse_block();
    return s;
  }

  StmtPtr parse_while() {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::while_;
    s->span = expect(Tok::kw_while, "'while'").span;
    expect(Tok::lparen, "'('");
    s->expr = parse_expr();
    expect(Tok::rparen, "')'");
    s->specs = parse_spec_pairs();
    s->body = parse_block();
    return s;
  }

  StmtPtr parse_return() {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::return_;
    s->span = expect(Tok::kw_return, "'return'").span;
    if (!at(Tok::semi)) s->expr = parse_expr();
    expect(Tok::semi, "';'");
    return s;
  }

  // ------------------------------------------------------------------
  // Program expressions

  ExprPtr parse_expr() {
    std::size_t start = pos_;
    ExprPtr a = parse_add_expr();
    if (is_program_cmp(cur().kind)) {
      Token op = take();
      ExprPtr b = parse_add_expr();
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::cmp;
      e->op = cmp_of(op.kind);
      e->a = a;
      e->b = b;
      e->span = join(a->span, b->span);
      e->op_span = op.span;
      e->op_text = slice(start, pos_);
      return e;
    }
    return a;
  }

  static bool is_program_cmp(Tok k) {
    switch (k) {
      case Tok::eq:
      case Tok::ne:
      case Tok::lt:
      case Tok::le:
      case Tok::gt:
      case Tok::ge:
        return true;
      default:
        return false;
    }
  }

  static CmpOp cmp_of(Tok k) {
    switch (k) {
      case Tok::eq: return CmpOp::eq;
      case Tok::ne: return CmpOp::ne;
      case Tok::lt: return CmpOp::lt;
      case Tok::le: return CmpOp::le;
      case Tok::gt: return CmpOp::gt;
      default: return CmpOp::ge;
    }
  }

  ExprPtr parse_add_expr() {
    std::size_t start = pos_;
    ExprPtr t = parse_unary();
    while (at(Tok::plus) || at(Tok::minus)) {
      Token op = take();
      ExprPtr r = parse_unary();
      auto e = std::make_shared<Expr>();
      e->kind = op.kind == Tok::plus ? Expr::Kind::add : Expr::Kind::sub;
      e->a = t;
      e->b = r;
      e->span = join(t->span, r->span);
      e->op_span = op.span;
      e->op_text = slice(start, pos_);
      t = e;
    }
    return t;
  }

  ExprPtr parse_unary() {
    if (at(Tok::minus)) {
      Token op = take();
      ExprPtr inner = parse_unary();
      if (inner->kind != Expr::Kind::int_lit)
        throw ParseError(op.span, "unary minus is only supported on literals");
      inner->ival = -inner->ival;
      inner->span = join(op.span, inner->span);
      return inner;
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    while (accept(Tok::dot)) {
      Token f = expect(Tok::ident, "field name");
      auto fr = std::make_shared<Expr>();
      fr->kind = Expr::Kind::field_read;
      fr->a = e;
      fr->name = f.text;
      fr->span = join(e->span, f.span);
      e = fr;
    }
    return e;
  }

  ExprPtr parse_primary() {
    Token t = cur();
    switch (t.kind) {
      case Tok::int_lit: {
        take();
        return e_int(t.ival, t.span);
      }
      case Tok::float_lit: {
        take();
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::float_lit;
        e->fval = t.fval;
        e->span = t.span;
        return e;
      }
      case Tok::kw_null: {
        take();
        return e_null(t.span);
      }
      case Tok::kw_new: {
        take();
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::new_obj;
        e->name = expect(Tok::ident, "data type name").text;
        e->args = parse_call_args();
        e->span = join(t.span, toks_[pos_ - 1].span);
        return e;
      }
      case Tok::lparen: {
        take();
        ExprPtr e = parse_expr();
        expect(Tok::rparen, "')'");
        return e;
      }
      case Tok::ident: {
        take();
        if (at(Tok::lparen)) {
          auto e = std::make_shared<Expr>();
          e->kind = Expr::Kind::call;
          e->name = t.text;
          e->args = parse_call_args();
          e->span = join(t.span, toks_[pos_ - 1].span);
          return e;
        }
        return e_var(t.text, t.span);
      }
      default:
        throw ParseError(t.span,
                         "expected an expression, found '" + describe(t) + "'");
    }
  }

  std::vector<ExprPtr> parse_call_args() {
    expect(Tok::lparen, "'('");
    std::vector<ExprPtr> args;
    if (!at(Tok::rparen)) {
      do {
        args.push_back(parse_expr());
      } while (accept(Tok::comma));
    }
    expect(Tok::rparen, "')'");
    return args;
  }
};

inline Program parse_program(std::string src, std::string path,
                             NameSupply& names) {
  return Parser(std::move(src), std::move(path), names).parse_program();
}

inline SepFormula parse_formula(std::string src, NameSupply& names,
                                std::string path = "<formula>") {
  return Parser(std::move(src), std::move(path), names).parse_formula_only();
}

}  // namespace sentinel
