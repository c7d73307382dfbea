#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/sepform.hpp"
#include "sentinel/source.hpp"

namespace sentinel {

// ---------------------------------------------------------------------------
// Types

enum class TyKind { int_, uint_, bool_, float_, ref_, void_ };

struct Type {
  TyKind kind = TyKind::int_;
  std::string cls;  // ref_: declared data type name

  bool is_scalar() const { return kind == TyKind::int_ || kind == TyKind::uint_; }
  bool is_ref() const { return kind == TyKind::ref_; }
  bool operator==(const Type&) const = default;
};

inline Type ty_int() { return {TyKind::int_, ""}; }
inline Type ty_uint() { return {TyKind::uint_, ""}; }
inline Type ty_bool() { return {TyKind::bool_, ""}; }
inline Type ty_float() { return {TyKind::float_, ""}; }
inline Type ty_void() { return {TyKind::void_, ""}; }
inline Type ty_ref(std::string cls) { return {TyKind::ref_, std::move(cls)}; }

// ---------------------------------------------------------------------------
// Expressions
//
// One node type covers the surface language and the lowered core. After
// lowering, operands of add/sub/cmp and call/new arguments are variables or
// literals only, and conditions of if are single boolean variables.

enum class CmpOp { eq, ne, lt, le, gt, ge };

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  enum class Kind {
    null_lit,
    int_lit,
    float_lit,
    var,
    field_read,  // a . name
    call,        // name(args)
    new_obj,     // new name(args)
    add,         // a + b
    sub,         // a - b
    cmp,         // a <op> b
  };

  Kind kind;
  long long ival = 0;
  double fval = 0;
  std::string name;  // var / call / new class / field name
  ExprPtr a, b;
  std::vector<ExprPtr> args;
  CmpOp op = CmpOp::eq;

  Span span;            // whole expression
  Span op_span;         // the operator token of add/sub/cmp
  std::string op_text;  // source slice of the whole add/sub expression

  Type type;  // filled by resolve
};

inline ExprPtr e_null(Span sp) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::null_lit;
  e->span = sp;
  return e;
}

inline ExprPtr e_int(long long v, Span sp = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::int_lit;
  e->ival = v;
  e->span = sp;
  return e;
}

inline ExprPtr e_var(std::string name, Span sp = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::var;
  e->name = std::move(name);
  e->span = sp;
  return e;
}

// ---------------------------------------------------------------------------
// Statements

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

struct SpecPair {
  SepFormula requires_;
  SepFormula ensures_;
  bool is_err = false;  // ensures_err: the overflow contract flavor
  Span span;
};

struct Stmt {
  enum class Kind {
    decl,         // type name [= init] ;
    assign,       // name (=|:=) expr ;
    field_write,  // lhs(.field) (=|:=) expr ;
    if_,
    while_,
    return_,
    call_stmt,
  };

  Kind kind;
  Span span;

  Type type;         // decl
  std::string name;  // decl/assign target
  ExprPtr lhs;       // field_write: the field_read form of the target
  ExprPtr expr;      // init / rhs / condition / return value / call
  Block then_body, else_body, body;
  std::vector<SpecPair> specs;  // while
};

// ---------------------------------------------------------------------------
// Declarations

struct DataDecl {
  struct Field {
    Type type;
    std::string name;
  };
  std::string name;
  std::vector<Field> fields;
  Span span;

  int field_index(const std::string& f) const {
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (fields[i].name == f) return static_cast<int>(i);
    return -1;
  }
};

struct PredDecl {
  std::string name;
  std::vector<Var> params;  // params[0] is the root
  SepFormula body;
  PurePtr inv = p_true();  // over params; conjoined by heap approximation
  Span span;
};

struct Method {
  struct Param {
    Type type;
    std::string name;
    bool by_ref = false;  // used only by synthesized loop methods
  };

  Type ret;
  std::string name;
  std::vector<Param> params;
  std::vector<SpecPair> specs;
  std::optional<Block> body;  // absent: assumed external, never verified
  Span span;

  bool builtin = false;    // injected arithmetic contract
  bool synthetic = false;  // lowered loop body
  std::string owner;       // synthetic: name of the method that owned the loop

  // Declared types of params, locals and lowering temps; filled by resolve
  // and extended by lowering.
  std::map<std::string, Type> var_types;

  const Param* find_param(const std::string& n) const {
    for (const Param& p : params)
      if (p.name == n) return &p;
    return nullptr;
  }
};

struct Program {
  std::string path;
  std::string source;
  std::vector<DataDecl> datas;
  std::vector<PredDecl> preds;
  std::vector<Method> methods;

  const DataDecl* find_data(const std::string& n) const {
    for (const DataDecl& d : datas)
      if (d.name == n) return &d;
    return nullptr;
  }
  const PredDecl* find_pred(const std::string& n) const {
    for (const PredDecl& p : preds)
      if (p.name == n) return &p;
    return nullptr;
  }
  const Method* find_method(const std::string& n) const {
    for (const Method& m : methods)
      if (m.name == n) return &m;
    return nullptr;
  }
  Method* find_method(const std::string& n) {
    for (Method& m : methods)
      if (m.name == n) return &m;
    return nullptr;
  }
};

}  // namespace sentinel
