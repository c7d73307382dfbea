#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sentinel/term.hpp"

namespace sentinel {

// Pure constraints. After desugaring, the only atom shapes are t1 = t2 and
// t1 <= t2; the four strict and flipped comparisons are expressed with
// negation and argument order:
//
//   a <  b   ==>   !(b <= a)
//   a >  b   ==>   !(a <= b)
//   a >= b   ==>   b <= a
//   a != b   ==>   !(a = b)

enum class Cmp { eq, le };

struct Pure;
using PurePtr = std::shared_ptr<const Pure>;

struct Pure {
  enum class Kind { truth, atom, neg, conj, disj };
  Kind kind;
  bool value = false;  // truth
  Cmp cmp = Cmp::eq;   // atom
  TermPtr lhs, rhs;    // atom
  PurePtr a, b;        // neg uses a; conj/disj use both
};

inline PurePtr p_bool(bool v) {
  auto p = std::make_shared<Pure>();
  p->kind = Pure::Kind::truth;
  p->value = v;
  return p;
}

inline PurePtr p_true() { return p_bool(true); }
inline PurePtr p_false() { return p_bool(false); }

inline PurePtr p_atom(Cmp cmp, const TermPtr& l, const TermPtr& r) {
  auto p = std::make_shared<Pure>();
  p->kind = Pure::Kind::atom;
  p->cmp = cmp;
  p->lhs = l;
  p->rhs = r;
  return p;
}

inline PurePtr p_not(const PurePtr& x) {
  if (x->kind == Pure::Kind::truth) return p_bool(!x->value);
  if (x->kind == Pure::Kind::neg) return x->a;
  auto p = std::make_shared<Pure>();
  p->kind = Pure::Kind::neg;
  p->a = x;
  return p;
}

inline PurePtr p_and(const PurePtr& x, const PurePtr& y) {
  if (x->kind == Pure::Kind::truth) return x->value ? y : x;
  if (y->kind == Pure::Kind::truth) return y->value ? x : y;
  auto p = std::make_shared<Pure>();
  p->kind = Pure::Kind::conj;
  p->a = x;
  p->b = y;
  return p;
}

inline PurePtr p_or(const PurePtr& x, const PurePtr& y) {
  if (x->kind == Pure::Kind::truth) return x->value ? x : y;
  if (y->kind == Pure::Kind::truth) return y->value ? y : x;
  auto p = std::make_shared<Pure>();
  p->kind = Pure::Kind::disj;
  p->a = x;
  p->b = y;
  return p;
}

inline PurePtr p_eq(const TermPtr& l, const TermPtr& r) {
  return p_atom(Cmp::eq, l, r);
}
inline PurePtr p_le(const TermPtr& l, const TermPtr& r) {
  return p_atom(Cmp::le, l, r);
}
inline PurePtr p_ne(const TermPtr& l, const TermPtr& r) {
  return p_not(p_eq(l, r));
}
inline PurePtr p_lt(const TermPtr& l, const TermPtr& r) {
  return p_not(p_le(r, l));
}
inline PurePtr p_ge(const TermPtr& l, const TermPtr& r) {
  return p_le(r, l);
}
inline PurePtr p_gt(const TermPtr& l, const TermPtr& r) {
  return p_not(p_le(l, r));
}

inline PurePtr pure_subst(const PurePtr& p, const std::map<Var, TermPtr>& s) {
  switch (p->kind) {
    case Pure::Kind::truth:
      return p;
    case Pure::Kind::atom:
      return p_atom(p->cmp, term_subst(p->lhs, s), term_subst(p->rhs, s));
    case Pure::Kind::neg:
      return p_not(pure_subst(p->a, s));
    case Pure::Kind::conj:
      return p_and(pure_subst(p->a, s), pure_subst(p->b, s));
    case Pure::Kind::disj:
      return p_or(pure_subst(p->a, s), pure_subst(p->b, s));
  }
  return p;
}

inline void pure_vars(const PurePtr& p, std::set<Var>& out) {
  switch (p->kind) {
    case Pure::Kind::truth:
      return;
    case Pure::Kind::atom:
      term_vars(p->lhs, out);
      term_vars(p->rhs, out);
      return;
    case Pure::Kind::neg:
      pure_vars(p->a, out);
      return;
    case Pure::Kind::conj:
    case Pure::Kind::disj:
      pure_vars(p->a, out);
      pure_vars(p->b, out);
      return;
  }
}

inline std::string pure_str(const PurePtr& p) {
  switch (p->kind) {
    case Pure::Kind::truth:
      return p->value ? "true" : "false";
    case Pure::Kind::atom:
      return term_str(p->lhs) + (p->cmp == Cmp::eq ? " = " : " <= ") +
             term_str(p->rhs);
    case Pure::Kind::neg:
      return "!(" + pure_str(p->a) + ")";
    case Pure::Kind::conj:
      return "(" + pure_str(p->a) + " & " + pure_str(p->b) + ")";
    case Pure::Kind::disj:
      return "(" + pure_str(p->a) + " | " + pure_str(p->b) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Literals and disjunctive normal form

struct Lit {
  bool pos = true;
  Cmp cmp = Cmp::eq;
  TermPtr lhs, rhs;
};

using Clause = std::vector<Lit>;  // conjunction of literals
using Dnf = std::vector<Clause>;  // disjunction of clauses; empty = false

inline constexpr std::size_t kDnfCap = 4096;

inline std::string lit_str(const Lit& l) {
  std::string core = term_str(l.lhs) +
                     (l.cmp == Cmp::eq ? " = " : " <= ") + term_str(l.rhs);
  return l.pos ? core : "!(" + core + ")";
}

inline std::string clause_str(const Clause& c) {
  if (c.empty()) return "true";
  std::string s;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += " & ";
    s += lit_str(c[i]);
  }
  return s;
}

inline std::string dnf_str(const Dnf& d) {
  if (d.empty()) return "false";
  std::string s;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i) s += " | ";
    s += clause_str(d[i]);
  }
  return s;
}

inline PurePtr dnf_to_pure(const Dnf& d) {
  PurePtr out = p_false();
  bool first = true;
  for (const Clause& c : d) {
    PurePtr conj = p_true();
    for (const Lit& l : c) {
      PurePtr at = p_atom(l.cmp, l.lhs, l.rhs);
      conj = p_and(conj, l.pos ? at : p_not(at));
    }
    out = first ? conj : p_or(out, conj);
    first = false;
  }
  return out;
}

inline Dnf to_dnf(const PurePtr& p, bool polarity = true) {
  switch (p->kind) {
    case Pure::Kind::truth:
      return (p->value == polarity) ? Dnf{Clause{}} : Dnf{};
    case Pure::Kind::atom:
      return Dnf{Clause{Lit{polarity, p->cmp, p->lhs, p->rhs}}};
    case Pure::Kind::neg:
      return to_dnf(p->a, !polarity);
    case Pure::Kind::conj:
    case Pure::Kind::disj: {
      bool conjunctive = (p->kind == Pure::Kind::conj) == polarity;
      Dnf da = to_dnf(p->a, polarity);
      Dnf db = to_dnf(p->b, polarity);
      if (conjunctive) {
        if (da.size() * db.size() > kDnfCap)
          throw ResourceLimit("disjunct budget exceeded");
        Dnf out;
        out.reserve(da.size() * db.size());
        for (const Clause& x : da)
          for (const Clause& y : db) {
            Clause c = x;
            c.insert(c.end(), y.begin(), y.end());
            out.push_back(std::move(c));
          }
        return out;
      }
      if (da.size() + db.size() > kDnfCap)
        throw ResourceLimit("disjunct budget exceeded");
      da.insert(da.end(), db.begin(), db.end());
      return da;
    }
  }
  return Dnf{};
}

// ---------------------------------------------------------------------------
// Literal rewriting over the extended constants
//
// The rules fire on whole literals. A positive atom matches the = and <=
// shapes, a negated equality matches the != shapes, and a negated <= never
// matches anything here: it survives untouched and is complemented only
// after the infinities have been replaced by the sentinel. Rewriting under
// the negation instead would erase strict bounds like "x < inf".

struct LitStep {
  enum class Kind { keep, truth } kind;
  bool value = false;
  Lit lit;
  bool changed = false;

  static LitStep truth(bool v) { return {Kind::truth, v, {}, true}; }
  static LitStep keep(Lit l, bool ch = false) {
    return {Kind::keep, false, std::move(l), ch};
  }
};

inline LitStep rewrite_lit(const Lit& l) {
  auto li = as_inf(l.lhs);
  auto ri = as_inf(l.rhs);
  auto lc = as_const(l.lhs);
  auto rc = as_const(l.rhs);
  auto lv = as_lone_var(l.lhs);
  auto rv = as_lone_var(l.rhs);

  if (l.pos && l.cmp == Cmp::eq) {
    if (li && ri) return LitStep::truth(*li == *ri);
    if ((li && rc) || (ri && lc)) return LitStep::truth(false);
    // Keep "v = inf" with the variable on the left so that the defining
    // equality scan only has one orientation to look for.
    if (li && rv) return LitStep::keep(Lit{true, Cmp::eq, l.rhs, l.lhs}, true);
    if (lc && rc) return LitStep::truth(*lc == *rc);
    if (term_eq(l.lhs, l.rhs)) return LitStep::truth(true);
    return LitStep::keep(l);
  }

  if (l.pos && l.cmp == Cmp::le) {
    if (li && ri) return LitStep::truth(!(*li > 0 && *ri < 0));
    if (ri && *ri > 0 && (lc || lv)) return LitStep::truth(true);
    if (li && *li > 0 && rc) return LitStep::truth(false);
    if (li && *li > 0 && rv)
      return LitStep::keep(Lit{true, Cmp::eq, l.rhs, l.lhs}, true);
    if (ri && *ri < 0 && lc) return LitStep::truth(false);
    if (ri && *ri < 0 && lv)
      return LitStep::keep(Lit{true, Cmp::eq, l.lhs, l.rhs}, true);
    if (li && *li < 0 && (rc || rv)) return LitStep::truth(true);
    // Constant folding below is not one of the extended rules, just exact
    // arithmetic on closed atoms.
    if (lc && rc) return LitStep::truth(*lc <= *rc);
    if (term_eq(l.lhs, l.rhs)) return LitStep::truth(true);
    return LitStep::keep(l);
  }

  if (!l.pos && l.cmp == Cmp::eq) {
    if (li && ri) return LitStep::truth(*li != *ri);
    if ((li && rc) || (ri && lc)) return LitStep::truth(true);
    if (li && rv) return LitStep::keep(Lit{false, Cmp::eq, l.rhs, l.lhs}, true);
    if (lc && rc) return LitStep::truth(*lc != *rc);
    if (term_eq(l.lhs, l.rhs)) return LitStep::truth(false);
    return LitStep::keep(l);
  }

  // Negated <=: no extended rule applies; fold closed atoms only.
  if (lc && rc) return LitStep::truth(!(*lc <= *rc));
  if (term_eq(l.lhs, l.rhs)) return LitStep::truth(false);
  return LitStep::keep(l);
}

inline bool lit_eq(const Lit& a, const Lit& b) {
  return a.pos == b.pos && a.cmp == b.cmp && term_eq(a.lhs, b.lhs) &&
         term_eq(a.rhs, b.rhs);
}

// Rewrites one clause to a fixpoint. Defining equalities "v = inf" and
// "v = -inf" are substituted into the other literals of the clause but kept
// in place; dropping them would weaken the clause (entailment queries may
// mention v). Returns false when the clause became unsatisfiable.
inline bool normalize_clause(Clause& c, int* passes_out = nullptr) {
  bool again = true;
  int passes = 0;
  while (again) {
    if (passes_out) *passes_out = passes + 1;
    if (++passes > 10000) throw ResourceLimit("clause rewriting diverged");
    again = false;

    Clause next;
    next.reserve(c.size());
    for (const Lit& l : c) {
      LitStep st = rewrite_lit(l);
      if (st.kind == LitStep::Kind::truth) {
        if (!st.value) return false;
        continue;  // true literal drops out
      }
      // Rewritten forms are final (v = inf / v = -inf); only substitution
      // below can create new rewritable material, so no extra pass here.
      bool dup = false;
      for (const Lit& seen : next)
        if (lit_eq(seen, st.lit)) {
          dup = true;
          break;
        }
      if (!dup) next.push_back(std::move(st.lit));
    }
    c = std::move(next);

    // Substitute each defining equality into every other literal.
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Lit& def = c[i];
      if (!(def.pos && def.cmp == Cmp::eq)) continue;
      auto v = as_lone_var(def.lhs);
      auto s = as_inf(def.rhs);
      if (!v || !s) continue;
      for (std::size_t j = 0; j < c.size(); ++j) {
        if (j == i) continue;
        TermPtr nl = term_subst(c[j].lhs, *v, def.rhs);
        TermPtr nr = term_subst(c[j].rhs, *v, def.rhs);
        if (!term_eq(nl, c[j].lhs) || !term_eq(nr, c[j].rhs)) {
          c[j].lhs = nl;
          c[j].rhs = nr;
          again = true;
        }
      }
    }
  }
  return true;
}

inline Dnf normalize(const Dnf& d) {
  Dnf out;
  for (Clause c : d) {
    if (normalize_clause(c)) out.push_back(std::move(c));
  }
  return out;
}

inline Dnf normalize(const PurePtr& p) { return normalize(to_dnf(p)); }

// ---------------------------------------------------------------------------
// Sentinel elimination
//
// Replaces the two constants by +/- one shared fresh variable and removes
// negated <= literals via the integer complement !(a <= b) == b+1 <= a.
// Callers that relate two formulas (an entailment) must pass the same
// sentinel for both sides.

struct InfFree {
  Dnf dnf;
  bool used_sentinel = false;
};

inline InfFree eliminate_inf(const Dnf& d, const Var& sentinel) {
  InfFree r;
  r.dnf.reserve(d.size());
  for (const Clause& c : d) {
    Clause out;
    out.reserve(c.size());
    for (const Lit& l : c) {
      Lit n = l;
      if (term_has_inf(n.lhs)) {
        n.lhs = term_drop_inf(n.lhs, sentinel);
        r.used_sentinel = true;
      }
      if (term_has_inf(n.rhs)) {
        n.rhs = term_drop_inf(n.rhs, sentinel);
        r.used_sentinel = true;
      }
      if (!n.pos && n.cmp == Cmp::le) {
        n = Lit{true, Cmp::le, t_add(n.rhs, t_int(1)), n.lhs};
      }
      out.push_back(std::move(n));
    }
    r.dnf.push_back(std::move(out));
  }
  return r;
}

}  // namespace sentinel
