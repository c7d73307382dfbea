#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sentinel/names.hpp"
#include "sentinel/pure.hpp"
#include "sentinel/source.hpp"

namespace sentinel {

// Spatial atom  v::name<a1, ..., an>. Until resolution the name may denote
// either a data type (a points-to fact for one record) or a declared
// predicate; resolve sets is_pred. Arguments are always variables: the
// parser rewrites literal arguments through a fresh existential plus an
// equality in the owning disjunct, so downstream matching never needs to
// unify against constants.
struct HeapAtom {
  Var root;
  std::string name;
  std::vector<Var> args;
  bool is_pred = false;
  Span span;
};

// One disjunct of a separation formula: optional existential binders, a
// separating conjunction of spatial atoms (empty means emp), and a pure
// constraint.
struct SepDisjunct {
  std::vector<Var> ex;
  std::vector<HeapAtom> heap;
  PurePtr pure = p_true();
  Span span;
};

struct SepFormula {
  std::vector<SepDisjunct> disjuncts;
};

inline void heap_atom_vars(const HeapAtom& h, std::set<Var>& out) {
  out.insert(h.root);
  for (const Var& a : h.args) out.insert(a);
}

// All variables of a disjunct including its binders.
inline void disjunct_vars(const SepDisjunct& d, std::set<Var>& out) {
  for (const HeapAtom& h : d.heap) heap_atom_vars(h, out);
  pure_vars(d.pure, out);
  for (const Var& v : d.ex) out.insert(v);
}

inline std::set<Var> free_vars(const SepDisjunct& d) {
  std::set<Var> all;
  for (const HeapAtom& h : d.heap) heap_atom_vars(h, all);
  pure_vars(d.pure, all);
  for (const Var& v : d.ex) all.erase(v);
  return all;
}

inline std::set<Var> free_vars(const SepFormula& f) {
  std::set<Var> out;
  for (const SepDisjunct& d : f.disjuncts) {
    std::set<Var> fv = free_vars(d);
    out.insert(fv.begin(), fv.end());
  }
  return out;
}

// Renaming. Spatial roots and arguments stay variables, so substitutions
// into formulas are always variable-for-variable; term-level substitution
// only ever reaches the pure part (lifted below).
inline Var rename_var(const Var& v, const std::map<Var, Var>& r) {
  auto it = r.find(v);
  return it == r.end() ? v : it->second;
}

inline std::map<Var, TermPtr> lift_renaming(const std::map<Var, Var>& r) {
  std::map<Var, TermPtr> s;
  for (const auto& [k, v] : r) s.emplace(k, t_var(v));
  return s;
}

inline HeapAtom rename(const HeapAtom& h, const std::map<Var, Var>& r) {
  HeapAtom out = h;
  out.root = rename_var(h.root, r);
  for (Var& a : out.args) a = rename_var(a, r);
  return out;
}

// Capture is the caller's problem: binders are renamed like everything
// else, so freshen them first when that matters.
inline SepDisjunct rename(const SepDisjunct& d, const std::map<Var, Var>& r) {
  SepDisjunct out = d;
  for (Var& v : out.ex) v = rename_var(v, r);
  for (HeapAtom& h : out.heap) h = rename(h, r);
  out.pure = pure_subst(d.pure, lift_renaming(r));
  return out;
}

inline SepFormula rename(const SepFormula& f, const std::map<Var, Var>& r) {
  SepFormula out;
  out.disjuncts.reserve(f.disjuncts.size());
  for (const SepDisjunct& d : f.disjuncts) out.disjuncts.push_back(rename(d, r));
  return out;
}

// Replaces each binder by a fresh name so the disjunct can be merged into a
// context that may already use the original names.
inline SepDisjunct freshen_ex(const SepDisjunct& d, NameSupply& names,
                              std::vector<Var>* fresh_out = nullptr) {
  std::map<Var, Var> r;
  for (const Var& v : d.ex) {
    Var nv = names.fresh(v);
    r.emplace(v, nv);
    if (fresh_out) fresh_out->push_back(nv);
  }
  return rename(d, r);
}

}  // namespace sentinel
