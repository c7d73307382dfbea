#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "sentinel/ast.hpp"
#include "sentinel/lia.hpp"
#include "sentinel/printer.hpp"
#include "sentinel/sepform.hpp"

namespace sentinel {

// One way the antecedent heap can cover a consequent disjunct: the atoms
// left over, the pure context they live in, and the terms the consequent's
// existentials were forced to take.
struct Residue {
  std::vector<HeapAtom> frame;
  PurePtr pure;
  std::map<Var, TermPtr> bind;
};

struct UnfoldBranch {
  std::vector<HeapAtom> heap;
  PurePtr pure;
};

// Replace a predicate instance by its definition, one branch per body
// disjunct. Parameters rename to the instance's root and arguments, bound
// variables to fresh skolems.
inline std::vector<UnfoldBranch> unfold(const Program& prog,
                                        const HeapAtom& atom,
                                        NameSupply& names) {
  const PredDecl* pd = prog.find_pred(atom.name);
  if (!pd)
    throw ResolveError(atom.span, "cannot unfold '" + atom.name + "'");
  std::vector<UnfoldBranch> out;
  for (const SepDisjunct& d : pd->body.disjuncts) {
    std::map<Var, Var> r;
    for (const Var& ev : d.ex) r[ev] = names.fresh(ev);
    r.emplace(pd->params[0], atom.root);  // binders shadow parameters
    for (std::size_t i = 1; i < pd->params.size(); ++i)
      r.emplace(pd->params[i], atom.args[i - 1]);
    UnfoldBranch b;
    for (const HeapAtom& h : d.heap) b.heap.push_back(rename(h, r));
    b.pure = pure_subst(d.pure, lift_renaming(r));
    out.push_back(std::move(b));
  }
  return out;
}

// The pure shadow of a heap: record roots are non-null and pairwise
// distinct (all atoms live in one address space), predicate instances
// contribute their declared invariant.
inline PurePtr xpure(const Program& prog, const std::vector<HeapAtom>& heap) {
  PurePtr out = p_true();
  std::vector<Var> record_roots;
  for (const HeapAtom& h : heap) {
    if (!h.is_pred) {
      out = p_and(out, p_ne(t_var(h.root), t_int(0)));
      record_roots.push_back(h.root);
      continue;
    }
    const PredDecl* pd = prog.find_pred(h.name);
    if (!pd) continue;
    std::map<Var, TermPtr> s;
    s[pd->params[0]] = t_var(h.root);
    for (std::size_t i = 1; i < pd->params.size(); ++i)
      s[pd->params[i]] = t_var(h.args[i - 1]);
    out = p_and(out, pure_subst(pd->inv, s));
  }
  for (std::size_t i = 0; i < record_roots.size(); ++i)
    for (std::size_t j = i + 1; j < record_roots.size(); ++j)
      out = p_and(out, p_ne(t_var(record_roots[i]), t_var(record_roots[j])));
  return out;
}

struct EntailOptions {
  int fuel = 3;              // unfold/fold depth per branch
  std::ostream* trace = nullptr;
};

namespace entail_detail {

constexpr int kVisitCap = 20000;

struct Entailer {
  const Program& prog;
  Lia& lia;
  NameSupply& names;
  const EntailOptions& opt;

  int visits = 0;

  struct Goal {
    std::vector<HeapAtom> ant;
    PurePtr apure;
    std::vector<HeapAtom> want;
    PurePtr oblig;
    PurePtr cons_pure;
    std::map<Var, TermPtr> bind;
    std::set<Var> ex;  // still-unbound consequent existentials
    int fuel = 0;
    int depth = 0;
  };

  void note(int depth, const std::string& msg) const {
    if (opt.trace)
      *opt.trace << std::string(static_cast<std::size_t>(depth) * 2, ' ')
                 << msg << '\n';
  }

  static std::string heap_str(const std::vector<HeapAtom>& hs) {
    if (hs.empty()) return "emp";
    std::string s;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      if (i) s += " * ";
      s += fmt_heap_atom(hs[i]);
    }
    return s;
  }

  TermPtr side_term(const Goal& g, const Var& v) const {
    auto it = g.bind.find(v);
    return it != g.bind.end() ? it->second : t_var(v);
  }

  bool roots_agree(const Goal& g, const Var& ant_root, const Var& want_root) {
    TermPtr wt = side_term(g, want_root);
    if (auto lone = as_lone_var(wt); lone && *lone == ant_root) return true;
    return lia.implies(g.apure, {}, p_eq(t_var(ant_root), wt));
  }

  // Backtracking search. Matching a consequent atom and folding are
  // angelic: the first complete proof wins. Unfolding an antecedent
  // instance is a case split: every satisfiable branch must be covered,
  // and the returned residues concatenate the branches' residues.
  std::optional<std::vector<Residue>> step(Goal g) {
    if (++visits > kVisitCap)
      throw ResourceLimit("entailment search exceeded its budget");
    if (g.want.empty()) return finalize(g);
    HeapAtom w = g.want.front();
    std::vector<HeapAtom> rest(g.want.begin() + 1, g.want.end());

    // Direct matches against each compatible antecedent atom.
    for (std::size_t i = 0; i < g.ant.size(); ++i) {
      const HeapAtom& a = g.ant[i];
      if (a.name != w.name || a.args.size() != w.args.size()) continue;
      Goal h = g;
      bool root_free = h.ex.count(w.root) && !h.bind.count(w.root);
      if (root_free) {
        h.bind[w.root] = t_var(a.root);
        h.ex.erase(w.root);
      } else if (!roots_agree(g, a.root, w.root)) {
        continue;
      }
      note(g.depth, "match " + fmt_heap_atom(w) + " ~ " + fmt_heap_atom(a));
      for (std::size_t k = 0; k < w.args.size(); ++k) {
        const Var& wa = w.args[k];
        const Var& aa = a.args[k];
        if (h.ex.count(wa) && !h.bind.count(wa)) {
          h.bind[wa] = t_var(aa);
          h.ex.erase(wa);
        } else {
          h.oblig = p_and(h.oblig, p_eq(side_term(h, wa), t_var(aa)));
        }
      }
      h.ant.erase(h.ant.begin() + static_cast<std::ptrdiff_t>(i));
      h.want = rest;
      h.depth = g.depth + 1;
      if (auto sub = step(std::move(h))) return sub;
    }

    // Expose the demanded root by unfolding an antecedent predicate
    // instance sitting at it.
    if (g.fuel > 0 && (!g.ex.count(w.root) || g.bind.count(w.root))) {
      for (std::size_t i = 0; i < g.ant.size(); ++i) {
        const HeapAtom& a = g.ant[i];
        if (!a.is_pred || !roots_agree(g, a.root, w.root)) continue;
        std::vector<UnfoldBranch> branches = unfold(prog, a, names);
        std::vector<Residue> gathered;
        bool all_covered = true;
        for (std::size_t bi = 0; bi < branches.size(); ++bi) {
          Goal h = g;
          h.ant.erase(h.ant.begin() + static_cast<std::ptrdiff_t>(i));
          h.ant.insert(h.ant.end(), branches[bi].heap.begin(),
                       branches[bi].heap.end());
          h.apure = p_and(p_and(g.apure, branches[bi].pure),
                          xpure(prog, h.ant));
          if (!lia.sat_bool(h.apure)) {
            note(g.depth, "unfold " + fmt_heap_atom(a) + " branch " +
                              std::to_string(bi + 1) + ": contradiction");
            continue;
          }
          note(g.depth, "unfold " + fmt_heap_atom(a) + " branch " +
                            std::to_string(bi + 1));
          h.fuel = g.fuel - 1;
          h.depth = g.depth + 1;
          auto sub = step(std::move(h));
          if (!sub) {
            all_covered = false;
            break;
          }
          gathered.insert(gathered.end(), sub->begin(), sub->end());
        }
        if (all_covered) return gathered;
      }
    }

    // Fold: replace the demanded predicate atom by each body disjunct and
    // keep proving. The body's pure part becomes an obligation.
    if (g.fuel > 0 && w.is_pred) {
      const PredDecl* pd = prog.find_pred(w.name);
      for (std::size_t bi = 0; pd && bi < pd->body.disjuncts.size(); ++bi) {
        const SepDisjunct& d = pd->body.disjuncts[bi];
        Goal h = g;
        std::map<Var, Var> r;
        for (const Var& ev : d.ex) {
          Var nv = names.fresh(ev);
          r[ev] = nv;
          h.ex.insert(nv);
        }
        Var root_var = w.root;
        if (auto lone = as_lone_var(side_term(g, w.root))) root_var = *lone;
        r.emplace(pd->params[0], root_var);
        for (std::size_t k = 1; k < pd->params.size(); ++k) {
          Var av = w.args[k - 1];
          if (auto lone = as_lone_var(side_term(g, av))) av = *lone;
          r.emplace(pd->params[k], av);
        }
        std::vector<HeapAtom> nw;
        for (const HeapAtom& bh : d.heap) nw.push_back(rename(bh, r));
        nw.insert(nw.end(), rest.begin(), rest.end());
        h.want = std::move(nw);
        h.oblig = p_and(g.oblig, pure_subst(d.pure, lift_renaming(r)));
        h.fuel = g.fuel - 1;
        h.depth = g.depth + 1;
        note(g.depth, "fold " + fmt_heap_atom(w) + " branch " +
                          std::to_string(bi + 1));
        if (auto sub = step(std::move(h))) return sub;
      }
    }
    return std::nullopt;
  }

  std::optional<std::vector<Residue>> finalize(const Goal& g) {
    PurePtr goal_pure = pure_subst(p_and(g.oblig, g.cons_pure), g.bind);
    std::vector<Var> ys(g.ex.begin(), g.ex.end());
    bool ok = lia.implies(g.apure, ys, goal_pure);
    note(g.depth, std::string("check ") + (ok ? "valid" : "invalid") +
                      ": frame " + heap_str(g.ant));
    if (!ok) return std::nullopt;
    return std::vector<Residue>{Residue{g.ant, g.apure, g.bind}};
  }
};

}  // namespace entail_detail

// Does heap & pure cover some disjunct of cons? On success the residues
// split the antecedent: one per satisfiable case the proof had to
// distinguish (an empty list means the antecedent itself is absurd).
// std::nullopt means the entailment could not be shown. extra_ex lists
// caller-side variables of cons to treat as existential, on top of its own
// binders.
inline std::optional<std::vector<Residue>> entail(
    const Program& prog, Lia& lia, NameSupply& names,
    const std::vector<HeapAtom>& heap, const PurePtr& pure,
    const SepFormula& cons, const std::vector<Var>& extra_ex,
    const EntailOptions& opt = {}) {
  entail_detail::Entailer e{prog, lia, names, opt};
  PurePtr apure = p_and(pure, xpure(prog, heap));
  if (!lia.sat_bool(apure)) {
    e.note(0, "antecedent is contradictory");
    return std::vector<Residue>{};
  }
  for (const SepDisjunct& d : cons.disjuncts) {
    entail_detail::Entailer::Goal g;
    g.ant = heap;
    g.apure = apure;
    g.want = d.heap;
    g.cons_pure = d.pure;
    g.oblig = p_true();
    g.ex.insert(d.ex.begin(), d.ex.end());
    g.ex.insert(extra_ex.begin(), extra_ex.end());
    g.fuel = opt.fuel;
    if (opt.trace)
      e.note(0, "entail: " + entail_detail::Entailer::heap_str(g.ant) +
                    " & " + fmt_pure(g.apure) + " |- " + fmt_disjunct(d));
    if (auto r = e.step(std::move(g))) return r;
  }
  return std::nullopt;
}

}  // namespace sentinel
