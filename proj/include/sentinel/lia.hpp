#pragma once

#include <algorithm>
#include <cassert>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/names.hpp"
#include "sentinel/pure.hpp"

namespace sentinel {

// Decision procedures for linear integer arithmetic, entered through Lia at
// the bottom of this header. Satisfiability of a conjunction runs the omega
// test: exact equality elimination (unit coefficient substitution, with the
// modulus trick to manufacture a unit coefficient when there is none),
// then shadow elimination for inequalities (real shadow where exact, dark
// shadow plus splinters otherwise). Witnesses are rebuilt on the way out of
// the recursion. Existential blocks in entailment consequents are projected
// with Cooper's method, whose output may mention divisibility atoms; those
// are first-class constraints here for that reason.

struct LinCon {
  enum class Kind { eq0, ge0, neq0, div, ndiv };
  Kind kind;
  Linear t;
  long long d = 0;  // modulus for div/ndiv
};

namespace lia_detail {

inline constexpr long long kModulusCap = 1000000;
inline constexpr int kDepthCap = 400;
inline constexpr long long kSystemCap = 200000;

inline long long floor_div(long long a, long long b) {
  long long q = a / b, r = a % b;
  return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

inline long long ceil_div(long long a, long long b) {
  return -floor_div(-a, b);
}

// Symmetric residue in (-m/2, m/2].
inline long long mod_hat(long long a, long long m) {
  long long r = ((a % m) + m) % m;
  if (r * 2 > m) r -= m;
  return r;
}

inline Linear lin_add(const Linear& a, const Linear& b) {
  Linear r = a;
  r.k = checked_add(r.k, b.k);
  for (const auto& [v, c] : b.coef) {
    long long n = checked_add(r.coef[v], c);
    if (n == 0)
      r.coef.erase(v);
    else
      r.coef[v] = n;
  }
  return r;
}

inline Linear lin_scale(long long k, const Linear& a) {
  Linear r;
  if (k == 0) return r;
  r.k = checked_mul(k, a.k);
  for (const auto& [v, c] : a.coef) r.coef[v] = checked_mul(k, c);
  return r;
}

inline Linear lin_sub(const Linear& a, const Linear& b) {
  return lin_add(a, lin_scale(-1, b));
}

// t with v removed, i.e. t - coef(v)*v.
inline Linear lin_drop(const Linear& t, const Var& v) {
  Linear r = t;
  r.coef.erase(v);
  return r;
}

inline long long lin_coef(const Linear& t, const Var& v) {
  auto it = t.coef.find(v);
  return it == t.coef.end() ? 0 : it->second;
}

// t[v := by], where coef(v) may be anything.
inline Linear lin_subst(const Linear& t, const Var& v, const Linear& by) {
  long long c = lin_coef(t, v);
  if (c == 0) return t;
  return lin_add(lin_drop(t, v), lin_scale(c, by));
}

inline long long lin_eval(const Linear& t,
                          const std::map<Var, long long>& w) {
  long long acc = t.k;
  for (const auto& [v, c] : t.coef) {
    // Vars eliminated without residual constraints default to 0, matching
    // the zero-fill of absent vars in reported models.
    auto it = w.find(v);
    if (it == w.end()) continue;
    acc = checked_add(acc, checked_mul(c, it->second));
  }
  return acc;
}

inline LinCon con_subst(const LinCon& c, const Var& v, const Linear& by) {
  LinCon r = c;
  r.t = lin_subst(c.t, v, by);
  return r;
}

using System = std::vector<LinCon>;
using Witness = std::map<Var, long long>;

// Constant folding and gcd tightening. Returns false when some constraint
// is closed and false. "true" constraints are removed.
inline bool simplify(System& sys) {
  System out;
  out.reserve(sys.size());
  for (LinCon c : sys) {
    long long g = 0;
    for (const auto& [v, co] : c.t.coef) g = std::gcd(g, co < 0 ? -co : co);
    switch (c.kind) {
      case LinCon::Kind::eq0:
        if (g == 0) {
          if (c.t.k != 0) return false;
          continue;
        }
        if (c.t.k % g != 0) return false;
        if (g > 1) {
          for (auto& [v, co] : c.t.coef) co /= g;
          c.t.k /= g;
        }
        break;
      case LinCon::Kind::ge0:
        if (g == 0) {
          if (c.t.k < 0) return false;
          continue;
        }
        if (g > 1) {
          for (auto& [v, co] : c.t.coef) co /= g;
          c.t.k = floor_div(c.t.k, g);
        }
        break;
      case LinCon::Kind::neq0:
        if (g == 0) {
          if (c.t.k == 0) return false;
          continue;
        }
        if (c.t.k % g != 0) continue;  // never zero: constraint is vacuous
        if (g > 1) {
          for (auto& [v, co] : c.t.coef) co /= g;
          c.t.k /= g;
        }
        break;
      case LinCon::Kind::div:
        if (c.d < 0) c.d = -c.d;
        if (c.d == 0) {
          // 0 | t means t = 0
          c.kind = LinCon::Kind::eq0;
          out.push_back(c);
          continue;
        }
        if (c.d == 1) continue;
        if (g == 0) {
          if (((c.t.k % c.d) + c.d) % c.d != 0) return false;
          continue;
        }
        break;
      case LinCon::Kind::ndiv:
        if (c.d < 0) c.d = -c.d;
        if (c.d == 1) return false;
        if (c.d == 0) {
          c.kind = LinCon::Kind::neq0;
          out.push_back(c);
          continue;
        }
        if (g == 0) {
          if (((c.t.k % c.d) + c.d) % c.d == 0) return false;
          continue;
        }
        break;
    }
    out.push_back(std::move(c));
  }
  sys = std::move(out);
  return true;
}

struct SolveCtx {
  NameSupply& names;
  long long budget = kSystemCap;

  void charge() {
    if (--budget < 0) throw ResourceLimit("solver system budget exceeded");
  }
};

std::optional<Witness> solve(SolveCtx& ctx, System sys, int depth);

// Eliminates x from an equality-free system by shadow projection; extends
// the recursive witness with a feasible value for x.
inline std::optional<Witness> solve_bounds(SolveCtx& ctx, const System& sys,
                                           const Var& x, int depth) {
  struct Bound {
    long long a;  // positive coefficient of x
    Linear rest;  // constraint was a*x + rest >= 0 (lower) or -a*x + rest >= 0
  };
  std::vector<Bound> lowers, uppers;
  System rest;
  for (const LinCon& c : sys) {
    long long a = lin_coef(c.t, x);
    if (a == 0) {
      rest.push_back(c);
      continue;
    }
    assert(c.kind == LinCon::Kind::ge0);
    if (a > 0)
      lowers.push_back({a, lin_drop(c.t, x)});
    else
      uppers.push_back({-a, lin_drop(c.t, x)});
  }

  auto extend = [&](Witness w) -> std::optional<Witness> {
    // lower: a*x + p >= 0  =>  x >= ceil(-p/a); upper: -b*x + q >= 0 =>
    // x <= floor(q/b).
    bool has_lo = false, has_hi = false;
    long long lo = 0, hi = 0;
    for (const Bound& b : lowers) {
      long long v = ceil_div(-lin_eval(b.rest, w), b.a);
      if (!has_lo || v > lo) lo = v, has_lo = true;
    }
    for (const Bound& b : uppers) {
      long long v = floor_div(lin_eval(b.rest, w), b.a);
      if (!has_hi || v < hi) hi = v, has_hi = true;
    }
    long long val = 0;
    if (has_lo && has_hi) {
      if (lo > hi) return std::nullopt;
      val = (lo <= 0 && 0 <= hi) ? 0 : (lo > 0 ? lo : hi);
    } else if (has_lo) {
      val = std::max(lo, 0LL);
    } else if (has_hi) {
      val = std::min(hi, 0LL);
    }
    w[x] = val;
    return w;
  };

  if (lowers.empty() || uppers.empty()) {
    auto w = solve(ctx, rest, depth + 1);
    if (!w) return std::nullopt;
    return extend(std::move(*w));
  }

  bool exact = std::all_of(lowers.begin(), lowers.end(),
                           [](const Bound& b) { return b.a == 1; }) ||
               std::all_of(uppers.begin(), uppers.end(),
                           [](const Bound& b) { return b.a == 1; });

  System shadow = rest;
  for (const Bound& lo : lowers)
    for (const Bound& up : uppers) {
      // a*q + b*p >= gap, with lower a*x+p>=0 and upper -b*x+q>=0.
      Linear t = lin_add(lin_scale(lo.a, up.rest), lin_scale(up.a, lo.rest));
      if (!exact)
        t.k = checked_add(t.k, -(lo.a - 1) * (up.a - 1));
      shadow.push_back({LinCon::Kind::ge0, std::move(t), 0});
    }
  if (auto w = solve(ctx, shadow, depth + 1)) return extend(std::move(*w));
  if (exact) return std::nullopt;

  // Dark shadow failed: splinter on each lower bound.
  long long bmax = 0;
  for (const Bound& up : uppers) bmax = std::max(bmax, up.a);
  for (const Bound& lo : lowers) {
    long long top = (lo.a * bmax - lo.a - bmax) / bmax;
    for (long long i = 0; i <= top; ++i) {
      System sp = sys;
      Linear t = lo.rest;  // a*x + p = i  i.e.  a*x + p - i = 0
      t.k = checked_add(t.k, -i);
      t.coef[x] = lo.a;
      sp.push_back({LinCon::Kind::eq0, std::move(t), 0});
      if (auto w = solve(ctx, sp, depth + 1)) return w;
    }
  }
  return std::nullopt;
}

inline std::optional<Witness> solve(SolveCtx& ctx, System sys, int depth) {
  if (depth > kDepthCap) throw ResourceLimit("solver depth exceeded");
  ctx.charge();
  if (!simplify(sys)) return std::nullopt;

  // Disequalities branch into the two strict sides.
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (sys[i].kind != LinCon::Kind::neq0) continue;
    Linear t = sys[i].t;
    System a = sys;
    a[i] = {LinCon::Kind::ge0, lin_add(t, Linear{-1, {}}), 0};
    if (auto w = solve(ctx, a, depth + 1)) return w;
    System b = sys;
    b[i] = {LinCon::Kind::ge0, lin_add(lin_scale(-1, t), Linear{-1, {}}), 0};
    return solve(ctx, b, depth + 1);
  }

  // Negated divisibility: some nonzero residue class holds.
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (sys[i].kind != LinCon::Kind::ndiv) continue;
    for (long long r = 1; r < sys[i].d; ++r) {
      System a = sys;
      Linear t = sys[i].t;
      t.k = checked_add(t.k, -r);
      a[i] = {LinCon::Kind::div, std::move(t), sys[i].d};
      if (auto w = solve(ctx, a, depth + 1)) return w;
    }
    return std::nullopt;
  }

  std::set<Var> vars;
  for (const LinCon& c : sys)
    for (const auto& [v, co] : c.t.coef) vars.insert(v);
  if (vars.empty()) return Witness{};

  // Equality elimination. Prefer a unit coefficient; otherwise shrink
  // coefficients with the modulus trick until one appears.
  const LinCon* best_eq = nullptr;
  Var best_var;
  long long best_abs = 0;
  for (const LinCon& c : sys) {
    if (c.kind != LinCon::Kind::eq0) continue;
    for (const auto& [v, co] : c.t.coef) {
      long long a = co < 0 ? -co : co;
      if (!best_eq || a < best_abs || (a == best_abs && v < best_var)) {
        best_eq = &c;
        best_var = v;
        best_abs = a;
      }
    }
  }
  if (best_eq) {
    Linear eq = best_eq->t;
    Var x = best_var;
    if (best_abs == 1) {
      long long c = lin_coef(eq, x);
      Linear expr = lin_scale(-c, lin_drop(eq, x));  // x = -rest/c, c = +-1
      System next;
      next.reserve(sys.size());
      for (const LinCon& con : sys) {
        if (&con == best_eq) continue;
        next.push_back(con_subst(con, x, expr));
      }
      auto w = solve(ctx, next, depth + 1);
      if (!w) return std::nullopt;
      (*w)[x] = lin_eval(expr, *w);
      return w;
    }
    long long m = best_abs + 1;
    Var sigma = ctx.names.fresh("om");
    Linear hat;  // mod_hat of every coefficient, minus m*sigma
    hat.k = mod_hat(eq.k, m);
    for (const auto& [v, co] : eq.coef) {
      long long h = mod_hat(co, m);
      if (h != 0) hat.coef[v] = h;
    }
    hat.coef[sigma] = -m;
    // hat = 0 has coefficient -sgn on x; solve for x and substitute.
    long long cx = lin_coef(hat, x);
    assert(cx == 1 || cx == -1);
    Linear expr = lin_scale(-cx, lin_drop(hat, x));
    System next;
    next.reserve(sys.size());
    for (const LinCon& con : sys) next.push_back(con_subst(con, x, expr));
    auto w = solve(ctx, next, depth + 1);
    if (!w) return std::nullopt;
    (*w)[x] = lin_eval(expr, *w);
    return w;
  }

  // No equalities left. Divisibility constraints that still mention a
  // variable bound by inequalities are rewritten through a fresh quotient.
  std::set<Var> ineq_vars;
  for (const LinCon& c : sys)
    if (c.kind == LinCon::Kind::ge0)
      for (const auto& [v, co] : c.t.coef) ineq_vars.insert(v);

  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (sys[i].kind != LinCon::Kind::div) continue;
    bool blocked = false;
    for (const auto& [v, co] : sys[i].t.coef)
      if (ineq_vars.count(v)) blocked = true;
    if (!blocked) continue;
    Var q = ctx.names.fresh("om");
    Linear t = sys[i].t;
    t.coef[q] = -sys[i].d;
    System next = sys;
    next[i] = {LinCon::Kind::eq0, std::move(t), 0};
    return solve(ctx, next, depth + 1);
  }

  if (!ineq_vars.empty()) {
    // Deterministic choice: fewest lower*upper combinations, then name.
    Var pick;
    long long best_score = -1;
    for (const Var& v : ineq_vars) {
      long long lo = 0, hi = 0;
      for (const LinCon& c : sys) {
        long long a = lin_coef(c.t, v);
        if (a > 0) ++lo;
        if (a < 0) ++hi;
      }
      long long score = lo * hi;
      if (best_score < 0 || score < best_score ||
          (score == best_score && v < pick)) {
        best_score = score;
        pick = v;
      }
    }
    return solve_bounds(ctx, sys, pick, depth);
  }

  // Only divisibility constraints mention variables: satisfiability depends
  // on residues alone, so enumerate one period of the first such variable.
  for (const LinCon& c : sys) {
    if (c.kind != LinCon::Kind::div || c.t.coef.empty()) continue;
    Var x = c.t.coef.begin()->first;
    long long period = 1;
    for (const LinCon& d : sys)
      if (d.kind == LinCon::Kind::div && d.t.coef.count(x)) {
        period = std::lcm(period, d.d);
        if (period > kModulusCap) throw ResourceLimit("divisor lcm too large");
      }
    for (long long r = 0; r < period; ++r) {
      System next;
      next.reserve(sys.size());
      for (const LinCon& d : sys)
        next.push_back(con_subst(d, x, Linear{r, {}}));
      if (auto w = solve(ctx, next, depth + 1)) {
        (*w)[x] = r;
        return w;
      }
    }
    return std::nullopt;
  }
  return Witness{};
}

// --------------------------------------------------------------------------
// Cooper projection of an existential block out of a conjunction. The
// result is a disjunction of conjunctions over the remaining variables.

inline constexpr std::size_t kProjectCap = 4096;

inline void project_var(SolveCtx& ctx, const System& sys, const Var& y,
                        std::vector<System>& out);

inline void project_var_core(SolveCtx& ctx, System sys, const Var& y,
                             std::vector<System>& out) {
  if (!simplify(sys)) return;
  if (out.size() > kProjectCap) throw ResourceLimit("projection blowup");

  // Split disjunctive constraint forms that mention y first.
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (lin_coef(sys[i].t, y) == 0) continue;
    if (sys[i].kind == LinCon::Kind::neq0) {
      System a = sys;
      a[i] = {LinCon::Kind::ge0, lin_add(sys[i].t, Linear{-1, {}}), 0};
      project_var_core(ctx, std::move(a), y, out);
      System b = sys;
      b[i] = {LinCon::Kind::ge0,
              lin_add(lin_scale(-1, sys[i].t), Linear{-1, {}}), 0};
      project_var_core(ctx, std::move(b), y, out);
      return;
    }
    if (sys[i].kind == LinCon::Kind::ndiv) {
      for (long long r = 1; r < sys[i].d; ++r) {
        System a = sys;
        Linear t = sys[i].t;
        t.k = checked_add(t.k, -r);
        a[i] = {LinCon::Kind::div, std::move(t), sys[i].d};
        project_var_core(ctx, std::move(a), y, out);
      }
      return;
    }
  }

  System with_y, pass;
  for (const LinCon& c : sys)
    (lin_coef(c.t, y) != 0 ? with_y : pass).push_back(c);
  if (with_y.empty()) {
    out.push_back(std::move(pass));
    return;
  }

  // Exact path: an equality with unit coefficient on y.
  for (const LinCon& c : with_y) {
    if (c.kind != LinCon::Kind::eq0) continue;
    long long a = lin_coef(c.t, y);
    if (a != 1 && a != -1) continue;
    Linear expr = lin_scale(-a, lin_drop(c.t, y));
    System next = pass;
    for (const LinCon& o : with_y) {
      if (&o == &c) continue;
      next.push_back(con_subst(o, y, expr));
    }
    out.push_back(std::move(next));
    return;
  }

  // General Cooper: scale everything so y's coefficient is +-lambda, view
  // z = lambda*y (recorded through the divisibility lambda | z), and
  // enumerate over lower bounds and residues.
  long long lambda = 1;
  for (const LinCon& c : with_y) {
    long long a = lin_coef(c.t, y);
    lambda = std::lcm(lambda, a < 0 ? -a : a);
    if (lambda > kModulusCap) throw ResourceLimit("projection lcm too large");
  }
  Var z = ctx.names.fresh("cp");
  std::vector<Linear> lowers, uppers;  // z >= l, z <= u
  System divs;                         // constraints on z, coef(z) = +-1
  divs.push_back({LinCon::Kind::div, Linear{0, {{z, 1}}}, lambda});
  for (const LinCon& c : with_y) {
    long long a = lin_coef(c.t, y);
    long long f = lambda / (a < 0 ? -a : a);
    Linear t = lin_scale(f, c.t);  // coef of y is now +-lambda
    long long s = a < 0 ? -1 : 1;
    Linear rest = lin_drop(t, y);
    // replace s*lambda*y by s*z
    Linear tz = rest;
    tz.coef[z] = s;
    switch (c.kind) {
      case LinCon::Kind::ge0:
        if (s > 0)
          lowers.push_back(lin_scale(-1, rest));  // z >= -rest
        else
          uppers.push_back(rest);  // z <= rest
        break;
      case LinCon::Kind::eq0:
        if (s > 0) {
          lowers.push_back(lin_scale(-1, rest));
          uppers.push_back(lin_scale(-1, rest));
        } else {
          lowers.push_back(rest);
          uppers.push_back(rest);
        }
        break;
      case LinCon::Kind::div:
        divs.push_back({LinCon::Kind::div, tz, c.d * f});
        if (c.d * f > kModulusCap)
          throw ResourceLimit("projection lcm too large");
        break;
      default:
        assert(false && "split before projection");
    }
  }

  long long delta = 1;
  for (const LinCon& d : divs) {
    delta = std::lcm(delta, d.d);
    if (delta > kModulusCap) throw ResourceLimit("projection lcm too large");
  }

  auto subst_z = [&](const Linear& val) {
    System next = pass;
    for (const Linear& l : lowers) {
      LinCon c{LinCon::Kind::ge0, lin_sub(val, l), 0};
      next.push_back(std::move(c));
    }
    for (const Linear& u : uppers) {
      LinCon c{LinCon::Kind::ge0, lin_sub(u, val), 0};
      next.push_back(std::move(c));
    }
    for (const LinCon& d : divs) {
      LinCon c = d;
      c.t = lin_subst(d.t, z, val);
      next.push_back(std::move(c));
    }
    return next;
  };

  if (lowers.empty()) {
    // Left-infinite: inequalities are satisfiable arbitrarily low, only the
    // residue of z matters.
    for (long long j = 0; j < delta; ++j) {
      System next = pass;
      for (const LinCon& d : divs) {
        LinCon c = d;
        c.t = lin_subst(d.t, z, Linear{j, {}});
        next.push_back(std::move(c));
      }
      out.push_back(std::move(next));
      if (out.size() > kProjectCap) throw ResourceLimit("projection blowup");
    }
    return;
  }
  for (const Linear& l : lowers) {
    for (long long o = 0; o < delta; ++o) {
      Linear val = l;
      val.k = checked_add(val.k, o);
      out.push_back(subst_z(val));
      if (out.size() > kProjectCap) throw ResourceLimit("projection blowup");
    }
  }
}

inline void project_var(SolveCtx& ctx, const System& sys, const Var& y,
                        std::vector<System>& out) {
  project_var_core(ctx, sys, y, out);
}

inline std::vector<System> project(SolveCtx& ctx, System sys,
                                   std::vector<Var> ys) {
  std::sort(ys.begin(), ys.end());
  std::vector<System> cur{std::move(sys)};
  for (const Var& y : ys) {
    std::vector<System> next;
    for (const System& s : cur) project_var(ctx, s, y, next);
    if (next.size() > kProjectCap) throw ResourceLimit("projection blowup");
    cur = std::move(next);
  }
  return cur;
}

inline LinCon negate(const LinCon& c) {
  switch (c.kind) {
    case LinCon::Kind::eq0:
      return {LinCon::Kind::neq0, c.t, 0};
    case LinCon::Kind::neq0:
      return {LinCon::Kind::eq0, c.t, 0};
    case LinCon::Kind::ge0: {
      // !(t >= 0)  ==  -t - 1 >= 0
      Linear t = lin_scale(-1, c.t);
      t.k = checked_add(t.k, -1);
      return {LinCon::Kind::ge0, std::move(t), 0};
    }
    case LinCon::Kind::div:
      return {LinCon::Kind::ndiv, c.t, c.d};
    case LinCon::Kind::ndiv:
      return {LinCon::Kind::div, c.t, c.d};
  }
  return c;
}

}  // namespace lia_detail

// ---------------------------------------------------------------------------
// min/max expansion
//
// Every min/max node is replaced by a fresh variable plus its two-case
// definition, turning one clause into up to 2^nodes clauses. The fresh
// variables are reported so entailment can existentially close the ones
// introduced on the consequent side.

struct Expanded {
  Dnf dnf;
  std::vector<Var> fresh;
};

inline TermPtr term_replace(const TermPtr& t, const TermPtr& pat,
                            const TermPtr& by) {
  if (term_eq(t, pat)) return by;
  if (t->kind == Term::Kind::minmax)
    return t_minmax(t->is_min, term_replace(t->a, pat, by),
                    term_replace(t->b, pat, by));
  return t;
}

inline TermPtr find_minmax(const TermPtr& t) {
  if (t->kind != Term::Kind::minmax) return nullptr;
  // Innermost first so replacement sites are always linear children.
  if (auto sub = find_minmax(t->a)) return sub;
  if (auto sub = find_minmax(t->b)) return sub;
  return t;
}

inline Expanded expand_minmax(const Dnf& d, NameSupply& names) {
  Expanded out;
  std::vector<Clause> work(d.begin(), d.end());
  while (!work.empty()) {
    Clause c = std::move(work.back());
    work.pop_back();
    TermPtr node;
    for (const Lit& l : c) {
      if (auto n = find_minmax(l.lhs)) {
        node = n;
        break;
      }
      if (auto n = find_minmax(l.rhs)) {
        node = n;
        break;
      }
    }
    if (!node) {
      out.dnf.push_back(std::move(c));
      if (out.dnf.size() + work.size() > kDnfCap)
        throw ResourceLimit("min/max expansion blowup");
      continue;
    }
    Var m = names.fresh("mm");
    out.fresh.push_back(m);
    TermPtr mv = t_var(m);
    Clause base;
    base.reserve(c.size() + 2);
    for (const Lit& l : c)
      base.push_back(Lit{l.pos, l.cmp, term_replace(l.lhs, node, mv),
                         term_replace(l.rhs, node, mv)});
    const TermPtr& a = node->a;
    const TermPtr& b = node->b;
    Clause c1 = base, c2 = base;
    if (node->is_min) {
      c1.push_back(Lit{true, Cmp::le, a, b});       // a <= b, m = a
      c1.push_back(Lit{true, Cmp::eq, mv, a});
      c2.push_back(Lit{true, Cmp::le, t_add(b, t_int(1)), a});  // b < a, m = b
      c2.push_back(Lit{true, Cmp::eq, mv, b});
    } else {
      c1.push_back(Lit{true, Cmp::le, b, a});       // b <= a, m = a
      c1.push_back(Lit{true, Cmp::eq, mv, a});
      c2.push_back(Lit{true, Cmp::le, t_add(a, t_int(1)), b});  // a < b, m = b
      c2.push_back(Lit{true, Cmp::eq, mv, b});
    }
    work.push_back(std::move(c1));
    work.push_back(std::move(c2));
    if (out.dnf.size() + work.size() > kDnfCap)
      throw ResourceLimit("min/max expansion blowup");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Public interface

using QueryLog =
    std::function<void(const std::string& kind, const std::string& before,
                       const std::string& after)>;

class Lia {
 public:
  explicit Lia(NameSupply& names) : names_(names) {}

  void set_log(QueryLog log) { log_ = std::move(log); }

  // Satisfiability of a quantifier-free constraint over the extended
  // terms. Returns a witness for the encoded (sentinel) form.
  std::optional<std::map<Var, long long>> sat(const PurePtr& p) {
    Dnf norm = normalize(p);
    Var sentinel = names_.fresh("vinf");
    InfFree enc = eliminate_inf(norm, sentinel);
    Expanded ex = expand_minmax(enc.dnf, names_);
    if (log_) log_("sat", pure_str(p), dnf_str(ex.dnf));
    lia_detail::SolveCtx ctx{names_};
    for (const Clause& c : ex.dnf) {
      if (auto w = lia_detail::solve(ctx, to_system(c), 0)) {
        std::map<Var, long long> model;
        std::set<Var> want;
        pure_vars(p, want);
        want.insert(sentinel);
        for (const Var& v : want) {
          auto it = w->find(v);
          model[v] = it == w->end() ? 0 : it->second;
        }
        return model;
      }
    }
    return std::nullopt;
  }

  bool sat_bool(const PurePtr& p) { return sat(p).has_value(); }

  // Validity of  ant |- exists ys. cons  over the extended terms. The two
  // sides share one sentinel so their infinities denote the same value.
  // Additionally, an antecedent clause that pins variables to inf/-inf
  // makes those pins visible to the consequent by substitution: from
  // "x = -inf" the consequent "x <= 0" must follow, which the integer
  // encoding alone cannot see (the sentinel is just a free variable there).
  bool implies(const PurePtr& ant, const std::vector<Var>& ys,
               const PurePtr& cons) {
    Var sentinel = names_.fresh("vinf");
    Dnf ant_dnf = normalize(ant);
    lia_detail::SolveCtx ctx{names_};

    // Project the existential block out of each consequent clause.
    auto project_cons = [&](const PurePtr& c) {
      std::vector<lia_detail::System> sys;
      for (const Clause& cc : eliminate_inf(normalize(c), sentinel).dnf) {
        Expanded ex = expand_minmax(Dnf{cc}, names_);
        std::vector<Var> bound = ys;
        bound.insert(bound.end(), ex.fresh.begin(), ex.fresh.end());
        std::set<Var> freev;
        for (const Clause& ec : ex.dnf)
          for (const Lit& l : ec) {
            term_vars(l.lhs, freev);
            term_vars(l.rhs, freev);
          }
        std::erase_if(bound, [&](const Var& v) { return !freev.count(v); });
        for (const Clause& ec : ex.dnf) {
          auto projected = lia_detail::project(ctx, to_system(ec), bound);
          sys.insert(sys.end(), projected.begin(), projected.end());
        }
        if (sys.size() > lia_detail::kProjectCap)
          throw ResourceLimit("projection blowup");
      }
      return sys;
    };

    std::optional<std::vector<lia_detail::System>> plain;  // pin-free cache

    if (log_)
      log_("implies", pure_str(ant) + "  |-  " + pure_str(cons),
           std::to_string(ant_dnf.size()) + " antecedent clauses");

    // ant & !cons must be unsatisfiable for every antecedent clause.
    for (const Clause& a : ant_dnf) {
      std::map<Var, TermPtr> pins;
      for (const Lit& l : a) {
        if (!(l.pos && l.cmp == Cmp::eq)) continue;
        auto v = as_lone_var(l.lhs);
        if (v && as_inf(l.rhs)) pins.emplace(*v, l.rhs);
      }

      const std::vector<lia_detail::System>* cons_sys = nullptr;
      std::vector<lia_detail::System> pinned;
      if (pins.empty()) {
        if (!plain) plain = project_cons(cons);
        cons_sys = &*plain;
      } else {
        try {
          pinned = project_cons(pure_subst(cons, pins));
        } catch (const IndeterminateForm&) {
          // conservative: judge the consequent without the pins
          if (!plain) plain = project_cons(cons);
          pinned = *plain;
        }
        cons_sys = &pinned;
      }

      Expanded a_ex = expand_minmax(eliminate_inf(Dnf{a}, sentinel).dnf,
                                    names_);
      for (const Clause& ac : a_ex.dnf) {
        std::vector<lia_detail::System> cur{to_system(ac)};
        for (const lia_detail::System& cs : *cons_sys) {
          std::vector<lia_detail::System> next;
          for (const lia_detail::System& base : cur)
            for (const LinCon& atom : cs) {
              lia_detail::System s = base;
              s.push_back(lia_detail::negate(atom));
              next.push_back(std::move(s));
              if (next.size() > kDnfCap)
                throw ResourceLimit("refutation blowup");
            }
          // A consequent branch with no atoms is "true"; its negation wipes
          // out every refutation candidate, which the product form already
          // encodes (the inner loop contributes nothing).
          cur = std::move(next);
          if (cur.empty()) break;
        }
        for (lia_detail::System& s : cur) {
          if (lia_detail::solve(ctx, std::move(s), 0)) return false;
        }
      }
    }
    return true;
  }

 private:
  static lia_detail::System to_system(const Clause& c) {
    lia_detail::System sys;
    sys.reserve(c.size());
    for (const Lit& l : c) {
      assert(l.lhs->kind == Term::Kind::linear &&
             l.rhs->kind == Term::Kind::linear);
      Linear diff = lia_detail::lin_sub(l.lhs->lin, l.rhs->lin);
      if (l.cmp == Cmp::eq)
        sys.push_back(
            {l.pos ? LinCon::Kind::eq0 : LinCon::Kind::neq0, diff, 0});
      else {
        assert(l.pos && "negated <= must be complemented before solving");
        sys.push_back(
            {LinCon::Kind::ge0, lia_detail::lin_scale(-1, diff), 0});
      }
    }
    return sys;
  }

  NameSupply& names_;
  QueryLog log_;
};

}  // namespace sentinel
