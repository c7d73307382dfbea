#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "sentinel/names.hpp"
#include "sentinel/source.hpp"

namespace sentinel {

// Terms are kept canonical at all times:
//
//   linear   c0 + c1*v1 + ... + cn*vn     (sorted vars, no zero coefficients)
//   inf      one of the two logical constants, sign +1 or -1
//   minmax   min/max node whose children are canonical and never a constant
//            infinity (absorption removes those on construction)
//
// Construction goes through the smart constructors below; they fold
// constants, absorb infinities in sums and scalings, push additions through
// min/max, and reject the indeterminate sum of opposite infinities.

inline constexpr long long kCoefCap = 1LL << 50;

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Linear {
  long long k = 0;
  std::map<Var, long long> coef;

  bool is_const() const { return coef.empty(); }
  bool operator==(const Linear&) const = default;
};

struct Term {
  enum class Kind { linear, inf, minmax };

  Kind kind;
  Linear lin;        // kind == linear
  int sign = 0;      // kind == inf: +1 or -1
  bool is_min = false;
  TermPtr a, b;      // kind == minmax
};

inline long long checked_add(long long x, long long y) {
  long long r;
  if (__builtin_add_overflow(x, y, &r) || r > kCoefCap || r < -kCoefCap)
    throw ResourceLimit("coefficient magnitude exceeded");
  return r;
}

inline long long checked_mul(long long x, long long y) {
  long long r;
  if (__builtin_mul_overflow(x, y, &r) || r > kCoefCap || r < -kCoefCap)
    throw ResourceLimit("coefficient magnitude exceeded");
  return r;
}

inline TermPtr t_linear(Linear l) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::linear;
  std::erase_if(l.coef, [](const auto& e) { return e.second == 0; });
  t->lin = std::move(l);
  return t;
}

inline TermPtr t_int(long long k) { return t_linear(Linear{k, {}}); }

inline TermPtr t_var(const Var& v) { return t_linear(Linear{0, {{v, 1}}}); }

inline TermPtr t_inf(int sign) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::inf;
  t->sign = sign >= 0 ? 1 : -1;
  return t;
}

inline std::optional<long long> as_const(const TermPtr& t) {
  if (t->kind == Term::Kind::linear && t->lin.is_const()) return t->lin.k;
  return std::nullopt;
}

inline std::optional<Var> as_lone_var(const TermPtr& t) {
  if (t->kind == Term::Kind::linear && t->lin.k == 0 &&
      t->lin.coef.size() == 1 && t->lin.coef.begin()->second == 1)
    return t->lin.coef.begin()->first;
  return std::nullopt;
}

inline std::optional<int> as_inf(const TermPtr& t) {
  if (t->kind == Term::Kind::inf) return t->sign;
  return std::nullopt;
}

// Total structural order; used for canonical min/max child ordering and for
// deterministic containers keyed by terms.
inline int term_cmp(const TermPtr& x, const TermPtr& y) {
  if (x->kind != y->kind) return x->kind < y->kind ? -1 : 1;
  switch (x->kind) {
    case Term::Kind::linear: {
      if (x->lin.k != y->lin.k) return x->lin.k < y->lin.k ? -1 : 1;
      if (x->lin.coef != y->lin.coef)
        return x->lin.coef < y->lin.coef ? -1 : 1;
      return 0;
    }
    case Term::Kind::inf:
      if (x->sign != y->sign) return x->sign < y->sign ? -1 : 1;
      return 0;
    case Term::Kind::minmax: {
      if (x->is_min != y->is_min) return x->is_min ? -1 : 1;
      if (int c = term_cmp(x->a, y->a)) return c;
      return term_cmp(x->b, y->b);
    }
  }
  return 0;
}

inline bool term_eq(const TermPtr& x, const TermPtr& y) {
  return term_cmp(x, y) == 0;
}

inline TermPtr t_add(const TermPtr& x, const TermPtr& y);
inline TermPtr t_scale(long long k, const TermPtr& x);

inline TermPtr t_minmax(bool is_min, const TermPtr& x, const TermPtr& y) {
  // Absorption: min(a, inf) = a, min(a, -inf) = -inf, and dually for max.
  if (auto s = as_inf(x)) {
    bool absorb_to_inf = (*s > 0) != is_min;
    return absorb_to_inf ? x : y;
  }
  if (auto s = as_inf(y)) {
    bool absorb_to_inf = (*s > 0) != is_min;
    return absorb_to_inf ? y : x;
  }
  int c = term_cmp(x, y);
  if (c == 0) return x;
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::minmax;
  t->is_min = is_min;
  t->a = c < 0 ? x : y;
  t->b = c < 0 ? y : x;
  return t;
}

inline TermPtr t_min(const TermPtr& x, const TermPtr& y) {
  return t_minmax(true, x, y);
}
inline TermPtr t_max(const TermPtr& x, const TermPtr& y) {
  return t_minmax(false, x, y);
}

inline TermPtr t_add(const TermPtr& x, const TermPtr& y) {
  if (x->kind == Term::Kind::inf && y->kind == Term::Kind::inf) {
    if (x->sign != y->sign)
      throw IndeterminateForm("sum of opposite infinities");
    return x;
  }
  if (x->kind == Term::Kind::inf) {
    if (y->kind == Term::Kind::minmax)
      return t_minmax(y->is_min, t_add(x, y->a), t_add(x, y->b));
    return x;
  }
  if (y->kind == Term::Kind::inf) return t_add(y, x);
  if (x->kind == Term::Kind::minmax)
    return t_minmax(x->is_min, t_add(x->a, y), t_add(x->b, y));
  if (y->kind == Term::Kind::minmax)
    return t_minmax(y->is_min, t_add(x, y->a), t_add(x, y->b));
  Linear l = x->lin;
  l.k = checked_add(l.k, y->lin.k);
  for (const auto& [v, c] : y->lin.coef) l.coef[v] = checked_add(l.coef[v], c);
  return t_linear(std::move(l));
}

inline TermPtr t_scale(long long k, const TermPtr& x) {
  if (k == 0) return t_int(0);  // also defines 0 * inf = 0
  switch (x->kind) {
    case Term::Kind::linear: {
      Linear l;
      l.k = checked_mul(k, x->lin.k);
      for (const auto& [v, c] : x->lin.coef) l.coef[v] = checked_mul(k, c);
      return t_linear(std::move(l));
    }
    case Term::Kind::inf:
      return t_inf(k > 0 ? x->sign : -x->sign);
    case Term::Kind::minmax: {
      bool is_min = k > 0 ? x->is_min : !x->is_min;
      return t_minmax(is_min, t_scale(k, x->a), t_scale(k, x->b));
    }
  }
  return x;
}

inline TermPtr t_neg(const TermPtr& x) { return t_scale(-1, x); }

inline TermPtr t_sub(const TermPtr& x, const TermPtr& y) {
  return t_add(x, t_neg(y));
}

inline void term_vars(const TermPtr& t, std::set<Var>& out) {
  switch (t->kind) {
    case Term::Kind::linear:
      for (const auto& [v, c] : t->lin.coef) out.insert(v);
      break;
    case Term::Kind::inf:
      break;
    case Term::Kind::minmax:
      term_vars(t->a, out);
      term_vars(t->b, out);
      break;
  }
}

inline TermPtr term_subst(const TermPtr& t, const Var& v, const TermPtr& by) {
  switch (t->kind) {
    case Term::Kind::linear: {
      auto it = t->lin.coef.find(v);
      if (it == t->lin.coef.end()) return t;
      Linear rest = t->lin;
      long long c = it->second;
      rest.coef.erase(v);
      return t_add(t_linear(std::move(rest)), t_scale(c, by));
    }
    case Term::Kind::inf:
      return t;
    case Term::Kind::minmax:
      return t_minmax(t->is_min, term_subst(t->a, v, by),
                      term_subst(t->b, v, by));
  }
  return t;
}

inline TermPtr term_subst(const TermPtr& t,
                          const std::map<Var, TermPtr>& sub) {
  switch (t->kind) {
    case Term::Kind::linear: {
      Linear rest;
      rest.k = t->lin.k;
      TermPtr acc = nullptr;
      for (const auto& [v, c] : t->lin.coef) {
        auto it = sub.find(v);
        if (it == sub.end()) {
          rest.coef[v] = c;
        } else {
          TermPtr piece = t_scale(c, it->second);
          acc = acc ? t_add(acc, piece) : piece;
        }
      }
      TermPtr base = t_linear(std::move(rest));
      return acc ? t_add(base, acc) : base;
    }
    case Term::Kind::inf:
      return t;
    case Term::Kind::minmax:
      return t_minmax(t->is_min, term_subst(t->a, sub), term_subst(t->b, sub));
  }
  return t;
}

// Replaces each infinity constant by +/- sentinel. The result contains no
// inf nodes so downstream arithmetic is plain linear algebra.
inline TermPtr term_drop_inf(const TermPtr& t, const Var& sentinel) {
  switch (t->kind) {
    case Term::Kind::linear:
      return t;
    case Term::Kind::inf:
      return t_scale(t->sign, t_var(sentinel));
    case Term::Kind::minmax:
      return t_minmax(t->is_min, term_drop_inf(t->a, sentinel),
                      term_drop_inf(t->b, sentinel));
  }
  return t;
}

inline bool term_has_inf(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::linear:
      return false;
    case Term::Kind::inf:
      return true;
    case Term::Kind::minmax:
      return term_has_inf(t->a) || term_has_inf(t->b);
  }
  return false;
}

inline bool term_has_minmax(const TermPtr& t) {
  return t->kind == Term::Kind::minmax;
}

inline std::string term_str(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::inf:
      return t->sign > 0 ? "inf" : "-inf";
    case Term::Kind::minmax:
      return std::string(t->is_min ? "min(" : "max(") + term_str(t->a) + ", " +
             term_str(t->b) + ")";
    case Term::Kind::linear: {
      const Linear& l = t->lin;
      if (l.coef.empty()) return std::to_string(l.k);
      std::string s;
      bool first = true;
      if (l.k != 0) {
        s = std::to_string(l.k);
        first = false;
      }
      for (const auto& [v, c] : l.coef) {
        if (first) {
          if (c == 1)
            s += v;
          else if (c == -1)
            s += "-" + v;
          else
            s += std::to_string(c) + "*" + v;
          first = false;
          continue;
        }
        long long m = c < 0 ? -c : c;
        s += c < 0 ? " - " : " + ";
        if (m != 1) s += std::to_string(m) + "*";
        s += v;
      }
      return s;
    }
  }
  return "?";
}

}  // namespace sentinel
