#include <catch2/catch_amalgamated.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sentinel/pure.hpp"
#include "support/generators.hpp"

using namespace sentinel;

namespace {

const TermPtr vx = t_var("v");
const TermPtr wx = t_var("w");
const TermPtr pinf = t_inf(1);
const TermPtr ninf = t_inf(-1);
const TermPtr k = t_int(4);

Lit mk(bool pos, Cmp cmp, const TermPtr& l, const TermPtr& r) {
  return Lit{pos, cmp, l, r};
}

struct RuleCase {
  const char* label;
  Lit input;
  std::optional<bool> truth;      // set: literal folds to a constant
  std::optional<Lit> rewritten;   // set: literal rewrites to another literal
};

bool has_inf_anywhere(const Dnf& d) {
  for (const Clause& c : d)
    for (const Lit& l : c)
      if (term_has_inf(l.lhs) || term_has_inf(l.rhs)) return true;
  return false;
}

}  // namespace

TEST_CASE("rewrite table: comparisons between the extended constants") {
  const std::vector<RuleCase> table = {
      {"inf = inf", mk(true, Cmp::eq, pinf, pinf), true, {}},
      {"inf != inf", mk(false, Cmp::eq, pinf, pinf), false, {}},
      {"inf <= inf", mk(true, Cmp::le, pinf, pinf), true, {}},
      {"inf = -inf", mk(true, Cmp::eq, pinf, ninf), false, {}},
      {"inf != -inf", mk(false, Cmp::eq, pinf, ninf), true, {}},
      {"inf <= -inf", mk(true, Cmp::le, pinf, ninf), false, {}},
      {"-inf = -inf", mk(true, Cmp::eq, ninf, ninf), true, {}},
      {"-inf != -inf", mk(false, Cmp::eq, ninf, ninf), false, {}},
      {"-inf <= -inf", mk(true, Cmp::le, ninf, ninf), true, {}},
      {"-inf <= inf", mk(true, Cmp::le, ninf, pinf), true, {}},
  };
  for (const auto& rc : table) {
    INFO(rc.label);
    LitStep st = rewrite_lit(rc.input);
    REQUIRE(st.kind == LitStep::Kind::truth);
    CHECK(st.value == *rc.truth);
  }
}

TEST_CASE("rewrite table: constants against the extended constants") {
  const std::vector<RuleCase> table = {
      {"k = inf", mk(true, Cmp::eq, k, pinf), false, {}},
      {"k != inf", mk(false, Cmp::eq, k, pinf), true, {}},
      {"k <= inf", mk(true, Cmp::le, k, pinf), true, {}},
      {"inf <= k", mk(true, Cmp::le, pinf, k), false, {}},
      {"k = -inf", mk(true, Cmp::eq, k, ninf), false, {}},
      {"k != -inf", mk(false, Cmp::eq, k, ninf), true, {}},
      {"k <= -inf", mk(true, Cmp::le, k, ninf), false, {}},
      {"-inf <= k", mk(true, Cmp::le, ninf, k), true, {}},
  };
  for (const auto& rc : table) {
    INFO(rc.label);
    LitStep st = rewrite_lit(rc.input);
    REQUIRE(st.kind == LitStep::Kind::truth);
    CHECK(st.value == *rc.truth);
  }
}

TEST_CASE("rewrite table: lone variables against the extended constants") {
  const std::vector<RuleCase> table = {
      {"v <= inf", mk(true, Cmp::le, vx, pinf), true, {}},
      {"inf <= v", mk(true, Cmp::le, pinf, vx), {}, mk(true, Cmp::eq, vx, pinf)},
      {"v <= -inf", mk(true, Cmp::le, vx, ninf), {}, mk(true, Cmp::eq, vx, ninf)},
      {"-inf <= v", mk(true, Cmp::le, ninf, vx), true, {}},
  };
  for (const auto& rc : table) {
    INFO(rc.label);
    LitStep st = rewrite_lit(rc.input);
    if (rc.truth) {
      REQUIRE(st.kind == LitStep::Kind::truth);
      CHECK(st.value == *rc.truth);
    } else {
      REQUIRE(st.kind == LitStep::Kind::keep);
      CHECK(lit_eq(st.lit, *rc.rewritten));
    }
  }
}

TEST_CASE("rewrite table: min/max absorption happens at construction") {
  const TermPtr a = t_add(vx, t_int(1));
  CHECK(term_eq(t_min(a, pinf), a));
  CHECK(term_eq(t_max(a, pinf), pinf));
  CHECK(term_eq(t_min(a, ninf), ninf));
  CHECK(term_eq(t_max(a, ninf), a));
}

TEST_CASE("rewrites: mirrored equality orientations") {
  // the equality rules apply on either side; "v = inf" ends variable-left
  CHECK(rewrite_lit(mk(true, Cmp::eq, pinf, k)).value == false);
  CHECK(rewrite_lit(mk(false, Cmp::eq, ninf, k)).value == true);

  LitStep st = rewrite_lit(mk(true, Cmp::eq, pinf, vx));
  REQUIRE(st.kind == LitStep::Kind::keep);
  CHECK(lit_eq(st.lit, mk(true, Cmp::eq, vx, pinf)));
  CHECK(st.changed);

  // already canonical: unchanged
  st = rewrite_lit(mk(true, Cmp::eq, vx, pinf));
  REQUIRE(st.kind == LitStep::Kind::keep);
  CHECK_FALSE(st.changed);
}

TEST_CASE("rewrites: negated <= survives untouched") {
  // "n+1 < inf" arrives as !(inf <= n+1); no rule may fire on it, else the
  // strict upper bound would be lost before sentinel elimination.
  Lit l = mk(false, Cmp::le, pinf, t_add(vx, t_int(1)));
  LitStep st = rewrite_lit(l);
  REQUIRE(st.kind == LitStep::Kind::keep);
  CHECK_FALSE(st.changed);
  CHECK(lit_eq(st.lit, l));
}

TEST_CASE("rewrites: compound terms against inf are conservative") {
  // v+1 <= inf is not folded; the term is not a lone variable or constant
  Lit l = mk(true, Cmp::le, t_add(vx, t_int(1)), pinf);
  LitStep st = rewrite_lit(l);
  REQUIRE(st.kind == LitStep::Kind::keep);
  CHECK_FALSE(st.changed);
}

TEST_CASE("rewrites: closed atoms fold arithmetically") {
  CHECK(rewrite_lit(mk(true, Cmp::le, t_int(3), t_int(5))).value == true);
  CHECK(rewrite_lit(mk(false, Cmp::le, t_int(3), t_int(5))).value == false);
  CHECK(rewrite_lit(mk(true, Cmp::eq, vx, vx)).value == true);
  CHECK(rewrite_lit(mk(false, Cmp::eq, vx, vx)).value == false);
  CHECK(rewrite_lit(mk(true, Cmp::le, vx, vx)).value == true);
  CHECK(rewrite_lit(mk(false, Cmp::le, vx, vx)).value == false);
}

TEST_CASE("desugaring of strict and flipped comparisons") {
  CHECK(pure_str(p_lt(vx, wx)) == "!(w <= v)");
  CHECK(pure_str(p_gt(vx, wx)) == "!(v <= w)");
  CHECK(pure_str(p_ge(vx, wx)) == "w <= v");
  CHECK(pure_str(p_ne(vx, wx)) == "!(v = w)");
}

TEST_CASE("normalize: pinning a variable to inf refutes finite bounds") {
  // inf <= v & v <= 5 is unsatisfiable
  Dnf d = normalize(p_and(p_le(pinf, vx), p_le(vx, t_int(5))));
  CHECK(d.empty());
}

TEST_CASE("normalize: defining equalities are substituted and retained") {
  Dnf d = normalize(p_and(p_eq(vx, pinf), p_le(ninf, vx)));
  REQUIRE(d.size() == 1);
  REQUIRE(d[0].size() == 1);
  CHECK(lit_eq(d[0][0], mk(true, Cmp::eq, vx, pinf)));

  // w <= v becomes w <= inf, which is a true fact about w
  d = normalize(p_and(p_eq(vx, pinf), p_le(wx, vx)));
  REQUIRE(d.size() == 1);
  REQUIRE(d[0].size() == 1);
  CHECK(lit_eq(d[0][0], mk(true, Cmp::eq, vx, pinf)));
}

TEST_CASE("normalize: contradictory pins cancel a clause") {
  Dnf d = normalize(p_and(p_eq(vx, pinf), p_eq(vx, ninf)));
  CHECK(d.empty());
  d = normalize(p_and(p_le(vx, ninf), p_le(pinf, vx)));
  CHECK(d.empty());
}

TEST_CASE("elimination: sentinel replaces both constants, complements fold") {
  PurePtr p = p_and(p_lt(t_add(vx, t_int(1)), pinf),
                    p_gt(t_add(vx, t_int(1)), pinf));
  InfFree f = eliminate_inf(normalize(p), "s!");
  CHECK(f.used_sentinel);
  REQUIRE(f.dnf.size() == 1);
  REQUIRE(f.dnf[0].size() == 2);
  for (const Lit& l : f.dnf[0]) {
    CHECK(l.pos);
    CHECK(l.cmp == Cmp::le);
    CHECK_FALSE(term_has_inf(l.lhs));
    CHECK_FALSE(term_has_inf(l.rhs));
  }
}

TEST_CASE("elimination: negated <= complements even without infinities") {
  InfFree f = eliminate_inf(Dnf{Clause{mk(false, Cmp::le, vx, wx)}}, "s!");
  CHECK_FALSE(f.used_sentinel);
  REQUIRE(f.dnf.size() == 1);
  REQUIRE(f.dnf[0].size() == 1);
  CHECK(lit_eq(f.dnf[0][0], mk(true, Cmp::le, t_add(wx, t_int(1)), vx)));
}

TEST_CASE("dnf expansion respects the clause budget") {
  PurePtr p = p_true();
  for (int i = 0; i < 14; ++i) {
    TermPtr xi = t_var("x" + std::to_string(i));
    p = p_and(p, p_or(p_eq(xi, t_int(0)), p_eq(xi, t_int(1))));
  }
  CHECK_THROWS_AS(to_dnf(p), ResourceLimit);
}

TEST_CASE("normalize reaches a fixpoint within the pass budget") {
  // bound: one pass per variable plus one per literal mentioning an
  // extended constant, plus the final no-change pass
  tsup::Rng rng(0x5eed00d1);
  for (int iter = 0; iter < 2000; ++iter) {
    tsup::ExtendedSample s = tsup::gen_extended(rng);
    Dnf d = to_dnf(tsup::to_pure(s.form));
    for (Clause c : d) {
      std::set<Var> vars;
      int inf_atoms = 0;
      for (const Lit& l : c) {
        term_vars(l.lhs, vars);
        term_vars(l.rhs, vars);
        if (term_has_inf(l.lhs) || term_has_inf(l.rhs)) ++inf_atoms;
      }
      int passes = 0;
      normalize_clause(c, &passes);
      CHECK(passes <= static_cast<int>(vars.size()) + inf_atoms + 1);
    }
  }
}

TEST_CASE("no extended constant survives elimination") {
  tsup::Rng rng(0x5eed00d2);
  for (int iter = 0; iter < 2000; ++iter) {
    tsup::ExtendedSample s = tsup::gen_extended(rng);
    InfFree f = eliminate_inf(normalize(tsup::to_pure(s.form)), "s!");
    CHECK_FALSE(has_inf_anywhere(f.dnf));
  }
}
