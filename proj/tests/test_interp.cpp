#include <catch2/catch_amalgamated.hpp>

#include "sentinel/interp.hpp"
#include "sentinel/lower.hpp"
#include "sentinel/parser.hpp"
#include "sentinel/resolve.hpp"

using namespace sentinel;

namespace {

// The oracle runs the surface program, so only parse/inject/resolve here.
struct IFix {
  NameSupply names;
  Program prog;

  explicit IFix(const std::string& src, bool enable_sub = false) {
    prog = parse_program(src, "t.sv", names);
    inject_builtins(prog, names, enable_sub);
    resolve(prog, ResolveOptions{enable_sub});
  }
};

long long make_list(ConcreteHeap& h, const std::vector<long long>& vals) {
  long long tail = 0;
  for (auto it = vals.rbegin(); it != vals.rend(); ++it)
    tail = h.alloc("node", {*it, tail});
  return tail;
}

const std::string kEx4 = R"(data node {
  int val;
  node next;
}

pred ll<root, sum> ==
  root = null & sum = 0
  | exists d, q, rest: root::node<d, q> * q::ll<rest>
      & sum = d + rest & -inf < sum & sum < inf;

int sum_all(node x)
  requires x::ll<s>
  ensures res = s;
{
  if (x == null) {
    return 0;
  } else {
    return x.val + sum_all(x.next);
  }
}

int outer(node x)
  requires x::ll<s>
  ensures true;
{
  return sum_all(x);
}
)";

const std::string kSortedLL = R"(data node {
  int val;
  node next;
}

pred sortll<root, mn> ==
  root = null & mn = inf
  | exists q, mr: root::node<mn, q> * q::sortll<mr> & mn < mr;

node push_min(node xs, int v)
  requires xs::sortll<m0> & v < m0
  ensures res::sortll<m1> & m1 = v;
{
  return new node(v, xs);
}
)";

const std::string kCountUp = R"(int count_up(int n)
  requires 0 <= n & n < inf
  ensures res = n;
{
  int i = 0;
  while (i < n)
    requires 0 <= i & i <= n & n < inf
    ensures i' = n;
  {
    i = i + 1;
  }
  return i;
}
)";

}  // namespace

TEST_CASE("wrap_to_width folds into the signed or unsigned range") {
  CHECK(wrap_to_width(7, 4, false) == 7);
  CHECK(wrap_to_width(8, 4, false) == -8);
  CHECK(wrap_to_width(-9, 4, false) == 7);
  CHECK(wrap_to_width(-8, 4, false) == -8);
  CHECK(wrap_to_width(16, 4, true) == 0);
  CHECK(wrap_to_width(15, 4, true) == 15);
  CHECK(wrap_to_width(200, 8, false) == -56);
  CHECK(wrap_to_width(70000, 16, true) == 4464);
}

TEST_CASE("signed addition past the width records an event and wraps") {
  IFix fx(R"(int f(int a, int b)
  requires true
  ensures true;
{
  return a + b;
}
)");
  Machine m(fx.prog, 4);
  RunResult rr = m.run("f", {7, 1});
  REQUIRE(rr.status == RunStatus::ok);
  CHECK(rr.value == -8);
  REQUIRE(rr.events.size() == 1);
  CHECK(rr.events[0].frame == "f");
  CHECK(rr.events[0].op_text == "a + b");
  CHECK(rr.events[0].lhs == 7);
  CHECK(rr.events[0].rhs == 1);

  Machine exact(fx.prog, 4, false);
  RunResult re = exact.run("f", {7, 1});
  CHECK(re.value == 8);  // exact mode continues with the true sum
  CHECK(re.events.size() == 1);

  CHECK(m.run("f", {3, 2}).events.empty());
  CHECK(m.run("f", {-8, -1}).events.size() == 1);
  CHECK(m.run("f", {-8, -1}).value == 7);
}

TEST_CASE("uint operands wrap without sign extension") {
  IFix fx(R"(uint f(uint a, uint b)
  requires true
  ensures true;
{
  return a + b;
}
)");
  Machine m(fx.prog, 4);
  RunResult rr = m.run("f", {12, 12});
  CHECK(rr.value == 8);
  REQUIRE(rr.events.size() == 1);
  CHECK(m.run("f", {8, 7}).events.empty());
}

TEST_CASE("list sum runs through recursion and the heap") {
  IFix fx(kEx4);
  Machine m(fx.prog, 8);
  long long xs = make_list(m.heap, {1, 2, 3});
  RunResult rr = m.run("sum_all", {xs});
  REQUIRE(rr.status == RunStatus::ok);
  CHECK(rr.value == 6);
  CHECK(rr.events.empty());

  Machine m2(fx.prog, 8);
  long long ys = make_list(m2.heap, {100, 100});
  RunResult r2 = m2.run("outer", {ys});
  CHECK(r2.value == -56);
  REQUIRE(r2.events.size() == 1);
  CHECK(r2.events[0].frame == "sum_all");  // the op lives in the callee
  CHECK(r2.events[0].op_text == "x.val + sum_all(x.next)");
}

TEST_CASE("reading a field of null halts with null_deref") {
  IFix fx(R"(data node {
  int val;
  node next;
}

int head(node x)
  requires true
  ensures true;
{
  return x.val;
}
)");
  Machine m(fx.prog, 8);
  CHECK(m.run("head", {0}).status == RunStatus::null_deref);
  long long xs = make_list(m.heap, {9});
  RunResult rr = m.run("head", {xs});
  CHECK(rr.status == RunStatus::ok);
  CHECK(rr.value == 9);
}

TEST_CASE("a loop that makes no progress exhausts the step budget") {
  IFix fx(R"(int spin()
  requires true
  ensures true;
{
  int z = 0;
  while (z <= 0)
    requires true
    ensures true;
  {
    z = z + 0;
  }
  return z;
}
)");
  Machine m(fx.prog, 8);
  CHECK(m.run("spin", {}).status == RunStatus::step_budget);
}

TEST_CASE("calling a bodiless method halts as external") {
  IFix fx(R"(int mystery(int a)
  requires true
  ensures true;

int go()
  requires true
  ensures true;
{
  return mystery(3);
}
)");
  Machine m(fx.prog, 8);
  CHECK(m.run("go", {}).status == RunStatus::external_call);
}

TEST_CASE("explicit builtin calls compute inline in the caller's frame") {
  IFix fx(R"(int two(uint a)
  requires true
  ensures true;
{
  return uadd(a, a);
}
)");
  Machine m(fx.prog, 4);
  RunResult rr = m.run("two", {12});
  CHECK(rr.value == 8);
  REQUIRE(rr.events.size() == 1);
  CHECK(rr.events[0].frame == "two");
  CHECK(m.run("two", {5}).events.empty());
}

TEST_CASE("mutation and allocation round-trip through the heap") {
  IFix fx(R"(data node {
  int val;
  node next;
}

int poke(node x)
  requires true
  ensures true;
{
  x.val = 42;
  return x.val;
}

node mk(int v)
  requires true
  ensures true;
{
  return new node(v, null);
}
)");
  Machine m(fx.prog, 8);
  long long xs = make_list(m.heap, {1});
  CHECK(m.run("poke", {xs}).value == 42);
  CHECK(m.heap.cells.at(xs).second[0] == 42);
  long long r = m.run("mk", {5}).value;
  REQUIRE(r != 0);
  CHECK(m.heap.cells.at(r).second == std::vector<long long>{5, 0});
}

TEST_CASE("wrapped and exact runs agree when nothing wraps") {
  IFix fx(kCountUp);
  Machine mw(fx.prog, 16);
  Machine me(fx.prog, 16, false);
  for (long long n : {0, 1, 5, 40}) {
    RunResult a = mw.run("count_up", {n});
    RunResult b = me.run("count_up", {n});
    REQUIRE(a.status == RunStatus::ok);
    CHECK(a.value == n);
    CHECK(b.value == n);
    CHECK(a.events.empty());
    CHECK(b.events.empty());
  }
}

TEST_CASE("spec atoms read the logical constants as width extremes") {
  NumEnv env{{"n", 7}};
  // n < inf is a strict width bound: false exactly at the top value
  CHECK(eval_pure_num(p_lt(t_var("n"), t_inf(1)), env, 4, false) ==
        std::optional<bool>(false));
  env["n"] = 6;
  CHECK(eval_pure_num(p_lt(t_var("n"), t_inf(1)), env, 4, false) ==
        std::optional<bool>(true));
  env["n"] = 7;
  CHECK(eval_pure_num(p_le(t_var("n"), t_inf(1)), env, 4, false) ==
        std::optional<bool>(true));
  CHECK(eval_pure_num(p_le(t_var("n"), t_inf(-1)), env, 4, false) ==
        std::optional<bool>(false));
  CHECK(eval_pure_num(p_eq(t_var("n"), t_inf(1)), env, 4, false) ==
        std::optional<bool>(true));  // 7 is the stand-in for inf at w=4
  CHECK(eval_pure_num(p_le(t_var("n"), t_inf(1)), env, 4, true) ==
        std::optional<bool>(true));
  CHECK(!eval_pure_num(p_lt(t_var("m"), t_inf(1)), env, 4, false)
             .has_value());  // unbound name
  CHECK(eval_term_num(t_min(t_var("n"), t_int(3)), env, 4, false) == 3);
  CHECK(eval_term_num(t_max(t_var("n"), t_int(3)), env, 4, false) == 7);
}

TEST_CASE("list predicate matching solves ghosts off the structure") {
  IFix fx(kEx4);
  const Method* m = fx.prog.find_method("sum_all");
  REQUIRE(m);
  const SepFormula& req = m->specs[0].requires_;

  ConcreteHeap h;
  long long xs = make_list(h, {5, 6});
  SpecEval w8{fx.prog, h, 8, false};
  CHECK(w8.satisfies(req, {{"x", xs}}));
  NumEnv env{{"x", xs}};
  REQUIRE(w8.match_disjunct(req.disjuncts[0], env, 0));
  CHECK(env.at("s") == 11);

  // at width 4 the solved sum violates the predicate's own bounds
  SpecEval w4{fx.prog, h, 4, false};
  CHECK(!w4.satisfies(req, {{"x", xs}}));

  ConcreteHeap empty;
  SpecEval we{fx.prog, empty, 4, false};
  NumEnv env0{{"x", 0}};
  REQUIRE(we.match_disjunct(req.disjuncts[0], env0, 0));
  CHECK(env0.at("s") == 0);
}

TEST_CASE("sorted list matching checks order and caps the empty minimum") {
  IFix fx(kSortedLL);
  const Method* m = fx.prog.find_method("push_min");
  REQUIRE(m);
  const SepFormula& req = m->specs[0].requires_;

  ConcreteHeap h;
  long long good = make_list(h, {3, 7});
  long long bad = make_list(h, {7, 3});
  SpecEval se{fx.prog, h, 8, false};

  NumEnv env{{"xs", good}, {"v", 1}};
  REQUIRE(se.match_disjunct(req.disjuncts[0], env, 0));
  CHECK(env.at("m0") == 3);
  CHECK(se.satisfies(req, {{"xs", good}, {"v", 2}}));
  CHECK(!se.satisfies(req, {{"xs", good}, {"v", 3}}));  // v < m0 fails
  CHECK(!se.satisfies(req, {{"xs", bad}, {"v", 1}}));

  NumEnv env0{{"xs", 0}, {"v", 5}};
  REQUIRE(se.match_disjunct(req.disjuncts[0], env0, 0));
  CHECK(env0.at("m0") == 127);  // empty list: the minimum reads as inf
}

TEST_CASE("injected guards partition the plane and track wrapping exactly") {
  IFix fx("", true);
  ConcreteHeap empty;

  auto pairs_of = [&](const std::string& name) {
    const Method* m = fx.prog.find_method(name);
    REQUIRE(m);
    const SepFormula* err = nullptr;
    const SepFormula* safe = nullptr;
    for (const SpecPair& sp : m->specs)
      (sp.is_err ? err : safe) = &sp.requires_;
    REQUIRE(err);
    REQUIRE(safe);
    return std::pair<const SepFormula*, const SepFormula*>{err, safe};
  };

  SECTION("signed add and sub") {
    for (const char* name : {"add", "sub"}) {
      auto [err, safe] = pairs_of(name);
      SpecEval se{fx.prog, empty, 4, false};
      bool is_sub = std::string(name) == "sub";
      for (long long k1 = -8; k1 <= 7; ++k1)
        for (long long k2 = -8; k2 <= 7; ++k2) {
          NumEnv env{{"k1", k1}, {"k2", k2}};
          bool e = se.satisfies(*err, env);
          bool s = se.satisfies(*safe, env);
          long long exact = is_sub ? k1 - k2 : k1 + k2;
          bool wraps = wrap_to_width(exact, 4, false) != exact;
          INFO(name << "(" << k1 << ", " << k2 << ")");
          REQUIRE(e != s);
          REQUIRE(e == wraps);
        }
    }
  }

  SECTION("unsigned uadd and usub") {
    for (const char* name : {"uadd", "usub"}) {
      auto [err, safe] = pairs_of(name);
      SpecEval se{fx.prog, empty, 4, true};
      bool is_sub = std::string(name) == "usub";
      for (long long k1 = 0; k1 <= 15; ++k1)
        for (long long k2 = 0; k2 <= 15; ++k2) {
          NumEnv env{{"k1", k1}, {"k2", k2}};
          bool e = se.satisfies(*err, env);
          bool s = se.satisfies(*safe, env);
          long long exact = is_sub ? k1 - k2 : k1 + k2;
          bool wraps = wrap_to_width(exact, 4, true) != exact;
          INFO(name << "(" << k1 << ", " << k2 << ")");
          REQUIRE(e != s);
          REQUIRE(e == wraps);
        }
    }
  }
}

TEST_CASE("requires filters read compound bounds at the width") {
  IFix fx(R"(int inc(int n)
  requires 0 <= n & n + 1 <= inf
  ensures res = n + 1;
{
  return n + 1;
}
)");
  const Method* m = fx.prog.find_method("inc");
  ConcreteHeap empty;
  SpecEval se{fx.prog, empty, 4, false};
  CHECK(se.satisfies(m->specs[0].requires_, {{"n", 6}}));
  CHECK(!se.satisfies(m->specs[0].requires_, {{"n", 7}}));
  CHECK(!se.satisfies(m->specs[0].requires_, {{"n", -1}}));
}
