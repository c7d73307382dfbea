#include <catch2/catch_amalgamated.hpp>

#include "sentinel/lower.hpp"
#include "sentinel/parser.hpp"
#include "sentinel/resolve.hpp"
#include "sentinel/verify.hpp"

using namespace sentinel;

namespace {

// Parse, inject builtins, resolve, lower, verify. Keeps both program forms
// around so tests can inspect the lowering as well as the verdicts.
struct VFix {
  NameSupply names;
  Lia lia{names};
  Program prog;
  Program low;
  std::vector<MethodVerdict> verdicts;

  explicit VFix(const std::string& src, bool enable_sub = false, int fuel = 3) {
    prog = parse_program(src, "t.sv", names);
    inject_builtins(prog, names, enable_sub);
    ResolveOptions ro{enable_sub};
    resolve(prog, ro);
    low = lower_for_verification(prog, names, ro);
    VerifyOptions vo;
    vo.fuel = fuel;
    verdicts = verify_program(low, lia, names, vo);
  }

  const MethodVerdict* find(const std::string& name) const {
    for (const MethodVerdict& v : verdicts)
      if (v.name == name) return &v;
    return nullptr;
  }
  const MethodVerdict* by_owner(const std::string& owner) const {
    for (const MethodVerdict& v : verdicts)
      if (v.owner == owner) return &v;
    return nullptr;
  }
};

void find_calls(const ExprPtr& e, const std::string& callee,
                std::vector<ExprPtr>& out) {
  if (!e) return;
  if (e->kind == Expr::Kind::call && e->name == callee) out.push_back(e);
  find_calls(e->a, callee, out);
  find_calls(e->b, callee, out);
  for (const ExprPtr& a : e->args) find_calls(a, callee, out);
}

void find_calls(const Block& b, const std::string& callee,
                std::vector<ExprPtr>& out) {
  for (const StmtPtr& s : b) {
    find_calls(s->expr, callee, out);
    find_calls(s->lhs, callee, out);
    find_calls(s->then_body, callee, out);
    find_calls(s->else_body, callee, out);
    find_calls(s->body, callee, out);
  }
}

const std::string kEx1 = R"(int ex1(int n)
  requires n >= 0
  ensures res = n + 1;
{
  return n + 1;
}
)";

const std::string kEx2 = R"(int ex2(int n)
  requires 0 <= n + 1 < inf
  ensures res = n + 1;
{
  return n + 1;
}
)";

const std::string kEx3 = R"(int ex3(int n)
  requires n >= 0 & n + 1 <= inf
  ensures res = n + 1;
  requires n >= 1 & n + 1 > inf
  ensures_err true;
{
  return n + 1;
}
)";

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
)";

const std::string kSortedLL = R"(data node {
  int val;
  node next;
}

pred sortll<root, mn> ==
  root = null & mn = inf
  | exists q, mr: root::node<mn, q> * q::sortll<mr> & mn < mr;

node empty_sorted()
  requires true
  ensures res::sortll<m> & m = inf;
{
  return null;
}

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

TEST_CASE("lowering instruments arithmetic as builtin calls") {
  VFix fx(kEx4);
  const Method* m = fx.low.find_method("sum_all");
  REQUIRE(m);
  REQUIRE(m->body);
  std::vector<ExprPtr> adds;
  find_calls(*m->body, "add", adds);
  REQUIRE(adds.size() == 1);
  CHECK(adds[0]->op_text == "x.val + sum_all(x.next)");
  CHECK(adds[0]->op_span.line == 18);
  for (const ExprPtr& a : adds[0]->args)
    CHECK(a->kind == Expr::Kind::var);  // operands are lowering temps

  // The original program keeps its plain arithmetic.
  std::vector<ExprPtr> orig;
  find_calls(*fx.prog.find_method("sum_all")->body, "add", orig);
  CHECK(orig.empty());
}

TEST_CASE("loops become synthetic tail-recursive methods") {
  VFix fx(kCountUp);
  const Method* loop = nullptr;
  for (const Method& m : fx.low.methods)
    if (m.synthetic) loop = &m;
  REQUIRE(loop);
  CHECK(loop->owner == "count_up");
  CHECK(loop->name.rfind("count_up.loop@", 0) == 0);
  REQUIRE(loop->params.size() == 2);
  CHECK(loop->params[0].name == "i");
  CHECK(loop->params[0].by_ref);
  CHECK(loop->params[1].name == "n");
  CHECK_FALSE(loop->params[1].by_ref);
  REQUIRE(loop->specs.size() == 1);
}

TEST_CASE("settle expands predicates with known root nullness") {
  VFix fx(kEx4);
  const Method* m = fx.low.find_method("sum_all");
  REQUIRE(m);
  VerifyOptions vo;
  verify_detail::Exec ex{fx.low, fx.lia, fx.names, *m, vo};

  verify_detail::SymState st;
  st.heap = {HeapAtom{"x", "ll", {"s"}, true, {}}};
  st.latest["x"] = t_var("x");

  // Unknown nullness: nothing to expand.
  auto same = ex.settle(st);
  REQUIRE(same.size() == 1);
  CHECK(same[0].heap.size() == 1);

  // Known null: only the empty branch survives and pins the sum.
  verify_detail::SymState null_case = st;
  null_case.pure = p_eq(t_var("x"), t_int(0));
  auto base = ex.settle(null_case);
  REQUIRE(base.size() == 1);
  CHECK(base[0].heap.empty());
  CHECK(fx.lia.implies(base[0].pure, {}, p_eq(t_var("s"), t_int(0))));

  // Known non-null: the record and the tail instance appear.
  verify_detail::SymState cons_case = st;
  cons_case.pure = p_ne(t_var("x"), t_int(0));
  auto rec = ex.settle(cons_case);
  REQUIRE(rec.size() == 1);
  REQUIRE(rec[0].heap.size() == 2);
  CHECK_FALSE(rec[0].heap[0].is_pred);
  CHECK(rec[0].heap[1].is_pred);
}

TEST_CASE("unguarded increment is a may-overflow and fails") {
  VFix fx(kEx1);
  const MethodVerdict* v = fx.find("ex1");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::failed);
  CHECK_FALSE(v->has_err_contract);
  REQUIRE(v->findings.size() == 1);
  const Finding& f = v->findings[0];
  CHECK(f.severity == Severity::may_overflow);
  CHECK(f.span.line == 5);
  CHECK(f.span.col == 12);
  CHECK(f.op_text == "n + 1");
  CHECK(f.condition.find("inf") != std::string::npos);
}

TEST_CASE("bounded increment verifies") {
  VFix fx(kEx2);
  const MethodVerdict* v = fx.find("ex2");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::verified);
  CHECK(v->findings.empty());
}

TEST_CASE("declared-overflow pair discharges the guaranteed overflow") {
  VFix fx(kEx3);
  const MethodVerdict* v = fx.find("ex3");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::verified);
  CHECK(v->has_err_contract);
  CHECK(v->findings.empty());
}

TEST_CASE("guaranteed overflow without an error pair fails as must") {
  VFix fx(R"(int boom(int n)
  requires n >= 1 & n + 1 > inf
  ensures res = 0;
{
  return n + 1;
}
)");
  const MethodVerdict* v = fx.find("boom");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::failed);
  REQUIRE(v->findings.size() == 1);
  CHECK(v->findings[0].severity == Severity::must_overflow);
  CHECK(v->findings[0].span.line == 5);
  CHECK(v->findings[0].op_text == "n + 1");
}

TEST_CASE("list sum with both bounds verifies recursively") {
  VFix fx(kEx4);
  const MethodVerdict* v = fx.find("sum_all");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::verified);
  CHECK(v->findings.empty());
}

TEST_CASE("sorted list constructors verify") {
  VFix fx(kSortedLL);
  const MethodVerdict* e = fx.find("empty_sorted");
  const MethodVerdict* p = fx.find("push_min");
  REQUIRE(e);
  REQUIRE(p);
  CHECK(e->status == VerdictStatus::verified);
  CHECK(p->status == VerdictStatus::verified);
}

TEST_CASE("counting loop verifies through its synthetic method") {
  VFix fx(kCountUp);
  const MethodVerdict* owner = fx.find("count_up");
  const MethodVerdict* loop = fx.by_owner("count_up");
  REQUIRE(owner);
  REQUIRE(loop);
  CHECK(owner->status == VerdictStatus::verified);
  CHECK(loop->status == VerdictStatus::verified);
  CHECK(loop->name.rfind("count_up.loop@", 0) == 0);
  CHECK(owner->findings.empty());
  CHECK(loop->findings.empty());
}

TEST_CASE("doubling loop reports a may-overflow inside the loop body") {
  VFix fx(R"(int grow(int n)
  requires 1 <= n
  ensures true;
{
  int s = 1;
  while (s < n)
    requires 1 <= s
    ensures true;
  {
    s = s + s;
  }
  return s;
}
)");
  const MethodVerdict* owner = fx.find("grow");
  const MethodVerdict* loop = fx.by_owner("grow");
  REQUIRE(owner);
  REQUIRE(loop);
  CHECK(owner->status == VerdictStatus::verified);
  CHECK(loop->status == VerdictStatus::failed);
  REQUIRE(loop->findings.size() == 1);
  CHECK(loop->findings[0].severity == Severity::may_overflow);
  CHECK(loop->findings[0].span.line == 10);
  CHECK(loop->findings[0].op_text == "s + s");
}

TEST_CASE("bodiless methods are assumed") {
  VFix fx(R"(int magic(int n)
  requires true
  ensures res = n;
)");
  const MethodVerdict* v = fx.find("magic");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::assumed);
  CHECK(v->findings.empty());
}

TEST_CASE("second of two additions is the only flagged site") {
  VFix fx(R"(int mixed(int n)
  requires 0 <= n & n + 1 <= inf
  ensures true;
{
  int a = n + 1;
  int b = a + a;
  return b;
}
)");
  const MethodVerdict* v = fx.find("mixed");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::failed);
  REQUIRE(v->findings.size() == 1);
  CHECK(v->findings[0].severity == Severity::may_overflow);
  CHECK(v->findings[0].span.line == 6);
  CHECK(v->findings[0].op_text == "a + a");
}

TEST_CASE("error-only contract swallows its own overflow") {
  VFix fx(R"(int sink(int n)
  requires n < 0 & n + n < -inf
  ensures_err true;
{
  return n + n;
}
)");
  const MethodVerdict* v = fx.find("sink");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::verified);
  CHECK(v->has_err_contract);
  CHECK(v->findings.empty());
}

TEST_CASE("field swap against a record assertion verifies") {
  VFix fx(R"(data pair {
  int x;
  int y;
}

void swap(pair p)
  requires p::pair<a, b>
  ensures p::pair<b, a>;
{
  int t1 = p.x;
  int t2 = p.y;
  p.x = t2;
  p.y = t1;
}
)");
  const MethodVerdict* v = fx.find("swap");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::verified);
}

TEST_CASE("allocation and field access leave tolerated frame") {
  VFix fx(R"(data cell {
  int v;
}

int write_read(int k)
  requires true
  ensures res = k;
{
  cell c = new cell(0);
  c.v = k;
  return c.v;
}
)");
  const MethodVerdict* v = fx.find("write_read");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::verified);
}

TEST_CASE("dereferencing a possibly empty list fails") {
  VFix fx(R"(data node {
  int val;
  node next;
}

pred ll<root, sum> ==
  root = null & sum = 0
  | exists d, q, rest: root::node<d, q> * q::ll<rest>
      & sum = d + rest & -inf < sum & sum < inf;

int head(node x)
  requires x::ll<s>
  ensures true;
{
  return x.val;
}
)");
  const MethodVerdict* v = fx.find("head");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::failed);
  REQUIRE_FALSE(v->findings.empty());
  CHECK(v->findings[0].severity == Severity::verification_failure);
  CHECK(v->reason.find("dereference") != std::string::npos);
}

TEST_CASE("unsigned addition uses the unsigned contract") {
  VFix fx(R"(uint uplus(uint a, uint b)
  requires a + b <= inf
  ensures res = a + b;
{
  return a + b;
}

uint uplus_raw(uint a, uint b)
  requires true
  ensures true;
{
  return a + b;
}
)");
  const MethodVerdict* ok = fx.find("uplus");
  const MethodVerdict* raw = fx.find("uplus_raw");
  REQUIRE(ok);
  REQUIRE(raw);
  CHECK(ok->status == VerdictStatus::verified);
  CHECK(raw->status == VerdictStatus::failed);
  REQUIRE(raw->findings.size() == 1);
  CHECK(raw->findings[0].severity == Severity::may_overflow);
  CHECK(raw->findings[0].op_text == "a + b");
}

TEST_CASE("decrement via a negative literal addend verifies") {
  // Exercises the zero corner of the addition contract: 0 + (-1) must fall
  // in the safe region even though the lower-bound disjunct does not apply.
  VFix fx(R"(int dec(int n)
  requires -inf < n & 0 <= n
  ensures res = n - 1;
{
  int t = -1;
  return n + t;
}
)");
  const MethodVerdict* v = fx.find("dec");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::verified);
}

TEST_CASE("subtraction verifies when enabled") {
  VFix fx(R"(int dec2(int n)
  requires -inf < n & 0 <= n
  ensures res = n - 1;
{
  return n - 1;
}
)",
           /*enable_sub=*/true);
  const MethodVerdict* v = fx.find("dec2");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::verified);
}

TEST_CASE("call chain threads contracts through temporaries") {
  VFix fx(R"(int bump(int n)
  requires -inf < n + 1 & n + 1 <= inf
  ensures res = n + 1;
{
  return n + 1;
}

int bump_twice(int n)
  requires -inf < n & n + 2 <= inf
  ensures res = n + 2;
{
  return bump(bump(n));
}
)");
  const MethodVerdict* b = fx.find("bump");
  const MethodVerdict* bt = fx.find("bump_twice");
  REQUIRE(b);
  REQUIRE(bt);
  CHECK(b->status == VerdictStatus::verified);
  CHECK(bt->status == VerdictStatus::verified);
}

TEST_CASE("postcondition that does not follow fails without findings noise") {
  VFix fx(R"(int wrong(int n)
  requires 0 <= n & n + 1 <= inf
  ensures res = n + 2;
{
  return n + 1;
}
)");
  const MethodVerdict* v = fx.find("wrong");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::failed);
  CHECK(v->reason == "cannot establish the postcondition");
  REQUIRE(v->findings.size() == 1);
  CHECK(v->findings[0].severity == Severity::verification_failure);
}

TEST_CASE("max postcondition covers both branches") {
  VFix fx(R"(int max2(int a, int b)
  requires true
  ensures res = max(a, b);
{
  if (a < b) {
    return b;
  } else {
    return a;
  }
}
)");
  const MethodVerdict* v = fx.find("max2");
  REQUIRE(v);
  CHECK(v->status == VerdictStatus::verified);
}
