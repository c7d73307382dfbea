// Release gate. Each numbered check prints one PASS/FAIL line with its
// runtime against the stated budget; the binary exits nonzero if any check
// fails. Check 7 is informational: the full-scale benchmark comparison needs
// corpora and tooling that do not exist in this repository.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sentinel/diff.hpp"
#include "sentinel/interp.hpp"
#include "sentinel/lia.hpp"
#include "sentinel/lower.hpp"
#include "sentinel/parser.hpp"
#include "sentinel/pure.hpp"
#include "sentinel/resolve.hpp"
#include "sentinel/verify.hpp"
#include "support/agreement.hpp"
#include "support/generators.hpp"

using namespace sentinel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome ok(std::string d) { return {true, std::move(d)}; }
Outcome bad(std::string d) { return {false, std::move(d)}; }

struct CmdResult {
  int code = -1;
  std::string out;
};

CmdResult run_cmd(const std::string& cmd) {
  CmdResult r;
  FILE* p = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  if (WIFEXITED(st)) r.code = WEXITSTATUS(st);
  return r;
}

int count_of(const std::string& hay, const std::string& needle) {
  int c = 0;
  for (std::size_t at = hay.find(needle); at != std::string::npos;
       at = hay.find(needle, at + needle.size()))
    ++c;
  return c;
}

// -----------------------------------------------------------------------
// 1. The construction-time rewrite table, all 26 rules checked exactly.

Outcome check_rule_table() {
  const TermPtr v = t_var("v");
  const TermPtr pinf = t_inf(1);
  const TermPtr ninf = t_inf(-1);
  const TermPtr k = t_int(4);

  struct TruthRule {
    const char* label;
    Lit in;
    bool want;
  };
  const std::vector<TruthRule> truths = {
      // both sides extended constants
      {"inf = inf", Lit{true, Cmp::eq, pinf, pinf}, true},
      {"inf != inf", Lit{false, Cmp::eq, pinf, pinf}, false},
      {"inf <= inf", Lit{true, Cmp::le, pinf, pinf}, true},
      {"inf = -inf", Lit{true, Cmp::eq, pinf, ninf}, false},
      {"inf != -inf", Lit{false, Cmp::eq, pinf, ninf}, true},
      {"inf <= -inf", Lit{true, Cmp::le, pinf, ninf}, false},
      {"-inf = -inf", Lit{true, Cmp::eq, ninf, ninf}, true},
      {"-inf != -inf", Lit{false, Cmp::eq, ninf, ninf}, false},
      {"-inf <= -inf", Lit{true, Cmp::le, ninf, ninf}, true},
      {"-inf <= inf", Lit{true, Cmp::le, ninf, pinf}, true},
      // finite constant against an extended constant
      {"k = inf", Lit{true, Cmp::eq, k, pinf}, false},
      {"k != inf", Lit{false, Cmp::eq, k, pinf}, true},
      {"k <= inf", Lit{true, Cmp::le, k, pinf}, true},
      {"inf <= k", Lit{true, Cmp::le, pinf, k}, false},
      {"k = -inf", Lit{true, Cmp::eq, k, ninf}, false},
      {"k != -inf", Lit{false, Cmp::eq, k, ninf}, true},
      {"k <= -inf", Lit{true, Cmp::le, k, ninf}, false},
      {"-inf <= k", Lit{true, Cmp::le, ninf, k}, true},
      // lone variable against an extended constant, truth side
      {"v <= inf", Lit{true, Cmp::le, v, pinf}, true},
      {"-inf <= v", Lit{true, Cmp::le, ninf, v}, true},
  };

  struct KeepRule {
    const char* label;
    Lit in;
    Lit want;
  };
  const std::vector<KeepRule> keeps = {
      {"inf <= v", Lit{true, Cmp::le, pinf, v}, Lit{true, Cmp::eq, v, pinf}},
      {"v <= -inf", Lit{true, Cmp::le, v, ninf}, Lit{true, Cmp::eq, v, ninf}},
  };

  int hit = 0;
  for (const TruthRule& r : truths) {
    LitStep st = rewrite_lit(r.in);
    if (st.kind != LitStep::Kind::truth || st.value != r.want)
      return bad(std::string("rule '") + r.label + "' did not fold");
    ++hit;
  }
  for (const KeepRule& r : keeps) {
    LitStep st = rewrite_lit(r.in);
    if (st.kind != LitStep::Kind::keep || !lit_eq(st.lit, r.want))
      return bad(std::string("rule '") + r.label + "' did not rewrite");
    ++hit;
  }

  // min/max absorption against the extended constants fires at construction
  const TermPtr a = t_add(v, t_int(1));
  struct MmRule {
    const char* label;
    TermPtr got;
    const TermPtr& want;
  };
  const std::vector<MmRule> mm = {
      {"min(a, inf)", t_min(a, pinf), a},
      {"max(a, inf)", t_max(a, pinf), pinf},
      {"min(a, -inf)", t_min(a, ninf), ninf},
      {"max(a, -inf)", t_max(a, ninf), a},
  };
  for (const MmRule& r : mm) {
    if (!term_eq(r.got, r.want))
      return bad(std::string("rule '") + r.label + "' did not absorb");
    ++hit;
  }

  if (hit != 26) return bad("expected 26 rules, checked " + std::to_string(hit));
  return ok("26/26 rules fold or rewrite exactly");
}

// -----------------------------------------------------------------------
// 2./3. Solver-vs-enumeration property suites at release sample counts.

Outcome check_extended_suite(int n) {
  tsup::Rng rng(0xacce9702);
  int skipped = 0;
  std::string first = tsup::run_agreement(
      rng, n, &skipped, [](tsup::Rng& r) { return tsup::gen_extended(r); },
      [](NameSupply& nm, const tsup::ExtendedSample& s) {
        return tsup::check_extended(nm, s);
      });
  if (!first.empty()) return bad(first);
  return ok(std::to_string(n) + " samples agree (" + std::to_string(skipped) +
            " indeterminate regenerated)");
}

Outcome check_finite_suite(int n) {
  tsup::Rng rng(0xacce9703);
  int skipped = 0;
  std::string first = tsup::run_agreement(
      rng, n, &skipped, [](tsup::Rng& r) { return tsup::gen_finite(r); },
      [](NameSupply& nm, const tsup::FiniteSample& s) {
        return tsup::check_finite(nm, s);
      });
  if (!first.empty()) return bad(first);
  return ok(std::to_string(n) + " samples agree, all witnesses re-evaluate (" +
            std::to_string(skipped) + " over budget regenerated)");
}

// -----------------------------------------------------------------------
// 4. Scripted end-to-end runs of the installed binary.

Outcome check_cli_runs() {
  const std::string bin = SENTINEL_BIN;
  const std::string dir = std::string(SAMPLES_DIR) + "/walkthrough/";

  CmdResult r = run_cmd(bin + " " + dir + "ex1.sv");
  if (r.code != 1) return bad("ex1: expected exit 1, got " + std::to_string(r.code));
  if (count_of(r.out, "may-overflow") != 1)
    return bad("ex1: expected exactly one may-overflow finding");
  if (count_of(r.out, "ex1.sv:5:12: may-overflow: n + 1") != 1)
    return bad("ex1: finding not at the addition (5:12)");

  r = run_cmd(bin + " " + dir + "ex2.sv");
  if (r.code != 0) return bad("ex2: expected exit 0, got " + std::to_string(r.code));
  if (count_of(r.out, "Verified: ex2") != 1) return bad("ex2: not verified");

  r = run_cmd(bin + " " + dir + "ex3.sv");
  if (r.code != 0) return bad("ex3: expected exit 0, got " + std::to_string(r.code));
  if (count_of(r.out, "Verified: ex3 (error contract)") != 1)
    return bad("ex3: error-contract branch not surfaced");

  r = run_cmd(bin + " --max-unfold 3 " + dir + "ex4.sv");
  if (r.code != 0) return bad("ex4: expected exit 0, got " + std::to_string(r.code));
  if (count_of(r.out, "Verified: sum_all") != 1) return bad("ex4: not verified");

  r = run_cmd(bin + " " + dir + "sortedll.sv");
  if (r.code != 0)
    return bad("sortedll: expected exit 0, got " + std::to_string(r.code));
  if (count_of(r.out, "Verified: empty_sorted") != 1)
    return bad("sortedll: empty base case not verified");
  if (count_of(r.out, "Verified: push_min") != 1)
    return bad("sortedll: push_min not verified");

  return ok("5 runs: exit codes and diagnostics as scripted");
}

// -----------------------------------------------------------------------
// 5. Injected add/uadd contracts vs. exhaustive 4-bit ground truth.

Outcome check_builtin_fidelity() {
  NameSupply names;
  Program prog = parse_program("", "<none>", names);
  inject_builtins(prog, names, true);
  resolve(prog, ResolveOptions{true});
  ConcreteHeap empty;

  auto pairs_of = [&](const std::string& name)
      -> std::pair<const SepFormula*, const SepFormula*> {
    const Method* m = prog.find_method(name);
    const SepFormula* err = nullptr;
    const SepFormula* safe = nullptr;
    if (m)
      for (const SpecPair& sp : m->specs) (sp.is_err ? err : safe) = &sp.requires_;
    return {err, safe};
  };

  int checked = 0;
  auto sweep = [&](const std::string& name, bool uns, long long lo,
                   long long hi) -> std::optional<std::string> {
    auto [err, safe] = pairs_of(name);
    if (!err || !safe) return name + ": missing spec pair";
    SpecEval se{prog, empty, 4, uns};
    for (long long k1 = lo; k1 <= hi; ++k1)
      for (long long k2 = lo; k2 <= hi; ++k2) {
        NumEnv env{{"k1", k1}, {"k2", k2}};
        bool e = se.satisfies(*err, env);
        bool s = se.satisfies(*safe, env);
        bool wraps = wrap_to_width(k1 + k2, 4, uns) != k1 + k2;
        if (e == s)
          return name + "(" + std::to_string(k1) + ", " + std::to_string(k2) +
                 "): guards not a partition";
        if (e != wraps)
          return name + "(" + std::to_string(k1) + ", " + std::to_string(k2) +
                 "): guard disagrees with ground truth";
        ++checked;
      }
    return std::nullopt;
  };

  if (auto e = sweep("add", false, -8, 7)) return bad(*e);
  if (auto e = sweep("uadd", true, 0, 15)) return bad(*e);
  if (checked != 512)
    return bad("expected 512 operand pairs, checked " + std::to_string(checked));
  return ok("512/512 operand pairs: guard choice matches wrapping exactly");
}

// -----------------------------------------------------------------------
// 6. Differential check over the sample corpus at widths 4 and 8.

struct CorpusTotals {
  int files = 0;
  int planted = 0;
  int planted_evented = 0;
  int clean = 0;
  long long misses = 0;
  long long alarms = 0;
};

Outcome check_corpus_diff() {
  std::vector<fs::path> files;
  for (const char* sub : {"/walkthrough", "/corpus/clean", "/corpus/overflow"})
    for (const auto& e : fs::directory_iterator(std::string(SAMPLES_DIR) + sub))
      if (e.path().extension() == ".sv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.size() < 20)
    return bad("corpus too small: " + std::to_string(files.size()) + " files");

  std::string note;
  for (int width : {4, 8}) {
    CorpusTotals t;
    for (const fs::path& f : files) {
      std::ifstream in(f);
      std::stringstream ss;
      ss << in.rdbuf();

      NameSupply names;
      Program prog;
      std::vector<MethodVerdict> verdicts;
      try {
        prog = parse_program(ss.str(), f.string(), names);
        inject_builtins(prog, names);
        resolve(prog, {});
        Program lowered = lower_for_verification(prog, names, {});
        Lia lia(names);
        verdicts = verify_program(lowered, lia, names, {});
      } catch (const std::exception& e) {
        return bad(f.filename().string() + ": pipeline threw: " + e.what());
      }

      DiffOptions opt;
      opt.width = width;
      DiffReport rep = diff_program(prog, verdicts, opt);
      ++t.files;
      t.misses += rep.total_misses();
      t.alarms += rep.total_alarms();

      bool evented = false;
      for (const MethodDiff& md : rep.methods) {
        if (md.skipped)
          return bad(f.filename().string() + ": " + md.name + " skipped (" +
                     md.skip_reason + ")");
        if (md.events_seen > 0) evented = true;
      }
      std::string parent = f.parent_path().filename().string();
      if (parent == "overflow") {
        ++t.planted;
        if (evented) ++t.planted_evented;
      } else if (parent == "clean") {
        ++t.clean;
      }
    }

    if (t.planted < 10 || t.clean < 10)
      return bad("need 10 planted and 10 clean programs, have " +
                 std::to_string(t.planted) + "/" + std::to_string(t.clean));
    if (t.planted_evented != t.planted)
      return bad("a planted overflow never fired at width " +
                 std::to_string(width));
    if (t.misses != 0)
      return bad(std::to_string(t.misses) + " false negatives at width " +
                 std::to_string(width));
    if (t.alarms > 1)
      return bad(std::to_string(t.alarms) + " false positives at width " +
                 std::to_string(width));
    note += "w" + std::to_string(width) + ": " + std::to_string(t.files) +
            " files, " + std::to_string(t.misses) + " missed / " +
            std::to_string(t.alarms) + " spurious; ";
  }
  return ok(note + "10 planted + 10 clean");
}

struct Check {
  int id;
  const char* label;
  long long budget_ms;
  Outcome (*fn)();
};

Outcome run_extended() { return check_extended_suite(10000); }
Outcome run_finite() { return check_finite_suite(10000); }

}  // namespace

int main() {
  const std::vector<Check> checks = {
      {1, "rewrite rule table", 1000, check_rule_table},
      {2, "extended-model satisfiability agreement", 120000, run_extended},
      {3, "finite solver vs brute force", 120000, run_finite},
      {4, "scripted verifier runs", 10000, check_cli_runs},
      {5, "builtin contract fidelity at width 4", 5000, check_builtin_fidelity},
      {6, "differential oracle over the corpus", 60000, check_corpus_diff},
  };

  bool all = true;
  for (const Check& c : checks) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& e) {
      out = bad(std::string("unhandled: ") + e.what());
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    if (ms > c.budget_ms) {
      out.pass = false;
      out.detail += " [over budget]";
    }
    all = all && out.pass;
    std::printf("%s  %d  %s: %s  [%lld ms / %lld ms]\n",
                out.pass ? "PASS" : "FAIL", c.id, c.label, out.detail.c_str(),
                static_cast<long long>(ms), c.budget_ms);
    std::fflush(stdout);
  }

  std::printf(
      "N/A   7  full-scale benchmark comparison: not reproducible here; the "
      "original evaluation ran against external benchmark suites and a "
      "baseline system this repository does not ship, so coverage is "
      "delegated to checks 2, 3, 5, and 6\n");

  return all ? 0 : 1;
}
