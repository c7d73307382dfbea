#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sentinel/interp.hpp"
#include "sentinel/verify.hpp"

namespace sentinel {

// Differential check: enumerate machine inputs admitted by a method's specs,
// run them concretely, and compare the overflow events that occur against
// the findings the verifier reported for that method. An event with no
// finding at its site is a miss unless an error contract admits the input;
// a finding whose site never produces an event is an alarm.

struct DiffOptions {
  int width = 8;
  int enum_bound = 2;        // longest list shape per reference argument
  long long max_inputs = 8192;  // per-method cap on enumerated inputs
  int run_budget = 10000;
};

struct Miss {
  Span span;
  std::string op_text;
  std::string input;  // first admitted input that hit the site
};

struct Alarm {
  Finding finding;
};

struct MethodDiff {
  std::string name;
  bool skipped = false;
  std::string skip_reason;
  bool partial = false;  // enumeration stopped at the input cap
  long long inputs_tried = 0;
  long long inputs_admitted = 0;
  long long events_seen = 0;
  std::vector<Miss> misses;
  std::vector<Alarm> alarms;
};

struct DiffReport {
  int width = 0;
  std::vector<MethodDiff> methods;

  long long total_misses() const {
    long long n = 0;
    for (const MethodDiff& m : methods) n += static_cast<long long>(m.misses.size());
    return n;
  }
  long long total_alarms() const {
    long long n = 0;
    for (const MethodDiff& m : methods) n += static_cast<long long>(m.alarms.size());
    return n;
  }
  bool clean() const { return total_misses() == 0 && total_alarms() == 0; }
};

namespace diff_detail {

inline std::vector<long long> range(long long lo, long long hi) {
  std::vector<long long> out;
  for (long long v = lo; v <= hi; ++v) out.push_back(v);
  return out;
}

// Scalar parameter values: the full range when it is small, otherwise the
// bands around the extremes and zero where wrapping behavior lives.
inline std::vector<long long> scalar_domain(TyKind k, int width) {
  if (k == TyKind::bool_) return {0, 1};
  if (k == TyKind::uint_) {
    long long top = (1LL << width) - 1;
    if (width <= 6) return range(0, top);
    long long mid = 1LL << (width - 1);
    std::vector<long long> out = range(0, 15);
    for (long long v : range(mid - 8, mid + 7)) out.push_back(v);
    for (long long v : range(top - 15, top)) out.push_back(v);
    return out;
  }
  long long hi = (1LL << (width - 1)) - 1;
  long long lo = -(1LL << (width - 1));
  if (width <= 6) return range(lo, hi);
  std::vector<long long> out = range(lo, lo + 15);
  for (long long v : range(-8, 7)) out.push_back(v);
  for (long long v : range(hi - 15, hi)) out.push_back(v);
  return out;
}

// Heap cell values: kept smaller, since they multiply per node and field.
inline std::vector<long long> elem_domain(TyKind k, int width) {
  if (k == TyKind::bool_) return {0, 1};
  if (k == TyKind::uint_) {
    long long top = (1LL << width) - 1;
    if (width <= 6) return range(0, top);
    long long mid = 1LL << (width - 1);
    return {0, 1, 2, 3, mid - 1, mid, top - 1, top};
  }
  long long hi = (1LL << (width - 1)) - 1;
  long long lo = -(1LL << (width - 1));
  if (width <= 6) return range(lo, hi);
  return {lo, lo + 1, lo / 2, -2, -1, 0, 1, 2, hi / 2, hi / 2 + 1, hi - 1, hi};
}

enum class DataShape { record, list, other };

inline DataShape shape_of(const DataDecl& dd) {
  int self_refs = 0;
  int scalars = 0;
  for (const DataDecl::Field& f : dd.fields) {
    if (f.type.kind == TyKind::ref_) {
      if (f.type.cls != dd.name) return DataShape::other;
      ++self_refs;
    } else if (f.type.is_scalar() && f.type.kind != TyKind::float_) {
      ++scalars;
    } else {
      return DataShape::other;
    }
  }
  if (self_refs > 1) return DataShape::other;
  if (self_refs == 1) return scalars == 1 ? DataShape::list : DataShape::other;
  return DataShape::record;
}

struct RefChoice {
  std::string data;
  bool is_list = false;
  bool is_null = false;
  std::vector<long long> vals;  // list: elements front to back; record: fields
};

struct ParamGen {
  bool is_ref = false;
  std::vector<long long> scalars;
  std::vector<RefChoice> refs;
  std::size_t size() const { return is_ref ? refs.size() : scalars.size(); }
};

inline void product_into(const std::vector<std::vector<long long>>& domains,
                         std::vector<std::vector<long long>>& out) {
  std::vector<long long> cur(domains.size());
  std::vector<std::size_t> idx(domains.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < domains.size(); ++i) cur[i] = domains[i][idx[i]];
    out.push_back(cur);
    std::size_t i = domains.size();
    while (i > 0 && ++idx[i - 1] == domains[i - 1].size()) idx[--i] = 0;
    if (i == 0) break;
  }
}

inline bool make_gen(const Program& prog, const Method::Param& p, int width,
                     int enum_bound, ParamGen& g) {
  if (p.type.is_scalar()) {
    if (p.type.kind == TyKind::float_) return false;
    g.is_ref = false;
    g.scalars = scalar_domain(p.type.kind, width);
    return true;
  }
  const DataDecl* dd = prog.find_data(p.type.cls);
  if (!dd) return false;
  g.is_ref = true;
  DataShape sh = shape_of(*dd);
  if (sh == DataShape::other) return false;
  if (sh == DataShape::list) {
    TyKind ek = TyKind::int_;
    for (const DataDecl::Field& f : dd->fields)
      if (f.type.kind != TyKind::ref_) ek = f.type.kind;
    std::vector<long long> ed = elem_domain(ek, width);
    for (int len = 0; len <= enum_bound; ++len) {
      if (len == 0) {
        g.refs.push_back({dd->name, true, false, {}});
        continue;
      }
      std::vector<std::vector<long long>> tuples;
      product_into(std::vector<std::vector<long long>>(
                       static_cast<std::size_t>(len), ed),
                   tuples);
      for (std::vector<long long>& t : tuples)
        g.refs.push_back({dd->name, true, false, std::move(t)});
    }
    return true;
  }
  g.refs.push_back({dd->name, false, true, {}});
  if (dd->fields.empty()) {
    g.refs.push_back({dd->name, false, false, {}});
    return true;
  }
  std::vector<std::vector<long long>> doms;
  for (const DataDecl::Field& f : dd->fields) doms.push_back(elem_domain(f.type.kind, width));
  std::vector<std::vector<long long>> tuples;
  product_into(doms, tuples);
  for (std::vector<long long>& t : tuples)
    g.refs.push_back({dd->name, false, false, std::move(t)});
  return true;
}

inline long long build_ref(const Program& prog, ConcreteHeap& h,
                           const RefChoice& rc) {
  if (rc.is_null) return 0;
  const DataDecl* dd = prog.find_data(rc.data);
  if (!rc.is_list) return h.alloc(rc.data, rc.vals);
  int self = -1, scalar = -1;
  for (std::size_t i = 0; i < dd->fields.size(); ++i) {
    if (dd->fields[i].type.kind == TyKind::ref_) self = static_cast<int>(i);
    else scalar = static_cast<int>(i);
  }
  long long tail = 0;
  for (auto it = rc.vals.rbegin(); it != rc.vals.rend(); ++it) {
    std::vector<long long> fs(dd->fields.size(), 0);
    fs[static_cast<std::size_t>(scalar)] = *it;
    fs[static_cast<std::size_t>(self)] = tail;
    tail = h.alloc(rc.data, fs);
  }
  return tail;
}

inline std::string show_ref(const RefChoice& rc) {
  if (rc.is_null) return "null";
  std::ostringstream os;
  os << (rc.is_list ? "[" : rc.data + "(");
  for (std::size_t i = 0; i < rc.vals.size(); ++i) {
    if (i) os << ", ";
    os << rc.vals[i];
  }
  os << (rc.is_list ? "]" : ")");
  return os.str();
}

}  // namespace diff_detail

inline MethodDiff diff_method(const Program& prog, const Method& m,
                              const std::vector<Finding>& findings,
                              const DiffOptions& opt) {
  using namespace diff_detail;
  MethodDiff md;
  md.name = m.name;

  std::vector<ParamGen> gens(m.params.size());
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    if (!make_gen(prog, m.params[i], opt.width, opt.enum_bound, gens[i])) {
      md.skipped = true;
      md.skip_reason = "parameter '" + m.params[i].name + "' is not enumerable";
      return md;
    }
  }

  // the unsigned reading of inf applies only to all-uint scalar signatures
  bool has_scalar = false;
  bool uns = true;
  for (const Method::Param& p : m.params) {
    if (!p.type.is_scalar()) continue;
    has_scalar = true;
    if (p.type.kind != TyKind::uint_) uns = false;
  }
  if (!has_scalar) uns = false;

  std::set<std::pair<int, int>> finding_sites;
  for (const Finding& f : findings)
    finding_sites.insert({f.span.line, f.span.col});
  std::set<std::pair<int, int>> event_sites;
  std::map<std::pair<int, int>, Miss> miss_by_site;

  std::vector<std::size_t> idx(gens.size(), 0);
  while (true) {
    if (md.inputs_tried >= opt.max_inputs) {
      md.partial = true;
      break;
    }
    ++md.inputs_tried;

    Machine mach(prog, opt.width);
    mach.budget = opt.run_budget;
    NumEnv env;
    std::vector<long long> args;
    std::ostringstream desc;
    desc << m.name << "(";
    for (std::size_t i = 0; i < gens.size(); ++i) {
      long long v;
      if (gens[i].is_ref) {
        const RefChoice& rc = gens[i].refs[idx[i]];
        v = build_ref(prog, mach.heap, rc);
        desc << (i ? ", " : "") << show_ref(rc);
      } else {
        v = gens[i].scalars[idx[i]];
        desc << (i ? ", " : "") << v;
      }
      args.push_back(v);
      env[m.params[i].name] = v;
    }
    desc << ")";

    SpecEval se{prog, mach.heap, opt.width, uns};
    bool admitted = false;
    bool err_admits = false;
    for (const SpecPair& sp : m.specs) {
      if (se.satisfies(sp.requires_, env)) {
        admitted = true;
        if (sp.is_err) err_admits = true;
      }
    }
    if (admitted) {
      ++md.inputs_admitted;
      RunResult rr = mach.run(m.name, args);
      for (const OverflowEvent& e : rr.events) {
        if (e.frame != m.name) continue;
        ++md.events_seen;
        std::pair<int, int> site{e.span.line, e.span.col};
        event_sites.insert(site);
        if (!finding_sites.count(site) && !err_admits &&
            !miss_by_site.count(site))
          miss_by_site[site] = {e.span, e.op_text, desc.str()};
      }
    }

    std::size_t i = gens.size();
    while (i > 0 && ++idx[i - 1] == gens[i - 1].size()) idx[--i] = 0;
    if (i == 0) break;
  }

  for (auto& [site, miss] : miss_by_site) md.misses.push_back(miss);
  for (const Finding& f : findings)
    if (!event_sites.count({f.span.line, f.span.col}))
      md.alarms.push_back({f});
  return md;
}

// Runs the comparison for every user method that the verifier judged. The
// verdicts come from the lowered program; findings of loop helpers are
// charged to the method the loop was lifted from, which is where the
// operations execute concretely.
inline DiffReport diff_program(const Program& prog,
                               const std::vector<MethodVerdict>& verdicts,
                               const DiffOptions& opt = {}) {
  DiffReport rep;
  rep.width = opt.width;
  for (const Method& m : prog.methods) {
    if (m.builtin || m.synthetic || !m.body || m.specs.empty()) continue;
    std::vector<Finding> findings;
    for (const MethodVerdict& v : verdicts) {
      if (v.name != m.name && v.owner != m.name) continue;
      for (const Finding& f : v.findings)
        if (f.severity != Severity::verification_failure) findings.push_back(f);
    }
    rep.methods.push_back(diff_method(prog, m, findings, opt));
  }
  return rep;
}

}  // namespace sentinel
