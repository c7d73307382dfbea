#pragma once

#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "sentinel/diff.hpp"
#include "sentinel/verify.hpp"

namespace sentinel {

// Plain-text and jsonl rendering of verdicts, findings, and oracle reports.
// Everything here is deterministic: same inputs, same bytes.

inline std::string render_finding_text(const std::string& path,
                                       const Finding& f) {
  std::ostringstream os;
  os << path << ":" << f.span.line << ":" << f.span.col << ": "
     << severity_str(f.severity) << ": ";
  if (f.severity == Severity::verification_failure)
    os << f.condition;
  else
    os << f.op_text << ": overflow condition: " << f.condition;
  return os.str();
}

inline std::string render_finding_json(const std::string& path,
                                       const Finding& f) {
  nlohmann::ordered_json j;
  j["path"] = path;
  j["line"] = f.span.line;
  j["col"] = f.span.col;
  j["severity"] = severity_str(f.severity);
  j["operation"] = f.op_text;
  j["condition"] = f.condition;
  return j.dump();
}

inline std::string render_verdict(const MethodVerdict& v) {
  std::ostringstream os;
  switch (v.status) {
    case VerdictStatus::verified:
      os << "Verified: " << v.name;
      if (v.has_err_contract) os << " (error contract)";
      break;
    case VerdictStatus::failed:
      os << "Failed: " << v.name << ": " << v.reason;
      break;
    case VerdictStatus::assumed:
      os << "Assumed: " << v.name << " (no body)";
      break;
  }
  return os.str();
}

inline std::string render_summary(const std::vector<MethodVerdict>& vs) {
  int verified = 0, failed = 0, assumed = 0;
  long long findings = 0;
  for (const MethodVerdict& v : vs) {
    if (v.status == VerdictStatus::verified) ++verified;
    if (v.status == VerdictStatus::failed) ++failed;
    if (v.status == VerdictStatus::assumed) ++assumed;
    findings += static_cast<long long>(v.findings.size());
  }
  std::ostringstream os;
  os << verified << " verified, " << failed << " failed, ";
  if (assumed) os << assumed << " assumed, ";
  os << findings << (findings == 1 ? " finding" : " findings");
  return os.str();
}

inline std::string render_method_diff(const MethodDiff& d) {
  std::ostringstream os;
  os << "oracle: " << d.name << ": ";
  if (d.skipped) {
    os << "skipped (" << d.skip_reason << ")";
    return os.str();
  }
  os << "admitted " << d.inputs_admitted << "/" << d.inputs_tried
     << ", events " << d.events_seen << ", misses " << d.misses.size()
     << ", alarms " << d.alarms.size();
  if (d.partial) os << " (partial)";
  return os.str();
}

inline std::string render_diff_report(const std::string& path,
                                      const DiffReport& rep) {
  std::ostringstream os;
  for (const MethodDiff& d : rep.methods) {
    os << render_method_diff(d) << "\n";
    for (const Miss& ms : d.misses)
      os << path << ":" << ms.span.line << ":" << ms.span.col << ": miss: '"
         << ms.op_text << "' wrapped on " << ms.input
         << " with no finding\n";
    for (const Alarm& al : d.alarms)
      os << path << ":" << al.finding.span.line << ":" << al.finding.span.col
         << ": alarm: '" << al.finding.op_text << "' never wrapped\n";
  }
  os << "oracle summary: " << rep.total_misses() << " misses, "
     << rep.total_alarms() << " alarms at width " << rep.width << "\n";
  return os.str();
}

}  // namespace sentinel
