#pragma once

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sentinel/diff.hpp"
#include "sentinel/lower.hpp"
#include "sentinel/parser.hpp"
#include "sentinel/report.hpp"
#include "sentinel/resolve.hpp"

namespace sentinel {

// Command-line driver. Each input file is an independent program; the exit
// code is the worst outcome across files:
//   3  the file does not parse or resolve
//   2  the verifier hit an internal limit
//   1  findings were reported or a method failed to verify
//   0  everything verified

struct CliConfig {
  std::string mode = "verify";
  int fuel = 3;
  int oracle_width = 8;
  int enum_bound = 2;
  std::string format = "text";
  std::string dump_path;
  bool trace_entail = false;
  bool enable_sub = false;
  std::vector<std::string> files;
};

namespace cli_detail {

inline int process_file(const CliConfig& cfg, const std::string& path,
                        NameSupply& names, std::ostream& out) {
  std::ifstream in(path);
  if (!in) {
    out << path << ": error: cannot open file\n";
    return 3;
  }
  std::ostringstream buf;
  buf << in.rdbuf();

  try {
    Program prog = parse_program(buf.str(), path, names);
    inject_builtins(prog, names, cfg.enable_sub);
    ResolveOptions ro{cfg.enable_sub};
    resolve(prog, ro);
    Program low = lower_for_verification(prog, names, ro);

    Lia lia{names};
    std::ofstream dump_file;
    std::ostream* sink = nullptr;
    if (!cfg.dump_path.empty()) {
      dump_file.open(cfg.dump_path, std::ios::app);
      sink = &dump_file;
    } else if (cfg.mode == "dump-constraints") {
      sink = &out;
    }
    if (sink) {
      std::ostream* s = sink;
      lia.set_log([s](const std::string& kind, const std::string& before,
                      const std::string& after) {
        *s << "[" << kind << "] " << before << "\n  -> " << after << "\n";
      });
    }

    VerifyOptions vo;
    vo.fuel = cfg.fuel;
    if (cfg.trace_entail) vo.trace = &std::cerr;
    std::vector<MethodVerdict> verdicts = verify_program(low, lia, names, vo);

    if (cfg.mode == "oracle") {
      DiffOptions dopt;
      dopt.width = cfg.oracle_width;
      dopt.enum_bound = cfg.enum_bound;
      DiffReport rep = diff_program(prog, verdicts, dopt);
      out << render_diff_report(path, rep);
      return rep.clean() ? 0 : 1;
    }

    bool jsonl = cfg.format == "jsonl";
    long long overflow_findings = 0;
    bool any_failed = false;
    bool any_findings = false;
    for (const MethodVerdict& v : verdicts) {
      if (v.status == VerdictStatus::failed) any_failed = true;
      for (const Finding& f : v.findings) {
        any_findings = true;
        bool is_overflow = f.severity != Severity::verification_failure;
        if (is_overflow) ++overflow_findings;
        if (cfg.mode == "check-overflow" && !is_overflow) continue;
        if (cfg.mode == "dump-constraints") continue;
        out << (jsonl ? render_finding_json(path, f)
                      : render_finding_text(path, f))
            << "\n";
      }
      if (cfg.mode == "verify" && !jsonl) out << render_verdict(v) << "\n";
    }
    if (cfg.mode == "verify" && !jsonl) out << render_summary(verdicts) << "\n";

    if (cfg.mode == "check-overflow") return overflow_findings ? 1 : 0;
    return (any_failed || any_findings) ? 1 : 0;
  } catch (const ParseError& e) {
    out << "error: " << e.what() << "\n";  // what() carries file:line:col
    return 3;
  } catch (const ResolveError& e) {
    out << "error: " << e.what() << "\n";
    return 3;
  } catch (const ResourceLimit& e) {
    out << path << ": internal: " << e.what() << "\n";
    return 2;
  } catch (const IndeterminateForm& e) {
    out << path << ": internal: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    out << path << ": internal: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv) {
  CliConfig cfg;
  CLI::App app{"overflow-aware verifier for a small heap language"};
  app.add_option("files", cfg.files, "programs to verify")->required();
  app.add_option("--mode", cfg.mode,
                 "verify | check-overflow | dump-constraints | oracle")
      ->check(CLI::IsMember(
          {"verify", "check-overflow", "dump-constraints", "oracle"}));
  app.add_option("--fuel,--max-unfold", cfg.fuel,
                 "entailment unfold/fold depth");
  app.add_option("--oracle-width", cfg.oracle_width,
                 "bit width for the concrete oracle");
  app.add_option("--enum-bound", cfg.enum_bound,
                 "longest list shape the oracle enumerates");
  app.add_option("--dump-constraints", cfg.dump_path,
                 "append arithmetic queries to this file");
  app.add_option("--format", cfg.format, "text | jsonl")
      ->check(CLI::IsMember({"text", "jsonl"}));
  app.add_flag("--trace-entail", cfg.trace_entail,
               "trace entailment proof search on stderr");
  app.add_flag("--enable-sub", cfg.enable_sub,
               "accept binary subtraction in programs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (cfg.oracle_width < 3) cfg.oracle_width = 3;
  if (cfg.oracle_width > 16) cfg.oracle_width = 16;
  if (cfg.fuel < 0) cfg.fuel = 0;
  if (cfg.enum_bound < 0) cfg.enum_bound = 0;

  NameSupply names;
  int worst = 0;
  for (const std::string& path : cfg.files) {
    auto t0 = std::chrono::steady_clock::now();
    int code = cli_detail::process_file(cfg, path, names, std::cout);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    std::cerr << path << ": " << ms << " ms\n";
    if (code > worst) worst = code;
  }
  return worst;
}

}  // namespace sentinel
