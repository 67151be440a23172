#include <cstdio>
#include <sstream>

#include "wce/harness.hpp"

namespace wce::harness {

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "json") return ReportFormat::json;
  if (s == "table") return ReportFormat::table;
  throw UsageError("unknown report format: " + s);
}

namespace {

ojson tolerances_json(const Tolerances& tol) {
  return ojson{{"orth", tol.orth},     {"rank", tol.rank},
               {"iter", tol.iter},     {"supp", tol.supp},
               {"inv", tol.inv},       {"max_iter", tol.max_iter},
               {"seed", tol.seed}};
}

Tolerances tolerances_from_json(const ojson& j) {
  Tolerances tol;
  tol.orth = j.at("orth").get<double>();
  tol.rank = j.at("rank").get<double>();
  tol.iter = j.at("iter").get<double>();
  tol.supp = j.at("supp").get<double>();
  tol.inv = j.at("inv").get<double>();
  tol.max_iter = j.at("max_iter").get<int>();
  tol.seed = j.at("seed").get<std::uint64_t>();
  return tol;
}

ojson report_json(const AuditReport& r) {
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool"] = kToolName;
  j["tool_version"] = r.tool_version;
  j["command"] = ojson{{"claims", r.claims}, {"trials", r.trials}, {"seed", r.seed}};
  j["tolerances"] = tolerances_json(r.tol);
  ojson records = ojson::array();
  for (const auto& rec : r.records) {
    char seed_hex[19];
    std::snprintf(seed_hex, sizeof(seed_hex), "%016llx",
                  static_cast<unsigned long long>(rec.seed));
    records.push_back(ojson{{"claim", rec.claim},
                            {"hard", rec.hard},
                            {"trial", rec.trial},
                            {"seed", seed_hex},
                            {"digest", rec.digest},
                            {"verdict", rec.verdict},
                            {"evidence", rec.evidence}});
  }
  j["records"] = std::move(records);
  j["summary"] = ojson{{"pass", r.pass},
                       {"counterexample", r.counterexamples},
                       {"skipped", r.skipped},
                       {"hard_failures", r.hard_failures}};
  return j;
}

std::string render_table(const AuditReport& r) {
  std::ostringstream out;
  out << "tool " << kToolName << " " << r.tool_version << "  seed " << r.seed
      << "  trials " << r.trials << "\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%-32s %-5s %-6s %-16s %s\n", "claim",
                "trial", "hard", "digest", "verdict");
  out << line;
  for (const auto& rec : r.records) {
    std::snprintf(line, sizeof(line), "%-32s %5d %-6s %-16s %s\n",
                  rec.claim.c_str(), rec.trial, rec.hard ? "hard" : "soft",
                  rec.digest.c_str(), rec.verdict.c_str());
    out << line;
  }
  out << "summary: pass " << r.pass << ", counterexample " << r.counterexamples
      << ", skipped " << r.skipped << ", hard failures " << r.hard_failures
      << "\n";
  return out.str();
}

}  // namespace

std::string emit_report(const AuditReport& report, ReportFormat format) {
  if (format == ReportFormat::json) return report_json(report).dump(1) + "\n";
  return render_table(report);
}

AuditReport parse_report(const std::string& json_text) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const std::exception& e) {
    throw ValidationError("report", std::string("parse error: ") + e.what());
  }
  AuditReport r;
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion)
      throw ValidationError("report", "unsupported schema version");
    r.tool_version = j.at("tool_version").get<std::string>();
    r.seed = j.at("command").at("seed").get<std::uint64_t>();
    r.trials = j.at("command").at("trials").get<int>();
    r.claims = j.at("command").at("claims").get<std::vector<std::string>>();
    r.tol = tolerances_from_json(j.at("tolerances"));
    for (const auto& rec_j : j.at("records")) {
      ClaimRecord rec;
      rec.claim = rec_j.at("claim").get<std::string>();
      rec.hard = rec_j.at("hard").get<bool>();
      rec.trial = rec_j.at("trial").get<int>();
      rec.seed = std::stoull(rec_j.at("seed").get<std::string>(), nullptr, 16);
      rec.digest = rec_j.at("digest").get<std::string>();
      rec.verdict = rec_j.at("verdict").get<std::string>();
      rec.evidence = rec_j.at("evidence");
      if (rec.verdict == "PASS") ++r.pass;
      else if (rec.verdict == "COUNTEREXAMPLE") ++r.counterexamples;
      else ++r.skipped;
      if (rec.verdict == "COUNTEREXAMPLE" && rec.hard) ++r.hard_failures;
      r.records.push_back(std::move(rec));
    }
  } catch (const ojson::exception& e) {
    throw ValidationError("report", std::string("schema error: ") + e.what());
  }
  return r;
}

}  // namespace wce::harness
