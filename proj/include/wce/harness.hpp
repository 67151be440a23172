#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wce/majorize.hpp"
#include "wce/sra.hpp"

namespace wce::harness {

inline constexpr const char* kToolName = "wcesra";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

using ojson = nlohmann::ordered_json;

/// Deterministic portable random stream (splitmix64); identical draws for
/// identical seeds on every platform.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next();
  double unif01();
  double unif(double lo, double hi);
  long int_in(long lo, long hi);  ///< inclusive bounds
  cplx unit_box();                ///< re, im uniform in [-1, 1]
};

/// One instance file: the space, the partition, the two weights, and optional
/// named operators / vectors used by the CLI.
struct Instance {
  MeasureSpace space;
  Partition partition;
  MFunction u;
  MFunction w;
  std::vector<std::pair<std::string, LinOperator>> operators;
  std::vector<std::pair<std::string, MFunction>> vectors;

  const LinOperator* find_operator(const std::string& name) const;
  const MFunction* find_vector(const std::string& name) const;
};

WCEOp make_wce(const Instance& inst);

Instance load_instance(const std::string& path);
Instance parse_instance(const std::string& text, const std::string& where);
/// Canonical serialization (sorted operator/vector names, fixed key order).
std::string instance_to_json(const Instance& inst);
/// FNV-1a 64-bit digest of the canonical serialization, as 16 hex digits.
std::string instance_digest(const Instance& inst);

enum class Profile { generic, homogeneous, nilpotent, nonneg, rank_one };
const char* to_string(Profile p);
Profile profile_from_string(const std::string& s);

struct GenOptions {
  int n = 0;           ///< 0: derive from the seed
  int num_blocks = 0;  ///< 0: derive from the seed
};

/// Deterministic instance generator. Profile constraints are enforced
/// exactly: nilpotent projects w per block so E(uw) = 0; homogeneous rescales
/// so E(|u|^2), E(|w|^2), |E(uw)| are constant across blocks; rank_one adds
/// unit x and near-orthogonal y to the vectors map. Infeasible shapes raise
/// GenerationError.
Instance gen_instance(std::uint64_t seed, Profile profile, GenOptions opts = {});

/// Random function constant on each block of p.
MFunction random_measurable(const Partition& p, Rng& rng, bool nonneg);

/// Weight with exactly constant E(|w|^2) = cw and |E(uw)| = cr across blocks,
/// given u with constant E(|u|^2) = cu (the homogeneous profile machinery).
MFunction homogeneous_weight(const MeasureSpace& s, const Partition& p,
                             const MFunction& u, double cu, double cw,
                             double cr, Rng& rng);

/// Operator assembled from blocks in the H1/H2 coordinates:
/// S = B1 X B1* + B1 Y B2* + B2 Z B1* + B2 W B2*.
LinOperator block_operator(const BlockDecomp& d, const CMatrix& x,
                           const CMatrix& y, const CMatrix& z,
                           const CMatrix& w);

/// Constructed test operators for the membership suites. Members never have
/// an H2 -> H1 component; qt members additionally vanish on H2 and map H1
/// into H2 only.
std::vector<LinOperator> make_bt_members(const WCEOp& t, const BlockDecomp& d,
                                         Rng& rng);
std::vector<LinOperator> make_bt_nonmembers(const WCEOp& t,
                                            const BlockDecomp& d, Rng& rng,
                                            const Tolerances& tol = {});
std::vector<LinOperator> make_qt_members(const BlockDecomp& d, Rng& rng);
std::vector<LinOperator> make_qt_nonmembers(const BlockDecomp& d, Rng& rng);

// ---- audit runner ----

struct ClaimRecord {
  std::string claim;
  bool hard = false;
  int trial = 0;
  std::uint64_t seed = 0;   ///< instance seed; replays deterministically
  std::string digest;       ///< instance digest
  std::string verdict;      ///< PASS | COUNTEREXAMPLE | SKIPPED
  ojson evidence;
};

struct AuditReport {
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  int trials = 0;
  Tolerances tol;
  std::vector<std::string> claims;
  std::vector<ClaimRecord> records;
  int pass = 0;
  int counterexamples = 0;
  int skipped = 0;
  int hard_failures = 0;  ///< counterexamples on hard claims
};

struct ClaimInfo {
  std::string id;
  Profile profile;
  bool hard = false;
  std::string summary;
};

/// The registered claim catalog (data-driven: id, profile, hard flag).
const std::vector<ClaimInfo>& claim_catalog();

/// Runs one claim trial from its instance seed (used both by run_audit and
/// for replaying counterexample records).
ClaimRecord run_claim_trial(const std::string& claim_id, int trial,
                            std::uint64_t instance_seed,
                            const Tolerances& tol = {});

/// Instance seed for (audit seed, claim, trial); exposed so records replay.
std::uint64_t trial_seed(std::uint64_t audit_seed, const std::string& claim_id,
                         int trial);

/// claims may contain "all". Unknown ids raise UsageError.
AuditReport run_audit(const std::vector<std::string>& claims, int trials,
                      std::uint64_t seed, const Tolerances& tol = {});

enum class ReportFormat { json, table };
ReportFormat report_format_from_string(const std::string& s);

/// Machine-readable (schema-stable, versioned) or aligned-table rendering;
/// both carry identical data. The JSON form is byte-deterministic for a fixed
/// (claims, trials, seed, tolerances).
std::string emit_report(const AuditReport& report, ReportFormat format);
AuditReport parse_report(const std::string& json_text);

}  // namespace wce::harness
