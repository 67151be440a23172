#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wce/harness.hpp"

namespace {

using namespace wce;
using harness::Instance;

constexpr int kExitOk = 0;
constexpr int kExitHardFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::vector<long> parse_m_list(const std::string& text, long m_max) {
  if (text.empty()) return default_m_grid(m_max);
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const long m = std::stol(item);
    if (m < 1) throw UsageError("m values must be positive");
    out.push_back(m);
  }
  return out;
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw UsageError("cannot write to " + out_path);
  out << text;
}

void cmd_info(const Instance& inst, const Tolerances& tol) {
  const WCEOp t = harness::make_wce(inst);
  const BlockDecomp d = block_decompose(t, tol);
  std::printf("atoms: %zu, blocks: %zu, digest: %s\n", inst.space.size(),
              inst.partition.num_blocks(), harness::instance_digest(inst).c_str());
  std::printf("block  measure      E(|u|^2)     E(|w|^2)     |E(uw)|\n");
  for (std::size_t b = 0; b < inst.partition.num_blocks(); ++b)
    std::printf("%5zu  %-11.6g  %-11.6g  %-11.6g  %-11.6g\n", b,
                inst.partition.block_measure(b), t.block_e_u2()[b],
                t.block_e_w2()[b], std::abs(t.block_e_uw()[b]));
  std::printf("norm: %.12g (power iteration %.12g)\n", wce_norm(t),
              op_norm(t.matrix(), tol));
  std::printf("spectral radius: %.12g\n", spectral_radius(t));
  std::printf("dim H1: %zu, dim H2: %zu\n", d.h1.dim(), d.h2.dim());
  if (!inst.operators.empty()) {
    std::printf("operators:");
    for (const auto& [name, op] : inst.operators) std::printf(" %s", name.c_str());
    std::printf("\n");
  }
  if (!inst.vectors.empty()) {
    std::printf("vectors:");
    for (const auto& [name, v] : inst.vectors) std::printf(" %s", name.c_str());
    std::printf("\n");
  }
}

void cmd_rm(const Instance& inst, const std::vector<long>& ms, bool series_check,
            const Tolerances& tol) {
  const WCEOp t = harness::make_wce(inst);
  const RmFamily family = RmFamily::from_wce(t, tol);
  std::printf("r = %.12g\n", family.r());
  std::printf("%8s  %-12s %-12s %-12s %-12s%s\n", "m", "d_m", "||R_m||",
              "||R_m^-1||", "||RR^-1-I||", series_check ? " series-diff" : "");
  for (long m : ms) {
    const LinOperator r = family.rm(m);
    const LinOperator ri = family.rm_inverse(m);
    const double resid = wfrobenius(r * ri - LinOperator::identity(t.space()));
    std::printf("%8ld  %-12.6g %-12.6g %-12.6g %-12.4g", m, family.d(m),
                op_norm(r, tol), op_norm(ri, tol), resid);
    if (series_check)
      std::printf(" %-12.4g",
                  max_abs_diff(r.matrix(), rm_series(t, m, tol).matrix()));
    std::printf("\n");
  }
}

int cmd_membership(const Instance& inst, const std::string& op_name,
                   const std::string& algebra, long m_max,
                   const Tolerances& tol) {
  const WCEOp t = harness::make_wce(inst);
  const LinOperator* s = inst.find_operator(op_name);
  if (!s) throw UsageError("no operator named '" + op_name + "' in the file");
  const std::vector<long> grid = default_m_grid(m_max);
  if (algebra == "bt") {
    const RmFamily family = RmFamily::from_wce(t, tol);
    const MembershipVerdict def = bt_member_definitional(family, *s, grid, tol);
    const bool knl = bt_member_kernel_criterion(t, *s, tol);
    std::printf("%8s  %s\n", "m", "g(m) = ||R_m S R_m^-1||");
    for (const auto& [m, g] : def.evidence) std::printf("%8ld  %.12g\n", m, g);
    std::printf("definitional classifier: %s\n", to_string(def.verdict));
    std::printf("kernel-invariance criterion: %s\n", knl ? "Member" : "NonMember");
    return kExitOk;
  }
  if (algebra == "qt") {
    const QtResult q = qt_member(t, *s, grid, tol);
    std::printf("%8s  %s\n", "m", "g(m) = ||R_m S R_m^-1||");
    for (const auto& [m, g] : q.evidence.evidence)
      std::printf("%8ld  %.12g\n", m, g);
    std::printf("criterion (H2 invariant and H2 in N(S)): %s\n",
                q.criterion ? "Member" : "NonMember");
    std::printf("H1-block norm ||P1 S P1||: %.6g\n", q.x_block_norm);
    std::printf("decay below 1e-3*||S|| at m=%ld: %s\n", grid.back(),
                q.decay_observed ? "yes" : "no");
    return kExitOk;
  }
  throw UsageError("algebra must be bt or qt");
}

void cmd_aluthge(const Instance& inst, const Tolerances& tol) {
  const WCEOp t = harness::make_wce(inst);
  const LinOperator closed = aluthge(t, tol);
  const LinOperator oracle = aluthge_from_polar(t.matrix(), tol);
  const WCEOp tt = aluthge_wce(t, tol);
  std::printf("closed form vs polar oracle (max entry diff): %.6g\n",
              max_abs_diff(closed.matrix(), oracle.matrix()));
  std::printf("r(T) = %.12g, r(T~) = %.12g\n", spectral_radius(t),
              spectral_radius(tt));
  std::printf("||T|| = %.12g, ||T~|| = %.12g\n", wce_norm(t), wce_norm(tt));
}

int cmd_majorize(const Instance& inst, const std::string& t_name,
                 const std::string& s_name, const Tolerances& tol) {
  const LinOperator* t = inst.find_operator(t_name);
  const LinOperator* s = inst.find_operator(s_name);
  if (!t) throw UsageError("no operator named '" + t_name + "' in the file");
  if (!s) throw UsageError("no operator named '" + s_name + "' in the file");
  const MajorizationResult res = majorizes(*t, *s, tol);
  if (res.holds) {
    std::printf("majorizes: yes, minimal constant M = %.12g\n",
                res.constant.value_or(0.0));
  } else {
    std::printf("majorizes: no\n");
    if (res.witness) {
      std::printf("witness (kernel direction of T not annihilated by S):\n");
      for (std::size_t i = 0; i < res.witness->size(); ++i)
        std::printf("  [%zu] %.9g%+.9gi\n", i, (*res.witness)[i].real(),
                    (*res.witness)[i].imag());
      std::printf("||T witness|| = %.3g, ||S witness|| = %.3g\n",
                  norm(t->apply(*res.witness)), norm(s->apply(*res.witness)));
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted conditional expectation operators and their spectral "
               "radius algebras"};
  app.require_subcommand(1);

  Tolerances tol;
  long m_max = 16384;
  std::uint64_t seed = tol.seed;
  app.add_option("--tol-rank", tol.rank, "kernel/pivot threshold")
      ->envname("WCE_TOL_RANK");
  app.add_option("--tol-inv", tol.inv, "invariance threshold")
      ->envname("WCE_TOL_INV");
  app.add_option("--tol-orth", tol.orth, "orthonormality slack")
      ->envname("WCE_TOL_ORTH");
  app.add_option("--tol-iter", tol.iter, "power-iteration stopping rule")
      ->envname("WCE_TOL_ITER");
  app.add_option("--tol-supp", tol.supp, "support threshold")
      ->envname("WCE_TOL_SUPP");
  app.add_option("--max-iter", tol.max_iter, "power-iteration budget")
      ->envname("WCE_MAX_ITER");
  app.add_option("--m-max", m_max, "top of the m grid")->envname("WCE_M_MAX");
  app.add_option("--seed", seed, "base seed for iterative methods")
      ->envname("WCE_SEED");

  std::string file, op_name, algebra = "bt", t_name, s_name, m_list;
  std::string claims_text = "all", format = "json", out_path, report_file;
  std::string profile_text;
  int trials = 10;
  bool series_check = false;

  CLI::App* info = app.add_subcommand("info", "summarize an instance file");
  info->add_option("file", file)->required();

  CLI::App* rm = app.add_subcommand("rm", "R_m diagnostics on an instance");
  rm->add_option("file", file)->required();
  rm->add_option("--m", m_list, "comma-separated m values (default: the grid)");
  rm->add_flag("--series-check", series_check,
               "also compare against the series oracle");

  CLI::App* membership =
      app.add_subcommand("membership", "test a named operator against B_T or Q_T");
  membership->add_option("file", file)->required();
  membership->add_option("--op", op_name, "operator name")->required();
  membership->add_option("--algebra", algebra, "bt or qt");

  CLI::App* alu = app.add_subcommand("aluthge", "Aluthge transform diagnostics");
  alu->add_option("file", file)->required();

  CLI::App* maj = app.add_subcommand("majorize", "majorization between named operators");
  maj->add_option("file", file)->required();
  maj->add_option("--t", t_name, "majorizing operator")->required();
  maj->add_option("--s", s_name, "majorized operator")->required();

  CLI::App* audit = app.add_subcommand("audit", "run the claim catalog");
  audit->add_option("--claims", claims_text,
                    "comma-separated claim ids, or 'all'");
  audit->add_option("--trials", trials, "trials per claim");
  audit->add_option("--format", format, "json or table");
  audit->add_option("--out", out_path, "write the report here instead of stdout");
  audit->add_option("--profile", profile_text,
                    "restrict to claims registered with this instance profile");
  CLI::App* list_claims =
      app.add_subcommand("claims", "list the registered claim catalog");

  CLI::App* report = app.add_subcommand("report", "re-render a saved JSON report");
  report->add_option("file", report_file)->required();
  report->add_option("--format", format, "json or table");

  // global flags may appear after the subcommand name
  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  tol.seed = seed;
  try {
    if (*info) {
      cmd_info(harness::load_instance(file), tol);
    } else if (*rm) {
      cmd_rm(harness::load_instance(file), parse_m_list(m_list, m_max),
             series_check, tol);
    } else if (*membership) {
      return cmd_membership(harness::load_instance(file), op_name, algebra,
                            m_max, tol);
    } else if (*alu) {
      cmd_aluthge(harness::load_instance(file), tol);
    } else if (*maj) {
      return cmd_majorize(harness::load_instance(file), t_name, s_name, tol);
    } else if (*list_claims) {
      for (const auto& c : harness::claim_catalog())
        std::printf("%-32s %-12s %-4s %s\n", c.id.c_str(),
                    harness::to_string(c.profile), c.hard ? "hard" : "soft",
                    c.summary.c_str());
    } else if (*audit) {
      std::vector<std::string> claims;
      std::stringstream ss(claims_text);
      std::string item;
      while (std::getline(ss, item, ',')) claims.push_back(item);
      if (!profile_text.empty()) {
        const harness::Profile p = harness::profile_from_string(profile_text);
        std::vector<std::string> filtered;
        for (const auto& c : harness::claim_catalog()) {
          if (c.profile != p) continue;
          for (const auto& want : claims)
            if (want == "all" || want == c.id) {
              filtered.push_back(c.id);
              break;
            }
        }
        claims = std::move(filtered);
      }
      const harness::AuditReport rep =
          harness::run_audit(claims, trials, seed, tol);
      write_output(
          harness::emit_report(rep, harness::report_format_from_string(format)),
          out_path);
      if (rep.hard_failures > 0) return kExitHardFailure;
    } else if (*report) {
      std::ifstream in(report_file, std::ios::binary);
      if (!in) throw UsageError("cannot open " + report_file);
      std::ostringstream buf;
      buf << in.rdbuf();
      const harness::AuditReport rep = harness::parse_report(buf.str());
      write_output(
          harness::emit_report(rep, harness::report_format_from_string(format)),
          out_path);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitUsage;
  } catch (const NumericalFailure& e) {
    std::fprintf(stderr, "numerical failure: %s (best bound %.6g)\n", e.what(),
                 e.best_bound());
    return kExitNumerical;
  }
  return kExitOk;
}
