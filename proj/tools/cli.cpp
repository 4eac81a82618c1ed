#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include "lcvx/cert.hpp"
#include "lcvx/control.hpp"
#include "lcvx/convexify.hpp"
#include "lcvx/corpus.hpp"
#include "lcvx/errors.hpp"
#include "lcvx/sdp.hpp"

namespace lcvx::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Report {
  json data;
  std::string text;
  int code = kOk;
};

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(10) << x;
  return s.str();
}

std::string fmt(const Eigen::MatrixXd& m) {
  std::ostringstream s;
  s << "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) s << "; ";
    for (Eigen::Index k = 0; k < m.cols(); ++k) s << (k ? ", " : "") << fmt(m(i, k));
  }
  s << "]";
  return s.str();
}

std::string fmt(const SpotCheckReport& r) {
  std::ostringstream s;
  s << (r.pass ? "pass" : "FAIL") << " (samples " << r.samples << ", seed " << r.seed << ", roundtrip "
    << fmt(r.worst_roundtrip) << ", source violation " << fmt(r.worst_source_violation) << ", transport "
    << fmt(r.worst_transport) << ", failures " << r.failures << ")";
  if (!r.message.empty()) s << " " << r.message;
  return s.str();
}

Instance load_instance(const CliConfig& cfg) {
  if (!cfg.builtin.empty()) return builtin(cfg.builtin);
  if (!std::filesystem::is_regular_file(cfg.input)) throw UsageError("input file '" + cfg.input + "' not found");
  return load(cfg.input);
}

ChangeOfVariables map_for(const Instance& inst, const CliConfig& cfg) {
  if (cfg.epsilon && (inst.kind == InstanceKind::CtStabilization || inst.kind == InstanceKind::DtStabilization)) {
    return control_map(to_system(inst), *cfg.epsilon);
  }
  return make_map(inst);
}

void add_expected(const Instance& inst, Report& r) {
  if (!inst.expected) return;
  r.data["expected"] = {{"p_star", inst.expected->p_star},
                        {"d_star", inst.expected->d_star},
                        {"provenance", inst.expected->provenance}};
  r.text += "expected: p* = " + fmt(inst.expected->p_star) + ", d* = " + fmt(inst.expected->d_star) + " (" +
            inst.expected->provenance + ")\n";
}

std::string assignment_text(const Assignment& a) {
  std::string s;
  for (const auto& [name, m] : a) s += "  " + name + " = " + fmt(m) + "\n";
  return s;
}

json assignment_json(const Assignment& a) {
  json out = json::object();
  for (const auto& [name, m] : a) out[name] = matrix_json(m);
  return out;
}

Report cmd_solve(const Instance& inst, const CliConfig& cfg) {
  const ChangeOfVariables c = map_for(inst, cfg);
  const SdpSolution sol = solve(c.target, cfg.tol_gap, cfg.tol_feas);
  Report r;
  r.data = {{"schema_version", kSchemaVersion}, {"kind", "solution"},       {"instance", inst.name},
            {"map", to_string(c.kind)},         {"status", to_string(sol.status)}, {"iterations", sol.iterations}};
  r.text = "instance: " + inst.name + "\nmap: " + to_string(c.kind) + "\nstatus: " + to_string(sol.status) + "\n";
  if (sol.status != SdpStatus::Optimal) {
    r.data["message"] = sol.message;
    r.text += "message: " + sol.message + "\n";
    r.code = kNotVerified;
    return r;
  }
  const Assignment v = c.target.variables.unpack(sol.v);
  const Assignment x = recover(c, v);
  r.data["p_star"] = sol.primal_value;
  r.data["d_star"] = sol.dual_value;
  r.data["v"] = assignment_json(v);
  r.data["recovered_x"] = assignment_json(x);
  r.text += "p*: " + fmt(sol.primal_value) + "\nd*: " + fmt(sol.dual_value) + "\nconvexified solution:\n" +
            assignment_text(v) + "recovered solution:\n" + assignment_text(x);
  add_expected(inst, r);
  return r;
}

Report cmd_synthesize(const Instance& inst, const CliConfig& cfg) {
  if (inst.kind == InstanceKind::StaticOutputFeedback) (void)make_map(inst);
  if (inst.kind != InstanceKind::CtStabilization && inst.kind != InstanceKind::DtStabilization) {
    throw UsageError("synthesize needs a ct_stabilization or dt_stabilization instance");
  }
  const LtiSystem sys = to_system(inst);
  SynthesisOptions opts;
  opts.epsilon = cfg.epsilon ? cfg.epsilon : inst.epsilon;
  opts.tol_gap = cfg.tol_gap;
  opts.tol_feas = cfg.tol_feas;
  opts.samples = cfg.samples;
  opts.seed = cfg.seed;
  const StabilizationResult res = synthesize(sys, opts);
  const bool ct = sys.clock == Clock::ContinuousTime;
  Report r;
  r.data = stabilization_json(res, sys, inst.name);
  r.text = "instance: " + inst.name + "\nclock: " + (ct ? "continuous" : "discrete") + "\nF: " + fmt(res.F) +
           "\nP: " + fmt(res.P) + "\n" + (ct ? "max Re eig(A+BF): " : "spectral radius(A+BF): ") +
           fmt(res.closed_loop) + "\nepsilon: " + fmt(res.epsilon) + "\nmargin: " + fmt(res.margin) +
           "\nbilinear residual: " + fmt(res.bilinear_residual) + "\n";
  if (res.certificate) r.text += "certificate: " + to_string(res.certificate->verdict) + "\n";
  return r;
}

Report cmd_certify(const Instance& inst, const CliConfig& cfg) {
  const ChangeOfVariables c = map_for(inst, cfg);
  const DualityCertificate cert = certify(c.source, c, cfg.tol_gap, cfg.tol_feas, cfg.samples, cfg.seed);
  Report r;
  r.data = certificate_json(cert, inst.name);
  r.text = "instance: " + inst.name + "\nmap: " + cert.map_kind + "\np*: " + fmt(cert.primal_value) +
           "\nd*: " + fmt(cert.dual_value) + "\ngap: " + fmt(cert.gap) + "\nslater margin: " +
           fmt(cert.slater_margin) + "\nsurjection: " + fmt(cert.surjection) + "\ninclusion: " +
           fmt(cert.inclusion) + "\nrecovered solution:\n" + assignment_text(cert.recovered_x) +
           "verdict: " + to_string(cert.verdict) + "\n";
  if (!cert.failed_stage.empty()) r.text += "failed stage: " + cert.failed_stage + " (" + cert.message + ")\n";
  add_expected(inst, r);
  r.code = cert.verdict == Verdict::StrongDualityVerified ? kOk : kNotVerified;
  return r;
}

Report cmd_spotcheck(const Instance& inst, const CliConfig& cfg) {
  const ChangeOfVariables c = map_for(inst, cfg);
  const SpotCheckReport surj = surjection_spotcheck(c, cfg.samples, cfg.seed);
  const SpotCheckReport incl = inclusion_spotcheck(c.source, c, cfg.samples, cfg.seed);
  Report r;
  r.data = {{"schema_version", kSchemaVersion}, {"kind", "spotcheck"},        {"instance", inst.name},
            {"map", to_string(c.kind)},         {"surjection", spotcheck_json(surj)}, {"inclusion", spotcheck_json(incl)}};
  r.text = "instance: " + inst.name + "\nmap: " + to_string(c.kind) + "\nsurjection: " + fmt(surj) +
           "\ninclusion: " + fmt(incl) + "\n";
  r.code = surj.pass && incl.pass ? kOk : kNotVerified;
  return r;
}

Report cmd_oracle(const Instance& inst, const CliConfig& cfg) {
  const ChangeOfVariables c = map_for(inst, cfg);
  for (const auto& b : c.source.variables.blocks()) {
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper)) {
      throw UsageError("oracle needs a finite bounds box on every variable ('" + b.name + "' has none)");
    }
  }
  const DualityCertificate cert = certify(c.source, c, cfg.tol_gap, cfg.tol_feas, 1, cfg.seed);
  if (!cert.failed_stage.empty()) throw Error("convexified solve failed: " + cert.message);
  const OracleCrossCheck check = cross_check_with_oracle(cert, c.source, cfg.grid);
  Report r;
  r.data = {{"schema_version", kSchemaVersion},
            {"kind", "oracle"},
            {"instance", inst.name},
            {"grid", cfg.grid},
            {"oracle_primal", check.oracle_primal},
            {"cert_primal", check.cert_primal},
            {"slack", check.slack},
            {"primal_ok", check.primal_ok},
            {"dual_checked", check.dual_checked},
            {"dual_oracle_value", check.dual_oracle_value},
            {"dual_unbounded", check.dual_unbounded},
            {"dual_ok", check.dual_ok},
            {"pass", check.pass}};
  r.text = "instance: " + inst.name + "\ngrid per dimension: " + std::to_string(cfg.grid) +
           "\nprimal oracle: " + fmt(check.oracle_primal) + "\nconvexified p*: " + fmt(check.cert_primal) +
           "\nslack: " + fmt(check.slack) + "\n";
  if (check.dual_checked) {
    r.text += "dual oracle at SDP multipliers: " +
              (check.dual_unbounded ? std::string("unbounded below") : fmt(check.dual_oracle_value)) + "\n";
  }
  r.text += std::string("cross-check: ") + (check.pass ? "pass" : "FAIL") + "\n";
  add_expected(inst, r);
  r.code = check.pass ? kOk : kNotVerified;
  return r;
}

Report dispatch(const CliConfig& cfg) {
  const Instance inst = load_instance(cfg);
  if (cfg.command == "solve") return cmd_solve(inst, cfg);
  if (cfg.command == "synthesize") return cmd_synthesize(inst, cfg);
  if (cfg.command == "certify") return cmd_certify(inst, cfg);
  if (cfg.command == "spotcheck") return cmd_spotcheck(inst, cfg);
  return cmd_oracle(inst, cfg);
}

void emit(const Report& r, const CliConfig& cfg, std::ostream& out) {
  const std::string body = cfg.format == "json" ? canonical_dump(r.data) : r.text;
  if (cfg.output.empty()) {
    out << body;
    return;
  }
  std::ofstream file(cfg.output, std::ios::binary);
  if (!file) throw UsageError("cannot write '" + cfg.output + "'");
  file << body;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"Lossless convexification, SDP solving and strong-duality certificates", "lcvx"};
  app.require_subcommand(1, 1);

  std::vector<std::string> names;
  for (const auto& inst : builtins()) names.push_back(inst.name);
  auto* builtin_opt = app.add_option("--builtin", cfg.builtin, "Built-in instance name")->check(CLI::IsMember(names));
  auto* input_opt = app.add_option("--input", cfg.input, "Instance file (JSON)");
  builtin_opt->excludes(input_opt);
  app.add_option("--tol-gap", cfg.tol_gap, "Relative duality-gap tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--tol-feas", cfg.tol_feas, "Feasibility tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--epsilon", cfg.epsilon, "Stability margin epsilon for control instances")->check(CLI::PositiveNumber);
  app.add_option("--samples", cfg.samples, "Spot-check samples")->check(CLI::Range(1, 1000000))->capture_default_str();
  app.add_option("--seed", cfg.seed, "Spot-check seed")->capture_default_str();
  app.add_option("--grid", cfg.grid, "Grid points per dimension for the oracles")
      ->check(CLI::Range(2, 100000000))
      ->capture_default_str();
  app.add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
  app.add_option("--output", cfg.output, "Write the report to this file");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve", "Solve the convexified problem and recover the original solution"},
      {"synthesize", "Synthesize a stabilizing state-feedback gain"},
      {"certify", "Build a strong-duality certificate"},
      {"spotcheck", "Run the surjection and epigraph-inclusion spot-checks"},
      {"oracle", "Cross-check the certificate against brute-force grid oracles"}};
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->fallthrough()->callback([&cfg, name = name] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      out << app.help();
      return kOk;
    }
    err << "lcvx: " << e.what() << "\n";
    return kUsage;
  }
  if (cfg.builtin.empty() == cfg.input.empty()) {
    err << "lcvx: exactly one of --builtin or --input is required\n";
    return kUsage;
  }

  try {
    const Report r = dispatch(cfg);
    emit(r, cfg, out);
    return r.code;
  } catch (const NotStabilizable& e) {
    err << "lcvx: " << e.what() << "\n";
    return kNotVerified;
  } catch (const UsageError& e) {
    err << "lcvx: " << e.what() << "\n";
    return kUsage;
  } catch (const NoConvexification& e) {
    err << "lcvx: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    err << "lcvx: " << e.what() << "\n";
    return kUsage;
  } catch (const SchemaMismatch& e) {
    err << "lcvx: " << e.what() << "\n";
    return kUsage;
  } catch (const GridBudgetExceeded& e) {
    err << "lcvx: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "lcvx: internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace lcvx::cli
