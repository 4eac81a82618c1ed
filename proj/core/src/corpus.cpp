#include "lcvx/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "lcvx/errors.hpp"

namespace lcvx {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- reading

const json& member(const json& obj, const std::string& key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaMismatch(path + "." + key + ": required field missing");
  return *it;
}

void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw SchemaMismatch(path + "." + key + ": unknown field");
  }
}

const json& object_at(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaMismatch(path + ": expected an object");
  return j;
}

std::string string_at(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaMismatch(path + ": expected a string");
  return j.get<std::string>();
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaMismatch(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaMismatch(path + ": non-finite number");
  return v;
}

int power_at(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0 || j.get<long long>() > 4) {
    throw SchemaMismatch(path + ": expected an integer power in [0, 4]");
  }
  return j.get<int>();
}

Eigen::MatrixXd matrix_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw SchemaMismatch(path + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].empty()) throw SchemaMismatch(path + "[" + std::to_string(i) + "]: expected a row");
    if (i == 0) cols = j[i].size();
    if (j[i].size() != cols) throw SchemaMismatch(path + ": ragged rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      m(i, k) = number_at(j[i][k], path + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
    }
  }
  return m;
}

std::vector<PolyTerm> poly_at(const json& j, std::size_t nvars, const std::string& path) {
  if (!j.is_array()) throw SchemaMismatch(path + ": expected an array of terms");
  std::vector<PolyTerm> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string tp = path + "[" + std::to_string(k) + "]";
    const json& term = object_at(j[k], tp);
    only_keys(term, {"coef", "powers"}, tp);
    PolyTerm t;
    t.coef = number_at(member(term, "coef", tp), tp + ".coef");
    const json& powers = member(term, "powers", tp);
    if (!powers.is_array() || powers.size() != nvars) {
      throw SchemaMismatch(tp + ".powers: expected one power per variable");
    }
    for (std::size_t i = 0; i < powers.size(); ++i) {
      t.powers.push_back(power_at(powers[i], tp + ".powers[" + std::to_string(i) + "]"));
    }
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------- writing

std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

bool inline_array(const json& j) {
  for (const auto& e : j) {
    if (e.is_number()) continue;
    if (e.is_array() && std::all_of(e.begin(), e.end(), [](const json& x) { return x.is_number(); })) continue;
    return false;
  }
  return true;
}

void emit(const json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) + 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(key).dump() + ": ";
        emit(value, indent + 2, out);
      }
      out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      if (inline_array(j)) {
        out += "[";
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) out += ", ";
          emit(j[k], indent, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ",\n";
        out += pad;
        emit(j[k], indent + 2, out);
      }
      out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "]";
      return;
    }
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

json poly_json(const std::vector<PolyTerm>& poly) {
  json out = json::array();
  for (const auto& t : poly) out.push_back({{"coef", t.coef}, {"powers", t.powers}});
  return out;
}

Polynomial to_polynomial(const std::vector<PolyTerm>& terms, const std::vector<std::string>& vars) {
  Polynomial p;
  for (const auto& t : terms) {
    std::vector<std::string> factors;
    for (std::size_t k = 0; k < vars.size(); ++k) {
      for (int e = 0; e < t.powers[k]; ++e) factors.push_back(vars[k]);
    }
    if (factors.empty()) {
      p.constant += t.coef;
    } else {
      p.terms.push_back(Polynomial::term(t.coef, factors));
    }
  }
  return p;
}

Instance scalar_instance(std::string name, std::string map, std::vector<std::string> vars,
                         std::map<std::string, std::pair<double, double>> boxes, std::vector<PolyTerm> objective,
                         std::vector<std::vector<PolyTerm>> constraints, Expected expected) {
  Instance inst;
  inst.name = std::move(name);
  inst.kind = InstanceKind::ScalarBmi;
  inst.map = std::move(map);
  inst.variables = std::move(vars);
  inst.boxes = std::move(boxes);
  inst.objective = std::move(objective);
  inst.constraints = std::move(constraints);
  inst.expected = std::move(expected);
  return inst;
}

Instance control_instance(std::string name, InstanceKind kind, Eigen::MatrixXd A, Eigen::MatrixXd B, double epsilon) {
  Instance inst;
  inst.name = std::move(name);
  inst.kind = kind;
  inst.A = std::move(A);
  inst.B = std::move(B);
  inst.epsilon = epsilon;
  return inst;
}

MatrixMonomial mono(std::vector<Factor> factors, bool add_transpose) {
  MatrixMonomial m;
  m.factors = std::move(factors);
  m.add_transpose = add_transpose;
  return m;
}

/// (A + BFC)P + P(A + BFC)ᵀ + εI ⪯ 0 and εI - P ⪯ 0 in (P, F).
BmiProblem static_output_feedback_bmi(const Instance& inst) {
  const Eigen::MatrixXd& A = *inst.A;
  const Eigen::MatrixXd& B = *inst.B;
  const Eigen::MatrixXd& C = *inst.C;
  const int n = static_cast<int>(A.rows());
  const double eps = instance_epsilon(inst);
  BmiProblem p;
  p.variables.add(VarBlock::symmetric("P", n));
  p.variables.add(VarBlock::matrix("F", static_cast<int>(B.cols()), static_cast<int>(C.rows())));
  const auto P = Factor::variable("P");
  const auto F = Factor::variable("F");
  BilinearMatrixExpr lyap;
  lyap.constant = SymMat::identity(n) * eps;
  lyap.terms.push_back(mono({Factor::matrix(A), P}, true));
  lyap.terms.push_back(mono({Factor::matrix(B), F, Factor::matrix(C), P}, true));
  p.add_constraint("lyapunov", std::move(lyap));
  BilinearMatrixExpr pos;
  pos.constant = SymMat::identity(n) * eps;
  MatrixMonomial minus_p = mono({P}, false);
  minus_p.scale = -1.0;
  pos.terms.push_back(std::move(minus_p));
  p.add_constraint("positivity", std::move(pos));
  p.validate();
  return p;
}

}  // namespace

std::string to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::ScalarBmi:
      return "scalar_bmi";
    case InstanceKind::CtStabilization:
      return "ct_stabilization";
    case InstanceKind::DtStabilization:
      return "dt_stabilization";
    case InstanceKind::StaticOutputFeedback:
      return "static_output_feedback";
  }
  return "scalar_bmi";
}

InstanceKind parse_instance_kind(const std::string& name) {
  for (auto k : {InstanceKind::ScalarBmi, InstanceKind::CtStabilization, InstanceKind::DtStabilization,
                 InstanceKind::StaticOutputFeedback}) {
    if (to_string(k) == name) return k;
  }
  throw SchemaMismatch("kind: unknown instance kind '" + name + "'");
}

Instance parse_instance(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  } catch (const json::exception& e) {
    throw ParseError(std::string("parse error: ") + e.what());
  }

  object_at(root, "$");
  only_keys(root, {"schema_version", "name", "kind", "data", "expected"}, "$");
  Instance inst;
  inst.schema_version = string_at(member(root, "schema_version", "$"), "$.schema_version");
  if (inst.schema_version != kSchemaVersion) {
    throw SchemaMismatch("$.schema_version: unsupported version '" + inst.schema_version + "'");
  }
  if (root.contains("name")) inst.name = string_at(root["name"], "$.name");
  inst.kind = parse_instance_kind(string_at(member(root, "kind", "$"), "$.kind"));

  const json& data = object_at(member(root, "data", "$"), "$.data");
  only_keys(data, {"A", "B", "C", "epsilon", "map", "variables", "boxes", "polynomials"}, "$.data");
  if (data.contains("A")) inst.A = matrix_at(data["A"], "$.data.A");
  if (data.contains("B")) inst.B = matrix_at(data["B"], "$.data.B");
  if (data.contains("C")) inst.C = matrix_at(data["C"], "$.data.C");
  if (data.contains("epsilon")) {
    inst.epsilon = number_at(data["epsilon"], "$.data.epsilon");
    if (*inst.epsilon <= 0.0) throw SchemaMismatch("$.data.epsilon: must be positive");
  }
  if (data.contains("map")) inst.map = string_at(data["map"], "$.data.map");
  if (data.contains("variables")) {
    const json& vars = data["variables"];
    if (!vars.is_array()) throw SchemaMismatch("$.data.variables: expected an array of names");
    std::set<std::string> seen;
    for (std::size_t k = 0; k < vars.size(); ++k) {
      inst.variables.push_back(string_at(vars[k], "$.data.variables[" + std::to_string(k) + "]"));
      if (inst.variables.back().empty() || !seen.insert(inst.variables.back()).second) {
        throw SchemaMismatch("$.data.variables: names must be non-empty and distinct");
      }
    }
  }
  if (data.contains("boxes")) {
    const json& boxes = object_at(data["boxes"], "$.data.boxes");
    for (const auto& [name, box] : boxes.items()) {
      const std::string bp = "$.data.boxes." + name;
      if (std::find(inst.variables.begin(), inst.variables.end(), name) == inst.variables.end()) {
        throw SchemaMismatch(bp + ": box for an undeclared variable");
      }
      if (!box.is_array() || box.size() != 2) throw SchemaMismatch(bp + ": expected [lower, upper]");
      const double lo = number_at(box[0], bp + "[0]");
      const double hi = number_at(box[1], bp + "[1]");
      if (lo > hi) throw SchemaMismatch(bp + ": lower bound exceeds upper bound");
      inst.boxes[name] = {lo, hi};
    }
  }
  if (data.contains("polynomials")) {
    const json& polys = object_at(data["polynomials"], "$.data.polynomials");
    only_keys(polys, {"objective", "constraints"}, "$.data.polynomials");
    const std::size_t nv = inst.variables.size();
    if (polys.contains("objective")) inst.objective = poly_at(polys["objective"], nv, "$.data.polynomials.objective");
    if (polys.contains("constraints")) {
      const json& cons = polys["constraints"];
      if (!cons.is_array()) throw SchemaMismatch("$.data.polynomials.constraints: expected an array");
      for (std::size_t k = 0; k < cons.size(); ++k) {
        inst.constraints.push_back(poly_at(cons[k], nv, "$.data.polynomials.constraints[" + std::to_string(k) + "]"));
      }
    }
  }
  if (root.contains("expected")) {
    const json& ex = object_at(root["expected"], "$.expected");
    only_keys(ex, {"p_star", "d_star", "provenance"}, "$.expected");
    Expected e;
    e.p_star = number_at(member(ex, "p_star", "$.expected"), "$.expected.p_star");
    e.d_star = number_at(member(ex, "d_star", "$.expected"), "$.expected.d_star");
    if (ex.contains("provenance")) e.provenance = string_at(ex["provenance"], "$.expected.provenance");
    inst.expected = e;
  }

  switch (inst.kind) {
    case InstanceKind::ScalarBmi:
      if (inst.variables.empty()) throw SchemaMismatch("$.data.variables: scalar_bmi needs variables");
      if (inst.A || inst.B || inst.C) throw SchemaMismatch("$.data: scalar_bmi takes no system matrices");
      break;
    case InstanceKind::StaticOutputFeedback:
      if (!inst.C) throw SchemaMismatch("$.data.C: required for static_output_feedback");
      [[fallthrough]];
    case InstanceKind::CtStabilization:
    case InstanceKind::DtStabilization:
      if (!inst.A || !inst.B) throw SchemaMismatch("$.data: control instances need A and B");
      if (inst.A->rows() != inst.A->cols()) throw SchemaMismatch("$.data.A: must be square");
      if (inst.B->rows() != inst.A->rows()) throw SchemaMismatch("$.data.B: row count must match A");
      if (inst.C && inst.C->cols() != inst.A->rows()) throw SchemaMismatch("$.data.C: column count must match A");
      if (!inst.variables.empty() || !inst.objective.empty() || !inst.constraints.empty()) {
        throw SchemaMismatch("$.data: control instances take no polynomials");
      }
      break;
  }
  return inst;
}

Instance load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string to_json(const Instance& inst) {
  json data = json::object();
  if (inst.A) data["A"] = matrix_json(*inst.A);
  if (inst.B) data["B"] = matrix_json(*inst.B);
  if (inst.C) data["C"] = matrix_json(*inst.C);
  if (inst.epsilon) data["epsilon"] = *inst.epsilon;
  if (!inst.map.empty()) data["map"] = inst.map;
  if (!inst.variables.empty()) data["variables"] = inst.variables;
  if (!inst.boxes.empty()) {
    json boxes = json::object();
    for (const auto& [name, box] : inst.boxes) boxes[name] = {box.first, box.second};
    data["boxes"] = boxes;
  }
  if (inst.kind == InstanceKind::ScalarBmi) {
    json cons = json::array();
    for (const auto& c : inst.constraints) cons.push_back(poly_json(c));
    data["polynomials"] = {{"objective", poly_json(inst.objective)}, {"constraints", cons}};
  }
  json root = {{"schema_version", inst.schema_version}, {"kind", to_string(inst.kind)}, {"data", data}};
  if (!inst.name.empty()) root["name"] = inst.name;
  if (inst.expected) {
    root["expected"] = {{"p_star", inst.expected->p_star},
                        {"d_star", inst.expected->d_star},
                        {"provenance", inst.expected->provenance}};
  }
  return canonical_dump(root);
}

void save(const Instance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << to_json(inst);
  if (!out) throw Error("write failed for '" + path + "'");
}

std::string canonical_dump(const json& j) {
  std::string out;
  emit(j, 0, out);
  out += "\n";
  return out;
}

std::vector<Instance> builtins() {
  std::vector<Instance> out;
  out.push_back(scalar_instance("example1", "example1", {"x"}, {{"x", {-3.0, 3.0}}}, {{1.0, {2}}},
                                {{{1.0, {0}}, {-1.0, {2}}}},
                                {1.0, 1.0, "Example 1 (p* = 1); Example 3 (d* = 1 = p*)"}));
  out.push_back(scalar_instance("example2", "example2", {"x1", "x2"}, {{"x1", {0.5, 3.0}}, {"x2", {0.5, 3.0}}},
                                {{1.0, {2, 0}}, {1.0, {1, 2}}},
                                {{{1.0, {0, 0}}, {-1.0, {1, 2}}}, {{1.0, {0, 0}}, {-1.0, {1, 0}}}},
                                {2.0, 2.0, "Example 2 (p* = f(x*) = 2); Example 4 (d* = 2 = p*)"}));

  Eigen::MatrixXd di_a(2, 2);
  di_a << 0.0, 1.0, 0.0, 0.0;
  Eigen::MatrixXd di_b(2, 1);
  di_b << 0.0, 1.0;
  out.push_back(control_instance("ct_double_integrator", InstanceKind::CtStabilization, di_a, di_b, 1e-3));
  out.push_back(control_instance("dt_unstable_scalar", InstanceKind::DtStabilization,
                                 Eigen::MatrixXd::Constant(1, 1, 1.2), Eigen::MatrixXd::Constant(1, 1, 1.0), 1e-3));

  // Fixed pseudo-random data; the static output-feedback problem is only represented.
  Eigen::MatrixXd sa(3, 3);
  sa << 0.2147, 1.0381, -0.3326, -0.5402, 0.1193, 0.8125, 0.4068, -0.7214, -0.6037;
  Eigen::MatrixXd sb(3, 1);
  sb << 0.0912, 1.1475, 0.4986;
  Eigen::MatrixXd sc(2, 3);
  sc << 1.0, 0.0, 0.3164, 0.0, -0.4571, 1.0;
  Instance sof = control_instance("sof_demo", InstanceKind::StaticOutputFeedback, sa, sb, 1e-3);
  sof.C = sc;
  out.push_back(std::move(sof));
  return out;
}

Instance builtin(const std::string& name) {
  for (auto& inst : builtins()) {
    if (inst.name == name) return inst;
  }
  throw Error("unknown builtin instance '" + name + "'");
}

BmiProblem to_bmi(const Instance& inst) {
  switch (inst.kind) {
    case InstanceKind::ScalarBmi: {
      BmiProblem p;
      for (const auto& name : inst.variables) {
        const auto it = inst.boxes.find(name);
        if (it == inst.boxes.end()) {
          p.variables.add(VarBlock::scalar(name));
        } else {
          p.variables.add(VarBlock::scalar(name, it->second.first, it->second.second));
        }
      }
      p.objective = to_polynomial(inst.objective, inst.variables);
      for (std::size_t k = 0; k < inst.constraints.size(); ++k) {
        const Polynomial poly = to_polynomial(inst.constraints[k], inst.variables);
        BilinearMatrixExpr e;
        e.constant = SymMat::identity(1) * poly.constant;
        e.terms = poly.terms;
        p.add_constraint("phi" + std::to_string(k + 1), std::move(e));
      }
      p.validate();
      return p;
    }
    case InstanceKind::CtStabilization:
    case InstanceKind::DtStabilization:
      return control_map(to_system(inst), instance_epsilon(inst)).source;
    case InstanceKind::StaticOutputFeedback:
      return static_output_feedback_bmi(inst);
  }
  throw SchemaMismatch("unknown instance kind");
}

LtiSystem to_system(const Instance& inst) {
  if (inst.kind == InstanceKind::ScalarBmi || !inst.A || !inst.B) {
    throw SchemaMismatch("instance '" + inst.name + "' does not describe a linear system");
  }
  LtiSystem sys;
  sys.A = *inst.A;
  sys.B = *inst.B;
  sys.clock = inst.kind == InstanceKind::DtStabilization ? Clock::DiscreteTime : Clock::ContinuousTime;
  sys.validate();
  return sys;
}

double instance_epsilon(const Instance& inst) {
  if (inst.epsilon) return *inst.epsilon;
  if (inst.A) return 1e-3 * std::max(inst.A->norm(), 1e-3);
  return 1e-3;
}

ChangeOfVariables make_map(const Instance& inst) {
  switch (inst.kind) {
    case InstanceKind::ScalarBmi:
      if (inst.map == "example1") return example1_map(to_bmi(inst));
      if (inst.map == "example2") return example2_map(to_bmi(inst));
      throw NoConvexification("no lossless convexification available for instance '" + inst.name + "'");
    case InstanceKind::CtStabilization:
    case InstanceKind::DtStabilization:
      return control_map(to_system(inst), instance_epsilon(inst));
    case InstanceKind::StaticOutputFeedback:
      break;
  }
  throw NoConvexification("no lossless convexification available for kind static_output_feedback");
}

json spotcheck_json(const SpotCheckReport& r) {
  return {{"pass", r.pass},
          {"samples", r.samples},
          {"seed", r.seed},
          {"worst_roundtrip", r.worst_roundtrip},
          {"worst_source_violation", r.worst_source_violation},
          {"worst_transport", r.worst_transport},
          {"failures", r.failures},
          {"message", r.message}};
}

json certificate_json(const DualityCertificate& cert, const std::string& instance_name) {
  json x = json::object();
  for (const auto& [name, m] : cert.recovered_x) x[name] = matrix_json(m);
  json multipliers = json::array();
  for (const auto& l : cert.multipliers) multipliers.push_back(matrix_json(l.matrix()));
  return {{"schema_version", kSchemaVersion},
          {"kind", "certificate"},
          {"instance", instance_name},
          {"map", cert.map_kind},
          {"p_star", cert.primal_value},
          {"d_star", cert.dual_value},
          {"gap", cert.gap},
          {"slater_margin", cert.slater_margin},
          {"verdict", to_string(cert.verdict)},
          {"failed_stage", cert.failed_stage},
          {"message", cert.message},
          {"tolerances", {{"tol_gap", cert.tol_gap}, {"tol_feas", cert.tol_feas}}},
          {"recovered_x", x},
          {"recovered_objective", cert.recovered_objective},
          {"original_residuals", cert.original_residuals},
          {"multipliers", multipliers},
          {"surjection", spotcheck_json(cert.surjection)},
          {"inclusion", spotcheck_json(cert.inclusion)}};
}

json stabilization_json(const StabilizationResult& r, const LtiSystem& sys, const std::string& instance_name) {
  const bool ct = sys.clock == Clock::ContinuousTime;
  json out = {{"schema_version", kSchemaVersion},
              {"kind", "stabilization"},
              {"instance", instance_name},
              {"clock", ct ? "continuous" : "discrete"},
              {"A", matrix_json(sys.A)},
              {"B", matrix_json(sys.B)},
              {"P", matrix_json(r.P)},
              {"M", matrix_json(r.M)},
              {"F", matrix_json(r.F)},
              {"epsilon", r.epsilon},
              {"margin", r.margin},
              {"p_star", r.primal_value},
              {"d_star", r.dual_value},
              {ct ? "max_real_eig" : "spectral_radius", r.closed_loop},
              {"bilinear_residual", r.bilinear_residual},
              {"halvings", r.halvings}};
  out["certificate"] = r.certificate ? certificate_json(*r.certificate, instance_name) : json(nullptr);
  return out;
}

}  // namespace lcvx
