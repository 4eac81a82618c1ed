#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "lcvx/bmi.hpp"
#include "lcvx/cert.hpp"
#include "lcvx/control.hpp"
#include "lcvx/convexify.hpp"
#include "lcvx/lti.hpp"

namespace lcvx {

inline constexpr const char* kSchemaVersion = "1";

enum class InstanceKind { ScalarBmi, CtStabilization, DtStabilization, StaticOutputFeedback };

std::string to_string(InstanceKind kind);
/// Throws SchemaMismatch for unknown names.
InstanceKind parse_instance_kind(const std::string& name);

/// coef · Π variables[k]^powers[k].
struct PolyTerm {
  double coef = 0.0;
  std::vector<int> powers;
};

struct Expected {
  double p_star = 0.0;
  double d_star = 0.0;
  std::string provenance;
};

/// One problem instance as stored on disk.
///
/// Canonical JSON layout (keys sorted, floats printed with 17 significant
/// digits, numeric arrays on one line):
///
///   {
///     "data": {
///       "A": [[...], ...], "B": ..., "C": ...,          control kinds
///       "boxes": {"x": [lo, hi]}, "epsilon": e,
///       "map": "example1",                              scalar_bmi
///       "polynomials": {"constraints": [[term, ...], ...], "objective": [term, ...]},
///       "variables": ["x", ...]
///     },
///     "expected": {"d_star": d, "p_star": p, "provenance": "..."},
///     "kind": "scalar_bmi" | "ct_stabilization" | "dt_stabilization" | "static_output_feedback",
///     "name": "...",
///     "schema_version": "1"
///   }
///
/// where term = {"coef": c, "powers": [k, ...]} with one power per variable.
/// Scalar-BMI constraints read Σ terms ≤ 0.
struct Instance {
  std::string schema_version = kSchemaVersion;
  std::string name;
  InstanceKind kind = InstanceKind::ScalarBmi;
  std::optional<Eigen::MatrixXd> A;
  std::optional<Eigen::MatrixXd> B;
  std::optional<Eigen::MatrixXd> C;
  std::optional<double> epsilon;
  std::string map;
  std::vector<std::string> variables;
  std::map<std::string, std::pair<double, double>> boxes;
  std::vector<PolyTerm> objective;
  std::vector<std::vector<PolyTerm>> constraints;
  std::optional<Expected> expected;
};

/// Throws ParseError (with the byte offset) on malformed JSON and
/// SchemaMismatch (naming the field) on schema violations, including
/// non-finite numbers.
Instance parse_instance(const std::string& text);
Instance load(const std::string& path);

std::string to_json(const Instance& inst);
void save(const Instance& inst, const std::string& path);

/// example1, example2, ct_double_integrator, dt_unstable_scalar, sof_demo.
std::vector<Instance> builtins();
/// Throws Error for unknown names.
Instance builtin(const std::string& name);

BmiProblem to_bmi(const Instance& inst);
/// Control kinds only; throws SchemaMismatch otherwise.
LtiSystem to_system(const Instance& inst);
/// Instance ε, or default_epsilon for the system.
double instance_epsilon(const Instance& inst);
/// Throws NoConvexification when no lossless map is known for the instance.
ChangeOfVariables make_map(const Instance& inst);

/// Canonical text form of any JSON value (see Instance).
std::string canonical_dump(const nlohmann::json& j);

nlohmann::json certificate_json(const DualityCertificate& cert, const std::string& instance_name);
nlohmann::json stabilization_json(const StabilizationResult& r, const LtiSystem& sys, const std::string& instance_name);
nlohmann::json spotcheck_json(const SpotCheckReport& r);
nlohmann::json matrix_json(const Eigen::MatrixXd& m);

}  // namespace lcvx
