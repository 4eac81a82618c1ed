// Acceptance harness: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lcvx/cert.hpp"
#include "lcvx/control.hpp"
#include "lcvx/convexify.hpp"
#include "lcvx/corpus.hpp"
#include "lcvx/errors.hpp"
#include "lcvx/symmat.hpp"
#include "oracles.hpp"

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "failed: " << what << "; ";
    pass = pass && ok;
  }
};

/// (p, d) pairs gathered by criteria 1 to 5 for the weak-duality sweep.
std::vector<std::pair<double, double>> g_duality_pairs;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

lcvx::BmiProblem widen(lcvx::BmiProblem p, double lo, double hi) {
  auto blocks = p.variables.blocks();
  for (auto& b : blocks) {
    b.lower = lo;
    b.upper = hi;
  }
  p.variables = lcvx::VariableTable(blocks);
  return p;
}

void record(double p, double d) { g_duality_pairs.emplace_back(p, d); }

void criterion1(Outcome& o) {
  const auto t0 = Clock::now();
  const auto inst = lcvx::builtin("example1");
  const auto cert = lcvx::certify(lcvx::to_bmi(inst), lcvx::make_map(inst));
  const double dt = seconds_since(t0);
  record(cert.primal_value, cert.dual_value);
  o.require(std::abs(cert.primal_value - 1.0) <= 1e-6, "p* = 1");
  o.require(std::abs(cert.dual_value - 1.0) <= 1e-6, "d* = 1");
  o.require(cert.verdict == lcvx::Verdict::StrongDualityVerified, "verdict");
  o.require(dt < 1.0, "runtime < 1 s");
  o.detail << "p*=" << cert.primal_value << " d*=" << cert.dual_value << " verdict=" << to_string(cert.verdict)
           << " time=" << dt << "s";
}

void criterion2(Outcome& o) {
  const auto p = widen(lcvx::example1_problem(), -10.0, 10.0);
  for (double lambda : {0.0, 0.25, 0.5, 1.0}) {
    const auto r = lcvx::dual_oracle(p, lcvx::Multipliers::scalars({lambda}), 4001);
    o.require(!r.unbounded_below && std::abs(r.value - oracle::example1_dual(lambda)) <= 1e-3,
              "g(" + std::to_string(lambda) + ")");
    record(1.0, r.value);
    o.detail << "g(" << lambda << ")=" << r.value << " ";
  }
  const auto r = lcvx::dual_oracle(p, lcvx::Multipliers::scalars({2.0}), 4001);
  o.require(r.unbounded_below, "g(2) unbounded below");
  o.detail << "g(2)=" << (r.unbounded_below ? "-inf" : std::to_string(r.value));
}

void criterion3(Outcome& o) {
  const auto inst = lcvx::builtin("example2");
  const auto cert = lcvx::certify(lcvx::to_bmi(inst), lcvx::make_map(inst));
  record(cert.primal_value, cert.dual_value);
  o.require(std::abs(cert.primal_value - 2.0) <= 1e-6, "p* = 2");
  o.require(std::abs(cert.dual_value - 2.0) <= 1e-6, "d* = 2");
  const auto p = widen(lcvx::example2_problem(), -10.0, 10.0);
  const auto r = lcvx::dual_oracle(p, lcvx::Multipliers::scalars({1.0, 2.0}), 401);
  record(2.0, r.value);
  o.require(!r.unbounded_below && std::abs(r.value - oracle::example2_dual_at_unit_lambda1(2.0)) <= 1e-3,
            "g(1, 2) = 2");
  o.detail << "p*=" << cert.primal_value << " d*=" << cert.dual_value << " g(1,2)=" << r.value
           << " verdict=" << to_string(cert.verdict);
}

lcvx::LtiSystem harness_system(std::uint64_t seed, lcvx::Clock clock) {
  const int n = 1 + static_cast<int>(seed % 6);
  const int m = 1 + static_cast<int>(seed % std::min(n, 2));
  return lcvx::random_stabilizable(n, m, seed, clock);
}

lcvx::SynthesisOptions harness_options() {
  lcvx::SynthesisOptions opts;
  opts.samples = 10;
  return opts;
}

void criterion4(Outcome& o) {
  const auto t0 = Clock::now();
  double worst_abscissa = -1e300;
  double worst_residual = -1e300;
  double worst_gap = 0.0;
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto sys = harness_system(seed, lcvx::Clock::ContinuousTime);
    try {
      const auto r = lcvx::ct_synthesize(sys, harness_options());
      record(r.primal_value, r.dual_value);
      if (r.certificate) record(r.certificate->primal_value, r.certificate->dual_value);
      const double abscissa = lcvx::spectral_abscissa(sys.A + sys.B * r.F);
      const double residual = lcvx::ct_bilinear_residual(sys, r.P, r.F, r.epsilon);
      const double gap = std::abs(r.primal_value - r.dual_value) / (1.0 + std::abs(r.primal_value));
      worst_abscissa = std::max(worst_abscissa, abscissa);
      worst_residual = std::max(worst_residual, residual);
      worst_gap = std::max(worst_gap, gap);
      const bool good = abscissa < 0.0 && residual <= 1e-7 && gap <= 1e-6;
      o.require(good, "seed " + std::to_string(seed));
      ok += good;
    } catch (const std::exception& e) {
      o.require(false, "seed " + std::to_string(seed) + " threw " + e.what());
    }
  }
  const double dt = seconds_since(t0);
  o.require(dt < 60.0, "runtime < 60 s");
  o.detail << ok << "/50 ok, max Re eig=" << worst_abscissa << " max residual=" << worst_residual
           << " max rel gap=" << worst_gap << " time=" << dt << "s";
}

bool nsd(double max_eig) { return max_eig <= 1e-7; }

void criterion5(Outcome& o) {
  const auto t0 = Clock::now();
  double worst_radius = 0.0;
  double worst_residual = -1e300;
  double worst_gap = 0.0;
  int ok = 0;
  int schur_checks = 0;
  int disagreements = 0;
  int samples = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto sys = harness_system(seed, lcvx::Clock::DiscreteTime);
    try {
      const auto r = lcvx::dt_synthesize(sys, harness_options());
      record(r.primal_value, r.dual_value);
      if (r.certificate) record(r.certificate->primal_value, r.certificate->dual_value);
      const double radius = lcvx::spectral_radius(sys.A + sys.B * r.F);
      const double residual = lcvx::dt_bilinear_residual(sys, r.P, r.F, r.epsilon);
      const double gap = std::abs(r.primal_value - r.dual_value) / (1.0 + std::abs(r.primal_value));
      worst_radius = std::max(worst_radius, radius);
      worst_residual = std::max(worst_residual, residual);
      worst_gap = std::max(worst_gap, gap);

      const bool block = nsd(lcvx::max_eig(lcvx::dt_block_lmi(sys, r.P, r.M, r.epsilon)));
      const bool nonlinear = nsd(lcvx::max_eig(lcvx::dt_nonlinear_form(sys, r.P, r.M, r.epsilon)));
      ++schur_checks;
      disagreements += block != nonlinear;

      // Four strictly feasible target points per system, 200 in total.
      const auto c = lcvx::control_map(sys, r.epsilon);
      for (const auto& v : lcvx::sample_region(c.region, 4, seed)) {
        const auto a = c.target.variables.unpack(v);
        const double eff = r.epsilon - a.at("t")(0, 0);
        const bool b = nsd(lcvx::max_eig(lcvx::dt_block_lmi(sys, a.at("P"), a.at("M"), eff)));
        const bool n = nsd(lcvx::max_eig(lcvx::dt_nonlinear_form(sys, a.at("P"), a.at("M"), eff)));
        ++samples;
        disagreements += b != n;
      }

      const bool good = radius < 1.0 && residual <= 1e-7 && gap <= 1e-6 && block && nonlinear;
      o.require(good, "seed " + std::to_string(seed));
      ok += good;
    } catch (const std::exception& e) {
      o.require(false, "seed " + std::to_string(seed) + " threw " + e.what());
    }
  }
  const double dt = seconds_since(t0);
  o.require(samples == 200, "200 feasible Schur samples");
  o.require(disagreements == 0, "Schur disagreements");
  o.require(dt < 60.0, "runtime < 60 s");
  o.detail << ok << "/50 ok, max rho=" << worst_radius << " max residual=" << worst_residual
           << " max rel gap=" << worst_gap << " schur checks=" << schur_checks + samples
           << " disagreements=" << disagreements << " time=" << dt << "s";
}

void criterion6(Outcome& o) {
  lcvx::LtiSystem di;
  di.A = Eigen::MatrixXd(2, 2);
  di.A << 0, 1, 0, 0;
  di.B = Eigen::MatrixXd(2, 1);
  di.B << 0, 1;
  const auto dt_inst = lcvx::builtin("dt_unstable_scalar");
  const std::vector<lcvx::ChangeOfVariables> maps{
      lcvx::example1_map(), lcvx::example2_map(), lcvx::control_map(di, 1e-3),
      lcvx::control_map(lcvx::to_system(dt_inst), lcvx::instance_epsilon(dt_inst))};
  for (const auto& c : maps) {
    const auto r = lcvx::surjection_spotcheck(c, 100, 0);
    const bool good = r.pass && r.samples == 100 && r.worst_roundtrip <= 1e-8 && r.worst_source_violation <= 1e-7;
    o.require(good, "surjection " + to_string(c.kind));
    o.detail << to_string(c.kind) << " roundtrip=" << r.worst_roundtrip << " ";
  }
  const auto inc1 = lcvx::inclusion_spotcheck(lcvx::example1_problem(), lcvx::example1_map(), 200, 0);
  const auto inc2 = lcvx::inclusion_spotcheck(lcvx::example2_problem(), lcvx::example2_map(), 200, 0);
  o.require(inc1.pass && inc1.samples == 200, "inclusion example1");
  o.require(inc2.pass && inc2.samples == 200, "inclusion example2");

  auto corrupted = lcvx::example1_map();
  corrupted.forward = [](const lcvx::Assignment& x) {
    const double xv = x.at("x")(0, 0);
    return lcvx::Assignment{{"v", Eigen::MatrixXd::Constant(1, 1, -xv * xv + 1.0)}};
  };
  const auto neg = lcvx::inclusion_spotcheck(lcvx::example1_problem(), corrupted, 200, 0);
  o.require(!neg.pass && neg.failures >= 1, "negative control fails");
  o.detail << "inclusion ex1/ex2 pass, negative control failures=" << neg.failures << "/200";
}

void criterion7(Outcome& o) {
  double worst = -1e300;
  for (const auto& [p, d] : g_duality_pairs) {
    if (std::isinf(d) && d < 0) continue;
    worst = std::max(worst, d - p);
    o.require(d <= p + 1e-6, "d <= p + 1e-6");
  }
  o.require(g_duality_pairs.size() >= 100, "enough evidence");
  o.detail << g_duality_pairs.size() << " pairs, max(d - p)=" << worst;
}

void criterion8(Outcome& o) {
  auto expect_throw = [&](const lcvx::LtiSystem& sys, const std::string& label) {
    try {
      lcvx::synthesize(sys);
      o.require(false, label + " returned a gain");
    } catch (const lcvx::NotStabilizable&) {
      o.detail << label << " NotStabilizable ";
    }
  };
  expect_throw({Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::MatrixXd::Zero(1, 1), lcvx::Clock::ContinuousTime},
               "CT A=1 B=0");
  expect_throw({Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::MatrixXd::Zero(1, 1), lcvx::Clock::DiscreteTime},
               "DT A=2 B=0");
}

void criterion9(Outcome& o) {
  std::mt19937_64 rng(9);
  double worst_rec = 0.0;
  double worst_orth = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 8;
    const lcvx::SymMat s(oracle::random_symmetric(rng, n));
    const auto d = lcvx::sym_eig(s);
    const double rec = (d.vectors * d.values.asDiagonal() * d.vectors.transpose() - s.matrix()).norm() /
                       std::max(1.0, s.frobenius_norm());
    const double orth = (d.vectors.transpose() * d.vectors - Eigen::MatrixXd::Identity(n, n)).norm();
    worst_rec = std::max(worst_rec, rec);
    worst_orth = std::max(worst_orth, orth);
  }
  o.require(worst_rec <= 1e-10 && worst_orth <= 1e-10, "eigen reconstruction");

  double worst_chol = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 8;
    const lcvx::SymMat s(oracle::random_spd(rng, n));
    const Eigen::MatrixXd l = lcvx::cholesky(s);
    worst_chol = std::max(worst_chol, (l * l.transpose() - s.matrix()).norm() / s.frobenius_norm());
  }
  o.require(worst_chol <= 1e-10, "Cholesky");

  int mismatches = 0;
  std::uniform_real_distribution<double> shift(-2.0, 6.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int nx = 1 + trial % 4;
    const int nz = 1 + (trial / 4) % 4;
    const int n = nx + nz;
    const Eigen::MatrixXd m = oracle::random_symmetric(rng, n) - shift(rng) * Eigen::MatrixXd::Identity(n, n);
    const lcvx::SymMat full(m);
    const double top = lcvx::max_eig(full);
    if (std::abs(top) < 1e-9) continue;
    bool rhs = lcvx::max_eig(lcvx::SymMat(m.bottomRightCorner(nz, nz))) < 0.0;
    if (rhs) rhs = lcvx::max_eig(lcvx::schur_complement(full, nx)) < 0.0;
    mismatches += (top < 0.0) != rhs;
  }
  o.require(mismatches == 0, "Schur equivalence");
  o.detail << "eig rec=" << worst_rec << " orth=" << worst_orth << " chol=" << worst_chol
           << " schur mismatches=" << mismatches << "/500";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"example 1 reproduction", criterion1},
      {"example 1 dual branches", criterion2},
      {"example 2 reproduction", criterion3},
      {"continuous-time synthesis", criterion4},
      {"discrete-time synthesis", criterion5},
      {"lossless-map properties", criterion6},
      {"weak duality", criterion7},
      {"unstabilizable detection", criterion8},
      {"numerics kernel", criterion9},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      criteria[k].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
