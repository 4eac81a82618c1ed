#pragma once

#include <Eigen/Core>

namespace lcvx {

enum class Clock { ContinuousTime, DiscreteTime };

/// ẋ = Ax + Bu (continuous time) or x⁺ = Ax + Bu (discrete time).
struct LtiSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Clock clock = Clock::ContinuousTime;

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(B.cols()); }
  /// Throws DimensionMismatch or Error on inconsistent or non-finite data.
  void validate() const;
};

}  // namespace lcvx
