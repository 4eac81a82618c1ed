#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lcvx {

enum class VarKind { Scalar, Vector, Matrix, Symmetric };

/// A named decision-variable block. Every scalar entry of the block shares
/// the same box [lower, upper], which only the grid oracles consult.
struct VarBlock {
  std::string name;
  VarKind kind = VarKind::Scalar;
  int rows = 1;
  int cols = 1;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  static VarBlock scalar(std::string name, double lower = -std::numeric_limits<double>::infinity(),
                         double upper = std::numeric_limits<double>::infinity());
  static VarBlock vector(std::string name, int n);
  static VarBlock matrix(std::string name, int rows, int cols);
  static VarBlock symmetric(std::string name, int n);

  /// Number of scalar coordinates. Symmetric blocks store their upper
  /// triangle only, row by row.
  int coordinates() const;
};

/// Values for variable blocks, keyed by block name. Scalars are 1x1 and
/// vectors are n x 1.
using Assignment = std::map<std::string, Eigen::MatrixXd>;

/// Maps structured blocks onto a flat coordinate vector and back.
class VariableTable {
 public:
  VariableTable() = default;
  explicit VariableTable(std::vector<VarBlock> blocks);

  /// Appends a block and returns its first coordinate.
  int add(VarBlock block);

  int size() const { return size_; }
  const std::vector<VarBlock>& blocks() const { return blocks_; }
  bool contains(const std::string& name) const;
  const VarBlock& block(const std::string& name) const;
  int offset(const std::string& name) const;

  /// Flattens `a`; throws MissingBlock when a declared block is absent.
  Eigen::VectorXd pack(const Assignment& a) const;
  Assignment unpack(const Eigen::VectorXd& v) const;

  /// Coordinate index of entry (i, j) of block `name`. For symmetric blocks
  /// (i, j) and (j, i) share a coordinate.
  int index(const std::string& name, int i = 0, int j = 0) const;

 private:
  std::vector<VarBlock> blocks_;
  std::vector<int> offsets_;
  int size_ = 0;
};

}  // namespace lcvx
