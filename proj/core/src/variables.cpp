#include "lcvx/variables.hpp"

#include <algorithm>
#include <utility>

#include "lcvx/errors.hpp"

namespace lcvx {

VarBlock VarBlock::scalar(std::string name, double lower, double upper) {
  return VarBlock{std::move(name), VarKind::Scalar, 1, 1, lower, upper};
}

VarBlock VarBlock::vector(std::string name, int n) {
  return VarBlock{std::move(name), VarKind::Vector, n, 1};
}

VarBlock VarBlock::matrix(std::string name, int rows, int cols) {
  return VarBlock{std::move(name), VarKind::Matrix, rows, cols};
}

VarBlock VarBlock::symmetric(std::string name, int n) {
  return VarBlock{std::move(name), VarKind::Symmetric, n, n};
}

int VarBlock::coordinates() const {
  switch (kind) {
    case VarKind::Scalar:
      return 1;
    case VarKind::Vector:
      return rows;
    case VarKind::Matrix:
      return rows * cols;
    case VarKind::Symmetric:
      return rows * (rows + 1) / 2;
  }
  return 0;
}

VariableTable::VariableTable(std::vector<VarBlock> blocks) {
  for (auto& b : blocks) add(std::move(b));
}

int VariableTable::add(VarBlock block) {
  if (block.name.empty()) throw Error("VariableTable: empty block name");
  if (contains(block.name)) throw Error("VariableTable: duplicate block '" + block.name + "'");
  if (block.rows < 1 || block.cols < 1) {
    throw DimensionMismatch("VariableTable: block '" + block.name + "' has empty shape");
  }
  if (block.kind == VarKind::Scalar && (block.rows != 1 || block.cols != 1)) {
    throw DimensionMismatch("VariableTable: scalar block must be 1x1");
  }
  if (block.kind == VarKind::Symmetric && block.rows != block.cols) {
    throw DimensionMismatch("VariableTable: symmetric block must be square");
  }
  const int first = size_;
  offsets_.push_back(first);
  size_ += block.coordinates();
  blocks_.push_back(std::move(block));
  return first;
}

bool VariableTable::contains(const std::string& name) const {
  return std::any_of(blocks_.begin(), blocks_.end(), [&](const VarBlock& b) { return b.name == name; });
}

const VarBlock& VariableTable::block(const std::string& name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw MissingBlock("unknown variable block '" + name + "'");
}

int VariableTable::offset(const std::string& name) const {
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (blocks_[k].name == name) return offsets_[k];
  }
  throw MissingBlock("unknown variable block '" + name + "'");
}

int VariableTable::index(const std::string& name, int i, int j) const {
  const VarBlock& b = block(name);
  const int base = offset(name);
  if (i < 0 || j < 0 || i >= b.rows || j >= b.cols) {
    throw DimensionMismatch("VariableTable::index: entry out of range in '" + name + "'");
  }
  switch (b.kind) {
    case VarKind::Scalar:
      return base;
    case VarKind::Vector:
      return base + i;
    case VarKind::Matrix:
      return base + i * b.cols + j;
    case VarKind::Symmetric: {
      if (i > j) std::swap(i, j);
      // Rows 0..i-1 of the upper triangle hold n + (n-1) + ... entries.
      return base + i * b.rows - i * (i - 1) / 2 + (j - i);
    }
  }
  return base;
}

Eigen::VectorXd VariableTable::pack(const Assignment& a) const {
  Eigen::VectorXd v(size_);
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const VarBlock& b = blocks_[k];
    const auto it = a.find(b.name);
    if (it == a.end()) throw MissingBlock("assignment lacks block '" + b.name + "'");
    const Eigen::MatrixXd& m = it->second;
    if (m.rows() != b.rows || m.cols() != b.cols) {
      throw DimensionMismatch("assignment block '" + b.name + "' has wrong shape");
    }
    int pos = offsets_[k];
    switch (b.kind) {
      case VarKind::Scalar:
      case VarKind::Vector:
        for (int i = 0; i < b.rows; ++i) v(pos++) = m(i, 0);
        break;
      case VarKind::Matrix:
        for (int i = 0; i < b.rows; ++i) {
          for (int j = 0; j < b.cols; ++j) v(pos++) = m(i, j);
        }
        break;
      case VarKind::Symmetric:
        for (int i = 0; i < b.rows; ++i) {
          for (int j = i; j < b.cols; ++j) v(pos++) = 0.5 * (m(i, j) + m(j, i));
        }
        break;
    }
  }
  return v;
}

Assignment VariableTable::unpack(const Eigen::VectorXd& v) const {
  if (v.size() != size_) throw DimensionMismatch("VariableTable::unpack: wrong vector length");
  Assignment a;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const VarBlock& b = blocks_[k];
    Eigen::MatrixXd m(b.rows, b.cols);
    int pos = offsets_[k];
    switch (b.kind) {
      case VarKind::Scalar:
      case VarKind::Vector:
        for (int i = 0; i < b.rows; ++i) m(i, 0) = v(pos++);
        break;
      case VarKind::Matrix:
        for (int i = 0; i < b.rows; ++i) {
          for (int j = 0; j < b.cols; ++j) m(i, j) = v(pos++);
        }
        break;
      case VarKind::Symmetric:
        for (int i = 0; i < b.rows; ++i) {
          for (int j = i; j < b.cols; ++j) {
            m(i, j) = v(pos);
            m(j, i) = v(pos);
            ++pos;
          }
        }
        break;
    }
    a.emplace(b.name, std::move(m));
  }
  return a;
}

}  // namespace lcvx
