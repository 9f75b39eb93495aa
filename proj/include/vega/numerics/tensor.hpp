#pragma once

#include <Eigen/Core>
#include <array>
#include <sstream>
#include <string>
#include <vector>

#include "vega/core/error.hpp"

namespace vega::numerics {

using Index = Eigen::Index;

/// Dense row-major tensor of rank <= 2. Scalars are 1x1, vectors are 1xN.
template <typename Scalar>
using Tensor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic, Eigen::RowMajor>;

using Shape = std::array<Index, 2>;

template <typename Derived>
Shape shape_of(const Eigen::DenseBase<Derived>& t) {
  return {t.rows(), t.cols()};
}

inline std::string shape_string(const Shape& s) {
  std::ostringstream os;
  os << '[' << s[0] << 'x' << s[1] << ']';
  return os.str();
}

inline void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) {
    throw InvalidArgument(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                          shape_string(b));
  }
}

/// A named trainable tensor plus its gradient accumulator.
template <typename Scalar>
struct Parameter {
  std::string name;
  Tensor<Scalar> value;
  Tensor<Scalar> grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

}  // namespace vega::numerics
