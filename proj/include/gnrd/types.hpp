#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace gnrd {

template <typename FloatType>
struct Types {
    using Scalar = FloatType;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
};

// Everything numeric in this library runs in double precision.
using Matrix = Types<double>::Matrix;
using Vector = Types<double>::Vector;
using Index = Eigen::Index;

using MatrixRef = Eigen::Ref<const Matrix>;
using VectorRef = Eigen::Ref<const Vector>;

// Batches store one sample per column: a batch of n points in R^d is d x n.
using Batch = Matrix;

}  // namespace gnrd
