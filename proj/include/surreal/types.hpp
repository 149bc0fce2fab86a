#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace surreal {

// Batches are stored one sample per row.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised by the optimizer when a gradient contains NaN or Inf.
class TrainingFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string shape_string(Eigen::Index rows, Eigen::Index cols);

// Throws ShapeError("<what>: expected RxC, got RxC") on mismatch.
void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& what);
void require_cols(const Matrix& m, Eigen::Index cols, const std::string& what);

// Keeps glibc from returning large temporaries to the kernel after every
// training step. Safe to call repeatedly; a no-op on other C libraries.
void tune_allocator();

}  // namespace surreal
