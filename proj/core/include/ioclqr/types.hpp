#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace ioclqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Invalid or inconsistent user input (bad dimensions, violated preconditions).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical operation failed in a way that signals corrupted or
/// out-of-contract data (e.g. a factorization that must succeed did not).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem or serialization failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline Matrix symmetrized(const Matrix& x) { return 0.5 * (x + x.transpose()); }

inline double min_eigenvalue(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace ioclqr
