#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace vgne {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Smallest eigenvalue of a symmetric matrix (only the lower triangle is read).
double min_eigenvalue(const Matrix& symmetric);
double max_eigenvalue(const Matrix& symmetric);

bool is_symmetric(const Matrix& a, double tol = 0.0);

// Symmetric with strictly positive eigenvalues.
bool is_spd(const Matrix& a);

Matrix block_diagonal(std::span<const Matrix> blocks);

// Spectral norm.
double operator_norm(const Matrix& a);

bool all_finite(const Vector& v);

// sqrt(v' G v)
double weighted_norm(const Vector& v, const Matrix& g);

}  // namespace vgne
