// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risopt/core_model.hpp"

namespace risopt::linalg {

/// Hermitian PSD square root through an eigendecomposition; eigenvalues below
/// `clamp` are set to zero.
MatrixXcd hermitian_sqrt(const MatrixXcd& R, double clamp = 1e-12);

/// 0.5 * (V + V^H)
inline MatrixXcd hermitian_part(const MatrixXcd& V) { return 0.5 * (V + V.adjoint()); }

bool all_finite(const MatrixXcd& A);

}  // namespace risopt::linalg
