// SPDX-License-Identifier: Apache-2.0
#include "risopt/linalg.hpp"

#include <Eigen/Eigenvalues>

namespace risopt::linalg {

MatrixXcd hermitian_sqrt(const MatrixXcd& R, double clamp) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(hermitian_part(R));
    VectorXd lambda = eig.eigenvalues();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        lambda[i] = lambda[i] < clamp ? 0.0 : std::sqrt(lambda[i]);
    }
    const MatrixXcd& U = eig.eigenvectors();
    return U * lambda.cast<cd>().asDiagonal() * U.adjoint();
}

bool all_finite(const MatrixXcd& A) {
    return A.allFinite();
}

}  // namespace risopt::linalg
