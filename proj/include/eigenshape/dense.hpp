#pragma once

#include <vector>

namespace eigenshape {

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// `a` is row-major n*n and is destroyed. Eigenvalues come back ascending,
/// eigenvectors as columns of `vecs` (row-major, vecs[i*n+j] = component i
/// of eigenvector j).
void jacobi_eigh(std::vector<double>& a, int n, std::vector<double>& eigenvalues,
                 std::vector<double>& vecs);

}  // namespace eigenshape
