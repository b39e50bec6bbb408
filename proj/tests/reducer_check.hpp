#pragma once

// Compares library reducer output with the rational oracle up to the choice of quotient basis.

#include "algmech/symplectic.hpp"
#include "oracles.hpp"

namespace oracle {

inline algmech::SymplecticLieAlgebra as_symplectic_lie_algebra(const LieInstance& inst) {
    const int n = static_cast<int>(inst.c.size());
    return {to_structure(inst.c), to_double(inst.omega, n, n)};
}

inline std::vector<Vector> h_basis(const RMatrix& H) {
    const int n = static_cast<int>(H.size()), p = static_cast<int>(H[0].size());
    const Matrix M = to_double(H, n, p);
    std::vector<Vector> out;
    for (int j = 0; j < p; ++j) out.push_back(M.col(j));
    return out;
}

/// Max discrepancy between the library reduction and the rational oracle, through the change of
/// quotient basis that maps the library complement onto the oracle complement modulo the kernel.
inline double reduction_discrepancy(const algmech::LieAlgebraReduction& lib, const ReducedAlgebra& ref, int n) {
    const int r = static_cast<int>(ref.complement[0].size());
    const int kd = ref.kernel_dim;
    if (lib.complement_basis.cols() != r || lib.kernel_basis.cols() != kd) return 1.0;
    Matrix basis(n, r + kd);
    basis << to_double(ref.complement, n, r), to_double(ref.kernel, n, kd);
    // lib complement vector j = sum_i T(i, j) ref_complement_i + kernel part.
    const Matrix coeff = basis.colPivHouseholderQr().solve(lib.complement_basis);
    double worst = (basis * coeff - lib.complement_basis).lpNorm<Eigen::Infinity>();
    const Matrix T = coeff.topRows(r);
    // Kernel spans agree.
    if (kd > 0) {
        const Matrix K = to_double(ref.kernel, n, kd);
        const Matrix kc = K.colPivHouseholderQr().solve(lib.kernel_basis);
        worst = std::max(worst, (K * kc - lib.kernel_basis).lpNorm<Eigen::Infinity>());
    }
    const Matrix Wref = to_double(ref.omega, r, r);
    worst = std::max(worst, (T.transpose() * Wref * T - lib.reduced.omega).lpNorm<Eigen::Infinity>());
    const algmech::StructureConstants cref = to_structure(ref.c);
    const Matrix Tinv = T.inverse();
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j) {
            const Vector mapped = Tinv * cref.apply(T.col(i), T.col(j));
            worst = std::max(worst, (mapped - lib.reduced.structure_constants.column(i, j)).lpNorm<Eigen::Infinity>());
        }
    return worst;
}

}  // namespace oracle
