#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>

namespace kpp {

/// Exact integration of a piecewise-polynomial interpolant against the
/// kernel u^power * exp(-z u) on one cell u in [0, dt]. The interpolant is
/// cubic through four neighbouring nodes (one-sided at the two ends) or
/// linear through the cell endpoints.
enum class QuadratureOrder { Linear = 1, Cubic = 3 };

struct CellWeights {
    QuadratureOrder order = QuadratureOrder::Cubic;
    /// stencil[kind] lists node offsets relative to the cell's left node;
    /// kind 0 is the first cell, 1 interior, 2 the last cell.
    std::array<std::array<int, 4>, 3> offsets{};
    std::array<std::array<double, 4>, 3> w{};
    int width = 4;
};

CellWeights cell_weights(double z, int power, double dt, QuadratureOrder order);

/// Contribution of cell [t_i, t_{i+1}] for grid size n.
inline int cell_kind(Eigen::Index i, Eigen::Index n) {
    if (i == 0) return 0;
    if (i == n - 2) return 2;
    return 1;
}

/// I_i = sum over cells right of t_i of the weighted kernel integral with the
/// recurrence I_i = e^{-z dt} I_{i+1} + cell_i, I_{n-1} = tail.
void backward_pass(const Eigen::VectorXd& F, const CellWeights& cw, double decay, double tail, Eigen::VectorXd& out);

/// Sparse matrix W with (W F)_i = cell_i(F) and an empty last row.
Eigen::SparseMatrix<double> cell_matrix(const CellWeights& cw, Eigen::Index n);

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int m, Eigen::VectorXd& x, Eigen::VectorXd& w);

}  // namespace kpp
