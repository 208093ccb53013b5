#pragma once

#include <vector>

#include "tdf/tensor.hpp"

namespace tdf {

inline constexpr double default_rank_tol = 1e-10;

/// Tucker ranks (r_1, ..., r_d).
struct Rank {
    std::vector<Index> r;

    Index order() const noexcept { return static_cast<Index>(r.size()); }
    Index operator[](Index k) const { return r[static_cast<std::size_t>(k)]; }

    /// r_k <= n_k and r_k <= prod_{j != k} r_j for every mode.
    bool admissible(const Shape& shape) const;

    friend bool operator==(const Rank&, const Rank&) = default;
};

/// core x_1 U_1 x_2 ... x_d U_d with U_k of size n_k x r_k.
class TuckerTensor {
public:
    TuckerTensor() = default;
    TuckerTensor(DenseTensor core, std::vector<Matrix> factors);

    const DenseTensor& core() const noexcept { return core_; }
    const std::vector<Matrix>& factors() const noexcept { return factors_; }
    const Matrix& factor(Index k) const { return factors_.at(static_cast<std::size_t>(k)); }

    Index order() const noexcept { return core_.order(); }
    Shape shape() const;
    Rank rank() const { return Rank{core_.shape().dims()}; }

private:
    DenseTensor core_;
    std::vector<Matrix> factors_;
};

/// Orthonormal basis of span(U_mode^min(t)).
struct MinimalSubspace {
    Index mode = 0;
    Matrix basis;
};

/// Flips column signs so the largest-magnitude entry of each column is positive.
void fix_column_signs(Matrix& m);

/// Singular values of the mode unfolding, descending.
Vector mode_singular_values(const DenseTensor& t, Index mode);

/// Number of singular values of the mode unfolding above tol * sigma_max.
Index alpha_rank(const DenseTensor& t, Index mode, double tol = default_rank_tol);

Rank tucker_ranks(const DenseTensor& t, double tol = default_rank_tol);

MinimalSubspace minimal_subspace(const DenseTensor& t, Index mode, double tol = default_rank_tol);

/// Minimal Tucker representation with orthonormal sign-fixed factors (HOSVD).
TuckerTensor to_tucker(const DenseTensor& t, double tol = default_rank_tol);

/// HOSVD truncation to a prescribed rank.
TuckerTensor hosvd_truncate(const DenseTensor& t, const Rank& rank);

DenseTensor tucker_to_dense(const TuckerTensor& u);

/// Independent factor columns and full-row-rank core unfoldings.
bool is_minimal(const TuckerTensor& u, double tol = default_rank_tol);

/// Same tensor with orthonormal factors (QR of each factor, R folded into the core).
/// Already-orthonormal factors are kept untouched.
TuckerTensor orthonormalize(const TuckerTensor& u);

} // namespace tdf
