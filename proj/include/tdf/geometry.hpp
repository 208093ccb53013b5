#pragma once

#include <memory>
#include <vector>

#include "tdf/tensor.hpp"
#include "tdf/tucker.hpp"

namespace tdf {

/// Condition-number cliff shared by the chart and tangent computations.
inline constexpr double max_condition = 1e12;

/// Reference point of a chart: a minimal Tucker tensor in orthonormal gauge
/// together with orthonormal complements W_k of each factor span.
///
/// Cheap to copy; the data is immutable and shared.
class BasePoint {
public:
    BasePoint() = default;

    const TuckerTensor& point() const { return data_->point; }
    const Matrix& factor(Index k) const { return data_->point.factor(k); }
    const DenseTensor& core() const { return data_->point.core(); }
    /// n_k x (n_k - r_k) orthonormal basis of span(factor k)^perp.
    const Matrix& complement(Index k) const { return data_->complements.at(static_cast<std::size_t>(k)); }
    const std::vector<Matrix>& complements() const { return data_->complements; }
    /// Dense form of the base point.
    const DenseTensor& dense() const { return data_->dense; }

    Index order() const { return data_->point.order(); }
    Shape shape() const { return data_->shape; }
    Rank rank() const { return data_->point.rank(); }

    bool valid() const noexcept { return data_ != nullptr; }

    /// Dimension of the tangent space: prod r_k + sum (n_k - r_k) r_k.
    Index tangent_dimension() const;

    friend BasePoint make_base(const TuckerTensor& v, double tol);

private:
    struct Data {
        TuckerTensor point;
        std::vector<Matrix> complements;
        DenseTensor dense;
        Shape shape;
    };
    std::shared_ptr<const Data> data_;
};

/// Builds the chart reference at v. Non-orthonormal factors are re-gauged by QR,
/// so chart coordinates always refer to the orthonormal representative.
BasePoint make_base(const TuckerTensor& v, double tol = default_rank_tol);

/// Chart coordinates: L_k holds the complement coordinates of (id + L_k) applied
/// to the factor columns, E is the core in those bases.
struct ChartPoint {
    std::vector<Matrix> L; ///< (n_k - r_k) x r_k
    DenseTensor E;
};

/// Chart point of the base itself: (0, core).
ChartPoint origin(const BasePoint& b);

/// Factors U_k + W_k L_k with core E.
TuckerTensor retract(const BasePoint& b, const ChartPoint& c);

/// Coordinates of w in the chart at b. Throws CommonComplementViolation if
/// some U_k^T w.factor_k is singular (cond > 1e12).
ChartPoint invert_chart(const BasePoint& b, const TuckerTensor& w);

/// Overlap map invert_chart(b2, retract(b1, c1)).
ChartPoint transition(const BasePoint& b1, const BasePoint& b2, const ChartPoint& c1);

/// Tangent direction at a base point in the factor-orthogonal gauge
/// (factor_k^T dU_k = 0).
struct TangentVector {
    BasePoint base;
    DenseTensor dC;
    std::vector<Matrix> dU;

    /// max_k ||factor_k^T dU_k|| / ||dU_k||.
    double gauge_residual() const;
};

TangentVector zero_tangent(const BasePoint& b);

/// Dense form of the tangent vector.
DenseTensor embed_tangent(const TangentVector& tv);

/// Orthogonal projection of w onto the tangent space, in tangent coordinates.
/// No membership check; throws SingularCore on a rank-deficient core Gram.
TangentVector project_tangent(const BasePoint& b, const DenseTensor& w);

/// Inverse of embed_tangent. Throws NotInTangentSpace when w is farther than
/// rel_tol * ||w|| from the tangent space.
TangentVector extract_tangent(const BasePoint& b, const DenseTensor& w, double rel_tol = 1e-8);

/// Euclidean-orthonormal basis of the tangent space: the core block first,
/// then one block per mode.
std::vector<DenseTensor> tangent_basis(const BasePoint& b);

/// Frobenius(dC) + sum_k ||dU_k||_{U_k -> V_k}, the operator norms taken with
/// the mode norms of `nrm`.
double tangent_norm(const TangentVector& tv, const AmbientNorm& nrm);

} // namespace tdf
