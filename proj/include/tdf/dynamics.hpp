#pragma once

#include <functional>
#include <limits>
#include <variant>
#include <vector>

#include "tdf/projection.hpp"
#include "tdf/tensor.hpp"
#include "tdf/tucker.hpp"

namespace tdf {

/// Sum over terms k of the elementary operators A_1^(k) (x) ... (x) A_d^(k).
class KroneckerSumOperator {
public:
    using Term = std::vector<Matrix>;

    KroneckerSumOperator() = default;
    explicit KroneckerSumOperator(std::vector<Term> terms);

    /// Single term of identities.
    static KroneckerSumOperator identity(const Shape& shape);
    /// sum_k I (x) ... (x) A_k (x) ... (x) I.
    static KroneckerSumOperator kronecker_sum(const std::vector<Matrix>& mode_ops);
    /// The zero operator on `shape` (no terms).
    static KroneckerSumOperator zero(const Shape& shape);

    const std::vector<Term>& terms() const noexcept { return terms_; }
    const Shape& shape() const noexcept { return shape_; }
    Index order() const noexcept { return shape_.order(); }

private:
    std::vector<Term> terms_;
    Shape shape_;
};

DenseTensor apply_operator(const KroneckerSumOperator& A, const DenseTensor& t);

/// <A (x)v, (x)v> computed mode by mode.
double rayleigh_quotient(const KroneckerSumOperator& A, const std::vector<Vector>& factors);

/// Matrix of the bilinear form a_k(z, y) = <A(z (x) rest), y (x) rest>, with
/// rest the product of the other unit factors.
Matrix mean_field(const KroneckerSumOperator& A, const std::vector<Vector>& factors, Index mode);

/// lambda (x) v_1 (x) ... (x) v_d with unit-norm v_k.
struct HartreeState {
    double lambda = 1.0;
    std::vector<Vector> factors;

    DenseTensor dense() const;
};

struct HartreeDerivative {
    double dlambda = 0.0;
    std::vector<Vector> dfactors;
};

HartreeDerivative hartree_rhs(const KroneckerSumOperator& A, const HartreeState& s);

/// Per-step diagnostics; NaN marks "not applicable".
struct StepDiagnostics {
    double projection_residual = std::numeric_limits<double>::quiet_NaN();
    /// min_k sigma_min / sigma_max of the core unfoldings
    double core_condition = std::numeric_limits<double>::quiet_NaN();
    double reference_error = std::numeric_limits<double>::quiet_NaN();
    /// max_k | ||v_k|| - 1 | before renormalization
    double norm_drift = std::numeric_limits<double>::quiet_NaN();
    /// max over stages and modes of |<dv_k, v_k>|
    double sphere_tangency = std::numeric_limits<double>::quiet_NaN();
    double lambda = std::numeric_limits<double>::quiet_NaN();
    /// lambda_0 exp(trapezoid integral of <A (x)v, (x)v>)
    double lambda_closed_form = std::numeric_limits<double>::quiet_NaN();
};

using State = std::variant<HartreeState, TuckerTensor, DenseTensor>;

DenseTensor dense(const State& s);

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<StepDiagnostics> diagnostics;

    std::size_t steps() const noexcept { return times.empty() ? 0 : times.size() - 1; }
    const State& final_state() const { return states.back(); }
};

/// Right-hand side F(t, u) of an ODE on the tensor space.
using Flow = std::function<DenseTensor(double, const DenseTensor&)>;

Flow linear_flow(const KroneckerSumOperator& A);

/// Reference solution on the full space for the error diagnostics.
using Reference = std::function<DenseTensor(double)>;

struct IntegratorOptions {
    /// store every state (otherwise only the initial and final ones)
    bool keep_states = true;
    Reference reference;
};

/// Classical RK4 on (lambda, v_1, ..., v_d) with renormalization after every step.
TrajectoryRecord integrate_hartree(const KroneckerSumOperator& A, const HartreeState& s0, double T, double dt,
                                   const IntegratorOptions& opts = {});

struct DlraOptions {
    Projector projector = Projector::hilbert;
    AmbientNorm norm = AmbientNorm::uniform(2.0);
    ProjectionOptions projection;
    bool keep_states = true;
    Reference reference;
};

/// Dirac-Frenkel reduced model: RK4 on (core, factors) in the factor-orthogonal
/// gauge with tangent-space projected right-hand sides, followed by an HOSVD
/// retraction to the rank of v0 at the end of each step.
TrajectoryRecord integrate_tucker_dlra(const Flow& F, const TuckerTensor& v0, double T, double dt,
                                       const DlraOptions& opts = {});

/// Largest total dimension accepted by reference_solve.
inline constexpr Index max_reference_size = 100000;

/// RK4 on the full space.
TrajectoryRecord reference_solve(const Flow& F, const DenseTensor& u0, double T, double dt, bool keep_states = true);
TrajectoryRecord reference_solve(const KroneckerSumOperator& A, const DenseTensor& u0, double T, double dt,
                                 bool keep_states = true);

/// Number of steps and the step sizes used to cover [0, T] with step dt; the
/// final step is shortened when dt does not divide T.
std::vector<double> step_sizes(double T, double dt);

} // namespace tdf
