#include "tdf/dynamics.hpp"

#include "tdf/geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace tdf {

KroneckerSumOperator::KroneckerSumOperator(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty())
        throw InvalidArgument("operator needs at least one term; use KroneckerSumOperator::zero for A = 0");
    std::vector<Index> dims;
    for (const auto& m : terms_.front())
        dims.push_back(m.rows());
    shape_ = Shape(dims);
    for (const auto& term : terms_) {
        if (static_cast<Index>(term.size()) != shape_.order())
            throw DimensionError("every operator term needs one matrix per mode");
        for (Index k = 0; k < shape_.order(); ++k) {
            const Matrix& m = term[static_cast<std::size_t>(k)];
            if (m.rows() != shape_[k] || m.cols() != shape_[k])
                throw DimensionError("operator term matrix " + std::to_string(k) + " is not " +
                                     std::to_string(shape_[k]) + " x " + std::to_string(shape_[k]));
            if (!m.allFinite())
                throw InvalidArgument("operator has non-finite entries");
        }
    }
}

KroneckerSumOperator KroneckerSumOperator::identity(const Shape& shape) {
    Term t;
    for (Index n : shape.dims())
        t.push_back(Matrix::Identity(n, n));
    return KroneckerSumOperator({t});
}

KroneckerSumOperator KroneckerSumOperator::kronecker_sum(const std::vector<Matrix>& mode_ops) {
    std::vector<Term> terms;
    for (std::size_t k = 0; k < mode_ops.size(); ++k) {
        Term t;
        for (std::size_t j = 0; j < mode_ops.size(); ++j)
            t.push_back(j == k ? mode_ops[j] : Matrix::Identity(mode_ops[j].rows(), mode_ops[j].rows()));
        terms.push_back(std::move(t));
    }
    return KroneckerSumOperator(std::move(terms));
}

KroneckerSumOperator KroneckerSumOperator::zero(const Shape& shape) {
    KroneckerSumOperator A;
    A.shape_ = shape;
    return A;
}

DenseTensor apply_operator(const KroneckerSumOperator& A, const DenseTensor& t) {
    if (!(t.shape() == A.shape()))
        throw DimensionError("operator shape " + A.shape().str() + " does not match tensor " + t.shape().str());
    DenseTensor out(t.shape());
    for (const auto& term : A.terms())
        out += multilinear_product(t, std::span<const Matrix>(term));
    return out;
}

namespace {

void check_factors(const KroneckerSumOperator& A, const std::vector<Vector>& factors) {
    if (static_cast<Index>(factors.size()) != A.order())
        throw DimensionError("need one factor per mode");
    for (Index k = 0; k < A.order(); ++k)
        if (factors[static_cast<std::size_t>(k)].size() != A.shape()[k])
            throw DimensionError("factor " + std::to_string(k) + " has the wrong length");
}

void check_unit(const std::vector<Vector>& factors) {
    for (const auto& v : factors)
        if (std::abs(v.norm() - 1.0) > 1e-8)
            throw InvalidArgument("mean field requires unit-norm factors");
}

} // namespace

double rayleigh_quotient(const KroneckerSumOperator& A, const std::vector<Vector>& factors) {
    check_factors(A, factors);
    double e = 0.0;
    for (const auto& term : A.terms()) {
        double p = 1.0;
        for (Index k = 0; k < A.order(); ++k) {
            const Vector& v = factors[static_cast<std::size_t>(k)];
            p *= v.dot(term[static_cast<std::size_t>(k)] * v);
        }
        e += p;
    }
    return e;
}

Matrix mean_field(const KroneckerSumOperator& A, const std::vector<Vector>& factors, Index mode) {
    check_factors(A, factors);
    check_unit(factors);
    A.shape().check_mode(mode);
    const Index n = A.shape()[mode];
    Matrix m = Matrix::Zero(n, n);
    for (const auto& term : A.terms()) {
        double c = 1.0;
        for (Index j = 0; j < A.order(); ++j)
            if (j != mode) {
                const Vector& v = factors[static_cast<std::size_t>(j)];
                c *= v.dot(term[static_cast<std::size_t>(j)] * v);
            }
        m += c * term[static_cast<std::size_t>(mode)];
    }
    return m;
}

DenseTensor HartreeState::dense() const { return lambda * elementary_tensor(factors); }

HartreeDerivative hartree_rhs(const KroneckerSumOperator& A, const HartreeState& s) {
    HartreeDerivative d;
    d.dlambda = rayleigh_quotient(A, s.factors) * s.lambda;
    for (Index k = 0; k < A.order(); ++k) {
        const Vector& v = s.factors[static_cast<std::size_t>(k)];
        const Vector mv = mean_field(A, s.factors, k) * v;
        d.dfactors.push_back(mv - v * v.dot(mv));
    }
    return d;
}

DenseTensor dense(const State& s) {
    return std::visit(
        [](const auto& x) -> DenseTensor {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, HartreeState>)
                return x.dense();
            else if constexpr (std::is_same_v<T, TuckerTensor>)
                return tucker_to_dense(x);
            else
                return x;
        },
        s);
}

Flow linear_flow(const KroneckerSumOperator& A) {
    return [A](double, const DenseTensor& u) { return apply_operator(A, u); };
}

std::vector<double> step_sizes(double T, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw InvalidArgument("step size must be positive");
    if (!(T >= 0.0) || !std::isfinite(T))
        throw InvalidArgument("final time must be non-negative");
    std::vector<double> h;
    if (T == 0.0)
        return h;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(T / dt - 1e-9)));
    h.assign(n, dt);
    h.back() = T - static_cast<double>(n - 1) * dt;
    return h;
}

namespace {

std::vector<double> step_times(const std::vector<double>& h) {
    std::vector<double> t{0.0};
    double acc = 0.0;
    for (double s : h) {
        acc += s;
        t.push_back(acc);
    }
    return t;
}

double reference_error(const Reference& ref, double t, const DenseTensor& u) {
    if (!ref)
        return std::numeric_limits<double>::quiet_NaN();
    return (ref(t) - u).frobenius_norm();
}

HartreeState normalized(HartreeState s) {
    for (auto& v : s.factors)
        v.normalize();
    return s;
}

HartreeState axpy(const HartreeState& s, double h, const HartreeDerivative& d) {
    HartreeState out = s;
    out.lambda += h * d.dlambda;
    for (std::size_t k = 0; k < out.factors.size(); ++k)
        out.factors[k] += h * d.dfactors[k];
    return out;
}

} // namespace

TrajectoryRecord integrate_hartree(const KroneckerSumOperator& A, const HartreeState& s0, double T, double dt,
                                   const IntegratorOptions& opts) {
    if (!(T > 0.0))
        throw InvalidArgument("final time must be positive");
    const auto h = step_sizes(T, dt);
    const auto times = step_times(h);
    check_factors(A, s0.factors);
    for (const auto& v : s0.factors)
        if (std::abs(v.norm() - 1.0) > 1e-10)
            throw InvalidArgument("Hartree factors must have unit norm");

    TrajectoryRecord rec;
    HartreeState s = s0;
    double energy = rayleigh_quotient(A, s.factors);
    double integral = 0.0;

    auto record = [&](std::size_t step, StepDiagnostics diag) {
        diag.lambda = s.lambda;
        diag.lambda_closed_form = s0.lambda * std::exp(integral);
        if (opts.reference)
            diag.reference_error = reference_error(opts.reference, times[step], s.dense());
        rec.times.push_back(times[step]);
        if (opts.keep_states || step == 0 || step == h.size())
            rec.states.emplace_back(s);
        rec.diagnostics.push_back(diag);
    };

    StepDiagnostics first;
    first.norm_drift = 0.0;
    first.sphere_tangency = 0.0;
    record(0, first);

    for (std::size_t n = 0; n < h.size(); ++n) {
        const double dtn = h[n];
        double tangency = 0.0;
        // the right-hand side is evaluated on the radially normalized state
        auto rhs = [&](const HartreeState& x) {
            HartreeState xn = normalized(x);
            HartreeDerivative d = hartree_rhs(A, xn);
            d.dlambda = rayleigh_quotient(A, xn.factors) * x.lambda;
            for (std::size_t k = 0; k < xn.factors.size(); ++k)
                tangency = std::max(tangency, std::abs(d.dfactors[k].dot(xn.factors[k])));
            return d;
        };
        const HartreeDerivative k1 = rhs(s);
        const HartreeDerivative k2 = rhs(axpy(s, 0.5 * dtn, k1));
        const HartreeDerivative k3 = rhs(axpy(s, 0.5 * dtn, k2));
        const HartreeDerivative k4 = rhs(axpy(s, dtn, k3));
        HartreeState next = s;
        next.lambda += dtn / 6.0 * (k1.dlambda + 2.0 * k2.dlambda + 2.0 * k3.dlambda + k4.dlambda);
        double drift = 0.0;
        for (std::size_t k = 0; k < next.factors.size(); ++k) {
            next.factors[k] +=
                dtn / 6.0 * (k1.dfactors[k] + 2.0 * k2.dfactors[k] + 2.0 * k3.dfactors[k] + k4.dfactors[k]);
            drift = std::max(drift, std::abs(next.factors[k].norm() - 1.0));
        }
        bool finite = std::isfinite(next.lambda);
        for (const auto& v : next.factors)
            finite = finite && v.allFinite();
        if (!finite)
            throw NonFiniteState(n + 1, "Hartree state became non-finite at t = " + std::to_string(times[n + 1]));
        s = normalized(std::move(next));

        const double e_next = rayleigh_quotient(A, s.factors);
        integral += 0.5 * dtn * (energy + e_next);
        energy = e_next;

        StepDiagnostics diag;
        diag.norm_drift = drift;
        diag.sphere_tangency = tangency;
        record(n + 1, diag);
    }
    return rec;
}

namespace {

struct Parameters {
    DenseTensor core;
    std::vector<Matrix> factors;
};

Parameters axpy(const Parameters& y, double h, const Parameters& k) {
    Parameters out = y;
    out.core += h * k.core;
    for (std::size_t j = 0; j < out.factors.size(); ++j)
        out.factors[j] += h * k.factors[j];
    return out;
}

/// Core and factor velocities (gauge U_k^T dU_k = 0) of a tangent tensor w at
/// the, not necessarily orthonormal, representation y.
Parameters tangent_parameters(const Parameters& y, const DenseTensor& w) {
    const Index d = y.core.order();
    std::vector<Matrix> pinv;
    std::vector<Matrix> gram;
    for (const auto& U : y.factors) {
        gram.push_back(U.transpose() * U);
        pinv.push_back(gram.back().llt().solve(U.transpose()));
    }
    Parameters v;
    v.core = multilinear_product(w, std::span<const Matrix>(pinv));
    for (Index k = 0; k < d; ++k) {
        const Matrix& U = y.factors[static_cast<std::size_t>(k)];
        DenseTensor wk = w;
        DenseTensor cg = y.core;
        for (Index j = 0; j < d; ++j)
            if (j != k) {
                wk = mode_contract(wk, j, y.factors[static_cast<std::size_t>(j)].transpose());
                cg = mode_contract(cg, j, gram[static_cast<std::size_t>(j)]);
            }
        Matrix Y = matricize(wk, k);
        Y -= U * (pinv[static_cast<std::size_t>(k)] * Y);
        const Matrix Mc = matricize(cg, k);
        const Matrix G = Mc * Mc.transpose();
        v.factors.push_back(G.llt().solve(Mc * Y.transpose()).transpose());
    }
    return v;
}

double core_condition(const DenseTensor& core) {
    double worst = 1.0;
    for (Index k = 0; k < core.order(); ++k) {
        const Vector s = mode_singular_values(core, k);
        const double r = s[0] == 0.0 ? 0.0 : s[s.size() - 1] / s[0];
        worst = std::min(worst, r);
    }
    return worst;
}

} // namespace

TrajectoryRecord integrate_tucker_dlra(const Flow& F, const TuckerTensor& v0, double T, double dt,
                                       const DlraOptions& opts) {
    if (!(T >= 0.0))
        throw InvalidArgument("final time must be non-negative");
    if (!F)
        throw InvalidArgument("flow is empty");
    const Rank rank = v0.rank();
    if (!rank.admissible(v0.shape()))
        throw InvalidArgument("rank of the initial value is not admissible");
    if (!is_minimal(v0))
        throw NotMinimal("initial value must be a minimal Tucker representation");
    const auto h = step_sizes(T, dt);
    const auto times = step_times(h);

    TrajectoryRecord rec;
    Parameters y{v0.core(), v0.factors()};

    auto record = [&](std::size_t step, StepDiagnostics diag, const TuckerTensor& u) {
        diag.core_condition = core_condition(u.core());
        if (opts.reference)
            diag.reference_error = reference_error(opts.reference, times[step], tucker_to_dense(u));
        rec.times.push_back(times[step]);
        if (opts.keep_states || step == 0 || step == h.size())
            rec.states.emplace_back(u);
        rec.diagnostics.push_back(diag);
    };

    StepDiagnostics first;
    first.projection_residual = 0.0;
    record(0, first, v0);

    for (std::size_t n = 0; n < h.size(); ++n) {
        const double dtn = h[n];
        const double t = times[n];
        double residual = 0.0;
        auto rhs = [&](double ts, const Parameters& x) {
            const TuckerTensor u(x.core, x.factors);
            BasePoint b;
            try {
                b = make_base(u);
            } catch (const NotMinimal& e) {
                throw RankDegeneracy(n + 1, e.what());
            }
            const DenseTensor g = F(ts, b.dense());
            if (!g.all_finite())
                throw NonFiniteState(n + 1, "flow returned non-finite values");
            ProjectionReport rep;
            try {
                rep = project(opts.projector, b, g, opts.norm, opts.projection);
            } catch (const SingularCore& e) {
                throw RankDegeneracy(n + 1, e.what());
            }
            residual = std::max(residual, rep.duality_residual);
            return tangent_parameters(x, rep.dense);
        };
        const Parameters k1 = rhs(t, y);
        const Parameters k2 = rhs(t + 0.5 * dtn, axpy(y, 0.5 * dtn, k1));
        const Parameters k3 = rhs(t + 0.5 * dtn, axpy(y, 0.5 * dtn, k2));
        const Parameters k4 = rhs(t + dtn, axpy(y, dtn, k3));
        Parameters next = y;
        next.core += dtn / 6.0 * (k1.core + 2.0 * k2.core + 2.0 * k3.core + k4.core);
        for (std::size_t j = 0; j < next.factors.size(); ++j)
            next.factors[j] += dtn / 6.0 * (k1.factors[j] + 2.0 * k2.factors[j] + 2.0 * k3.factors[j] + k4.factors[j]);

        DenseTensor full = tucker_to_dense(TuckerTensor(next.core, next.factors));
        if (!full.all_finite())
            throw NonFiniteState(n + 1, "reduced state became non-finite at t = " + std::to_string(times[n + 1]));
        const TuckerTensor u = hosvd_truncate(full, rank);
        const double cond = core_condition(u.core());
        if (!(cond >= 1e-10))
            throw RankDegeneracy(n + 1, "core unfolding condition " + std::to_string(cond) + " below 1e-10");
        y = Parameters{u.core(), u.factors()};

        StepDiagnostics diag;
        diag.projection_residual = residual;
        record(n + 1, diag, u);
    }
    return rec;
}

TrajectoryRecord reference_solve(const Flow& F, const DenseTensor& u0, double T, double dt, bool keep_states) {
    if (u0.size() > max_reference_size)
        throw DimensionError("reference solve limited to " + std::to_string(max_reference_size) + " unknowns");
    if (!F)
        throw InvalidArgument("flow is empty");
    const auto h = step_sizes(T, dt);
    const auto times = step_times(h);
    TrajectoryRecord rec;
    rec.times.push_back(0.0);
    rec.states.emplace_back(u0);
    rec.diagnostics.emplace_back();
    DenseTensor u = u0;
    for (std::size_t n = 0; n < h.size(); ++n) {
        const double s = h[n];
        const double t = times[n];
        const DenseTensor k1 = F(t, u);
        const DenseTensor k2 = F(t + 0.5 * s, u + (0.5 * s) * k1);
        const DenseTensor k3 = F(t + 0.5 * s, u + (0.5 * s) * k2);
        const DenseTensor k4 = F(t + s, u + s * k3);
        u += (s / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!u.all_finite())
            throw NonFiniteState(n + 1, "reference state became non-finite");
        rec.times.push_back(times[n + 1]);
        if (keep_states || n + 1 == h.size())
            rec.states.emplace_back(u);
        rec.diagnostics.emplace_back();
    }
    return rec;
}

TrajectoryRecord reference_solve(const KroneckerSumOperator& A, const DenseTensor& u0, double T, double dt,
                                 bool keep_states) {
    if (!(u0.shape() == A.shape()))
        throw DimensionError("operator shape does not match the initial value");
    return reference_solve(linear_flow(A), u0, T, dt, keep_states);
}

} // namespace tdf
