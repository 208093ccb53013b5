#include "tdf/geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tdf {

namespace {

/// Orthonormal basis of span(f)^perp for f with orthonormal columns.
Matrix orthogonal_complement(const Matrix& f) {
    const Index n = f.rows();
    const Index r = f.cols();
    if (r == n)
        return Matrix(n, 0);
    Eigen::HouseholderQR<Matrix> qr(f);
    Matrix q = qr.householderQ();
    Matrix w = q.rightCols(n - r);
    fix_column_signs(w);
    return w;
}

double condition_number(const Matrix& m) {
    const Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
    if (s.size() == 0)
        return 1.0;
    const double smin = s[s.size() - 1];
    return smin == 0.0 ? std::numeric_limits<double>::infinity() : s[0] / smin;
}

/// Contracts every mode except `skip` with the transposed base factor.
DenseTensor contract_others_transposed(const BasePoint& b, DenseTensor w, Index skip) {
    for (Index j = 0; j < b.order(); ++j)
        if (j != skip)
            w = mode_contract(w, j, b.factor(j).transpose());
    return w;
}

/// Core with every mode except `skip` mapped by the base factor and mode `skip` by m.
DenseTensor expand_with(const BasePoint& b, const DenseTensor& core, Index skip, const Matrix& m) {
    DenseTensor t = core;
    for (Index j = 0; j < b.order(); ++j)
        t = mode_contract(t, j, j == skip ? m : b.factor(j));
    return t;
}

void check_core_condition(const DenseTensor& core, const char* what) {
    for (Index k = 0; k < core.order(); ++k)
        if (alpha_rank(core, k, default_rank_tol) != core.dim(k))
            throw SingularCore(std::string(what) + ": core unfolding " + std::to_string(k) +
                               " is rank deficient");
}

/// sup_x ||a x|| / ||u x|| in the mode norm, by normalized gradient ascent on
/// log ||a x|| - log ||u x|| from several starts.
double induced_operator_norm(const Matrix& a, const Matrix& u, const ModeNorm& nrm) {
    const Index r = a.cols();
    if (r == 0 || a.rows() == 0 || a.cwiseAbs().maxCoeff() == 0.0)
        return 0.0;
    auto ratio = [&](const Vector& x) { return nrm(a * x) / nrm(u * x); };
    auto grad = [&](const Vector& x) -> Vector {
        const Vector ax = a * x;
        const Vector ux = u * x;
        const double na = nrm(ax);
        const double nu = nrm(ux);
        Vector g = -u.transpose() * nrm.duality_map(ux) / (nu * nu);
        if (na > 0.0)
            g += a.transpose() * nrm.duality_map(ax) / (na * na);
        return g;
    };

    std::vector<Vector> starts;
    for (Index i = 0; i < r; ++i)
        starts.push_back(Vector::Unit(r, i));
    starts.push_back(Eigen::JacobiSVD<Matrix>(a, Eigen::ComputeThinV).matrixV().col(0));
    starts.push_back(Vector::Ones(r) / std::sqrt(static_cast<double>(r)));

    double best = 0.0;
    for (Vector x : starts) {
        double f = ratio(x);
        double step = 1.0;
        for (int it = 0; it < 500 && step > 1e-14; ++it) {
            Vector g = grad(x);
            g -= x.dot(g) * x; // the ratio is scale invariant
            if (g.norm() <= 1e-15)
                break;
            Vector y = (x + step * g).normalized();
            const double fy = ratio(y);
            if (fy > f) {
                x = y;
                f = fy;
                step *= 2.0;
            } else {
                step *= 0.5;
            }
        }
        best = std::max(best, f);
    }
    return best;
}

} // namespace

Index BasePoint::tangent_dimension() const {
    const Shape s = shape();
    const Rank r = rank();
    Index dim = 1;
    for (Index k = 0; k < order(); ++k)
        dim *= r[k];
    for (Index k = 0; k < order(); ++k)
        dim += (s[k] - r[k]) * r[k];
    return dim;
}

BasePoint make_base(const TuckerTensor& v, double tol) {
    if (!is_minimal(v, tol))
        throw NotMinimal("base point must be a minimal Tucker representation");
    BasePoint::Data d;
    d.point = orthonormalize(v);
    for (const auto& f : d.point.factors())
        d.complements.push_back(orthogonal_complement(f));
    d.dense = tucker_to_dense(d.point);
    d.shape = d.point.shape();
    BasePoint b;
    b.data_ = std::make_shared<const BasePoint::Data>(std::move(d));
    return b;
}

ChartPoint origin(const BasePoint& b) {
    ChartPoint c;
    for (Index k = 0; k < b.order(); ++k)
        c.L.push_back(Matrix::Zero(b.complement(k).cols(), b.factor(k).cols()));
    c.E = b.core();
    return c;
}

TuckerTensor retract(const BasePoint& b, const ChartPoint& c) {
    if (static_cast<Index>(c.L.size()) != b.order() || !(c.E.shape() == b.core().shape()))
        throw DimensionError("chart point does not match the base point");
    if (!c.E.all_finite())
        throw InvalidArgument("chart core has non-finite entries");
    check_core_condition(c.E, "retract");
    std::vector<Matrix> factors;
    for (Index k = 0; k < b.order(); ++k) {
        const Matrix& L = c.L[static_cast<std::size_t>(k)];
        const Matrix& W = b.complement(k);
        if (L.rows() != W.cols() || L.cols() != b.factor(k).cols())
            throw DimensionError("chart coordinate L_" + std::to_string(k) + " has the wrong size");
        if (!L.allFinite())
            throw InvalidArgument("chart coordinates have non-finite entries");
        factors.push_back(W.cols() == 0 ? b.factor(k) : Matrix(b.factor(k) + W * L));
    }
    return {c.E, std::move(factors)};
}

ChartPoint invert_chart(const BasePoint& b, const TuckerTensor& w) {
    if (!(w.shape() == b.shape()) || !(w.rank() == b.rank()))
        throw DimensionError("tensor does not have the shape and rank of the base point");
    ChartPoint c;
    DenseTensor E = w.core();
    for (Index k = 0; k < b.order(); ++k) {
        const Matrix& U = b.factor(k);
        const Matrix& W = b.complement(k);
        const Matrix G = U.transpose() * w.factor(k);
        if (condition_number(G) > max_condition)
            throw CommonComplementViolation("mode " + std::to_string(k) +
                                            ": span of the factor is not a graph over the base factor span");
        // L G = W^T F  <=>  G^T L^T = F^T W
        const Matrix WF = W.transpose() * w.factor(k);
        c.L.push_back(Matrix(G.transpose()).partialPivLu().solve(WF.transpose()).transpose());
        E = mode_contract(E, k, G);
    }
    c.E = std::move(E);
    return c;
}

ChartPoint transition(const BasePoint& b1, const BasePoint& b2, const ChartPoint& c1) {
    return invert_chart(b2, retract(b1, c1));
}

double TangentVector::gauge_residual() const {
    double worst = 0.0;
    for (Index k = 0; k < base.order(); ++k) {
        const Matrix& du = dU[static_cast<std::size_t>(k)];
        const double n = du.norm();
        if (n > 0.0)
            worst = std::max(worst, (base.factor(k).transpose() * du).norm() / n);
    }
    return worst;
}

TangentVector zero_tangent(const BasePoint& b) {
    TangentVector tv{b, DenseTensor(b.core().shape()), {}};
    for (Index k = 0; k < b.order(); ++k)
        tv.dU.push_back(Matrix::Zero(b.factor(k).rows(), b.factor(k).cols()));
    return tv;
}

DenseTensor embed_tangent(const TangentVector& tv) {
    const BasePoint& b = tv.base;
    if (static_cast<Index>(tv.dU.size()) != b.order())
        throw DimensionError("tangent vector needs one factor direction per mode");
    DenseTensor out = multilinear_product(tv.dC, std::span<const Matrix>(b.point().factors()));
    for (Index k = 0; k < b.order(); ++k) {
        const Matrix& du = tv.dU[static_cast<std::size_t>(k)];
        if (du.rows() != b.factor(k).rows() || du.cols() != b.factor(k).cols())
            throw DimensionError("factor direction " + std::to_string(k) + " has the wrong size");
        if (du.cwiseAbs().maxCoeff() == 0.0)
            continue;
        out += expand_with(b, b.core(), k, du);
    }
    return out;
}

TangentVector project_tangent(const BasePoint& b, const DenseTensor& w) {
    if (!(w.shape() == b.shape()))
        throw DimensionError("tensor shape " + w.shape().str() + " does not match base " + b.shape().str());
    TangentVector tv{b, {}, {}};
    std::vector<Matrix> ut;
    for (const auto& f : b.point().factors())
        ut.push_back(f.transpose());
    tv.dC = multilinear_product(w, std::span<const Matrix>(ut));
    for (Index k = 0; k < b.order(); ++k) {
        const Matrix& U = b.factor(k);
        if (b.complement(k).cols() == 0) {
            tv.dU.push_back(Matrix::Zero(U.rows(), U.cols()));
            continue;
        }
        const Matrix Mc = matricize(b.core(), k);
        const Matrix gram = Mc * Mc.transpose();
        if (condition_number(gram) > max_condition)
            throw SingularCore("core Gram matrix of mode " + std::to_string(k) + " is numerically singular");
        Matrix Y = matricize(contract_others_transposed(b, w, k), k);
        Y -= U * (U.transpose() * Y);
        const Matrix rhs = Y * Mc.transpose();
        // dU gram = rhs, gram symmetric positive definite
        tv.dU.push_back(gram.llt().solve(rhs.transpose()).transpose());
    }
    return tv;
}

TangentVector extract_tangent(const BasePoint& b, const DenseTensor& w, double rel_tol) {
    TangentVector tv = project_tangent(b, w);
    const double wn = w.frobenius_norm();
    const double res = (embed_tangent(tv) - w).frobenius_norm();
    if (res > rel_tol * wn)
        throw NotInTangentSpace("tensor is not in the tangent space (residual " + std::to_string(res) +
                                ", norm " + std::to_string(wn) + ")");
    return tv;
}

std::vector<DenseTensor> tangent_basis(const BasePoint& b) {
    std::vector<DenseTensor> basis;
    const Shape rshape = b.core().shape();
    const Index d = b.order();

    for_each_index(rshape, [&](std::span<const Index> idx, Index) {
        std::vector<Vector> cols;
        for (Index k = 0; k < d; ++k)
            cols.push_back(b.factor(k).col(idx[static_cast<std::size_t>(k)]));
        basis.push_back(elementary_tensor(cols));
    });

    for (Index k = 0; k < d; ++k) {
        const Matrix& W = b.complement(k);
        if (W.cols() == 0)
            continue;
        const Matrix Mc = matricize(b.core(), k);
        // orthonormal basis of the row space of the core unfolding
        Matrix V = Eigen::JacobiSVD<Matrix>(Mc, Eigen::ComputeThinV).matrixV().leftCols(Mc.rows());
        fix_column_signs(V);
        const Shape one = rshape.with(k, 1);
        for (Index j = 0; j < W.cols(); ++j)
            for (Index i = 0; i < V.cols(); ++i) {
                const DenseTensor rest = dematricize(Matrix(V.col(i).transpose()), k, one);
                basis.push_back(expand_with(b, rest, k, W.col(j)));
            }
    }
    return basis;
}

double tangent_norm(const TangentVector& tv, const AmbientNorm& nrm) {
    double total = tv.dC.frobenius_norm();
    for (Index k = 0; k < tv.base.order(); ++k) {
        const Matrix& du = tv.dU[static_cast<std::size_t>(k)];
        const ModeNorm m = nrm.mode(k);
        if (m.p() == 2.0 && m.weights().size() == 0)
            total += du.size() == 0 ? 0.0 : Eigen::JacobiSVD<Matrix>(du).singularValues()[0];
        else
            total += induced_operator_norm(du, tv.base.factor(k), m);
    }
    return total;
}

} // namespace tdf
