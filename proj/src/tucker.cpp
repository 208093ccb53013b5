#include "tdf/tucker.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>

namespace tdf {

namespace {

Matrix left_singular_vectors(const Matrix& m, Vector& sigma) {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
    sigma = svd.singularValues();
    return svd.matrixU();
}

Index count_above(const Vector& sigma, double tol) {
    if (sigma.size() == 0 || sigma[0] == 0.0)
        return 0;
    const double cut = tol * sigma[0];
    return static_cast<Index>(std::count_if(sigma.begin(), sigma.end(), [&](double s) { return s > cut; }));
}

void check_tol(double tol) {
    if (!(tol > 0.0))
        throw InvalidArgument("rank tolerance must be positive");
}

} // namespace

bool Rank::admissible(const Shape& shape) const {
    if (order() != shape.order())
        return false;
    for (Index k = 0; k < order(); ++k) {
        if (r[k] < 1 || r[k] > shape[k])
            return false;
        Index others = 1;
        for (Index j = 0; j < order(); ++j)
            if (j != k)
                others *= r[j];
        if (r[k] > others)
            return false;
    }
    return true;
}

TuckerTensor::TuckerTensor(DenseTensor core, std::vector<Matrix> factors)
    : core_(std::move(core)), factors_(std::move(factors)) {
    if (static_cast<Index>(factors_.size()) != core_.order())
        throw DimensionError("Tucker tensor needs one factor per core mode");
    for (Index k = 0; k < core_.order(); ++k)
        if (factor(k).cols() != core_.dim(k) || factor(k).rows() < 1)
            throw DimensionError("factor " + std::to_string(k) + " has " + std::to_string(factor(k).cols()) +
                                 " columns, core mode size is " + std::to_string(core_.dim(k)));
}

Shape TuckerTensor::shape() const {
    std::vector<Index> n;
    for (const auto& f : factors_)
        n.push_back(f.rows());
    return Shape(std::move(n));
}

void fix_column_signs(Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j) {
        Index imax = 0;
        m.col(j).cwiseAbs().maxCoeff(&imax);
        if (m(imax, j) < 0.0)
            m.col(j) *= -1.0;
    }
}

Vector mode_singular_values(const DenseTensor& t, Index mode) {
    const Matrix m = matricize(t, mode);
    return Eigen::BDCSVD<Matrix>(m).singularValues();
}

Index alpha_rank(const DenseTensor& t, Index mode, double tol) {
    check_tol(tol);
    return count_above(mode_singular_values(t, mode), tol);
}

Rank tucker_ranks(const DenseTensor& t, double tol) {
    Rank r;
    for (Index k = 0; k < t.order(); ++k)
        r.r.push_back(alpha_rank(t, k, tol));
    return r;
}

MinimalSubspace minimal_subspace(const DenseTensor& t, Index mode, double tol) {
    check_tol(tol);
    t.shape().check_mode(mode);
    Vector sigma;
    Matrix u = left_singular_vectors(matricize(t, mode), sigma);
    const Index r = count_above(sigma, tol);
    if (r == 0)
        throw InvalidArgument("minimal subspace of the zero tensor is trivial");
    Matrix basis = u.leftCols(r);
    fix_column_signs(basis);
    return {mode, std::move(basis)};
}

TuckerTensor to_tucker(const DenseTensor& t, double tol) {
    std::vector<Matrix> factors;
    DenseTensor core = t;
    for (Index k = 0; k < t.order(); ++k) {
        factors.push_back(minimal_subspace(t, k, tol).basis);
        core = mode_contract(core, k, factors.back().transpose());
    }
    return {std::move(core), std::move(factors)};
}

TuckerTensor hosvd_truncate(const DenseTensor& t, const Rank& rank) {
    if (rank.order() != t.order())
        throw DimensionError("rank has wrong order");
    std::vector<Matrix> factors;
    DenseTensor core = t;
    for (Index k = 0; k < t.order(); ++k) {
        if (rank[k] < 1 || rank[k] > t.dim(k))
            throw InvalidArgument("truncation rank out of range in mode " + std::to_string(k));
        Vector sigma;
        Matrix u = left_singular_vectors(matricize(t, k), sigma);
        Matrix basis = u.leftCols(rank[k]);
        fix_column_signs(basis);
        factors.push_back(std::move(basis));
        core = mode_contract(core, k, factors.back().transpose());
    }
    return {std::move(core), std::move(factors)};
}

DenseTensor tucker_to_dense(const TuckerTensor& u) {
    return multilinear_product(u.core(), std::span<const Matrix>(u.factors()));
}

bool is_minimal(const TuckerTensor& u, double tol) {
    check_tol(tol);
    for (Index k = 0; k < u.order(); ++k) {
        const Matrix& f = u.factor(k);
        if (f.cols() > f.rows())
            return false;
        const Vector s = Eigen::BDCSVD<Matrix>(f).singularValues();
        if (s.size() == 0 || s[s.size() - 1] <= tol * s[0])
            return false;
        if (count_above(mode_singular_values(u.core(), k), tol) != u.core().dim(k))
            return false;
    }
    return true;
}

TuckerTensor orthonormalize(const TuckerTensor& u) {
    std::vector<Matrix> factors;
    DenseTensor core = u.core();
    for (Index k = 0; k < u.order(); ++k) {
        const Matrix& f = u.factor(k);
        const Index r = f.cols();
        if ((f.transpose() * f - Matrix::Identity(r, r)).cwiseAbs().maxCoeff() <= 1e-13) {
            factors.push_back(f);
            continue;
        }
        Eigen::HouseholderQR<Matrix> qr(f);
        Matrix q = qr.householderQ() * Matrix::Identity(f.rows(), r);
        Matrix rr = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
        // diag(R) > 0
        for (Index j = 0; j < r; ++j)
            if (rr(j, j) < 0.0) {
                rr.row(j) *= -1.0;
                q.col(j) *= -1.0;
            }
        core = mode_contract(core, k, rr);
        factors.push_back(std::move(q));
    }
    return {std::move(core), std::move(factors)};
}

} // namespace tdf
