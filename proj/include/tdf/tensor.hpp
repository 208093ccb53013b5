#pragma once

#include <Eigen/Core>

#include <cmath>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tdf/errors.hpp"

namespace tdf {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Mode sizes (n_1, ..., n_d) of an order-d tensor, d >= 2.
class Shape {
public:
    Shape() = default;

    explicit Shape(std::vector<Index> dims) : dims_(std::move(dims)) {
        if (dims_.size() < 2)
            throw DimensionError("tensor order must be at least 2, got " + std::to_string(dims_.size()));
        for (Index n : dims_)
            if (n < 1)
                throw DimensionError("every mode size must be positive");
    }

    Shape(std::initializer_list<Index> dims) : Shape(std::vector<Index>(dims)) {}

    Index order() const noexcept { return static_cast<Index>(dims_.size()); }
    Index operator[](Index mode) const { return dims_[static_cast<std::size_t>(mode)]; }
    const std::vector<Index>& dims() const noexcept { return dims_; }

    /// Total number of entries.
    Index size() const noexcept {
        return std::accumulate(dims_.begin(), dims_.end(), Index{1}, std::multiplies<>());
    }

    /// Product of the sizes of modes [first, last).
    Index product(Index first, Index last) const noexcept {
        Index p = 1;
        for (Index k = first; k < last; ++k)
            p *= dims_[static_cast<std::size_t>(k)];
        return p;
    }

    /// Same shape with mode `mode` resized to `n`.
    Shape with(Index mode, Index n) const {
        auto d = dims_;
        d.at(static_cast<std::size_t>(mode)) = n;
        return Shape(std::move(d));
    }

    void check_mode(Index mode) const {
        if (mode < 0 || mode >= order())
            throw DimensionError("mode " + std::to_string(mode) + " out of range for order " +
                                 std::to_string(order()));
    }

    friend bool operator==(const Shape&, const Shape&) = default;

    std::string str() const {
        std::string s = "(";
        for (std::size_t k = 0; k < dims_.size(); ++k)
            s += (k ? "," : "") + std::to_string(dims_[k]);
        return s + ")";
    }

private:
    std::vector<Index> dims_;
};

/// Order-d array of scalars stored row-major (last index fastest).
template <typename Scalar>
class BasicDenseTensor {
public:
    using scalar_type = Scalar;
    using data_type = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    BasicDenseTensor() = default;

    explicit BasicDenseTensor(Shape shape)
        : shape_(std::move(shape)), data_(data_type::Zero(shape_.size())) {}

    BasicDenseTensor(Shape shape, data_type data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != shape_.size())
            throw DimensionError("data length " + std::to_string(data_.size()) +
                                 " does not match shape " + shape_.str());
    }

    static BasicDenseTensor zeros(const Shape& shape) { return BasicDenseTensor(shape); }

    const Shape& shape() const noexcept { return shape_; }
    Index order() const noexcept { return shape_.order(); }
    Index dim(Index mode) const { return shape_[mode]; }
    Index size() const noexcept { return data_.size(); }

    const data_type& data() const noexcept { return data_; }
    data_type& data() noexcept { return data_; }

    Scalar& operator()(std::span<const Index> idx) { return data_[offset(idx)]; }
    Scalar operator()(std::span<const Index> idx) const { return data_[offset(idx)]; }
    Scalar& operator()(std::initializer_list<Index> idx) { return (*this)(std::span(idx.begin(), idx.size())); }
    Scalar operator()(std::initializer_list<Index> idx) const {
        return (*this)(std::span(idx.begin(), idx.size()));
    }

    Index offset(std::span<const Index> idx) const {
        if (static_cast<Index>(idx.size()) != order())
            throw DimensionError("multi-index length does not match tensor order");
        Index off = 0;
        for (Index k = 0; k < order(); ++k) {
            const Index i = idx[static_cast<std::size_t>(k)];
            if (i < 0 || i >= shape_[k])
                throw DimensionError("multi-index out of range");
            off = off * shape_[k] + i;
        }
        return off;
    }

    bool all_finite() const { return data_.allFinite(); }

    Scalar frobenius_norm() const { return data_.norm(); }

    BasicDenseTensor& operator+=(const BasicDenseTensor& o) {
        check_same(o);
        data_ += o.data_;
        return *this;
    }
    BasicDenseTensor& operator-=(const BasicDenseTensor& o) {
        check_same(o);
        data_ -= o.data_;
        return *this;
    }
    BasicDenseTensor& operator*=(Scalar s) {
        data_ *= s;
        return *this;
    }

    friend BasicDenseTensor operator+(BasicDenseTensor a, const BasicDenseTensor& b) { return a += b; }
    friend BasicDenseTensor operator-(BasicDenseTensor a, const BasicDenseTensor& b) { return a -= b; }
    friend BasicDenseTensor operator*(Scalar s, BasicDenseTensor a) { return a *= s; }
    friend BasicDenseTensor operator*(BasicDenseTensor a, Scalar s) { return a *= s; }
    friend BasicDenseTensor operator-(BasicDenseTensor a) { return a *= Scalar(-1); }

    void check_same(const BasicDenseTensor& o) const {
        if (!(shape_ == o.shape_))
            throw DimensionError("shape mismatch: " + shape_.str() + " vs " + o.shape_.str());
    }

private:
    Shape shape_;
    data_type data_;
};

using DenseTensor = BasicDenseTensor<double>;

/// Iterates over all multi-indices of `shape` in row-major order.
template <typename Fn>
void for_each_index(const Shape& shape, Fn&& fn) {
    std::vector<Index> idx(static_cast<std::size_t>(shape.order()), 0);
    const Index total = shape.size();
    for (Index flat = 0; flat < total; ++flat) {
        fn(std::span<const Index>(idx), flat);
        for (Index k = shape.order() - 1; k >= 0; --k) {
            auto& i = idx[static_cast<std::size_t>(k)];
            if (++i < shape[k])
                break;
            i = 0;
        }
    }
}

/// Mode-`mode` unfolding: rows are indexed by i_mode, columns by the remaining
/// indices in ascending mode order, flattened row-major.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> matricize(const BasicDenseTensor<Scalar>& t, Index mode) {
    const Shape& s = t.shape();
    s.check_mode(mode);
    const Index left = s.product(0, mode);
    const Index n = s[mode];
    const Index right = s.product(mode + 1, s.order());
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(n, left * right);
    const auto& d = t.data();
    for (Index l = 0; l < left; ++l)
        for (Index i = 0; i < n; ++i)
            for (Index r = 0; r < right; ++r)
                m(i, l * right + r) = d[(l * n + i) * right + r];
    return m;
}

/// Inverse of matricize for a target shape.
template <typename Derived>
BasicDenseTensor<typename Derived::Scalar> dematricize(const Eigen::MatrixBase<Derived>& m, Index mode,
                                                       const Shape& shape) {
    shape.check_mode(mode);
    const Index left = shape.product(0, mode);
    const Index n = shape[mode];
    const Index right = shape.product(mode + 1, shape.order());
    if (m.rows() != n || m.cols() != left * right)
        throw DimensionError("matrix size does not fit shape " + shape.str() + " in mode " + std::to_string(mode));
    BasicDenseTensor<typename Derived::Scalar> t(shape);
    auto& d = t.data();
    for (Index l = 0; l < left; ++l)
        for (Index i = 0; i < n; ++i)
            for (Index r = 0; r < right; ++r)
                d[(l * n + i) * right + r] = m(i, l * right + r);
    return t;
}

/// Applies `m` (size k x n_mode) to mode `mode`; the result has mode size k.
template <typename Scalar, typename Derived>
BasicDenseTensor<Scalar> mode_contract(const BasicDenseTensor<Scalar>& t, Index mode,
                                       const Eigen::MatrixBase<Derived>& m) {
    t.shape().check_mode(mode);
    if (m.cols() != t.dim(mode))
        throw DimensionError("mode_contract: matrix has " + std::to_string(m.cols()) + " columns, mode " +
                             std::to_string(mode) + " has size " + std::to_string(t.dim(mode)));
    const Shape out = t.shape().with(mode, m.rows());
    return dematricize((m * matricize(t, mode)).eval(), mode, out);
}

/// Contracts every mode with the corresponding matrix (one per mode).
template <typename Scalar, typename Mat>
BasicDenseTensor<Scalar> multilinear_product(BasicDenseTensor<Scalar> t, std::span<const Mat> mats) {
    if (static_cast<Index>(mats.size()) != t.order())
        throw DimensionError("multilinear_product: need one matrix per mode");
    for (Index k = 0; k < t.order(); ++k)
        t = mode_contract(t, k, mats[static_cast<std::size_t>(k)]);
    return t;
}

/// Elementary tensor v_1 (x) ... (x) v_d.
template <typename Scalar>
BasicDenseTensor<Scalar> elementary_tensor(std::span<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> vs) {
    if (vs.size() < 2)
        throw DimensionError("elementary_tensor needs at least two vectors");
    std::vector<Index> dims;
    for (const auto& v : vs)
        dims.push_back(v.size());
    BasicDenseTensor<Scalar> t{Shape(dims)};
    for_each_index(t.shape(), [&](std::span<const Index> idx, Index flat) {
        Scalar p(1);
        for (std::size_t k = 0; k < vs.size(); ++k)
            p *= vs[k][idx[k]];
        t.data()[flat] = p;
    });
    return t;
}

inline DenseTensor elementary_tensor(std::initializer_list<Vector> vs) {
    const std::vector<Vector> v(vs);
    return elementary_tensor<double>(std::span<const Vector>(v));
}

inline DenseTensor elementary_tensor(const std::vector<Vector>& vs) {
    return elementary_tensor<double>(std::span<const Vector>(vs));
}

/// Euclidean coefficient inner product.
template <typename Scalar>
Scalar inner(const BasicDenseTensor<Scalar>& a, const BasicDenseTensor<Scalar>& b) {
    a.check_same(b);
    return a.data().dot(b.data());
}

/// Weighted l^p norm on one mode: (sum_i w_i |v_i|^p)^(1/p), 1 < p < inf.
class ModeNorm {
public:
    explicit ModeNorm(double p = 2.0, Vector weights = {});

    double p() const noexcept { return p_; }
    /// Dual exponent p / (p - 1).
    double q() const noexcept { return p_ / (p_ - 1.0); }
    /// Empty means unit weights.
    const Vector& weights() const noexcept { return weights_; }
    double weight(Index i) const { return weights_.size() == 0 ? 1.0 : weights_[i]; }

    double operator()(const Vector& v) const;
    /// Norm of a coefficient functional in the dual space: weighted l^q with weights w^(1-q).
    double dual(const Vector& f) const;
    /// The unique functional f with <v, f> = ||v||^2 = ||f||_*^2.
    Vector duality_map(const Vector& v) const;

private:
    double p_;
    Vector weights_;
};

/// Entrywise weighted l^p norm on the tensor space with product weights; a
/// crossnorm for the given mode norms.
class AmbientNorm {
public:
    AmbientNorm() = default;
    explicit AmbientNorm(std::vector<ModeNorm> modes);

    /// Unit weights in every mode; applies to tensors of any shape.
    static AmbientNorm uniform(double p);

    double p() const noexcept { return p_; }
    double q() const noexcept { return p_ / (p_ - 1.0); }
    const std::vector<ModeNorm>& modes() const noexcept { return modes_; }
    ModeNorm mode(Index k) const {
        return modes_.empty() ? ModeNorm(p_) : modes_.at(static_cast<std::size_t>(k));
    }
    bool unit_weights() const noexcept { return unit_; }

    /// Entry weights prod_k w_k(i_k), flattened row-major.
    Vector entry_weights(const Shape& shape) const;

    double operator()(const DenseTensor& t) const;
    /// Norm of a coefficient functional under the dual norm.
    double dual(const DenseTensor& f) const;

private:
    void check_shape(const Shape& shape) const;

    std::vector<ModeNorm> modes_;
    double p_ = 2.0;
    bool unit_ = true;
};

inline double ambient_norm(const DenseTensor& t, const AmbientNorm& nrm) { return nrm(t); }

} // namespace tdf
