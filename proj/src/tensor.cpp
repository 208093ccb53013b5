#include "tdf/tensor.hpp"

#include <cmath>

namespace tdf {

namespace {

void check_exponent(double p) {
    if (!(p > 1.0) || !std::isfinite(p))
        throw InvalidArgument("norm exponent must satisfy 1 < p < inf, got " + std::to_string(p));
}

double signed_pow(double x, double e) { return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), e), x); }

} // namespace

ModeNorm::ModeNorm(double p, Vector weights) : p_(p), weights_(std::move(weights)) {
    check_exponent(p_);
    for (Index i = 0; i < weights_.size(); ++i)
        if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
            throw InvalidArgument("mode weights must be positive and finite");
}

double ModeNorm::operator()(const Vector& v) const {
    if (weights_.size() != 0 && weights_.size() != v.size())
        throw DimensionError("mode norm weights do not match vector length");
    double s = 0.0;
    const double scale = v.cwiseAbs().maxCoeff();
    if (v.size() == 0 || scale == 0.0)
        return 0.0;
    for (Index i = 0; i < v.size(); ++i)
        s += weight(i) * std::pow(std::abs(v[i]) / scale, p_);
    return scale * std::pow(s, 1.0 / p_);
}

double ModeNorm::dual(const Vector& f) const {
    if (weights_.size() != 0 && weights_.size() != f.size())
        throw DimensionError("mode norm weights do not match vector length");
    if (f.size() == 0)
        return 0.0;
    const double scale = f.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return 0.0;
    const double qq = q();
    double s = 0.0;
    for (Index i = 0; i < f.size(); ++i)
        s += std::pow(weight(i), 1.0 - qq) * std::pow(std::abs(f[i]) / scale, qq);
    return scale * std::pow(s, 1.0 / qq);
}

Vector ModeNorm::duality_map(const Vector& v) const {
    const double nv = (*this)(v);
    Vector f = Vector::Zero(v.size());
    if (nv == 0.0)
        return f;
    // ||v||^(2-p) w_i |v_i|^(p-1) sign(v_i), evaluated on v / ||v|| for range safety
    for (Index i = 0; i < v.size(); ++i)
        f[i] = nv * weight(i) * signed_pow(v[i] / nv, p_ - 1.0);
    return f;
}

AmbientNorm::AmbientNorm(std::vector<ModeNorm> modes) : modes_(std::move(modes)) {
    if (modes_.empty())
        throw InvalidArgument("ambient norm needs one mode norm per mode");
    p_ = modes_.front().p();
    for (const auto& m : modes_) {
        if (m.p() != p_)
            throw InvalidArgument("all mode norms must share the same exponent p");
        if (m.weights().size() != 0)
            unit_ = false;
    }
}

AmbientNorm AmbientNorm::uniform(double p) {
    check_exponent(p);
    AmbientNorm n;
    n.p_ = p;
    return n;
}

void AmbientNorm::check_shape(const Shape& shape) const {
    if (modes_.empty())
        return;
    if (static_cast<Index>(modes_.size()) != shape.order())
        throw DimensionError("ambient norm has " + std::to_string(modes_.size()) + " modes, tensor has order " +
                             std::to_string(shape.order()));
    for (Index k = 0; k < shape.order(); ++k) {
        const auto& w = modes_[static_cast<std::size_t>(k)].weights();
        if (w.size() != 0 && w.size() != shape[k])
            throw DimensionError("mode " + std::to_string(k) + " weights do not match mode size");
    }
}

Vector AmbientNorm::entry_weights(const Shape& shape) const {
    check_shape(shape);
    Vector w = Vector::Ones(shape.size());
    if (unit_)
        return w;
    for_each_index(shape, [&](std::span<const Index> idx, Index flat) {
        double p = 1.0;
        for (Index k = 0; k < shape.order(); ++k)
            p *= modes_[static_cast<std::size_t>(k)].weight(idx[static_cast<std::size_t>(k)]);
        w[flat] = p;
    });
    return w;
}

double AmbientNorm::operator()(const DenseTensor& t) const {
    check_shape(t.shape());
    const auto& d = t.data();
    if (d.size() == 0)
        return 0.0;
    const double scale = d.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return 0.0;
    if (p_ == 2.0 && unit_)
        return d.norm();
    const Vector w = entry_weights(t.shape());
    double s = 0.0;
    for (Index i = 0; i < d.size(); ++i)
        s += w[i] * std::pow(std::abs(d[i]) / scale, p_);
    return scale * std::pow(s, 1.0 / p_);
}

double AmbientNorm::dual(const DenseTensor& f) const {
    check_shape(f.shape());
    const auto& d = f.data();
    if (d.size() == 0)
        return 0.0;
    const double scale = d.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return 0.0;
    const double qq = q();
    const Vector w = entry_weights(f.shape());
    double s = 0.0;
    for (Index i = 0; i < d.size(); ++i)
        s += std::pow(w[i], 1.0 - qq) * std::pow(std::abs(d[i]) / scale, qq);
    return scale * std::pow(s, 1.0 / qq);
}

} // namespace tdf
