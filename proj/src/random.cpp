#include "tdf/random.hpp"

#include <Eigen/QR>

#include <cstdlib>
#include <string>

namespace tdf {

std::uint64_t seed_from_env(std::uint64_t fallback) {
    const char* s = std::getenv("TDF_SEED");
    if (s == nullptr || *s == '\0')
        return fallback;
    try {
        std::size_t pos = 0;
        const auto v = std::stoull(s, &pos);
        if (pos != std::string(s).size())
            throw InvalidArgument("TDF_SEED is not an integer: " + std::string(s));
        return v;
    } catch (const std::logic_error&) {
        throw InvalidArgument("TDF_SEED is not an integer: " + std::string(s));
    }
}

Vector gaussian_vector(CounterRng& rng, Index n) {
    std::normal_distribution<double> normal;
    Vector v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = normal(rng);
    return v;
}

Matrix gaussian_matrix(CounterRng& rng, Index rows, Index cols) {
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            m(i, j) = normal(rng);
    return m;
}

DenseTensor gaussian_tensor(CounterRng& rng, const Shape& shape) {
    return DenseTensor(shape, gaussian_vector(rng, shape.size()));
}

Matrix random_orthonormal(CounterRng& rng, Index n, Index r) {
    const Matrix g = gaussian_matrix(rng, n, r);
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(n, r);
}

Vector random_unit_vector(CounterRng& rng, Index n) {
    Vector v = gaussian_vector(rng, n);
    while (v.norm() == 0.0)
        v = gaussian_vector(rng, n);
    return v.normalized();
}

TuckerTensor random_minimal_tucker(CounterRng& rng, const Shape& shape, const Rank& rank) {
    if (!rank.admissible(shape))
        throw InvalidArgument("rank is not admissible for shape " + shape.str());
    std::vector<Matrix> factors;
    for (Index k = 0; k < shape.order(); ++k)
        factors.push_back(random_orthonormal(rng, shape[k], rank[k]));
    const Shape rshape(rank.r);
    for (;;) {
        TuckerTensor u(gaussian_tensor(rng, rshape), factors);
        if (is_minimal(u, 1e-6))
            return u;
    }
}

} // namespace tdf
