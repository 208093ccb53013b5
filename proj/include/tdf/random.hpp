#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "tdf/tensor.hpp"
#include "tdf/tucker.hpp"

namespace tdf {

/// Counter-based generator: the n-th output is a pure function of (key, n),
/// and split() derives independent streams without touching this one.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed = 0) : key_(mix(seed ^ 0x9e3779b97f4a7c15ULL)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    CounterRng split(std::uint64_t stream) const {
        CounterRng r;
        r.key_ = mix(key_ ^ mix(stream + 0xbf58476d1ce4e5b9ULL));
        return r;
    }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

/// Seed from the TDF_SEED environment variable when set, else `fallback`.
std::uint64_t seed_from_env(std::uint64_t fallback);

Vector gaussian_vector(CounterRng& rng, Index n);
Matrix gaussian_matrix(CounterRng& rng, Index rows, Index cols);
DenseTensor gaussian_tensor(CounterRng& rng, const Shape& shape);
/// n x r matrix with orthonormal columns (Q factor of a Gaussian matrix).
Matrix random_orthonormal(CounterRng& rng, Index n, Index r);
/// Unit-norm Gaussian direction.
Vector random_unit_vector(CounterRng& rng, Index n);

/// Minimal Tucker tensor with orthonormal factors and a Gaussian core; the core
/// is redrawn until every unfolding has full row rank. Requires an admissible rank.
TuckerTensor random_minimal_tucker(CounterRng& rng, const Shape& shape, const Rank& rank);

} // namespace tdf
