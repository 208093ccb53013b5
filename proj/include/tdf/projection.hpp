#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdf/geometry.hpp"
#include "tdf/tensor.hpp"

namespace tdf {

/// Coefficients of a functional on the tensor space; pairs with primal tensors
/// through the Euclidean coefficient sum.
struct DualVector {
    DenseTensor coefficients;
    double norm_q = 0.0; ///< dual norm of the functional
};

/// Normalized duality mapping of the weighted l^p ambient norm:
/// J(x)_i = ||x||^(2-p) w_i |x_i|^(p-1) sign(x_i), J(0) = 0.
DualVector duality_map(const DenseTensor& x, const AmbientNorm& nrm);

enum class Projector { hilbert, metric, generalized };

Projector parse_projector(const std::string& name);
std::string to_string(Projector p);

struct ProjectionOptions {
    double tol = 1e-8;
    int max_iterations = 200;
};

struct ProjectionReport {
    TangentVector tangent;
    DenseTensor dense;      ///< embedded tangent
    double objective = 0.0; ///< ||w - g|| for hilbert/metric, phi(w, g) for generalized
    /// max_i |<z_i, J-residual>| / (||z_i|| ||g||) over the tangent basis; 0 when g = 0
    double duality_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Iterative projection stopped before reaching the requested residual.
/// Carries the best iterate found.
class MaxIterationsExceeded : public Error {
public:
    MaxIterationsExceeded(const std::string& what, ProjectionReport best)
        : Error(what), best_(std::move(best)) {}

    const ProjectionReport& best() const noexcept { return best_; }

private:
    ProjectionReport best_;
};

/// Euclidean orthogonal projection onto the tangent space (closed form).
ProjectionReport project_hilbert(const BasePoint& b, const DenseTensor& g);

/// Best approximation of g from the tangent space in the weighted l^p norm.
ProjectionReport project_metric_lp(const BasePoint& b, const DenseTensor& g, const AmbientNorm& nrm,
                                   const ProjectionOptions& opts = {});

/// Minimizer over the tangent space of phi(z, g) = ||z||^2 - 2 <z, J(g)> + ||g||^2.
ProjectionReport project_generalized_lp(const BasePoint& b, const DenseTensor& g, const AmbientNorm& nrm,
                                        const ProjectionOptions& opts = {});

/// Dispatch on the projector kind. The Hilbert projector fails with
/// MaxIterationsExceeded only if its residual exceeds opts.tol.
ProjectionReport project(Projector kind, const BasePoint& b, const DenseTensor& g, const AmbientNorm& nrm,
                         const ProjectionOptions& opts = {});

/// phi(u, v) = ||u||^2 - 2 <u, J(v)> + ||v||^2.
double generalized_distance(const DenseTensor& u, const DenseTensor& v, const AmbientNorm& nrm);

struct InjectiveOptions {
    int restarts = 20;
    std::uint64_t seed = 0;
    int max_sweeps = 1000;
    double tol = 1e-15;
};

struct InjectiveNormResult {
    double lower_bound = 0.0;
    /// One dual unit vector per mode attaining lower_bound = <t, (x) phi_k>.
    std::vector<Vector> certificate;
};

/// Lower bound on the injective norm sup |<t, phi_1 (x) ... (x) phi_d>| over
/// dual unit vectors, by multi-start alternating maximization. Order-2 tensors
/// with p = 2 are solved exactly by an SVD.
InjectiveNormResult injective_norm(const DenseTensor& t, const AmbientNorm& nrm, const InjectiveOptions& opts = {});

} // namespace tdf
