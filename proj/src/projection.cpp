#include "tdf/projection.hpp"

#include "tdf/random.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace tdf {

namespace {

double signed_pow(double x, double e) { return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), e), x); }

/// Weighted l^p norm of a flat coefficient vector.
double flat_norm(const Vector& x, const Vector& w, double p) {
    const double scale = x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return 0.0;
    double s = 0.0;
    for (Index i = 0; i < x.size(); ++i)
        s += w[i] * std::pow(std::abs(x[i]) / scale, p);
    return scale * std::pow(s, 1.0 / p);
}

/// Duality map of the weighted l^p norm on flat coefficients.
Vector flat_duality(const Vector& x, const Vector& w, double p) {
    const double n = flat_norm(x, w, p);
    Vector f = Vector::Zero(x.size());
    if (n == 0.0)
        return f;
    for (Index i = 0; i < x.size(); ++i)
        f[i] = n * w[i] * signed_pow(x[i] / n, p - 1.0);
    return f;
}

std::string format_g(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

/// Tangent basis as the columns of an N x m matrix.
Matrix basis_matrix(const BasePoint& b) {
    const auto basis = tangent_basis(b);
    Matrix B(b.shape().size(), static_cast<Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i)
        B.col(static_cast<Index>(i)) = basis[i].data();
    return B;
}

/// max_i |<z_i, f>| / (||z_i|| gnorm) with 0/0 -> 0.
double basis_residual(const Matrix& B, const Vector& basis_norms, const Vector& f, double gnorm) {
    if (gnorm == 0.0 || B.cols() == 0)
        return 0.0;
    const Vector pairing = B.transpose() * f;
    double worst = 0.0;
    for (Index i = 0; i < B.cols(); ++i)
        if (basis_norms[i] > 0.0)
            worst = std::max(worst, std::abs(pairing[i]) / (basis_norms[i] * gnorm));
    return worst;
}

void check_norm_shape(const AmbientNorm& nrm, const Shape& shape) {
    (void)nrm.entry_weights(shape);
}

ProjectionReport finish(const BasePoint& b, DenseTensor dense) {
    ProjectionReport rep;
    rep.tangent = project_tangent(b, dense);
    rep.dense = std::move(dense);
    return rep;
}

/// Smooth convex objective in tangent-basis coefficients.
struct Objective {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::function<Matrix(const Vector&)> hessian;
    std::function<double(const Vector&)> residual;
};

struct SolveResult {
    Vector coeffs;
    double residual;
    int iterations;
    bool converged;
};

/// Damped Newton with Armijo backtracking. Terminates when residual() <= tol.
SolveResult newton_solve(const Objective& obj, Vector c, const ProjectionOptions& opts) {
    SolveResult best{c, obj.residual(c), 0, false};
    if (best.residual <= opts.tol) {
        best.converged = true;
        return best;
    }
    double f = obj.value(c);
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const Vector g = obj.gradient(c);
        Matrix H = obj.hessian(c);
        const double hscale = std::max(H.diagonal().cwiseAbs().maxCoeff(), 1e-300);
        Vector dir;
        for (double mu = 1e-14 * hscale;; mu *= 100.0) {
            H.diagonal().array() += mu;
            Eigen::LDLT<Matrix> ldlt(H);
            if (ldlt.info() == Eigen::Success) {
                dir = -ldlt.solve(g);
                if (dir.allFinite() && g.dot(dir) < 0.0)
                    break;
            }
            if (mu > 1e6 * hscale) {
                dir = -g;
                break;
            }
        }

        const double slope = g.dot(dir);
        const double gnorm = g.norm();
        bool accepted = false;
        Vector next = c;
        double fnext = f;
        for (double step = 1.0; step > 1e-20; step *= 0.5) {
            next = c + step * dir;
            fnext = obj.value(next);
            if (!std::isfinite(fnext))
                continue;
            if (fnext <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            // below rounding resolution of f, decide on the gradient instead
            if (-step * slope <= 1e-13 * (std::abs(f) + 1.0) && obj.gradient(next).norm() < gnorm) {
                accepted = true;
                break;
            }
        }
        if (!accepted)
            break;
        c = next;
        f = fnext;
        const double res = obj.residual(c);
        if (res < best.residual) {
            best.coeffs = c;
            best.residual = res;
        }
        best.iterations = it;
        if (res <= opts.tol) {
            best.converged = true;
            return best;
        }
    }
    return best;
}

} // namespace

DualVector duality_map(const DenseTensor& x, const AmbientNorm& nrm) {
    const Vector w = nrm.entry_weights(x.shape());
    DualVector out;
    out.coefficients = DenseTensor(x.shape(), flat_duality(x.data(), w, nrm.p()));
    out.norm_q = nrm.dual(out.coefficients);
    return out;
}

Projector parse_projector(const std::string& name) {
    if (name == "hilbert")
        return Projector::hilbert;
    if (name == "metric" || name == "metric_lp")
        return Projector::metric;
    if (name == "generalized" || name == "generalized_lp")
        return Projector::generalized;
    throw InvalidArgument("unknown projector '" + name + "' (expected hilbert, metric or generalized)");
}

std::string to_string(Projector p) {
    switch (p) {
    case Projector::hilbert:
        return "hilbert";
    case Projector::metric:
        return "metric";
    case Projector::generalized:
        return "generalized";
    }
    return "unknown";
}

double generalized_distance(const DenseTensor& u, const DenseTensor& v, const AmbientNorm& nrm) {
    const double nu = nrm(u);
    const double nv = nrm(v);
    return nu * nu - 2.0 * inner(u, duality_map(v, nrm).coefficients) + nv * nv;
}

ProjectionReport project_hilbert(const BasePoint& b, const DenseTensor& g) {
    if (!(g.shape() == b.shape()))
        throw DimensionError("tensor shape " + g.shape().str() + " does not match base " + b.shape().str());
    ProjectionReport rep;
    rep.tangent = project_tangent(b, g);
    rep.dense = embed_tangent(rep.tangent);
    const DenseTensor r = g - rep.dense;
    rep.objective = r.frobenius_norm();
    const Matrix B = basis_matrix(b);
    rep.duality_residual = basis_residual(B, Vector::Ones(B.cols()), r.data(), g.frobenius_norm());
    rep.iterations = 0;
    rep.converged = true;
    return rep;
}

ProjectionReport project_metric_lp(const BasePoint& b, const DenseTensor& g, const AmbientNorm& nrm,
                                   const ProjectionOptions& opts) {
    if (!(g.shape() == b.shape()))
        throw DimensionError("tensor shape " + g.shape().str() + " does not match base " + b.shape().str());
    check_norm_shape(nrm, g.shape());
    const double p = nrm.p();
    const Vector w = nrm.entry_weights(g.shape());
    const double gn = nrm(g);
    if (gn == 0.0) {
        ProjectionReport rep = finish(b, DenseTensor(g.shape()));
        rep.converged = true;
        return rep;
    }
    const Matrix B = basis_matrix(b);
    const Vector target = g.data() / gn;
    Vector bnorms(B.cols());
    for (Index i = 0; i < B.cols(); ++i)
        bnorms[i] = flat_norm(B.col(i), w, p);

    // minimize sum_i w_i |r_i|^p / p with r = B c - target
    Objective obj;
    obj.value = [&](const Vector& c) {
        const Vector r = B * c - target;
        double s = 0.0;
        for (Index i = 0; i < r.size(); ++i)
            s += w[i] * std::pow(std::abs(r[i]), p);
        return s / p;
    };
    obj.gradient = [&](const Vector& c) -> Vector {
        const Vector r = B * c - target;
        Vector a(r.size());
        for (Index i = 0; i < r.size(); ++i)
            a[i] = w[i] * signed_pow(r[i], p - 1.0);
        return B.transpose() * a;
    };
    obj.hessian = [&](const Vector& c) -> Matrix {
        const Vector r = B * c - target;
        const double rmax = r.cwiseAbs().maxCoeff();
        const double floor = std::max(1e-10 * rmax, 1e-300);
        Vector h(r.size());
        for (Index i = 0; i < r.size(); ++i)
            h[i] = (p - 1.0) * w[i] * std::pow(std::max(std::abs(r[i]), floor), p - 2.0);
        return B.transpose() * h.asDiagonal() * B;
    };
    obj.residual = [&](const Vector& c) {
        const Vector r = target - B * c;
        return basis_residual(B, bnorms, flat_duality(r, w, p), 1.0);
    };

    const SolveResult sol = newton_solve(obj, B.transpose() * target, opts);
    ProjectionReport rep = finish(b, DenseTensor(g.shape(), gn * (B * sol.coeffs)));
    rep.objective = nrm(rep.dense - g);
    rep.duality_residual = sol.residual;
    rep.iterations = sol.iterations;
    rep.converged = sol.converged;
    if (!sol.converged)
        throw MaxIterationsExceeded("metric projection stopped at duality residual " +
                                        format_g(sol.residual) + " > tol " + format_g(opts.tol),
                                    rep);
    return rep;
}

ProjectionReport project_generalized_lp(const BasePoint& b, const DenseTensor& g, const AmbientNorm& nrm,
                                        const ProjectionOptions& opts) {
    if (!(g.shape() == b.shape()))
        throw DimensionError("tensor shape " + g.shape().str() + " does not match base " + b.shape().str());
    check_norm_shape(nrm, g.shape());
    const double p = nrm.p();
    const Vector w = nrm.entry_weights(g.shape());
    const double gn = nrm(g);
    if (gn == 0.0) {
        ProjectionReport rep = finish(b, DenseTensor(g.shape()));
        rep.converged = true;
        return rep;
    }
    const Matrix B = basis_matrix(b);
    const Vector target = g.data() / gn;
    const Vector jt = flat_duality(target, w, p);
    Vector bnorms(B.cols());
    for (Index i = 0; i < B.cols(); ++i)
        bnorms[i] = flat_norm(B.col(i), w, p);

    // minimize ||z||^2 / 2 - <z, J(target)> with z = B c
    Objective obj;
    obj.value = [&](const Vector& c) {
        const Vector z = B * c;
        const double n = flat_norm(z, w, p);
        return 0.5 * n * n - z.dot(jt);
    };
    obj.gradient = [&](const Vector& c) -> Vector {
        const Vector z = B * c;
        return B.transpose() * (flat_duality(z, w, p) - jt);
    };
    obj.hessian = [&](const Vector& c) -> Matrix {
        const Vector z = B * c;
        const double n = flat_norm(z, w, p);
        if (n == 0.0)
            return Matrix::Identity(B.cols(), B.cols());
        // Hessian of ||z||^2 / 2 at z / n, which is homogeneous of degree 0
        const Vector u = z / n;
        const double floor = std::max(1e-10 * u.cwiseAbs().maxCoeff(), 1e-300);
        Vector h(u.size());
        Vector a(u.size());
        for (Index i = 0; i < u.size(); ++i) {
            h[i] = (p - 1.0) * w[i] * std::pow(std::max(std::abs(u[i]), floor), p - 2.0);
            a[i] = w[i] * signed_pow(u[i], p - 1.0);
        }
        const Vector Ba = B.transpose() * a;
        return B.transpose() * h.asDiagonal() * B + (2.0 - p) * Ba * Ba.transpose();
    };
    obj.residual = [&](const Vector& c) {
        const Vector z = B * c;
        return basis_residual(B, bnorms, jt - flat_duality(z, w, p), 1.0);
    };

    SolveResult sol;
    if (p < 2.0 && B.cols() < B.rows()) {
        // conjugate problem: min ||jt + N mu||_*^2 / 2 over the orthogonal complement N
        const double q = nrm.q();
        const Vector wd = w.array().pow(1.0 - q).matrix();
        Eigen::HouseholderQR<Matrix> qr(B);
        const Matrix N = (qr.householderQ() * Matrix::Identity(B.rows(), B.rows())).rightCols(B.rows() - B.cols());
        auto primal = [&](const Vector& mu) -> Vector { return B.transpose() * flat_duality(jt + N * mu, wd, q); };
        Objective dual;
        dual.value = [&](const Vector& mu) {
            const double n = flat_norm(jt + N * mu, wd, q);
            return 0.5 * n * n;
        };
        dual.gradient = [&](const Vector& mu) -> Vector { return N.transpose() * flat_duality(jt + N * mu, wd, q); };
        dual.hessian = [&](const Vector& mu) -> Matrix {
            const Vector y = jt + N * mu;
            const double n = flat_norm(y, wd, q);
            if (n == 0.0)
                return Matrix::Identity(N.cols(), N.cols());
            const Vector u = y / n;
            Vector h(u.size());
            Vector a(u.size());
            for (Index i = 0; i < u.size(); ++i) {
                h[i] = (q - 1.0) * wd[i] * std::pow(std::abs(u[i]), q - 2.0);
                a[i] = wd[i] * signed_pow(u[i], q - 1.0);
            }
            const Vector Na = N.transpose() * a;
            return N.transpose() * h.asDiagonal() * N + (2.0 - q) * Na * Na.transpose();
        };
        dual.residual = [&](const Vector& mu) { return obj.residual(primal(mu)); };
        const Vector c0 = B.transpose() * target;
        sol = newton_solve(dual, N.transpose() * (flat_duality(B * c0, w, p) - jt), opts);
        sol.coeffs = primal(sol.coeffs);
    } else {
        sol = newton_solve(obj, B.transpose() * target, opts);
    }
    ProjectionReport rep = finish(b, DenseTensor(g.shape(), gn * (B * sol.coeffs)));
    rep.objective = generalized_distance(rep.dense, g, nrm);
    rep.duality_residual = sol.residual;
    rep.iterations = sol.iterations;
    rep.converged = sol.converged;
    if (!sol.converged)
        throw MaxIterationsExceeded("generalized projection stopped at duality residual " +
                                        format_g(sol.residual) + " > tol " + format_g(opts.tol),
                                    rep);
    return rep;
}

ProjectionReport project(Projector kind, const BasePoint& b, const DenseTensor& g, const AmbientNorm& nrm,
                         const ProjectionOptions& opts) {
    switch (kind) {
    case Projector::hilbert: {
        ProjectionReport rep = project_hilbert(b, g);
        if (rep.duality_residual > opts.tol) {
            rep.converged = false;
            throw MaxIterationsExceeded("Hilbert projection residual " + format_g(rep.duality_residual) +
                                            " exceeds tol " + format_g(opts.tol),
                                        rep);
        }
        return rep;
    }
    case Projector::metric:
        return project_metric_lp(b, g, nrm, opts);
    case Projector::generalized:
        return project_generalized_lp(b, g, nrm, opts);
    }
    throw InvalidArgument("unknown projector");
}

namespace {

/// t contracted with phi_j in every mode j != keep, as a vector over mode `keep`.
Vector contract_all_but(const DenseTensor& t, const std::vector<Vector>& phi, Index keep) {
    DenseTensor r = t;
    for (Index j = 0; j < t.order(); ++j)
        if (j != keep)
            r = mode_contract(r, j, Matrix(phi[static_cast<std::size_t>(j)].transpose()));
    return r.data();
}

/// Dual unit functional norming y in the mode norm.
Vector norming_functional(const Vector& y, const ModeNorm& m) {
    const double n = m(y);
    if (n == 0.0)
        return Vector::Zero(y.size());
    return m.duality_map(y) / n;
}

} // namespace

InjectiveNormResult injective_norm(const DenseTensor& t, const AmbientNorm& nrm, const InjectiveOptions& opts) {
    check_norm_shape(nrm, t.shape());
    const Index d = t.order();
    InjectiveNormResult best;
    if (t.data().cwiseAbs().maxCoeff() == 0.0) {
        for (Index k = 0; k < d; ++k)
            best.certificate.push_back(Vector::Zero(t.dim(k)));
        return best;
    }

    if (d == 2 && nrm.p() == 2.0) {
        // sup over weighted-dual unit balls: sigma_max(D1^(1/2) T D2^(1/2))
        Vector s1 = Vector::Ones(t.dim(0));
        Vector s2 = Vector::Ones(t.dim(1));
        for (Index i = 0; i < s1.size(); ++i)
            s1[i] = std::sqrt(nrm.mode(0).weight(i));
        for (Index i = 0; i < s2.size(); ++i)
            s2[i] = std::sqrt(nrm.mode(1).weight(i));
        const Matrix T = s1.asDiagonal() * matricize(t, 0) * s2.asDiagonal();
        Eigen::JacobiSVD<Matrix> svd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
        best.lower_bound = svd.singularValues()[0];
        best.certificate = {s1.cwiseProduct(svd.matrixU().col(0)), s2.cwiseProduct(svd.matrixV().col(0))};
        return best;
    }

    const CounterRng root(opts.seed);
    const int starts = std::max(1, opts.restarts);
    for (int s = 0; s < starts; ++s) {
        std::vector<Vector> phi;
        if (s == 0) {
            for (Index k = 0; k < d; ++k) {
                Eigen::BDCSVD<Matrix> svd(matricize(t, k), Eigen::ComputeThinU);
                phi.push_back(norming_functional(svd.matrixU().col(0), nrm.mode(k)));
            }
        } else {
            CounterRng rng = root.split(static_cast<std::uint64_t>(s));
            for (Index k = 0; k < d; ++k)
                phi.push_back(norming_functional(gaussian_vector(rng, t.dim(k)), nrm.mode(k)));
        }
        double value = 0.0;
        for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
            const double before = value;
            for (Index k = 0; k < d; ++k) {
                const Vector y = contract_all_but(t, phi, k);
                const ModeNorm m = nrm.mode(k);
                value = m(y);
                if (value == 0.0)
                    break;
                phi[static_cast<std::size_t>(k)] = norming_functional(y, m);
            }
            if (value == 0.0 || value - before <= opts.tol * value)
                break;
        }
        if (value > best.lower_bound) {
            best.lower_bound = value;
            best.certificate = phi;
        }
    }
    if (best.certificate.empty())
        for (Index k = 0; k < d; ++k)
            best.certificate.push_back(Vector::Zero(t.dim(k)));
    return best;
}

} // namespace tdf
