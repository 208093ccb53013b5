#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "cli_runner.hpp"
#include "oracles.hpp"
#include "tdf/dynamics.hpp"
#include "tdf/geometry.hpp"
#include "tdf/io.hpp"
#include "tdf/projection.hpp"
#include "tdf/random.hpp"

using namespace tdf;

namespace {

/// Collects bounded quantities; the criterion passes when every value is within its bound.
struct Check {
    bool ok = true;
    std::string first_failure;

    void le(const std::string& what, double value, double bound) {
        if (!(value <= bound)) {
            if (ok)
                first_failure = what + " = " + std::to_string(value) + " > " + std::to_string(bound);
            ok = false;
        }
    }
    void ge(const std::string& what, double value, double bound) {
        if (!(value >= bound)) {
            if (ok)
                first_failure = what + " = " + std::to_string(value) + " < " + std::to_string(bound);
            ok = false;
        }
    }
    void that(const std::string& what, bool cond) {
        if (!cond) {
            if (ok)
                first_failure = what;
            ok = false;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool report(int id, const char* name, double budget, const std::function<void(Check&, std::string&)>& body) {
    Check c;
    std::string summary;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c, summary);
    } catch (const std::exception& e) {
        c.that(std::string("exception: ") + e.what(), false);
    }
    const double secs = seconds_since(t0);
    if (budget > 0.0)
        c.le("runtime [s]", secs, budget);
    std::printf("%s %d %s: %s (%.2f s)\n", c.ok ? "PASS" : "FAIL", id, name,
                c.ok ? summary.c_str() : c.first_failure.c_str(), secs);
    std::fflush(stdout);
    return c.ok;
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

Matrix projector(const Matrix& basis) {
    Eigen::JacobiSVD<Matrix> svd(basis, Eigen::ComputeThinU);
    const Index r = (svd.singularValues().array() > 1e-12 * svd.singularValues()[0]).count();
    const Matrix U = svd.matrixU().leftCols(r);
    return U * U.transpose();
}

std::pair<Shape, Rank> random_case(CounterRng& rng, int min_order, int max_order, Index max_dim) {
    std::uniform_int_distribution<int> order(min_order, max_order);
    for (;;) {
        const int d = order(rng);
        std::vector<Index> n, r;
        for (int k = 0; k < d; ++k) {
            n.push_back(std::uniform_int_distribution<Index>(1, max_dim)(rng));
            r.push_back(std::uniform_int_distribution<Index>(1, n.back())(rng));
        }
        if (Rank{r}.admissible(Shape(n)))
            return {Shape(n), Rank{r}};
    }
}

AmbientNorm weighted(CounterRng& rng, const Shape& s, double p) {
    std::uniform_real_distribution<double> w(0.5, 2.0);
    std::vector<ModeNorm> modes;
    for (Index k = 0; k < s.order(); ++k) {
        Vector v(s[k]);
        for (auto& x : v)
            x = w(rng);
        modes.emplace_back(p, v);
    }
    return AmbientNorm(modes);
}

ChartPoint random_chart(CounterRng& rng, const BasePoint& b, double scale) {
    ChartPoint c = origin(b);
    for (Index k = 0; k < b.order(); ++k) {
        Matrix L = gaussian_matrix(rng, c.L[k].rows(), c.L[k].cols());
        if (L.size() > 0)
            L *= scale / std::max(1.0, L.norm());
        c.L[k] = L;
    }
    c.E += 0.1 * gaussian_tensor(rng, c.E.shape());
    return c;
}

TangentVector random_tangent(CounterRng& rng, const BasePoint& b) {
    TangentVector tv = zero_tangent(b);
    tv.dC = gaussian_tensor(rng, tv.dC.shape());
    for (Index k = 0; k < b.order(); ++k)
        tv.dU[k] = b.complement(k) * gaussian_matrix(rng, b.complement(k).cols(), b.factor(k).cols());
    return tv;
}

Matrix basis_columns(const BasePoint& b) {
    const auto basis = tangent_basis(b);
    Matrix S(b.shape().size(), static_cast<Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i)
        S.col(static_cast<Index>(i)) = basis[i].data();
    return S;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Matrix random_symmetric(CounterRng& rng, Index n, double scale) {
    const Matrix m = gaussian_matrix(rng, n, n);
    return scale * 0.5 * (m + m.transpose());
}

Matrix laplacian(Index n) {
    Matrix L = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        L(i, i) = -2.0;
        if (i > 0)
            L(i, i - 1) = 1.0;
        if (i + 1 < n)
            L(i, i + 1) = 1.0;
    }
    return L;
}

std::vector<Vector> unit_factors(CounterRng& rng, const Shape& s) {
    std::vector<Vector> v;
    for (Index k = 0; k < s.order(); ++k)
        v.push_back(random_unit_vector(rng, s[k]));
    return v;
}

void ranks_and_subspaces(Check& c, std::string& summary) {
    CounterRng rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto [shape, rank] = random_case(rng, 2, 4, 6);
        const TuckerTensor u = random_minimal_tucker(rng, shape, rank);
        const DenseTensor t = tucker_to_dense(u);
        c.that("detected ranks " + Shape(tucker_ranks(t, 1e-10).r).str() + " != " + Shape(rank.r).str(),
               tucker_ranks(t, 1e-10) == rank);
        for (Index k = 0; k < shape.order(); ++k) {
            const double d = (projector(minimal_subspace(t, k).basis) - projector(u.factor(k))).norm();
            worst = std::max(worst, d);
            c.le("projector difference", d, 1e-8);
        }
    }
    summary = "100 constructions, ranks exact, max projector difference " + fmt("%.2e", worst);
}

void norms(Check& c, std::string& summary) {
    CounterRng rng(202);
    double worst_cross = 0.0;
    for (double p : {1.5, 2.0, 3.0}) {
        for (int trial = 0; trial < 100; ++trial) {
            const auto [shape, rank] = random_case(rng, 2, 4, 5);
            (void)rank;
            const AmbientNorm n = weighted(rng, shape, p);
            std::vector<Vector> v;
            double prod = 1.0;
            for (Index k = 0; k < shape.order(); ++k) {
                v.push_back(gaussian_vector(rng, shape[k]));
                prod *= n.mode(k)(v.back());
            }
            const double rel = std::abs(n(elementary_tensor(v)) - prod) / prod;
            worst_cross = std::max(worst_cross, rel);
            c.le("crossnorm relative deviation", rel, 1e-12);
            if (trial < 10) {
                const double lb = injective_norm(elementary_tensor(v), n).lower_bound;
                c.le("injective lb of elementary tensor vs ambient", lb, n(elementary_tensor(v)) * (1.0 + 1e-12));
            }
        }
        for (int trial = 0; trial < 10; ++trial) {
            const Shape s{3, 3, 3};
            const AmbientNorm n = weighted(rng, s, p);
            const DenseTensor t = gaussian_tensor(rng, s);
            c.le("injective lower bound - ambient norm", injective_norm(t, n).lower_bound - n(t), 1e-12);
        }
    }
    double worst_svd = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const DenseTensor m = gaussian_tensor(rng, Shape{2 + trial % 5, 3 + trial % 3});
        const double smax = Eigen::JacobiSVD<Matrix>(matricize(m, 0)).singularValues()[0];
        const double d = std::abs(injective_norm(m, AmbientNorm::uniform(2.0)).lower_bound - smax);
        worst_svd = std::max(worst_svd, d);
        c.le("|injective - sigma_max|", d, 1e-10);
    }
    summary = "crossnorm max rel. deviation " + fmt("%.2e", worst_cross) + ", domination holds, |lb - sigma_max| <= " +
              fmt("%.2e", worst_svd);
}

const std::vector<std::pair<Shape, Rank>> chart_cases = {
    {Shape{4, 5, 3}, Rank{{2, 3, 2}}}, {Shape{3, 3}, Rank{{2, 2}}}, {Shape{2, 3, 2, 3}, Rank{{1, 2, 2, 2}}},
    {Shape{4, 2, 3}, Rank{{2, 2, 3}}}, {Shape{5, 5}, Rank{{1, 1}}}};

void charts(Check& c, std::string& summary) {
    CounterRng rng(303);
    double worst_round = 0.0, worst_trans = 0.0, min_order = 1e300;
    for (int trial = 0; trial < 100; ++trial) {
        const auto& [shape, rank] = chart_cases[static_cast<std::size_t>(trial) % chart_cases.size()];
        const BasePoint b = make_base(random_minimal_tucker(rng, shape, rank));
        const ChartPoint cp = random_chart(rng, b, 1.0);
        const ChartPoint back = invert_chart(b, retract(b, cp));
        double d = max_abs(back.E.data() - cp.E.data());
        for (Index k = 0; k < b.order(); ++k)
            d = std::max(d, max_abs(back.L[k] - cp.L[k]));
        worst_round = std::max(worst_round, d);
        c.le("chart roundtrip", d, 1e-10);

        const BasePoint b2 = make_base(retract(b, random_chart(rng, b, 0.3)));
        const ChartPoint c1 = random_chart(rng, b, 0.3);
        const DenseTensor w1 = tucker_to_dense(retract(b, c1));
        const double t = (tucker_to_dense(retract(b2, transition(b, b2, c1))) - w1).frobenius_norm() / w1.frobenius_norm();
        worst_trans = std::max(worst_trans, t);
        c.le("transition dense mismatch", t, 1e-10);
    }
    for (const auto& [shape, rank] : chart_cases) {
        const BasePoint b = make_base(random_minimal_tucker(rng, shape, rank));
        const ChartPoint c0 = random_chart(rng, b, 0.3);
        const ChartPoint dir = random_chart(rng, b, 0.3);
        auto curve = [&](double t) {
            ChartPoint x = c0;
            for (Index k = 0; k < b.order(); ++k)
                x.L[k] += t * dir.L[k] + t * t * c0.L[k];
            x.E += t * dir.E;
            return tucker_to_dense(retract(b, x));
        };
        const BasePoint at = make_base(retract(b, c0));
        std::vector<double> res;
        for (double h : {1e-3, 1e-4}) {
            const DenseTensor dd = (1.0 / (2.0 * h)) * (curve(h) - curve(-h));
            res.push_back((dd - embed_tangent(project_tangent(at, dd))).frobenius_norm() / dd.frobenius_norm());
        }
        const double order = std::log10(res[0] / res[1]);
        min_order = std::min(min_order, order);
        c.ge("tangency finite-difference order", order, 1.9);
    }
    summary = "roundtrip " + fmt("%.2e", worst_round) + ", transition " + fmt("%.2e", worst_trans) +
              ", min tangency order " + fmt("%.2f", min_order);
}

void embedding(Check& c, std::string& summary) {
    CounterRng rng(404);
    double worst_rt = 0.0, worst_gram = 0.0, worst_kin = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto& [shape, rank] = chart_cases[static_cast<std::size_t>(trial) % chart_cases.size()];
        const BasePoint b = make_base(random_minimal_tucker(rng, shape, rank));
        const TangentVector tv = random_tangent(rng, b);
        const DenseTensor w = embed_tangent(tv);
        const TangentVector back = extract_tangent(b, w);
        double d = max_abs(back.dC.data() - tv.dC.data());
        for (Index k = 0; k < b.order(); ++k)
            d = std::max(d, max_abs(back.dU[k] - tv.dU[k]));
        worst_rt = std::max(worst_rt, d);
        c.le("embed/extract roundtrip", d, 1e-11);

        std::vector<Matrix> U;
        for (Index k = 0; k < b.order(); ++k)
            U.push_back(b.factor(k));
        const Vector want = oracle::kinematic_sum(rank.r, b.core().data(), U, tv.dC.data(), tv.dU);
        const double kin = (w.data() - want).cwiseAbs().maxCoeff() / std::max(1.0, want.cwiseAbs().maxCoeff());
        worst_kin = std::max(worst_kin, kin);
        c.le("embed vs kinematic sum", kin, 1e-12);

        if (trial < static_cast<int>(chart_cases.size())) {
            const Matrix S = basis_columns(b);
            const double g = max_abs(S.transpose() * S - Matrix::Identity(S.cols(), S.cols()));
            worst_gram = std::max(worst_gram, g);
            c.le("tangent basis Gram - I", g, 1e-12);
            c.that("tangent basis size", S.cols() == b.tangent_dimension());
        }
    }
    summary = "roundtrip " + fmt("%.2e", worst_rt) + ", Gram " + fmt("%.2e", worst_gram) + ", kinematic oracle " +
              fmt("%.2e", worst_kin);
}

void projections(Check& c, std::string& summary) {
    CounterRng rng(505);
    double worst_h = 0.0;
    for (const auto& [shape, rank] : chart_cases) {
        const BasePoint b = make_base(random_minimal_tucker(rng, shape, rank));
        const Matrix S = basis_columns(b);
        for (int trial = 0; trial < 5; ++trial) {
            const DenseTensor g = gaussian_tensor(rng, shape);
            const ProjectionReport r = project_hilbert(b, g);
            const double orth = (S.transpose() * (g.data() - r.dense.data())).cwiseAbs().maxCoeff() / g.frobenius_norm();
            const double ls = (r.dense.data() - oracle::least_squares_projection(S, g.data())).norm() / g.frobenius_norm();
            worst_h = std::max({worst_h, orth, ls});
            c.le("Hilbert residual orthogonality", orth, 1e-10);
            c.le("Hilbert vs normal equations", ls, 1e-10);
        }
    }
    double worst_dual = 0.0;
    const std::vector<double> ps{1.2, 1.5, 2.0, 3.0, 5.0};
    for (int trial = 0; trial < 200; ++trial) {
        const double p = ps[static_cast<std::size_t>(trial) % ps.size()];
        const Shape s{2 + trial % 3, 3, 1 + trial % 2};
        const AmbientNorm n = weighted(rng, s, p);
        const DenseTensor x = gaussian_tensor(rng, s);
        const DualVector j = duality_map(x, n);
        const double nx = n(x);
        const double e = std::max(std::abs(inner(x, j.coefficients) - nx * nx) / (nx * nx),
                                  std::abs(n.dual(j.coefficients) - nx) / nx);
        worst_dual = std::max(worst_dual, e);
        c.le("duality map identity", e, 1e-12);
    }
    double worst_p2 = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const BasePoint b = make_base(random_minimal_tucker(rng, Shape{4, 3, 3}, Rank{{2, 2, 2}}));
        const DenseTensor g = gaussian_tensor(rng, b.shape());
        const DenseTensor h = project_hilbert(b, g).dense;
        const AmbientNorm n = AmbientNorm::uniform(2.0);
        const double m = (project_metric_lp(b, g, n).dense - h).frobenius_norm() / g.frobenius_norm();
        const double q = (project_generalized_lp(b, g, n).dense - h).frobenius_norm() / g.frobenius_norm();
        worst_p2 = std::max({worst_p2, m, q});
        c.le("p = 2 Banach vs Hilbert", std::max(m, q), 1e-8);
    }
    double worst_res = 0.0;
    int perturbations = 0;
    std::uniform_real_distribution<double> logscale(-4.0, 0.0);
    for (double p : {1.5, 3.0}) {
        for (int inst = 0; inst < 3; ++inst) {
            const BasePoint b = make_base(random_minimal_tucker(rng, Shape{4, 3, 3}, Rank{{2, 2, 2}}));
            const AmbientNorm n = weighted(rng, b.shape(), p);
            const DenseTensor g = gaussian_tensor(rng, b.shape());
            const double gn = n(g);
            const ProjectionReport m = project_metric_lp(b, g, n);
            const ProjectionReport q = project_generalized_lp(b, g, n);
            worst_res = std::max({worst_res, m.duality_residual, q.duality_residual});
            c.le("metric duality residual", m.duality_residual, 1e-8);
            c.le("generalized duality residual", q.duality_residual, 1e-8);
            const Matrix S = basis_columns(b);
            const double phi = generalized_distance(q.dense, g, n);
            for (int i = 0; i < 1000; ++i) {
                const DenseTensor z(b.shape(), S * gaussian_vector(rng, S.cols()));
                const DenseTensor dz = (std::pow(10.0, logscale(rng)) * gn / n(z)) * z;
                c.ge("metric objective gain under perturbation", n(m.dense + dz - g) - m.objective, -1e-12 * gn);
                c.ge("generalized objective gain under perturbation", generalized_distance(q.dense + dz, g, n) - phi,
                     -1e-12 * gn * gn);
                ++perturbations;
            }
        }
    }
    summary = "Hilbert " + fmt("%.2e", worst_h) + ", duality identities " + fmt("%.2e", worst_dual) + ", p=2 agreement " +
              fmt("%.2e", worst_p2) + ", max Banach residual " + fmt("%.2e", worst_res) + ", " +
              std::to_string(perturbations) + " perturbations optimal";
}

void hartree(Check& c, std::string& summary) {
    CounterRng rng(606);
    const Shape s3{3, 2, 2};
    double id_err = 0.0;
    for (double dt : {0.1, 0.05, 0.025}) {
        const auto rec = integrate_hartree(KroneckerSumOperator::identity(s3), HartreeState{1.0, unit_factors(rng, s3)}, 1.0, dt);
        const double rel = std::abs(std::get<HartreeState>(rec.final_state()).lambda - std::exp(1.0)) / std::exp(1.0);
        id_err = std::max(id_err, rel / std::pow(dt, 4));
        c.le("identity flow lambda rel. error / dt^4", rel / std::pow(dt, 4), 10.0);
    }

    const Shape s{4, 4, 4};
    std::vector<Matrix> ops;
    for (Index k = 0; k < 3; ++k)
        ops.push_back(random_symmetric(rng, 4, 0.5));
    const auto v0 = unit_factors(rng, s);
    const auto rec = integrate_hartree(KroneckerSumOperator::kronecker_sum(ops), HartreeState{1.0, v0}, 1.0, 1e-3);
    std::vector<Vector> exact;
    for (std::size_t k = 0; k < 3; ++k)
        exact.push_back(oracle::expm(ops[k]) * v0[k]);
    const DenseTensor want = elementary_tensor(exact);
    const double kron = (dense(rec.final_state()) - want).frobenius_norm() / want.frobenius_norm();
    c.le("Kronecker-sum vs matrix exponential", kron, 1e-6);

    double tangency = 0.0;
    for (const auto& d : rec.diagnostics)
        tangency = std::max(tangency, d.sphere_tangency);

    const Shape so{3, 3, 2};
    std::vector<KroneckerSumOperator::Term> terms;
    for (int j = 0; j < 3; ++j)
        terms.push_back({gaussian_matrix(rng, 3, 3), gaussian_matrix(rng, 3, 3), gaussian_matrix(rng, 2, 2)});
    const KroneckerSumOperator A(terms);
    const HartreeState h0{1.0, unit_factors(rng, so)};
    const DenseTensor fine = dense(integrate_hartree(A, h0, 1.0, 0.1 / 32).final_state());
    std::vector<double> err;
    for (double dt : {0.1, 0.05}) {
        const auto r = integrate_hartree(A, h0, 1.0, dt);
        err.push_back((dense(r.final_state()) - fine).frobenius_norm());
        for (const auto& d : r.diagnostics)
            tangency = std::max(tangency, d.sphere_tangency);
    }
    const double order = std::log2(err[0] / err[1]);
    c.ge("Hartree observed order", order, 3.7);
    c.le("sphere tangency", tangency, 1e-12);
    summary = "identity max err/dt^4 " + fmt("%.2f", id_err) + ", Kronecker-sum rel. error " + fmt("%.2e", kron) +
              ", order " + fmt("%.2f", order) + ", max tangency " + fmt("%.1e", tangency);
}

void dlra(Check& c, std::string& summary) {
    CounterRng rng(707);
    const Shape s{3, 3, 2};
    std::vector<Matrix> ops;
    for (Index k = 0; k < 3; ++k)
        ops.push_back(random_symmetric(rng, s[k], 0.5));
    const KroneckerSumOperator A = KroneckerSumOperator::kronecker_sum(ops);
    const DenseTensor u0 = gaussian_tensor(rng, s);
    const double dt = 0.01;
    const DenseTensor red = dense(integrate_tucker_dlra(linear_flow(A), to_tucker(u0), 1.0, dt).final_state());
    const DenseTensor ref = dense(reference_solve(A, u0, 1.0, dt).final_state());
    const double full = (red - ref).frobenius_norm() / ref.frobenius_norm();
    c.le("full-rank DLRA vs ambient RK4", full, 1e-10);

    const KroneckerSumOperator L = KroneckerSumOperator::kronecker_sum({laplacian(6), laplacian(6)});
    const DenseTensor h0 = gaussian_tensor(rng, Shape{6, 6});
    const DenseTensor heat = dense(reference_solve(L, h0, 0.5, 0.01).final_state());
    std::vector<double> err;
    for (Index r = 1; r <= 3; ++r)
        err.push_back((dense(integrate_tucker_dlra(linear_flow(L), hosvd_truncate(h0, Rank{{r, r}}), 0.5, 0.01).final_state()) -
                       heat)
                          .frobenius_norm());
    c.that("terminal error not monotone in rank", err[0] >= err[1] && err[1] >= err[2]);

    const Shape sg{4, 3, 3};
    std::vector<KroneckerSumOperator::Term> terms;
    for (int j = 0; j < 2; ++j)
        terms.push_back({gaussian_matrix(rng, 4, 4), gaussian_matrix(rng, 3, 3), gaussian_matrix(rng, 3, 3)});
    const KroneckerSumOperator G(terms);
    const TuckerTensor v0 = random_minimal_tucker(rng, sg, Rank{{2, 2, 2}});
    double worst = 0.0;
    for (Projector kind : {Projector::hilbert, Projector::metric, Projector::generalized}) {
        for (double p : {1.5, 2.0, 3.0}) {
            if (kind == Projector::hilbert && p != 2.0)
                continue;
            DlraOptions opts;
            opts.projector = kind;
            opts.norm = AmbientNorm::uniform(p);
            const auto rec = integrate_tucker_dlra(linear_flow(G), v0, 0.2, 0.05, opts);
            for (const auto& d : rec.diagnostics) {
                worst = std::max(worst, d.projection_residual);
                c.le("Galerkin residual", d.projection_residual, opts.projection.tol);
            }
        }
    }
    summary = "full-rank rel. difference " + fmt("%.2e", full) + ", Laplacian errors " + fmt("%.3e", err[0]) + " >= " +
              fmt("%.3e", err[1]) + " >= " + fmt("%.3e", err[2]) + ", max Galerkin residual " + fmt("%.2e", worst);
}

void reproducibility(Check& c, std::string& summary) {
    const auto dir = tdf::testing::scratch_dir("acceptance");
    write_text(dir / "config.json", R"({"seed": 17, "problem": "random-symmetric", "shape": [4, 3, 3], "rank": [2, 2, 2],
 "initial": "random", "integrator": {"method": "dlra", "T": 0.5, "dt": 0.05, "projector": "generalized", "p": 1.5}})");
    std::string outs[2], csv[2], js[2];
    for (int i = 0; i < 2; ++i) {
        const std::string tag = std::to_string(i);
        const auto r = tdf::testing::run_cli("evolve --config " + (dir / "config.json").string() + " --csv " +
                                             (dir / ("run" + tag + ".csv")).string() + " --json " +
                                             (dir / ("run" + tag + ".json")).string() + " --dump-states");
        c.that("evolve exit code " + std::to_string(r.exit_code), r.exit_code == 0);
        outs[i] = r.out;
        csv[i] = tdf::testing::slurp(dir / ("run" + tag + ".csv"));
        js[i] = tdf::testing::slurp(dir / ("run" + tag + ".json"));
    }
    c.that("summary differs", outs[0] == outs[1]);
    c.that("CSV differs", csv[0] == csv[1]);
    c.that("trajectory JSON differs", js[0] == js[1]);
    c.that("empty output", !csv[0].empty() && !js[0].empty() && !outs[0].empty());
    std::filesystem::remove_all(dir);
    summary = "two runs identical (" + std::to_string(csv[0].size()) + " B CSV, " + std::to_string(js[0].size()) +
              " B JSON)";
}

} // namespace

int main() {
    int failed = 0;
    failed += !report(1, "rank and minimal subspaces", 10.0, ranks_and_subspaces);
    failed += !report(2, "crossnorm and injective norm", 30.0, norms);
    failed += !report(3, "chart calculus", 0.0, charts);
    failed += !report(4, "tangent embedding", 0.0, embedding);
    failed += !report(5, "projections", 120.0, projections);
    failed += !report(6, "Hartree integrator", 0.0, hartree);
    failed += !report(7, "DLRA integrator", 0.0, dlra);
    failed += !report(8, "reproducibility", 0.0, reproducibility);
    std::printf("%d of 8 criteria passed\n", 8 - failed);
    return failed == 0 ? 0 : 1;
}
