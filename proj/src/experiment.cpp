#include "tdf/experiment.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <memory>

#include "tdf/random.hpp"

namespace tdf {

namespace {

const json* find(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() || it->is_null() ? nullptr : &*it;
}

double real(const json& j, const char* key) {
    if (!j.is_number())
        throw FormatError(std::string("\"") + key + "\" must be a number");
    const double x = j.get<double>();
    if (!std::isfinite(x))
        throw FormatError(std::string("\"") + key + "\" must be finite");
    return x;
}

std::vector<Index> index_list(const json& j, const char* key) {
    if (!j.is_array() || j.empty())
        throw FormatError(std::string("\"") + key + "\" must be a non-empty array of positive integers");
    std::vector<Index> out;
    for (const auto& v : j) {
        if (!v.is_number_integer() || v.get<long long>() < 1)
            throw FormatError(std::string("\"") + key + "\" must be a non-empty array of positive integers");
        out.push_back(static_cast<Index>(v.get<long long>()));
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const json& j, const char* key) {
    if (!j.is_string())
        throw FormatError(std::string("\"") + key + "\" must be a path string");
    std::filesystem::path p = j.get<std::string>();
    return p.is_absolute() || base.empty() ? p : base / p;
}

Matrix dirichlet_laplacian(Index n) {
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

AmbientNorm config_norm(const ExperimentConfig& cfg) {
    if (cfg.weights.empty())
        return AmbientNorm::uniform(cfg.p);
    std::vector<ModeNorm> modes;
    for (const auto& w : cfg.weights)
        modes.emplace_back(cfg.p, w);
    return AmbientNorm(modes);
}

double max_finite(const std::vector<StepDiagnostics>& d, double StepDiagnostics::*field) {
    double m = std::numeric_limits<double>::quiet_NaN();
    for (const auto& x : d)
        if (std::isfinite(x.*field))
            m = std::isnan(m) ? x.*field : std::max(m, x.*field);
    return m;
}

double min_finite(const std::vector<StepDiagnostics>& d, double StepDiagnostics::*field) {
    double m = std::numeric_limits<double>::quiet_NaN();
    for (const auto& x : d)
        if (std::isfinite(x.*field))
            m = std::isnan(m) ? x.*field : std::min(m, x.*field);
    return m;
}

json value_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

} // namespace

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object())
        throw FormatError("configuration must be a JSON object");
    static const std::vector<std::string> known = {"seed",    "problem",   "shape",  "rank",  "norm",
                                                   "integrator", "initial", "reference", "output"};
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw FormatError("unknown configuration field \"" + key + "\"");

    ExperimentConfig cfg;
    if (const json* s = find(j, "seed")) {
        if (!s->is_number_unsigned())
            throw FormatError("\"seed\" must be a non-negative integer");
        cfg.seed = s->get<std::uint64_t>();
    }
    if (const json* pr = find(j, "problem")) {
        if (pr->is_string()) {
            cfg.problem = pr->get<std::string>();
            if (cfg.problem != "identity" && cfg.problem != "kronecker-laplacian" && cfg.problem != "random-symmetric")
                throw FormatError("unknown problem preset \"" + cfg.problem +
                                  "\" (expected identity, kronecker-laplacian, random-symmetric or {\"file\": ...})");
        } else if (pr->is_object() && pr->contains("file")) {
            cfg.problem = "file";
            cfg.operator_file = resolve(base_dir, pr->at("file"), "problem.file");
        } else {
            throw FormatError("\"problem\" must be a preset name or {\"file\": path}");
        }
    }
    if (const json* s = find(j, "shape"))
        cfg.shape = index_list(*s, "shape");
    if (const json* r = find(j, "rank"))
        cfg.rank = index_list(*r, "rank");

    if (const json* n = find(j, "norm")) {
        if (!n->is_object())
            throw FormatError("\"norm\" must be an object");
        if (const json* p = find(*n, "p"))
            cfg.p = real(*p, "norm.p");
        if (const json* w = find(*n, "weights")) {
            if (!w->is_array())
                throw FormatError("\"norm.weights\" must be an array of per-mode arrays");
            for (const auto& mode : *w) {
                if (!mode.is_array())
                    throw FormatError("\"norm.weights\" must be an array of per-mode arrays");
                Vector v(static_cast<Index>(mode.size()));
                for (Index i = 0; i < v.size(); ++i)
                    v[i] = real(mode[static_cast<std::size_t>(i)], "norm.weights");
                cfg.weights.push_back(v);
            }
        }
    }

    if (const json* in = find(j, "integrator")) {
        if (!in->is_object())
            throw FormatError("\"integrator\" must be an object");
        if (const json* m = find(*in, "method")) {
            const std::string s = m->is_string() ? m->get<std::string>() : "";
            if (s == "hartree")
                cfg.method = Method::hartree;
            else if (s == "dlra")
                cfg.method = Method::dlra;
            else
                throw FormatError("\"integrator.method\" must be \"hartree\" or \"dlra\"");
        }
        if (const json* t = find(*in, "T"))
            cfg.T = real(*t, "integrator.T");
        if (const json* t = find(*in, "dt"))
            cfg.dt = real(*t, "integrator.dt");
        if (const json* pj = find(*in, "projector")) {
            if (!pj->is_string())
                throw FormatError("\"integrator.projector\" must be a string");
            try {
                cfg.projector = parse_projector(pj->get<std::string>());
            } catch (const InvalidArgument& e) {
                throw FormatError(e.what());
            }
        }
        if (const json* p = find(*in, "p"))
            cfg.p = real(*p, "integrator.p");
        if (const json* t = find(*in, "tol"))
            cfg.projection.tol = real(*t, "integrator.tol");
        if (const json* t = find(*in, "max_iterations")) {
            if (!t->is_number_integer() || t->get<long long>() < 1)
                throw FormatError("\"integrator.max_iterations\" must be a positive integer");
            cfg.projection.max_iterations = static_cast<int>(t->get<long long>());
        }
    }

    if (const json* i = find(j, "initial")) {
        if (i->is_string()) {
            cfg.initial = i->get<std::string>();
            if (cfg.initial != "tucker" && cfg.initial != "random")
                throw FormatError("\"initial\" must be \"tucker\", \"random\" or {\"file\": path}");
        } else if (i->is_object() && i->contains("file")) {
            cfg.initial = "file";
            cfg.initial_file = resolve(base_dir, i->at("file"), "initial.file");
        } else {
            throw FormatError("\"initial\" must be \"tucker\", \"random\" or {\"file\": path}");
        }
    }
    if (const json* r = find(j, "reference")) {
        if (!r->is_boolean())
            throw FormatError("\"reference\" must be true or false");
        cfg.reference = r->get<bool>();
    }
    if (const json* o = find(j, "output")) {
        if (!o->is_object())
            throw FormatError("\"output\" must be an object");
        if (const json* c = find(*o, "csv"))
            cfg.csv_path = resolve(base_dir, *c, "output.csv");
        if (const json* c = find(*o, "json"))
            cfg.json_path = resolve(base_dir, *c, "output.json");
        if (const json* c = find(*o, "dump_states")) {
            if (!c->is_boolean())
                throw FormatError("\"output.dump_states\" must be true or false");
            cfg.dump_states = c->get<bool>();
        }
    }

    if (!(cfg.T > 0.0))
        throw FormatError("\"integrator.T\" must be positive");
    if (!(cfg.dt > 0.0))
        throw FormatError("\"integrator.dt\" must be positive");
    if (!(cfg.p > 1.0))
        throw FormatError("norm exponent p must exceed 1");
    if (!(cfg.projection.tol > 0.0))
        throw FormatError("\"integrator.tol\" must be positive");
    if (cfg.problem != "file" && cfg.initial != "file" && cfg.shape.empty())
        throw FormatError("\"shape\" is required unless the operator or initial value comes from a file");
    if (!cfg.shape.empty() && cfg.shape.size() < 2)
        throw FormatError("\"shape\" needs at least two modes");
    if (!cfg.rank.empty() && !cfg.shape.empty() && cfg.rank.size() != cfg.shape.size())
        throw FormatError("\"rank\" must have one entry per mode");
    if (cfg.method == Method::hartree)
        for (Index r : cfg.rank)
            if (r != 1)
                throw FormatError("the Hartree method needs rank 1 in every mode");
    if (cfg.method == Method::hartree && cfg.projector != Projector::hilbert)
        throw FormatError("the Hartree method uses the Hilbert projector only");
    if (!cfg.weights.empty() && !cfg.shape.empty()) {
        if (cfg.weights.size() != cfg.shape.size())
            throw FormatError("\"norm.weights\" must have one array per mode");
        for (std::size_t k = 0; k < cfg.shape.size(); ++k)
            if (cfg.weights[k].size() != cfg.shape[k] || !(cfg.weights[k].array() > 0.0).all())
                throw FormatError("\"norm.weights\" mode " + std::to_string(k) + " must hold " +
                                  std::to_string(cfg.shape[k]) + " positive weights");
    }
    return cfg;
}

std::optional<std::vector<Matrix>> kronecker_sum_generators(const KroneckerSumOperator& A) {
    const Shape& s = A.shape();
    std::vector<Matrix> gen;
    for (Index k = 0; k < s.order(); ++k)
        gen.push_back(Matrix::Zero(s[k], s[k]));
    auto scalar = [](const Matrix& m) {
        const double c = m(0, 0);
        return (m - c * Matrix::Identity(m.rows(), m.cols())).isZero(0.0);
    };
    for (const auto& term : A.terms()) {
        Index active = -1;
        double scale = 1.0;
        for (Index k = 0; k < s.order(); ++k) {
            const Matrix& m = term[static_cast<std::size_t>(k)];
            if (scalar(m)) {
                scale *= m(0, 0);
            } else if (active < 0) {
                active = k;
            } else {
                return std::nullopt;
            }
        }
        if (active < 0)
            gen[0] += scale * Matrix::Identity(s[0], s[0]);
        else
            gen[static_cast<std::size_t>(active)] += scale * term[static_cast<std::size_t>(active)];
    }
    return gen;
}

Problem build_problem(const ExperimentConfig& cfg) {
    const CounterRng root(cfg.seed);
    Problem pb;
    if (cfg.problem == "file") {
        pb.A = operator_from_json(read_json(cfg.operator_file));
        if (!cfg.shape.empty() && !(pb.A.shape() == Shape(cfg.shape)))
            throw FormatError("operator shape " + pb.A.shape().str() + " does not match the configured shape");
    }
    if (cfg.initial == "file") {
        pb.u0 = read_tensor(cfg.initial_file);
    }
    Shape shape = !cfg.shape.empty()          ? Shape(cfg.shape)
                  : cfg.problem == "file"     ? pb.A.shape()
                                              : pb.u0.shape();
    if (cfg.initial == "file" && !(pb.u0.shape() == shape))
        throw FormatError("initial tensor shape " + pb.u0.shape().str() + " does not match " + shape.str());
    if (!cfg.weights.empty() && static_cast<Index>(cfg.weights.size()) != shape.order())
        throw FormatError("\"norm.weights\" must have one array per mode");

    if (cfg.problem == "identity") {
        pb.A = KroneckerSumOperator::identity(shape);
    } else if (cfg.problem == "kronecker-laplacian") {
        std::vector<Matrix> ops;
        for (Index k = 0; k < shape.order(); ++k)
            ops.push_back(dirichlet_laplacian(shape[k]));
        pb.A = KroneckerSumOperator::kronecker_sum(ops);
    } else if (cfg.problem == "random-symmetric") {
        CounterRng rng = root.split(1);
        std::vector<Matrix> ops;
        for (Index k = 0; k < shape.order(); ++k) {
            const Matrix m = gaussian_matrix(rng, shape[k], shape[k]);
            ops.push_back((0.5 / std::sqrt(static_cast<double>(shape[k]))) * (m + m.transpose()));
        }
        pb.A = KroneckerSumOperator::kronecker_sum(ops);
    }

    std::vector<Index> rank = cfg.rank.empty() ? std::vector<Index>(static_cast<std::size_t>(shape.order()), 1) : cfg.rank;
    if (static_cast<Index>(rank.size()) != shape.order())
        throw FormatError("\"rank\" must have one entry per mode");
    if (!Rank{rank}.admissible(shape))
        throw FormatError("rank " + Shape(rank).str() + " is not admissible for shape " + shape.str());
    if (cfg.initial == "tucker") {
        CounterRng rng = root.split(2);
        pb.u0 = tucker_to_dense(random_minimal_tucker(rng, shape, Rank{rank}));
        pb.u0 *= 1.0 / pb.u0.frobenius_norm();
    } else if (cfg.initial == "random") {
        CounterRng rng = root.split(2);
        pb.u0 = gaussian_tensor(rng, shape);
    }

    if (cfg.reference) {
        if (const auto gen = kronecker_sum_generators(pb.A)) {
            const std::vector<Matrix> g = *gen;
            const DenseTensor u0 = pb.u0;
            pb.reference = [g, u0](double t) {
                std::vector<Matrix> E;
                for (const auto& m : g)
                    E.push_back(Matrix(t * m).exp());
                return multilinear_product(u0, std::span<const Matrix>(E));
            };
        } else {
            if (shape.size() > max_reference_size)
                throw FormatError("reference solve limited to " + std::to_string(max_reference_size) + " unknowns");
            // marched forward on a ten times finer grid as the integrator asks for later times
            struct March {
                double t = 0.0;
                DenseTensor u;
            };
            auto state = std::make_shared<March>(March{0.0, pb.u0});
            const KroneckerSumOperator A = pb.A;
            const double fine = cfg.dt / 10.0;
            const DenseTensor u0 = pb.u0;
            pb.reference = [state, A, fine, u0](double t) {
                if (t < state->t)
                    *state = March{0.0, u0};
                if (t > state->t) {
                    state->u = dense(reference_solve(A, state->u, t - state->t, fine, false).final_state());
                    state->t = t;
                }
                return state->u;
            };
        }
    }
    return pb;
}

RunResult run_experiment(const ExperimentConfig& cfg, const Problem& pb) {
    const Shape shape = pb.u0.shape();
    std::vector<Index> rank = cfg.rank.empty() ? std::vector<Index>(static_cast<std::size_t>(shape.order()), 1) : cfg.rank;
    RunResult out;
    json& s = out.summary;
    s["method"] = cfg.method == Method::hartree ? "hartree" : "dlra";
    s["seed"] = cfg.seed;
    s["shape"] = shape.dims();
    s["rank"] = rank;
    s["T"] = cfg.T;
    s["dt"] = cfg.dt;

    if (cfg.method == Method::hartree) {
        const TuckerTensor u = hosvd_truncate(pb.u0, Rank{rank});
        HartreeState h0;
        h0.lambda = u.core().data()[0];
        for (const auto& f : u.factors())
            h0.factors.push_back(f.col(0));
        if (h0.lambda < 0.0) {
            h0.lambda = -h0.lambda;
            h0.factors[0] = -h0.factors[0];
        }
        IntegratorOptions opts;
        opts.keep_states = cfg.dump_states;
        opts.reference = pb.reference;
        out.record = integrate_hartree(pb.A, h0, cfg.T, cfg.dt, opts);
        const StepDiagnostics& last = out.record.diagnostics.back();
        s["projector"] = "hilbert";
        s["lambda0"] = h0.lambda;
        s["final_lambda"] = last.lambda;
        s["lambda_closed_form"] = last.lambda_closed_form;
        s["max_norm_drift"] = value_or_null(max_finite(out.record.diagnostics, &StepDiagnostics::norm_drift));
        s["max_sphere_tangency"] =
            value_or_null(max_finite(out.record.diagnostics, &StepDiagnostics::sphere_tangency));
    } else {
        const TuckerTensor v0 = hosvd_truncate(pb.u0, Rank{rank});
        DlraOptions opts;
        opts.projector = cfg.projector;
        opts.norm = config_norm(cfg);
        opts.projection = cfg.projection;
        opts.keep_states = cfg.dump_states;
        opts.reference = pb.reference;
        out.record = integrate_tucker_dlra(linear_flow(pb.A), v0, cfg.T, cfg.dt, opts);
        s["projector"] = to_string(cfg.projector);
        s["p"] = cfg.p;
        s["max_projection_residual"] =
            value_or_null(max_finite(out.record.diagnostics, &StepDiagnostics::projection_residual));
        s["min_core_condition"] = value_or_null(min_finite(out.record.diagnostics, &StepDiagnostics::core_condition));
    }
    s["steps"] = out.record.steps();
    const DenseTensor fin = dense(out.record.final_state());
    s["final_norm"] = fin.frobenius_norm();
    if (pb.reference) {
        const DenseTensor ref = pb.reference(out.record.times.back());
        const double err = (fin - ref).frobenius_norm();
        const double rn = ref.frobenius_norm();
        s["terminal_error"] = err;
        s["terminal_relative_error"] = rn > 0.0 ? json(err / rn) : json(nullptr);
    } else {
        s["terminal_error"] = nullptr;
        s["terminal_relative_error"] = nullptr;
    }
    return out;
}

json dt_sweep(const ExperimentConfig& cfg, const Problem& pb, int levels) {
    if (levels < 3)
        throw FormatError("--dt-sweep needs at least 3 levels");
    ExperimentConfig c = cfg;
    json rows = json::array();
    std::vector<DenseTensor> finals;
    for (int l = 0; l < levels; ++l) {
        c.dt = cfg.dt / std::pow(2.0, l);
        Problem level = pb;
        if (pb.reference && !kronecker_sum_generators(pb.A))
            level = build_problem(c);
        const RunResult r = run_experiment(c, level);
        finals.push_back(dense(r.record.final_state()));
        json row = {{"dt", c.dt}, {"steps", r.record.steps()}, {"terminal_error", r.summary["terminal_error"]}};
        if (r.summary.contains("final_lambda"))
            row["final_lambda"] = r.summary["final_lambda"];
        rows.push_back(row);
    }
    json out = {{"levels", rows}};
    const std::size_t n = finals.size();
    const double d1 = (finals[n - 3] - finals[n - 2]).frobenius_norm();
    const double d2 = (finals[n - 2] - finals[n - 1]).frobenius_norm();
    const double order = std::log2(d1 / d2);
    out["observed_order"] = value_or_null(order);
    return out;
}

} // namespace tdf
