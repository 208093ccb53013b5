#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "tdf/experiment.hpp"
#include "tdf/io.hpp"
#include "tdf/projection.hpp"
#include "tdf/random.hpp"

using namespace tdf;

namespace {

enum Exit { ok = 0, usage = 1, io = 2, format = 3, solver = 4, degenerate = 5, falsified = 6 };

const char* csv_help = R"(CSV columns (one row per recorded time, "nan" when not applicable):
  step                 step index, 0 is the initial state
  t                    time
  projection_residual  largest Galerkin residual over the RK4 stages (dlra)
  core_condition       min over modes of sigma_min/sigma_max of the core unfoldings (dlra)
  reference_error      Frobenius distance to the reference solution
  norm_drift           max | ||v_k|| - 1 | before renormalization (hartree)
  sphere_tangency      max |<dv_k, v_k>| over stages and modes (hartree)
  lambda               lambda (hartree)
  lambda_closed_form   lambda_0 exp(trapezoid integral of <A (x)v, (x)v>) (hartree))";

void emit(const json& j) { std::cout << dump(j) << '\n'; }

AmbientNorm make_norm(double p, const std::string& weights_file, const Shape& shape) {
    if (weights_file.empty())
        return AmbientNorm::uniform(p);
    const json w = read_json(weights_file);
    if (!w.is_array() || static_cast<Index>(w.size()) != shape.order())
        throw FormatError("weights file must hold one array per mode");
    std::vector<ModeNorm> modes;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (!w[k].is_array())
            throw FormatError("weights file must hold one array per mode");
        Vector v(static_cast<Index>(w[k].size()));
        for (Index i = 0; i < v.size(); ++i) {
            if (!w[k][static_cast<std::size_t>(i)].is_number())
                throw FormatError("weights must be numbers");
            v[i] = w[k][static_cast<std::size_t>(i)].get<double>();
        }
        if (v.size() != shape[static_cast<Index>(k)])
            throw FormatError("weights for mode " + std::to_string(k) + " have the wrong length");
        try {
            modes.emplace_back(p, v);
        } catch (const InvalidArgument& e) {
            throw FormatError(e.what());
        }
    }
    return AmbientNorm(modes);
}

void check_exponent(double p) {
    if (!(p > 1.0) || !std::isfinite(p))
        throw FormatError("--p must be a finite exponent greater than 1");
}

int cmd_rank(const std::string& input, double tol) {
    const DenseTensor t = read_tensor(input);
    if (!(tol > 0.0))
        throw FormatError("--tol must be positive");
    std::vector<Index> ranks;
    for (Index k = 0; k < t.order(); ++k)
        ranks.push_back(alpha_rank(t, k, tol));
    emit({{"ranks", ranks}, {"tol", tol}});
    return ok;
}

int cmd_hosvd(const std::string& input, const std::vector<Index>& rank, double tol, const std::string& out) {
    const DenseTensor t = read_tensor(input);
    TuckerTensor u = [&] {
        if (rank.empty()) {
            if (!(tol > 0.0))
                throw FormatError("--tol must be positive");
            return to_tucker(t, tol);
        }
        if (static_cast<Index>(rank.size()) != t.order())
            throw FormatError("--rank needs one entry per mode");
        if (!Rank{rank}.admissible(t.shape()))
            throw FormatError("rank " + Shape(rank).str() + " is not admissible for shape " + t.shape().str());
        return hosvd_truncate(t, Rank{rank});
    }();
    const double err = (tucker_to_dense(u) - t).frobenius_norm();
    if (!out.empty())
        write_tucker(u, out);
    json j = tucker_to_json(u);
    j["ranks"] = u.rank().r;
    j["truncation_error"] = err;
    emit(j);
    return ok;
}

int cmd_project(const std::string& input, const std::string& base_file, const std::string& projector, double p,
                double tol, int max_iterations, const std::string& weights) {
    const DenseTensor g = read_tensor(input);
    const TuckerTensor base = read_tucker(base_file);
    check_exponent(p);
    if (!(g.shape() == base.shape()))
        throw FormatError("input shape " + g.shape().str() + " does not match base shape " + base.shape().str());
    Projector kind;
    try {
        kind = parse_projector(projector);
    } catch (const InvalidArgument& e) {
        throw FormatError(e.what());
    }
    if (kind == Projector::hilbert && p != 2.0)
        throw FormatError("the Hilbert projector is defined for p = 2 only");
    BasePoint b;
    try {
        b = make_base(base);
    } catch (const NotMinimal& e) {
        throw FormatError(std::string("base: ") + e.what());
    }
    const AmbientNorm nrm = make_norm(p, weights, g.shape());
    ProjectionOptions opts;
    opts.tol = tol;
    opts.max_iterations = max_iterations;
    try {
        json j = report_to_json(project(kind, b, g, nrm, opts));
        j["projector"] = to_string(kind);
        j["p"] = p;
        j["tol"] = tol;
        emit(j);
    } catch (const MaxIterationsExceeded& e) {
        json j = report_to_json(e.best());
        j["projector"] = to_string(kind);
        j["p"] = p;
        j["tol"] = tol;
        emit(j);
        std::cerr << "tdf project: " << e.what() << '\n';
        return solver;
    }
    return ok;
}

int cmd_norms(const std::string& input, double p, int restarts, std::optional<std::uint64_t> seed,
              const std::string& weights) {
    const DenseTensor t = read_tensor(input);
    check_exponent(p);
    if (restarts < 1)
        throw FormatError("--restarts must be positive");
    const AmbientNorm nrm = make_norm(p, weights, t.shape());
    const double ambient = nrm(t);
    InjectiveOptions opts;
    opts.restarts = restarts;
    opts.seed = seed ? *seed : seed_from_env(0);
    double lb = 0.0;
    json cert = json::array();
    if (ambient > 0.0) {
        const InjectiveNormResult r = injective_norm(t, nrm, opts);
        lb = r.lower_bound;
        for (const auto& v : r.certificate)
            cert.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    }
    const bool dominated = lb <= ambient * (1.0 + 1e-12);
    emit({{"ambient", ambient},
          {"injective_lb", lb},
          {"dominated", dominated},
          {"p", p},
          {"restarts", restarts},
          {"seed", opts.seed},
          {"certificate", cert}});
    if (!dominated) {
        std::cerr << "tdf norms: injective lower bound exceeds the ambient norm\n";
        return falsified;
    }
    return ok;
}

struct EvolveFlags {
    std::string config;
    std::string csv;
    std::string json_out;
    bool dump_states = false;
    int dt_sweep = 0;
    std::optional<std::uint64_t> seed;
    std::optional<double> T;
    std::optional<double> dt;
};

int cmd_evolve(const EvolveFlags& f) {
    const std::filesystem::path cfg_path = f.config;
    json raw = read_json(cfg_path);
    if (raw.is_object()) {
        // precedence: file < TDF_SEED < --seed
        if (const char* env = std::getenv("TDF_SEED"); env != nullptr && *env != '\0')
            raw["seed"] = seed_from_env(0);
        if (f.seed)
            raw["seed"] = *f.seed;
        if (f.T || f.dt) {
            json& in = raw["integrator"];
            if (in.is_null())
                in = json::object();
            if (!in.is_object())
                throw FormatError("\"integrator\" must be an object");
            if (f.T)
                in["T"] = *f.T;
            if (f.dt)
                in["dt"] = *f.dt;
        }
    }
    ExperimentConfig cfg = parse_config(raw, cfg_path.parent_path());
    if (!f.csv.empty())
        cfg.csv_path = f.csv;
    if (!f.json_out.empty())
        cfg.json_path = f.json_out;
    cfg.dump_states = cfg.dump_states || f.dump_states;

    const Problem pb = build_problem(cfg);
    std::cerr << "tdf evolve: " << (cfg.method == Method::hartree ? "hartree" : "dlra") << " on "
              << pb.u0.shape().str() << ", T = " << cfg.T << ", dt = " << cfg.dt << ", seed = " << cfg.seed << '\n';
    RunResult run = run_experiment(cfg, pb);
    if (!cfg.csv_path.empty())
        write_text(cfg.csv_path, trajectory_csv(run.record));
    if (!cfg.json_path.empty())
        write_text(cfg.json_path, dump(trajectory_to_json(run.record)) + "\n");
    if (f.dt_sweep > 0)
        run.summary["dt_sweep"] = dt_sweep(cfg, pb, f.dt_sweep);
    emit(run.summary);
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fixed-rank Tucker geometry and Dirac-Frenkel dynamics"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 1 usage, 2 I/O, 3 format/config, 4 solver, 5 rank degeneracy, "
               "6 invariant falsified.");

    std::string input;
    double tol = default_rank_tol;
    auto* rank = app.add_subcommand("rank", "Per-mode alpha-ranks of a dense tensor file");
    rank->add_option("input", input, "Tensor JSON {\"dims\", \"data\"}")->required();
    rank->add_option("--tol", tol, "Relative singular value threshold")->capture_default_str();

    std::vector<Index> hosvd_rank;
    std::string hosvd_out;
    double hosvd_tol = default_rank_tol;
    auto* hosvd = app.add_subcommand("hosvd", "Tucker representation by HOSVD (exact, or truncated with --rank)");
    hosvd->add_option("input", input, "Tensor JSON")->required();
    hosvd->add_option("--rank", hosvd_rank, "Target rank, one entry per mode")->delimiter(',');
    hosvd->add_option("--tol", hosvd_tol, "Rank threshold when --rank is absent")->capture_default_str();
    hosvd->add_option("--out", hosvd_out, "Also write the Tucker JSON to this file");

    std::string base, projector = "hilbert", weights;
    double p = 2.0, ptol = 1e-8;
    int max_iterations = 200;
    auto* project = app.add_subcommand("project", "Project a tensor onto the tangent space at a Tucker base point");
    project->add_option("input", input, "Tensor JSON")->required();
    project->add_option("--base", base, "Tucker JSON {\"core\", \"factors\"}")->required();
    project->add_option("--projector", projector, "hilbert, metric or generalized")->capture_default_str();
    project->add_option("--p", p, "Exponent of the weighted l^p norm")->capture_default_str();
    project->add_option("--tol", ptol, "Duality residual tolerance")->capture_default_str();
    project->add_option("--max-iter", max_iterations, "Iteration cap")->capture_default_str();
    project->add_option("--weights", weights, "JSON file with one weight array per mode");

    EvolveFlags ev;
    auto* evolve = app.add_subcommand("evolve", "Integrate a reduced model from a JSON configuration");
    evolve->add_option("--config", ev.config, "Experiment configuration JSON")->required();
    evolve->add_option("--csv", ev.csv, "Write per-step diagnostics CSV");
    evolve->add_option("--json", ev.json_out, "Write trajectory JSON");
    evolve->add_flag("--dump-states", ev.dump_states, "Store every state in the trajectory JSON");
    evolve->add_option("--dt-sweep", ev.dt_sweep, "Number of dt-halving levels for the observed order");
    evolve->add_option("--seed", ev.seed, "Seed (overrides TDF_SEED and the file)");
    evolve->add_option("--T", ev.T, "Final time");
    evolve->add_option("--dt", ev.dt, "Step size");
    evolve->footer(csv_help);

    double np = 2.0;
    int restarts = 20;
    std::optional<std::uint64_t> nseed;
    std::string nweights;
    auto* norms = app.add_subcommand("norms", "Ambient norm and injective-norm lower bound");
    norms->add_option("input", input, "Tensor JSON")->required();
    norms->add_option("--p", np, "Exponent")->capture_default_str();
    norms->add_option("--restarts", restarts, "Alternating-maximization restarts")->capture_default_str();
    norms->add_option("--seed", nseed, "Restart seed (overrides TDF_SEED)");
    norms->add_option("--weights", nweights, "JSON file with one weight array per mode");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        if (*rank)
            return cmd_rank(input, tol);
        if (*hosvd)
            return cmd_hosvd(input, hosvd_rank, hosvd_tol, hosvd_out);
        if (*project)
            return cmd_project(input, base, projector, p, ptol, max_iterations, weights);
        if (*evolve)
            return cmd_evolve(ev);
        if (*norms)
            return cmd_norms(input, np, restarts, nseed, nweights);
    } catch (const IoError& e) {
        std::cerr << "tdf: " << e.what() << '\n';
        return io;
    } catch (const RankDegeneracy& e) {
        std::cerr << "tdf: rank degeneracy at step " << e.step() << ": " << e.what() << '\n';
        return degenerate;
    } catch (const MaxIterationsExceeded& e) {
        std::cerr << "tdf: " << e.what() << '\n';
        return solver;
    } catch (const NonFiniteState& e) {
        std::cerr << "tdf: " << e.what() << '\n';
        return solver;
    } catch (const SingularCore& e) {
        std::cerr << "tdf: " << e.what() << '\n';
        return solver;
    } catch (const Error& e) {
        std::cerr << "tdf: " << e.what() << '\n';
        return format;
    } catch (const json::exception& e) {
        std::cerr << "tdf: " << e.what() << '\n';
        return format;
    }
    return usage;
}
