#include "tdf/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tdf {

namespace {

double number(const json& v, const char* what) {
    if (!v.is_number())
        throw FormatError(std::string(what) + " must contain only numbers");
    const double x = v.get<double>();
    if (!std::isfinite(x))
        throw FormatError(std::string(what) + " contains a non-finite value");
    return x;
}

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw FormatError(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

Index positive_index(const json& v, const char* what) {
    if (!v.is_number_integer() || v.get<long long>() < 1)
        throw FormatError(std::string(what) + " must be positive integers");
    return static_cast<Index>(v.get<long long>());
}

json diag_value(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string csv_number(double x) {
    if (std::isnan(x))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

json tensor_to_json(const DenseTensor& t) {
    json data = json::array();
    for (Index i = 0; i < t.size(); ++i)
        data.push_back(t.data()[i]);
    return {{"dims", t.shape().dims()}, {"data", std::move(data)}};
}

DenseTensor tensor_from_json(const json& j) {
    const json& dims = field(j, "dims");
    const json& data = field(j, "data");
    if (!dims.is_array() || dims.empty())
        throw FormatError("\"dims\" must be a non-empty array");
    if (!data.is_array())
        throw FormatError("\"data\" must be an array");
    std::vector<Index> n;
    for (const auto& v : dims)
        n.push_back(positive_index(v, "\"dims\""));
    if (n.size() < 2)
        throw FormatError("tensor order must be at least 2");
    Shape shape(n);
    if (static_cast<Index>(data.size()) != shape.size())
        throw FormatError("data length " + std::to_string(data.size()) + " does not match dims " + shape.str());
    Vector x(shape.size());
    for (Index i = 0; i < x.size(); ++i)
        x[i] = number(data[static_cast<std::size_t>(i)], "\"data\"");
    return DenseTensor(shape, std::move(x));
}

json matrix_to_json(const Matrix& m) {
    json data = json::array();
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            data.push_back(m(i, j));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
    const json& rows = field(j, "rows");
    const json& cols = field(j, "cols");
    const json& data = field(j, "data");
    if (!rows.is_number_integer() || !cols.is_number_integer() || rows.get<long long>() < 0 ||
        cols.get<long long>() < 0)
        throw FormatError("matrix \"rows\" and \"cols\" must be non-negative integers");
    const auto m = static_cast<Index>(rows.get<long long>());
    const auto n = static_cast<Index>(cols.get<long long>());
    if (!data.is_array() || static_cast<Index>(data.size()) != m * n)
        throw FormatError("matrix data length does not match rows * cols");
    Matrix out(m, n);
    std::size_t k = 0;
    for (Index c = 0; c < n; ++c)
        for (Index r = 0; r < m; ++r)
            out(r, c) = number(data[k++], "matrix data");
    return out;
}

json tucker_to_json(const TuckerTensor& u) {
    json f = json::array();
    for (const auto& m : u.factors())
        f.push_back(matrix_to_json(m));
    return {{"core", tensor_to_json(u.core())}, {"factors", std::move(f)}};
}

TuckerTensor tucker_from_json(const json& j) {
    DenseTensor core = tensor_from_json(field(j, "core"));
    const json& f = field(j, "factors");
    if (!f.is_array())
        throw FormatError("\"factors\" must be an array");
    std::vector<Matrix> factors;
    for (const auto& m : f)
        factors.push_back(matrix_from_json(m));
    try {
        return TuckerTensor(std::move(core), std::move(factors));
    } catch (const DimensionError& e) {
        throw FormatError(e.what());
    }
}

json chart_to_json(const ChartPoint& c) {
    json L = json::array();
    for (const auto& m : c.L)
        L.push_back(matrix_to_json(m));
    return {{"core", tensor_to_json(c.E)}, {"L", std::move(L)}};
}

ChartPoint chart_from_json(const json& j) {
    ChartPoint c;
    c.E = tensor_from_json(field(j, "core"));
    const json& L = field(j, "L");
    if (!L.is_array())
        throw FormatError("\"L\" must be an array");
    for (const auto& m : L)
        c.L.push_back(matrix_from_json(m));
    return c;
}

json operator_to_json(const KroneckerSumOperator& A) {
    json terms = json::array();
    for (const auto& term : A.terms()) {
        json t = json::array();
        for (const auto& m : term)
            t.push_back(matrix_to_json(m));
        terms.push_back(std::move(t));
    }
    return {{"dims", A.shape().dims()}, {"terms", std::move(terms)}};
}

KroneckerSumOperator operator_from_json(const json& j) {
    const json& terms = field(j, "terms");
    if (!terms.is_array())
        throw FormatError("\"terms\" must be an array");
    if (terms.empty()) {
        const json& dims = field(j, "dims");
        std::vector<Index> n;
        for (const auto& v : dims)
            n.push_back(positive_index(v, "\"dims\""));
        return KroneckerSumOperator::zero(Shape(n));
    }
    std::vector<KroneckerSumOperator::Term> out;
    for (const auto& t : terms) {
        if (!t.is_array())
            throw FormatError("every operator term must be an array of matrices");
        KroneckerSumOperator::Term term;
        for (const auto& m : t)
            term.push_back(matrix_from_json(m));
        out.push_back(std::move(term));
    }
    try {
        return KroneckerSumOperator(std::move(out));
    } catch (const Error& e) {
        throw FormatError(e.what());
    }
}

json hartree_to_json(const HartreeState& s) {
    json f = json::array();
    for (const auto& v : s.factors)
        f.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    return {{"lambda", s.lambda}, {"factors", std::move(f)}};
}

json state_to_json(const State& s) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, HartreeState>)
                return hartree_to_json(x);
            else if constexpr (std::is_same_v<T, TuckerTensor>)
                return tucker_to_json(x);
            else
                return tensor_to_json(x);
        },
        s);
}

json report_to_json(const ProjectionReport& r) {
    json dU = json::array();
    for (const auto& m : r.tangent.dU)
        dU.push_back(matrix_to_json(m));
    return {{"objective", r.objective},
            {"duality_residual", r.duality_residual},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"tangent", {{"dC", tensor_to_json(r.tangent.dC)}, {"dU", std::move(dU)}, {"dense", tensor_to_json(r.dense)}}}};
}

json trajectory_to_json(const TrajectoryRecord& rec) {
    json states = json::array();
    for (const auto& s : rec.states)
        states.push_back(state_to_json(s));
    json diags = json::array();
    for (const auto& d : rec.diagnostics)
        diags.push_back({{"projection_residual", diag_value(d.projection_residual)},
                         {"core_condition", diag_value(d.core_condition)},
                         {"reference_error", diag_value(d.reference_error)},
                         {"norm_drift", diag_value(d.norm_drift)},
                         {"sphere_tangency", diag_value(d.sphere_tangency)},
                         {"lambda", diag_value(d.lambda)},
                         {"lambda_closed_form", diag_value(d.lambda_closed_form)}});
    return {{"times", rec.times}, {"states", std::move(states)}, {"diagnostics", std::move(diags)}};
}

std::string trajectory_csv(const TrajectoryRecord& rec) {
    std::ostringstream out;
    out << trajectory_csv_header << '\n';
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        const auto& d = rec.diagnostics[i];
        out << i << ',' << csv_number(rec.times[i]) << ',' << csv_number(d.projection_residual) << ','
            << csv_number(d.core_condition) << ',' << csv_number(d.reference_error) << ','
            << csv_number(d.norm_drift) << ',' << csv_number(d.sphere_tangency) << ',' << csv_number(d.lambda)
            << ',' << csv_number(d.lambda_closed_form) << '\n';
    }
    return out.str();
}

std::string dump(const json& j) { return j.dump(); }

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << text;
    if (!out)
        throw IoError("write failed: " + path.string());
}

DenseTensor read_tensor(const std::filesystem::path& path) { return tensor_from_json(read_json(path)); }

void write_tensor(const DenseTensor& t, const std::filesystem::path& path) {
    write_text(path, dump(tensor_to_json(t)) + "\n");
}

TuckerTensor read_tucker(const std::filesystem::path& path) { return tucker_from_json(read_json(path)); }

void write_tucker(const TuckerTensor& u, const std::filesystem::path& path) {
    write_text(path, dump(tucker_to_json(u)) + "\n");
}

} // namespace tdf
