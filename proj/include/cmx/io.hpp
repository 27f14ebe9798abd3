#ifndef CMX_IO_HPP
#define CMX_IO_HPP

/** @file
 * JSON reading and writing for bands, circulants, models, datasets and
 * solver reports.  Reals are written in scientific notation with 17
 * significant digits so every double reads back bit-exactly.
 */

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cmx/blockcirc.hpp"
#include "cmx/core.hpp"
#include "cmx/feasibility.hpp"
#include "cmx/identify.hpp"
#include "cmx/maxent.hpp"
#include "cmx/reciprocal.hpp"

namespace cmx::io {

using json = nlohmann::ordered_json;

namespace detail {

inline void write_real(std::string& out, double v)
{
    if (!std::isfinite(v)) {
        out += "null";
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    out += buf;
}

inline void dump(const json& j, std::string& out, int indent, int depth)
{
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{";
        out += nl;
        bool first = true;
        for (const auto& [key, value] : j.items()) {
            if (!first) {
                out += ",";
                out += nl;
            }
            first = false;
            out += pad;
            out += json(key).dump();
            out += indent > 0 ? ": " : ":";
            dump(value, out, indent, depth + 1);
        }
        out += nl;
        out += close_pad;
        out += "}";
        return;
    }
    case json::value_t::array: {
        // Arrays of scalars stay on one line.
        bool flat = true;
        for (const auto& v : j) {
            flat = flat && !v.is_structured();
        }
        out += "[";
        bool first = true;
        for (const auto& v : j) {
            if (!first) {
                out += flat ? ", " : ",";
            }
            if (!flat) {
                out += nl;
                out += pad;
            }
            first = false;
            dump(v, out, indent, depth + 1);
        }
        if (!flat && !j.empty()) {
            out += nl;
            out += close_pad;
        }
        out += "]";
        return;
    }
    case json::value_t::number_float:
        write_real(out, j.get<double>());
        return;
    default:
        out += j.dump();
        return;
    }
}

[[noreturn]] inline void malformed(const std::string& what)
{
    throw error(errc::input, "malformed JSON: " + what);
}

inline const json& field(const json& j, const char* key)
{
    if (!j.is_object()) {
        malformed("expected an object");
    }
    const auto it = j.find(key);
    if (it == j.end()) {
        malformed(std::string("missing field \"") + key + "\"");
    }
    return *it;
}

inline int int_field(const json& j, const char* key)
{
    const json& v = field(j, key);
    if (!v.is_number_integer()) {
        malformed(std::string("field \"") + key + "\" must be an integer");
    }
    return v.get<int>();
}

inline std::vector<double> reals(const json& j, std::size_t expected, const char* what)
{
    if (!j.is_array() || j.size() != expected) {
        malformed(std::string(what) + " must be an array of " + std::to_string(expected) + " reals");
    }
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& v : j) {
        if (!v.is_number()) {
            malformed(std::string(what) + " contains a non-number");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

inline json matrix_row_major(const Matrix& a)
{
    json arr = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            arr.push_back(a(i, j));
        }
    }
    return arr;
}

inline Matrix matrix_from_row_major(const json& j, int m, const char* what)
{
    const auto v = reals(j, static_cast<std::size_t>(m) * static_cast<std::size_t>(m), what);
    Matrix a(m, m);
    for (int i = 0; i < m; ++i) {
        for (int c = 0; c < m; ++c) {
            a(i, c) = v[static_cast<std::size_t>(i * m + c)];
        }
    }
    return a;
}

inline std::vector<Matrix> blocks_from(const json& j, int m, int count, const char* what)
{
    if (!j.is_array() || static_cast<int>(j.size()) != count) {
        malformed(std::string(what) + " must hold " + std::to_string(count) + " blocks");
    }
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(count));
    for (const auto& b : j) {
        out.push_back(matrix_from_row_major(b, m, what));
    }
    return out;
}

inline json blocks_to(const std::vector<Matrix>& blocks)
{
    json arr = json::array();
    for (const auto& b : blocks) {
        arr.push_back(matrix_row_major(b));
    }
    return arr;
}

inline json reals_to(const std::vector<double>& v)
{
    json arr = json::array();
    for (double x : v) {
        arr.push_back(x);
    }
    return arr;
}

} // namespace detail

/// Serialize with full-precision reals; indent 0 gives a single line.
inline std::string dump(const json& j, int indent = 2)
{
    std::string out;
    detail::dump(j, out, indent, 0);
    if (indent > 0) {
        out += "\n";
    }
    return out;
}

inline json parse(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw error(errc::input, std::string("malformed JSON: ") + e.what());
    }
}

inline json read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw error(errc::input, "cannot read " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

inline void write_file(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out) {
        throw error(errc::input, "cannot write " + path);
    }
    out << dump(j);
    if (!out) {
        throw error(errc::input, "write failed for " + path);
    }
}

// Bands and circulants

inline json to_json(const CovBand& band)
{
    return json{{"m", band.m()}, {"n", band.n()}, {"sigma", detail::blocks_to(band.sigma)}};
}

inline CovBand band_from_json(const json& j)
{
    const int m = detail::int_field(j, "m");
    const int n = detail::int_field(j, "n");
    if (m < 1 || n < 0) {
        detail::malformed("band needs m >= 1 and n >= 0");
    }
    CovBand band(detail::blocks_from(detail::field(j, "sigma"), m, n + 1, "sigma"));
    band.validate();
    return band;
}

inline json to_json(const BlockCirculant& c)
{
    return json{{"m", c.m()}, {"N", c.N()}, {"first_col", detail::blocks_to(c.first_col)}};
}

inline BlockCirculant circulant_from_json(const json& j)
{
    const int m = detail::int_field(j, "m");
    const int N = detail::int_field(j, "N");
    if (m < 1 || N < 1) {
        detail::malformed("circulant needs m >= 1 and N >= 1");
    }
    BlockCirculant c(detail::blocks_from(detail::field(j, "first_col"), m, N, "first_col"));
    c.validate();
    return c;
}

// Models and data

inline json to_json(const ReciprocalModel& model)
{
    return json{{"m", model.m()}, {"n", model.n()}, {"N", model.N}, {"M", detail::blocks_to(model.M)}};
}

inline ReciprocalModel model_from_json(const json& j)
{
    const int m = detail::int_field(j, "m");
    const int n = detail::int_field(j, "n");
    const int N = detail::int_field(j, "N");
    if (m < 1 || n < 0 || N < 1) {
        detail::malformed("model needs m >= 1, n >= 0, N >= 1");
    }
    ReciprocalModel model(N, detail::blocks_from(detail::field(j, "M"), m, n + 1, "M"));
    model.validate();
    return model;
}

inline json to_json(const Dataset& data)
{
    json arr = json::array();
    for (const auto& y : data.realizations) {
        json row = json::array();
        for (int t = 0; t < data.N; ++t) {
            for (int p = 0; p < data.m; ++p) {
                row.push_back(y(p, t));
            }
        }
        arr.push_back(std::move(row));
    }
    return json{{"m", data.m}, {"N", data.N}, {"T", data.T()}, {"realizations", std::move(arr)}};
}

inline Dataset dataset_from_json(const json& j)
{
    Dataset data;
    data.m = detail::int_field(j, "m");
    data.N = detail::int_field(j, "N");
    const int T = detail::int_field(j, "T");
    if (data.m < 1 || data.N < 1 || T < 1) {
        detail::malformed("dataset needs m, N, T >= 1");
    }
    const json& rows = detail::field(j, "realizations");
    if (!rows.is_array() || static_cast<int>(rows.size()) != T) {
        detail::malformed("realizations must hold T entries");
    }
    const std::size_t len = static_cast<std::size_t>(data.m) * static_cast<std::size_t>(data.N);
    for (const auto& row : rows) {
        const auto v = detail::reals(row, len, "realization");
        Matrix y(data.m, data.N);
        for (int t = 0; t < data.N; ++t) {
            for (int p = 0; p < data.m; ++p) {
                y(p, t) = v[static_cast<std::size_t>(t * data.m + p)];
            }
        }
        data.realizations.push_back(std::move(y));
    }
    data.validate();
    return data;
}

// Reports

inline json to_json(const InfeasibilityCertificate& c)
{
    return json{{"reason", c.reason},
                {"ray_pairing", c.ray_pairing},
                {"ray_min_eigenvalue", c.ray_min_eigenvalue},
                {"wrap_positive_definite", c.wrap_positive_definite},
                {"wrap_min_eigenvalue", c.wrap_min_eigenvalue},
                {"smallest_feasible_N", c.smallest_feasible_N}};
}

inline json to_json(const SolverDiagnostics& d)
{
    json j{{"status", d.status},
           {"method", d.method},
           {"iterations", d.iterations},
           {"objective", detail::reals_to(d.objective)},
           {"grad_norm", detail::reals_to(d.grad_norm)},
           {"step", detail::reals_to(d.step)},
           {"relative_grad_norm", d.relative_grad_norm},
           {"band_match_residual", d.band_match_residual},
           {"inverse_band_residual", d.inverse_band_residual}};
    j["certificate"] = d.certificate ? to_json(*d.certificate) : json(nullptr);
    return j;
}

inline json to_json(const IdentifyDiagnostics& d)
{
    return json{{"log_likelihood", d.log_likelihood},
                {"band_match_residual", d.band_match_residual},
                {"model_route_difference", d.model_route_difference},
                {"solver", to_json(d.solver)}};
}

inline json to_json(const VerificationReport& r)
{
    return json{{"product_residual", r.product_residual},
                {"band_residual", r.band_residual},
                {"symmetry_defect", r.symmetry_defect}};
}

inline json to_json(const std::vector<WrapTrace>& trace)
{
    json arr = json::array();
    for (const auto& w : trace) {
        arr.push_back(json{{"N", w.N}, {"min_eigenvalue", w.min_eigenvalue}, {"positive_definite", w.positive_definite}});
    }
    return arr;
}

} // namespace cmx::io

#endif // CMX_IO_HPP
