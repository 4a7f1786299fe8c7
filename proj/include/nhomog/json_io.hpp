#pragma once

// JSON encoding of the library's inputs and results. Complex entries are
// [re, im] pairs (a bare number is a real entry), matrices are arrays of rows.
// Requires nlohmann/json on the include path.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhomog/error.hpp"
#include "nhomog/matrix_core.hpp"
#include "nhomog/n_space.hpp"
#include "nhomog/star_algebra.hpp"
#include "nhomog/sw_engine.hpp"

namespace nhomog::json_io {

using Json = nlohmann::json;

namespace detail {

/// Quotes bare NaN / Infinity / -Infinity tokens outside strings so that files
/// written by lenient encoders parse and the entries can be rejected by schema.
inline std::string quote_nonfinite(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_string = false;
    for (size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            out += c;
            if (c == '\\' && i + 1 < text.size()) out += text[++i];
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') {
            in_string = true;
            out += c;
            continue;
        }
        bool hit = false;
        for (const char* tok : {"-Infinity", "Infinity", "NaN"}) {
            const std::string t(tok);
            if (text.compare(i, t.size(), t) == 0) {
                out += '"' + t + '"';
                i += t.size() - 1;
                hit = true;
                break;
            }
        }
        if (!hit) out += c;
    }
    return out;
}

}  // namespace detail

inline Json parse_text(const std::string& text) {
    try {
        return Json::parse(detail::quote_nonfinite(text));
    } catch (const Json::parse_error& e) {
        fail(ErrorKind::ParseError, e.what());
    }
}

inline Json parse_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::ParseError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

inline const Json& field(const Json& j, const std::string& key, const std::string& where) {
    require(j.is_object(), ErrorKind::SchemaError, where + " must be an object");
    require(j.contains(key), ErrorKind::SchemaError, "missing field " + where + "." + key);
    return j.at(key);
}

inline long long integer(const Json& j, const std::string& where) {
    require(j.is_number_integer(), ErrorKind::SchemaError, where + " must be an integer");
    return j.get<long long>();
}

inline double real(const Json& j, const std::string& where) {
    if (j.is_string()) fail(ErrorKind::SchemaError, where + " is not a finite number");
    require(j.is_number(), ErrorKind::SchemaError, where + " must be a number");
    const double v = j.get<double>();
    require(std::isfinite(v), ErrorKind::SchemaError, where + " is not a finite number");
    return v;
}

inline Complex complex(const Json& j, const std::string& where) {
    if (j.is_array()) {
        require(j.size() == 2, ErrorKind::SchemaError, where + " must be [re, im]");
        return {real(j[0], where + "[0]"), real(j[1], where + "[1]")};
    }
    return real(j, where);
}

inline CMatrix matrix(const Json& j, const std::string& where) {
    require(j.is_array() && !j.empty(), ErrorKind::SchemaError, where + " must be a non-empty array of rows");
    const Index rows = static_cast<Index>(j.size());
    Index cols = -1;
    for (Index r = 0; r < rows; ++r) {
        const Json& row = j[static_cast<size_t>(r)];
        const std::string rw = where + "[" + std::to_string(r) + "]";
        require(row.is_array() && !row.empty(), ErrorKind::SchemaError, rw + " must be a non-empty array");
        if (cols < 0) cols = static_cast<Index>(row.size());
        require(static_cast<Index>(row.size()) == cols, ErrorKind::SchemaError, "ragged rows in " + where);
    }
    CMatrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c)
            m(r, c) = complex(j[static_cast<size_t>(r)][static_cast<size_t>(c)],
                              where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    return m;
}

inline CMatrix square_matrix(const Json& j, const std::string& where, Index dim = -1) {
    CMatrix m = matrix(j, where);
    require(m.rows() == m.cols(), ErrorKind::SchemaError, where + " must be square");
    if (dim >= 0)
        require(m.rows() == dim, ErrorKind::SchemaError, where + " must be " + std::to_string(dim) + " x " + std::to_string(dim));
    return m;
}

inline std::vector<CMatrix> square_matrices(const Json& j, const std::string& where, Index dim = -1) {
    require(j.is_array(), ErrorKind::SchemaError, where + " must be an array of matrices");
    std::vector<CMatrix> out;
    for (size_t i = 0; i < j.size(); ++i) {
        out.push_back(square_matrix(j[i], where + "[" + std::to_string(i) + "]", dim));
        if (dim < 0) dim = out.back().rows();
    }
    return out;
}

/// {"tuple": [matrix, ...]}; all matrices square and of one size.
inline MatTuple tuple(const Json& doc) {
    const auto m = square_matrices(field(doc, "tuple", "input"), "tuple");
    require(!m.empty(), ErrorKind::SchemaError, "tuple must hold at least one matrix");
    return MatTuple(m);
}

/// {"points": int, "n": int, "generators": [[matrix per point], ...]}
inline FnAlgebra fn_algebra(const Json& doc, const Tolerance& tol) {
    const long long points = integer(field(doc, "points", "input"), "points");
    const long long n = integer(field(doc, "n", "input"), "n");
    require(points >= 1 && n >= 1, ErrorKind::SchemaError, "points and n must be positive");
    const Json& gens = field(doc, "generators", "input");
    require(gens.is_array(), ErrorKind::SchemaError, "generators must be an array");
    std::vector<Fn> fs;
    for (size_t g = 0; g < gens.size(); ++g) {
        const std::string where = "generators[" + std::to_string(g) + "]";
        Fn f = square_matrices(gens[g], where, static_cast<Index>(n));
        require(static_cast<long long>(f.size()) == points, ErrorKind::SchemaError,
                where + " must hold one matrix per point");
        fs.push_back(std::move(f));
    }
    return closure_star_subalgebra(static_cast<Index>(points), static_cast<Index>(n), fs, tol);
}

/// {"n": int, "orbits": int, ...}
inline FiniteNSpace n_space(const Json& doc) {
    const long long n = integer(field(doc, "n", "input"), "n");
    const long long m = integer(field(doc, "orbits", "input"), "orbits");
    require(n >= 1 && m >= 0, ErrorKind::SchemaError, "need n >= 1 and orbits >= 0");
    return FiniteNSpace(static_cast<Index>(n), static_cast<Index>(m));
}

inline EquivariantElement element(const Json& j, const FiniteNSpace& s, const std::string& where) {
    auto v = square_matrices(j, where, s.n);
    require(static_cast<Index>(v.size()) == s.m, ErrorKind::SchemaError, where + " must hold one matrix per orbit");
    return EquivariantElement(s, std::move(v));
}

// --- output ---------------------------------------------------------------

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json to_json(const CMatrix& m) {
    Json rows = Json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

inline Json to_json(const MatTuple& t) {
    Json a = Json::array();
    for (Index j = 0; j < t.size(); ++j) a.push_back(to_json(t[j]));
    return a;
}

inline Json to_json(const Tolerance& tol) {
    return {{"rank_cut", tol.rank_cut}, {"psd_slack", tol.psd_slack}, {"eq_tol", tol.eq_tol}};
}

}  // namespace nhomog::json_io
