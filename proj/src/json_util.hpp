#pragma once

#include "drccp/model.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace drccp::jsonio {

using json = nlohmann::json;

// Infinite entries are written as null; on read, null maps to `missing`.
inline json from_vector(const Vector& v) {
    json out = json::array();
    for (long i = 0; i < v.size(); ++i) {
        if (std::isfinite(v(i)))
            out.push_back(v(i));
        else
            out.push_back(nullptr);
    }
    return out;
}

inline Vector to_vector(const json& j, double missing = std::numeric_limits<double>::quiet_NaN()) {
    if (!j.is_array()) throw ValidationError("expected a JSON array of numbers");
    Vector v(static_cast<long>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        if (j[i].is_null())
            v(static_cast<long>(i)) = missing;
        else if (j[i].is_number())
            v(static_cast<long>(i)) = j[i].get<double>();
        else
            throw ValidationError("expected a number in JSON array");
    }
    return v;
}

inline json from_matrix(const Matrix& m) {
    json out = json::array();
    for (long r = 0; r < m.rows(); ++r) out.push_back(from_vector(m.row(r).transpose()));
    return out;
}

inline Matrix to_matrix(const json& j, long cols_if_empty = 0) {
    if (!j.is_array()) throw ValidationError("expected a JSON array of rows");
    if (j.empty()) return Matrix(0, cols_if_empty);
    const long rows = static_cast<long>(j.size());
    const long cols = static_cast<long>(j[0].size());
    Matrix m(rows, cols);
    for (long r = 0; r < rows; ++r) {
        Vector row = to_vector(j[static_cast<size_t>(r)]);
        if (row.size() != cols) throw ValidationError("ragged matrix in JSON");
        m.row(r) = row.transpose();
    }
    return m;
}

inline const json& field(const json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) throw ValidationError(std::string("missing field '") + name + "'");
    return j.at(name);
}

}  // namespace drccp::jsonio
