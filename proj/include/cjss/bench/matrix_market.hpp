#pragma once

#include "cjss/sparse_hermitian.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace cjss::bench {

struct MatrixMarketHeader {
    std::string field;    // real | complex
    std::string symmetry; // symmetric | hermitian | general
};

inline std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

/// %%MatrixMarket matrix coordinate real|complex symmetric|hermitian|general
inline MatrixMarketHeader parse_mm_header(const std::string& line) {
    std::istringstream in(line);
    std::string banner, object, format, field, symmetry;
    in >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") throw std::runtime_error("matrix market: missing %%MatrixMarket banner");
    object = lowercase(object);
    format = lowercase(format);
    field = lowercase(field);
    symmetry = lowercase(symmetry);
    if (object != "matrix") throw std::runtime_error("matrix market: object must be 'matrix', got '" + object + "'");
    if (format != "coordinate")
        throw std::runtime_error("matrix market: only coordinate format is supported, got '" + format + "'");
    if (field == "pattern") throw std::runtime_error("matrix market: pattern files carry no values");
    if (field != "real" && field != "complex")
        throw std::runtime_error("matrix market: field must be real or complex, got '" + field + "'");
    if (symmetry != "symmetric" && symmetry != "hermitian" && symmetry != "general")
        throw std::runtime_error("matrix market: symmetry must be symmetric, hermitian or general, got '" +
                                 symmetry + "'");
    if (field == "real" && symmetry == "hermitian")
        throw std::runtime_error("matrix market: a real matrix cannot be declared hermitian");
    return {field, symmetry};
}

struct LoadedMatrixInfo {
    MatrixMarketHeader header;
    std::vector<std::string> warnings;
};

/// Mirrors stored triangles, validates Hermiticity to 1e-10 relative.
template <class Scalar>
SparseHermitian<Scalar> read_matrix_market(std::istream& in, LoadedMatrixInfo* info = nullptr) {
    using Triplet = typename SparseHermitian<Scalar>::Triplet;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("matrix market: empty input");
    const auto header = parse_mm_header(line);
    if (header.field == "complex" && !is_complex_v<Scalar>)
        throw std::runtime_error("matrix market: complex file requires a complex scalar type");

    do {
        if (!std::getline(in, line)) throw std::runtime_error("matrix market: missing size line");
    } while (line.empty() || line[0] == '%');
    long long rows = 0, cols = 0, entries = 0;
    {
        std::istringstream sz(line);
        if (!(sz >> rows >> cols >> entries)) throw std::runtime_error("matrix market: malformed size line");
    }
    if (rows != cols)
        throw std::runtime_error("matrix market: matrix is not square (" + std::to_string(rows) + "x" +
                                 std::to_string(cols) + ")");
    if (rows < 1 || entries < 0) throw std::runtime_error("matrix market: invalid dimensions");

    const bool mirror = header.symmetry != "general";
    const bool conj_mirror = header.symmetry == "hermitian";
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(mirror ? 2 * entries : entries));
    long long read = 0;
    while (read < entries && std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream es(line);
        long long i = 0, j = 0;
        double re = 0.0, im = 0.0;
        if (!(es >> i >> j >> re)) throw std::runtime_error("matrix market: malformed entry line " + std::to_string(read + 1));
        if (header.field == "complex" && !(es >> im))
            throw std::runtime_error("matrix market: complex entry without imaginary part");
        if (i < 1 || j < 1 || i > rows || j > cols)
            throw std::runtime_error("matrix market: entry index out of range at entry " + std::to_string(read + 1));
        Scalar v;
        if constexpr (is_complex_v<Scalar>) v = Scalar(re, im);
        else v = re;
        triplets.emplace_back(i - 1, j - 1, v);
        if (mirror && i != j) {
            Scalar w = v;
            if constexpr (is_complex_v<Scalar>) {
                if (conj_mirror) w = std::conj(v);
            }
            triplets.emplace_back(j - 1, i - 1, w);
        }
        ++read;
    }
    if (read != entries)
        throw std::runtime_error("matrix market: expected " + std::to_string(entries) + " entries, found " +
                                 std::to_string(read));

    typename SparseHermitian<Scalar>::Storage m(rows, cols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    if (info) {
        info->header = header;
        if (header.symmetry == "general")
            info->warnings.push_back("general matrix market file accepted because its content is Hermitian");
    }
    try {
        return SparseHermitian<Scalar>(std::move(m), 1e-10);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("matrix market: ") + e.what());
    }
}

template <class Scalar>
SparseHermitian<Scalar> load_matrix_market(const std::string& path, LoadedMatrixInfo* info = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("matrix market: cannot open '" + path + "'");
    return read_matrix_market<Scalar>(in, info);
}

/// Writes the lower triangle with a symmetric (or hermitian) header.
template <class Scalar>
void write_matrix_market(std::ostream& out, const SparseHermitian<Scalar>& A) {
    const auto& m = A.matrix();
    std::vector<std::tuple<Index, Index, Scalar>> lower;
    for (Index r = 0; r < m.outerSize(); ++r)
        for (typename SparseHermitian<Scalar>::Storage::InnerIterator it(m, r); it; ++it)
            if (it.row() >= it.col()) lower.emplace_back(it.row(), it.col(), it.value());
    out << "%%MatrixMarket matrix coordinate " << (is_complex_v<Scalar> ? "complex hermitian" : "real symmetric")
        << "\n";
    out << A.rows() << " " << A.rows() << " " << lower.size() << "\n";
    out << std::setprecision(17);
    for (const auto& [i, j, v] : lower) {
        out << i + 1 << " " << j + 1 << " ";
        if constexpr (is_complex_v<Scalar>) out << v.real() << " " << v.imag() << "\n";
        else out << v << "\n";
    }
}

} // namespace cjss::bench
