#include "bjgmres/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bjgmres {

namespace {

[[noreturn]] void parse_error(long line, const std::string& what) {
    throw std::runtime_error("matrix market: line " + std::to_string(line) +
                             ": " + what);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

} // namespace

SparseMatrix read_matrix_market(std::istream& in) {
    long line_no = 0;
    std::string line;

    if (!std::getline(in, line)) parse_error(1, "empty stream");
    ++line_no;
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (lower(banner) != "%%matrixmarket")
        parse_error(line_no, "missing %%MatrixMarket banner");
    if (lower(object) != "matrix")
        parse_error(line_no, "unsupported object '" + object + "'");
    if (lower(format) != "coordinate")
        parse_error(line_no, "unsupported format '" + format + "' (coordinate only)");
    field = lower(field);
    if (field != "real" && field != "integer")
        parse_error(line_no, "unsupported field '" + field + "' (real/integer only)");
    symmetry = lower(symmetry);
    if (symmetry != "general" && symmetry != "symmetric")
        parse_error(line_no, "unsupported symmetry '" + symmetry +
                                 "' (general/symmetric only)");
    const bool symmetric = symmetry == "symmetric";

    // Size line: first line that is neither a comment nor blank.
    index_t nrows = -1, ncols = -1;
    long declared_nnz = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line[0] == '%') continue;
        if (blank(line)) continue;
        std::istringstream sz(line);
        if (!(sz >> nrows >> ncols >> declared_nnz) || nrows < 0 || ncols < 0 ||
            declared_nnz < 0)
            parse_error(line_no, "malformed size line '" + line + "'");
        break;
    }
    if (declared_nnz < 0) parse_error(line_no, "missing size line");

    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<size_t>(symmetric ? 2 * declared_nnz
                                                   : declared_nnz));
    long read = 0;
    while (read < declared_nnz) {
        if (!std::getline(in, line))
            parse_error(line_no + 1, "unexpected end of file, expected " +
                                         std::to_string(declared_nnz) +
                                         " entries, got " + std::to_string(read));
        ++line_no;
        if (!line.empty() && line[0] == '%') continue;
        if (blank(line)) continue;
        std::istringstream entry(line);
        index_t i = 0, j = 0;
        double v = 0.0;
        if (!(entry >> i >> j >> v))
            parse_error(line_no, "malformed entry '" + line + "'");
        if (i < 1 || i > nrows || j < 1 || j > ncols)
            parse_error(line_no, "index (" + std::to_string(i) + ", " +
                                     std::to_string(j) + ") out of range");
        triplets.push_back({i - 1, j - 1, v});
        if (symmetric && i != j) triplets.push_back({j - 1, i - 1, v});
        ++read;
    }
    return SparseMatrix::from_triplets(triplets, nrows, ncols);
}

SparseMatrix read_matrix_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path);
    return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const SparseMatrix& a) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.rows() << " " << a.cols() << " " << a.nnz() << "\n";
    const auto starts = a.row_starts();
    const auto cols = a.col_indices();
    const auto vals = a.values();
    char buf[64];
    for (index_t i = 0; i < a.rows(); ++i) {
        for (index_t k = starts[i]; k < starts[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", vals[k]);
            out << (i + 1) << " " << (cols[k] + 1) << " " << buf << "\n";
        }
    }
}

void write_matrix_market_file(const std::string& path, const SparseMatrix& a) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    write_matrix_market(out, a);
}

} // namespace bjgmres
