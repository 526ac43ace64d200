#pragma once

#include <iosfwd>
#include <string>

#include "bjgmres/sparse_matrix.hpp"

namespace bjgmres {

/// Coordinate format, field real or integer, symmetry general or symmetric,
/// 1-based indices. Symmetric files are expanded to full storage and
/// duplicate entries are summed. Parse errors name the offending line.
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market_file(const std::string& path);

/// Emits "%%MatrixMarket matrix coordinate real general" with values at
/// 17 significant digits, which round-trips binary64 exactly.
void write_matrix_market(std::ostream& out, const SparseMatrix& a);
void write_matrix_market_file(const std::string& path, const SparseMatrix& a);

} // namespace bjgmres
