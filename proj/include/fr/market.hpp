#pragma once

#include <string>

#include "fr/linalg.hpp"

// Matrix Market "array real general" serialization. Values are stored in
// column-major order per the format definition; vectors travel as
// single-column matrices.

namespace fr {

void write_matrix_market(const std::string& path, const DenseMatrix& m);
DenseMatrix read_matrix_market(const std::string& path);

void write_vector_market(const std::string& path, const Vec& v);
// Accepts an r x 1 (or 1 x r) array.
Vec read_vector_market(const std::string& path);

}  // namespace fr
