#pragma once

#include <optional>
#include <vector>

#include "toral/int_matrix.hpp"

namespace toral {

/// Integer vectors spanning the rational kernel {x : M x = 0}. Each vector is
/// primitive (content 1).
std::vector<IntVector> rational_nullspace(const IntMatrix& m);

/// Rank over Q of the given vectors.
int rational_rank(const std::vector<IntVector>& vectors);

/// Row-style Hermite normal form of the lattice spanned by `rows`: zero rows
/// dropped, pivots positive and strictly increasing, entries above each pivot
/// reduced into [0, pivot).
std::vector<IntVector> hermite_normal_form(std::vector<IntVector> rows);

/// Basis of the integer kernel {x in Z^n : M x = 0}, as a lattice.
std::vector<IntVector> integer_kernel(const IntMatrix& m);

/// Primitive lattice span(vectors) intersected with Z^n, in Hermite normal form.
std::vector<IntVector> saturate(const std::vector<IntVector>& vectors, int n);

/// Integer c with v = sum c_i * basis_i, where `basis` is in Hermite normal
/// form. nullopt when v is not in the lattice.
std::optional<IntVector> lattice_coordinates(const std::vector<IntVector>& basis, const IntVector& v);

/// Columns of the returned real matrix are the given integer vectors.
Mat to_real_columns(const std::vector<IntVector>& vectors, int n);

}  // namespace toral
