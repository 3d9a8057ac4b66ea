#pragma once

#include <random>

#include "qmc/linalg.hpp"

namespace qmc {

using Rng = std::mt19937_64;

// Ginibre-based random objects for property tests.
Mat random_ginibre(Rng& rng, int rows, int cols);
Mat random_unitary(Rng& rng, int dim);
Mat random_isometry(Rng& rng, int rows, int cols);
Vec random_pure(Rng& rng, int dim);
// Trace-one PSD of the given rank (full rank by default).
Mat random_density(Rng& rng, int dim, int rank = -1);
// Hermitian with spectrum strictly inside (0, 1).
Mat random_contraction(Rng& rng, int dim);
Mat random_psd(Rng& rng, int dim, double scale = 1.0);
// Probability vector with entries bounded away from 0 unless allow_zero.
RVec random_distribution(Rng& rng, int dim, bool allow_zero = false);

}  // namespace qmc
