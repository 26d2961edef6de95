#ifndef QMONO_QCORE_HPP
#define QMONO_QCORE_HPP

#include <span>
#include <vector>

#include "qmono/types.hpp"

namespace qmono {

StateVector tensor(const StateVector& a, const StateVector& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Reduction to the parties listed in `keep` (ascending order of the kept
/// indices is preserved). Trace is preserved.
DensityMatrix partial_trace(const DensityMatrix& state, const std::vector<int>& keep);

/// Pure-state reduction computed from amplitude slices (Gram matrix of the
/// fibers over the traced-out indices); the full outer product is never
/// materialized, so large traced-out factors are cheap.
DensityMatrix partial_trace(const StateVector& psi, const std::vector<int>& keep);

/// Nonzero spectrum of the reduction of a pure state to `keep`, computed on
/// whichever side of the cut is smaller. Descending, clamped to [0,1].
std::vector<double> reduced_spectrum(const StateVector& psi, const std::vector<int>& keep);

/// Real spectrum, descending. Values in [kEigenFloor, 0) are clamped to 0;
/// anything below kEigenFloor throws.
std::vector<double> eigenvalues(const DensityMatrix& state);

double von_neumann_entropy(const DensityMatrix& state);    // bits
double entropy_from_spectrum(std::span<const double> eigs);  // bits

double shannon_entropy(const ProbabilityDistribution& dist);  // bits
double shannon_entropy(std::span<const double> weights);      // bits, no validation

/// (1/2) * trace norm of the difference.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace qmono

#endif
