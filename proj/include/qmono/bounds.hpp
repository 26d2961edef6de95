#ifndef QMONO_BOUNDS_HPP
#define QMONO_BOUNDS_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qmono/ensembles.hpp"
#include "qmono/types.hpp"

namespace qmono {

/// Named bound value in bits. std_error is 0 for deterministic bounds;
/// Monte-Carlo reports carry (samples, seed) for replay.
struct BoundReport {
  std::string name;
  double value = 0;
  double std_error = 0;
  long samples = 0;
  std::uint64_t seed = 0;
};

/// Upper bound on accessible information: S(avg) - sum_i p_i S(rho_i).
BoundReport holevo_chi(const MultipartyEnsemble& ens);

/// Subentropy: the negated (d-1)-th divided difference of x^d log2(x) over
/// the spectrum. Coinciding eigenvalues (within kDegeneracyTol) use
/// confluent, derivative-based divided differences, which makes the
/// degenerate limit exact. Zero eigenvalues drop out identically.
double subentropy(const DensityMatrix& state);
double subentropy_from_spectrum(std::vector<double> eigenvalues);

/// Lower bound on accessible information: Q(avg) - sum_i p_i Q(rho_i).
BoundReport jrw_lower(const MultipartyEnsemble& ens);

/// Upper bound on locally accessible information of a bipartite ensemble:
/// S(avg marginal 1) + S(avg marginal 2) - max_k sum_i p_i S(rho_i marginal k).
BoundReport chi_locc(const MultipartyEnsemble& ens);

/// |alpha> x |beta> with each factor Haar-uniform.
StateVector haar_product_sample(int d1, int d2, std::mt19937_64& engine);

/// Monte-Carlo estimate of the local subentropy of a bipartite state:
/// -d1*d2*E[f log2 f], f = <alpha,beta|zeta|alpha,beta> over Haar product
/// states (unit-normalized measure on each factor). Samples are split over
/// a fixed number of keyed shards, so results are byte-identical for any
/// thread count.
BoundReport local_subentropy_mc(const DensityMatrix& zeta, long samples, std::uint64_t seed,
                                int threads = 1);

/// Lower bound on locally accessible information: the mutual information
/// gathered by the better single party measuring the isotropic (Haar-
/// covariant) POVM on its marginal ensemble, -d_k*E[fbar log2 fbar -
/// sum_i p_i f_i log2 f_i] maximized over the two sides. Estimated with
/// common random numbers across all terms; standard error propagated.
BoundReport lambda_locc(const MultipartyEnsemble& ens, long samples, std::uint64_t seed,
                        int threads = 1);

/// log2 of the ensemble cardinality.
BoundReport cardinality_bound(const MultipartyEnsemble& ens);

/// Spectrum of the average state; for all-pure ensembles this is the
/// Gram-matrix spectrum, so it scales to large Hilbert spaces.
std::vector<double> average_state_spectrum(const MultipartyEnsemble& ens);

/// Spectrum of the reduction of the average state to `keep`. All-pure
/// ensembles use stacked fiber Gram matrices; the large side of the cut is
/// never materialized as a matrix.
std::vector<double> average_reduced_spectrum(const MultipartyEnsemble& ens,
                                             const std::vector<int>& keep);

}  // namespace qmono

#endif
