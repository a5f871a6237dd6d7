// Explicit instantiations of the solver stack for real and complex scalars.

#include "cjss/bench/experiment.hpp"
#include "cjss/cjss.hpp"
#include "cjss/serialize.hpp"

#include <complex>

namespace cjss {

using Real = SparseHermitian<double>;
using Complex = SparseHermitian<std::complex<double>>;

template class SparseHermitian<double>;
template class SparseHermitian<std::complex<double>>;

template SpectralBounds estimate_bounds<Real>(const Real&, const LanczosOptions&);
template SpectralBounds estimate_bounds<Complex>(const Complex&, const LanczosOptions&);

template MomentBlock<double> build_moments<Real>(const Real&, const SpectralBounds&, const Block<double>&,
                                                 const FilterPlan&, bool);
template MomentBlock<std::complex<double>> build_moments<Complex>(const Complex&, const SpectralBounds&,
                                                                  const Block<std::complex<double>>&,
                                                                  const FilterPlan&, bool);

template EigencountEstimate estimate_eigencount<Real>(const Real&, const SpectralBounds&, const Window&, Index, Index,
                                                      std::uint64_t);
template EigencountEstimate estimate_eigencount<Complex>(const Complex&, const SpectralBounds&, const Window&, Index,
                                                         Index, std::uint64_t);

template SolveReport<double> solve<Real>(const Real&, const SpectralBounds&, const SolverConfig&,
                                         const RestartObserver<double>&, const Block<double>*);
template SolveReport<std::complex<double>> solve<Complex>(const Complex&, const SpectralBounds&, const SolverConfig&,
                                                          const RestartObserver<std::complex<double>>&,
                                                          const Block<std::complex<double>>*);

template json to_json<double>(const SolveReport<double>&, bool);
template json to_json<std::complex<double>>(const SolveReport<std::complex<double>>&, bool);

namespace bench {
template SyntheticProblem<double> make_synthetic_problem<double>(const SyntheticSpec&);
template SyntheticProblem<std::complex<double>> make_synthetic_problem<std::complex<double>>(const SyntheticSpec&);
template SparseHermitian<std::complex<double>> read_matrix_market<std::complex<double>>(std::istream&,
                                                                                       LoadedMatrixInfo*);
} // namespace bench

} // namespace cjss
