#ifndef SELFSIM_LADDER_HPP
#define SELFSIM_LADDER_HPP

#include <cstddef>
#include <vector>

#include "selfsim/potential.hpp"
#include "selfsim/schrodinger.hpp"

namespace selfsim {

struct LadderRung {
    int n_lambda = 0;
    double energy = 0.0;
    std::size_t eigen_index = 0;
};

struct Ladder {
    double epsilon = 0.0; // ladder origin inside [E_ref, E_ref * lambda^2)
    std::vector<LadderRung> rungs;
};

struct LadderDecomposition {
    double lambda = 1.0;
    std::vector<Ladder> ladders; // sorted by epsilon
    double residual = 0.0;       // max circular deviation in log energy
};

// Groups positive energies into geometric ladders E = eps * lambda^{2n} by
// clustering the residues log(E) mod 2 log(lambda) on a circle. tol is the
// single-linkage gap threshold in log-energy.
LadderDecomposition detect_ladders(const std::vector<double>& energies, double lambda, double tol);

// Same, but keeps caller-supplied eigen indices attached to the rungs.
LadderDecomposition detect_ladders_indexed(const std::vector<std::pair<double, std::size_t>>& energies,
                                           double lambda, double tol);

// Consecutive-rung scaling check: for listed rungs j -> j+1 with gap
// dn = n_{j+1} - n_j, measures min over sign of
//   || psi_{j+1}(x) - sign * lambda^{dn/2} psi_j(lambda^dn x + shift) ||_L2
// on the overlap region, with cubic interpolation for the rescaled argument.
std::vector<double> verify_wavefunction_scaling(const std::vector<Eigenpair>& rungs,
                                                const std::vector<int>& n_lambda,
                                                const SelfSimilarPotential& p, const Grid& g);

// Band centers (1/2pi) integral E_{kappa,k} d kappa, one per band, evaluated
// as the mean over the periodic kappa grid.
std::vector<double> predict_ladder_origins(const BandStructure& bs);

// min over integer j of |log a - log b - 2 j log lambda|: distance between
// two ladder origins that are only defined modulo lambda^2.
double origin_log_distance(double a, double b, double lambda);

} // namespace selfsim

#endif
