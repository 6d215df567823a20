#ifndef SELFSIM_SCHRODINGER_HPP
#define SELFSIM_SCHRODINGER_HPP

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "selfsim/linalg.hpp"
#include "selfsim/potential.hpp"

namespace selfsim {

// Uniform grid of interior unknowns; hard walls sit one spacing outside
// [x_min, x_max], so an n_points grid yields an n_points x n_points operator.
struct Grid {
    double x_min = -10.0;
    double x_max = 10.0;
    std::size_t n_points = 1001;

    double spacing() const { return (x_max - x_min) / double(n_points - 1); }
    double x(std::size_t i) const { return x_min + double(i) * spacing(); }
    void validate() const;
};

struct Eigenpair {
    double energy = 0.0;
    std::vector<double> wavefunction; // sum psi_i^2 h = 1
    std::size_t index = 0;            // position in the full ascending spectrum
    bool edge_affected = false;       // significant mass within 5% of a wall
};

// Bloch bands on a half-offset uniform kappa grid of [-pi, pi); the offset
// keeps the free-particle zone-edge degeneracy off the grid. n_kappa must be
// odd so the grid is symmetric under kappa -> -kappa and the discrete Wannier
// transform closes over an odd supercell.
struct BandStructure {
    std::vector<double> kappas;
    std::vector<std::vector<double>> energies; // energies[k][j], bands ascending
    double cell_length = 1.0;
    double mass = 0.5;
    std::size_t cell_points = 0;
    std::vector<CplxMat> cell_vectors; // per kappa: cell_points x n_bands, gauge-fixed

    std::size_t n_bands() const { return energies.size(); }
    std::size_t n_kappa() const { return kappas.size(); }
};

// chi^k tabulated over the full (2W+1)-cell supercell, site 0 at x = 0.
struct WannierFunction {
    std::vector<double> x;
    std::vector<double> chi;
    double cell_length = 1.0;
    std::size_t cell_points = 0;
    int window_cells = 0;
    double imag_residual = 0.0; // discarded imaginary L2 fraction
};

// Second-order stencil: diag 1/(m h^2) + V(x_i), offdiag -1/(2 m h^2).
// Throws config_error when the grid cannot resolve the finest retained
// potential scale (h <= finest/8 for compact blocks).
SymTridiagonal assemble_hamiltonian(const SelfSimilarPotential& p, const Grid& g, double mass);

// All eigenpairs, or only those inside `window`. The windowed path computes
// eigenvalues for the whole operator but inverse-iterates vectors only where
// asked, which is what makes fine grids affordable.
std::vector<Eigenpair> solve_spectrum(const SymTridiagonal& h, const Grid& g,
                                      std::optional<std::pair<double, double>> window = {});

// Periodic problem sum_n U(x + n b) with Bloch phase e^{i kappa} across one
// cell of length b. Compactly supported blocks only.
BandStructure solve_bloch(const BuildingBlock& block, double b, double mass, std::size_t n_kappa,
                          std::size_t cell_points, std::size_t n_bands);

// Discrete Wannier function of one band. window_cells < 0 selects the full
// supercell (n_kappa cells), for which shift-orthonormality is exact.
WannierFunction wannier_from_bloch(const BandStructure& bs, std::size_t band,
                                   int window_cells = -1);

// Supercell-periodic discrete inner product <chi_n | chi_m>.
double wannier_overlap(const WannierFunction& w, int n, int m);

} // namespace selfsim

#endif
