#include "selfsim/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

namespace selfsim {

void Grid::validate() const {
    if (n_points < 3) throw invalid_input_error("Grid: need n_points >= 3");
    if (!(x_max > x_min)) throw invalid_input_error("Grid: x_max must exceed x_min");
    if (!std::isfinite(x_min) || !std::isfinite(x_max))
        throw invalid_input_error("Grid: non-finite bounds");
}

SymTridiagonal assemble_hamiltonian(const SelfSimilarPotential& p, const Grid& g, double mass) {
    g.validate();
    p.validate();
    if (!(mass > 0.0)) throw invalid_input_error("assemble_hamiltonian: mass must be > 0");
    const double h = g.spacing();
    if (p.block.has_compact_support()) {
        const double finest = p.finest_scale();
        if (finest > 0.0 && h > finest / 8.0) {
            std::ostringstream os;
            os << "assemble_hamiltonian: grid too coarse, h = " << h
               << " exceeds finest retained scale / 8 = " << finest / 8.0;
            throw config_error(os.str());
        }
    }
    SymTridiagonal t;
    t.diag.resize(g.n_points);
    t.offdiag.assign(g.n_points - 1, -1.0 / (2.0 * mass * h * h));
    const double kin = 1.0 / (mass * h * h);
    for (std::size_t i = 0; i < g.n_points; ++i) t.diag[i] = kin + eval_potential(p, g.x(i));
    return t;
}

namespace {

bool edge_affected_flag(const std::vector<double>& psi, double h, std::size_t n) {
    const std::size_t ew = std::max<std::size_t>(1, std::size_t(0.05 * double(n)));
    double mass_edges = 0.0;
    for (std::size_t i = 0; i < ew; ++i) mass_edges += psi[i] * psi[i];
    for (std::size_t i = n - ew; i < n; ++i) mass_edges += psi[i] * psi[i];
    return mass_edges * h > 1e-6;
}

} // namespace

std::vector<Eigenpair> solve_spectrum(const SymTridiagonal& h, const Grid& g,
                                      std::optional<std::pair<double, double>> window) {
    h.validate();
    if (h.size() != g.n_points) throw invalid_input_error("solve_spectrum: grid/operator mismatch");
    const std::size_t n = h.size();
    const double hx = g.spacing();
    double anorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = std::fabs(h.diag[i]);
        if (i > 0) row += std::fabs(h.offdiag[i - 1]);
        if (i + 1 < n) row += std::fabs(h.offdiag[i]);
        anorm = std::max(anorm, row);
    }

    std::vector<Eigenpair> out;
    if (!window) {
        EigenDecomposition dec = eig_sym_tridiagonal(h, true);
        out.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            out[j].energy = dec.values[j];
            out[j].index = j;
            out[j].wavefunction.resize(n);
            const double scale = 1.0 / std::sqrt(hx);
            for (std::size_t i = 0; i < n; ++i)
                out[j].wavefunction[i] = dec.vectors.at(i, j) * scale;
            out[j].edge_affected = edge_affected_flag(out[j].wavefunction, hx, n);
        }
        return out;
    }

    const auto [wlo, whi] = *window;
    if (!(wlo < whi)) throw invalid_input_error("solve_spectrum: empty window");
    std::vector<double> values = eig_sym_tridiagonal_values(h);
    std::vector<std::size_t> wanted;
    for (std::size_t j = 0; j < n; ++j)
        if (values[j] >= wlo && values[j] <= whi) wanted.push_back(j);

    // vectors by inverse iteration; orthogonalize inside clusters of
    // nearly equal eigenvalues
    const double cluster_gap = 1e-7 * anorm;
    std::vector<std::vector<double>> vecs(wanted.size());
    for (std::size_t w = 0; w < wanted.size(); ++w) {
        std::vector<const double*> neighbors;
        for (std::size_t q = w; q-- > 0;) {
            if (values[wanted[w]] - values[wanted[q]] > cluster_gap) break;
            neighbors.push_back(vecs[q].data());
        }
        vecs[w] = tridiagonal_eigenvector(h, values[wanted[w]], neighbors, n);
    }
    out.resize(wanted.size());
    for (std::size_t w = 0; w < wanted.size(); ++w) {
        out[w].energy = values[wanted[w]];
        out[w].index = wanted[w];
        out[w].wavefunction.resize(n);
        const double scale = 1.0 / std::sqrt(hx);
        for (std::size_t i = 0; i < n; ++i) out[w].wavefunction[i] = vecs[w][i] * scale;
        out[w].edge_affected = edge_affected_flag(out[w].wavefunction, hx, n);
    }
    return out;
}

namespace {

// sum_n U(x + n b) over every copy that reaches x
double periodic_cell_potential(const BuildingBlock& block, double b, double x) {
    const double lo = block.support_lo(), hi = block.support_hi();
    double v = 0.0;
    const int na = int(std::floor((lo - x) / b)) - 1;
    const int nb = int(std::ceil((hi - x) / b)) + 1;
    for (int n = na; n <= nb; ++n) {
        const double xn = x + double(n) * b;
        if (xn > lo && xn < hi) v += block.eval(xn);
    }
    return v;
}

} // namespace

BandStructure solve_bloch(const BuildingBlock& block, double b, double mass, std::size_t n_kappa,
                          std::size_t cell_points, std::size_t n_bands) {
    block.validate();
    if (!(b > 0.0)) throw invalid_input_error("solve_bloch: b must be > 0");
    if (!block.has_compact_support())
        throw config_error("solve_bloch: periodic tiling needs a compactly supported block");
    if (cell_points < 64) throw invalid_input_error("solve_bloch: cell_points must be >= 64");
    if (n_kappa < 3 || n_kappa % 2 == 0)
        throw invalid_input_error("solve_bloch: n_kappa must be odd and >= 3");
    if (n_bands == 0 || n_bands > cell_points / 2)
        throw invalid_input_error("solve_bloch: n_bands out of range");
    if (!(mass > 0.0)) throw invalid_input_error("solve_bloch: mass must be > 0");

    BandStructure bs;
    bs.cell_length = b;
    bs.mass = mass;
    bs.cell_points = cell_points;
    bs.energies.assign(n_bands, std::vector<double>(n_kappa, 0.0));
    bs.kappas.resize(n_kappa);
    bs.cell_vectors.assign(n_kappa, CplxMat(cell_points, n_bands));

    const double h = b / double(cell_points);
    const double kin = 1.0 / (2.0 * mass * h * h);
    std::vector<double> vcell(cell_points);
    for (std::size_t j = 0; j < cell_points; ++j)
        vcell[j] = periodic_cell_potential(block, b, double(j) * h);

    for (std::size_t jk = 0; jk < n_kappa; ++jk) {
        const double kappa = -M_PI + 2.0 * M_PI * (double(jk) + 0.5) / double(n_kappa);
        bs.kappas[jk] = kappa;
        HermitianDense hm(cell_points);
        for (std::size_t j = 0; j < cell_points; ++j) {
            hm.at(j, j) = 2.0 * kin + vcell[j];
            if (j + 1 < cell_points) {
                hm.at(j, j + 1) = -kin;
                hm.at(j + 1, j) = -kin;
            }
        }
        hm.at(0, cell_points - 1) += -kin * std::exp(cplx(0.0, -kappa));
        hm.at(cell_points - 1, 0) += -kin * std::exp(cplx(0.0, kappa));
        EigenDecompositionC dec = eig_hermitian(hm);
        for (std::size_t k = 0; k < n_bands; ++k) {
            bs.energies[k][jk] = dec.values[k];
            // gauge: cell average of the periodic part real and positive
            cplx avg(0.0);
            for (std::size_t j = 0; j < cell_points; ++j)
                avg += dec.vectors.at(j, k) * std::exp(cplx(0.0, -kappa * double(j) * h / b));
            cplx phase(1.0);
            double norm = 0.0;
            for (std::size_t j = 0; j < cell_points; ++j) norm += std::norm(dec.vectors.at(j, k));
            if (std::abs(avg) > 1e-8 * std::sqrt(norm)) {
                phase = std::conj(avg) / std::abs(avg);
            } else if (jk > 0) {
                // fall back to maximal overlap with the previous kappa point
                cplx ov(0.0);
                for (std::size_t j = 0; j < cell_points; ++j)
                    ov += std::conj(bs.cell_vectors[jk - 1].at(j, k)) * dec.vectors.at(j, k);
                if (std::abs(ov) < 1e-10)
                    throw gauge_error("solve_bloch: cannot fix the Bloch phase; refine n_kappa");
                phase = std::conj(ov) / std::abs(ov);
            }
            const double cellnorm = 1.0 / std::sqrt(norm * h);
            for (std::size_t j = 0; j < cell_points; ++j)
                bs.cell_vectors[jk].at(j, k) = dec.vectors.at(j, k) * phase * cellnorm;
        }
    }
    return bs;
}

WannierFunction wannier_from_bloch(const BandStructure& bs, std::size_t band, int window_cells) {
    if (band >= bs.n_bands()) throw invalid_input_error("wannier_from_bloch: band out of range");
    const std::size_t nk = bs.n_kappa();
    if (window_cells < 0) window_cells = int((nk - 1) / 2);
    if (std::size_t(2 * window_cells + 1) > nk)
        throw invalid_input_error("wannier_from_bloch: window exceeds the kappa supercell");

    // band-crossing guard: a vanishing gap to a neighboring band breaks the gauge
    double scale = 0.0;
    for (const auto& bandvals : bs.energies)
        for (double e : bandvals) scale = std::max(scale, std::fabs(e));
    if (scale == 0.0) scale = 1.0;
    for (std::size_t jk = 0; jk < nk; ++jk) {
        if (band + 1 < bs.n_bands() &&
            std::fabs(bs.energies[band + 1][jk] - bs.energies[band][jk]) < 1e-9 * scale)
            throw gauge_error("wannier_from_bloch: band crossing on the kappa grid; refine "
                              "n_kappa or re-sort bands");
        if (band > 0 && std::fabs(bs.energies[band][jk] - bs.energies[band - 1][jk]) < 1e-9 * scale)
            throw gauge_error("wannier_from_bloch: band crossing on the kappa grid; refine "
                              "n_kappa or re-sort bands");
    }

    const std::size_t nc = bs.cell_points;
    const double b = bs.cell_length;
    const double h = b / double(nc);
    const std::size_t total = std::size_t(2 * window_cells + 1) * nc;

    WannierFunction w;
    w.cell_length = b;
    w.cell_points = nc;
    w.window_cells = window_cells;
    w.x.resize(total);
    w.chi.resize(total);

    std::vector<cplx> acc(total, cplx(0.0));
    for (std::size_t jk = 0; jk < nk; ++jk) {
        const double kappa = bs.kappas[jk];
        for (int cell = -window_cells; cell <= window_cells; ++cell) {
            const cplx bloch_phase = std::exp(cplx(0.0, kappa * double(cell)));
            const std::size_t base = std::size_t(cell + window_cells) * nc;
            for (std::size_t j = 0; j < nc; ++j)
                acc[base + j] += bloch_phase * bs.cell_vectors[jk].at(j, band);
        }
    }
    double re2 = 0.0, im2 = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        acc[i] /= double(nk);
        re2 += acc[i].real() * acc[i].real();
        im2 += acc[i].imag() * acc[i].imag();
    }
    w.imag_residual = im2 / (re2 + im2);
    if (w.imag_residual > 1e-8)
        throw gauge_error("wannier_from_bloch: Wannier function failed to come out real");
    double nrm = std::sqrt(re2 * h);
    for (std::size_t i = 0; i < total; ++i) {
        w.x[i] = (-double(window_cells)) * b + double(i) * h;
        w.chi[i] = acc[i].real() / nrm;
    }
    return w;
}

double wannier_overlap(const WannierFunction& w, int n, int m) {
    const std::size_t total = w.chi.size();
    const std::size_t nc = w.cell_points;
    const double h = w.cell_length / double(nc);
    const long shift_n = long(n) * long(nc);
    const long shift_m = long(m) * long(nc);
    double s = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        const long in = (long(i) - shift_n) % long(total);
        const long im = (long(i) - shift_m) % long(total);
        const std::size_t a = std::size_t(in < 0 ? in + long(total) : in);
        const std::size_t c = std::size_t(im < 0 ? im + long(total) : im);
        s += w.chi[a] * w.chi[c];
    }
    return s * h;
}

} // namespace selfsim
