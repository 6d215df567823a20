#ifndef SELFSIM_SCALEBASIS_HPP
#define SELFSIM_SCALEBASIS_HPP

#include <cstddef>
#include <vector>

#include "selfsim/linalg.hpp"
#include "selfsim/schrodinger.hpp"

namespace selfsim {

enum class GeneratorKind { sinc, lowdin_gaussian, numeric_wannier };

// Translation-orthonormal generator chi living on a lattice of constant
// cell_length: integral chi(x) chi(x - n cell_length) dx = delta_{n0}.
struct GeneratorFunction {
    GeneratorKind kind = GeneratorKind::sinc;
    int band_index = 0;
    double cell_length = 1.0;
    DecayClass decay = DecayClass::tempered;
    double decay_alpha = 0.0;     // measured rate of e^{alpha|x|} chi -> 0, 0 when only tempered
    double ortho_residual = 0.0;  // construction-time shift-orthonormality defect

    double gaussian_width = 0.25; // lowdin_gaussian
    std::vector<double> lowdin_coeff;
    int lowdin_halfwidth = 0;

    std::vector<double> tab_x, tab_chi; // numeric_wannier

    double eval(double x) const;
    double deriv(double x) const;
    // |x| beyond which |chi| stays below tail; used to size quadrature windows
    double localization_halfwidth(double tail) const;
};

GeneratorFunction make_generator_sinc(double cell_length);

// Symmetric (Loewdin) orthonormalization of Gaussian translates on a
// truncated lattice of 2*halfwidth+1 sites. Throws conditioning_error when
// the overlap matrix has an eigenvalue below 1e-6.
GeneratorFunction make_generator_lowdin_gaussian(double cell_length, double width,
                                                 int halfwidth = 40);

// Numeric Wannier generator, dilated from its native lattice onto
// cell_length (a unitary rescale, so shift-orthonormality carries over).
GeneratorFunction make_generator_numeric_wannier(const WannierFunction& w, double cell_length,
                                                 int band_index = 0);

// psi_n(x) = chi(log|x - x*| + n log lambda) / sqrt(2 |x - x*|), x* = b/(1-lambda).
// The generator must live on the log-lattice: cell_length == log(lambda).
struct ScalableBasisFunction {
    GeneratorFunction generator;
    int n = 0;
    double lambda = 2.0;
    double b = 0.0;

    double fixed_point() const { return b / (1.0 - lambda); }
    void validate() const;
};

double eval_psi(const ScalableBasisFunction& f, double x);
double eval_psi_deriv(const ScalableBasisFunction& f, double x);

struct GramReport {
    RealMat gram;
    double max_deviation = 0.0;   // max |gram - identity|
    double puncture_log_radius = 0.0;
    double window_log_radius = 0.0;
    double puncture_mass_bound = 0.0;
    std::size_t evaluations = 0;
};

// Gram matrix of a family sharing (lambda, b) by radial quadrature on both
// sides of the fixed point, with a symmetric puncture whose neglected mass
// is bounded from the generator's decay class.
GramReport check_orthonormality(const std::vector<ScalableBasisFunction>& family, double quad_tol);

struct LocalizationReport {
    double near_exponent = 0.0; // d log|psi| / d log r as r -> 0+
    double far_exponent = 0.0;  // -d log|psi| / d log r as r -> infinity
    double tempered_near_tail = 0.0; // sup sqrt(r |log r|)|psi| on the sampled tail
    double tempered_far_tail = 0.0;
    bool monotone_near = false;
    bool monotone_far = false;
    bool trivially_zero = false;
};

LocalizationReport check_localization(const ScalableBasisFunction& f);

// Fraction of L2 mass inside the single lambda-fold annulus matched to the
// generator's home cell.
double cell_mass_fraction(const ScalableBasisFunction& f, double quad_tol);

} // namespace selfsim

#endif
