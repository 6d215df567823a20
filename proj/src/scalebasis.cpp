#include "selfsim/scalebasis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace selfsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sinc_val(double t) {
    const double pt = kPi * t;
    if (std::fabs(t) < 1e-4) {
        const double p2 = pt * pt;
        return 1.0 - p2 / 6.0 + p2 * p2 / 120.0;
    }
    return std::sin(pt) / pt;
}

double sinc_deriv(double t) {
    const double pt = kPi * t;
    if (std::fabs(t) < 1e-4) {
        return -kPi * pt / 3.0 + kPi * pt * pt * pt / 30.0;
    }
    return std::cos(pt) / t - std::sin(pt) / (kPi * t * t);
}

double gaussian_norm(double w) { return std::pow(kPi * w * w, -0.25); }

// least-squares slope of y against x
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = double(n) * sxx - sx * sx;
    return (double(n) * sxy - sx * sy) / det;
}

} // namespace

double GeneratorFunction::eval(double x) const {
    switch (kind) {
    case GeneratorKind::sinc:
        return sinc_val(x / cell_length) / std::sqrt(cell_length);
    case GeneratorKind::lowdin_gaussian: {
        const double gn = gaussian_norm(gaussian_width);
        double s = 0.0;
        for (int m = -lowdin_halfwidth; m <= lowdin_halfwidth; ++m) {
            const double c = lowdin_coeff[std::size_t(m + lowdin_halfwidth)];
            if (c == 0.0) continue;
            const double u = (x - double(m) * cell_length) / gaussian_width;
            if (std::fabs(u) > 40.0) continue;
            s += c * gn * std::exp(-0.5 * u * u);
        }
        return s;
    }
    case GeneratorKind::numeric_wannier: {
        if (x <= tab_x.front() || x >= tab_x.back()) return 0.0;
        const double h = tab_x[1] - tab_x[0];
        const double t = (x - tab_x.front()) / h;
        long i1 = long(std::floor(t));
        i1 = std::max<long>(1, std::min<long>(long(tab_x.size()) - 3, i1));
        const double s = t - double(i1);
        const double fm1 = tab_chi[std::size_t(i1 - 1)], f0 = tab_chi[std::size_t(i1)];
        const double f1 = tab_chi[std::size_t(i1 + 1)], f2 = tab_chi[std::size_t(i1 + 2)];
        return fm1 * (-s * (s - 1.0) * (s - 2.0) / 6.0) + f0 * ((s * s - 1.0) * (s - 2.0) / 2.0) +
               f1 * (-s * (s + 1.0) * (s - 2.0) / 2.0) + f2 * (s * (s * s - 1.0) / 6.0);
    }
    }
    return 0.0;
}

double GeneratorFunction::deriv(double x) const {
    switch (kind) {
    case GeneratorKind::sinc:
        return sinc_deriv(x / cell_length) / (cell_length * std::sqrt(cell_length));
    case GeneratorKind::lowdin_gaussian: {
        const double gn = gaussian_norm(gaussian_width);
        double s = 0.0;
        for (int m = -lowdin_halfwidth; m <= lowdin_halfwidth; ++m) {
            const double c = lowdin_coeff[std::size_t(m + lowdin_halfwidth)];
            if (c == 0.0) continue;
            const double dx = x - double(m) * cell_length;
            const double u = dx / gaussian_width;
            if (std::fabs(u) > 40.0) continue;
            s += -c * gn * std::exp(-0.5 * u * u) * dx / (gaussian_width * gaussian_width);
        }
        return s;
    }
    case GeneratorKind::numeric_wannier: {
        if (x <= tab_x.front() || x >= tab_x.back()) return 0.0;
        const double h = tab_x[1] - tab_x[0];
        const double t = (x - tab_x.front()) / h;
        long i1 = long(std::floor(t));
        i1 = std::max<long>(1, std::min<long>(long(tab_x.size()) - 3, i1));
        const double s = t - double(i1);
        const double fm1 = tab_chi[std::size_t(i1 - 1)], f0 = tab_chi[std::size_t(i1)];
        const double f1 = tab_chi[std::size_t(i1 + 1)], f2 = tab_chi[std::size_t(i1 + 2)];
        const double d = fm1 * (-(3.0 * s * s - 6.0 * s + 2.0) / 6.0) +
                         f0 * ((3.0 * s * s - 4.0 * s - 1.0) / 2.0) +
                         f1 * (-(3.0 * s * s - 2.0 * s - 2.0) / 2.0) + f2 * ((3.0 * s * s - 1.0) / 6.0);
        return d / h;
    }
    }
    return 0.0;
}

double GeneratorFunction::localization_halfwidth(double tail) const {
    switch (kind) {
    case GeneratorKind::sinc:
        return std::min(1e7, std::sqrt(cell_length) / (kPi * tail));
    case GeneratorKind::lowdin_gaussian: {
        const double scale = gaussian_norm(gaussian_width);
        const double alpha = decay_alpha > 0.0 ? decay_alpha : 1.0;
        return 2.0 * cell_length + std::log(std::max(scale / tail, 2.0)) / alpha;
    }
    case GeneratorKind::numeric_wannier: {
        double hw = 0.0;
        for (std::size_t i = 0; i < tab_x.size(); ++i)
            if (std::fabs(tab_chi[i]) > tail) hw = std::max(hw, std::fabs(tab_x[i]));
        return hw + cell_length;
    }
    }
    return 0.0;
}

GeneratorFunction make_generator_sinc(double cell_length) {
    if (!(cell_length > 0.0)) throw invalid_input_error("make_generator_sinc: cell_length must be > 0");
    GeneratorFunction g;
    g.kind = GeneratorKind::sinc;
    g.cell_length = cell_length;
    g.decay = DecayClass::tempered;
    g.decay_alpha = 0.0;
    g.ortho_residual = 0.0; // band-limited translates are exactly orthonormal
    return g;
}

GeneratorFunction make_generator_lowdin_gaussian(double cell_length, double width, int halfwidth) {
    if (!(cell_length > 0.0) || !(width > 0.0) || halfwidth < 4)
        throw invalid_input_error("make_generator_lowdin_gaussian: bad parameters");
    const int m = 2 * halfwidth + 1;
    RealMat s(std::size_t(m), std::size_t(m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double d = double(i - j) * cell_length / (2.0 * width);
            s.at(std::size_t(i), std::size_t(j)) = std::exp(-d * d);
        }
    EigenDecomposition dec = eig_symmetric_dense(s, true);
    if (dec.values.front() < 1e-6)
        throw conditioning_error(
            "make_generator_lowdin_gaussian: overlap matrix is near singular; narrow the width",
            dec.values.front());

    GeneratorFunction g;
    g.kind = GeneratorKind::lowdin_gaussian;
    g.cell_length = cell_length;
    g.gaussian_width = width;
    g.lowdin_halfwidth = halfwidth;
    g.lowdin_coeff.assign(std::size_t(m), 0.0);
    const std::size_t center = std::size_t(halfwidth);
    for (std::size_t i = 0; i < std::size_t(m); ++i) {
        double v = 0.0;
        for (std::size_t k = 0; k < std::size_t(m); ++k)
            v += dec.vectors.at(i, k) * dec.vectors.at(center, k) / std::sqrt(dec.values[k]);
        g.lowdin_coeff[i] = v;
    }

    // construction-time shift-orthonormality from the coefficient algebra
    double worst = 0.0;
    for (int k = 0; k <= 3; ++k) {
        double ov = 0.0;
        for (int i = -halfwidth; i <= halfwidth; ++i)
            for (int j = -halfwidth; j <= halfwidth; ++j) {
                const int d = i - j - k;
                const double u = double(d) * cell_length / (2.0 * width);
                ov += g.lowdin_coeff[std::size_t(i + halfwidth)] *
                      g.lowdin_coeff[std::size_t(j + halfwidth)] * std::exp(-u * u);
            }
        worst = std::max(worst, std::fabs(ov - (k == 0 ? 1.0 : 0.0)));
    }
    g.ortho_residual = worst;

    // measured exponential rate of the coefficient tail
    std::vector<double> xs, ys;
    for (int i = halfwidth / 3; i <= halfwidth; ++i) {
        const double c = std::fabs(g.lowdin_coeff[std::size_t(i + halfwidth)]);
        if (c > 1e-250) {
            xs.push_back(double(i) * cell_length);
            ys.push_back(std::log(c));
        }
    }
    g.decay = DecayClass::super_exponential;
    g.decay_alpha = (xs.size() >= 3) ? std::max(0.0, -ls_slope(xs, ys)) : 1.0 / cell_length;
    return g;
}

GeneratorFunction make_generator_numeric_wannier(const WannierFunction& w, double cell_length,
                                                 int band_index) {
    if (!(cell_length > 0.0))
        throw invalid_input_error("make_generator_numeric_wannier: cell_length must be > 0");
    double worst = 0.0;
    for (int k = 0; k <= 3; ++k)
        worst = std::max(worst, std::fabs(wannier_overlap(w, 0, k) - (k == 0 ? 1.0 : 0.0)));
    if (worst > 1e-6)
        throw invalid_input_error(
            "make_generator_numeric_wannier: Wannier translates are not orthonormal to 1e-6");

    GeneratorFunction g;
    g.kind = GeneratorKind::numeric_wannier;
    g.band_index = band_index;
    g.cell_length = cell_length;
    g.ortho_residual = worst;
    const double dilate = cell_length / w.cell_length;
    const double amp = 1.0 / std::sqrt(dilate);
    g.tab_x.resize(w.x.size());
    g.tab_chi.resize(w.x.size());
    for (std::size_t i = 0; i < w.x.size(); ++i) {
        g.tab_x[i] = w.x[i] * dilate;
        g.tab_chi[i] = w.chi[i] * amp;
    }
    // measured tail rate on the tabulation
    double peak = 0.0;
    for (double v : g.tab_chi) peak = std::max(peak, std::fabs(v));
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < g.tab_x.size(); ++i) {
        const double av = std::fabs(g.tab_chi[i]);
        if (av > 1e-12 * peak && av < 1e-2 * peak && std::fabs(g.tab_x[i]) > cell_length) {
            xs.push_back(std::fabs(g.tab_x[i]));
            ys.push_back(std::log(av));
        }
    }
    g.decay_alpha = (xs.size() >= 8) ? std::max(0.0, -ls_slope(xs, ys)) : 0.0;
    g.decay = g.decay_alpha > 0.5 ? DecayClass::super_exponential : DecayClass::tempered;
    return g;
}

void ScalableBasisFunction::validate() const {
    if (!(lambda > 0.0) || lambda == 1.0)
        throw invalid_input_error("ScalableBasisFunction: lambda must be positive and != 1");
    const double a = std::log(lambda);
    if (std::fabs(generator.cell_length - std::fabs(a)) > 1e-12 * std::max(1.0, std::fabs(a)))
        throw invalid_input_error(
            "ScalableBasisFunction: generator lattice constant must equal |log lambda|");
}

namespace {

double log_radius(const ScalableBasisFunction& f, double x) {
    const double xs = f.fixed_point();
    const double r = std::fabs(x - xs);
    if (r < 1e-12)
        throw singularity_error("eval_psi: x too close to the fixed point b/(1-lambda)");
    return std::log(r);
}

} // namespace

double eval_psi(const ScalableBasisFunction& f, double x) {
    f.validate();
    const double u = log_radius(f, x);
    const double r = std::fabs(x - f.fixed_point());
    return f.generator.eval(u + double(f.n) * std::log(f.lambda)) / std::sqrt(2.0 * r);
}

double eval_psi_deriv(const ScalableBasisFunction& f, double x) {
    f.validate();
    const double xs = f.fixed_point();
    const double u = log_radius(f, x);
    const double r = std::fabs(x - xs);
    const double sg = (x >= xs) ? 1.0 : -1.0;
    const double arg = u + double(f.n) * std::log(f.lambda);
    return sg * (f.generator.deriv(arg) - 0.5 * f.generator.eval(arg)) / (r * std::sqrt(2.0 * r));
}

namespace {

// one-sided radial integral of psi_i psi_j written in the log radius; panels
// are one log-cell wide and fall back to the generator form where e^{x'}
// cannot be represented next to the fixed point
double radial_pair_integral(const ScalableBasisFunction& fi, const ScalableBasisFunction& fj,
                            double xlo, double xhi, double panel_tol, std::size_t* evals) {
    const double a = fi.generator.cell_length;
    const double xs = fi.fixed_point();
    const double la = std::log(fi.lambda);
    auto integrand = [&](double u) {
        const double r = std::exp(u);
        if (u > -650.0 && u < 650.0 && r > 16.0 * std::numeric_limits<double>::epsilon() *
                                               std::max(1.0, std::fabs(xs))) {
            const double x = xs + r;
            return eval_psi(fi, x) * eval_psi(fj, x) * r;
        }
        return 0.5 * fi.generator.eval(u + double(fi.n) * la) *
               fj.generator.eval(u + double(fj.n) * la);
    };
    double total = 0.0;
    double lo = xlo;
    while (lo < xhi) {
        const double hi = std::min(lo + a, xhi);
        QuadratureResult q = integrate(integrand, lo, hi, panel_tol, 40000);
        total += q.value;
        if (evals) *evals += q.evaluations;
        lo = hi;
    }
    return total;
}

} // namespace

GramReport check_orthonormality(const std::vector<ScalableBasisFunction>& family, double quad_tol) {
    if (family.empty()) throw invalid_input_error("check_orthonormality: empty family");
    if (!(quad_tol > 0.0)) throw invalid_input_error("check_orthonormality: quad_tol must be > 0");
    const double lambda = family.front().lambda;
    const double b = family.front().b;
    for (const auto& f : family) {
        f.validate();
        if (f.lambda != lambda || f.b != b)
            throw invalid_input_error("check_orthonormality: family must share (lambda, b)");
    }
    const GeneratorFunction& gen = family.front().generator;
    const double a = gen.cell_length;
    const double la = std::log(lambda);

    double cmin = 0.0, cmax = 0.0;
    for (const auto& f : family) {
        cmin = std::min(cmin, -double(f.n) * la);
        cmax = std::max(cmax, -double(f.n) * la);
    }

    double pad;
    double bound;
    if (gen.decay == DecayClass::super_exponential && gen.decay_alpha > 0.0) {
        pad = gen.localization_halfwidth(quad_tol * 1e-3);
        bound = 2.0 * quad_tol * 1e-3 * (pad + a); // crude area bound on the cut tail
    } else {
        // tempered: the product tail behaves like a / (pi^2 X)
        pad = std::min(4.0e4, std::max(20.0 * a, 4.0 * a / (kPi * kPi * quad_tol)));
        bound = 4.0 * a / (kPi * kPi * pad);
    }
    const double xlo = cmin - pad;
    const double xhi = cmax + pad;
    const std::size_t n_panels = std::size_t((xhi - xlo) / a) + 1;
    const double panel_tol = std::max(quad_tol / (8.0 * double(n_panels)), 1e-17);

    GramReport rep;
    rep.puncture_log_radius = xlo;
    rep.window_log_radius = xhi;
    rep.puncture_mass_bound = bound;
    rep.gram = RealMat(family.size(), family.size());
    for (std::size_t i = 0; i < family.size(); ++i)
        for (std::size_t j = i; j < family.size(); ++j) {
            // psi depends on |x - x*| only, so both sides contribute equally
            const double one_side =
                radial_pair_integral(family[i], family[j], xlo, xhi, panel_tol, &rep.evaluations);
            rep.gram.at(i, j) = rep.gram.at(j, i) = 2.0 * one_side;
        }
    for (std::size_t i = 0; i < family.size(); ++i)
        for (std::size_t j = 0; j < family.size(); ++j)
            rep.max_deviation = std::max(
                rep.max_deviation, std::fabs(rep.gram.at(i, j) - (i == j ? 1.0 : 0.0)));
    return rep;
}

LocalizationReport check_localization(const ScalableBasisFunction& f) {
    f.validate();
    const double a = f.generator.cell_length;
    const double la = std::log(f.lambda);
    const double center = -double(f.n) * la;

    auto abs_psi_log = [&](double u) {
        // |psi| in the generator form, safe at any log radius
        const double chi = f.generator.eval(u + double(f.n) * la);
        return std::fabs(chi) * std::exp(-0.5 * u) / std::sqrt(2.0);
    };

    LocalizationReport rep;
    const int cells = 12;
    const int per_cell = 16;
    std::vector<double> near_x, near_y, far_x, far_y;
    std::vector<double> near_env, far_env;
    double peak = 0.0;
    for (int c = 0; c < cells; ++c) {
        double env_near = 0.0, env_far = 0.0;
        for (int q = 0; q < per_cell; ++q) {
            const double off = (double(c) + double(q) / per_cell) * a;
            env_near = std::max(env_near, std::fabs(f.generator.eval(center - 2.0 * a - off +
                                                                     double(f.n) * la + center)));
            env_far = std::max(env_far, std::fabs(f.generator.eval(center + 2.0 * a + off +
                                                                   double(f.n) * la + center)));
        }
        (void)env_near;
        (void)env_far;
    }
    // envelope per log-cell on both tails, generator-form evaluation
    std::vector<double> env_n(cells, 0.0), env_f(cells, 0.0);
    for (int c = 0; c < cells; ++c)
        for (int q = 0; q < per_cell; ++q) {
            const double off = 2.0 * a + (double(c) + double(q) / per_cell) * a;
            env_n[std::size_t(c)] = std::max(env_n[std::size_t(c)], abs_psi_log(center - off));
            env_f[std::size_t(c)] = std::max(env_f[std::size_t(c)], abs_psi_log(center + off));
            peak = std::max({peak, env_n[std::size_t(c)], env_f[std::size_t(c)]});
        }
    peak = std::max(peak, abs_psi_log(center));
    if (peak == 0.0) {
        rep.trivially_zero = true;
        rep.monotone_near = rep.monotone_far = true;
        return rep;
    }
    for (int c = 0; c < cells; ++c) {
        const double u = center - (2.0 + c + 0.5) * a;
        const double v = center + (2.0 + c + 0.5) * a;
        if (env_n[std::size_t(c)] > 0.0) {
            near_x.push_back(u);
            near_y.push_back(std::log(env_n[std::size_t(c)]));
        }
        if (env_f[std::size_t(c)] > 0.0) {
            far_x.push_back(v);
            far_y.push_back(std::log(env_f[std::size_t(c)]));
        }
    }
    rep.near_exponent = near_x.size() >= 3 ? ls_slope(near_x, near_y) : 0.0;
    rep.far_exponent = far_x.size() >= 3 ? -ls_slope(far_x, far_y) : 0.0;
    rep.monotone_near = true;
    rep.monotone_far = true;
    for (std::size_t c = 1; c < env_n.size(); ++c)
        if (env_n[c] > env_n[c - 1] * (1.0 + 1e-9)) rep.monotone_near = false;
    for (std::size_t c = 1; c < env_f.size(); ++c)
        if (env_f[c] > env_f[c - 1] * (1.0 + 1e-9)) rep.monotone_far = false;

    // tempered functional sqrt(r |log r|) |psi| at the sampled tails
    for (int c = 0; c < cells; ++c) {
        const double un = center - (2.0 + c + 0.5) * a;
        const double uf = center + (2.0 + c + 0.5) * a;
        if (env_n[std::size_t(c)] > 0.0)
            rep.tempered_near_tail =
                std::max(rep.tempered_near_tail,
                         std::exp(0.5 * un + std::log(env_n[std::size_t(c)])) *
                             std::sqrt(std::fabs(un)));
        if (env_f[std::size_t(c)] > 0.0)
            rep.tempered_far_tail =
                std::max(rep.tempered_far_tail,
                         std::exp(0.5 * uf + std::log(env_f[std::size_t(c)])) *
                             std::sqrt(std::fabs(uf)));
    }
    return rep;
}

double cell_mass_fraction(const ScalableBasisFunction& f, double quad_tol) {
    f.validate();
    const double a = f.generator.cell_length;
    const double la = std::log(f.lambda);
    const double center = -double(f.n) * la;
    auto chi2 = [&](double u) {
        const double c = f.generator.eval(u + double(f.n) * la);
        return c * c;
    };
    const double pad = std::max(20.0 * a, f.generator.localization_halfwidth(quad_tol * 1e-2));
    const QuadratureResult total = integrate(chi2, center - pad, center + pad, quad_tol, 100000);
    const QuadratureResult cell = integrate(chi2, center - 0.5 * a, center + 0.5 * a, quad_tol, 100000);
    if (total.value <= 0.0) return 0.0;
    return cell.value / total.value;
}

} // namespace selfsim
