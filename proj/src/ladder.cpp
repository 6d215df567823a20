#include "selfsim/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace selfsim {

namespace {

double wrap_to(double v, double period) {
    double r = std::fmod(v, period);
    if (r < 0.0) r += period;
    return r;
}

double circ_dist(double a, double b, double period) {
    double d = std::fabs(a - b);
    d = std::fmod(d, period);
    return std::min(d, period - d);
}

} // namespace

LadderDecomposition detect_ladders_indexed(const std::vector<std::pair<double, std::size_t>>& energies,
                                           double lambda, double tol) {
    if (!(lambda > 0.0) || lambda == 1.0)
        throw invalid_input_error("detect_ladders: lambda must be positive and != 1");
    if (!(tol > 0.0)) throw invalid_input_error("detect_ladders: tol must be positive");
    if (energies.empty()) throw invalid_input_error("detect_ladders: no energies");
    for (const auto& [e, idx] : energies) {
        (void)idx;
        if (!(e > 0.0) || !std::isfinite(e))
            throw invalid_input_error("detect_ladders: energies must be positive and finite");
    }

    const double step = 2.0 * std::log(lambda); // signed rung step in log energy
    const double period = std::fabs(step);
    const std::size_t n = energies.size();

    struct Item {
        double residue;
        double log_e;
        std::size_t eigen_index;
    };
    std::vector<Item> items(n);
    double log_ref = std::log(energies[0].first);
    for (std::size_t i = 0; i < n; ++i) {
        const double le = std::log(energies[i].first);
        items[i] = {wrap_to(le, period), le, energies[i].second};
        log_ref = std::min(log_ref, le);
    }
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.residue < b.residue; });

    // circular single-linkage: cut every gap larger than tol
    std::vector<double> gap(n);
    for (std::size_t i = 0; i + 1 < n; ++i) gap[i] = items[i + 1].residue - items[i].residue;
    gap[n - 1] = items[0].residue + period - items[n - 1].residue;
    std::vector<std::size_t> cuts;
    for (std::size_t i = 0; i < n; ++i)
        if (gap[i] > tol) cuts.push_back(i);

    std::vector<std::vector<Item>> clusters;
    if (cuts.empty()) {
        clusters.push_back(items);
    } else {
        for (std::size_t c = 0; c < cuts.size(); ++c) {
            const std::size_t begin = (cuts[(c + cuts.size() - 1) % cuts.size()] + 1) % n;
            const std::size_t end = cuts[c];
            std::vector<Item> cl;
            for (std::size_t i = begin;; i = (i + 1) % n) {
                cl.push_back(items[i]);
                if (i == end) break;
            }
            clusters.push_back(std::move(cl));
        }
        // clusters separated by less than 2 tol cannot be assigned reliably
        for (std::size_t c = 0; c < cuts.size(); ++c) {
            if (cuts.size() > 1 && gap[cuts[c]] < 2.0 * tol) {
                std::ostringstream os;
                os << "detect_ladders: clusters collide, residues near " << items[cuts[c]].residue
                   << " and " << items[(cuts[c] + 1) % n].residue << " are separated by "
                   << gap[cuts[c]] << " < 2 tol";
                throw ambiguity_error(os.str());
            }
        }
    }

    LadderDecomposition dec;
    dec.lambda = lambda;
    dec.residual = 0.0;
    for (auto& cl : clusters) {
        // circular mean of the residues
        double cs = 0.0, sn = 0.0;
        for (const Item& it : cl) {
            cs += std::cos(2.0 * M_PI * it.residue / period);
            sn += std::sin(2.0 * M_PI * it.residue / period);
        }
        double mean = wrap_to(std::atan2(sn, cs) * period / (2.0 * M_PI), period);
        for (const Item& it : cl) dec.residual = std::max(dec.residual, circ_dist(it.residue, mean, period));

        // epsilon in the fundamental interval [E_ref, E_ref lambda^2)
        double log_eps = mean + period * std::floor((log_ref - mean) / period);
        if (log_eps < log_ref - 1e-12 * period) log_eps += period;

        Ladder ladder;
        ladder.epsilon = std::exp(log_eps);
        for (const Item& it : cl) {
            LadderRung rung;
            rung.n_lambda = int(std::lround((it.log_e - log_eps) / step));
            rung.energy = std::exp(it.log_e);
            rung.eigen_index = it.eigen_index;
            ladder.rungs.push_back(rung);
        }
        std::sort(ladder.rungs.begin(), ladder.rungs.end(),
                  [](const LadderRung& a, const LadderRung& b) { return a.n_lambda < b.n_lambda; });
        dec.ladders.push_back(std::move(ladder));
    }
    std::sort(dec.ladders.begin(), dec.ladders.end(),
              [](const Ladder& a, const Ladder& b) { return a.epsilon < b.epsilon; });
    return dec;
}

LadderDecomposition detect_ladders(const std::vector<double>& energies, double lambda, double tol) {
    std::vector<std::pair<double, std::size_t>> indexed(energies.size());
    for (std::size_t i = 0; i < energies.size(); ++i) indexed[i] = {energies[i], i};
    return detect_ladders_indexed(indexed, lambda, tol);
}

namespace {

// cubic Lagrange interpolation on the uniform grid
double interp_cubic(const std::vector<double>& f, const Grid& g, double x) {
    const double h = g.spacing();
    const double t = (x - g.x_min) / h;
    const std::size_t n = f.size();
    long i1 = long(std::floor(t));
    i1 = std::max<long>(1, std::min<long>(long(n) - 3, i1));
    const double s = t - double(i1);
    const double fm1 = f[std::size_t(i1 - 1)], f0 = f[std::size_t(i1)];
    const double f1 = f[std::size_t(i1 + 1)], f2 = f[std::size_t(i1 + 2)];
    return fm1 * (-s * (s - 1.0) * (s - 2.0) / 6.0) + f0 * ((s * s - 1.0) * (s - 2.0) / 2.0) +
           f1 * (-s * (s + 1.0) * (s - 2.0) / 2.0) + f2 * (s * (s * s - 1.0) / 6.0);
}

} // namespace

std::vector<double> verify_wavefunction_scaling(const std::vector<Eigenpair>& rungs,
                                                const std::vector<int>& n_lambda,
                                                const SelfSimilarPotential& p, const Grid& g) {
    if (rungs.size() != n_lambda.size())
        throw invalid_input_error("verify_wavefunction_scaling: rung labels mismatch");
    if (rungs.size() < 2)
        throw invalid_input_error("verify_wavefunction_scaling: need at least two rungs");
    for (std::size_t i = 1; i < n_lambda.size(); ++i)
        if (n_lambda[i] <= n_lambda[i - 1])
            throw invalid_input_error("verify_wavefunction_scaling: rungs must be sorted by n");

    const double h = g.spacing();
    std::vector<double> devs;
    for (std::size_t j = 0; j + 1 < rungs.size(); ++j) {
        const int dn = n_lambda[j + 1] - n_lambda[j];
        const double amp = std::pow(p.lambda, 0.5 * double(dn));
        // overlap region: x and its image lambda^dn x + shift both on the grid
        std::size_t count = 0;
        double s_pp = 0.0, s_pm = 0.0, s_mm = 0.0;
        for (std::size_t i = 0; i < g.n_points; ++i) {
            const double x = g.x(i);
            const double y = affine_orbit(x, dn, p.lambda, p.b);
            if (y < g.x_min || y > g.x_max) continue;
            ++count;
            const double a = rungs[j + 1].wavefunction[i];
            const double c = amp * interp_cubic(rungs[j].wavefunction, g, y);
            s_pp += (a - c) * (a - c);
            s_mm += (a + c) * (a + c);
            s_pm += a * c;
        }
        (void)s_pm;
        if (count < 10)
            throw insufficient_overlap_error(
                "verify_wavefunction_scaling: overlap region smaller than 10 grid cells");
        devs.push_back(std::sqrt(std::min(s_pp, s_mm) * h));
    }
    return devs;
}

std::vector<double> predict_ladder_origins(const BandStructure& bs) {
    std::vector<double> out(bs.n_bands(), 0.0);
    for (std::size_t k = 0; k < bs.n_bands(); ++k) {
        double s = 0.0;
        for (double e : bs.energies[k]) s += e;
        out[k] = s / double(bs.n_kappa());
    }
    return out;
}

double origin_log_distance(double a, double b, double lambda) {
    if (!(a > 0.0) || !(b > 0.0))
        throw invalid_input_error("origin_log_distance: origins must be positive magnitudes");
    const double period = std::fabs(2.0 * std::log(lambda));
    const double d = std::fmod(std::fabs(std::log(a) - std::log(b)), period);
    return std::min(d, period - d);
}

} // namespace selfsim
