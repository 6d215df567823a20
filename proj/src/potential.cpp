#include "selfsim/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace selfsim {

namespace {

constexpr double kFixedPointClamp = 1e-9;

} // namespace

BuildingBlock BuildingBlock::bump(double lo, double hi, double amplitude) {
    BuildingBlock u;
    u.kind = BlockKind::compact_bump;
    u.bump_lo = lo;
    u.bump_hi = hi;
    u.bump_amplitude = amplitude;
    u.validate();
    return u;
}

BuildingBlock BuildingBlock::cosine_block(double omega) {
    BuildingBlock u;
    u.kind = BlockKind::cosine;
    u.omega = omega;
    u.validate();
    return u;
}

BuildingBlock BuildingBlock::from_table(std::vector<double> x, std::vector<double> v) {
    BuildingBlock u;
    u.kind = BlockKind::custom_table;
    u.table_x = std::move(x);
    u.table_v = std::move(v);
    u.validate();
    return u;
}

void BuildingBlock::validate() const {
    switch (kind) {
    case BlockKind::compact_bump:
        if (!(0.0 < bump_lo && bump_lo < bump_hi))
            throw invalid_input_error("BuildingBlock: bump support needs 0 < lo < hi");
        if (!std::isfinite(bump_amplitude))
            throw invalid_input_error("BuildingBlock: non-finite bump amplitude");
        break;
    case BlockKind::cosine:
        if (!std::isfinite(omega)) throw invalid_input_error("BuildingBlock: non-finite omega");
        break;
    case BlockKind::custom_table:
        if (table_x.size() != table_v.size() || table_x.size() < 2)
            throw invalid_input_error("BuildingBlock: table needs >= 2 matched samples");
        for (std::size_t i = 0; i < table_x.size(); ++i) {
            if (!std::isfinite(table_x[i]) || !std::isfinite(table_v[i]))
                throw invalid_input_error("BuildingBlock: non-finite table entry");
            if (i > 0 && table_x[i] <= table_x[i - 1])
                throw invalid_input_error("BuildingBlock: table abscissae must be strictly increasing");
        }
        break;
    }
}

double BuildingBlock::support_lo() const {
    switch (kind) {
    case BlockKind::compact_bump: return bump_lo;
    case BlockKind::custom_table: return table_x.front();
    case BlockKind::cosine: return -std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

double BuildingBlock::support_hi() const {
    switch (kind) {
    case BlockKind::compact_bump: return bump_hi;
    case BlockKind::custom_table: return table_x.back();
    case BlockKind::cosine: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

DecayClass BuildingBlock::decay_class() const {
    return has_compact_support() ? DecayClass::compact : DecayClass::tempered;
}

double BuildingBlock::eval(double x) const {
    switch (kind) {
    case BlockKind::compact_bump: {
        if (x <= bump_lo || x >= bump_hi) return 0.0;
        const double t = (2.0 * x - (bump_lo + bump_hi)) / (bump_hi - bump_lo);
        const double u = 1.0 - t * t;
        return bump_amplitude * u * u * u;
    }
    case BlockKind::cosine:
        return std::cos(omega * x);
    case BlockKind::custom_table: {
        if (x <= table_x.front() || x >= table_x.back()) return 0.0;
        auto it = std::upper_bound(table_x.begin(), table_x.end(), x);
        const std::size_t j = std::size_t(it - table_x.begin());
        const double x0 = table_x[j - 1], x1 = table_x[j];
        const double v0 = table_v[j - 1], v1 = table_v[j];
        return v0 + (v1 - v0) * (x - x0) / (x1 - x0);
    }
    }
    return 0.0;
}

void SelfSimilarPotential::validate() const {
    block.validate();
    if (!(lambda > 0.0)) throw invalid_input_error("SelfSimilarPotential: lambda must be > 0");
    if (n_min > n_max) throw invalid_input_error("SelfSimilarPotential: n_min > n_max");
    if (periodic() && b == 0.0)
        throw config_error("SelfSimilarPotential: the periodic path needs b != 0");
    if (block.kind == BlockKind::cosine && !periodic()) {
        // the retained sum must stay representable
        const double top = 2.0 * std::fabs(std::log(lambda)) *
                           std::max(std::fabs(double(n_min)), std::fabs(double(n_max)));
        if (top > 700.0)
            throw config_error(
                "SelfSimilarPotential: cosine retained sum overflows; give a tighter n_range");
    }
}

double SelfSimilarPotential::finest_scale() const {
    if (!block.has_compact_support()) return 0.0;
    const double width = block.support_hi() - block.support_lo();
    if (periodic()) return width;
    // copy n has width (hi - lo) * lambda^{-n}
    return width * std::min(std::pow(lambda, -double(n_min)), std::pow(lambda, -double(n_max)));
}

double affine_orbit(double x, int n, double lambda, double b) {
    if (lambda == 1.0) return x + double(n) * b;
    const double ln = std::pow(lambda, double(n));
    return ln * x + (1.0 - ln) / (1.0 - lambda) * b;
}

namespace {

// Candidate index window [n0, n1] of series terms whose copy of a compact
// support can contain x; exact membership is still tested per term.
bool compact_candidate_window(const SelfSimilarPotential& p, double r, int& n0, int& n1) {
    const double xs = p.fixed_point();
    const double A = p.block.support_lo() - xs;
    const double B = p.block.support_hi() - xs;
    const double a = std::log(p.lambda);
    double t_lo = -1.0, t_hi = -1.0; // bounds on lambda^n, -1 means unbounded
    if (r > 0.0) {
        if (B <= 0.0) return false;
        t_hi = B / r;
        if (A > 0.0) t_lo = A / r;
    } else {
        if (A >= 0.0) return false;
        t_hi = A / r;
        if (B < 0.0) t_lo = B / r;
    }
    double u_lo = -std::numeric_limits<double>::infinity();
    double u_hi = std::numeric_limits<double>::infinity();
    if (t_lo > 0.0) u_lo = std::log(t_lo);
    u_hi = std::log(t_hi);
    double nf_lo, nf_hi;
    if (a > 0.0) {
        nf_lo = u_lo / a;
        nf_hi = u_hi / a;
    } else {
        nf_lo = u_hi / a;
        nf_hi = u_lo / a;
    }
    n0 = p.n_min;
    n1 = p.n_max;
    if (std::isfinite(nf_lo)) n0 = std::max(n0, int(std::floor(nf_lo)) - 1);
    if (std::isfinite(nf_hi)) n1 = std::min(n1, int(std::ceil(nf_hi)) + 1);
    return n0 <= n1;
}

} // namespace

int max_overlapping_terms(const SelfSimilarPotential& p) {
    if (!p.block.has_compact_support() || p.periodic()) return p.n_max - p.n_min + 1;
    const double ratio = p.block.support_hi() / p.block.support_lo();
    return int(std::ceil(std::log(ratio) / std::fabs(std::log(p.lambda)))) + 1;
}

double eval_potential_counted(const SelfSimilarPotential& p, double x, int* terms_touched) {
    p.validate();
    int count = 0;
    double sum = 0.0;

    if (p.periodic()) {
        if (p.block.has_compact_support()) {
            const double lo = p.block.support_lo(), hi = p.block.support_hi();
            // x + n b in [lo, hi]
            const double s = (p.b > 0.0) ? 1.0 : -1.0;
            int na = int(std::floor((lo - x) / p.b)) - 1;
            int nb = int(std::ceil((hi - x) / p.b)) + 1;
            if (s < 0.0) std::swap(na, nb);
            na = std::max(na, p.n_min);
            nb = std::min(nb, p.n_max);
            for (int n = na; n <= nb; ++n) {
                const double xn = x + double(n) * p.b;
                if (xn > lo && xn < hi) {
                    sum += p.block.eval(xn);
                    ++count;
                }
            }
        } else {
            throw config_error("eval_potential: periodic path needs a compactly supported block");
        }
        if (terms_touched) *terms_touched = count;
        return sum;
    }

    const double xs = p.fixed_point();
    double r = x - xs;
    if (std::fabs(r) < kFixedPointClamp * std::max(1.0, std::fabs(xs)) &&
        !p.block.has_compact_support()) {
        r = std::copysign(kFixedPointClamp * std::max(1.0, std::fabs(xs)), r == 0.0 ? 1.0 : r);
    }

    if (p.block.has_compact_support()) {
        const double lo = p.block.support_lo(), hi = p.block.support_hi();
        if (r == 0.0) {
            // every retained copy sees the fixed point itself
            if (xs > lo && xs < hi) {
                const double u = p.block.eval(xs);
                for (int n = p.n_min; n <= p.n_max; ++n) {
                    sum += std::pow(p.lambda, 2.0 * n) * u;
                    ++count;
                }
            }
        } else {
            int n0, n1;
            if (compact_candidate_window(p, r, n0, n1)) {
                for (int n = n0; n <= n1; ++n) {
                    const double xn = xs + std::pow(p.lambda, double(n)) * r;
                    if (xn > lo && xn < hi) {
                        sum += std::pow(p.lambda, 2.0 * n) * p.block.eval(xn);
                        ++count;
                    }
                }
            }
        }
    } else {
        for (int n = p.n_min; n <= p.n_max; ++n) {
            const double xn = xs + std::pow(p.lambda, double(n)) * r;
            sum += std::pow(p.lambda, 2.0 * n) * p.block.eval(xn);
            ++count;
        }
    }
    if (terms_touched) *terms_touched = count;
    return sum;
}

double eval_potential(const SelfSimilarPotential& p, double x) {
    return eval_potential_counted(p, x, nullptr);
}

double check_self_similarity(const SelfSimilarPotential& p, const std::vector<double>& xs,
                             double floor) {
    if (xs.empty()) throw invalid_input_error("check_self_similarity: empty sample set");
    std::vector<double> vx(xs.size());
    double vmax = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        vx[i] = eval_potential(p, xs[i]);
        vmax = std::max(vmax, std::fabs(vx[i]));
    }
    if (floor <= 0.0) floor = 1e-12 * (vmax + 1.0);
    const double l2 = p.lambda * p.lambda;
    double dev = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double mapped = eval_potential(p, p.lambda * xs[i] + p.b);
        dev = std::max(dev, std::fabs(l2 * mapped - vx[i]) / (std::fabs(vx[i]) + floor));
    }
    return dev;
}

} // namespace selfsim
