#ifndef SELFSIM_POTENTIAL_HPP
#define SELFSIM_POTENTIAL_HPP

#include <vector>

#include "selfsim/errors.hpp"

namespace selfsim {

enum class BlockKind { compact_bump, cosine, custom_table };
enum class DecayClass { compact, tempered, super_exponential };

// Unit-cell function U(x). The compact bump is the C^2 polynomial
// amplitude * (1 - t^2)^3 mapped onto [lo, hi]; wells use amplitude < 0.
struct BuildingBlock {
    BlockKind kind = BlockKind::compact_bump;

    double bump_lo = 1.0;
    double bump_hi = 2.0;
    double bump_amplitude = -1.0;

    double omega = 1.0; // cosine kind

    std::vector<double> table_x, table_v; // custom_table kind, sorted abscissae

    static BuildingBlock bump(double lo, double hi, double amplitude);
    static BuildingBlock cosine_block(double omega);
    static BuildingBlock from_table(std::vector<double> x, std::vector<double> v);

    void validate() const;
    bool has_compact_support() const { return kind != BlockKind::cosine; }
    double support_lo() const;
    double support_hi() const;
    DecayClass decay_class() const;
    double eval(double x) const;
};

// V_{lambda,b}(x) = sum_n lambda^{2n} U(x_n) over the retained index window.
// lambda == 1 selects the periodic path sum_n U(x + n b).
struct SelfSimilarPotential {
    BuildingBlock block;
    double lambda = 1.2;
    double b = 0.0;
    int n_min = -30;
    int n_max = 30;

    double fixed_point() const { return b / (1.0 - lambda); }
    bool periodic() const { return lambda == 1.0; }
    void validate() const;
    // Width of the narrowest retained copy of a compact block.
    double finest_scale() const;
};

// x_n = lambda^n x + (1 - lambda^n)/(1 - lambda) * b; the lambda == 1 path
// degenerates to the plain lattice translation x + n b.
double affine_orbit(double x, int n, double lambda, double b);

double eval_potential(const SelfSimilarPotential& p, double x);

// Same, but also reports how many series terms were actually evaluated.
double eval_potential_counted(const SelfSimilarPotential& p, double x, int* terms_touched);

// Upper bound on the term count for compact blocks whose support excludes
// the fixed point.
int max_overlapping_terms(const SelfSimilarPotential& p);

// max over xs of |lambda^2 V(lambda x + b) - V(x)| / (|V(x)| + floor).
// floor <= 0 selects an automatic near-zero guard from the sampled values.
double check_self_similarity(const SelfSimilarPotential& p, const std::vector<double>& xs,
                             double floor = -1.0);

} // namespace selfsim

#endif
