#ifndef SELFSIM_LINALG_HPP
#define SELFSIM_LINALG_HPP

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "selfsim/errors.hpp"

namespace selfsim {

using cplx = std::complex<double>;

// Dense row-major real matrix, sized once.
struct RealMat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;
    RealMat() = default;
    RealMat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    static RealMat identity(std::size_t n);
};

struct CplxMat {
    std::size_t rows = 0, cols = 0;
    std::vector<cplx> a;
    CplxMat() = default;
    CplxMat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, cplx(0.0)) {}
    cplx& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const cplx& at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    static CplxMat identity(std::size_t n);
};

RealMat matmul(const RealMat& x, const RealMat& y);
CplxMat matmul(const CplxMat& x, const CplxMat& y);
double frobenius_norm(const RealMat& m);
double frobenius_norm(const CplxMat& m);

// Symmetric tridiagonal operator; offdiag has exactly size()-1 entries.
struct SymTridiagonal {
    std::vector<double> diag;
    std::vector<double> offdiag;
    std::size_t size() const { return diag.size(); }
    void validate() const; // throws invalid_input_error on shape/NaN problems
};

// Hermitian dense matrix. Construction enforces a_ij = conj(a_ji) to 1e-12
// relative and stores the exactly symmetrized entries.
struct HermitianDense {
    std::size_t n = 0;
    std::vector<cplx> a; // row-major
    HermitianDense() = default;
    explicit HermitianDense(std::size_t dim) : n(dim), a(dim * dim, cplx(0.0)) {}
    cplx& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    const cplx& at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
    // Validates Hermiticity, symmetrizes, throws invalid_input_error otherwise.
    static HermitianDense from_entries(std::size_t dim, std::vector<cplx> entries);
};

// Eigenvalues ascending; vectors (when present) are the columns of `vectors`.
struct EigenDecomposition {
    std::vector<double> values;
    RealMat vectors; // empty when not requested
    bool has_vectors = false;
};

struct EigenDecompositionC {
    std::vector<double> values;
    CplxMat vectors;
};

// All eigenpairs of a symmetric tridiagonal matrix via implicit-shift QL.
// Deterministic: ascending values, each vector's largest component positive.
EigenDecomposition eig_sym_tridiagonal(const SymTridiagonal& m, bool want_vectors);

// Eigenvalues only (same QL core, no rotation accumulation). Internal fast path.
std::vector<double> eig_sym_tridiagonal_values(const SymTridiagonal& m);

// One eigenvector by inverse iteration at an already-converged eigenvalue.
// `neighbors` are previously computed vectors with nearby eigenvalues to
// orthogonalize against.
std::vector<double> tridiagonal_eigenvector(const SymTridiagonal& m, double value,
                                            const std::vector<const double*>& neighbors,
                                            std::size_t n);

// Dense real symmetric eigenproblem: Householder tridiagonalization + QL.
EigenDecomposition eig_symmetric_dense(RealMat m, bool want_vectors);

// Complex Hermitian eigenproblem via the 2n x 2n real symmetric embedding
// [[A,-B],[B,A]]; doubled eigenvalues deduplicated by pairing and degenerate
// vectors orthonormalized by Gram-Schmidt in index order.
EigenDecompositionC eig_hermitian(const HermitianDense& m);

// exp(m) of a Hermitian matrix through its eigendecomposition.
CplxMat expm_hermitian(const HermitianDense& m);

// exp(m) of a general real matrix by scaling-and-squaring. Used for the
// shift-operator identities where the exponent is not Hermitian.
RealMat expm_real(const RealMat& m);

// Bessel functions of the first kind, integer order, by Miller's backward
// recurrence normalized with sum_s J_s(x)^2 = 1. |order| <= 500, |x| <= 1e4.
double bessel_j(int order, double x);

// Modified Bessel of the first kind; same recurrence scheme normalized with
// the generating function at t = 1. Overflows past x ~ 700 are rejected.
double bessel_i(int order, double x);

// Whole family J_0..J_n_max (resp. I_0..I_n_max) at fixed x >= 0.
std::vector<double> bessel_j_family(double x, int n_max);
std::vector<double> bessel_i_family(double x, int n_max);

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
};

// Adaptive composite Gauss-Legendre with absolute error target `tol`.
// Throws accuracy_error (carrying the best estimate) when the subdivision
// budget is exhausted before reaching tol.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double tol, std::size_t max_panels = 200000);

// Nodes/weights of the n-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre_nodes(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace selfsim

#endif
