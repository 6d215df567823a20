#include "selfsim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>

namespace selfsim {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string shape_msg(const char* what, std::size_t n) {
    std::ostringstream os;
    os << what << " (n = " << n << ")";
    return os.str();
}

} // namespace

RealMat RealMat::identity(std::size_t n) {
    RealMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

CplxMat CplxMat::identity(std::size_t n) {
    CplxMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

RealMat matmul(const RealMat& x, const RealMat& y) {
    RealMat r(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t k = 0; k < x.cols; ++k) {
            const double xv = x.at(i, k);
            if (xv == 0.0) continue;
            for (std::size_t j = 0; j < y.cols; ++j) r.at(i, j) += xv * y.at(k, j);
        }
    return r;
}

CplxMat matmul(const CplxMat& x, const CplxMat& y) {
    CplxMat r(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t k = 0; k < x.cols; ++k) {
            const cplx xv = x.at(i, k);
            if (xv == cplx(0.0)) continue;
            for (std::size_t j = 0; j < y.cols; ++j) r.at(i, j) += xv * y.at(k, j);
        }
    return r;
}

double frobenius_norm(const RealMat& m) {
    double s = 0.0;
    for (double v : m.a) s += v * v;
    return std::sqrt(s);
}

double frobenius_norm(const CplxMat& m) {
    double s = 0.0;
    for (const cplx& v : m.a) s += std::norm(v);
    return std::sqrt(s);
}

void SymTridiagonal::validate() const {
    if (diag.empty()) throw invalid_input_error("SymTridiagonal: empty diagonal");
    if (offdiag.size() + 1 != diag.size())
        throw invalid_input_error(shape_msg("SymTridiagonal: offdiag must have n-1 entries", diag.size()));
    for (double v : diag)
        if (!std::isfinite(v)) throw invalid_input_error("SymTridiagonal: non-finite diagonal entry");
    for (double v : offdiag)
        if (!std::isfinite(v)) throw invalid_input_error("SymTridiagonal: non-finite offdiagonal entry");
}

HermitianDense HermitianDense::from_entries(std::size_t dim, std::vector<cplx> entries) {
    if (entries.size() != dim * dim)
        throw invalid_input_error(shape_msg("HermitianDense: entry count mismatch", dim));
    double scale = 0.0;
    for (const cplx& v : entries) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw invalid_input_error("HermitianDense: non-finite entry");
        scale = std::max(scale, std::abs(v));
    }
    HermitianDense m(dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const cplx u = entries[i * dim + j];
            const cplx l = entries[j * dim + i];
            if (std::abs(u - std::conj(l)) > 1e-12 * std::max(1.0, scale))
                throw invalid_input_error("HermitianDense: input is not Hermitian");
            const cplx h = 0.5 * (u + std::conj(l));
            m.at(i, j) = h;
            m.at(j, i) = std::conj(h);
        }
    for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = cplx(m.at(i, i).real(), 0.0);
    return m;
}

namespace {

// Implicit-shift QL on a symmetric tridiagonal matrix.
// d: diagonal, e: e[i] couples (i, i+1), e[n-1] is scratch.
// z: optional row-major matrix whose columns accumulate the rotations.
void ql_implicit(std::vector<double>& d, std::vector<double>& e, RealMat* z) {
    const std::size_t n = d.size();
    if (n == 0) return;
    e[n - 1] = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        bool again;
        do {
            again = false;
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= kEps * dd) break;
            }
            if (m != l) {
                if (iter++ == 60)
                    throw accuracy_error("eig_sym_tridiagonal: QL failed to converge", d[l],
                                         std::fabs(e[l]));
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t i = m; i-- > l;) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if (z) {
                        for (std::size_t k = 0; k < z->rows; ++k) {
                            f = z->at(k, i + 1);
                            z->at(k, i + 1) = s * z->at(k, i) + c * f;
                            z->at(k, i) = c * z->at(k, i) - s * f;
                        }
                    }
                }
                if (underflow) {
                    again = true;
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
                again = true;
            }
        } while (again && m != l);
    }
}

// Ascending sort of (values, columns of z), then a deterministic sign:
// the largest-magnitude component of every vector is made positive.
void sort_pairs(std::vector<double>& d, RealMat* z) {
    const std::size_t n = d.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    std::vector<double> ds(n);
    for (std::size_t j = 0; j < n; ++j) ds[j] = d[idx[j]];
    d = std::move(ds);
    if (!z) return;
    RealMat zs(z->rows, z->cols);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < z->rows; ++k) zs.at(k, j) = z->at(k, idx[j]);
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t kmax = 0;
        double amax = -1.0;
        for (std::size_t k = 0; k < zs.rows; ++k) {
            const double av = std::fabs(zs.at(k, j));
            if (av > amax) {
                amax = av;
                kmax = k;
            }
        }
        if (zs.at(kmax, j) < 0.0)
            for (std::size_t k = 0; k < zs.rows; ++k) zs.at(k, j) = -zs.at(k, j);
    }
    *z = std::move(zs);
}

// Householder reduction of a symmetric matrix to tridiagonal form, with the
// accumulated orthogonal transform replacing the input matrix.
void householder_tridiag(RealMat& a, std::vector<double>& d, std::vector<double>& e_c) {
    const std::size_t n = a.rows;
    d.assign(n, 0.0);
    std::vector<double> e(n, 0.0);
    for (std::size_t i = n - 1; i >= 1; --i) {
        const std::size_t l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0) {
            for (std::size_t k = 0; k <= l; ++k) scale += std::fabs(a.at(i, k));
            if (scale == 0.0) {
                e[i] = a.at(i, l);
            } else {
                for (std::size_t k = 0; k <= l; ++k) {
                    a.at(i, k) /= scale;
                    h += a.at(i, k) * a.at(i, k);
                }
                double f = a.at(i, l);
                double g = (f >= 0.0 ? -std::sqrt(h) : std::sqrt(h));
                e[i] = scale * g;
                h -= f * g;
                a.at(i, l) = f - g;
                f = 0.0;
                for (std::size_t j = 0; j <= l; ++j) {
                    a.at(j, i) = a.at(i, j) / h;
                    g = 0.0;
                    for (std::size_t k = 0; k <= j; ++k) g += a.at(j, k) * a.at(i, k);
                    for (std::size_t k = j + 1; k <= l; ++k) g += a.at(k, j) * a.at(i, k);
                    e[j] = g / h;
                    f += e[j] * a.at(i, j);
                }
                const double hh = f / (h + h);
                for (std::size_t j = 0; j <= l; ++j) {
                    f = a.at(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (std::size_t k = 0; k <= j; ++k) a.at(j, k) -= (f * e[k] + g * a.at(i, k));
                }
            }
        } else {
            e[i] = a.at(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] != 0.0) {
            for (std::size_t j = 0; j < i; ++j) {
                double g = 0.0;
                for (std::size_t k = 0; k < i; ++k) g += a.at(i, k) * a.at(k, j);
                for (std::size_t k = 0; k < i; ++k) a.at(k, j) -= g * a.at(k, i);
            }
        }
        d[i] = a.at(i, i);
        a.at(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) a.at(j, i) = a.at(i, j) = 0.0;
    }
    e_c.assign(n > 1 ? n - 1 : 0, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) e_c[i] = e[i + 1];
}

} // namespace

EigenDecomposition eig_sym_tridiagonal(const SymTridiagonal& m, bool want_vectors) {
    m.validate();
    const std::size_t n = m.size();
    EigenDecomposition dec;
    dec.values = m.diag;
    std::vector<double> e(n, 0.0);
    std::copy(m.offdiag.begin(), m.offdiag.end(), e.begin());
    if (want_vectors) {
        dec.vectors = RealMat::identity(n);
        ql_implicit(dec.values, e, &dec.vectors);
        sort_pairs(dec.values, &dec.vectors);
        dec.has_vectors = true;
    } else {
        ql_implicit(dec.values, e, nullptr);
        sort_pairs(dec.values, nullptr);
    }
    return dec;
}

std::vector<double> eig_sym_tridiagonal_values(const SymTridiagonal& m) {
    return eig_sym_tridiagonal(m, false).values;
}

std::vector<double> tridiagonal_eigenvector(const SymTridiagonal& m, double value,
                                            const std::vector<const double*>& neighbors,
                                            std::size_t n) {
    m.validate();
    if (n != m.size()) throw invalid_input_error("tridiagonal_eigenvector: size mismatch");
    double anorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = std::fabs(m.diag[i]);
        if (i > 0) row += std::fabs(m.offdiag[i - 1]);
        if (i + 1 < n) row += std::fabs(m.offdiag[i]);
        anorm = std::max(anorm, row);
    }
    if (anorm == 0.0) anorm = 1.0;

    std::vector<double> u0(n), u1(n, 0.0), u2(n, 0.0), lmul(n, 0.0), w(n), r(n);
    std::vector<char> piv(n, 0);

    auto factor = [&](double mu) {
        for (std::size_t i = 0; i < n; ++i) {
            u0[i] = m.diag[i] - mu;
            u1[i] = (i + 1 < n) ? m.offdiag[i] : 0.0;
            u2[i] = 0.0;
            piv[i] = 0;
            lmul[i] = 0.0;
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double below = m.offdiag[i];
            if (std::fabs(u0[i]) >= std::fabs(below)) {
                double p = u0[i];
                if (p == 0.0) p = u0[i] = kEps * anorm;
                const double l = below / p;
                lmul[i] = l;
                u0[i + 1] = (m.diag[i + 1] - mu) - l * u1[i];
                u1[i + 1] = ((i + 2 < n) ? m.offdiag[i + 1] : 0.0) - l * u2[i];
                u2[i + 1] = 0.0;
            } else {
                piv[i] = 1;
                const double o0 = u0[i], o1 = u1[i], o2 = u2[i];
                u0[i] = below;
                u1[i] = m.diag[i + 1] - mu;
                u2[i] = (i + 2 < n) ? m.offdiag[i + 1] : 0.0;
                const double l = o0 / u0[i];
                lmul[i] = l;
                u0[i + 1] = o1 - l * u1[i];
                u1[i + 1] = o2 - l * u2[i];
                u2[i + 1] = 0.0;
            }
        }
        if (u0[n - 1] == 0.0) u0[n - 1] = kEps * anorm;
    };

    auto solve = [&](std::vector<double>& rhs) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (piv[i]) std::swap(rhs[i], rhs[i + 1]);
            rhs[i + 1] -= lmul[i] * rhs[i];
        }
        for (std::size_t i1 = n; i1-- > 0;) {
            double v = rhs[i1];
            if (i1 + 1 < n) v -= u1[i1] * rhs[i1 + 1];
            if (i1 + 2 < n) v -= u2[i1] * rhs[i1 + 2];
            rhs[i1] = v / u0[i1];
        }
    };

    auto residual = [&](const std::vector<double>& v) {
        double rmax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double t = (m.diag[i] - value) * v[i];
            if (i > 0) t += m.offdiag[i - 1] * v[i - 1];
            if (i + 1 < n) t += m.offdiag[i] * v[i + 1];
            rmax += t * t;
        }
        return std::sqrt(rmax);
    };

    // deterministic pseudo-random start
    std::uint64_t st = 0x9e3779b97f4a7c15ull;
    for (std::size_t i = 0; i < n; ++i) {
        st = st * 6364136223846793005ull + 1442695040888963407ull;
        w[i] = 2.0 * (double(st >> 11) / 9007199254740992.0) - 1.0;
    }

    const double rtol = 1e-10 * anorm;
    for (int attempt = 0; attempt < 4; ++attempt) {
        factor(value * (1.0 + attempt * 64.0 * kEps) + (attempt ? attempt * kEps * anorm : 0.0));
        for (int it = 0; it < 6; ++it) {
            solve(w);
            for (const double* nb : neighbors) {
                double pr = 0.0;
                for (std::size_t i = 0; i < n; ++i) pr += w[i] * nb[i];
                for (std::size_t i = 0; i < n; ++i) w[i] -= pr * nb[i];
            }
            double nrm = 0.0;
            for (double v : w) nrm += v * v;
            nrm = std::sqrt(nrm);
            if (nrm == 0.0 || !std::isfinite(nrm)) break;
            for (double& v : w) v /= nrm;
            if (it >= 1 && residual(w) <= rtol) {
                std::size_t kmax = 0;
                double amax = -1.0;
                for (std::size_t i = 0; i < n; ++i)
                    if (std::fabs(w[i]) > amax) {
                        amax = std::fabs(w[i]);
                        kmax = i;
                    }
                if (w[kmax] < 0.0)
                    for (double& v : w) v = -v;
                return w;
            }
        }
    }
    throw accuracy_error("tridiagonal_eigenvector: inverse iteration did not converge", value,
                         residual(w));
}

EigenDecomposition eig_symmetric_dense(RealMat m, bool want_vectors) {
    if (m.rows != m.cols || m.rows == 0)
        throw invalid_input_error("eig_symmetric_dense: matrix must be square and non-empty");
    for (double v : m.a)
        if (!std::isfinite(v)) throw invalid_input_error("eig_symmetric_dense: non-finite entry");
    const std::size_t n = m.rows;
    EigenDecomposition dec;
    if (n == 1) {
        dec.values = {m.at(0, 0)};
        if (want_vectors) {
            dec.vectors = RealMat::identity(1);
            dec.has_vectors = true;
        }
        return dec;
    }
    std::vector<double> d, e;
    householder_tridiag(m, d, e);
    std::vector<double> efull(n, 0.0);
    std::copy(e.begin(), e.end(), efull.begin());
    if (want_vectors) {
        ql_implicit(d, efull, &m);
        sort_pairs(d, &m);
        dec.vectors = std::move(m);
        dec.has_vectors = true;
    } else {
        ql_implicit(d, efull, nullptr);
        sort_pairs(d, nullptr);
    }
    dec.values = std::move(d);
    return dec;
}

EigenDecompositionC eig_hermitian(const HermitianDense& m) {
    const std::size_t n = m.n;
    if (n == 0) throw invalid_input_error("eig_hermitian: empty matrix");
    if (n > 4096) throw invalid_input_error("eig_hermitian: dense method limited to n <= 4096");
    // real symmetric embedding [[A, -B], [B, A]]
    RealMat s(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const cplx v = m.at(i, j);
            s.at(i, j) = v.real();
            s.at(n + i, n + j) = v.real();
            s.at(i, n + j) = -v.imag();
            s.at(n + i, j) = v.imag();
        }
    EigenDecomposition emb = eig_symmetric_dense(std::move(s), true);

    double scale = 0.0;
    for (double v : emb.values) scale = std::max(scale, std::fabs(v));
    if (scale == 0.0) scale = 1.0;
    const double pair_tol = 1e-8 * scale;

    EigenDecompositionC dec;
    dec.values.reserve(n);
    dec.vectors = CplxMat(n, n);

    std::size_t out = 0;
    std::size_t g0 = 0;
    while (g0 < 2 * n) {
        std::size_t g1 = g0 + 1;
        while (g1 < 2 * n && emb.values[g1] - emb.values[g1 - 1] <= pair_tol) ++g1;
        const std::size_t len = g1 - g0;
        if (len % 2 != 0)
            throw accuracy_error("eig_hermitian: embedding pairing failed", emb.values[g0],
                                 pair_tol);
        const std::size_t want = len / 2;
        // complex candidates from the real eigenvectors of the group,
        // Gram-Schmidt in index order keeps exactly half of them
        std::vector<std::vector<cplx>> kept;
        kept.reserve(want);
        for (std::size_t j = g0; j < g1 && kept.size() < want; ++j) {
            std::vector<cplx> w(n);
            for (std::size_t i = 0; i < n; ++i)
                w[i] = cplx(emb.vectors.at(i, j), emb.vectors.at(n + i, j));
            for (const auto& k : kept) {
                cplx pr(0.0);
                for (std::size_t i = 0; i < n; ++i) pr += std::conj(k[i]) * w[i];
                for (std::size_t i = 0; i < n; ++i) w[i] -= pr * k[i];
            }
            double nrm = 0.0;
            for (const cplx& v : w) nrm += std::norm(v);
            nrm = std::sqrt(nrm);
            if (nrm > 0.25) {
                for (cplx& v : w) v /= nrm;
                kept.push_back(std::move(w));
            }
        }
        if (kept.size() != want)
            throw accuracy_error("eig_hermitian: degenerate-group deduplication failed",
                                 emb.values[g0], pair_tol);
        for (std::size_t j = 0; j < want; ++j) {
            double vsum = 0.0;
            for (std::size_t t = 0; t < 2; ++t) vsum += emb.values[g0 + 2 * j + t];
            dec.values.push_back(0.5 * vsum);
            // deterministic phase: make the largest-modulus component real positive
            std::size_t kmax = 0;
            double amax = -1.0;
            for (std::size_t i = 0; i < n; ++i)
                if (std::abs(kept[j][i]) > amax) {
                    amax = std::abs(kept[j][i]);
                    kmax = i;
                }
            const cplx ph = std::abs(kept[j][kmax]) > 0.0
                                ? std::conj(kept[j][kmax]) / std::abs(kept[j][kmax])
                                : cplx(1.0);
            for (std::size_t i = 0; i < n; ++i) dec.vectors.at(i, out) = kept[j][i] * ph;
            ++out;
        }
        g0 = g1;
    }
    return dec;
}

CplxMat expm_hermitian(const HermitianDense& m) {
    EigenDecompositionC dec = eig_hermitian(m);
    const std::size_t n = m.n;
    CplxMat r(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double ev = std::exp(dec.values[k]);
        for (std::size_t i = 0; i < n; ++i) {
            const cplx vik = dec.vectors.at(i, k);
            if (vik == cplx(0.0)) continue;
            const cplx w = ev * vik;
            for (std::size_t j = 0; j < n; ++j) r.at(i, j) += w * std::conj(dec.vectors.at(j, k));
        }
    }
    return r;
}

RealMat expm_real(const RealMat& m) {
    if (m.rows != m.cols) throw invalid_input_error("expm_real: matrix must be square");
    const std::size_t n = m.rows;
    double norm1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double cs = 0.0;
        for (std::size_t i = 0; i < n; ++i) cs += std::fabs(m.at(i, j));
        norm1 = std::max(norm1, cs);
    }
    int squarings = 0;
    if (norm1 > 0.25) squarings = int(std::ceil(std::log2(norm1 / 0.25)));
    const double factor = std::ldexp(1.0, -squarings);
    RealMat b(n, n);
    for (std::size_t i = 0; i < n * n; ++i) b.a[i] = m.a[i] * factor;

    RealMat result = RealMat::identity(n);
    RealMat term = RealMat::identity(n);
    for (int k = 1; k <= 96; ++k) {
        term = matmul(term, b);
        for (std::size_t i = 0; i < n * n; ++i) term.a[i] /= double(k);
        for (std::size_t i = 0; i < n * n; ++i) result.a[i] += term.a[i];
        if (frobenius_norm(term) <= 1e-18 * frobenius_norm(result)) break;
    }
    for (int s = 0; s < squarings; ++s) result = matmul(result, result);
    return result;
}

namespace {

void check_bessel_domain(int order, double x) {
    if (!std::isfinite(x)) throw domain_error("bessel: non-finite argument");
    if (std::abs(order) > 500) throw domain_error("bessel: |order| must be <= 500");
    if (std::fabs(x) > 1e4) throw domain_error("bessel: |x| must be <= 1e4");
}

} // namespace

std::vector<double> bessel_j_family(double x, int n_max) {
    check_bessel_domain(n_max, x);
    if (x < 0.0 || n_max < 0) throw domain_error("bessel_j_family: needs x >= 0, n_max >= 0");
    std::vector<double> out(std::size_t(n_max) + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const int n_start = std::max(n_max, int(std::ceil(x))) + 40;
    double jp1 = 0.0;
    double j = 1e-30;
    double sum = 0.0; // j0^2 + 2 sum_{k>=1} jk^2, accumulated on the fly
    for (int k = n_start; k >= 1; --k) {
        const double jm1 = (2.0 * k / x) * j - jp1;
        jp1 = j;
        j = jm1;
        if (k - 1 <= n_max) out[std::size_t(k - 1)] = j;
        if (k > 1)
            sum += 2.0 * j * j;
        else
            sum += j * j;
        if (std::fabs(j) > 1e250) {
            const double rescale = 1e-250;
            j *= rescale;
            jp1 *= rescale;
            sum *= rescale * rescale;
            for (double& v : out) v *= rescale;
        }
    }
    const double scale = 1.0 / std::sqrt(sum);
    for (double& v : out) v *= scale;
    return out;
}

std::vector<double> bessel_i_family(double x, int n_max) {
    check_bessel_domain(n_max, x);
    if (x < 0.0 || n_max < 0) throw domain_error("bessel_i_family: needs x >= 0, n_max >= 0");
    if (x > 700.0) throw domain_error("bessel_i_family: e^x overflows double past x ~ 700");
    std::vector<double> out(std::size_t(n_max) + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const int n_start = std::max(n_max, int(std::ceil(x))) + 40;
    double ip1 = 0.0;
    double i = 1e-30;
    double sum = 0.0; // i0 + 2 sum_{k>=1} ik = e^x fixes the scale
    for (int k = n_start; k >= 1; --k) {
        const double im1 = ip1 + (2.0 * k / x) * i;
        ip1 = i;
        i = im1;
        if (k - 1 <= n_max) out[std::size_t(k - 1)] = i;
        if (k > 1)
            sum += 2.0 * i;
        else
            sum += i;
        if (std::fabs(i) > 1e250) {
            const double rescale = 1e-250;
            i *= rescale;
            ip1 *= rescale;
            sum *= rescale;
            for (double& v : out) v *= rescale;
        }
    }
    const double scale = std::exp(x) / sum;
    for (double& v : out) v *= scale;
    return out;
}

double bessel_j(int order, double x) {
    check_bessel_domain(order, x);
    int n = std::abs(order);
    double sign = 1.0;
    if (order < 0 && n % 2 == 1) sign = -sign; // J_{-n} = (-1)^n J_n
    double ax = x;
    if (x < 0.0) {
        ax = -x;
        if (n % 2 == 1) sign = -sign; // J_n(-x) = (-1)^n J_n(x)
    }
    return sign * bessel_j_family(ax, n)[std::size_t(n)];
}

double bessel_i(int order, double x) {
    check_bessel_domain(order, x);
    int n = std::abs(order); // I_{-n} = I_n
    double sign = 1.0;
    double ax = x;
    if (x < 0.0) {
        ax = -x;
        if (n % 2 == 1) sign = -sign; // I_n(-x) = (-1)^n I_n(x)
    }
    return sign * bessel_i_family(ax, n)[std::size_t(n)];
}

void gauss_legendre_nodes(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (double(i) + 0.75) / (double(n) + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * double(j) + 1.0) * z * p2 - double(j) * p3) / (double(j) + 1.0);
            }
            pp = double(n) * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(z - z1) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double tol,
                           std::size_t max_panels) {
    if (!(a < b)) throw invalid_input_error("integrate: requires a < b");
    if (!(tol > 0.0)) throw invalid_input_error("integrate: tol must be positive");
    static thread_local std::vector<double> nodes, weights;
    if (nodes.empty()) gauss_legendre_nodes(15, nodes, weights);

    QuadratureResult res;
    auto gl = [&](double lo, double hi) {
        const double c = 0.5 * (lo + hi);
        const double hw = 0.5 * (hi - lo);
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double fx = f(c + hw * nodes[i]);
            if (!std::isfinite(fx))
                throw invalid_input_error("integrate: integrand is not finite inside the interval");
            s += weights[i] * fx;
        }
        res.evaluations += nodes.size();
        return s * hw;
    };

    struct Panel {
        double a, b, value, tol;
    };
    std::vector<Panel> stack;
    stack.push_back({a, b, gl(a, b), tol});
    std::size_t panels = 1;
    double acc = 0.0, err = 0.0;
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (p.a + p.b);
        const double left = gl(p.a, mid);
        const double right = gl(mid, p.b);
        const double diff = std::fabs(left + right - p.value);
        const double width = p.b - p.a;
        const bool tiny_panel = width <= 8.0 * kEps * std::max({std::fabs(p.a), std::fabs(p.b), 1.0});
        if (diff <= p.tol || tiny_panel) {
            acc += left + right;
            err += diff;
        } else {
            panels += 2;
            if (panels > max_panels) {
                double best = acc + left + right;
                for (const Panel& q : stack) best += q.value;
                throw accuracy_error("integrate: subdivision budget exhausted", best, err + diff);
            }
            stack.push_back({p.a, mid, left, 0.5 * p.tol});
            stack.push_back({mid, p.b, right, 0.5 * p.tol});
        }
    }
    res.value = acc;
    res.error_estimate = err;
    return res;
}

} // namespace selfsim
