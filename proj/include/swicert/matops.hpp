#pragma once

// Dense kernels for small real matrices: matrix exponential, eigenvalues,
// Lyapunov equation, Cholesky factorization and spectral norm.
//
// All routines are pure functions over their inputs and may be called
// concurrently.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "swicert/error.hpp"
#include "swicert/matrix.hpp"

namespace swicert {

namespace detail {

inline void require_square(const RealMatrix& a, const char* what) {
    if (!a.is_square() || a.rows() == 0)
        fail(ErrorKind::Dimension, std::string(what) + ": matrix must be square, got " +
                                       std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

inline void require_finite(const RealMatrix& a, const char* what) {
    if (!a.all_finite()) fail(ErrorKind::Domain, std::string(what) + ": non-finite entries");
}

inline std::string describe(const RealMatrix& a) {
    std::string s = "[";
    for (std::size_t i = 0; i < a.rows(); ++i) {
        s += i ? "; " : "";
        for (std::size_t j = 0; j < a.cols(); ++j) {
            s += j ? ", " : "";
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g", a(i, j));
            s += buf;
        }
    }
    return s + "]";
}

/// LU factorization with partial pivoting; `singular` is set when a pivot
/// falls to `tol` or below.
struct LuResult {
    RealMatrix lu;
    std::vector<std::size_t> perm;
    int sign = 1;
    bool singular = false;
};

inline LuResult lu_factor(RealMatrix a, double tol) {
    const std::size_t n = a.rows();
    LuResult r{std::move(a), std::vector<std::size_t>(n), 1, false};
    std::iota(r.perm.begin(), r.perm.end(), std::size_t{0});
    auto& m = r.lu;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(m(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > best) {
                best = std::abs(m(i, k));
                p = i;
            }
        if (best <= tol) {
            r.singular = true;
            return r;
        }
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
            std::swap(r.perm[k], r.perm[p]);
            r.sign = -r.sign;
        }
        const double inv = 1.0 / m(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = (m(i, k) *= inv);
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
        }
    }
    return r;
}

inline Vector lu_solve(const LuResult& f, std::span<const double> b) {
    const std::size_t n = f.lu.rows();
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
        x[i] /= f.lu(i, i);
    }
    return x;
}

/// Reduces a square matrix to upper Hessenberg form by Householder reflections.
inline RealMatrix hessenberg(RealMatrix h) {
    const std::size_t n = h.rows();
    if (n < 3) return h;
    Vector v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double alpha = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) alpha += h(i, k) * h(i, k);
        alpha = std::sqrt(alpha);
        if (alpha == 0.0) continue;
        if (h(k + 1, k) > 0) alpha = -alpha;
        std::fill(v.begin(), v.end(), 0.0);
        for (std::size_t i = k + 1; i < n; ++i) v[i] = h(i, k);
        v[k + 1] -= alpha;
        double vn = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) vn += v[i] * v[i];
        if (vn == 0.0) continue;
        // H <- (I - 2vv'/v'v) H (I - 2vv'/v'v)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) s += v[i] * h(i, j);
            s *= 2.0 / vn;
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= s * v[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += h(i, j) * v[j];
            s *= 2.0 / vn;
            for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= s * v[j];
        }
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
    return h;
}

inline std::vector<std::complex<double>> eig_2x2(double a, double b, double c, double d) {
    const double half_tr = 0.5 * (a + d);
    const double det = a * d - b * c;
    const double p = 0.5 * (a - d);
    const double disc = p * p + b * c;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        const double big = half_tr + std::copysign(root, half_tr);
        const double small = big != 0.0 ? det / big : half_tr - std::copysign(root, half_tr);
        return {{std::min(big, small), 0.0}, {std::max(big, small), 0.0}};
    }
    const double im = std::sqrt(-disc);
    return {{half_tr, -im}, {half_tr, im}};
}

/// Francis double-shift QR on an upper Hessenberg matrix (1-based indexing
/// internally, following the classical EISPACK formulation).
inline std::vector<std::complex<double>> hqr(RealMatrix h) {
    const int n = static_cast<int>(h.rows());
    auto a = [&h](int i, int j) -> double& { return h(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1)); };
    std::vector<double> wr(static_cast<std::size_t>(n) + 1), wi(static_cast<std::size_t>(n) + 1);

    double anorm = 0.0;
    for (int i = 1; i <= n; ++i)
        for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::abs(a(i, j));

    int nn = n;
    double t = 0.0;
    double p = 0, q = 0, r = 0, s = 0, w = 0, x = 0, y = 0, z = 0;
    while (nn >= 1) {
        int its = 0;
        int l = 0;
        do {
            for (l = nn; l >= 2; --l) {
                s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(a(l, l - 1)) + s == s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            x = a(nn, nn);
            if (l == nn) {
                wr[static_cast<std::size_t>(nn)] = x + t;
                wi[static_cast<std::size_t>(nn)] = 0.0;
                --nn;
            } else {
                y = a(nn - 1, nn - 1);
                w = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = std::sqrt(std::abs(q));
                    x += t;
                    const auto un = static_cast<std::size_t>(nn);
                    if (q >= 0.0) {
                        z = p + std::copysign(z, p);
                        wr[un - 1] = wr[un] = x + z;
                        if (z != 0.0) wr[un] = x - w / z;
                        wi[un - 1] = wi[un] = 0.0;
                    } else {
                        wr[un - 1] = wr[un] = x + p;
                        wi[un - 1] = -z;
                        wi[un] = z;
                    }
                    nn -= 2;
                } else {
                    if (its == 60)
                        fail(ErrorKind::NumericalFailure, "QR iteration did not converge for " + describe(h));
                    if (its == 10 || its == 20 || its == 40) {
                        t += x;
                        for (int i = 1; i <= nn; ++i) a(i, i) -= x;
                        s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    int m = nn - 2;
                    for (; m >= l; --m) {
                        z = a(m, m);
                        r = x - z;
                        s = y - z;
                        p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - r - s;
                        r = a(m + 2, m + 1);
                        s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
                        const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
                        if (u + v == v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        a(i, i - 2) = 0.0;
                        if (i != m + 2) a(i, i - 3) = 0.0;
                    }
                    for (int k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = 0.0;
                            if (k != nn - 1) r = a(k + 2, k - 1);
                            if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        if ((s = std::copysign(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
                            if (k == m) {
                                if (l != m) a(k, k - 1) = -a(k, k - 1);
                            } else {
                                a(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for (int j = k; j <= nn; ++j) {
                                p = a(k, j) + q * a(k + 1, j);
                                if (k != nn - 1) {
                                    p += r * a(k + 2, j);
                                    a(k + 2, j) -= p * z;
                                }
                                a(k + 1, j) -= p * y;
                                a(k, j) -= p * x;
                            }
                            const int mmin = nn < k + 3 ? nn : k + 3;
                            for (int i = l; i <= mmin; ++i) {
                                p = x * a(i, k) + y * a(i, k + 1);
                                if (k != nn - 1) {
                                    p += z * a(i, k + 2);
                                    a(i, k + 2) -= p * r;
                                }
                                a(i, k + 1) -= p * q;
                                a(i, k) -= p;
                            }
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }

    std::vector<std::complex<double>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) out.emplace_back(wr[static_cast<std::size_t>(i)], wi[static_cast<std::size_t>(i)]);
    return out;
}

} // namespace detail

/// exp(A t) by scaling and squaring around a degree-16 Taylor core; the
/// scaled matrix has 1-norm at most 0.5.
inline RealMatrix expm(const RealMatrix& a, double t) {
    detail::require_square(a, "expm");
    detail::require_finite(a, "expm");
    if (!std::isfinite(t) || t < 0.0) fail(ErrorKind::Domain, "expm: time must be finite and >= 0");
    const std::size_t n = a.rows();
    if (t == 0.0) return RealMatrix::identity(n);

    RealMatrix b = a * t;
    const double nrm = norm1(b);
    int squarings = 0;
    if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    b *= std::ldexp(1.0, -squarings);

    constexpr int kDegree = 16;
    const RealMatrix id = RealMatrix::identity(n);
    RealMatrix e = id;
    for (int k = kDegree; k >= 1; --k) {
        e = b * e;
        e *= 1.0 / k;
        e += id;
    }
    for (int i = 0; i < squarings; ++i) e = e * e;
    return e;
}

/// Symmetric eigen-decomposition: ascending eigenvalues, eigenvectors as columns.
struct SymmetricEigen {
    Vector values;
    RealMatrix vectors;
};

inline SymmetricEigen eig_sym_full(const RealMatrix& s) {
    detail::require_square(s, "eig_sym");
    detail::require_finite(s, "eig_sym");
    if (relative_asymmetry(s) > 1e-12)
        fail(ErrorKind::Domain, "eig_sym: matrix is not symmetric " + detail::describe(s));
    const std::size_t n = s.rows();
    RealMatrix a = symmetrize(s);
    RealMatrix v = RealMatrix::identity(n);

    // Cyclic Jacobi rotations.
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off == 0.0) break;
        double diag = 0.0;
        for (std::size_t i = 0; i < n; ++i) diag += a(i, i) * a(i, i);
        if (off <= 1e-34 * diag) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double tan = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(tan * tan + 1.0);
                const double sn = tan * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    SymmetricEigen out{Vector(n), RealMatrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

inline Spectrum eig_sym(const RealMatrix& s) {
    const auto e = eig_sym_full(s);
    Spectrum sp;
    sp.is_real_symmetric_source = true;
    for (double v : e.values) sp.values.emplace_back(v, 0.0);
    return sp;
}

inline double lambda_max_sym(const RealMatrix& s) { return eig_sym_full(s).values.back(); }
inline double lambda_min_sym(const RealMatrix& s) { return eig_sym_full(s).values.front(); }

/// Eigenvalues of a general real matrix; conjugate pairs are adjacent with the
/// negative imaginary part first.
inline Spectrum eig_general(const RealMatrix& a) {
    detail::require_square(a, "eig_general");
    detail::require_finite(a, "eig_general");
    Spectrum sp;
    const std::size_t n = a.rows();
    if (n == 1) {
        sp.values = {{a(0, 0), 0.0}};
    } else if (n == 2) {
        sp.values = detail::eig_2x2(a(0, 0), a(0, 1), a(1, 0), a(1, 1));
    } else {
        sp.values = detail::hqr(detail::hessenberg(a));
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (sp.values[i].imag() > 0 && sp.values[i + 1].imag() < 0) std::swap(sp.values[i], sp.values[i + 1]);
    }
    return sp;
}

/// Lower-triangular L with L L' = P. A pivot <= 0 means P is not positive definite.
inline RealMatrix cholesky(const RealMatrix& p) {
    detail::require_square(p, "cholesky");
    detail::require_finite(p, "cholesky");
    if (relative_asymmetry(p) > 1e-12)
        fail(ErrorKind::Domain, "cholesky: matrix is not symmetric " + detail::describe(p));
    const std::size_t n = p.rows();
    RealMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = p(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0))
            fail(ErrorKind::NotPositiveDefinite, "cholesky: non-positive pivot at " + std::to_string(j) + " for " +
                                                     detail::describe(p));
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = p(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

inline bool is_positive_definite(const RealMatrix& p) {
    try {
        (void)cholesky(p);
        return true;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::NotPositiveDefinite) return false;
        throw;
    }
}

/// Solves L X = B for lower-triangular L.
inline RealMatrix forward_substitute(const RealMatrix& l, const RealMatrix& b) {
    const std::size_t n = l.rows();
    RealMatrix x = b;
    for (std::size_t c = 0; c < b.cols(); ++c)
        for (std::size_t i = 0; i < n; ++i) {
            double s = x(i, c);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
            x(i, c) = s / l(i, i);
        }
    return x;
}

/// Largest singular value, sqrt(lambda_max(A'A)).
inline double spectral_norm(const RealMatrix& a) {
    detail::require_finite(a, "spectral_norm");
    const double scale = max_abs(a);
    if (scale == 0.0) return 0.0;
    RealMatrix b = a * (1.0 / scale);
    const double top = lambda_max_sym(symmetrize(b.transpose() * b));
    return scale * std::sqrt(std::max(top, 0.0));
}

/// Solves A'P + PA + Q = 0 through the d^2 x d^2 Kronecker system.
inline RealMatrix solve_lyapunov(const RealMatrix& a, const RealMatrix& q) {
    detail::require_square(a, "solve_lyapunov");
    detail::require_square(q, "solve_lyapunov");
    detail::require_finite(a, "solve_lyapunov");
    detail::require_finite(q, "solve_lyapunov");
    if (a.rows() != q.rows()) fail(ErrorKind::Dimension, "solve_lyapunov: A and Q differ in dimension");
    if (relative_asymmetry(q) > 1e-12) fail(ErrorKind::Domain, "solve_lyapunov: Q must be symmetric");

    const std::size_t n = a.rows();
    const std::size_t m = n * n;
    auto idx = [n](std::size_t i, std::size_t j) { return i + j * n; };
    RealMatrix k(m, m);
    Vector rhs(m);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t row = idx(i, j);
            for (std::size_t s = 0; s < n; ++s) {
                k(row, idx(s, j)) += a(s, i); // (A'P)_{ij}
                k(row, idx(i, s)) += a(s, j); // (PA)_{ij}
            }
            rhs[row] = -q(i, j);
        }
    const double tol = 1e-12 * std::max(max_abs(k), std::numeric_limits<double>::min());
    const auto f = detail::lu_factor(std::move(k), tol);
    if (f.singular)
        fail(ErrorKind::NoUniqueSolution,
             "solve_lyapunov: Kronecker operator is singular (two eigenvalues of A sum to ~0) for " + detail::describe(a));
    const Vector x = detail::lu_solve(f, rhs);
    RealMatrix p(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) p(i, j) = x[idx(i, j)];
    return symmetrize(p);
}

/// |det A| / prod_i ||row_i||, in [0, 1] by Hadamard's inequality.
inline double scaled_determinant(const RealMatrix& a) {
    detail::require_square(a, "scaled_determinant");
    RealMatrix scaled = a;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
        if (s == 0.0) return 0.0;
        s = std::sqrt(s);
        for (std::size_t j = 0; j < a.cols(); ++j) scaled(i, j) /= s;
    }
    const auto f = detail::lu_factor(std::move(scaled), 0.0);
    if (f.singular) return 0.0;
    double det = 1.0;
    for (std::size_t i = 0; i < a.rows(); ++i) det *= f.lu(i, i);
    return std::abs(det);
}

} // namespace swicert
