#include "trajthermo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "trajthermo/tolerances.hpp"

namespace trajthermo {

bool ComplexMatrix::is_hermitian(double tol) const {
    if (rows_ != cols_) return false;
    const double scale = std::max(1.0, frobenius_norm());
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = i; j < cols_; ++j)
            if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol * scale) return false;
    return true;
}

bool ComplexMatrix::is_unitary(double tol) const {
    if (rows_ != cols_) return false;
    const ComplexMatrix r = adjoint() * (*this) - identity(rows_);
    return r.frobenius_norm() <= tol * std::sqrt(static_cast<double>(rows_));
}

bool ComplexMatrix::is_psd(double tol) const {
    if (!is_hermitian(tols().hermitian)) return false;
    const EigResult e = herm_eig(*this);
    return e.values.front() >= -tol;
}

ComplexMatrix sigma_x() {
    ComplexMatrix m(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}

ComplexMatrix sigma_plus() {
    ComplexMatrix m(2, 2);
    m(1, 0) = 1.0;
    return m;
}

ComplexMatrix sigma_minus() {
    ComplexMatrix m(2, 2);
    m(0, 1) = 1.0;
    return m;
}

namespace {

double off_diagonal_norm(const ComplexMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

}  // namespace

EigResult herm_eig(const ComplexMatrix& a) {
    if (!a.is_hermitian(tols().hermitian)) throw NotHermitian("herm_eig: matrix is not Hermitian");
    const std::size_t n = a.rows();
    ComplexMatrix d = a;
    ComplexMatrix v = ComplexMatrix::identity(n);
    const double scale = std::max(1.0, a.frobenius_norm());

    // Cyclic Jacobi with complex plane rotations. For the 2x2 pivot block
    // [[app, b],[conj(b), aqq]] with b = r e^{i phi}, the rotation
    // J = [[c, s e^{i phi}],[-s e^{-i phi}, c]] annihilates the (p,q) entry
    // when tan(2 theta) = 2 r / (aqq - app).
    for (int sweep = 0; sweep < 100; ++sweep) {
        if (off_diagonal_norm(d) <= tols().jacobi_offdiag * scale) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx b = d(p, q);
                const double r = std::abs(b);
                if (r == 0.0) continue;
                const cplx phase = b / r;  // e^{i phi}
                const double app = d(p, p).real();
                const double aqq = d(q, q).real();
                const double tau = (aqq - app) / (2.0 * r);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cplx jpq = s * phase;

                // D <- J^dag D J
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx dkp = d(k, p);
                    const cplx dkq = d(k, q);
                    d(k, p) = c * dkp - std::conj(jpq) * dkq;
                    d(k, q) = jpq * dkp + c * dkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx dpk = d(p, k);
                    const cplx dqk = d(q, k);
                    d(p, k) = c * dpk - jpq * dqk;
                    d(q, k) = std::conj(jpq) * dpk + c * dqk;
                }
                d(p, q) = 0.0;
                d(q, p) = 0.0;
                d(p, p) = cplx(d(p, p).real(), 0.0);
                d(q, q) = cplx(d(q, q).real(), 0.0);

                // V <- V J
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx vkp = v(k, p);
                    const cplx vkq = v(k, q);
                    v(k, p) = c * vkp - std::conj(jpq) * vkq;
                    v(k, q) = jpq * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return d(i, i).real() < d(j, j).real(); });

    EigResult out;
    out.values.resize(n);
    out.vectors = ComplexMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = d(order[j], order[j]).real();
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

namespace {

// f applied to the spectrum: V diag(f(lambda)) V^dag.
ComplexMatrix spectral_map(const EigResult& e, const std::vector<cplx>& fvals) {
    const std::size_t n = e.values.size();
    ComplexMatrix r(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cplx acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += e.vectors(i, k) * fvals[k] * std::conj(e.vectors(j, k));
            r(i, j) = acc;
        }
    return r;
}

}  // namespace

ComplexMatrix mat_exp_mi(const ComplexMatrix& h) {
    const EigResult e = herm_eig(h);
    std::vector<cplx> f(e.values.size());
    for (std::size_t k = 0; k < f.size(); ++k)
        f[k] = std::exp(cplx(0.0, -e.values[k]));
    return spectral_map(e, f);
}

ComplexMatrix mat_sqrt_psd(const ComplexMatrix& a) {
    EigResult e = herm_eig(a);
    const double scale = std::max(1.0, *std::max_element(e.values.begin(), e.values.end()));
    std::vector<cplx> f(e.values.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        double lam = e.values[k];
        if (lam < 0.0) {
            if (lam < -tols().psd_clamp * scale) {
                std::ostringstream msg;
                msg << "mat_sqrt_psd: eigenvalue " << lam << " below PSD clamp window";
                throw NotPSD(msg.str());
            }
            lam = 0.0;
        }
        f[k] = std::sqrt(lam);
    }
    return spectral_map(e, f);
}

std::pair<double, double> singular_extent(const ComplexMatrix& a) {
    const EigResult e = herm_eig(a.adjoint() * a);
    const double lo = std::sqrt(std::max(0.0, e.values.front()));
    const double hi = std::sqrt(std::max(0.0, e.values.back()));
    return {lo, hi};
}

ComplexMatrix mat_inv(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) throw SizeMismatch("mat_inv: matrix not square");
    const auto [smin, smax] = singular_extent(a);
    if (smin < tols().inverse_rcond * smax || smax == 0.0) {
        std::ostringstream msg;
        msg << "mat_inv: matrix numerically singular, cond = "
            << (smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity());
        throw Singular(msg.str());
    }

    const std::size_t n = a.rows();
    ComplexMatrix m = a;
    ComplexMatrix inv = ComplexMatrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(m(col, j), m(pivot, j));
                std::swap(inv(col, j), inv(pivot, j));
            }
        }
        const cplx piv = m(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            m(col, j) /= piv;
            inv(col, j) /= piv;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const cplx f = m(r, col);
            if (f == cplx(0.0, 0.0)) continue;
            for (std::size_t j = 0; j < n; ++j) {
                m(r, j) -= f * m(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

ComplexMatrix complete_isometry(const ComplexMatrix& v) {
    const std::size_t n = v.rows();
    const std::size_t m = v.cols();
    if (m >= n) throw SizeMismatch("complete_isometry: expects a tall matrix");
    {
        const ComplexMatrix r = v.adjoint() * v - ComplexMatrix::identity(m);
        if (r.frobenius_norm() > tols().isometry)
            throw NotIsometry("complete_isometry: V^dag V deviates from identity");
    }

    ComplexMatrix w(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) w(i, j) = v(i, j);

    std::size_t filled = m;
    for (std::size_t step = 0; step < n && filled < n; ++step) {
        const std::size_t cand = (m + step) % n;  // e_m, e_{m+1}, ..., wrap
        std::vector<cplx> col(n, cplx(0.0, 0.0));
        col[cand] = 1.0;
        for (std::size_t j = 0; j < filled; ++j) {
            cplx overlap = 0.0;
            for (std::size_t i = 0; i < n; ++i) overlap += std::conj(w(i, j)) * col[i];
            for (std::size_t i = 0; i < n; ++i) col[i] -= overlap * w(i, j);
        }
        double norm = 0.0;
        for (const auto& c : col) norm += std::norm(c);
        norm = std::sqrt(norm);
        if (norm < tols().completion_drop) continue;
        for (std::size_t i = 0; i < n; ++i) w(i, filled) = col[i] / norm;
        ++filled;
    }
    if (filled < n) throw NotCompletable("complete_isometry: ran out of basis candidates");
    return w;
}

}  // namespace trajthermo
