#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "trajthermo/errors.hpp"

namespace trajthermo {

using cplx = std::complex<double>;

/// Dense row-major complex matrix. Sized for the 2/4/8-dimensional
/// operators of a single-qubit collision model; no attempt at being fast.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, cplx(0.0, 0.0)) {}

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<cplx>& data() const { return data_; }
    std::vector<cplx>& data() { return data_; }

    ComplexMatrix adjoint() const {
        ComplexMatrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    ComplexMatrix operator*(const ComplexMatrix& o) const {
        if (cols_ != o.rows_) throw SizeMismatch("matrix product dimension mismatch");
        ComplexMatrix r(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const cplx a = (*this)(i, k);
                if (a == cplx(0.0, 0.0)) continue;
                for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
            }
        return r;
    }

    ComplexMatrix operator+(const ComplexMatrix& o) const {
        requireSameShape(o);
        ComplexMatrix r = *this;
        for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] += o.data_[i];
        return r;
    }

    ComplexMatrix operator-(const ComplexMatrix& o) const {
        requireSameShape(o);
        ComplexMatrix r = *this;
        for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] -= o.data_[i];
        return r;
    }

    ComplexMatrix operator*(cplx a) const {
        ComplexMatrix r = *this;
        for (auto& v : r.data_) v *= a;
        return r;
    }

    cplx trace() const {
        cplx t = 0.0;
        for (std::size_t i = 0; i < rows_ && i < cols_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

    bool is_hermitian(double tol) const;
    bool is_unitary(double tol) const;
    bool is_psd(double tol) const;  // Hermitian with eigenvalues >= -tol

    bool same_shape(const ComplexMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    void requireSameShape(const ComplexMatrix& o) const {
        if (!same_shape(o)) throw SizeMismatch("matrix shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

/// Pure state on a 2^k-dimensional register.
struct StateVector {
    std::vector<cplx> amplitudes;

    StateVector() = default;
    explicit StateVector(std::size_t dim) : amplitudes(dim, cplx(0.0, 0.0)) {}

    static StateVector basis(std::size_t dim, std::size_t index) {
        StateVector s(dim);
        s.amplitudes[index] = 1.0;
        return s;
    }

    std::size_t dim() const { return amplitudes.size(); }

    double norm_sq() const {
        double s = 0.0;
        for (const auto& a : amplitudes) s += std::norm(a);
        return s;
    }

    double norm() const { return std::sqrt(norm_sq()); }

    void normalize() {
        const double n = norm();
        if (n <= 0.0) throw InvalidState("cannot normalize zero state");
        for (auto& a : amplitudes) a /= n;
    }
};

/// y = A x.
inline StateVector apply(const ComplexMatrix& a, const StateVector& x) {
    if (a.cols() != x.dim()) throw SizeMismatch("operator/state dimension mismatch");
    StateVector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x.amplitudes[j];
        y.amplitudes[i] = acc;
    }
    return y;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return r;
}

// Pauli and ladder operators on one qubit, |0> = index 0.
ComplexMatrix sigma_x();
ComplexMatrix sigma_plus();   // |1><0|
ComplexMatrix sigma_minus();  // |0><1|

}  // namespace trajthermo
