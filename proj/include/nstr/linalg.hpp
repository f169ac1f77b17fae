#pragma once

// Dense numerical kernels: nonsymmetric eigendecomposition with left and
// right eigenvectors, complex linear solves, and largest singular values.
// Backed by Eigen's dense routines; left eigenvectors are polished by inverse
// iteration on the shifted transpose so the residual contracts hold even for
// clustered spectra.

#include "nstr/core.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <complex>

namespace nstr {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

struct EigenTriple {
    Complex lambda;
    CVec right;
    CVec left;  // u with u^H A = lambda u^H
};

class SingularSystem : public std::runtime_error {
  public:
    explicit SingularSystem(const std::string& what) : std::runtime_error(what) {}
};

// X with A X = B by partial-pivoting LU. Throws when the residual shows the
// system is singular to working precision.
inline CMat solve_complex(const CMat& A, const CMat& B) {
    if (A.rows() != A.cols() || A.rows() != B.rows())
        throw std::invalid_argument("solve_complex: dimension mismatch");
    Eigen::PartialPivLU<CMat> lu(A);
    CMat X = lu.solve(B);
    double anorm = A.norm(), xnorm = X.norm();
    double resid = (A * X - B).norm();
    if (!std::isfinite(xnorm) || resid > 1e-10 * (anorm * xnorm + B.norm()))
        throw SingularSystem("solve_complex: matrix singular to working precision");
    return X;
}

inline CMat solve_complex(const Mat& A, const CMat& B) {
    return solve_complex(CMat(A.cast<Complex>()), B);
}

// Largest singular value.
inline double sigma_max(const CMat& G) {
    if (G.size() == 0) return 0.0;
    return Eigen::JacobiSVD<CMat>(G).singularValues()(0);
}

inline double sigma_max(const Mat& G) {
    if (G.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Mat>(G).singularValues()(0);
}

namespace ladetail {

// One inverse-iteration pass for the left eigenvector of A at lambda:
// (A - lambda I)^H u ~ 0 directions emerge from solving the shifted system.
inline CVec left_vector(const Mat& A, Complex lambda, const CVec& right) {
    const int n = static_cast<int>(A.rows());
    double scale = std::max(1.0, A.norm());
    CMat M = A.cast<Complex>().adjoint();
    for (int i = 0; i < n; ++i) M(i, i) -= std::conj(lambda);

    CVec u = right.conjugate();
    if (u.norm() == 0) u = CVec::Ones(n);
    u.normalize();
    for (int attempt = 0; attempt < 4; ++attempt) {
        double shift = scale * 1e-13 * std::pow(10.0, attempt);
        CMat Ms = M;
        for (int i = 0; i < n; ++i) Ms(i, i) += Complex(shift, shift);
        Eigen::PartialPivLU<CMat> lu(Ms);
        CVec v = u;
        for (int it = 0; it < 3; ++it) {
            v = lu.solve(v);
            double nv = v.norm();
            if (!std::isfinite(nv) || nv == 0) break;
            v /= nv;
        }
        if (v.allFinite() && v.norm() > 0.5) {
            double resid = ((v.adjoint() * A).adjoint() - std::conj(lambda) * v).norm();
            if (resid <= 1e-10 * scale) return v;
            u = v;
        }
    }
    return u;
}

}  // namespace ladetail

// Full right/left eigendecomposition of a real dense matrix, eigenvalues
// sorted by descending real part (ties by descending imaginary part).
inline std::vector<EigenTriple> eig_dense(const Mat& A) {
    if (A.rows() != A.cols() || A.rows() < 1)
        throw std::invalid_argument("eig_dense: matrix must be square and nonempty");
    Eigen::EigenSolver<Mat> es(A);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eig_dense: iteration did not converge");

    const int n = static_cast<int>(A.rows());
    std::vector<EigenTriple> out(n);
    for (int i = 0; i < n; ++i) {
        out[i].lambda = es.eigenvalues()(i);
        out[i].right = es.eigenvectors().col(i);
    }
    std::sort(out.begin(), out.end(), [](const EigenTriple& a, const EigenTriple& b) {
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
        return a.lambda.imag() > b.lambda.imag();
    });
    for (auto& t : out) t.left = ladetail::left_vector(A, t.lambda, t.right);
    return out;
}

// max Re(lambda) over the spectrum plus the eigen-triples active at the top
// (within 1e-8 (1 + |alpha|) of the max real part).
struct SpectralAbscissa {
    double alpha = 0.0;
    std::vector<EigenTriple> active;
};

inline SpectralAbscissa spectral_abscissa(const Mat& A) {
    auto eig = eig_dense(A);
    SpectralAbscissa out;
    out.alpha = eig.front().lambda.real();
    double tol = 1e-8 * (1.0 + std::abs(out.alpha));
    for (auto& t : eig)
        if (t.lambda.real() >= out.alpha - tol) out.active.push_back(std::move(t));
    return out;
}

// Value-only variant without eigenvectors, for sampling-heavy callers.
inline double spectral_abscissa_value(const Mat& A) {
    Eigen::EigenSolver<Mat> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eig_dense: iteration did not converge");
    return es.eigenvalues().real().maxCoeff();
}

}  // namespace nstr
