#include "lyapsim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lyapsim/errors.hpp"

namespace lyapsim {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* where) {
    if (a != b) {
        throw InputError(std::string(where) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
    }
}

bool finite(const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

ComplexVector::ComplexVector(std::vector<Complex> entries) : entries_(std::move(entries)) {
    if (entries_.size() < 2) throw InputError("ComplexVector: dimension must be at least 2");
    if (!std::all_of(entries_.begin(), entries_.end(), finite))
        throw InputError("ComplexVector: non-finite entry");
}

ComplexVector ComplexVector::basis(std::size_t dim, std::size_t j) {
    if (j >= dim) throw InputError("ComplexVector::basis: index out of range");
    std::vector<Complex> e(dim, Complex{0.0, 0.0});
    e[j] = 1.0;
    return ComplexVector(std::move(e));
}

double ComplexVector::norm() const noexcept {
    double s = 0.0;
    for (const auto& z : entries_) s += std::norm(z);
    return std::sqrt(s);
}

QuantumState::QuantumState(ComplexVector vector) : vector_(std::move(vector)) {
    if (std::abs(vector_.norm() - 1.0) > kNormTolerance)
        throw InputError("QuantumState: vector is not normalized");
}

QuantumState QuantumState::normalized(ComplexVector vector) {
    const double n = vector.norm();
    if (!(n > 1e-300)) throw InputError("QuantumState: cannot normalize a zero vector");
    std::vector<Complex> e(vector.entries().begin(), vector.entries().end());
    for (auto& z : e) z /= n;
    return QuantumState(ComplexVector(std::move(e)));
}

QuantumState QuantumState::normalized(std::vector<Complex> entries) {
    return normalized(ComplexVector(std::move(entries)));
}

HermitianOperator::HermitianOperator(std::size_t dim, std::vector<Complex> row_major)
    : dim_(dim), data_(std::move(row_major)) {
    if (dim_ < 2) throw InputError("HermitianOperator: dimension must be at least 2");
    if (data_.size() != dim_ * dim_) throw InputError("HermitianOperator: expected dim*dim entries");
    if (!std::all_of(data_.begin(), data_.end(), finite))
        throw InputError("HermitianOperator: non-finite entry");
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = i; j < dim_; ++j) {
            if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > kHermiticityTolerance)
                throw InputError("HermitianOperator: matrix is not Hermitian at (" + std::to_string(i) + "," +
                                 std::to_string(j) + ")");
        }
    }
}

HermitianOperator HermitianOperator::identity(std::size_t dim) {
    std::vector<double> ones(dim, 1.0);
    return diagonal(ones);
}

HermitianOperator HermitianOperator::diagonal(std::span<const double> diag) {
    const std::size_t n = diag.size();
    std::vector<Complex> m(n * n, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) m[i * n + i] = diag[i];
    return HermitianOperator(n, std::move(m));
}

HermitianOperator HermitianOperator::projector(const ComplexVector& v) {
    const std::size_t n = v.dim();
    std::vector<Complex> m(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i * n + j] = v[i] * std::conj(v[j]);
    // the diagonal is real by construction; remove rounding residue
    for (std::size_t i = 0; i < n; ++i) m[i * n + i] = std::norm(v[i]);
    return HermitianOperator(Unchecked{}, n, std::move(m));
}

HermitianOperator HermitianOperator::combined(double a, const HermitianOperator& other, double b) const {
    require_same_dim(dim_, other.dim_, "HermitianOperator::combined");
    std::vector<Complex> m(data_.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = a * data_[i] + b * other.data_[i];
    return HermitianOperator(Unchecked{}, dim_, std::move(m));
}

Complex inner(const ComplexVector& u, const ComplexVector& v) {
    require_same_dim(u.dim(), v.dim(), "inner");
    Complex s{0.0, 0.0};
    for (std::size_t i = 0; i < u.dim(); ++i) s += std::conj(u[i]) * v[i];
    return s;
}

ComplexVector apply(const HermitianOperator& h, const ComplexVector& v) {
    require_same_dim(h.dim(), v.dim(), "apply");
    const std::size_t n = h.dim();
    std::vector<Complex> out(n, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
        Complex s{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) s += h(i, j) * v[j];
        out[i] = s;
    }
    return ComplexVector(std::move(out));
}

Complex matrix_element(const ComplexVector& u, const HermitianOperator& h, const ComplexVector& v) {
    return inner(u, apply(h, v));
}

EigenDecomposition hermitian_eigen(const HermitianOperator& h) {
    constexpr int kMaxSweeps = 100;
    constexpr double kOffTolerance = 1e-12;

    const std::size_t n = h.dim();
    std::vector<Complex> a(h.data().begin(), h.data().end());
    std::vector<Complex> v(n * n, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    auto at = [n](std::vector<Complex>& m, std::size_t r, std::size_t c) -> Complex& { return m[r * n + c]; };

    double frob2 = 0.0;
    for (const auto& z : a) frob2 += std::norm(z);
    const double threshold = kOffTolerance * std::max(1.0, std::sqrt(frob2));

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += std::norm(at(a, i, j));
        return std::sqrt(s);
    };

    bool converged = off_norm() <= threshold;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex apq = at(a, p, q);
                const double r = std::abs(apq);
                if (r == 0.0) continue;
                // U = diag(1, e^{-iφ}) · R(θ) zeroes the (p,q) entry of U†AU.
                const Complex phase = apq / r;
                const double app = at(a, p, p).real();
                const double aqq = at(a, q, q).real();
                const double theta = (aqq - app) / (2.0 * r);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const Complex u_pp = c;
                const Complex u_pq = s;
                const Complex u_qp = -s * std::conj(phase);
                const Complex u_qq = c * std::conj(phase);

                for (std::size_t k = 0; k < n; ++k) {
                    const Complex akp = at(a, k, p);
                    const Complex akq = at(a, k, q);
                    at(a, k, p) = akp * u_pp + akq * u_qp;
                    at(a, k, q) = akp * u_pq + akq * u_qq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex apk = at(a, p, k);
                    const Complex aqk = at(a, q, k);
                    at(a, p, k) = std::conj(u_pp) * apk + std::conj(u_qp) * aqk;
                    at(a, q, k) = std::conj(u_pq) * apk + std::conj(u_qq) * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex vkp = at(v, k, p);
                    const Complex vkq = at(v, k, q);
                    at(v, k, p) = vkp * u_pp + vkq * u_qp;
                    at(v, k, q) = vkp * u_pq + vkq * u_qq;
                }
                at(a, p, q) = 0.0;
                at(a, q, p) = 0.0;
                at(a, p, p) = at(a, p, p).real();
                at(a, q, q) = at(a, q, q).real();
            }
        }
        converged = off_norm() <= threshold;
    }
    if (!converged) throw NumericalError("hermitian_eigen: Jacobi iteration did not converge in 100 sweeps");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return at(a, i, i).real() < at(a, j, j).real(); });

    EigenDecomposition out;
    out.eigenvalues.reserve(n);
    out.eigenvectors.reserve(n);
    for (std::size_t idx : order) {
        out.eigenvalues.push_back(at(a, idx, idx).real());
        std::vector<Complex> col(n);
        for (std::size_t k = 0; k < n; ++k) col[k] = at(v, k, idx);
        out.eigenvectors.emplace_back(std::move(col));
    }
    return out;
}

ComplexVector expm_apply(const EigenDecomposition& eig, double t, const ComplexVector& v) {
    const std::size_t n = eig.eigenvalues.size();
    require_same_dim(n, v.dim(), "expm_apply");
    std::vector<Complex> out(n, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
        const ComplexVector& ev = eig.eigenvectors[i];
        const Complex coeff = std::polar(1.0, -eig.eigenvalues[i] * t) * inner(ev, v);
        for (std::size_t k = 0; k < n; ++k) out[k] += coeff * ev[k];
    }
    return ComplexVector(std::move(out));
}

ComplexVector expm_apply(const HermitianOperator& h, double t, const ComplexVector& v) {
    require_same_dim(h.dim(), v.dim(), "expm_apply");
    if (t == 0.0) return v;
    return expm_apply(hermitian_eigen(h), t, v);
}

double sup_distance(const ComplexVector& u, const ComplexVector& v) {
    require_same_dim(u.dim(), v.dim(), "sup_distance");
    double m = 0.0;
    for (std::size_t i = 0; i < u.dim(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
    return m;
}

}  // namespace lyapsim
