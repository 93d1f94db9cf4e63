#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace lyapsim {

using Complex = std::complex<double>;

/// Dense complex vector of dimension >= 2 with finite entries.
class ComplexVector {
public:
    explicit ComplexVector(std::vector<Complex> entries);

    /// The j-th standard basis vector (0-based) of the given dimension.
    static ComplexVector basis(std::size_t dim, std::size_t j);

    std::size_t dim() const noexcept { return entries_.size(); }
    std::span<const Complex> entries() const noexcept { return entries_; }
    const Complex& operator[](std::size_t i) const { return entries_[i]; }

    double norm() const noexcept;

    bool operator==(const ComplexVector&) const = default;

private:
    std::vector<Complex> entries_;
};

/// Unit-norm state vector, |‖ψ‖ − 1| ≤ 1e-9.
class QuantumState {
public:
    static constexpr double kNormTolerance = 1e-9;

    explicit QuantumState(ComplexVector vector);

    /// Scales `vector` to unit norm. Throws InputError for a (near) zero vector.
    static QuantumState normalized(ComplexVector vector);
    static QuantumState normalized(std::vector<Complex> entries);

    std::size_t dim() const noexcept { return vector_.dim(); }
    const ComplexVector& vector() const noexcept { return vector_; }
    std::span<const Complex> amplitudes() const noexcept { return vector_.entries(); }
    const Complex& operator[](std::size_t i) const { return vector_[i]; }

    bool operator==(const QuantumState&) const = default;

private:
    ComplexVector vector_;
};

/// Self-adjoint dim×dim matrix, stored row-major.
class HermitianOperator {
public:
    static constexpr double kHermiticityTolerance = 1e-12;

    /// Throws InputError when the matrix is not square, dim < 2, contains
    /// non-finite values or differs from its adjoint by more than 1e-12.
    HermitianOperator(std::size_t dim, std::vector<Complex> row_major);

    static HermitianOperator identity(std::size_t dim);
    static HermitianOperator diagonal(std::span<const double> diag);
    /// |v⟩⟨v|
    static HermitianOperator projector(const ComplexVector& v);

    std::size_t dim() const noexcept { return dim_; }
    const Complex& operator()(std::size_t row, std::size_t col) const { return data_[row * dim_ + col]; }
    std::span<const Complex> data() const noexcept { return data_; }

    /// a·this + b·other
    HermitianOperator combined(double a, const HermitianOperator& other, double b) const;

    bool operator==(const HermitianOperator&) const = default;

private:
    struct Unchecked {};
    HermitianOperator(Unchecked, std::size_t dim, std::vector<Complex> row_major)
        : dim_(dim), data_(std::move(row_major)) {}

    std::size_t dim_;
    std::vector<Complex> data_;
};

struct EigenDecomposition {
    std::vector<double> eigenvalues;          // ascending
    std::vector<ComplexVector> eigenvectors;  // orthonormal, eigenvectors[i] ↔ eigenvalues[i]
};

/// ⟨u|v⟩ = Σ conj(uᵢ)·vᵢ.
Complex inner(const ComplexVector& u, const ComplexVector& v);

ComplexVector apply(const HermitianOperator& h, const ComplexVector& v);

/// ⟨u|H|v⟩
Complex matrix_element(const ComplexVector& u, const HermitianOperator& h, const ComplexVector& v);

/// Cyclic complex Jacobi. Stops when the off-diagonal Frobenius norm drops
/// below 1e-12·max(1, ‖H‖_F); throws NumericalError after 100 sweeps.
EigenDecomposition hermitian_eigen(const HermitianOperator& h);

/// e^{−iHt}·v through the eigendecomposition of H.
ComplexVector expm_apply(const HermitianOperator& h, double t, const ComplexVector& v);

/// Same as above with a precomputed decomposition of H.
ComplexVector expm_apply(const EigenDecomposition& eig, double t, const ComplexVector& v);

/// max_i |uᵢ − vᵢ|
double sup_distance(const ComplexVector& u, const ComplexVector& v);

}  // namespace lyapsim
