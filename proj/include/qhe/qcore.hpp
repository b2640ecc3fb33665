// qcore.hpp: dense complex operators and density matrices for small (dim <= 8)
// Hilbert spaces: Hamiltonians of the qutrit/battery pair, Gibbs states,
// Kronecker products, partial traces, unitary evolution, trace distance.
//
// Natural units throughout: delta = hbar = k_B = 1.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qhe {

using complex = std::complex<double>;

inline constexpr int kMaxDim = 8;

// Fixed-capacity storage: no heap traffic for the small operators used here.
using Matrix = Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using Vector = Eigen::Matrix<complex, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using RealVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

inline constexpr double kInfiniteTemperature = std::numeric_limits<double>::infinity();

// Validation thresholds shared by every module. Adjust (if at all) before any
// parallel work starts; the library only reads it.
struct NumericTolerances {
    double hermitian = 1e-12;        // max-norm of M - M^dagger, relative to max(1, |M|_max)
    double trace = 1e-9;             // |Tr rho - 1|
    double min_eigenvalue = -1e-8;   // smallest admissible density-matrix eigenvalue
    double frequency_grouping = 1e-9;
    double positivity_abort = -1e-6; // integrator gives up below this eigenvalue
};

inline NumericTolerances& tolerances() {
    static NumericTolerances t;
    return t;
}

namespace detail {

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline void require(bool ok, const std::string& what) {
    if (!ok) throw std::domain_error(what);
}

}  // namespace detail

// --------------------------------- Operator ---------------------------------

class Operator {
public:
    Operator() = default;

    explicit Operator(Matrix m) : m_(std::move(m)) {
        detail::require(m_.rows() == m_.cols(), "Operator: matrix must be square");
        detail::require(m_.rows() >= 1 && m_.rows() <= kMaxDim,
                        "Operator: dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    }

    static Operator zero(int dim) { return Operator(Matrix::Zero(dim, dim)); }
    static Operator identity(int dim) { return Operator(Matrix::Identity(dim, dim)); }

    static Operator diagonal(std::span<const double> values) {
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(values.size()),
                                static_cast<Eigen::Index>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
        }
        return Operator(std::move(m));
    }

    // |row><col| in a dim-dimensional space.
    static Operator outer(int dim, int row, int col) {
        detail::require(row >= 0 && row < dim && col >= 0 && col < dim, "Operator::outer: index out of range");
        Matrix m = Matrix::Zero(dim, dim);
        m(row, col) = 1.0;
        return Operator(std::move(m));
    }

    int dim() const noexcept { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const noexcept { return m_; }
    complex operator()(int r, int c) const { return m_(r, c); }

    Operator adjoint() const { return Operator(m_.adjoint()); }

    double hermiticity_residual() const { return detail::max_abs(m_ - m_.adjoint()); }

    bool is_hermitian(double tol = tolerances().hermitian) const {
        return hermiticity_residual() <= tol * std::max(1.0, detail::max_abs(m_));
    }

    complex trace() const { return m_.trace(); }

    friend Operator operator+(const Operator& a, const Operator& b) {
        check_same_dim(a, b);
        return Operator(a.m_ + b.m_);
    }
    friend Operator operator-(const Operator& a, const Operator& b) {
        check_same_dim(a, b);
        return Operator(a.m_ - b.m_);
    }
    friend Operator operator*(const Operator& a, const Operator& b) {
        check_same_dim(a, b);
        return Operator(a.m_ * b.m_);
    }
    friend Operator operator*(complex s, const Operator& a) { return Operator(s * a.m_); }
    friend Operator operator*(double s, const Operator& a) { return Operator(s * a.m_); }

private:
    static void check_same_dim(const Operator& a, const Operator& b) {
        detail::require(a.dim() == b.dim(), "Operator: dimension mismatch");
    }

    Matrix m_;
};

inline Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

inline double max_norm(const Operator& a) { return detail::max_abs(a.matrix()); }

// ------------------------------ Spectral helpers ----------------------------

// Ascending eigenvalues and matching orthonormal eigenvectors (columns).
struct Eigensystem {
    RealVector values;
    Matrix vectors;
};

inline Eigensystem hermitian_eigensystem(const Operator& h) {
    detail::require(h.is_hermitian(), "hermitian_eigensystem: operator is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("hermitian_eigensystem: decomposition failed");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

inline RealVector eigenvalues(const Operator& h) { return hermitian_eigensystem(h).values; }

// ------------------------------ DensityMatrix -------------------------------

class DensityMatrix {
public:
    explicit DensityMatrix(Operator op, const NumericTolerances& tol = tolerances()) : op_(std::move(op)) {
        detail::require(op_.is_hermitian(tol.hermitian), "DensityMatrix: not Hermitian");
        const double tr = op_.trace().real();
        detail::require(std::abs(tr - 1.0) <= tol.trace && std::abs(op_.trace().imag()) <= tol.trace,
                        "DensityMatrix: trace differs from 1 (" + std::to_string(tr) + ")");
        const double lo = eigenvalues(op_).minCoeff();
        detail::require(lo >= tol.min_eigenvalue,
                        "DensityMatrix: negative eigenvalue " + std::to_string(lo));
    }

    explicit DensityMatrix(Matrix m, const NumericTolerances& tol = tolerances())
        : DensityMatrix(Operator(std::move(m)), tol) {}

    // Projector onto a normalized copy of psi.
    static DensityMatrix pure(const Vector& psi) {
        const double n = psi.norm();
        detail::require(n > 0.0, "DensityMatrix::pure: zero vector");
        const Vector v = psi / n;
        return DensityMatrix(Matrix(v * v.adjoint()));
    }

    static DensityMatrix basis_state(int dim, int index) { return DensityMatrix(Operator::outer(dim, index, index)); }

    static DensityMatrix maximally_mixed(int dim) {
        return DensityMatrix(Matrix(Matrix::Identity(dim, dim) / static_cast<double>(dim)));
    }

    const Operator& op() const noexcept { return op_; }
    const Matrix& matrix() const noexcept { return op_.matrix(); }
    int dim() const noexcept { return op_.dim(); }

private:
    Operator op_;
};

// Hermitize and renormalize a nearly valid state before validation.
inline DensityMatrix sanitized_state(const Matrix& m) {
    Matrix h = 0.5 * (m + m.adjoint());
    h /= h.trace().real();
    return DensityMatrix(std::move(h));
}

// ------------------------------ System layout --------------------------------

struct SystemSpec {
    double A{1.0};
    std::vector<int> dims{3};

    void validate() const {
        detail::require(std::isfinite(A) && A > 0.0, "SystemSpec: A must be positive");
        detail::require(!dims.empty(), "SystemSpec: empty subsystem list");
        int total = 1;
        for (int d : dims) {
            detail::require(d >= 1, "SystemSpec: subsystem dimension must be positive");
            total *= d;
        }
        detail::require(total <= kMaxDim, "SystemSpec: total dimension exceeds capacity");
    }
};

// ------------------------------- Hamiltonians --------------------------------

// Qutrit with equally spaced levels: diag(-A/2, 0, A/2) in the ordered basis |0~>,|1~>,|2~>.
inline Operator qutrit_hamiltonian(double A) {
    detail::require(std::isfinite(A) && A > 0.0, "qutrit_hamiltonian: A must be positive");
    const double e[] = {-A / 2.0, 0.0, A / 2.0};
    return Operator::diagonal(e);
}

// Battery (A/4) sigma_z with |0> the ground state: diag(-A/4, A/4).
inline Operator battery_hamiltonian(double A) {
    detail::require(std::isfinite(A) && A > 0.0, "battery_hamiltonian: A must be positive");
    const double e[] = {-A / 4.0, A / 4.0};
    return Operator::diagonal(e);
}

// |i~><j~| on the qutrit.
inline Operator qutrit_transition(int i, int j) { return Operator::outer(3, i, j); }

inline Operator sigma_plus() { return Operator::outer(2, 1, 0); }   // |1><0|
inline Operator sigma_minus() { return Operator::outer(2, 0, 1); }  // |0><1|

// J+ = |1~><0~| + |2~><1~|
inline Operator qutrit_raising() { return qutrit_transition(1, 0) + qutrit_transition(2, 1); }
inline Operator qutrit_lowering() { return qutrit_raising().adjoint(); }

// ------------------------------ Tensor structure -----------------------------

// Standard Kronecker ordering: right factor's index varies fastest.
inline Operator kron(const Operator& a, const Operator& b) {
    const int da = a.dim();
    const int db = b.dim();
    detail::require(da * db <= kMaxDim, "kron: product dimension exceeds capacity");
    Matrix m(da * db, da * db);
    for (int i = 0; i < da; ++i) {
        for (int j = 0; j < da; ++j) {
            m.block(i * db, j * db, db, db) = a(i, j) * b.matrix();
        }
    }
    return Operator(std::move(m));
}

inline DensityMatrix kron(const DensityMatrix& a, const DensityMatrix& b) {
    return DensityMatrix(kron(a.op(), b.op()));
}

// Reduced state of subsystem `keep` for a register laid out as dims[0] x dims[1] x ...
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> dims, int keep) {
    detail::require(!dims.empty(), "partial_trace: empty dims");
    if (keep < 0 || keep >= static_cast<int>(dims.size())) throw std::domain_error("partial_trace: keep index out of range");
    const int total = std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
    detail::require(total == rho.dim(), "partial_trace: dims do not multiply to state dimension");

    int inner = 1;  // product of dims to the right of keep
    for (std::size_t k = static_cast<std::size_t>(keep) + 1; k < dims.size(); ++k) inner *= dims[k];
    const int kd = dims[static_cast<std::size_t>(keep)];
    const int outer = total / (kd * inner);

    Matrix out = Matrix::Zero(kd, kd);
    for (int a = 0; a < kd; ++a) {
        for (int b = 0; b < kd; ++b) {
            complex s = 0.0;
            for (int o = 0; o < outer; ++o) {
                for (int in = 0; in < inner; ++in) {
                    const int r = (o * kd + a) * inner + in;
                    const int c = (o * kd + b) * inner + in;
                    s += rho.matrix()(r, c);
                }
            }
            out(a, b) = s;
        }
    }
    return sanitized_state(out);
}

// ------------------------------ States and maps ------------------------------

// Gibbs state exp(-H/T)/Z. T = +inf gives I/d; very small T approaches the ground projector.
inline DensityMatrix thermal_state(const Operator& h, double T) {
    detail::require(!std::isnan(T) && T > 0.0, "thermal_state: temperature must be positive");
    const int d = h.dim();
    if (std::isinf(T)) return DensityMatrix::maximally_mixed(d);
    const auto es = hermitian_eigensystem(h);
    const double e0 = es.values.minCoeff();
    RealVector w(d);
    for (int i = 0; i < d; ++i) w(i) = std::exp(-(es.values(i) - e0) / T);
    w /= w.sum();
    Matrix m = es.vectors * w.cast<complex>().asDiagonal() * es.vectors.adjoint();
    return sanitized_state(m);
}

inline Matrix unitary(const Operator& h, double t) {
    detail::require(h.is_hermitian(), "unitary: generator is not Hermitian");
    const auto es = hermitian_eigensystem(h);
    Vector phases(h.dim());
    for (int i = 0; i < h.dim(); ++i) phases(i) = std::exp(complex(0.0, -es.values(i) * t));
    return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

// U rho U^dagger with U = exp(-i H t).
inline DensityMatrix unitary_evolve(const DensityMatrix& rho, const Operator& h, double t) {
    detail::require(rho.dim() == h.dim(), "unitary_evolve: dimension mismatch");
    const Matrix u = unitary(h, t);
    return sanitized_state(u * rho.matrix() * u.adjoint());
}

inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    detail::require(rho.dim() == sigma.dim(), "trace_distance: dimension mismatch");
    Matrix diff = rho.matrix() - sigma.matrix();
    diff = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(diff, Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

// Tr(H rho); H is assumed Hermitian so only the real part is returned.
inline double expectation(const Operator& h, const DensityMatrix& rho) {
    detail::require(h.dim() == rho.dim(), "expectation: dimension mismatch");
    return (h.matrix() * rho.matrix()).trace().real();
}

}  // namespace qhe
