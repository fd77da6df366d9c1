#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace lqcheck::qmath {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kDefaultEps = 1e-9;

std::size_t dim_of(std::size_t n_qubits);

// Number of qubits for a 2^n dimension; throws if dim is not a power of two.
std::size_t qubits_of_dim(std::size_t dim);

class StateVector {
public:
    StateVector() = default;
    explicit StateVector(Vector amps);

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
    const Vector& amps() const { return amps_; }
    double norm() const { return amps_.norm(); }

private:
    Vector amps_;
    std::size_t n_qubits_ = 0;
};

class DensityOperator {
public:
    DensityOperator();
    explicit DensityOperator(Matrix mat);

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return static_cast<std::size_t>(mat_.rows()); }
    const Matrix& mat() const { return mat_; }
    double trace() const { return mat_.trace().real(); }

    DensityOperator operator+(const DensityOperator& other) const;
    DensityOperator& operator+=(const DensityOperator& other);
    DensityOperator operator*(double s) const;

    static DensityOperator zero(std::size_t n_qubits);
    static DensityOperator identity(std::size_t n_qubits);
    static DensityOperator scalar(double v);

private:
    Matrix mat_;
    std::size_t n_qubits_ = 0;
};

class Superoperator {
public:
    Superoperator() = default;
    explicit Superoperator(std::vector<Matrix> kraus, double eps = kDefaultEps);

    std::size_t n_qubits() const { return n_qubits_; }
    const std::vector<Matrix>& kraus() const { return kraus_; }
    bool trace_preserving() const { return trace_preserving_; }

private:
    std::vector<Matrix> kraus_;
    std::size_t n_qubits_ = 0;
    bool trace_preserving_ = false;
};

class Measurement {
public:
    Measurement() = default;
    explicit Measurement(std::vector<Matrix> outcomes, double eps = kDefaultEps);

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t size() const { return outcomes_.size(); }
    const std::vector<Matrix>& outcomes() const { return outcomes_; }

private:
    std::vector<Matrix> outcomes_;
    std::size_t n_qubits_ = 0;
};

struct MeasureBranch {
    std::size_t outcome;
    double weight;
    DensityOperator post;
};

enum class TraceMode { Keep, Drop };

StateVector ket(std::string_view label);
DensityOperator outer(const StateVector& psi);

Matrix tensor(const Matrix& a, const Matrix& b);
StateVector tensor(const StateVector& a, const StateVector& b);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);

DensityOperator apply(const Superoperator& e, const DensityOperator& rho);
DensityOperator apply_kraus(const Matrix& k, const DensityOperator& rho);

// Lifts an operator on `positions.size()` qubits to `total` qubits.
Matrix pad(const Matrix& op, const std::vector<std::size_t>& positions, std::size_t total);
Superoperator pad(const Superoperator& e, const std::vector<std::size_t>& positions, std::size_t total);

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::size_t>& qubits, TraceMode mode);

std::vector<MeasureBranch> measure(const Measurement& m, const DensityOperator& rho,
                                   const std::vector<std::size_t>& positions, double eps = kDefaultEps);

bool approx_eq(const Matrix& a, const Matrix& b, double eps = kDefaultEps);
bool approx_eq(const DensityOperator& a, const DensityOperator& b, double eps = kDefaultEps);
double max_abs_diff(const Matrix& a, const Matrix& b);

bool is_hermitian(const Matrix& m, double eps = kDefaultEps);
bool is_psd(const Matrix& m, double eps = kDefaultEps);
bool is_finite(const Matrix& m);

// Checks the density operator invariants; throws std::invalid_argument on violation.
void validate(const DensityOperator& rho, double eps = kDefaultEps);

namespace gates {
Superoperator H();
Superoperator X();
Superoperator Z();
Superoperator I();
Superoperator CNOT();
Superoperator SWAP();
Superoperator ZX();
Superoperator SH();
Superoperator SetHalfI();
}  // namespace gates

namespace measurements {
Measurement M01();
Measurement Mpm();
Measurement Mpmi();
Measurement M01_2();
Measurement coin(double p);
}  // namespace measurements

}  // namespace lqcheck::qmath
