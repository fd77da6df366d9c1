#include "lqcheck/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lqcheck::qmath {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

std::size_t bit_of(std::size_t index, std::size_t qubit, std::size_t n) {
    return (index >> (n - 1 - qubit)) & 1U;
}

Matrix swap_wires(std::size_t a, std::size_t b, std::size_t n) {
    std::size_t dim = dim_of(n);
    Matrix s = Matrix::Zero(dim, dim);
    for (std::size_t x = 0; x < dim; ++x) {
        std::size_t y = x;
        std::size_t ba = bit_of(x, a, n);
        std::size_t bb = bit_of(x, b, n);
        if (ba != bb) {
            y ^= std::size_t{1} << (n - 1 - a);
            y ^= std::size_t{1} << (n - 1 - b);
        }
        s(y, x) = 1.0;
    }
    return s;
}

void check_positions(const std::vector<std::size_t>& positions, std::size_t total) {
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (positions[i] >= total) {
            throw std::out_of_range("qubit index " + std::to_string(positions[i]) + " out of range");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (positions[i] == positions[j]) {
                throw std::invalid_argument("duplicate qubit index " + std::to_string(positions[i]));
            }
        }
    }
}

Matrix single(std::initializer_list<std::initializer_list<Complex>> rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (const auto& v : row) {
            m(r, c++) = v;
        }
        ++r;
    }
    return m;
}

Matrix projector(const Vector& v) { return v * v.adjoint(); }

}  // namespace

std::size_t dim_of(std::size_t n_qubits) { return std::size_t{1} << n_qubits; }

std::size_t qubits_of_dim(std::size_t dim) {
    std::size_t n = 0;
    while ((std::size_t{1} << n) < dim) {
        ++n;
    }
    if ((std::size_t{1} << n) != dim) {
        throw std::invalid_argument("dimension " + std::to_string(dim) + " is not a power of two");
    }
    return n;
}

StateVector::StateVector(Vector amps) : amps_(std::move(amps)), n_qubits_(qubits_of_dim(static_cast<std::size_t>(amps_.size()))) {}

DensityOperator::DensityOperator() : mat_(Matrix::Ones(1, 1)) {}

DensityOperator::DensityOperator(Matrix mat) : mat_(std::move(mat)) {
    if (mat_.rows() != mat_.cols()) {
        throw std::invalid_argument("density operator must be square");
    }
    n_qubits_ = qubits_of_dim(static_cast<std::size_t>(mat_.rows()));
}

DensityOperator DensityOperator::operator+(const DensityOperator& other) const {
    DensityOperator r = *this;
    r += other;
    return r;
}

DensityOperator& DensityOperator::operator+=(const DensityOperator& other) {
    if (other.dim() != dim()) {
        throw std::invalid_argument("dimension mismatch in density operator sum");
    }
    mat_ += other.mat_;
    return *this;
}

DensityOperator DensityOperator::operator*(double s) const { return DensityOperator(mat_ * s); }

DensityOperator DensityOperator::zero(std::size_t n_qubits) {
    std::size_t d = dim_of(n_qubits);
    return DensityOperator(Matrix::Zero(d, d));
}

DensityOperator DensityOperator::identity(std::size_t n_qubits) {
    std::size_t d = dim_of(n_qubits);
    return DensityOperator(Matrix::Identity(d, d));
}

DensityOperator DensityOperator::scalar(double v) { return DensityOperator(Matrix::Constant(1, 1, v)); }

Superoperator::Superoperator(std::vector<Matrix> kraus, double eps) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) {
        throw std::invalid_argument("superoperator needs at least one Kraus operator");
    }
    auto dim = kraus_.front().rows();
    for (const auto& k : kraus_) {
        if (k.rows() != dim || k.cols() != dim) {
            throw std::invalid_argument("Kraus operators must be square and of equal dimension");
        }
    }
    n_qubits_ = qubits_of_dim(static_cast<std::size_t>(dim));
    Matrix sum = Matrix::Zero(dim, dim);
    for (const auto& k : kraus_) {
        sum += k.adjoint() * k;
    }
    Matrix slack = Matrix::Identity(dim, dim) - sum;
    if (!is_psd(slack, eps)) {
        throw std::invalid_argument("Kraus operators are not trace non-increasing");
    }
    trace_preserving_ = approx_eq(sum, Matrix::Identity(dim, dim), eps);
}

Measurement::Measurement(std::vector<Matrix> outcomes, double eps) : outcomes_(std::move(outcomes)) {
    if (outcomes_.empty()) {
        throw std::invalid_argument("measurement needs at least one outcome");
    }
    auto dim = outcomes_.front().rows();
    Matrix sum = Matrix::Zero(dim, dim);
    for (const auto& m : outcomes_) {
        if (m.rows() != dim || m.cols() != dim) {
            throw std::invalid_argument("measurement operators must be square and of equal dimension");
        }
        sum += m.adjoint() * m;
    }
    n_qubits_ = qubits_of_dim(static_cast<std::size_t>(dim));
    if (!approx_eq(sum, Matrix::Identity(dim, dim), eps)) {
        throw std::invalid_argument("measurement operators violate completeness");
    }
}

StateVector ket(std::string_view label) {
    if (label == "PhiPlus" || label == "PhiMinus" || label == "PsiPlus" || label == "PsiMinus") {
        Vector v = Vector::Zero(4);
        double sign = (label == "PhiPlus" || label == "PsiPlus") ? 1.0 : -1.0;
        if (label.substr(0, 3) == "Phi") {
            v(0) = kInvSqrt2;
            v(3) = sign * kInvSqrt2;
        } else {
            v(1) = kInvSqrt2;
            v(2) = sign * kInvSqrt2;
        }
        return StateVector(v);
    }
    if (label.empty()) {
        throw std::invalid_argument("empty ket label");
    }
    Vector acc = Vector::Ones(1);
    for (std::size_t i = 0; i < label.size(); ++i) {
        Vector v(2);
        char c = label[i];
        if (c == '0') {
            v << 1.0, 0.0;
        } else if (c == '1') {
            v << 0.0, 1.0;
        } else if (c == '+') {
            v << kInvSqrt2, kInvSqrt2;
        } else if (c == 'i') {
            v << kInvSqrt2, Complex(0.0, kInvSqrt2);
        } else if (c == '-') {
            if (i + 1 < label.size() && label[i + 1] == 'i') {
                v << kInvSqrt2, Complex(0.0, -kInvSqrt2);
                ++i;
            } else {
                v << kInvSqrt2, -kInvSqrt2;
            }
        } else {
            throw std::invalid_argument(std::string("unknown ket label character '") + c + "'");
        }
        Vector next = tensor(Matrix(acc), Matrix(v));
        acc = next;
    }
    return StateVector(acc);
}

DensityOperator outer(const StateVector& psi) { return DensityOperator(psi.amps() * psi.amps().adjoint()); }

Matrix tensor(const Matrix& a, const Matrix& b) {
    Matrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return r;
}

StateVector tensor(const StateVector& a, const StateVector& b) { return StateVector(tensor(Matrix(a.amps()), Matrix(b.amps()))); }

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) { return DensityOperator(tensor(a.mat(), b.mat())); }

DensityOperator apply_kraus(const Matrix& k, const DensityOperator& rho) {
    if (k.cols() != rho.mat().rows()) {
        throw std::invalid_argument("arity mismatch between operator and state");
    }
    return DensityOperator(k * rho.mat() * k.adjoint());
}

DensityOperator apply(const Superoperator& e, const DensityOperator& rho) {
    if (e.n_qubits() != rho.n_qubits()) {
        throw std::invalid_argument("arity mismatch: superoperator on " + std::to_string(e.n_qubits()) + " qubits, state on " +
                                    std::to_string(rho.n_qubits()));
    }
    Matrix acc = Matrix::Zero(rho.mat().rows(), rho.mat().cols());
    for (const auto& k : e.kraus()) {
        acc += k * rho.mat() * k.adjoint();
    }
    return DensityOperator(std::move(acc));
}

Matrix pad(const Matrix& op, const std::vector<std::size_t>& positions, std::size_t total) {
    check_positions(positions, total);
    std::size_t k = positions.size();
    if (static_cast<std::size_t>(op.rows()) != dim_of(k)) {
        throw std::invalid_argument("operator arity does not match the number of positions");
    }
    std::size_t dim = dim_of(total);
    std::vector<std::size_t> order(total);
    for (std::size_t w = 0; w < total; ++w) {
        order[w] = w;
    }
    Matrix perm = Matrix::Identity(dim, dim);
    for (std::size_t i = 0; i < k; ++i) {
        auto loc = static_cast<std::size_t>(std::find(order.begin(), order.end(), positions[i]) - order.begin());
        if (loc != i) {
            perm = swap_wires(i, loc, total) * perm;
            std::swap(order[i], order[loc]);
        }
    }
    Matrix lifted = tensor(op, Matrix::Identity(dim_of(total - k), dim_of(total - k)));
    return perm.adjoint() * lifted * perm;
}

Superoperator pad(const Superoperator& e, const std::vector<std::size_t>& positions, std::size_t total) {
    std::vector<Matrix> ks;
    ks.reserve(e.kraus().size());
    for (const auto& k : e.kraus()) {
        ks.push_back(pad(k, positions, total));
    }
    return Superoperator(std::move(ks));
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::size_t>& qubits, TraceMode mode) {
    std::size_t n = rho.n_qubits();
    check_positions(qubits, n);
    std::vector<bool> dropped(n, mode == TraceMode::Keep);
    for (auto q : qubits) {
        dropped[q] = mode == TraceMode::Drop;
    }
    std::vector<std::size_t> kept;
    for (std::size_t q = 0; q < n; ++q) {
        if (!dropped[q]) {
            kept.push_back(q);
        }
    }
    std::size_t dim = dim_of(n);
    std::size_t out_dim = dim_of(kept.size());
    std::vector<std::size_t> kept_index(dim);
    std::vector<std::size_t> drop_index(dim);
    for (std::size_t x = 0; x < dim; ++x) {
        std::size_t ki = 0;
        std::size_t di = 0;
        for (std::size_t q = 0; q < n; ++q) {
            if (dropped[q]) {
                di = (di << 1U) | bit_of(x, q, n);
            } else {
                ki = (ki << 1U) | bit_of(x, q, n);
            }
        }
        kept_index[x] = ki;
        drop_index[x] = di;
    }
    Matrix out = Matrix::Zero(out_dim, out_dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            if (drop_index[i] == drop_index[j]) {
                out(kept_index[i], kept_index[j]) += rho.mat()(i, j);
            }
        }
    }
    return DensityOperator(std::move(out));
}

std::vector<MeasureBranch> measure(const Measurement& m, const DensityOperator& rho,
                                   const std::vector<std::size_t>& positions, double eps) {
    if (positions.size() != m.n_qubits()) {
        throw std::invalid_argument("measurement arity does not match positions");
    }
    std::vector<MeasureBranch> out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        Matrix k = pad(m.outcomes()[i], positions, rho.n_qubits());
        DensityOperator post = apply_kraus(k, rho);
        double p = post.trace();
        if (p > eps) {
            out.push_back({i, p, post * (1.0 / p)});
        }
    }
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("dimension mismatch in comparison");
    }
    if (a.size() == 0) {
        return 0.0;
    }
    return (a - b).cwiseAbs().maxCoeff();
}

bool approx_eq(const Matrix& a, const Matrix& b, double eps) { return max_abs_diff(a, b) <= eps; }

bool approx_eq(const DensityOperator& a, const DensityOperator& b, double eps) { return approx_eq(a.mat(), b.mat(), eps); }

bool is_hermitian(const Matrix& m, double eps) { return m.rows() == m.cols() && approx_eq(m, m.adjoint(), eps); }

bool is_psd(const Matrix& m, double eps) {
    if (!is_hermitian(m, eps)) {
        return false;
    }
    Matrix h = (m + m.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff() >= -eps;
}

bool is_finite(const Matrix& m) { return m.allFinite(); }

void validate(const DensityOperator& rho, double eps) {
    if (!is_finite(rho.mat())) {
        throw std::invalid_argument("density operator has non-finite entries");
    }
    if (!is_hermitian(rho.mat(), eps)) {
        throw std::invalid_argument("density operator is not Hermitian");
    }
    if (!is_psd(rho.mat(), eps)) {
        throw std::invalid_argument("density operator is not positive semidefinite");
    }
    double tr = rho.trace();
    if (tr < -eps || tr > 1.0 + eps) {
        throw std::invalid_argument("density operator trace out of [0,1]");
    }
}

namespace gates {

Superoperator H() { return Superoperator({single({{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}})}); }
Superoperator X() { return Superoperator({single({{0.0, 1.0}, {1.0, 0.0}})}); }
Superoperator Z() { return Superoperator({single({{1.0, 0.0}, {0.0, -1.0}})}); }
Superoperator I() { return Superoperator({Matrix::Identity(2, 2)}); }

Superoperator CNOT() {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(2, 3) = 1.0;
    m(3, 2) = 1.0;
    return Superoperator({m});
}

Superoperator SWAP() { return Superoperator({swap_wires(0, 1, 2)}); }

Superoperator ZX() { return Superoperator({single({{0.0, 1.0}, {-1.0, 0.0}})}); }

Superoperator SH() {
    Matrix h = single({{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}});
    Matrix s_dag = single({{1.0, 0.0}, {0.0, Complex(0.0, -1.0)}});
    return Superoperator({h * s_dag});
}

Superoperator SetHalfI() {
    std::vector<Matrix> ks;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            Matrix k = Matrix::Zero(2, 2);
            k(i, j) = kInvSqrt2;
            ks.push_back(k);
        }
    }
    return Superoperator(std::move(ks));
}

}  // namespace gates

namespace measurements {

Measurement M01() { return Measurement({projector(ket("0").amps()), projector(ket("1").amps())}); }
Measurement Mpm() { return Measurement({projector(ket("+").amps()), projector(ket("-").amps())}); }
Measurement Mpmi() { return Measurement({projector(ket("i").amps()), projector(ket("-i").amps())}); }

Measurement M01_2() {
    std::vector<Matrix> ps;
    for (int n = 0; n < 4; ++n) {
        Matrix p = Matrix::Zero(4, 4);
        p(n, n) = 1.0;
        ps.push_back(p);
    }
    return Measurement(std::move(ps));
}

Measurement coin(double p) {
    if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("coin probability must lie in [0,1]");
    }
    return Measurement({Matrix::Constant(1, 1, std::sqrt(p)), Matrix::Constant(1, 1, std::sqrt(1.0 - p))});
}

}  // namespace measurements

}  // namespace lqcheck::qmath
