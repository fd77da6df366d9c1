#include <random>

#include "doctest.h"
#include "lqcheck/qmath.hpp"

using namespace lqcheck::qmath;

namespace {

std::size_t bit(std::size_t x, std::size_t q, std::size_t n) { return (x >> (n - 1 - q)) & 1U; }

// Entry-by-entry embedding of `op` acting on `pos` inside n qubits.
Matrix pad_oracle(const Matrix& op, const std::vector<std::size_t>& pos, std::size_t n) {
    std::size_t dim = std::size_t{1} << n;
    Matrix out = Matrix::Zero(dim, dim);
    for (std::size_t x = 0; x < dim; ++x) {
        for (std::size_t y = 0; y < dim; ++y) {
            bool rest_equal = true;
            for (std::size_t q = 0; q < n; ++q) {
                if (std::find(pos.begin(), pos.end(), q) == pos.end() && bit(x, q, n) != bit(y, q, n)) {
                    rest_equal = false;
                }
            }
            if (!rest_equal) {
                continue;
            }
            std::size_t sx = 0;
            std::size_t sy = 0;
            for (auto q : pos) {
                sx = (sx << 1U) | bit(x, q, n);
                sy = (sy << 1U) | bit(y, q, n);
            }
            out(x, y) = op(sx, sy);
        }
    }
    return out;
}

Matrix ptrace_oracle(const Matrix& rho, const std::vector<std::size_t>& drop, std::size_t n) {
    std::vector<std::size_t> keep;
    for (std::size_t q = 0; q < n; ++q) {
        if (std::find(drop.begin(), drop.end(), q) == drop.end()) {
            keep.push_back(q);
        }
    }
    std::size_t dim = std::size_t{1} << n;
    Matrix out = Matrix::Zero(std::size_t{1} << keep.size(), std::size_t{1} << keep.size());
    for (std::size_t x = 0; x < dim; ++x) {
        for (std::size_t y = 0; y < dim; ++y) {
            bool same = true;
            for (auto q : drop) {
                same = same && bit(x, q, n) == bit(y, q, n);
            }
            if (!same) {
                continue;
            }
            std::size_t kx = 0;
            std::size_t ky = 0;
            for (auto q : keep) {
                kx = (kx << 1U) | bit(x, q, n);
                ky = (ky << 1U) | bit(y, q, n);
            }
            out(kx, ky) += rho(x, y);
        }
    }
    return out;
}

Matrix random_matrix(std::mt19937& rng, std::size_t d) {
    std::normal_distribution<double> g;
    Matrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            m(i, j) = Complex(g(rng), g(rng));
        }
    }
    return m;
}

Matrix random_state(std::mt19937& rng, std::size_t n) {
    Matrix a = random_matrix(rng, std::size_t{1} << n);
    Matrix rho = a * a.adjoint();
    return rho / rho.trace().real();
}

}  // namespace

TEST_CASE("kets") {
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(ket("0").amps()(0) == Complex(1.0));
    CHECK(std::abs(ket("-").amps()(1) - Complex(-h)) < 1e-12);
    CHECK(std::abs(ket("i").amps()(1) - Complex(0.0, h)) < 1e-12);
    auto phi = ket("PhiPlus").amps();
    CHECK(phi.size() == 4);
    CHECK(std::abs(phi(0) - Complex(h)) < 1e-12);
    CHECK(std::abs(phi(3) - Complex(h)) < 1e-12);
    CHECK(ket("01").amps()(1) == Complex(1.0));
    CHECK_THROWS(ket("2"));
}

TEST_CASE("pad agrees with the entrywise embedding") {
    std::mt19937 rng(7);
    for (std::size_t n = 1; n <= 3; ++n) {
        for (std::size_t a = 0; a < n; ++a) {
            Matrix op = random_matrix(rng, 2);
            CHECK(approx_eq(pad(op, {a}, n), pad_oracle(op, {a}, n), 1e-12));
            for (std::size_t b = 0; b < n; ++b) {
                if (a == b) {
                    continue;
                }
                Matrix op2 = random_matrix(rng, 4);
                CHECK(approx_eq(pad(op2, {a, b}, n), pad_oracle(op2, {a, b}, n), 1e-12));
            }
        }
    }
    CHECK_THROWS(pad(Matrix::Identity(2, 2), {3}, 2));
}

TEST_CASE("CNOT with reversed wires") {
    Matrix reversed = pad(gates::CNOT().kraus().front(), {1, 0}, 2);
    Matrix expect = Matrix::Zero(4, 4);
    expect(0, 0) = 1.0;
    expect(3, 1) = 1.0;
    expect(2, 2) = 1.0;
    expect(1, 3) = 1.0;
    CHECK(approx_eq(reversed, expect, 1e-12));
}

TEST_CASE("partial trace agrees with the index sum") {
    std::mt19937 rng(11);
    for (std::size_t n = 1; n <= 3; ++n) {
        Matrix rho = random_state(rng, n);
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            std::vector<std::size_t> drop;
            for (std::size_t q = 0; q < n; ++q) {
                if (mask >> q & 1U) {
                    drop.push_back(q);
                }
            }
            auto got = partial_trace(DensityOperator(rho), drop, TraceMode::Drop);
            CHECK(approx_eq(got.mat(), ptrace_oracle(rho, drop, n), 1e-12));
            CHECK(std::abs(got.trace() - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("partial trace of a Bell pair is maximally mixed") {
    auto bell = outer(ket("PhiPlus"));
    auto r = partial_trace(bell, {1}, TraceMode::Drop);
    CHECK(approx_eq(r.mat(), Matrix::Identity(2, 2) * 0.5, 1e-12));
    auto k = partial_trace(bell, {1}, TraceMode::Keep);
    CHECK(approx_eq(k.mat(), Matrix::Identity(2, 2) * 0.5, 1e-12));
}

TEST_CASE("measurement branches") {
    auto plus = outer(ket("+"));
    auto br = measure(measurements::M01(), plus, {0});
    REQUIRE(br.size() == 2);
    CHECK(std::abs(br[0].weight - 0.5) < 1e-12);
    CHECK(approx_eq(br[1].post, outer(ket("1")), 1e-12));
    auto zero = measure(measurements::M01(), outer(ket("0")), {0});
    CHECK(zero.size() == 1);
    auto c = measure(measurements::coin(0.75), DensityOperator::scalar(1.0), {});
    REQUIRE(c.size() == 2);
    CHECK(std::abs(c[0].weight - 0.75) < 1e-12);
    auto two = measure(measurements::M01_2(), outer(ket("01")), {0, 1});
    REQUIRE(two.size() == 1);
    CHECK(two[0].outcome == 1);
}

TEST_CASE("SH maps the imaginary basis to the computational basis") {
    auto sh = gates::SH();
    auto a = apply(sh, outer(ket("i")));
    auto b = apply(sh, outer(ket("-i")));
    CHECK(approx_eq(a, outer(ket("0")), 1e-12));
    CHECK(approx_eq(b, outer(ket("1")), 1e-12));
}

TEST_CASE("superoperator validation") {
    CHECK(gates::H().trace_preserving());
    Matrix half = Matrix::Identity(2, 2) * std::sqrt(0.5);
    Superoperator e({half});
    CHECK_FALSE(e.trace_preserving());
    CHECK(std::abs(apply(e, outer(ket("0"))).trace() - 0.5) < 1e-12);
    CHECK_THROWS(Superoperator({Matrix::Identity(2, 2) * 2.0}));
    CHECK_THROWS(Measurement({Matrix::Identity(2, 2) * 0.5}));
    CHECK(approx_eq(apply(gates::SetHalfI(), outer(ket("0"))).mat(), Matrix::Identity(2, 2) * 0.5, 1e-12));
}

TEST_CASE("density operator checks") {
    CHECK_NOTHROW(validate(outer(ket("+"))));
    Matrix bad(2, 2);
    bad << 1.0, 0.0, 0.0, -0.1;
    CHECK_THROWS(validate(DensityOperator(bad)));
    CHECK_FALSE(is_psd(bad));
    Matrix nh(2, 2);
    nh << 0.5, 0.1, 0.0, 0.5;
    CHECK_FALSE(is_hermitian(nh));
}

TEST_CASE("tensor is big-endian") {
    auto v = tensor(ket("1"), ket("0"));
    CHECK(v.amps()(2) == Complex(1.0));
}
