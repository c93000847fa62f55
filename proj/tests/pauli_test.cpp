// Copyright 2026 The zne-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "zne/pauli.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "zne/density_matrix.hpp"

using namespace zne;
using zne::testing::oracle_pauli;

namespace {

std::vector<std::string> all_strings(std::size_t n) {
    std::vector<std::string> out{""};
    for (std::size_t q = 0; q < n; ++q) {
        std::vector<std::string> next;
        for (const auto &s : out)
            for (char c : std::string("IXYZ")) next.push_back(s + c);
        out = std::move(next);
    }
    return out;
}

}  // namespace

TEST(PauliString, ParsesAndPrints) {
    PauliString p("xYzI");
    EXPECT_EQ(p.str(), "XYZI");
    EXPECT_EQ(p.size(), 4u);
    EXPECT_EQ(p.weight(), 3u);
    EXPECT_FALSE(p.is_identity());
    EXPECT_TRUE(PauliString("III").is_identity());
    EXPECT_THROW(PauliString("XQ"), UsageError);
    EXPECT_THROW(PauliString(""), UsageError);
    EXPECT_THROW(PauliString("XXXXXX"), CapacityError);
}

TEST(PauliMultiply, ExamplesFromSingleQubitAlgebra) {
    auto xy = multiply(PauliString("X"), PauliString("Y"));
    EXPECT_EQ(xy.phase.value(), complex(0, 1));
    EXPECT_EQ(xy.product.str(), "Z");

    auto disjoint = multiply(PauliString("XI"), PauliString("IX"));
    EXPECT_EQ(disjoint.phase.value(), complex(1, 0));
    EXPECT_EQ(disjoint.product.str(), "XX");

    auto inv = multiply(PauliString("ZZ"), PauliString("ZZ"));
    EXPECT_EQ(inv.phase.value(), complex(1, 0));
    EXPECT_EQ(inv.product.str(), "II");
}

TEST(PauliMultiply, LengthMismatchIsUsageError) {
    EXPECT_THROW(multiply(PauliString("X"), PauliString("XX")), UsageError);
}

TEST(PauliMultiply, SelfProductIsIdentityForAllStrings) {
    for (const auto &s : all_strings(3)) {
        auto r = multiply(PauliString(s), PauliString(s));
        EXPECT_EQ(r.phase, Phase::one()) << s;
        EXPECT_TRUE(r.product.is_identity()) << s;
    }
}

TEST(PauliMultiply, MatchesDenseProductExhaustively) {
    // N = 1 and 2 exhaustively, N = 3 on random pairs.
    for (std::size_t n : {1u, 2u}) {
        for (const auto &a : all_strings(n))
            for (const auto &b : all_strings(n)) {
                auto r = multiply(PauliString(a), PauliString(b));
                const Matrix lhs = r.phase.value() * oracle_pauli(r.product.str());
                const Matrix rhs = oracle_pauli(a) * oracle_pauli(b);
                ASSERT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-15) << a << "*" << b;
            }
    }
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        auto a = zne::testing::random_pauli_string(rng, 3), b = zne::testing::random_pauli_string(rng, 3);
        auto r = multiply(PauliString(a), PauliString(b));
        const Matrix lhs = r.phase.value() * dense_matrix(r.product);
        ASSERT_LT((lhs - dense_matrix(PauliString(a)) * dense_matrix(PauliString(b))).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(PauliMultiply, ReversedOrderDiffersBySignFromAnticommutationCount) {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + trial % 5;
        PauliString a(zne::testing::random_pauli_string(rng, n)), b(zne::testing::random_pauli_string(rng, n));
        auto ab = multiply(a, b), ba = multiply(b, a);
        ASSERT_EQ(ab.product, ba.product);
        int anti = 0;
        for (std::size_t q = 0; q < n; ++q)
            if (a[q] != Axis::I && b[q] != Axis::I && a[q] != b[q]) ++anti;
        const Phase expected = (anti % 2 == 0) ? Phase::one() : Phase::minus_one();
        EXPECT_EQ(ab.phase * Phase{(4 - ba.phase.power) & 3}, expected);
        EXPECT_EQ(commutes(a, b), anti % 2 == 0);
    }
}

TEST(DenseMatrix, Examples) {
    const Matrix z = dense_matrix(PauliSum(1.0, "Z"), 1);
    EXPECT_EQ(z(0, 0), complex(1, 0));
    EXPECT_EQ(z(1, 1), complex(-1, 0));
    EXPECT_EQ(z(0, 1), complex(0, 0));

    const Matrix xx = dense_matrix(PauliSum(1.0, "XX"), 2);
    Matrix anti = Matrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) anti(i, 3 - i) = 1.0;
    EXPECT_EQ((xx - anti).cwiseAbs().maxCoeff(), 0.0);

    EXPECT_TRUE(dense_matrix(PauliSum(1.0, "III"), 3).isApprox(Matrix::Identity(8, 8)));
    EXPECT_THROW(dense_matrix(PauliSum(1.0, "XX"), 3), UsageError);
}

TEST(DenseMatrix, MatchesKroneckerOracleForAllTwoQubitStrings) {
    for (const auto &s : all_strings(2)) {
        EXPECT_LT((dense_matrix(PauliString(s)) - oracle_pauli(s)).cwiseAbs().maxCoeff(), 1e-15) << s;
    }
}

TEST(DenseMatrix, RejectsOversizedRegister) {
    EXPECT_THROW(check_register(6), CapacityError);
    EXPECT_THROW(DensityMatrix::ground(6), CapacityError);
}

TEST(DenseMatrix, HeisenbergRingGroundEnergyFromExactDiagonalization) {
    // Ring with J = 1, B = 0 assembled from the text format.
    const PauliSum h = parse_pauli_sum(
        "1 XXII\n1 YYII\n1 ZZII\n1 IXXI\n1 IYYI\n1 IZZI\n1 IIXX\n1 IIYY\n1 IIZZ\n1 XIIX\n1 YIIY\n1 ZIIZ\n");
    const Matrix m = dense_matrix(h, 4);
    EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((m - zne::testing::oracle_heisenberg_ring(1.0, 0.0)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(zne::testing::oracle_ground_energy(m), -8.0, 1e-10);
}

TEST(PauliSum, NormalizationMergesAndDrops) {
    PauliSum s({{0.5, PauliString("XZ")}, {0.25, PauliString("XZ")}, {1e-16, PauliString("YY")}, {-1.0, PauliString("II")}});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.terms()[0].string.str(), "II");
    EXPECT_DOUBLE_EQ(s.terms()[1].coefficient, 0.75);
    EXPECT_DOUBLE_EQ(s.identity_coefficient(), -1.0);
    EXPECT_EQ(s.n_qubits(), 2u);
    EXPECT_THROW(PauliSum({{1.0, PauliString("X")}, {1.0, PauliString("XX")}}), UsageError);
    EXPECT_THROW(PauliSum(std::nan(""), "X"), UsageError);
}

TEST(PauliSum, TextFormatParsesCommentsAndRoundTrips) {
    const auto s = parse_pauli_sum("# header\n0.25 ZZII   # bond\n\n -0.5 iixi\n0.25 ZZII\n");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.n_qubits(), 4u);
    EXPECT_EQ(parse_pauli_sum(format_pauli_sum(s)), s);
    EXPECT_THROW(parse_pauli_sum("abc XX\n"), UsageError);
    EXPECT_THROW(parse_pauli_sum("1.0\n"), UsageError);
    EXPECT_THROW(parse_pauli_sum("# nothing\n"), UsageError);
    EXPECT_THROW(parse_pauli_sum("1 X\n1 XX\n"), UsageError);
}

TEST(Expectation, Examples) {
    EXPECT_DOUBLE_EQ(expectation(DensityMatrix::ground(1), PauliSum(1.0, "Z")), 1.0);

    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    const auto phi = DensityMatrix::pure(2, bell);
    EXPECT_NEAR(expectation(phi, PauliSum(1.0, "ZZ")), 1.0, 1e-15);
    EXPECT_NEAR(expectation(phi, PauliSum(1.0, "XX")), 1.0, 1e-15);
    EXPECT_NEAR(expectation(phi, PauliSum(1.0, "YY")), -1.0, 1e-15);

    const auto mixed = DensityMatrix::maximally_mixed(2);
    for (const auto &s : all_strings(2)) {
        if (s == "II") continue;
        EXPECT_NEAR(expectation(mixed, PauliString(s)), 0.0, 1e-15) << s;
    }
    EXPECT_THROW(expectation(mixed, PauliString("Z")), UsageError);
}

TEST(Expectation, MatchesTraceOracleAndIsLinear) {
    std::mt19937 rng(3);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        Vector psi(8);
        for (int i = 0; i < 8; ++i) psi(i) = complex(g(rng), g(rng));
        const auto rho = DensityMatrix::pure(3, psi);
        PauliString a(zne::testing::random_pauli_string(rng, 3)), b(zne::testing::random_pauli_string(rng, 3));
        const double ea = expectation(rho, a), eb = expectation(rho, b);
        EXPECT_NEAR(ea, (rho.matrix() * oracle_pauli(a.str())).trace().real(), 1e-12);
        const double alpha = g(rng), beta = g(rng);
        PauliSum combo({{alpha, a}, {beta, b}});
        EXPECT_NEAR(expectation(rho, combo), alpha * ea + beta * eb, 1e-12);
    }
}
