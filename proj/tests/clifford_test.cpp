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

#include "zne/clifford.hpp"

#include <gtest/gtest.h>

#include <map>
#include <numbers>

#include "test_util.hpp"

using namespace zne;
using zne::testing::Mat;
using zne::testing::oracle_pauli;

namespace {

/// Dense exp(-i pi/4 G) per quarter turn, built from the Kronecker oracle.
Mat dense_native(const NativeGate &g, std::size_t n) {
    const Mat p = oracle_pauli(g.generator(n).str());
    const double angle = std::numbers::pi / 4 * (g.kind == NativeKind::Z90 ? g.quarter_turns : 1);
    return std::cos(angle) * Mat::Identity(p.rows(), p.cols()) - std::complex<double>(0, std::sin(angle)) * p;
}

Mat dense_word(const std::vector<NativeGate> &word, std::size_t n) {
    Mat u = Mat::Identity(1 << n, 1 << n);
    for (const auto &g : word) u = dense_native(g, n) * u;
    return u;
}

/// Checks U P U^+ = image for every generator, in dense arithmetic.
bool dense_matches(const Mat &u, const CliffordTableau &t) {
    const std::size_t n = t.n_qubits();
    for (std::size_t q = 0; q < n; ++q)
        for (Axis a : {Axis::X, Axis::Z}) {
            const auto p = PauliString::single(n, q, a);
            const auto img = t.apply({false, p});
            const Mat lhs = u * oracle_pauli(p.str()) * u.adjoint();
            const Mat rhs = (img.negative ? -1.0 : 1.0) * oracle_pauli(img.string.str());
            if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-12) return false;
        }
    return true;
}

}  // namespace

TEST(CliffordTableau, HadamardLikeExampleAndConjugationRule) {
    // Z90 X90 Z90 maps X -> Z and Z -> X (a Hadamard up to phase).
    const auto h = clifford_of({NativeGate::z90(0), NativeGate::x90(0), NativeGate::z90(0)}, 1);
    EXPECT_EQ(h.x_image(0).str(), "+Z");
    EXPECT_EQ(h.z_image(0).str(), "+X");
    // X90: Z -> -Y.
    const auto x = clifford_of({NativeGate::x90(0)}, 1);
    EXPECT_EQ(x.z_image(0).str(), "-Y");
    EXPECT_EQ(x.x_image(0).str(), "+X");
    // ZX90 maps IZ -> ZY and XI -> YX with signs from exp(-i pi/4 ZX).
    const auto zx = clifford_of({NativeGate::zx90(0, 1)}, 2);
    EXPECT_TRUE(dense_matches(dense_word({NativeGate::zx90(0, 1)}, 2), zx));
}

TEST(CliffordTableau, FromImagesRejectsNonSymplecticMaps) {
    EXPECT_NO_THROW(CliffordTableau::from_images({{false, PauliString("Z")}, {true, PauliString("X")}}));
    EXPECT_THROW(CliffordTableau::from_images({{false, PauliString("X")}, {false, PauliString("X")}}), UsageError);
    EXPECT_THROW(CliffordTableau::from_images(
                     {{false, PauliString("XI")}, {false, PauliString("ZI")}, {false, PauliString("XI")}, {false, PauliString("IZ")}}),
                 UsageError);
}

TEST(CliffordGroup, SingleQubitGroupHas24ElementsWithAtMostTwoPulses) {
    const auto &g = CliffordGroup::get(1);
    ASSERT_EQ(g.size(), 24u);
    EXPECT_TRUE(g.element(0).is_identity());
    std::map<std::size_t, int> by_pulses;
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_EQ(clifford_of(g.word(i), 1), g.element(i)) << i;
        EXPECT_TRUE(dense_matches(dense_word(g.word(i), 1), g.element(i))) << i;
        EXPECT_LE(g.pulse_count(i), 2u);
        ++by_pulses[g.pulse_count(i)];
    }
    // Z frames alone reach 4 elements, Z X90 Z words 16 more, and the 4
    // elements sending Z to -Z through a pi rotation need two pulses.
    EXPECT_EQ(by_pulses[0], 4);
    EXPECT_EQ(by_pulses[1], 16);
    EXPECT_EQ(by_pulses[2], 4);
}

TEST(CliffordGroup, TwoQubitGroupHas11520ElementsInFourEntanglingClasses) {
    const auto &g = CliffordGroup::get(2);
    ASSERT_EQ(g.size(), 11520u);
    std::map<std::size_t, int> classes;
    for (std::size_t i = 0; i < g.size(); ++i) {
        ASSERT_EQ(clifford_of(g.word(i), 2), g.element(i)) << i;
        ASSERT_TRUE(g.element(i).is_symplectic());
        ++classes[g.entangler_count(i)];
    }
    // Local, CNOT-like, iSWAP-like and SWAP-like classes.
    EXPECT_EQ(classes[0], 576);
    EXPECT_EQ(classes[1], 5184);
    EXPECT_EQ(classes[2], 5184);
    EXPECT_EQ(classes[3], 576);
}

TEST(CliffordGroup, WordsMatchDenseUnitariesOnASample) {
    const auto &g = CliffordGroup::get(2);
    for (std::size_t i = 0; i < g.size(); i += 37) EXPECT_TRUE(dense_matches(dense_word(g.word(i), 2), g.element(i))) << i;
}

TEST(CliffordGroup, InverseComposesToIdentity) {
    for (std::size_t n : {1u, 2u}) {
        const auto &g = CliffordGroup::get(n);
        RandomStream rng(17, {n});
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t i = g.sample(rng);
            const auto inv = g.element(g.inverse_index(i));
            EXPECT_TRUE(g.element(i).then(inv).is_identity());
            EXPECT_TRUE(inv.then(g.element(i)).is_identity());
        }
    }
}

TEST(CliffordGroup, CompositionIsAssociativeAndMatchesDenseProducts) {
    const auto &g = CliffordGroup::get(2);
    RandomStream rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = g.sample(rng), b = g.sample(rng), c = g.sample(rng);
        const auto &ta = g.element(a), &tb = g.element(b), &tc = g.element(c);
        EXPECT_EQ(ta.then(tb).then(tc), ta.then(tb.then(tc)));
        const Mat u = dense_word(g.word(b), 2) * dense_word(g.word(a), 2);
        EXPECT_TRUE(dense_matches(u, ta.then(tb)));
    }
}

TEST(CliffordGroup, SingleQubitSamplingIsUniform) {
    const auto &g = CliffordGroup::get(1);
    RandomStream rng(2026);
    const int draws = 10000;
    std::vector<int> counts(g.size(), 0);
    for (int k = 0; k < draws; ++k) ++counts[g.sample(rng)];
    const double expected = static_cast<double>(draws) / 24.0;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    // Chi-square with 23 degrees of freedom: p = 0.001 at 49.73.
    EXPECT_LT(chi2, 49.73);
}

TEST(MergeVirtualZ, CombinesFramesAndDropsFullTurns) {
    const auto merged = merge_virtual_z({NativeGate::z90(0), NativeGate::z90(1), NativeGate::z90(0, 3),
                                         NativeGate::x90(0), NativeGate::z90(0), NativeGate::z90(0)},
                                        2);
    ASSERT_EQ(merged.size(), 3u);
    EXPECT_EQ(merged[0], NativeGate::z90(1));
    EXPECT_EQ(merged[1], NativeGate::x90(0));
    EXPECT_EQ(merged[2], NativeGate::z90(0, 2));
}
