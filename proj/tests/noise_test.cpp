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

#include "zne/noise.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "zne/simulator.hpp"

using namespace zne;

namespace {

DensityMatrix plus_state() {
    Vector psi(2);
    psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    return DensityMatrix::pure(1, psi);
}

}  // namespace

TEST(Dissipators, UniformModelProducesDampingAndDephasing) {
    const auto diss = dissipators_for(NoiseModel::uniform(1, 10.0, 15.0), 1);
    ASSERT_EQ(diss.size(), 2u);
    EXPECT_EQ(diss[0].label, "T1:q0");
    EXPECT_DOUBLE_EQ(diss[0].rate, 0.1);
    EXPECT_EQ(diss[0].op(0, 1), complex(1, 0));
    EXPECT_EQ(diss[1].label, "Tphi:q0");
    EXPECT_NEAR(diss[1].rate, 0.5 * (1.0 / 15.0 - 0.05), 1e-15);

    // T2 = 2 T1 leaves no pure dephasing.
    EXPECT_EQ(dissipators_for(NoiseModel::uniform(2, 10.0, 20.0), 2).size(), 2u);
    EXPECT_TRUE(dissipators_for(NoiseModel::none(3), 3).empty());
    EXPECT_THROW(dissipators_for(NoiseModel::none(2), 3), UsageError);
}

TEST(Dissipators, CoherenceDecaysAtOneOverT2) {
    const double t1 = 30.0, t2 = 20.0;
    const auto diss = dissipators_for(NoiseModel::uniform(1, t1, t2), 1);
    const auto out = idle(plus_state(), t2, diss);
    EXPECT_NEAR(expectation(out, PauliString("X")), std::exp(-1.0), 1e-6);
}

TEST(Dissipators, DepolarizingRelaxesToMaximallyMixedState) {
    const double p = 0.5;
    const auto diss = dissipators_for(NoiseModel::depolarizing(1, p), 1);
    ASSERT_EQ(diss.size(), 3u);
    const auto out = idle(DensityMatrix::basis_state(1, 1), 20.0 / p, diss);
    EXPECT_LT((out.matrix() - DensityMatrix::maximally_mixed(1).matrix()).cwiseAbs().maxCoeff(), 1e-8);
    // Bloch vector shrinks as exp(-p t).
    const auto partial = idle(plus_state(), 1.0, diss);
    EXPECT_NEAR(expectation(partial, PauliString("X")), std::exp(-p), 1e-8);
}

TEST(NoiseModel, ValidationNamesTheViolatedRule) {
    NoiseModel m = NoiseModel::none(2);
    m.per_qubit[1] = {10.0, 25.0};
    ASSERT_EQ(m.violations().size(), 1u);
    EXPECT_EQ(m.violations()[0], "noise.t2_exceeds_2t1");
    EXPECT_THROW(NoiseModel::uniform(1, 10.0, 25.0), ValidationError);
    EXPECT_NO_THROW(NoiseModel::uniform(1, 10.0, 20.0));

    m.per_qubit[1] = {-1.0, 1.0};
    EXPECT_EQ(m.violations()[0], "noise.nonpositive_time");
    m = NoiseModel::none(1);
    m.depolarizing_rate = -0.1;
    EXPECT_EQ(m.violations()[0], "noise.negative_rate");
    m = NoiseModel::none(1);
    m.confusion = ConfusionMatrix::identity(2);
    EXPECT_EQ(m.violations()[0], "noise.confusion_size");
}

TEST(NoiseModel, AmplificationComposesMultiplicatively) {
    NoiseModel m = NoiseModel::uniform(2, 40.0, 30.0);
    m.depolarizing_rate = 0.01;
    const auto twice = m.amplified(1.5).amplified(2.0);
    const auto once = m.amplified(3.0);
    const auto a = dissipators_for(twice, 2), b = dissipators_for(once, 2);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k].rate, b[k].rate, 1e-15);
    const auto base = dissipators_for(m, 2);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k].rate, 3.0 * base[k].rate, 1e-15);
    EXPECT_TRUE(dissipators_for(m.amplified(0.0), 2).empty());
}

TEST(DriftProfile, MultiplierIsPiecewiseConstantInWallIndex) {
    const DriftProfile d({{2, 1.5}, {5, 0.8}});
    EXPECT_DOUBLE_EQ(d.multiplier(0), 1.0);
    EXPECT_DOUBLE_EQ(d.multiplier(2), 1.5);
    EXPECT_DOUBLE_EQ(d.multiplier(4), 1.5);
    EXPECT_DOUBLE_EQ(d.multiplier(9), 0.8);
    EXPECT_THROW(DriftProfile({{3, 1.0}, {3, 2.0}}), ValidationError);
    EXPECT_THROW(DriftProfile({{0, 0.0}}), ValidationError);

    NoiseModel m = NoiseModel::uniform(1, 10.0, 10.0);
    m.drift = d;
    EXPECT_DOUBLE_EQ(m.at_wall_index(3).per_qubit[0].t1, 10.0 / 1.5);
    EXPECT_FALSE(m.at_wall_index(3).drift.has_value());
}

TEST(ConfusionMatrix, PerQubitUsesLeftmostQubitAsMostSignificantBit) {
    const auto c = ConfusionMatrix::per_qubit({{0.1, 0.0}, {0.0, 0.0}});
    // True |00>: qubit 0 misread as 1 gives outcome "10" = index 2.
    EXPECT_DOUBLE_EQ(c(2, 0), 0.1);
    EXPECT_DOUBLE_EQ(c(1, 0), 0.0);
    const auto s = ConfusionMatrix::symmetric_flip(3, 0.02);
    for (Eigen::Index j = 0; j < 8; ++j) EXPECT_NEAR(s.matrix().col(j).sum(), 1.0, 1e-15);
    EXPECT_NEAR(s(0, 0), 0.98 * 0.98 * 0.98, 1e-15);
}

TEST(ConfusionMatrix, CsvParsingAndValidation) {
    std::istringstream ok("0.9,0.2\n0.1,0.8\n");
    const auto c = ConfusionMatrix::from_csv(ok);
    EXPECT_EQ(c.n_qubits(), 1u);
    EXPECT_DOUBLE_EQ(c(0, 1), 0.2);

    std::istringstream bad_sum("0.9,0.2\n0.2,0.8\n");
    EXPECT_THROW(ConfusionMatrix::from_csv(bad_sum), ValidationError);
    std::istringstream bad_shape("1,0,0\n0,1,0\n0,0,1\n");
    EXPECT_THROW(ConfusionMatrix::from_csv(bad_shape), ValidationError);
    std::istringstream bad_number("1,x\n0,1\n");
    EXPECT_THROW(ConfusionMatrix::from_csv(bad_number), ValidationError);
    Eigen::MatrixXd negative(2, 2);
    negative << 1.1, 0.0, -0.1, 1.0;
    EXPECT_THROW(ConfusionMatrix(1, negative), ValidationError);
}
