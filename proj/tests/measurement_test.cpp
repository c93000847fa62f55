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

#include "zne/measurement.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_util.hpp"
#include "zne/extrapolation.hpp"

using namespace zne;

namespace {

/// One-qubit state with <Z> = z and no coherences.
DensityMatrix z_state(double z) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 0.5 * (1 + z);
    m(1, 1) = 0.5 * (1 - z);
    return DensityMatrix(1, m);
}

double z_from(const Eigen::VectorXd &p) { return parity_expectation(p, 1u); }

double z_from(const CountsTable &t) { return z_from(t.frequencies()); }

/// First-order mitigated <Z> from tables at stretch 1 and 2.
double first_order(const std::vector<CountsTable> &t) {
    const std::vector<StretchMeasurement> m{{1.0, z_from(t[0]), 0.0}, {2.0, z_from(t[1]), 0.0}};
    return extrapolate(m).value;
}

std::vector<CountsTable> two_stretch_tables(std::uint64_t shots, std::uint64_t seed) {
    RandomStream a(seed, {1}), b(seed, {2});
    return {sample_counts(z_state(0.8), shots, a), sample_counts(z_state(0.64), shots, b)};
}

}  // namespace

TEST(Sampling, PureGroundStateGivesOnlyZeros) {
    RandomStream rng(3);
    const auto t = sample_counts(DensityMatrix::ground(1), 1234, rng);
    EXPECT_EQ(t.counts[0], 1234u);
    EXPECT_EQ(t.counts[1], 0u);
    EXPECT_EQ(t.shots(), 1234u);
    EXPECT_THROW(sample_counts(DensityMatrix::ground(1), 0, rng), UsageError);
}

TEST(Sampling, MaximallyMixedIsBalancedWithinFiveSigma) {
    RandomStream rng(11);
    const std::uint64_t shots = 100000;
    const auto t = sample_counts(DensityMatrix::maximally_mixed(1), shots, rng);
    const double sigma = std::sqrt(0.25 / shots);
    EXPECT_NEAR(t.frequencies()(0), 0.5, 5 * sigma);
    EXPECT_EQ(t.shots(), shots);
}

TEST(Sampling, BasisRotationReadsTheRequestedPauli) {
    // |+i> on qubit 0, |-> on qubit 1.
    Vector plus_i(2), minus(2);
    plus_i << 1.0 / std::sqrt(2.0), complex(0, 1.0 / std::sqrt(2.0));
    minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
    const Vector psi = zne::testing::kron(plus_i, minus);
    const auto rho = DensityMatrix::pure(2, psi);
    const PauliString setting("YX");
    const auto rotated = apply_unitary(rho, basis_rotation(setting).unitary());
    const Eigen::VectorXd p = measurement_distribution(rotated);
    EXPECT_NEAR(parity_expectation(p, 0b10), 1.0, 1e-12);
    EXPECT_NEAR(parity_expectation(p, 0b01), -1.0, 1e-12);
    EXPECT_NEAR(parity_expectation(p, 0b11), expectation(rho, setting), 1e-12);
}

TEST(Sampling, EstimatorErrorShrinksAsInverseSqrtShots) {
    const Vector psi = (Vector(2) << complex(0.8, 0.0), complex(0.36, 0.48)).finished();
    const auto rho = DensityMatrix::pure(1, psi);
    const double exact = expectation(rho, PauliString("X"));
    const Circuit rot = basis_rotation(PauliString("X"));
    std::vector<double> log_n, log_rms;
    for (std::uint64_t shots : {100u, 400u, 1600u, 6400u, 25600u}) {
        double ss = 0.0;
        const int seeds = 60;
        for (int s = 0; s < seeds; ++s) {
            RandomStream rng(static_cast<std::uint64_t>(s), {shots});
            const double e = z_from(sample_counts(rho, rot, shots, rng));
            ss += (e - exact) * (e - exact);
        }
        log_n.push_back(std::log(static_cast<double>(shots)));
        log_rms.push_back(0.5 * std::log(ss / seeds));
    }
    const Eigen::Map<Eigen::VectorXd> x(log_n.data(), 5), y(log_rms.data(), 5);
    const double slope = ((x.array() - x.mean()) * (y.array() - y.mean())).sum() / (x.array() - x.mean()).square().sum();
    EXPECT_NEAR(slope, -0.5, 0.1);
}

TEST(Sampling, SameSeedSameCounts) {
    const auto rho = DensityMatrix::maximally_mixed(3);
    RandomStream a(99, {4}), b(99, {4}), c(100, {4});
    const auto ta = sample_counts(rho, 5000, a), tb = sample_counts(rho, 5000, b), tc = sample_counts(rho, 5000, c);
    EXPECT_EQ(ta, tb);
    EXPECT_NE(ta, tc);
}

TEST(Confusion, IdentityLeavesCountsUnchanged) {
    RandomStream rng(5);
    const auto t = sample_counts(DensityMatrix::maximally_mixed(2), 777, rng);
    EXPECT_EQ(apply_confusion(t, ConfusionMatrix::identity(2), rng).counts, t.counts);
}

TEST(Confusion, FullFlipScramblesOutcomes) {
    RandomStream rng(6);
    const std::uint64_t shots = 100000;
    const auto t = sample_counts(DensityMatrix::ground(1), shots, rng);
    const auto read = apply_confusion(t, ConfusionMatrix::symmetric_flip(1, 0.5), rng);
    EXPECT_NEAR(read.frequencies()(0), 0.5, 5 * std::sqrt(0.25 / shots));
    EXPECT_EQ(read.shots(), shots);
}

TEST(Confusion, SymmetricFlipAttenuatesZ) {
    RandomStream rng(7);
    const std::uint64_t shots = 200000;
    const auto t = sample_counts(DensityMatrix::ground(1), shots, rng);
    const double z = z_from(apply_confusion(t, ConfusionMatrix::symmetric_flip(1, 0.02), rng));
    // Binomial spread of a flip count at p = 0.02.
    const double sigma = 2 * std::sqrt(0.02 * 0.98 / shots);
    EXPECT_NEAR(z, 0.96, 5 * sigma);
}

TEST(Correction, IdentityMatrixReturnsFrequencies) {
    RandomStream rng(8);
    const auto t = sample_counts(DensityMatrix::maximally_mixed(2), 1000, rng);
    EXPECT_LT((correct_readout(t, ConfusionMatrix::identity(2)) - t.frequencies()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Correction, RoundTripRecoversZWithinShotNoise) {
    const double z_true = 0.6;
    const std::uint64_t shots = 20000;
    const auto m = ConfusionMatrix::symmetric_flip(1, 0.02);
    double mean_error = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomStream rng(seed, {0xc0});
        const auto read = apply_confusion(sample_counts(z_state(z_true), shots, rng), m, rng);
        const double zm = z_from(read);
        const double z = z_from(correct_readout(read, m));
        const double sigma = std::sqrt((1 - zm * zm) / shots) / 0.96;
        EXPECT_NEAR(z, z_true, 3 * sigma) << "seed " << seed;
        mean_error += (z - z_true) / 20.0;
    }
    EXPECT_LT(std::abs(mean_error), 3 * std::sqrt((1 - 0.576 * 0.576) / shots) / 0.96 / std::sqrt(20.0));
}

TEST(Correction, InfeasibleInputIsProjectedOntoSimplex) {
    const auto m = ConfusionMatrix::symmetric_flip(2, 0.1);
    // All shots on "00" lies outside the image of the simplex under m.
    Eigen::VectorXd f = Eigen::VectorXd::Zero(4);
    f(0) = 1.0;
    const Eigen::VectorXd raw = m.matrix().partialPivLu().solve(f);
    ASSERT_LT(raw.minCoeff(), 0.0);
    const Eigen::VectorXd p = correct_readout(f, m);
    EXPECT_GE(p.minCoeff(), 0.0);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_NEAR(p(0), 1.0, 1e-12);
}

TEST(Correction, SimplexProjectionMatchesBruteForce) {
    // Projection minimises Euclidean distance: compare against a grid search on the 2-simplex.
    const Eigen::Vector3d v(0.9, 0.4, -0.6);
    const Eigen::VectorXd p = project_to_simplex(v);
    double best = 1e9;
    for (int i = 0; i <= 400; ++i)
        for (int j = 0; i + j <= 400; ++j) {
            const Eigen::Vector3d q(i / 400.0, j / 400.0, (400 - i - j) / 400.0);
            best = std::min(best, (q - v).norm());
        }
    EXPECT_LE((p - Eigen::VectorXd(v)).norm(), best + 1e-12);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
}

TEST(Correction, SingularMatrixIsANumericalError) {
    EXPECT_THROW(correct_readout(Eigen::Vector2d(0.5, 0.5), ConfusionMatrix::symmetric_flip(1, 0.5)), NumericalError);
}

TEST(Correction, EstimatedConfusionFromCalibrationCounts) {
    const auto truth = ConfusionMatrix::per_qubit({{0.02, 0.05}, {0.01, 0.03}});
    RandomStream rng(21);
    const auto cal = calibration_counts(truth, 200000, rng);
    ASSERT_EQ(cal.size(), 4u);
    EXPECT_EQ(cal[2].setting, "cal:10");
    const auto est = estimate_confusion(cal);
    EXPECT_LT((est.matrix() - truth.matrix()).cwiseAbs().maxCoeff(), 5 * std::sqrt(0.25 / 200000));
}

TEST(Bootstrap, DeterministicCountsHaveZeroSpread) {
    std::vector<CountsTable> raw(2, CountsTable::empty(1));
    raw[0].counts[0] = 1000;
    raw[1].counts[1] = 1000;
    const auto b = bootstrap(raw, first_order, 50, 1);
    EXPECT_EQ(b.std, 0.0);
    EXPECT_DOUBLE_EQ(b.mean, 2 * 1.0 - (-1.0));
    EXPECT_EQ(b.replicas.size(), 50u);
    EXPECT_THROW(bootstrap(raw, first_order, 1, 1), UsageError);
}

TEST(Bootstrap, SpreadMatchesPropagatedVariance) {
    const std::uint64_t shots = 100000;
    const auto raw = two_stretch_tables(shots, 17);
    const auto b = bootstrap(raw, first_order, 100, 23);
    const double z1 = z_from(raw[0]), z2 = z_from(raw[1]);
    const std::vector<double> gamma{2.0, -1.0};
    const std::vector<double> var{(1 - z1 * z1) / shots, (1 - z2 * z2) / shots};
    EXPECT_NEAR(b.std / std::sqrt(variance_of(gamma, var)), 1.0, 0.2);
}

TEST(Bootstrap, DoublingShotsShrinksSpreadBySqrt2) {
    double ratio = 0.0;
    const int seeds = 5;
    for (int s = 0; s < seeds; ++s) {
        const auto small = bootstrap(two_stretch_tables(50000, 100 + s), first_order, 100, 7 + s);
        const auto large = bootstrap(two_stretch_tables(100000, 200 + s), first_order, 100, 7 + s);
        ratio += small.std / large.std / seeds;
    }
    EXPECT_NEAR(ratio / std::sqrt(2.0), 1.0, 0.15);
}

TEST(Bootstrap, MeanOfPlainExpectationIsConsistent) {
    const auto raw = two_stretch_tables(20000, 3);
    const auto b = bootstrap(raw, [](const auto &t) { return z_from(t[0]); }, 100, 4);
    EXPECT_NEAR(b.mean, z_from(raw[0]), 3 * b.std / std::sqrt(100.0));
}

TEST(Bootstrap, CalibrationTablesAreResampledToo) {
    const auto m = ConfusionMatrix::symmetric_flip(1, 0.05);
    RandomStream rng(31);
    std::vector<CountsTable> raw = calibration_counts(m, 5000, rng);
    raw.push_back(apply_confusion(sample_counts(z_state(0.7), 5000, rng), m, rng));
    const auto corrected = [](const std::vector<CountsTable> &t) {
        return z_from(correct_readout(t[2], estimate_confusion({t[0], t[1]})));
    };
    const auto with_cal = bootstrap(raw, corrected, 100, 5);
    // Freezing calibration removes its share of the spread.
    const auto frozen = [&](const std::vector<CountsTable> &t) {
        return z_from(correct_readout(t[2], estimate_confusion({raw[0], raw[1]})));
    };
    const auto without_cal = bootstrap(raw, frozen, 100, 5);
    EXPECT_GT(with_cal.std, without_cal.std);
}

TEST(Bootstrap, FailuresAreCountedAndTooManyAbort) {
    const auto raw = two_stretch_tables(1000, 1);
    int calls = 0;
    const auto sometimes = [&](const auto &t) {
        if (++calls % 20 == 0) throw NumericalError("replica failed", 0.0);
        return z_from(t[0]);
    };
    const auto b = bootstrap(raw, sometimes, 100, 2);
    EXPECT_EQ(b.failures, 5u);
    EXPECT_EQ(b.replicas.size(), 95u);
    calls = 0;
    const auto often = [&](const auto &t) {
        if (++calls % 5 == 0) throw NumericalError("replica failed", 0.0);
        return z_from(t[0]);
    };
    EXPECT_THROW(bootstrap(raw, often, 100, 2), NumericalError);
}

TEST(Bootstrap, ResultsAreReproducible) {
    const auto raw = two_stretch_tables(10000, 8);
    const auto a = bootstrap(raw, first_order, 60, 9), b = bootstrap(raw, first_order, 60, 9);
    EXPECT_EQ(a.replicas, b.replicas);
    EXPECT_EQ(a.std, b.std);
    EXPECT_TRUE(std::is_sorted(a.replicas.begin(), a.replicas.end()));
}

TEST(CountsCsv, RoundTrip) {
    RandomStream rng(12);
    const auto t = sample_counts(DensityMatrix::maximally_mixed(2), 321, rng, "ZZ");
    std::ostringstream out;
    write_counts_csv(out, t);
    EXPECT_EQ(out.str().substr(0, 14), "outcome,count\n");
    std::istringstream in(out.str());
    EXPECT_EQ(read_counts_csv(in, "ZZ"), t);
    std::istringstream bad("outcome,count\n0a,3\n");
    EXPECT_THROW(read_counts_csv(bad), UsageError);
}
