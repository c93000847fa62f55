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

#include "zne/simulator.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "test_util.hpp"
#include "zne/serialization.hpp"

using namespace zne;
using std::numbers::pi;

namespace {

double max_abs_diff(const DensityMatrix &a, const DensityMatrix &b) {
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

/// Random two-qubit pulse circuit mixing flat and Gaussian drives.
Circuit random_circuit(std::mt19937 &rng, std::size_t n_gates = 6) {
    std::uniform_real_distribution<double> angle(-pi, pi), dur(0.5, 2.0);
    std::uniform_int_distribution<int> kind(0, 4);
    const char *axes[] = {"XI", "IX", "YI", "IY", "ZX", "XZ"};
    Circuit c(2, 0.1);
    for (std::size_t g = 0; g < n_gates; ++g) {
        const int k = kind(rng);
        if (k == 0) {
            c.add(InstantGate{PauliSum(0.5 * angle(rng), k % 2 ? "ZI" : "IZ"), "z"});
            continue;
        }
        const double t = dur(rng);
        const char *ax = axes[std::uniform_int_distribution<int>(0, 5)(rng)];
        Envelope env = (k == 4) ? Envelope::gaussian(t, angle(rng), 40) : Envelope::flat(t, angle(rng) / t);
        c.add(PulseGate(PauliSum(1.0, ax), env, ax));
    }
    return c;
}

Vector random_state(std::mt19937 &rng, int dim) {
    std::normal_distribution<double> g;
    Vector psi(dim);
    for (int i = 0; i < dim; ++i) psi(i) = complex(g(rng), g(rng));
    return psi;
}

}  // namespace

TEST(Evolve, AmplitudeDampingMatchesExponentialDecay) {
    const double t1 = 7.0;
    std::vector<Dissipator> diss{{embed_single(lowering_operator(), 0, 1), 1.0 / t1, "T1"}};
    PulseGate wait(PauliSum(), Envelope::flat(t1, 0.0), "wait");
    const auto out = evolve(DensityMatrix::basis_state(1, 1), wait, diss);
    EXPECT_NEAR(out.matrix()(1, 1).real(), std::exp(-1.0), 1e-6);
    EXPECT_TRUE(out.violation().empty());
}

TEST(Evolve, RabiHalfRotationFlipsQubit) {
    PulseGate pulse(PauliSum(pi / 2, "X"), Envelope::flat(1.0, 1.0), "rabi");
    const auto out = evolve(DensityMatrix::ground(1), pulse, {});
    EXPECT_NEAR(expectation(out, PauliString("Z")), -1.0, 1e-8);
}

TEST(Evolve, RejectsNegativeRatesAndMismatchedShapes) {
    PulseGate pulse(PauliSum(1.0, "X"), Envelope::flat(1.0, 1.0), "x");
    std::vector<Dissipator> bad{{embed_single(lowering_operator(), 0, 1), -1.0, "neg"}};
    EXPECT_THROW(evolve(DensityMatrix::ground(1), pulse, bad), UsageError);
    std::vector<Dissipator> wrong{{embed_single(lowering_operator(), 0, 2), 1.0, "2q"}};
    EXPECT_THROW(evolve(DensityMatrix::ground(1), pulse, wrong), UsageError);
    EXPECT_THROW(evolve(DensityMatrix::ground(2), pulse, {}), UsageError);
}

TEST(Evolve, MatchesDenseLiouvillianExponentialOnTwoQubits) {
    // ZX drive with amplitude damping and dephasing on both qubits, checked
    // against exp(L t) of an independently assembled row-major Liouvillian.
    using zne::testing::oracle_pauli;
    const double jzx = 0.37, lambda = 2e-3, t = 25.0;
    std::vector<Dissipator> diss;
    std::vector<std::pair<Matrix, double>> oracle_jumps;
    for (std::size_t q = 0; q < 2; ++q) {
        diss.push_back({embed_single(lowering_operator(), q, 2), lambda, "am"});
        Eigen::Matrix2cd z;
        z << 1, 0, 0, -1;
        diss.push_back({embed_single(z, q, 2), lambda, "ph"});
        Matrix low = Matrix::Zero(2, 2);
        low(0, 1) = 1.0;
        oracle_jumps.emplace_back(q == 0 ? zne::testing::kron(low, Matrix::Identity(2, 2))
                                         : zne::testing::kron(Matrix::Identity(2, 2), low),
                                  lambda);
        oracle_jumps.emplace_back(oracle_pauli(q == 0 ? "ZI" : "IZ"), lambda);
    }
    PulseGate drive(PauliSum(jzx, "ZX"), Envelope::flat(t, 1.0), "zx");
    std::mt19937 rng(5);
    const auto rho0 = DensityMatrix::pure(2, random_state(rng, 4));
    const auto out = evolve(rho0, drive, diss);
    const Matrix expected = zne::testing::oracle_evolve(
        rho0.matrix(), zne::testing::oracle_liouvillian(jzx * oracle_pauli("ZX"), oracle_jumps), t);
    EXPECT_LT((out.matrix() - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ApplyUnitary, Examples) {
    std::mt19937 rng(1);
    const auto rho = DensityMatrix::pure(1, random_state(rng, 2));
    EXPECT_LT(max_abs_diff(apply_unitary(rho, Matrix::Identity(2, 2)), rho), 1e-15);

    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = 0.3;
    diag(1, 1) = 0.7;
    const DensityMatrix diagonal(1, diag);
    const Matrix zt = pauli_exponential(PauliSum(1.0, "Z"), 0.4, 1);
    EXPECT_LT(max_abs_diff(apply_unitary(diagonal, zt), diagonal), 1e-15);

    const Matrix xpi = pauli_exponential(PauliSum(1.0, "X"), pi / 2, 1);
    EXPECT_LT(max_abs_diff(apply_unitary(DensityMatrix::ground(1), xpi), DensityMatrix::basis_state(1, 1)), 1e-15);

    Matrix not_unitary = Matrix::Identity(2, 2) * 1.1;
    EXPECT_THROW(apply_unitary(rho, not_unitary), UsageError);
}

TEST(RunCircuit, EmptyCircuitLeavesStateUnchanged) {
    std::mt19937 rng(2);
    const auto rho = DensityMatrix::pure(2, random_state(rng, 4));
    const auto out = run_circuit(Circuit(2, 1.0), NoiseModel::uniform(2, 10.0, 15.0), rho);
    EXPECT_LT(max_abs_diff(out, rho), 1e-15);
}

TEST(RunCircuit, NoiselessRunEqualsUnitaryProductAndIsStretchInvariant) {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const Circuit c = random_circuit(rng);
        const auto rho0 = DensityMatrix::ground(2);
        const auto out = run_circuit(c, NoiseModel::none(2), rho0);
        const Matrix u = c.unitary();
        EXPECT_LT((out.matrix() - u * rho0.matrix() * u.adjoint()).cwiseAbs().maxCoeff(), 1e-8);
        const auto stretched = run_circuit(StretchedCircuit{c, 3.0}, NoiseModel::none(2), rho0);
        EXPECT_LT(max_abs_diff(out, stretched), 1e-8);
        EXPECT_LT(phase_insensitive_distance(c.stretched(3.0).unitary(), u), 1e-9);
    }
}

TEST(RunCircuit, StretchedRunEqualsAmplifiedNoiseRun) {
    std::mt19937 rng(4);
    NoiseModel noise = NoiseModel::uniform(2, 40.0, 50.0);
    noise.depolarizing_rate = 0.004;
    for (int trial = 0; trial < 3; ++trial) {
        const Circuit c = random_circuit(rng);
        for (double s : {1.5, 2.0, 4.0}) {
            const auto a = run_circuit(StretchedCircuit{c, s}, noise, DensityMatrix::ground(2));
            const auto b = run_circuit(c, noise.amplified(s), DensityMatrix::ground(2));
            EXPECT_LT(max_abs_diff(a, b), 1e-7) << "c=" << s;
        }
    }
}

TEST(RunCircuit, PreservesTraceAndPositivity) {
    std::mt19937 rng(6);
    for (int trial = 0; trial < 5; ++trial) {
        const auto out = run_circuit(random_circuit(rng), NoiseModel::uniform(2, 3.0, 4.0),
                                     DensityMatrix::pure(2, random_state(rng, 4)));
        EXPECT_LT(std::abs(out.trace() - complex(1, 0)), 1e-9);
        EXPECT_TRUE(out.violation().empty()) << out.violation();
    }
}

TEST(RunCircuit, HalvingTheStepChangesExpectationsBelowTolerance) {
    std::mt19937 rng(8);
    const Circuit c = random_circuit(rng, 8);
    const NoiseModel noise = NoiseModel::uniform(2, 20.0, 25.0);
    RunOptions fine;
    fine.integrator.step_scale = 0.5;
    const auto coarse_out = run_circuit(c, noise, DensityMatrix::ground(2));
    const auto fine_out = run_circuit(c, noise, DensityMatrix::ground(2), fine);
    for (const char *obs : {"ZI", "IZ", "ZZ", "XX", "YX"})
        EXPECT_LT(std::abs(expectation(coarse_out, PauliString(obs)) - expectation(fine_out, PauliString(obs))), 1e-8);
}

TEST(RunCircuit, PurityNeverIncreasesUnderUnitalNoise) {
    // Dephasing plus depolarizing only; amplitude damping is not unital.
    std::mt19937 rng(9);
    auto rho = DensityMatrix::pure(2, random_state(rng, 4));
    NoiseModel noise = NoiseModel::uniform(2, kInfinity, 6.0);
    noise.depolarizing_rate = 0.05;
    const auto diss = dissipators_for(noise, 2);
    double last = rho.purity();
    for (int step = 0; step < 20; ++step) {
        rho = idle(rho, 0.5, diss);
        EXPECT_LE(rho.purity(), last + 1e-12);
        last = rho.purity();
    }
}

TEST(RunCircuit, DriftBreaksStretchEquivalenceUnlessRunsAreGrouped) {
    std::mt19937 rng(10);
    const Circuit c = random_circuit(rng);
    NoiseModel noise = NoiseModel::uniform(2, 20.0, 30.0);
    noise.drift = DriftProfile({{1, 1.6}});
    RunOptions first, later;
    later.wall_index = 1;
    // Grouped: stretched and reference runs share a wall-clock index.
    const auto grouped_a = run_circuit(StretchedCircuit{c, 2.0}, noise, DensityMatrix::ground(2), first);
    const auto grouped_b = run_circuit(c, noise.at_wall_index(0).amplified(2.0), DensityMatrix::ground(2), first);
    EXPECT_LT(max_abs_diff(grouped_a, grouped_b), 1e-7);
    // Separated: the stretched run happens after the coherence drop.
    const auto separated = run_circuit(StretchedCircuit{c, 2.0}, noise, DensityMatrix::ground(2), later);
    EXPECT_GT(max_abs_diff(separated, grouped_b), 1e-4);
}

TEST(ChannelCache, MatchesDirectIntegration) {
    std::mt19937 rng(12);
    const Circuit c = random_circuit(rng);
    const NoiseModel noise = NoiseModel::uniform(2, 8.0, 9.0);
    ChannelCache cache;
    RunOptions cached;
    cached.cache = &cache;
    const auto rho0 = DensityMatrix::pure(2, random_state(rng, 4));
    const auto direct = run_circuit(c, noise, rho0);
    const auto via_cache = run_circuit(c, noise, rho0, cached);
    EXPECT_LT(max_abs_diff(direct, via_cache), 1e-10);
    const std::size_t entries = cache.size();
    run_circuit(c, noise, rho0, cached);
    EXPECT_EQ(cache.size(), entries);
}

TEST(ChannelCache, FactorisedChannelsMatchFullRegisterEvolution) {
    // Pulses on a subset of a 3-qubit register; every other qubit idles under its own noise.
    std::mt19937 rng(5);
    Circuit c(3, 0.3);
    c.add(PulseGate(PauliSum(1.0, "ZIX"), Envelope::gaussian_square(4.0, 1.0, 0.7, 6), "zx"));
    c.add(PulseGate(PauliSum(1.0, "IXI"), Envelope::gaussian(2.0, 0.4, 10), "x"));
    c.add(PulseGate(PauliSum(std::vector<PauliTerm>{{0.5, PauliString("IYI")}, {0.2, PauliString("IYZ")}}),
                    Envelope::flat(1.5, 0.9), "yz"));
    c.add(PulseGate(PauliSum(), Envelope::flat(2.0, 0.0), "wait"));
    NoiseModel noise = NoiseModel::uniform(3, 9.0, 11.0);
    noise.depolarizing_rate = 0.02;
    ChannelCache cache;
    RunOptions cached;
    cached.cache = &cache;
    const auto rho0 = DensityMatrix::pure(3, random_state(rng, 8));
    const auto direct = run_circuit(c, noise, rho0);
    EXPECT_LT(max_abs_diff(direct, run_circuit(c, noise, rho0, cached)), 1e-9);

    const auto diss = dissipators_for(noise, 3);
    const auto pulse = std::get<PulseGate>(c.operations()[0]);
    const auto factors = cache.factors(pulse, 0.3, diss, 3);
    ASSERT_EQ(factors.size(), 2u);
    EXPECT_EQ(factors[0].qubits, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(factors[1].qubits, (std::vector<std::size_t>{1}));
    DensityMatrix split = rho0;
    for (const auto &f : factors) split = apply_local_channel(split, f.qubits, *f.superop);
    EXPECT_LT(max_abs_diff(split, apply_channel(rho0, *cache.channel(pulse, 0.3, diss, 3))), 1e-10);
}

TEST(Envelope, StretchPreservesAreaAndDilatesTime) {
    const auto g = Envelope::gaussian(10.0, 0.8, 200);
    EXPECT_EQ(g.segments(), 200u);
    EXPECT_NEAR(g.area(), 0.8, 1e-12);
    const auto s = g.stretched(2.5);
    EXPECT_NEAR(s.area(), 0.8, 1e-12);
    EXPECT_DOUBLE_EQ(s.duration(), 25.0);
    EXPECT_DOUBLE_EQ(s.at(2.5 * 3.3), g.at(3.3) / 2.5);

    const auto sq = Envelope::gaussian_square(50.0, 5.0, 1.2);
    EXPECT_NEAR(sq.area(), 1.2, 1e-12);
    EXPECT_DOUBLE_EQ(sq.duration(), 50.0);
    EXPECT_THROW(Envelope({0.0, 1.0, 0.5}, {1.0, 1.0}), UsageError);
    EXPECT_THROW(PulseGate(PauliSum(1.0, "X"), Envelope({0.0, 0.0}, {1.0}), "zero"), UsageError);
}

TEST(Circuit, DurationAndStretchBookkeeping) {
    Circuit c(1, 0.5);
    c.add(PulseGate(PauliSum(1.0, "X"), Envelope::flat(2.0, 0.1), "x"));
    c.add(InstantGate{PauliSum(0.3, "Z"), "z"});
    c.add(PulseGate(PauliSum(1.0, "Y"), Envelope::flat(3.0, 0.1), "y"));
    EXPECT_DOUBLE_EQ(c.total_duration(), 6.0);
    EXPECT_EQ(c.pulse_count(), 2u);
    const Circuit s = c.stretched(2.0);
    EXPECT_DOUBLE_EQ(s.total_duration(), 12.0);
    EXPECT_DOUBLE_EQ(s.buffer_time(), 1.0);
    EXPECT_THROW(c.stretched(0.5), UsageError);
    EXPECT_THROW(c.add(InstantGate{PauliSum(1.0, "ZZ"), "bad"}), UsageError);
}

TEST(CircuitJson, RoundTripsAndMatchesGolden) {
    Circuit c(1, 0.25);
    c.add(PulseGate(PauliSum(0.5, "X"), Envelope::flat(2.0, 1.0), "x90"));
    c.add(InstantGate{PauliSum(0.25, "Z"), "z"});
    const auto j = to_json(c);
    const std::string golden =
        R"({"buffer_time":0.25,"gates":[{"duration":2.0,"envelope":{"amplitudes":[1.0],"breakpoints":[0.0,2.0]},"generator":[{"coefficient":0.5,"string":"X"}],"kind":"pulse","label":"x90"},{"generator":[{"coefficient":0.25,"string":"Z"}],"kind":"instant","label":"z"}],"n_qubits":1})";
    EXPECT_EQ(j.dump(), golden);
    std::mt19937 rng(13);
    const Circuit r = random_circuit(rng);
    const Circuit back = circuit_from_json(to_json(r));
    EXPECT_EQ(to_json(back).dump(), to_json(r).dump());
    EXPECT_LT((back.unitary() - r.unitary()).cwiseAbs().maxCoeff(), 1e-15);
}
