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

// Benchmark circuits built from native gates: identity-equivalent random
// Clifford sequences, a Bloch-sphere trajectory from |0> to |1>, and a Bell
// state followed by a two-qubit Clifford sequence.
//
// Native gates lower to pulses as follows (times in ns by default):
//   Z_theta  frame change exp(-i theta/2 Z), zero duration
//   X90      4-sigma Gaussian of area pi/4 on X
//   ZX90     echoed cross resonance: two Gaussian-square halves of area
//            pi/8 on ZX with opposite sign, each followed by an X_pi on the
//            control
// Every pulse is followed by the circuit buffer time.

#pragma once

#include <numbers>
#include <vector>

#include "zne/clifford.hpp"
#include "zne/cr_drive.hpp"
#include "zne/pulse.hpp"
#include "zne/random.hpp"

namespace zne {

struct NativeTiming {
    double x90_duration = 83.3;
    double buffer = 6.7;
    std::size_t x_segments = 40;
    double cr_half_duration = 500.0;
    double cr_rise = 30.0;
    std::size_t cr_edge_segments = 15;
};

/// exp(-i theta/2 Z_q).
inline InstantGate z_rotation(std::size_t q, std::size_t n, double theta) {
    return {PauliSum(0.5 * theta, PauliString::single(n, q, Axis::Z)), "z"};
}

/// exp(-i theta/2 X_q) as a Gaussian pulse of the X90 length.
inline PulseGate x_rotation_pulse(std::size_t q, std::size_t n, double theta, const NativeTiming &t) {
    return PulseGate(PauliSum(1.0, PauliString::single(n, q, Axis::X)),
                     Envelope::gaussian(t.x90_duration, 0.5 * theta, t.x_segments), theta > 0 ? "x90" : "x-90");
}

inline PulseGate x90_pulse(std::size_t q, std::size_t n, const NativeTiming &t) {
    auto p = x_rotation_pulse(q, n, std::numbers::pi / 2, t);
    p.label = "x90:q" + std::to_string(q);
    return p;
}

inline PulseGate x180_pulse(std::size_t q, std::size_t n, const NativeTiming &t) {
    auto p = x_rotation_pulse(q, n, std::numbers::pi, t);
    p.label = "x180:q" + std::to_string(q);
    return p;
}

inline void append_native(Circuit &c, const NativeGate &g, const NativeTiming &t) {
    const std::size_t n = c.n_qubits();
    switch (g.kind) {
        case NativeKind::Z90:
            if (g.quarter_turns % 4 != 0) c.add(z_rotation(g.qubit, n, std::numbers::pi / 2 * g.quarter_turns));
            break;
        case NativeKind::X90: c.add(x90_pulse(g.qubit, n, t)); break;
        case NativeKind::ZX90:
            append_echoed_cr(c, g.qubit, g.target,
                             Envelope::gaussian_square(t.cr_half_duration, t.cr_rise, std::numbers::pi / 8,
                                                       t.cr_edge_segments),
                             x180_pulse(g.qubit, n, t));
            break;
    }
}

inline Circuit lower(const std::vector<NativeGate> &gates, std::size_t n, const NativeTiming &t = {}) {
    Circuit c(n, t.buffer);
    for (const auto &g : gates) append_native(c, g, t);
    return c;
}

inline constexpr double kIdentityTolerance = 1e-8;

/// Raises NumericalError unless the noiseless circuit is the identity up to
/// global phase.
inline void require_identity(const Circuit &c) {
    const auto dim = static_cast<Eigen::Index>(dimension(c.n_qubits()));
    const double err = phase_insensitive_distance(c.unitary(), Matrix::Identity(dim, dim));
    if (err > kIdentityTolerance) throw NumericalError("identity-equivalent sequence is not the identity", err);
}

struct CliffordSequence {
    std::size_t n_qubits = 1;
    std::vector<std::size_t> elements;  ///< sampled group indices, in time order
    std::size_t inverse = 0;            ///< index of the recovery element
    std::vector<NativeGate> gates;      ///< full native word including recovery
};

/// m uniformly random Cliffords followed by the exact inverse of their product.
inline CliffordSequence random_identity_clifford_sequence(std::size_t n, std::size_t length, std::uint64_t seed) {
    if (length < 1) throw UsageError("sequence length must be at least 1");
    const auto &group = CliffordGroup::get(n);
    RandomStream rng(seed, {0xc11ffu, n, length});
    CliffordSequence s;
    s.n_qubits = n;
    CliffordTableau total = CliffordTableau::identity(n);
    for (std::size_t k = 0; k < length; ++k) {
        const std::size_t i = group.sample(rng);
        s.elements.push_back(i);
        total = total.then(group.element(i));
        s.gates.insert(s.gates.end(), group.word(i).begin(), group.word(i).end());
    }
    s.inverse = group.index_of(total.inverse());
    s.gates.insert(s.gates.end(), group.word(s.inverse).begin(), group.word(s.inverse).end());
    return s;
}

inline Circuit random_identity_clifford_circuit(std::size_t n, std::size_t length, std::uint64_t seed,
                                                const NativeTiming &t = {}) {
    const auto s = random_identity_clifford_sequence(n, length, seed);
    Circuit c = lower(s.gates, n, t);
    require_identity(c);
    return c;
}

/// X_theta = Y_{pi/2} Z_theta Y_{-pi/2} with Y_{+-pi/2} = Z_{+-pi/2} X90 Z_{-+pi/2};
/// in time order: Z(pi/2), X90, Z(theta - pi), X90, Z(pi/2).
inline void append_x_theta(Circuit &c, std::size_t q, double theta, const NativeTiming &t) {
    const std::size_t n = c.n_qubits();
    c.add(z_rotation(q, n, std::numbers::pi / 2));
    c.add(x90_pulse(q, n, t));
    c.add(z_rotation(q, n, theta - std::numbers::pi));
    c.add(x90_pulse(q, n, t));
    c.add(z_rotation(q, n, std::numbers::pi / 2));
}

inline constexpr std::size_t kTrajectorySteps = 30;

inline double trajectory_angle(std::size_t j) { return static_cast<double>(j) * std::numbers::pi / kTrajectorySteps; }

/// U_k |0> with U_{j+1} = Z_{4 th(j+1)} X_{th(j+1)} X_{-th(j)} Z_{-4 th(j)} U_j,
/// th(j) = j pi / 30 and U_0 = identity.
inline Circuit trajectory_unitary_circuit(std::size_t k, const NativeTiming &t = {}) {
    if (k > kTrajectorySteps) throw UsageError("trajectory has 30 steps");
    Circuit c(1, t.buffer);
    for (std::size_t j = 0; j < k; ++j) {
        const double a = trajectory_angle(j), b = trajectory_angle(j + 1);
        if (a != 0.0) c.add(z_rotation(0, 1, -4.0 * a));
        append_x_theta(c, 0, -a, t);
        append_x_theta(c, 0, b, t);
        c.add(z_rotation(0, 1, 4.0 * b));
    }
    return c;
}

/// The 30 trajectory points U_1 .. U_30 (recursion steps j = 0 .. 29); the
/// last one ends at |1> without noise.
inline std::vector<Circuit> trajectory_circuits(const NativeTiming &t = {}) {
    std::vector<Circuit> out;
    for (std::size_t k = 1; k <= kTrajectorySteps; ++k) out.push_back(trajectory_unitary_circuit(k, t));
    return out;
}

/// Native word for H on qubit 0 followed by CNOT(0 -> 1): |00> -> (|00> + |11>)/sqrt(2).
inline std::vector<NativeGate> bell_preparation() {
    const auto target = CliffordTableau::from_images({{false, PauliString("ZI")},
                                                      {false, PauliString("XX")},
                                                      {false, PauliString("IX")},
                                                      {false, PauliString("ZZ")}});
    const auto &group = CliffordGroup::get(2);
    return group.word(group.index_of(target));
}

struct ParityExperiment {
    Circuit circuit;
    PauliString observable{"ZZ"};
    std::vector<NativeGate> gates;
};

/// Bell preparation followed by an identity-equivalent two-qubit Clifford
/// sequence of the given length (none for length 0).
inline ParityExperiment bell_parity_experiment(std::size_t length, std::uint64_t seed, const NativeTiming &t = {}) {
    ParityExperiment e;
    e.gates = bell_preparation();
    Circuit prep = lower(e.gates, 2, t);
    if (length > 0) {
        const auto s = random_identity_clifford_sequence(2, length, seed);
        const Circuit tail = lower(s.gates, 2, t);
        require_identity(tail);
        e.gates.insert(e.gates.end(), s.gates.begin(), s.gates.end());
        prep.append(tail);
    }
    e.circuit = std::move(prep);
    return e;
}

}  // namespace zne
