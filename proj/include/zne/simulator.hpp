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

// Open-system evolution of density matrices under piecewise-constant drives.
//
// The master equation
//
//     drho/dt = -i [H(t), rho] + sum_k r_k (L_k rho L_k^+ - 1/2 {L_k^+ L_k, rho})
//
// is integrated with classical fixed-step RK4. The step inside a constant
// segment is the largest h <= min(T_gate / 200, 0.005 / max(|H|, max r_k))
// that divides the segment evenly. For repeated gates, ChannelCache stores
// the RK4 propagator of a pulse (plus its trailing buffer) as a dense
// superoperator; for a time-independent generator the RK4 update is the
// fourth-order Taylor polynomial of h*L, so the cached map is that
// polynomial raised to the step count.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "zne/density_matrix.hpp"
#include "zne/noise.hpp"
#include "zne/pulse.hpp"

namespace zne {

struct IntegratorOptions {
    double steps_per_gate = 200.0;
    double safety = 0.005;
    /// Multiplies every step size; 0.5 is the half-step convergence check.
    double step_scale = 1.0;
    int retry_budget = 3;
};

namespace detail {

inline double max_rate(const std::vector<Dissipator> &dissipators) {
    double r = 0.0;
    for (const auto &d : dissipators) {
        if (!(d.rate >= 0.0) || !std::isfinite(d.rate)) throw UsageError("dissipator rates must be finite and >= 0");
        r = std::max(r, d.rate);
    }
    return r;
}

inline double step_limit(double gate_duration, double h_norm, double rate, const IntegratorOptions &opt) {
    double dt = gate_duration / opt.steps_per_gate;
    const double fastest = std::max(h_norm, rate);
    if (fastest > 0.0) dt = std::min(dt, opt.safety / fastest);
    return dt * opt.step_scale;
}

inline std::size_t step_count(double segment, double dt_max) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(segment / dt_max - 1e-12)));
}

inline Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    return out;
}

/// Constant-generator right-hand side, prepared once per segment.
class Lindbladian {
   public:
    Lindbladian(const Matrix &h, const std::vector<Dissipator> &dissipators) {
        heff_ = h.cast<complex>();
        for (const auto &d : dissipators) {
            if (d.rate == 0.0) continue;
            heff_ -= complex(0.0, 0.5 * d.rate) * (d.op.adjoint() * d.op);
            jumps_.push_back({d.op, d.rate});
        }
    }

    Matrix operator()(const Matrix &rho) const {
        Matrix out = heff_ * rho;
        out = complex(0.0, -1.0) * out + complex(0.0, 1.0) * (rho * heff_.adjoint());
        for (const auto &[op, rate] : jumps_) out.noalias() += rate * (op * rho * op.adjoint());
        return out;
    }

   private:
    Matrix heff_;
    std::vector<std::pair<Matrix, double>> jumps_;
};

inline void rk4(Matrix &rho, const Lindbladian &f, double h, std::size_t steps) {
    for (std::size_t s = 0; s < steps; ++s) {
        const Matrix k1 = f(rho);
        const Matrix k2 = f(rho + 0.5 * h * k1);
        const Matrix k3 = f(rho + 0.5 * h * k2);
        const Matrix k4 = f(rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
}

inline bool acceptable(const Matrix &rho) {
    if (!rho.allFinite()) return false;
    return std::abs(rho.trace() - complex(1.0, 0.0)) < 1e-9;
}

}  // namespace detail

/// Column-major vectorised generator: vec(d rho / dt) = L vec(rho).
inline Matrix liouvillian(const Matrix &h, const std::vector<Dissipator> &dissipators) {
    const Eigen::Index d = h.rows();
    const Matrix id = Matrix::Identity(d, d);
    Matrix l = complex(0.0, -1.0) * (detail::kron(id, h) - detail::kron(h.transpose(), id));
    for (const auto &diss : dissipators) {
        if (diss.rate == 0.0) continue;
        const Matrix ldl = diss.op.adjoint() * diss.op;
        l += diss.rate * (detail::kron(diss.op.conjugate(), diss.op) - 0.5 * detail::kron(id, ldl) -
                          0.5 * detail::kron(ldl.transpose(), id));
    }
    return l;
}

/// Integrates one pulse from 0 to its duration under the given jump operators.
inline DensityMatrix evolve(const DensityMatrix &rho, const PulseGate &gate, const std::vector<Dissipator> &dissipators,
                            const IntegratorOptions &opt = {}) {
    const std::size_t n = rho.n_qubits();
    if (!gate.generator.empty() && gate.generator.n_qubits() != n) throw UsageError("gate and state register differ");
    for (const auto &d : dissipators)
        if (d.op.rows() != rho.dim()) throw UsageError("dissipator dimension does not match state");
    const double rate = detail::max_rate(dissipators);
    const Matrix g = gate.generator.empty() ? Matrix(Matrix::Zero(rho.dim(), rho.dim())) : dense_matrix(gate.generator, n);
    const double g_norm = gate.generator.one_norm();
    const double dt_max = detail::step_limit(gate.duration, g_norm * gate.envelope.max_abs(), rate, opt);

    double scale = 1.0;
    double achieved = 0.0;
    for (int attempt = 0; attempt <= opt.retry_budget; ++attempt, scale *= 0.5) {
        Matrix state = rho.matrix();
        for (std::size_t k = 0; k < gate.envelope.segments(); ++k) {
            const double len = gate.envelope.segment_length(k);
            const std::size_t steps = detail::step_count(len, dt_max * scale);
            const detail::Lindbladian f(gate.envelope.amplitudes()[k] * g, dissipators);
            detail::rk4(state, f, len / static_cast<double>(steps), steps);
        }
        if (detail::acceptable(state)) return DensityMatrix(n, std::move(state));
        achieved = state.allFinite() ? std::abs(state.trace() - complex(1.0, 0.0)) : kInfinity;
    }
    throw NumericalError("RK4 integration of '" + gate.label + "' failed after " + std::to_string(opt.retry_budget) +
                             " step refinements (trace error " + std::to_string(achieved) + ")",
                         achieved);
}

/// Noise-only evolution for `duration`.
inline DensityMatrix idle(const DensityMatrix &rho, double duration, const std::vector<Dissipator> &dissipators,
                          const IntegratorOptions &opt = {}) {
    if (duration <= 0.0 || dissipators.empty()) return rho;
    PulseGate wait(PauliSum(), Envelope::flat(duration, 0.0), "idle");
    return evolve(rho, wait, dissipators, opt);
}

inline constexpr double kUnitaryTolerance = 1e-10;

/// u rho u^+ for an instantaneous unitary.
inline DensityMatrix apply_unitary(const DensityMatrix &rho, const Matrix &u) {
    if (u.rows() != rho.dim() || u.cols() != rho.dim()) throw UsageError("unitary dimension does not match state");
    const double err = (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
    if (err > kUnitaryTolerance) throw UsageError("matrix is not unitary (deviation " + std::to_string(err) + ")");
    return DensityMatrix(rho.n_qubits(), u * rho.matrix() * u.adjoint());
}

/// exp(-i theta P) rho exp(i theta P) for a single Pauli string, using
/// the one-entry-per-column structure of P instead of a dense exponential.
inline DensityMatrix apply_pauli_rotation(const DensityMatrix &rho, const PauliString &p, double theta) {
    if (p.size() != rho.n_qubits()) throw UsageError("rotation and state register differ");
    const std::uint32_t xm = p.x_mask(), zm = p.z_mask();
    const complex y_phase = Phase{static_cast<int>(std::popcount(xm & zm)) & 3}.value();
    const auto dim = static_cast<std::uint32_t>(rho.dim());
    std::vector<complex> phase(dim);
    for (std::uint32_t b = 0; b < dim; ++b) phase[b] = (std::popcount(b & zm) & 1) ? -y_phase : y_phase;
    const double c = std::cos(theta), s = std::sin(theta);
    const Matrix &in = rho.matrix();
    Matrix out(in.rows(), in.cols());
    for (std::uint32_t col = 0; col < dim; ++col)
        for (std::uint32_t row = 0; row < dim; ++row) {
            const complex p_rho = phase[row ^ xm] * in(row ^ xm, col);
            const complex rho_p = in(row, col ^ xm) * phase[col];
            const complex p_rho_p = phase[row ^ xm] * in(row ^ xm, col ^ xm) * phase[col];
            out(row, col) = c * c * in(row, col) + s * s * p_rho_p + complex(0.0, c * s) * (rho_p - p_rho);
        }
    return DensityMatrix(rho.n_qubits(), std::move(out));
}

/// Unitary action of a gate: single-string generators take the fast path.
template <typename Gate>
inline DensityMatrix apply_gate_unitary(const DensityMatrix &rho, const Gate &g, double area) {
    if (g.generator.empty()) return rho;
    if (g.generator.size() == 1)
        return apply_pauli_rotation(rho, g.generator.terms()[0].string, g.generator.terms()[0].coefficient * area);
    return apply_unitary(rho, unitary_of(g, rho.n_qubits()));
}

/// Noiseless action of a whole circuit on rho, gate by gate.
inline DensityMatrix apply_ideal(const DensityMatrix &rho, const Circuit &circuit) {
    if (circuit.n_qubits() != rho.n_qubits()) throw UsageError("circuit and state register differ");
    DensityMatrix out = rho;
    for (const auto &op : circuit.operations()) {
        if (const auto *instant = std::get_if<InstantGate>(&op)) out = apply_gate_unitary(out, *instant, 1.0);
        else out = apply_gate_unitary(out, std::get<PulseGate>(op), std::get<PulseGate>(op).area());
    }
    return out;
}

/// A superoperator acting on a subset of qubits (first listed qubit is the
/// most significant bit of the local index).
struct LocalFactor {
    std::vector<std::size_t> qubits;
    std::shared_ptr<const Matrix> superop;
};

/// Applies a k-qubit superoperator (column-major vectorisation of the local
/// block) to the listed qubits of rho.
inline DensityMatrix apply_local_channel(const DensityMatrix &rho, const std::vector<std::size_t> &qubits,
                                         const Matrix &superop) {
    const std::size_t n = rho.n_qubits(), k = qubits.size();
    const std::size_t dk = std::size_t{1} << k, dim = dimension(n);
    if (superop.rows() != static_cast<Eigen::Index>(dk * dk)) throw UsageError("local channel size mismatch");
    std::vector<std::size_t> offset(dk, 0);
    for (std::size_t i = 0; i < dk; ++i)
        for (std::size_t t = 0; t < k; ++t)
            if ((i >> (k - 1 - t)) & 1) offset[i] |= std::size_t{1} << (n - 1 - qubits[t]);
    const std::size_t mask = offset[dk - 1];
    std::vector<std::size_t> rest;
    for (std::size_t a = 0; a < dim; ++a)
        if ((a & mask) == 0) rest.push_back(a);
    const Matrix &in = rho.matrix();
    Matrix out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    Vector v(static_cast<Eigen::Index>(dk * dk)), w(static_cast<Eigen::Index>(dk * dk));
    for (std::size_t a : rest)
        for (std::size_t b : rest) {
            for (std::size_t j = 0; j < dk; ++j)
                for (std::size_t i = 0; i < dk; ++i)
                    v(static_cast<Eigen::Index>(i + j * dk)) =
                        in(static_cast<Eigen::Index>(a | offset[i]), static_cast<Eigen::Index>(b | offset[j]));
            w.noalias() = superop * v;
            for (std::size_t j = 0; j < dk; ++j)
                for (std::size_t i = 0; i < dk; ++i)
                    out(static_cast<Eigen::Index>(a | offset[i]), static_cast<Eigen::Index>(b | offset[j])) =
                        w(static_cast<Eigen::Index>(i + j * dk));
        }
    return DensityMatrix(n, std::move(out));
}

inline bool all_single_qubit(const std::vector<Dissipator> &dissipators) {
    return std::all_of(dissipators.begin(), dissipators.end(), [](const auto &d) { return d.qubit.has_value(); });
}

/// RK4 propagators of (pulse + trailing buffer) under fixed jump operators,
/// keyed by the exact content of the gate, buffer and dissipators.
/// Thread-safe; entries are immutable once inserted.
class ChannelCache {
   public:
    explicit ChannelCache(IntegratorOptions opt = {}) : opt_(opt) {}

    const IntegratorOptions &options() const { return opt_; }

    std::shared_ptr<const Matrix> channel(const PulseGate &gate, double buffer, const std::vector<Dissipator> &dissipators,
                                          std::size_t n_qubits) {
        const std::string key = std::to_string(n_qubits) + '#' + make_key(gate, buffer, dissipators);
        {
            std::lock_guard lock(mu_);
            if (auto it = entries_.find(key); it != entries_.end()) return it->second;
        }
        auto built = std::make_shared<const Matrix>(build(gate, buffer, dissipators, n_qubits));
        std::lock_guard lock(mu_);
        return entries_.emplace(key, std::move(built)).first->second;
    }

    /// The same propagator split into independent factors: one on the gate's
    /// support and one idle channel per other qubit that has noise. Valid
    /// when every dissipator acts on a single qubit.
    std::vector<LocalFactor> factors(const PulseGate &gate, double buffer, const std::vector<Dissipator> &dissipators,
                                     std::size_t n_qubits) {
        if (!all_single_qubit(dissipators)) throw UsageError("factorised channels need single-qubit dissipators");
        std::vector<bool> in_support(n_qubits, false);
        for (const auto &t : gate.generator.terms())
            for (std::size_t q = 0; q < n_qubits; ++q)
                if (t.string[q] != Axis::I) in_support[q] = true;
        std::vector<std::size_t> support;
        for (std::size_t q = 0; q < n_qubits; ++q)
            if (in_support[q]) support.push_back(q);
        auto local_noise = [&](const std::vector<std::size_t> &qubits) {
            std::vector<Dissipator> out;
            for (const auto &d : dissipators) {
                const auto it = std::find(qubits.begin(), qubits.end(), *d.qubit);
                if (it != qubits.end())
                    out.push_back(local_dissipator(d.local, static_cast<std::size_t>(it - qubits.begin()), qubits.size(),
                                                   d.rate, d.label));
            }
            return out;
        };

        std::vector<LocalFactor> out;
        if (!support.empty()) {
            std::vector<PauliTerm> terms;
            for (const auto &t : gate.generator.terms()) {
                std::vector<Axis> axes;
                for (std::size_t q : support) axes.push_back(t.string[q]);
                terms.push_back({t.coefficient, PauliString(std::move(axes))});
            }
            const PulseGate restricted(PauliSum(std::move(terms)), gate.envelope, gate.label);
            out.push_back({support, channel(restricted, buffer, local_noise(support), support.size())});
        }
        const PulseGate wait(PauliSum(), Envelope::flat(gate.duration, 0.0), "idle");
        for (std::size_t q = 0; q < n_qubits; ++q) {
            if (in_support[q]) continue;
            auto noise = local_noise({q});
            if (noise.empty()) continue;
            out.push_back({{q}, channel(wait, buffer, noise, 1)});
        }
        return out;
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return entries_.size();
    }

   private:
    static void put(std::string &k, double v) { k.append(reinterpret_cast<const char *>(&v), sizeof v); }

    // Exact bit patterns of every input, so equal keys mean equal channels.
    static std::string make_key(const PulseGate &gate, double buffer, const std::vector<Dissipator> &dissipators) {
        std::string k;
        k.reserve(32 * (gate.envelope.segments() + gate.generator.size() + dissipators.size()));
        for (const auto &t : gate.generator.terms()) {
            k += t.string.str();
            put(k, t.coefficient);
        }
        k += '|';
        for (double b : gate.envelope.breakpoints()) put(k, b);
        k += '|';
        for (double a : gate.envelope.amplitudes()) put(k, a);
        k += '|';
        put(k, buffer);
        for (const auto &d : dissipators) {
            k += d.label;
            put(k, d.rate);
        }
        return k;
    }

    // Fourth-order Taylor polynomial of h*L raised to `steps`.
    static Matrix rk4_power(const Matrix &l, double h, std::size_t steps) {
        const Eigen::Index d = l.rows();
        const Matrix id = Matrix::Identity(d, d);
        const Matrix hl = h * l;
        Matrix step = id + hl * (id + 0.5 * hl * (id + (1.0 / 3.0) * hl * (id + 0.25 * hl)));
        Matrix result = id;
        while (steps > 0) {
            if (steps & 1) result = step * result;
            steps >>= 1;
            if (steps > 0) step = step * step;
        }
        return result;
    }

    Matrix build(const PulseGate &gate, double buffer, const std::vector<Dissipator> &dissipators,
                 std::size_t n_qubits) const {
        const auto dim = static_cast<Eigen::Index>(dimension(n_qubits));
        const double rate = detail::max_rate(dissipators);
        const Matrix g = gate.generator.empty() ? Matrix(Matrix::Zero(dim, dim)) : dense_matrix(gate.generator, n_qubits);
        const double dt_max = detail::step_limit(gate.duration, gate.generator.one_norm() * gate.envelope.max_abs(), rate, opt_);
        Matrix total = Matrix::Identity(dim * dim, dim * dim);
        for (std::size_t k = 0; k < gate.envelope.segments(); ++k) {
            const double len = gate.envelope.segment_length(k);
            const std::size_t steps = detail::step_count(len, dt_max);
            total = rk4_power(liouvillian(gate.envelope.amplitudes()[k] * g, dissipators), len / static_cast<double>(steps),
                              steps) *
                    total;
        }
        if (buffer > 0.0 && !dissipators.empty()) {
            const double dt_idle = detail::step_limit(buffer, 0.0, rate, opt_);
            const std::size_t steps = detail::step_count(buffer, dt_idle);
            total = rk4_power(liouvillian(Matrix::Zero(dim, dim), dissipators), buffer / static_cast<double>(steps), steps) *
                    total;
        }
        return total;
    }

    IntegratorOptions opt_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<const Matrix>> entries_;
};

struct RunOptions {
    /// Wall-clock index of the experiment; selects the drift multiplier.
    std::size_t wall_index = 0;
    IntegratorOptions integrator{};
    /// Optional propagator cache; when set, pulses are applied as cached
    /// superoperators instead of being integrated afresh.
    ChannelCache *cache = nullptr;
};

inline DensityMatrix apply_channel(const DensityMatrix &rho, const Matrix &superop) {
    const Eigen::Index d = rho.dim();
    Vector v = Eigen::Map<const Vector>(rho.matrix().data(), d * d);
    Vector out = superop * v;
    return DensityMatrix(rho.n_qubits(), Eigen::Map<Matrix>(out.data(), d, d));
}

/// Sequential evolution through the circuit; noise acts during pulses and
/// buffers, instant gates are applied as unitaries.
inline DensityMatrix run_circuit(const Circuit &circuit, const NoiseModel &noise, const DensityMatrix &initial,
                                 const RunOptions &opt = {}) {
    if (initial.n_qubits() != circuit.n_qubits()) throw UsageError("initial state and circuit register differ");
    const NoiseModel snapshot = noise.at_wall_index(opt.wall_index);
    const auto dissipators = dissipators_for(snapshot, circuit.n_qubits());
    const std::size_t n = circuit.n_qubits();
    DensityMatrix rho = initial;
    for (const auto &op : circuit.operations()) {
        if (const auto *instant = std::get_if<InstantGate>(&op)) {
            rho = apply_gate_unitary(rho, *instant, 1.0);
            continue;
        }
        const auto &pulse = std::get<PulseGate>(op);
        if (dissipators.empty()) {
            rho = apply_gate_unitary(rho, pulse, pulse.area());
            continue;
        }
        if (opt.cache != nullptr) {
            if (all_single_qubit(dissipators)) {
                for (const auto &f : opt.cache->factors(pulse, circuit.buffer_time(), dissipators, n))
                    rho = apply_local_channel(rho, f.qubits, *f.superop);
            } else {
                rho = apply_channel(rho, *opt.cache->channel(pulse, circuit.buffer_time(), dissipators, n));
            }
            continue;
        }
        rho = evolve(rho, pulse, dissipators, opt.integrator);
        rho = idle(rho, circuit.buffer_time(), dissipators, opt.integrator);
    }
    return rho;
}

inline DensityMatrix run_circuit(const StretchedCircuit &circuit, const NoiseModel &noise, const DensityMatrix &initial,
                                 const RunOptions &opt = {}) {
    return run_circuit(circuit.materialize(), noise, initial, opt);
}

}  // namespace zne
