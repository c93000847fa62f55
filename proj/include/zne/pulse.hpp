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

#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "zne/pauli.hpp"

namespace zne {

/// Piecewise-constant amplitude on [0, duration]. Segment k spans
/// [breakpoints[k], breakpoints[k+1]) with value amplitudes[k].
class Envelope {
   public:
    Envelope() = default;

    Envelope(std::vector<double> breakpoints, std::vector<double> amplitudes)
        : breakpoints_(std::move(breakpoints)), amplitudes_(std::move(amplitudes)) {
        if (breakpoints_.size() < 2 || amplitudes_.size() + 1 != breakpoints_.size())
            throw UsageError("envelope needs n+1 breakpoints for n amplitudes");
        if (breakpoints_.front() != 0.0) throw UsageError("envelope must start at t = 0");
        for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k)
            if (!(breakpoints_[k + 1] > breakpoints_[k])) throw UsageError("envelope breakpoints must increase");
        for (double a : amplitudes_)
            if (!std::isfinite(a)) throw UsageError("envelope amplitude must be finite");
    }

    static Envelope flat(double duration, double amplitude) { return Envelope({0.0, duration}, {amplitude}); }

    /// Truncated Gaussian of width duration/(2*sigmas) sampled into `segments`
    /// constant pieces and scaled so its integral equals `area`.
    static Envelope gaussian(double duration, double area, std::size_t segments = 200, double sigmas = 4.0) {
        if (segments < 1) throw UsageError("gaussian envelope needs at least one segment");
        const double sigma = duration / (2.0 * sigmas);
        std::vector<double> bp(segments + 1), amp(segments);
        double total = 0.0;
        for (std::size_t k = 0; k <= segments; ++k) bp[k] = duration * static_cast<double>(k) / segments;
        for (std::size_t k = 0; k < segments; ++k) {
            const double mid = 0.5 * (bp[k] + bp[k + 1]) - 0.5 * duration;
            amp[k] = std::exp(-0.5 * mid * mid / (sigma * sigma));
            total += amp[k] * (bp[k + 1] - bp[k]);
        }
        for (double &a : amp) a *= area / total;
        return Envelope(std::move(bp), std::move(amp));
    }

    /// Flat top with Gaussian rise and fall of length `rise` each.
    static Envelope gaussian_square(double duration, double rise, double area, std::size_t edge_segments = 100) {
        if (!(2.0 * rise < duration)) throw UsageError("gaussian-square rise time too long for duration");
        const double sigma = rise / 3.0;
        std::vector<double> bp{0.0}, amp;
        for (std::size_t k = 0; k < edge_segments; ++k) {
            const double t0 = rise * static_cast<double>(k) / edge_segments;
            const double t1 = rise * static_cast<double>(k + 1) / edge_segments;
            const double mid = 0.5 * (t0 + t1) - rise;
            bp.push_back(t1);
            amp.push_back(std::exp(-0.5 * mid * mid / (sigma * sigma)));
        }
        bp.push_back(duration - rise);
        amp.push_back(1.0);
        for (std::size_t k = 0; k < edge_segments; ++k) {
            const double t1 = duration - rise + rise * static_cast<double>(k + 1) / edge_segments;
            bp.push_back(k + 1 == edge_segments ? duration : t1);
            amp.push_back(amp[edge_segments - 1 - k]);
        }
        Envelope e(std::move(bp), std::move(amp));
        return e.scaled(area / e.area());
    }

    const std::vector<double> &breakpoints() const { return breakpoints_; }
    const std::vector<double> &amplitudes() const { return amplitudes_; }
    std::size_t segments() const { return amplitudes_.size(); }
    double duration() const { return breakpoints_.empty() ? 0.0 : breakpoints_.back(); }
    double segment_length(std::size_t k) const { return breakpoints_[k + 1] - breakpoints_[k]; }

    double area() const {
        double s = 0.0;
        for (std::size_t k = 0; k < amplitudes_.size(); ++k) s += amplitudes_[k] * segment_length(k);
        return s;
    }

    double max_abs() const {
        double m = 0.0;
        for (double a : amplitudes_) m = std::max(m, std::abs(a));
        return m;
    }

    double at(double t) const {
        for (std::size_t k = 0; k < amplitudes_.size(); ++k)
            if (t < breakpoints_[k + 1]) return amplitudes_[k];
        return amplitudes_.empty() ? 0.0 : amplitudes_.back();
    }

    /// t -> envelope(t / c) / c.
    Envelope stretched(double c) const {
        std::vector<double> bp = breakpoints_, amp = amplitudes_;
        for (double &t : bp) t *= c;
        for (double &a : amp) a /= c;
        return Envelope(std::move(bp), std::move(amp));
    }

    Envelope scaled(double k) const {
        std::vector<double> amp = amplitudes_;
        for (double &a : amp) a *= k;
        return Envelope(breakpoints_, std::move(amp));
    }

    bool operator==(const Envelope &) const = default;

   private:
    std::vector<double> breakpoints_;
    std::vector<double> amplitudes_;
};

/// Timed drive H(t) = envelope(t) * generator on [0, duration].
struct PulseGate {
    PauliSum generator;
    double duration = 0.0;
    Envelope envelope;
    std::string label;

    PulseGate() = default;

    PulseGate(PauliSum gen, Envelope env, std::string name)
        : generator(std::move(gen)), duration(env.duration()), envelope(std::move(env)), label(std::move(name)) {
        if (!(duration > 0.0)) throw UsageError("pulse duration must be positive (" + label + ")");
    }

    /// Integrated drive strength, so the noiseless unitary is exp(-i area G).
    double area() const { return envelope.area(); }

    PulseGate stretched(double c) const { return PulseGate(generator, envelope.stretched(c), label); }
};

/// Zero-duration frame update exp(-i G), e.g. a software Z rotation.
struct InstantGate {
    PauliSum generator;
    std::string label;
};

using Operation = std::variant<PulseGate, InstantGate>;

/// exp(-i * scale * G) for Hermitian G given as a Pauli sum.
inline Matrix pauli_exponential(const PauliSum &generator, double scale, std::size_t n_qubits) {
    const auto dim = static_cast<Eigen::Index>(dimension(n_qubits));
    if (generator.size() == 1) {
        const auto &t = generator.terms().front();
        const double angle = scale * t.coefficient;
        Matrix u = Matrix::Identity(dim, dim) * std::cos(angle);
        accumulate_pauli(u, t.string, complex(0.0, -std::sin(angle)));
        return u;
    }
    if (generator.empty()) return Matrix::Identity(dim, dim);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(dense_matrix(generator, n_qubits));
    Vector phases(dim);
    for (Eigen::Index i = 0; i < dim; ++i) phases[i] = std::polar(1.0, -scale * solver.eigenvalues()[i]);
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

inline Matrix unitary_of(const PulseGate &g, std::size_t n_qubits) {
    return pauli_exponential(g.generator, g.area(), n_qubits);
}

inline Matrix unitary_of(const InstantGate &g, std::size_t n_qubits) {
    return pauli_exponential(g.generator, 1.0, n_qubits);
}

/// Ordered gate list. Every pulse is followed by `buffer_time` of idling;
/// instant gates take no time.
class Circuit {
   public:
    Circuit() = default;
    explicit Circuit(std::size_t n_qubits, double buffer_time = 0.0) : n_qubits_(n_qubits), buffer_time_(buffer_time) {
        check_register(n_qubits);
        if (buffer_time < 0.0) throw UsageError("buffer time must be non-negative");
    }

    std::size_t n_qubits() const { return n_qubits_; }
    double buffer_time() const { return buffer_time_; }
    const std::vector<Operation> &operations() const { return ops_; }
    std::size_t size() const { return ops_.size(); }
    bool empty() const { return ops_.empty(); }

    Circuit &add(PulseGate g) {
        check_generator(g.generator);
        ops_.emplace_back(std::move(g));
        return *this;
    }

    Circuit &add(InstantGate g) {
        check_generator(g.generator);
        ops_.emplace_back(std::move(g));
        return *this;
    }

    Circuit &add(const Operation &op) {
        std::visit([this](const auto &g) { add(g); }, op);
        return *this;
    }

    Circuit &append(const Circuit &other) {
        if (other.n_qubits_ != n_qubits_) throw UsageError("cannot append circuits on different registers");
        for (const auto &op : other.ops_) add(op);
        return *this;
    }

    std::size_t pulse_count() const {
        std::size_t n = 0;
        for (const auto &op : ops_) n += std::holds_alternative<PulseGate>(op) ? 1 : 0;
        return n;
    }

    double total_duration() const {
        double t = 0.0;
        for (const auto &op : ops_)
            if (const auto *p = std::get_if<PulseGate>(&op)) t += p->duration + buffer_time_;
        return t;
    }

    /// Dilated copy: pulse durations and buffers times c, amplitudes / c.
    Circuit stretched(double c) const {
        if (!(c >= 1.0) || !std::isfinite(c)) throw UsageError("stretch factor must be finite and >= 1");
        Circuit out(n_qubits_, buffer_time_ * c);
        out.ops_.reserve(ops_.size());
        for (const auto &op : ops_) {
            if (const auto *p = std::get_if<PulseGate>(&op))
                out.ops_.emplace_back(p->stretched(c));
            else
                out.ops_.push_back(op);
        }
        return out;
    }

    /// Noiseless composite unitary (later gates multiply on the left).
    Matrix unitary() const {
        const auto dim = static_cast<Eigen::Index>(dimension(n_qubits_));
        Matrix u = Matrix::Identity(dim, dim);
        for (const auto &op : ops_) u = std::visit([this](const auto &g) { return unitary_of(g, n_qubits_); }, op) * u;
        return u;
    }

   private:
    void check_generator(const PauliSum &g) const {
        if (!g.empty() && g.n_qubits() != n_qubits_)
            throw UsageError("gate acts on " + std::to_string(g.n_qubits()) + " qubits, circuit has " +
                             std::to_string(n_qubits_));
    }

    std::size_t n_qubits_ = 0;
    double buffer_time_ = 0.0;
    std::vector<Operation> ops_;
};

/// A circuit together with a stretch factor c >= 1.
struct StretchedCircuit {
    Circuit base;
    double c = 1.0;

    Circuit materialize() const { return base.stretched(c); }
};

/// Distance to the nearest global-phase multiple of `target`, in operator
/// max-norm: min over phase of max |u - e^{i phi} target|.
inline double phase_insensitive_distance(const Matrix &u, const Matrix &target) {
    const complex overlap = (target.adjoint() * u).trace();
    const complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : complex(1.0, 0.0);
    return (u - phase * target).cwiseAbs().maxCoeff();
}

}  // namespace zne
