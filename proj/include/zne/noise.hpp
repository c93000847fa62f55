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

#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "zne/pauli.hpp"

namespace zne {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Lindblad jump operator on the full register with its rate (1/time).
struct Dissipator {
    Matrix op;
    double rate = 0.0;
    std::string label;
    /// Set when `op` acts on a single qubit; `local` is then its 2x2 factor.
    std::optional<std::size_t> qubit{};
    Eigen::Matrix2cd local = Eigen::Matrix2cd::Zero();
};

/// Embeds a 2x2 operator on `qubit` of an n-qubit register.
inline Matrix embed_single(const Eigen::Matrix2cd &local, std::size_t qubit, std::size_t n_qubits) {
    Matrix out = Matrix::Identity(1, 1);
    for (std::size_t q = 0; q < n_qubits; ++q) {
        const Matrix factor = (q == qubit) ? Matrix(local) : Matrix(Matrix::Identity(2, 2));
        Matrix next(out.rows() * 2, out.cols() * 2);
        for (Eigen::Index r = 0; r < out.rows(); ++r)
            for (Eigen::Index c = 0; c < out.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = out(r, c) * factor;
        out = std::move(next);
    }
    return out;
}

/// |0><1| = (X + iY)/2: relaxes |1> to |0>.
inline Eigen::Matrix2cd lowering_operator() {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 1) = 1.0;
    return m;
}

inline Dissipator local_dissipator(const Eigen::Matrix2cd &local, std::size_t qubit, std::size_t n_qubits, double rate,
                                   std::string label) {
    return {embed_single(local, qubit, n_qubits), rate, std::move(label), qubit, local};
}

/// Readout assignment probabilities; entry(i, j) = P(read i | true j).
class ConfusionMatrix {
   public:
    static constexpr double kColumnTolerance = 1e-12;

    ConfusionMatrix() = default;

    ConfusionMatrix(std::size_t n_qubits, Eigen::MatrixXd entries) : n_qubits_(n_qubits), m_(std::move(entries)) {
        check_register(n_qubits_);
        const auto dim = static_cast<Eigen::Index>(dimension(n_qubits_));
        if (m_.rows() != dim || m_.cols() != dim)
            throw ValidationError("confusion matrix must be " + std::to_string(dim) + "x" + std::to_string(dim));
        for (Eigen::Index j = 0; j < dim; ++j) {
            for (Eigen::Index i = 0; i < dim; ++i)
                if (!(m_(i, j) >= 0.0 && m_(i, j) <= 1.0))
                    throw ValidationError("confusion matrix entries must lie in [0, 1]");
            if (std::abs(m_.col(j).sum() - 1.0) > kColumnTolerance)
                throw ValidationError("confusion matrix column " + std::to_string(j) + " does not sum to 1");
        }
    }

    static ConfusionMatrix identity(std::size_t n_qubits) {
        const auto dim = static_cast<Eigen::Index>(dimension(n_qubits));
        return ConfusionMatrix(n_qubits, Eigen::MatrixXd::Identity(dim, dim));
    }

    /// Independent per-qubit errors: p01 = P(read 1 | 0), p10 = P(read 0 | 1).
    static ConfusionMatrix per_qubit(const std::vector<std::pair<double, double>> &flips) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Ones(1, 1);
        for (const auto &[p01, p10] : flips) {
            Eigen::Matrix2d local;
            local << 1.0 - p01, p10, p01, 1.0 - p10;
            Eigen::MatrixXd next(m.rows() * 2, m.cols() * 2);
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = m(r, c) * local;
            m = std::move(next);
        }
        return ConfusionMatrix(flips.size(), std::move(m));
    }

    static ConfusionMatrix symmetric_flip(std::size_t n_qubits, double p) {
        return per_qubit(std::vector<std::pair<double, double>>(n_qubits, {p, p}));
    }

    /// Header-free, row-major CSV.
    static ConfusionMatrix from_csv(std::istream &in) {
        std::vector<std::vector<double>> rows;
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::vector<double> row;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) {
                try {
                    row.push_back(std::stod(cell));
                } catch (const std::exception &) {
                    throw ValidationError("confusion CSV: bad number '" + cell + "'");
                }
            }
            rows.push_back(std::move(row));
        }
        const std::size_t dim = rows.size();
        std::size_t n = 0;
        while ((std::size_t{1} << n) < dim) ++n;
        if (dim == 0 || (std::size_t{1} << n) != dim) throw ValidationError("confusion CSV must have 2^n rows");
        Eigen::MatrixXd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        for (std::size_t r = 0; r < dim; ++r) {
            if (rows[r].size() != dim) throw ValidationError("confusion CSV must be square");
            for (std::size_t c = 0; c < dim; ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
        return ConfusionMatrix(n, std::move(m));
    }

    /// Inverse of from_csv: header-free, row-major, round-trip precision.
    void to_csv(std::ostream &out) const {
        const auto old = out.precision(17);
        for (Eigen::Index r = 0; r < m_.rows(); ++r) {
            for (Eigen::Index c = 0; c < m_.cols(); ++c) out << (c ? "," : "") << m_(r, c);
            out << '\n';
        }
        out.precision(old);
    }

    std::size_t n_qubits() const { return n_qubits_; }
    const Eigen::MatrixXd &matrix() const { return m_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

    /// Readout distribution for a true distribution.
    Eigen::VectorXd apply(const Eigen::VectorXd &p_true) const { return m_ * p_true; }

   private:
    std::size_t n_qubits_ = 0;
    Eigen::MatrixXd m_;
};

/// Deterministic piecewise-constant multiplier on every noise rate, keyed by
/// the wall-clock index of the experiment (0, 1, 2, ...).
class DriftProfile {
   public:
    DriftProfile() = default;

    /// Each step is (first index it applies to, multiplier); before the first
    /// step the multiplier is 1.
    explicit DriftProfile(std::vector<std::pair<std::size_t, double>> steps) : steps_(std::move(steps)) {
        for (std::size_t k = 0; k < steps_.size(); ++k) {
            if (!(steps_[k].second > 0.0) || !std::isfinite(steps_[k].second))
                throw ValidationError("drift multiplier must be positive");
            if (k > 0 && steps_[k].first <= steps_[k - 1].first)
                throw ValidationError("drift schedule indices must increase");
        }
    }

    double multiplier(std::size_t wall_index) const {
        double m = 1.0;
        for (const auto &[start, value] : steps_)
            if (wall_index >= start) m = value;
        return m;
    }

    const std::vector<std::pair<std::size_t, double>> &steps() const { return steps_; }

   private:
    std::vector<std::pair<std::size_t, double>> steps_;
};

struct QubitCoherence {
    double t1 = kInfinity;
    double t2 = kInfinity;
};

struct NoiseModel {
    std::vector<QubitCoherence> per_qubit;
    double depolarizing_rate = 0.0;
    std::optional<ConfusionMatrix> confusion;
    std::optional<DriftProfile> drift;

    static NoiseModel none(std::size_t n_qubits) { return NoiseModel{std::vector<QubitCoherence>(n_qubits), 0.0, {}, {}}; }

    static NoiseModel uniform(std::size_t n_qubits, double t1, double t2) {
        NoiseModel m{std::vector<QubitCoherence>(n_qubits, QubitCoherence{t1, t2}), 0.0, {}, {}};
        m.validate();
        return m;
    }

    static NoiseModel depolarizing(std::size_t n_qubits, double rate) {
        NoiseModel m = none(n_qubits);
        m.depolarizing_rate = rate;
        m.validate();
        return m;
    }

    std::size_t n_qubits() const { return per_qubit.size(); }

    /// Named violations (empty when valid).
    std::vector<std::string> violations() const {
        std::vector<std::string> out;
        for (const auto &q : per_qubit) {
            if (!(q.t1 > 0.0) || !(q.t2 > 0.0)) out.emplace_back("noise.nonpositive_time");
            else if (q.t2 > 2.0 * q.t1 * (1.0 + 1e-12)) out.emplace_back("noise.t2_exceeds_2t1");
        }
        if (!(depolarizing_rate >= 0.0) || !std::isfinite(depolarizing_rate))
            out.emplace_back("noise.negative_rate");
        if (confusion && confusion->n_qubits() != per_qubit.size()) out.emplace_back("noise.confusion_size");
        return out;
    }

    void validate() const {
        if (auto v = violations(); !v.empty()) throw ValidationError(v.front());
    }

    bool has_dissipation() const {
        if (depolarizing_rate > 0.0) return true;
        for (const auto &q : per_qubit)
            if (std::isfinite(q.t1) || std::isfinite(q.t2)) return true;
        return false;
    }

    /// All rates times `factor` (times divided); readout untouched.
    NoiseModel amplified(double factor) const {
        if (!std::isfinite(factor) || factor < 0.0) throw UsageError("amplification factor must be finite");
        NoiseModel out = *this;
        for (auto &q : out.per_qubit) {
            q.t1 /= factor;
            q.t2 /= factor;
        }
        out.depolarizing_rate *= factor;
        return out;
    }

    /// Snapshot of the model at a wall-clock index (drift folded into rates).
    NoiseModel at_wall_index(std::size_t wall_index) const {
        if (!drift) return *this;
        NoiseModel out = amplified(drift->multiplier(wall_index));
        out.drift.reset();
        return out;
    }
};

inline NoiseModel amplified(const NoiseModel &noise, double factor) { return noise.amplified(factor); }

/// Pure-dephasing rate for a Z jump operator so the total coherence decay is
/// 1/T2 = 1/(2 T1) + 2 rate.
inline double dephasing_rate(const QubitCoherence &q) {
    const double inv_t1 = std::isfinite(q.t1) ? 1.0 / q.t1 : 0.0;
    const double inv_t2 = std::isfinite(q.t2) ? 1.0 / q.t2 : 0.0;
    const double r = 0.5 * (inv_t2 - 0.5 * inv_t1);
    return std::max(r, 0.0);
}

/// Jump operators per qubit: amplitude damping (|0><1|, 1/T1), dephasing
/// (Z, rate_phi) and, for depolarizing rate p, X, Y and Z each at p/4 so the
/// single-qubit state relaxes to I/2 at rate p.
inline std::vector<Dissipator> dissipators_for(const NoiseModel &noise, std::size_t n_qubits) {
    if (noise.per_qubit.size() != n_qubits)
        throw UsageError("noise model describes " + std::to_string(noise.per_qubit.size()) + " qubits, circuit has " +
                         std::to_string(n_qubits));
    noise.validate();
    std::vector<Dissipator> out;
    Eigen::Matrix2cd x, y, z;
    x << 0, 1, 1, 0;
    y << 0, complex(0, -1), complex(0, 1), 0;
    z << 1, 0, 0, -1;
    for (std::size_t q = 0; q < n_qubits; ++q) {
        const auto &c = noise.per_qubit[q];
        const std::string tag = "q" + std::to_string(q);
        if (std::isfinite(c.t1)) out.push_back(local_dissipator(lowering_operator(), q, n_qubits, 1.0 / c.t1, "T1:" + tag));
        if (const double r = dephasing_rate(c); r > 0.0) out.push_back(local_dissipator(z, q, n_qubits, r, "Tphi:" + tag));
        if (noise.depolarizing_rate > 0.0) {
            const double r4 = noise.depolarizing_rate / 4.0;
            out.push_back(local_dissipator(x, q, n_qubits, r4, "depol-X:" + tag));
            out.push_back(local_dissipator(y, q, n_qubits, r4, "depol-Y:" + tag));
            out.push_back(local_dissipator(z, q, n_qubits, r4, "depol-Z:" + tag));
        }
    }
    return out;
}

}  // namespace zne
