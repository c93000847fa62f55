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

// Finite sampling, readout confusion and its correction, and bootstrap
// resampling. Outcome index b encodes qubit 0 as its most significant bit,
// matching basis-state indices of DensityMatrix.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "zne/density_matrix.hpp"
#include "zne/noise.hpp"
#include "zne/pulse.hpp"
#include "zne/random.hpp"
#include "zne/simulator.hpp"

namespace zne {

struct CountsTable {
    std::size_t n_qubits = 1;
    std::vector<std::uint64_t> counts;  ///< indexed by outcome
    std::string setting;                ///< measurement basis label, e.g. "ZZXX"

    static CountsTable empty(std::size_t n, std::string setting = {}) {
        check_register(n);
        return {n, std::vector<std::uint64_t>(dimension(n), 0), std::move(setting)};
    }

    std::uint64_t shots() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

    Eigen::VectorXd frequencies() const {
        const double total = static_cast<double>(shots());
        if (total == 0.0) throw UsageError("counts table has no shots");
        Eigen::VectorXd f(static_cast<Eigen::Index>(counts.size()));
        for (std::size_t i = 0; i < counts.size(); ++i) f(static_cast<Eigen::Index>(i)) = static_cast<double>(counts[i]) / total;
        return f;
    }

    std::string bitstring(std::size_t outcome) const {
        std::string s(n_qubits, '0');
        for (std::size_t q = 0; q < n_qubits; ++q)
            if ((outcome >> (n_qubits - 1 - q)) & 1) s[q] = '1';
        return s;
    }

    bool operator==(const CountsTable &) const = default;
};

/// Parity expectation of the qubits in `support` (qubit q at bit n-1-q).
inline double parity_expectation(const Eigen::VectorXd &p, std::uint32_t support) {
    double e = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) e += (std::popcount(static_cast<std::uint32_t>(i) & support) % 2 ? -1.0 : 1.0) * p(i);
    return e;
}

/// Bit mask of the non-identity positions of a Pauli string.
inline std::uint32_t support_mask(const PauliString &p) { return static_cast<std::uint32_t>(p.x_mask() | p.z_mask()); }

namespace detail {

/// Categorical draws by inverse CDF; `weights` need not be normalised.
inline void draw_categorical(const Eigen::VectorXd &weights, std::uint64_t shots, RandomStream &rng,
                             std::vector<std::uint64_t> &into) {
    std::vector<double> cdf(static_cast<std::size_t>(weights.size()));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        acc += std::max(weights(i), 0.0);
        cdf[static_cast<std::size_t>(i)] = acc;
    }
    if (!(acc > 0.0)) throw NumericalError("sampling distribution has no mass", acc);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        // Skip zero-width bins that upper_bound can land on at ties.
        while (it != cdf.begin() && *it == *(it - 1)) --it;
        ++into[static_cast<std::size_t>(it - cdf.begin())];
    }
}

}  // namespace detail

/// Multinomial sample of `shots` outcomes from a probability vector.
inline CountsTable sample_distribution(const Eigen::VectorXd &p, std::size_t n_qubits, std::uint64_t shots,
                                       RandomStream &rng, std::string setting = {}) {
    if (shots < 1) throw UsageError("shots must be >= 1");
    if (p.size() != static_cast<Eigen::Index>(dimension(n_qubits))) throw UsageError("distribution size mismatch");
    CountsTable t = CountsTable::empty(n_qubits, std::move(setting));
    detail::draw_categorical(p, shots, rng, t.counts);
    return t;
}

/// Computational-basis populations with round-off negatives clipped.
inline Eigen::VectorXd measurement_distribution(const DensityMatrix &rho) {
    Eigen::VectorXd p = rho.populations().cwiseMax(0.0);
    return p / p.sum();
}

inline CountsTable sample_counts(const DensityMatrix &rho, std::uint64_t shots, RandomStream &rng,
                                 std::string setting = {}) {
    return sample_distribution(measurement_distribution(rho), rho.n_qubits(), shots, rng, std::move(setting));
}

/// Sample after an ideal (noiseless) basis-change circuit.
inline CountsTable sample_counts(const DensityMatrix &rho, const Circuit &post_rotation, std::uint64_t shots,
                                 RandomStream &rng, std::string setting = {}) {
    return sample_counts(apply_ideal(rho, post_rotation), shots, rng, std::move(setting));
}

inline CountsTable sample_counts(const DensityMatrix &rho, const Circuit &post_rotation, std::uint64_t shots,
                                 std::uint64_t seed) {
    RandomStream rng(seed);
    return sample_counts(rho, post_rotation, shots, rng);
}

/// Rotation mapping each non-Z axis of `setting` onto Z, so a computational
/// basis measurement reads that Pauli: exp(+i pi/4 Y) for X and
/// exp(-i pi/4 X) for Y.
inline Circuit basis_rotation(const PauliString &setting) {
    const std::size_t n = setting.size();
    Circuit c(n);
    for (std::size_t q = 0; q < n; ++q) {
        if (setting[q] == Axis::X) c.add(InstantGate{PauliSum(-std::numbers::pi / 4, PauliString::single(n, q, Axis::Y)), "meas-x"});
        if (setting[q] == Axis::Y) c.add(InstantGate{PauliSum(std::numbers::pi / 4, PauliString::single(n, q, Axis::X)), "meas-y"});
    }
    return c;
}

/// Relabels every recorded shot independently by column j of the confusion matrix.
inline CountsTable apply_confusion(const CountsTable &counts, const ConfusionMatrix &m, RandomStream &rng) {
    if (m.n_qubits() != counts.n_qubits) throw UsageError("confusion matrix and counts sizes differ");
    CountsTable out = CountsTable::empty(counts.n_qubits, counts.setting);
    for (std::size_t j = 0; j < counts.counts.size(); ++j)
        if (counts.counts[j] > 0) detail::draw_categorical(m.matrix().col(static_cast<Eigen::Index>(j)), counts.counts[j], rng, out.counts);
    return out;
}

/// Euclidean projection onto the probability simplex (sorted threshold).
inline Eigen::VectorXd project_to_simplex(const Eigen::VectorXd &v) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cumulative += u[k];
        const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) theta = t;
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

inline constexpr double kMaxConfusionCondition = 1e6;

/// Solves m p = f for the empirical frequencies f; when the solution has a
/// negative entry it is projected onto the simplex. Sum p = 1 either way.
inline Eigen::VectorXd correct_readout(const Eigen::VectorXd &frequencies, const ConfusionMatrix &m) {
    if (m.matrix().rows() != frequencies.size()) throw UsageError("confusion matrix and distribution sizes differ");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.matrix());
    const auto &s = svd.singularValues();
    const double cond = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : kInfinity;
    if (!(cond < kMaxConfusionCondition)) throw NumericalError("confusion matrix is singular or ill-conditioned", cond);
    Eigen::VectorXd p = m.matrix().partialPivLu().solve(frequencies);
    if (p.minCoeff() < 0.0) p = project_to_simplex(p);
    return p;
}

inline Eigen::VectorXd correct_readout(const CountsTable &counts, const ConfusionMatrix &m) {
    return correct_readout(counts.frequencies(), m);
}

/// One table per prepared basis state j, read through the true confusion matrix.
inline std::vector<CountsTable> calibration_counts(const ConfusionMatrix &truth, std::uint64_t shots, RandomStream &rng) {
    std::vector<CountsTable> out;
    const std::size_t n = truth.n_qubits();
    for (std::size_t j = 0; j < dimension(n); ++j) {
        CountsTable prepared = CountsTable::empty(n, "cal:" + CountsTable::empty(n).bitstring(j));
        prepared.counts[j] = shots;
        out.push_back(apply_confusion(prepared, truth, rng));
    }
    return out;
}

/// Empirical confusion matrix whose column j is the frequency vector of table j.
inline ConfusionMatrix estimate_confusion(const std::vector<CountsTable> &calibration) {
    if (calibration.empty()) throw UsageError("no calibration tables");
    const std::size_t n = calibration.front().n_qubits;
    if (calibration.size() != dimension(n)) throw UsageError("need one calibration table per basis state");
    const auto dim = static_cast<Eigen::Index>(dimension(n));
    Eigen::MatrixXd m(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        const Eigen::VectorXd f = calibration[static_cast<std::size_t>(j)].frequencies();
        m.col(j) = f / f.sum();
    }
    return ConfusionMatrix(n, std::move(m));
}

/// Multinomial resample of a table at its own shot count.
inline CountsTable resample(const CountsTable &t, RandomStream &rng) {
    return sample_distribution(t.frequencies(), t.n_qubits, t.shots(), rng, t.setting);
}

struct BootstrapResult {
    std::vector<double> replicas;  ///< sorted ascending
    double mean = 0.0;
    double std = 0.0;
    std::size_t n_replicas = 0;
    std::size_t failures = 0;
};

using CountsPipeline = std::function<double(const std::vector<CountsTable> &)>;

inline constexpr std::size_t kDefaultBootstrapReplicas = 100;
inline constexpr double kMaxBootstrapFailureFraction = 0.1;

/// Resamples every table (calibration included) per replica and reruns the
/// pipeline. Replica r draws from stream (seed, r), table k from its child k,
/// so results do not depend on evaluation order.
inline BootstrapResult bootstrap(const std::vector<CountsTable> &raw, const CountsPipeline &pipeline,
                                 std::size_t n_replicas, std::uint64_t seed) {
    if (n_replicas < 2) throw UsageError("bootstrap needs at least two replicas");
    BootstrapResult out;
    out.n_replicas = n_replicas;
    for (std::size_t r = 0; r < n_replicas; ++r) {
        const RandomStream replica(seed, {0xb0075747ULL, r});
        std::vector<CountsTable> tables;
        tables.reserve(raw.size());
        for (std::size_t k = 0; k < raw.size(); ++k) {
            RandomStream rng = replica.child(k);
            tables.push_back(resample(raw[k], rng));
        }
        try {
            const double v = pipeline(tables);
            if (!std::isfinite(v)) throw NumericalError("non-finite replica", v);
            out.replicas.push_back(v);
        } catch (const std::exception &) {
            ++out.failures;
        }
    }
    if (static_cast<double>(out.failures) > kMaxBootstrapFailureFraction * static_cast<double>(n_replicas))
        throw NumericalError("bootstrap aborted: " + std::to_string(out.failures) + " of " + std::to_string(n_replicas) +
                                 " replicas failed",
                             static_cast<double>(out.failures));
    std::sort(out.replicas.begin(), out.replicas.end());
    const double k = static_cast<double>(out.replicas.size());
    out.mean = std::accumulate(out.replicas.begin(), out.replicas.end(), 0.0) / k;
    double ss = 0.0;
    for (double v : out.replicas) ss += (v - out.mean) * (v - out.mean);
    out.std = out.replicas.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
    return out;
}

inline void write_counts_csv(std::ostream &os, const CountsTable &t) {
    os << "outcome,count\n";
    for (std::size_t i = 0; i < t.counts.size(); ++i) os << t.bitstring(i) << ',' << t.counts[i] << '\n';
}

inline CountsTable read_counts_csv(std::istream &is, std::string setting = {}) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("outcome,count", 0) != 0) throw UsageError("counts CSV needs an 'outcome,count' header");
    std::vector<std::pair<std::string, std::uint64_t>> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw UsageError("counts CSV row without comma: " + line);
        const std::string bits = line.substr(0, comma);
        if (bits.empty() || bits.find_first_not_of("01") != std::string::npos) throw UsageError("bad outcome '" + bits + "'");
        std::uint64_t c = 0;
        try {
            std::size_t used = 0;
            const long long v = std::stoll(line.substr(comma + 1), &used);
            if (v < 0) throw UsageError("negative count");
            c = static_cast<std::uint64_t>(v);
        } catch (const std::logic_error &) {
            throw UsageError("bad count in row: " + line);
        }
        rows.emplace_back(bits, c);
    }
    if (rows.empty()) throw UsageError("counts CSV has no rows");
    CountsTable t = CountsTable::empty(rows.front().first.size(), std::move(setting));
    for (const auto &[bits, c] : rows) {
        if (bits.size() != t.n_qubits) throw UsageError("outcomes of different lengths");
        t.counts[std::stoull(bits, nullptr, 2)] += c;
    }
    return t;
}

inline void write_bootstrap_csv(std::ostream &os, const BootstrapResult &b) {
    os << "replica,value\n";
    for (std::size_t r = 0; r < b.replicas.size(); ++r) os << r << ',' << b.replicas[r] << '\n';
}

}  // namespace zne
