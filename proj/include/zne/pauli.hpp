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

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "zne/errors.hpp"

namespace zne {

using complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Largest register handled by the dense simulator.
inline constexpr std::size_t kMaxQubits = 5;

enum class Axis : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline char axis_char(Axis a) {
    static constexpr char kChars[] = {'I', 'X', 'Y', 'Z'};
    return kChars[static_cast<int>(a)];
}

inline Axis axis_from_char(char c) {
    switch (c) {
        case 'I': case 'i': return Axis::I;
        case 'X': case 'x': return Axis::X;
        case 'Y': case 'y': return Axis::Y;
        case 'Z': case 'z': return Axis::Z;
        default: break;
    }
    throw UsageError(std::string("invalid Pauli axis '") + c + "'");
}

/// Power of i: the value is i^power, power in {0,1,2,3}.
struct Phase {
    int power = 0;

    static Phase one() { return {0}; }
    static Phase minus_one() { return {2}; }

    complex value() const {
        static const complex kValues[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        return kValues[power & 3];
    }
    Phase operator*(Phase other) const { return {(power + other.power) & 3}; }
    bool operator==(const Phase &) const = default;
};

/// Tensor product of single-qubit Paulis. Qubit 0 is the leftmost character
/// and the most significant bit of a computational-basis index.
class PauliString {
   public:
    PauliString() = default;

    explicit PauliString(std::vector<Axis> axes) : axes_(std::move(axes)) { check_size(); }

    explicit PauliString(std::string_view text) {
        axes_.reserve(text.size());
        for (char c : text) axes_.push_back(axis_from_char(c));
        check_size();
    }

    static PauliString identity(std::size_t n) { return PauliString(std::vector<Axis>(n, Axis::I)); }

    static PauliString single(std::size_t n, std::size_t qubit, Axis axis) {
        std::vector<Axis> axes(n, Axis::I);
        if (qubit >= n) throw UsageError("qubit index out of range");
        axes[qubit] = axis;
        return PauliString(std::move(axes));
    }

    std::size_t size() const { return axes_.size(); }
    Axis operator[](std::size_t q) const { return axes_[q]; }
    const std::vector<Axis> &axes() const { return axes_; }

    bool is_identity() const {
        return std::all_of(axes_.begin(), axes_.end(), [](Axis a) { return a == Axis::I; });
    }

    /// Number of non-identity sites.
    std::size_t weight() const {
        return static_cast<std::size_t>(
            std::count_if(axes_.begin(), axes_.end(), [](Axis a) { return a != Axis::I; }));
    }

    std::string str() const {
        std::string out;
        out.reserve(axes_.size());
        for (Axis a : axes_) out.push_back(axis_char(a));
        return out;
    }

    /// Bit masks over basis indices: X-part flips bits, Z-part contributes signs.
    std::uint32_t x_mask() const { return mask([](Axis a) { return a == Axis::X || a == Axis::Y; }); }
    std::uint32_t z_mask() const { return mask([](Axis a) { return a == Axis::Z || a == Axis::Y; }); }

    auto operator<=>(const PauliString &) const = default;
    bool operator==(const PauliString &) const = default;

   private:
    void check_size() const {
        if (axes_.empty()) throw UsageError("Pauli string must act on at least one qubit");
        if (axes_.size() > kMaxQubits)
            throw CapacityError("Pauli string on " + std::to_string(axes_.size()) +
                                " qubits exceeds the supported maximum of " + std::to_string(kMaxQubits));
    }

    template <typename Pred>
    std::uint32_t mask(Pred pred) const {
        std::uint32_t m = 0;
        const std::size_t n = axes_.size();
        for (std::size_t q = 0; q < n; ++q)
            if (pred(axes_[q])) m |= 1u << (n - 1 - q);
        return m;
    }

    std::vector<Axis> axes_;
};

struct PauliProduct {
    Phase phase;
    PauliString product;
};

namespace detail {

// Single-site product table: a*b = i^phase * axis.
inline std::pair<int, Axis> site_product(Axis a, Axis b) {
    if (a == Axis::I) return {0, b};
    if (b == Axis::I) return {0, a};
    if (a == b) return {0, Axis::I};
    const int ia = static_cast<int>(a), ib = static_cast<int>(b);
    // Cyclic order X -> Y -> Z -> X picks up +i, anticyclic picks up -i.
    const int third = 6 - ia - ib;
    const bool cyclic = (ib - ia + 3) % 3 == 1;
    return {cyclic ? 1 : 3, static_cast<Axis>(third)};
}

}  // namespace detail

inline PauliProduct multiply(const PauliString &a, const PauliString &b) {
    if (a.size() != b.size())
        throw UsageError("cannot multiply Pauli strings of lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
    std::vector<Axis> out(a.size());
    int power = 0;
    for (std::size_t q = 0; q < a.size(); ++q) {
        auto [p, axis] = detail::site_product(a[q], b[q]);
        power += p;
        out[q] = axis;
    }
    return {Phase{power & 3}, PauliString(std::move(out))};
}

/// True when the two strings commute (even number of anticommuting sites).
inline bool commutes(const PauliString &a, const PauliString &b) {
    if (a.size() != b.size()) throw UsageError("Pauli strings differ in length");
    int anti = 0;
    for (std::size_t q = 0; q < a.size(); ++q)
        if (a[q] != Axis::I && b[q] != Axis::I && a[q] != b[q]) ++anti;
    return anti % 2 == 0;
}

/// True when every site either matches or one side is the identity.
inline bool qubitwise_commutes(const PauliString &a, const PauliString &b) {
    for (std::size_t q = 0; q < a.size(); ++q)
        if (a[q] != Axis::I && b[q] != Axis::I && a[q] != b[q]) return false;
    return true;
}

struct PauliTerm {
    double coefficient = 0.0;
    PauliString string;
};

/// Real linear combination of Pauli strings in canonical form: strings are
/// unique, sorted, and terms with |coefficient| < 1e-15 are dropped.
class PauliSum {
   public:
    static constexpr double kDropTolerance = 1e-15;

    PauliSum() = default;

    explicit PauliSum(std::vector<PauliTerm> terms) {
        std::map<PauliString, double> merged;
        for (auto &t : terms) {
            if (!std::isfinite(t.coefficient))
                throw UsageError("Pauli term coefficient must be finite (" + t.string.str() + ")");
            if (n_qubits_ == 0) n_qubits_ = t.string.size();
            if (t.string.size() != n_qubits_) throw UsageError("Pauli terms act on different register sizes");
            merged[t.string] += t.coefficient;
        }
        for (auto &[s, c] : merged)
            if (std::abs(c) >= kDropTolerance) terms_.push_back({c, s});
    }

    PauliSum(double coefficient, const PauliString &s) : PauliSum(std::vector<PauliTerm>{{coefficient, s}}) {
        n_qubits_ = s.size();
    }

    PauliSum(double coefficient, std::string_view s) : PauliSum(coefficient, PauliString(s)) {}

    const std::vector<PauliTerm> &terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    /// Register size; zero only for a sum built from no terms at all.
    std::size_t n_qubits() const { return n_qubits_; }

    /// Coefficient of the all-identity string (0 when absent).
    double identity_coefficient() const {
        for (const auto &t : terms_)
            if (t.string.is_identity()) return t.coefficient;
        return 0.0;
    }

    /// Sum of |coefficient|: an upper bound on the operator norm.
    double one_norm() const {
        double s = 0.0;
        for (const auto &t : terms_) s += std::abs(t.coefficient);
        return s;
    }

    PauliSum operator+(const PauliSum &other) const {
        std::vector<PauliTerm> all = terms_;
        all.insert(all.end(), other.terms_.begin(), other.terms_.end());
        PauliSum out(std::move(all));
        if (out.n_qubits_ == 0) out.n_qubits_ = std::max(n_qubits_, other.n_qubits_);
        return out;
    }

    PauliSum operator*(double k) const {
        std::vector<PauliTerm> scaled = terms_;
        for (auto &t : scaled) t.coefficient *= k;
        PauliSum out(std::move(scaled));
        out.n_qubits_ = n_qubits_;
        return out;
    }

    bool operator==(const PauliSum &other) const {
        if (terms_.size() != other.terms_.size()) return false;
        for (std::size_t i = 0; i < terms_.size(); ++i)
            if (terms_[i].string != other.terms_[i].string || terms_[i].coefficient != other.terms_[i].coefficient)
                return false;
        return true;
    }

   private:
    std::vector<PauliTerm> terms_;
    std::size_t n_qubits_ = 0;
};

inline void check_register(std::size_t n_qubits) {
    if (n_qubits == 0) throw UsageError("register must contain at least one qubit");
    if (n_qubits > kMaxQubits)
        throw CapacityError("dense simulation limited to " + std::to_string(kMaxQubits) + " qubits, got " +
                            std::to_string(n_qubits));
}

inline std::size_t dimension(std::size_t n_qubits) { return std::size_t{1} << n_qubits; }

/// Adds coefficient * P into `out` using the one-nonzero-per-column structure.
inline void accumulate_pauli(Matrix &out, const PauliString &p, complex coefficient) {
    const std::uint32_t xm = p.x_mask(), zm = p.z_mask();
    // Y = iXZ on each site, so the matrix carries i^{#Y}.
    const complex y_phase = Phase{static_cast<int>(std::popcount(xm & zm)) & 3}.value();
    const auto dim = static_cast<std::uint32_t>(out.rows());
    for (std::uint32_t col = 0; col < dim; ++col) {
        const double sign = (std::popcount(col & zm) & 1) ? -1.0 : 1.0;
        out(col ^ xm, col) += coefficient * y_phase * sign;
    }
}

inline Matrix dense_matrix(const PauliString &p) {
    check_register(p.size());
    const auto dim = static_cast<Eigen::Index>(dimension(p.size()));
    Matrix m = Matrix::Zero(dim, dim);
    accumulate_pauli(m, p, 1.0);
    return m;
}

inline Matrix dense_matrix(const PauliSum &sum, std::size_t n_qubits) {
    check_register(n_qubits);
    const auto dim = static_cast<Eigen::Index>(dimension(n_qubits));
    Matrix m = Matrix::Zero(dim, dim);
    for (const auto &t : sum.terms()) {
        if (t.string.size() != n_qubits)
            throw UsageError("term " + t.string.str() + " does not act on " + std::to_string(n_qubits) + " qubits");
        accumulate_pauli(m, t.string, t.coefficient);
    }
    return m;
}

/// Parses the Hamiltonian text format: one `<coefficient> <axes>` term per
/// line, `#` starts a comment, blank lines ignored.
inline PauliSum parse_pauli_sum(std::istream &in) {
    std::vector<PauliTerm> terms;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string coef_text, axes;
        if (!(fields >> coef_text)) continue;
        std::string extra;
        if (!(fields >> axes) || (fields >> extra))
            throw UsageError("Hamiltonian line " + std::to_string(line_no) + ": expected '<coefficient> <axes>'");
        double coef = 0.0;
        try {
            std::size_t used = 0;
            coef = std::stod(coef_text, &used);
            if (used != coef_text.size()) throw std::invalid_argument(coef_text);
        } catch (const std::exception &) {
            throw UsageError("Hamiltonian line " + std::to_string(line_no) + ": bad coefficient '" + coef_text + "'");
        }
        terms.push_back({coef, PauliString(axes)});
    }
    if (terms.empty()) throw UsageError("Hamiltonian file contains no terms");
    PauliSum sum(std::move(terms));
    return sum;
}

inline PauliSum parse_pauli_sum(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_pauli_sum(in);
}

inline std::string format_pauli_sum(const PauliSum &sum) {
    std::ostringstream out;
    out.precision(17);
    for (const auto &t : sum.terms()) out << t.coefficient << ' ' << t.string.str() << '\n';
    return out.str();
}

}  // namespace zne
