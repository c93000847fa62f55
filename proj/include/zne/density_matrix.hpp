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
#include <string>

#include "zne/pauli.hpp"

namespace zne {

/// Mixed state on n <= 5 qubits. Construction through the checked factory
/// enforces Hermiticity, unit trace and positivity; the simulator uses the
/// unchecked constructor for intermediate results.
class DensityMatrix {
   public:
    static constexpr double kHermitianTolerance = 1e-10;
    static constexpr double kTraceTolerance = 1e-10;
    static constexpr double kPositivityTolerance = 1e-8;

    DensityMatrix() = default;

    DensityMatrix(std::size_t n_qubits, Matrix entries) : n_qubits_(n_qubits), entries_(std::move(entries)) {
        check_register(n_qubits_);
        const auto dim = static_cast<Eigen::Index>(dimension(n_qubits_));
        if (entries_.rows() != dim || entries_.cols() != dim)
            throw UsageError("density matrix must be " + std::to_string(dim) + "x" + std::to_string(dim));
    }

    /// Validating factory; throws ValidationError when the entries are not a state.
    static DensityMatrix checked(std::size_t n_qubits, Matrix entries) {
        DensityMatrix rho(n_qubits, std::move(entries));
        if (auto why = rho.violation(); !why.empty()) throw ValidationError(why);
        return rho;
    }

    static DensityMatrix basis_state(std::size_t n_qubits, std::size_t index) {
        check_register(n_qubits);
        const auto dim = static_cast<Eigen::Index>(dimension(n_qubits));
        if (static_cast<Eigen::Index>(index) >= dim) throw UsageError("basis index out of range");
        Matrix m = Matrix::Zero(dim, dim);
        m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
        return DensityMatrix(n_qubits, std::move(m));
    }

    static DensityMatrix ground(std::size_t n_qubits) { return basis_state(n_qubits, 0); }

    static DensityMatrix maximally_mixed(std::size_t n_qubits) {
        check_register(n_qubits);
        const auto dim = static_cast<Eigen::Index>(dimension(n_qubits));
        return DensityMatrix(n_qubits, Matrix::Identity(dim, dim) / static_cast<double>(dim));
    }

    static DensityMatrix pure(std::size_t n_qubits, const Vector &psi) {
        check_register(n_qubits);
        if (psi.size() != static_cast<Eigen::Index>(dimension(n_qubits))) throw UsageError("state vector size");
        const Vector v = psi / psi.norm();
        return DensityMatrix(n_qubits, v * v.adjoint());
    }

    std::size_t n_qubits() const { return n_qubits_; }
    Eigen::Index dim() const { return entries_.rows(); }
    const Matrix &matrix() const { return entries_; }

    complex trace() const { return entries_.trace(); }
    double purity() const { return (entries_ * entries_).trace().real(); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(), Eigen::EigenvaluesOnly);
        return solver.eigenvalues().minCoeff();
    }

    /// Empty when the state satisfies all invariants, otherwise a reason.
    std::string violation() const {
        const double herm = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
        if (herm > kHermitianTolerance) return "density matrix is not Hermitian (deviation " + std::to_string(herm) + ")";
        const double tr = std::abs(trace() - complex(1.0, 0.0));
        if (tr > kTraceTolerance) return "density matrix trace deviates from 1 by " + std::to_string(tr);
        const double lo = min_eigenvalue();
        if (lo < -kPositivityTolerance) return "density matrix has negative eigenvalue " + std::to_string(lo);
        return {};
    }

    /// Computational-basis populations, clipped to be non-negative.
    Eigen::VectorXd populations() const {
        Eigen::VectorXd p = entries_.diagonal().real();
        for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = std::max(p[i], 0.0);
        return p;
    }

   private:
    Matrix hermitian_part() const { return 0.5 * (entries_ + entries_.adjoint()); }

    std::size_t n_qubits_ = 0;
    Matrix entries_;
};

inline constexpr double kExpectationImagTolerance = 1e-10;

/// Tr(rho P) for a single string, exploiting the one-nonzero-per-column form.
inline complex trace_with(const DensityMatrix &rho, const PauliString &p) {
    if (p.size() != rho.n_qubits())
        throw UsageError("observable acts on " + std::to_string(p.size()) + " qubits, state has " +
                         std::to_string(rho.n_qubits()));
    const std::uint32_t xm = p.x_mask(), zm = p.z_mask();
    const complex y_phase = Phase{static_cast<int>(std::popcount(xm & zm)) & 3}.value();
    const Matrix &m = rho.matrix();
    complex acc = 0.0;
    // Tr(rho P) = sum_col P(col^xm, col) * rho(col, col^xm)
    for (std::uint32_t col = 0; col < static_cast<std::uint32_t>(m.rows()); ++col) {
        const double sign = (std::popcount(col & zm) & 1) ? -1.0 : 1.0;
        acc += sign * m(col, col ^ xm);
    }
    return acc * y_phase;
}

inline double expectation(const DensityMatrix &rho, const PauliString &p) {
    const complex v = trace_with(rho, p);
    if (std::abs(v.imag()) > kExpectationImagTolerance)
        throw NumericalError("expectation of " + p.str() + " has imaginary part " + std::to_string(v.imag()),
                             std::abs(v.imag()));
    return v.real();
}

inline double expectation(const DensityMatrix &rho, const PauliSum &sum) {
    double acc = 0.0;
    for (const auto &t : sum.terms()) acc += t.coefficient * expectation(rho, t.string);
    return acc;
}

}  // namespace zne
