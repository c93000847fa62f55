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

// Richardson extrapolation to the zero-noise limit.
//
// An expectation value measured at noise strength c*lambda behaves as
// E(c lambda) = E* + sum_k a_k (c lambda)^k + O(lambda^{n+1}). Given
// estimates at n+1 distinct stretch factors, the combination sum_i g_i E_i
// with sum_i g_i = 1 and sum_i g_i c_i^k = 0 (k = 1..n) cancels the first n
// orders. No clamping is applied to the result: values outside the range of
// a bounded observable are a diagnostic, not an error.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zne/errors.hpp"

namespace zne {

/// Strictly increasing stretch factors starting at exactly 1.
class StretchSet {
   public:
    StretchSet() : factors_{1.0} {}

    explicit StretchSet(std::vector<double> factors) : factors_(std::move(factors)) {
        if (auto why = violation(factors_); !why.empty()) throw UsageError(why);
    }

    StretchSet(std::initializer_list<double> factors) : StretchSet(std::vector<double>(factors)) {}

    /// Name of the first violated rule, empty when valid.
    static std::string violation(const std::vector<double> &f) {
        if (f.empty()) return "stretch.empty";
        for (double c : f)
            if (!std::isfinite(c)) return "stretch.non_finite";
        if (f.front() != 1.0) return "stretch.first_must_be_1";
        for (std::size_t i = 1; i < f.size(); ++i) {
            if (f[i] == f[i - 1]) return "stretch.duplicate";
            if (f[i] < f[i - 1]) return "stretch.not_increasing";
        }
        return {};
    }

    const std::vector<double> &factors() const { return factors_; }
    std::size_t size() const { return factors_.size(); }
    double operator[](std::size_t i) const { return factors_[i]; }
    auto begin() const { return factors_.begin(); }
    auto end() const { return factors_.end(); }

    /// Extrapolation order n = size - 1.
    std::size_t order() const { return factors_.size() - 1; }

   private:
    std::vector<double> factors_;
};

struct StretchMeasurement {
    double c = 1.0;
    double estimate = 0.0;
    double variance = 0.0;
};

struct MitigatedEstimate {
    double value = 0.0;
    double variance = 0.0;
    std::size_t order = 0;
    std::vector<double> coefficients;
    std::vector<StretchMeasurement> inputs;
    /// Set when the underlying linear system is badly conditioned.
    std::optional<std::string> warning;

    double std_error() const { return std::sqrt(variance); }
};

inline constexpr double kIllConditioned = 1e12;

namespace detail {

inline void require_distinct(std::span<const double> c) {
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j)
            if (c[i] == c[j]) throw UsageError("stretch factors must be distinct");
}

inline double vandermonde_condition(std::span<const double> c) {
    const auto n = static_cast<Eigen::Index>(c.size());
    Eigen::MatrixXd v(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index i = 0; i < n; ++i) v(k, i) = std::pow(c[static_cast<std::size_t>(i)], static_cast<double>(k));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(v);
    const auto &s = svd.singularValues();
    return s(0) / s(s.size() - 1);
}

}  // namespace detail

/// Richardson weights from the Lagrange closed form
/// g_i = prod_{j != i} c_j / (c_j - c_i), i.e. the Lagrange basis at 0.
inline std::vector<double> richardson_coefficients(std::span<const double> c) {
    if (c.empty()) throw UsageError("need at least one stretch factor");
    detail::require_distinct(c);
    std::vector<double> g(c.size(), 1.0);
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j)
            if (j != i) g[i] *= c[j] / (c[j] - c[i]);
    return g;
}

inline std::vector<double> coefficients(const StretchSet &stretch) { return richardson_coefficients(stretch.factors()); }

/// sum g_i^2 sigma_i^2 for independent inputs.
inline double variance_of(std::span<const double> coefficients, std::span<const double> variances) {
    if (coefficients.size() != variances.size()) throw UsageError("coefficient and variance lists differ in length");
    double v = 0.0;
    for (std::size_t i = 0; i < coefficients.size(); ++i) {
        if (variances[i] < 0.0 || !std::isfinite(variances[i])) throw UsageError("variances must be finite and >= 0");
        v += coefficients[i] * coefficients[i] * variances[i];
    }
    return v;
}

namespace detail {

inline MitigatedEstimate combine(std::vector<StretchMeasurement> inputs, std::vector<double> g, std::size_t order) {
    MitigatedEstimate out;
    std::vector<double> var(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        out.value += g[i] * inputs[i].estimate;
        var[i] = inputs[i].variance;
    }
    out.variance = variance_of(g, var);
    out.order = order;
    out.coefficients = std::move(g);
    out.inputs = std::move(inputs);
    return out;
}

inline std::vector<StretchMeasurement> sorted_inputs(std::span<const StretchMeasurement> measurements) {
    if (measurements.empty()) throw UsageError("extrapolation needs at least one measurement");
    std::vector<StretchMeasurement> in(measurements.begin(), measurements.end());
    std::stable_sort(in.begin(), in.end(), [](const auto &a, const auto &b) { return a.c < b.c; });
    std::vector<double> cs;
    for (const auto &m : in) cs.push_back(m.c);
    if (auto why = StretchSet::violation(cs); !why.empty()) throw UsageError("invalid stretch set: " + why);
    return in;
}

}  // namespace detail

/// Order-(count - 1) Richardson extrapolation of (c, estimate, variance)
/// triples; input order does not matter.
inline MitigatedEstimate extrapolate(std::span<const StretchMeasurement> measurements) {
    auto in = detail::sorted_inputs(measurements);
    std::vector<double> cs;
    for (const auto &m : in) cs.push_back(m.c);
    auto g = richardson_coefficients(cs);
    const double cond = detail::vandermonde_condition(cs);
    auto out = detail::combine(std::move(in), std::move(g), cs.size() - 1);
    if (cond > kIllConditioned)
        out.warning = "ill-conditioned stretch set (Vandermonde condition " + std::to_string(cond) + ")";
    return out;
}

/// Weighted least-squares straight line in c, evaluated at c = 0. Weights are
/// 1/variance when every variance is positive, uniform otherwise. With two
/// points this is the first-order Richardson combination.
inline MitigatedEstimate linear_fit_intercept(std::span<const StretchMeasurement> measurements) {
    auto in = detail::sorted_inputs(measurements);
    if (in.size() < 2) return detail::combine(std::move(in), {1.0}, 0);
    const bool weighted = std::all_of(in.begin(), in.end(), [](const auto &m) { return m.variance > 0.0; });
    double s0 = 0, s1 = 0, s2 = 0;
    std::vector<double> w(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        w[i] = weighted ? 1.0 / in[i].variance : 1.0;
        s0 += w[i];
        s1 += w[i] * in[i].c;
        s2 += w[i] * in[i].c * in[i].c;
    }
    const double det = s0 * s2 - s1 * s1;
    if (!(std::abs(det) > 0.0)) throw NumericalError("degenerate design for linear extrapolation");
    // intercept = sum_i w_i (s2 - s1 c_i) / det * E_i
    std::vector<double> g(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) g[i] = w[i] * (s2 - s1 * in[i].c) / det;
    return detail::combine(std::move(in), std::move(g), 1);
}

}  // namespace zne
