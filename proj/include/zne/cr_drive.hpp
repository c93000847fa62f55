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

// Cross-resonance drive model.
//
// The conditional rotation rate of a cross-resonance drive of amplitude W is,
// to third order in perturbation theory,
//
//   J_ZX(W) = -W J d1 / (D (d1 + D))
//             + W^3 J d1^2 (3 d1^3 + 11 d1^2 D + 15 d1 D^2 + 9 D^3)
//               / (4 D^3 (d1 + D)^3 (d1 + 2 D) (3 d1 + 2 D))
//
// with coupling J, anharmonicity d1 and detuning D. Stretching a gate by c
// while dividing W by c keeps the rotation angle only in the linear regime;
// the cubic term makes naive stretching miscalibrated, and extrapolating
// such data can leave the physical range. simulate_cr_decay reproduces that
// failure with a minimal two-qubit model
//
//   d rho/dt = -i J_ZX [ZX, rho]
//              + lambda sum_q (s-_q rho s+_q - {s+_q s-_q, rho}/2 + Z_q rho Z_q - rho)
//
// where s+- = (X +- i Y)/sqrt(2), taken with exactly that normalisation.

#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "zne/extrapolation.hpp"
#include "zne/simulator.hpp"

namespace zne {

struct CRParams {
    double J = 1.0;
    double delta1 = 320.0;
    double Delta = 50.0;
    double lambda = 2e-3;

    /// Named pole or range violations (empty when valid).
    std::vector<std::string> violations() const {
        std::vector<std::string> out;
        if (Delta == 0.0) out.emplace_back("cr.detuning_zero");
        if (delta1 + Delta == 0.0) out.emplace_back("cr.pole_delta1_plus_detuning");
        if (delta1 + 2.0 * Delta == 0.0) out.emplace_back("cr.pole_delta1_plus_2detuning");
        if (3.0 * delta1 + 2.0 * Delta == 0.0) out.emplace_back("cr.pole_3delta1_plus_2detuning");
        if (delta1 == 0.0) out.emplace_back("cr.anharmonicity_zero");
        if (!(lambda >= 0.0)) out.emplace_back("cr.negative_rate");
        return out;
    }

    void validate() const {
        if (auto v = violations(); !v.empty()) throw DomainError(v.front());
    }
};

enum class CRMode { linear_only, full_nonlinear };
enum class ScalingPolicy { naive, recalibrated };

/// J_ZX(W) = linear W + cubic W^3.
struct CRDrive {
    double linear = 0.0;
    double cubic = 0.0;

    /// Coefficients of the third-order perturbative expression.
    static CRDrive from_perturbative(const CRParams &p) {
        p.validate();
        const double d = p.delta1, D = p.Delta;
        const double lin = -p.J * d / (D * (d + D));
        const double num = p.J * d * d * (3 * d * d * d + 11 * d * d * D + 15 * d * D * D + 9 * D * D * D);
        const double den = 4 * D * D * D * std::pow(d + D, 3) * (d + 2 * D) * (3 * d + 2 * D);
        return {lin, num / den};
    }

    /// The rounded coefficients quoted for d1 = 320, D = 50 (in units of J).
    static CRDrive quoted_simplified(double J = 1.0) { return {-0.0159 * J, 1.0541e-6 * J}; }

    double strength(double omega, CRMode mode = CRMode::full_nonlinear) const {
        const double lin = linear * omega;
        return mode == CRMode::linear_only ? lin : lin + cubic * omega * omega * omega;
    }

    /// Amplitude for stretch factor c. Naive divides by c; recalibrated solves
    /// strength(W_c) = strength(W) / c on [0, W] by bisection.
    double stretched_amplitude(double omega, double c, CRMode mode, ScalingPolicy policy) const {
        if (!(c >= 1.0)) throw UsageError("stretch factor must be >= 1");
        if (policy == ScalingPolicy::naive || mode == CRMode::linear_only || c == 1.0) return omega / c;
        const double target = strength(omega, mode) / c;
        double lo = 0.0, hi = omega;
        const double f_lo = strength(lo, mode) - target;
        if (f_lo * (strength(hi, mode) - target) > 0.0)
            throw NumericalError("recalibration target not bracketed on [0, amplitude]", std::abs(f_lo));
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(omega)); ++it) {
            const double mid = 0.5 * (lo + hi);
            if ((strength(mid, mode) - target) * f_lo > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }
};

/// J_ZX from the perturbative expression; DomainError at a pole.
inline double j_zx(double omega, const CRParams &p, CRMode mode = CRMode::full_nonlinear) {
    return CRDrive::from_perturbative(p).strength(omega, mode);
}

/// W = pi D (d1 + D) / (2 T J d1): the linear-model amplitude with
/// |J_ZX| T = pi / 2.
inline double amplitude_for_gate_time(double t_gate, const CRParams &p) {
    p.validate();
    if (!(t_gate > 0.0)) throw UsageError("gate time must be positive");
    return std::numbers::pi * p.Delta * (p.delta1 + p.Delta) / (2.0 * t_gate * p.J * p.delta1);
}

/// Jump operators of the two-qubit model above.
inline std::vector<Dissipator> cr_dissipators(double lambda) {
    std::vector<Dissipator> out;
    if (lambda == 0.0) return out;
    Eigen::Matrix2cd sm, z;
    const double r = 1.0 / std::sqrt(2.0);
    // (X - iY)/sqrt(2) in the computational basis.
    sm << 0, 0, 2.0 * r, 0;
    z << 1, 0, 0, -1;
    for (std::size_t q = 0; q < 2; ++q) {
        out.push_back(local_dissipator(sm, q, 2, lambda, "cr-sigma:q" + std::to_string(q)));
        out.push_back(local_dissipator(z, q, 2, lambda, "cr-Z:q" + std::to_string(q)));
    }
    return out;
}

struct CRDecayOptions {
    double t_gate = 2.0;
    std::vector<double> stretch{1.0, 2.0};
    double total_time = 100.0;
    std::size_t points = 400;
    CRMode mode = CRMode::full_nonlinear;
    ScalingPolicy policy = ScalingPolicy::naive;
    CRDrive drive = CRDrive::quoted_simplified();
    IntegratorOptions integrator{};
};

struct CRDecaySeries {
    std::vector<double> t;
    std::vector<double> stretch;
    std::vector<double> amplitude;  ///< drive amplitude per stretch factor
    std::vector<double> strength;   ///< J_ZX per stretch factor
    std::vector<std::vector<double>> iz;  ///< [stretch][time]
    std::vector<double> coefficients;
    std::vector<double> mitigated;
    std::vector<double> noiseless;  ///< c = 1 with lambda = 0
};

namespace detail {

/// <IZ>(c t_k) on the grid for constant J_ZX under the given jump operators.
inline std::vector<double> cr_iz_series(double jzx, double dt, std::size_t points,
                                        const std::vector<Dissipator> &dissipators, const IntegratorOptions &opt) {
    ChannelCache cache(opt);
    const PulseGate step(PauliSum(jzx, "ZX"), Envelope::flat(dt, 1.0), "cr-step");
    auto rho = DensityMatrix::ground(2);
    std::vector<double> out{expectation(rho, PauliString("IZ"))};
    if (jzx == 0.0 && dissipators.empty()) return std::vector<double>(points, out.front());
    const auto channel = cache.channel(step, 0.0, dissipators, 2);
    for (std::size_t k = 1; k < points; ++k) {
        rho = apply_channel(rho, *channel);
        out.push_back(expectation(rho, PauliString("IZ")));
    }
    return out;
}

}  // namespace detail

/// <IZ> from |00> under a constant drive whose amplitude corresponds to
/// t_gate, for each stretch factor (time x c, amplitude per policy), and the
/// pointwise Richardson combination.
inline CRDecaySeries simulate_cr_decay(const CRDecayOptions &o, const CRParams &p) {
    p.validate();
    if (!(o.total_time > 0.0) || o.points < 2) throw UsageError("need total_time > 0 and at least two points");
    const StretchSet stretch(o.stretch);
    const double omega = amplitude_for_gate_time(o.t_gate, p);
    const double dt = o.total_time / static_cast<double>(o.points - 1);
    CRDecaySeries s;
    for (std::size_t k = 0; k < o.points; ++k) s.t.push_back(dt * static_cast<double>(k));
    const auto dissipators = cr_dissipators(p.lambda);
    for (double c : stretch) {
        const double w = o.drive.stretched_amplitude(omega, c, o.mode, o.policy);
        s.stretch.push_back(c);
        s.amplitude.push_back(w);
        s.strength.push_back(o.drive.strength(w, o.mode));
        s.iz.push_back(detail::cr_iz_series(s.strength.back(), c * dt, o.points, dissipators, o.integrator));
    }
    s.coefficients = coefficients(stretch);
    s.mitigated.assign(o.points, 0.0);
    for (std::size_t i = 0; i < s.stretch.size(); ++i)
        for (std::size_t k = 0; k < o.points; ++k) s.mitigated[k] += s.coefficients[i] * s.iz[i][k];
    s.noiseless = detail::cr_iz_series(s.strength.front(), dt, o.points, {}, o.integrator);
    return s;
}

/// Spurious terms as ratios to the ZX strength. IX follows the drive sign,
/// ZZ and ZI do not.
struct EchoTerms {
    double ix = 0.0;
    double zz = 0.0;
    double zi = 0.0;
};

/// CR(+) . X_pi(control) . CR(-) . X_pi(control). Each half rotates by pi/8
/// about ZX, so the composite is exp(-i pi/4 ZX) up to global phase. The
/// second X_pi restores the control frame.
inline void append_echoed_cr(Circuit &c, std::size_t control, std::size_t target, const Envelope &half,
                             const PulseGate &x_pi, const EchoTerms &extra = {}) {
    const std::size_t n = c.n_qubits();
    auto term = [n, control, target](Axis on_control, Axis on_target) {
        std::vector<Axis> axes(n, Axis::I);
        axes.at(control) = on_control;
        axes.at(target) = on_target;
        return PauliString(std::move(axes));
    };
    auto generator = [&](double even_sign) {
        std::vector<PauliTerm> t{{1.0, term(Axis::Z, Axis::X)}};
        if (extra.ix != 0.0) t.push_back({extra.ix, term(Axis::I, Axis::X)});
        if (extra.zz != 0.0) t.push_back({even_sign * extra.zz, term(Axis::Z, Axis::Z)});
        if (extra.zi != 0.0) t.push_back({even_sign * extra.zi, term(Axis::Z, Axis::I)});
        return PauliSum(std::move(t));
    };
    // The minus pulse negates the envelope, so drive-even terms need a sign
    // flip in the generator to stay fixed in the lab frame.
    c.add(PulseGate(generator(1.0), half, "cr+"));
    c.add(x_pi);
    c.add(PulseGate(generator(-1.0), half.scaled(-1.0), "cr-"));
    c.add(x_pi);
}

/// Echoed ZX_{pi/2} with flat CR halves of length t_pulse, driven at the
/// amplitude that gives |J_ZX| t_pulse = pi/8 in the linear model.
inline Circuit echoed_cr_zx90(double t_pulse, const CRParams &p, const EchoTerms &extra = {},
                              double x_pi_duration = -1.0) {
    p.validate();
    if (!(t_pulse > 0.0)) throw UsageError("CR pulse time must be positive");
    const double tx = x_pi_duration > 0.0 ? x_pi_duration : 0.1 * t_pulse;
    Circuit c(2);
    const PulseGate x_pi(PauliSum(1.0, "XI"), Envelope::flat(tx, std::numbers::pi / (2.0 * tx)), "xpi-control");
    append_echoed_cr(c, 0, 1, Envelope::flat(t_pulse, std::numbers::pi / (8.0 * t_pulse)), x_pi, extra);
    return c;
}

/// Drive amplitude used by echoed_cr_zx90 for each half.
inline double echo_amplitude(double t_pulse, const CRParams &p) {
    return std::numbers::pi / (8.0 * t_pulse * std::abs(CRDrive::from_perturbative(p).linear));
}

}  // namespace zne
