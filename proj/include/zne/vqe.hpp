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

// Hardware-efficient variational eigensolver. The ansatz alternates Euler
// rotations Z X90 Z X90 Z on every qubit with blocks of pairwise echoed ZX
// entanglers; SPSA minimises the first-order extrapolated energy.

#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zne/extrapolation.hpp"
#include "zne/measurement.hpp"
#include "zne/protocols.hpp"
#include "zne/simulator.hpp"

namespace zne {

using QubitPair = std::pair<std::size_t, std::size_t>;

inline std::vector<QubitPair> ring_pairs(std::size_t n) {
    std::vector<QubitPair> out;
    for (std::size_t q = 0; q < n; ++q) out.emplace_back(q, (q + 1) % n);
    return out;
}

struct AnsatzConfig {
    std::size_t n_qubits = 4;
    std::size_t depth = 1;
    std::vector<QubitPair> entangler_pairs = ring_pairs(4);
    double entangler_angle = std::numbers::pi / 4;  ///< ZX rotation angle: exp(-i angle/2 ZX)
    NativeTiming timing{};

    std::size_t parameter_count() const { return n_qubits * (3 * depth + 2); }

    std::vector<std::string> violations() const {
        std::vector<std::string> v;
        if (n_qubits < 1 || n_qubits > kMaxQubits) v.push_back("ansatz.n_qubits_out_of_range");
        for (const auto &[a, b] : entangler_pairs) {
            if (a >= n_qubits || b >= n_qubits) v.push_back("ansatz.pair_out_of_range");
            else if (a == b) v.push_back("ansatz.pair_not_distinct");
        }
        if (depth > 0 && entangler_pairs.empty()) v.push_back("ansatz.no_entangler_pairs");
        if (!std::isfinite(entangler_angle)) v.push_back("ansatz.angle_not_finite");
        return v;
    }
};

/// J sum over ring bonds of (XX + YY + ZZ) + B sum_i Z_i.
inline PauliSum heisenberg_hamiltonian(double j, double b, std::size_t n = 4) {
    std::vector<PauliTerm> terms;
    for (const auto &[p, q] : ring_pairs(n))
        for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
            std::vector<Axis> axes(n, Axis::I);
            axes[p] = a;
            axes[q] = a;
            terms.push_back({j, PauliString(std::move(axes))});
        }
    for (std::size_t q = 0; q < n; ++q) terms.push_back({b, PauliString::single(n, q, Axis::Z)});
    return PauliSum(std::move(terms));
}

namespace detail {

// Time order Z(t3) X90 Z(t2 + pi) X90 Z(t1). The pi offset makes theta = 0 the
// identity (X90 Z(pi) X90 is Z(pi) up to phase); a Z before the first pulse
// acting on |0> is dropped in layer 0.
inline void append_euler(Circuit &c, std::size_t q, std::span<const double> angles, const NativeTiming &t) {
    const std::size_t n = c.n_qubits();
    std::size_t k = 0;
    if (angles.size() == 3) c.add(z_rotation(q, n, angles[k++]));
    c.add(x90_pulse(q, n, t));
    c.add(z_rotation(q, n, angles[k++] + std::numbers::pi));
    c.add(x90_pulse(q, n, t));
    c.add(z_rotation(q, n, angles[k]));
}

}  // namespace detail

/// Parameters are laid out layer by layer, qubit by qubit: 2 per qubit in
/// layer 0, then 3 per qubit after each entangler block.
inline Circuit build_ansatz(const AnsatzConfig &cfg, std::span<const double> theta) {
    if (auto v = cfg.violations(); !v.empty()) throw ValidationError("invalid ansatz: " + v.front());
    if (theta.size() != cfg.parameter_count())
        throw UsageError("ansatz expects " + std::to_string(cfg.parameter_count()) + " parameters, got " +
                         std::to_string(theta.size()));
    const std::size_t n = cfg.n_qubits;
    Circuit c(n, cfg.timing.buffer);
    std::size_t k = 0;
    for (std::size_t q = 0; q < n; ++q, k += 2) detail::append_euler(c, q, theta.subspan(k, 2), cfg.timing);
    const double half_area = cfg.entangler_angle / 4.0;
    for (std::size_t layer = 0; layer < cfg.depth; ++layer) {
        for (const auto &[control, target] : cfg.entangler_pairs)
            append_echoed_cr(c, control, target,
                             Envelope::gaussian_square(cfg.timing.cr_half_duration, cfg.timing.cr_rise, half_area,
                                                       cfg.timing.cr_edge_segments),
                             x180_pulse(control, n, cfg.timing));
        for (std::size_t q = 0; q < n; ++q, k += 3) detail::append_euler(c, q, theta.subspan(k, 3), cfg.timing);
    }
    return c;
}

struct MeasurementGroup {
    PauliString setting;
    std::vector<std::size_t> terms;  ///< indices into the Hamiltonian's terms
};

/// Greedy qubit-wise commuting grouping in term order; the identity term is
/// left out (it needs no measurement).
inline std::vector<MeasurementGroup> group_qubit_wise(const PauliSum &h) {
    std::vector<MeasurementGroup> groups;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const PauliString &s = h.terms()[i].string;
        if (s.is_identity()) continue;
        bool placed = false;
        for (auto &g : groups) {
            if (!qubitwise_commutes(g.setting, s)) continue;
            std::vector<Axis> merged = g.setting.axes();
            for (std::size_t q = 0; q < s.size(); ++q)
                if (s[q] != Axis::I) merged[q] = s[q];
            g.setting = PauliString(std::move(merged));
            g.terms.push_back(i);
            placed = true;
            break;
        }
        if (!placed) groups.push_back({s, {i}});
    }
    // Unmeasured sites read Z; it is free and keeps the setting label complete.
    for (auto &g : groups) {
        std::vector<Axis> axes = g.setting.axes();
        for (Axis &a : axes)
            if (a == Axis::I) a = Axis::Z;
        g.setting = PauliString(std::move(axes));
    }
    return groups;
}

struct EnergyOptions {
    NoiseModel noise = NoiseModel::none(4);
    std::vector<double> stretch{1.0, 1.5};
    std::uint64_t shots = 0;                      ///< 0 evaluates exact expectations
    std::optional<ConfusionMatrix> readout;       ///< applied to every sampled shot
    std::optional<ConfusionMatrix> correction;    ///< inverted after sampling
    ChannelCache *cache = nullptr;
};

struct StretchEnergy {
    double c = 1.0;
    double energy = 0.0;
    double variance = 0.0;
    std::vector<double> terms;           ///< <P_i>, aligned with the Hamiltonian (identity gives 1)
    std::vector<double> term_variances;
};

namespace detail {

inline double string_value(const Eigen::VectorXd &p, const PauliString &s) {
    return s.is_identity() ? 1.0 : parity_expectation(p, support_mask(s));
}

}  // namespace detail

/// Energy at every stretch factor. Each group is measured after an ideal
/// basis rotation; with shots > 0 the variance follows from the multinomial
/// spread of the group's per-shot energy.
inline std::vector<StretchEnergy> evaluate_energy(const Circuit &circuit, const PauliSum &h, const EnergyOptions &opt,
                                                  const RandomStream &rng) {
    if (h.n_qubits() != circuit.n_qubits()) throw UsageError("Hamiltonian and circuit registers differ");
    const auto groups = group_qubit_wise(h);
    ChannelCache local;
    RunOptions run;
    run.cache = opt.cache != nullptr ? opt.cache : &local;
    std::vector<StretchEnergy> out;
    for (std::size_t si = 0; si < opt.stretch.size(); ++si) {
        const double c = opt.stretch[si];
        const DensityMatrix rho =
            run_circuit(StretchedCircuit{circuit, c}, opt.noise, DensityMatrix::ground(circuit.n_qubits()), run);
        StretchEnergy e;
        e.c = c;
        e.terms.assign(h.size(), 1.0);
        e.term_variances.assign(h.size(), 0.0);
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            const auto &g = groups[gi];
            const DensityMatrix rotated = apply_ideal(rho, basis_rotation(g.setting));
            Eigen::VectorXd p = measurement_distribution(rotated);
            double shots = 0.0;
            if (opt.shots > 0) {
                RandomStream stream = rng.child(si).child(gi);
                CountsTable t = sample_distribution(p, circuit.n_qubits(), opt.shots, stream, g.setting.str());
                if (opt.readout) t = apply_confusion(t, *opt.readout, stream);
                p = opt.correction ? correct_readout(t, *opt.correction) : t.frequencies();
                shots = static_cast<double>(opt.shots);
            } else {
                if (opt.readout) p = opt.readout->apply(p);
                if (opt.correction) p = correct_readout(p, *opt.correction);
            }
            // Per-outcome group energy f(b) gives the estimator's variance.
            Eigen::VectorXd f = Eigen::VectorXd::Zero(p.size());
            for (std::size_t i : g.terms) {
                const PauliString &s = h.terms()[i].string;
                const std::uint32_t mask = support_mask(s);
                for (Eigen::Index b = 0; b < p.size(); ++b)
                    f(b) += h.terms()[i].coefficient * (std::popcount(static_cast<std::uint32_t>(b) & mask) % 2 ? -1.0 : 1.0);
                e.terms[i] = detail::string_value(p, s);
                if (shots > 0) e.term_variances[i] = (1.0 - e.terms[i] * e.terms[i]) / shots;
            }
            if (shots > 0) {
                const double mean = p.dot(f);
                e.variance += std::max(p.dot(f.cwiseProduct(f)) - mean * mean, 0.0) / shots;
            }
        }
        for (std::size_t i = 0; i < h.size(); ++i) e.energy += h.terms()[i].coefficient * e.terms[i];
        out.push_back(std::move(e));
    }
    return out;
}

inline std::vector<StretchMeasurement> energy_measurements(const std::vector<StretchEnergy> &e) {
    std::vector<StretchMeasurement> m;
    for (const auto &s : e) m.push_back({s.c, s.energy, s.variance});
    return m;
}

/// Richardson extrapolation over all evaluated stretch factors (a single
/// factor returns the raw value).
inline double mitigated_energy(const std::vector<StretchEnergy> &e) {
    const auto m = energy_measurements(e);
    return extrapolate(m).value;
}

struct SPSAConfig {
    std::optional<double> a;      ///< unset: calibrated from the first gradient estimates
    double c = 0.1;
    double alpha = 0.602;
    double gamma_exp = 0.101;
    std::optional<double> big_a;  ///< unset: 0.1 * iterations
    std::size_t iterations = 300;
    std::size_t averaging_window = 25;
    std::uint64_t seed = 0;
    double target_step = 0.1;     ///< first-iteration step size the calibration aims for
    std::size_t calibration_samples = 5;

    double stability() const { return big_a.value_or(0.1 * static_cast<double>(iterations)); }

    std::vector<std::string> violations() const {
        std::vector<std::string> v;
        if (a && !(*a >= 0.0)) v.push_back("spsa.a_negative");
        if (!(c > 0.0)) v.push_back("spsa.c_not_positive");
        if (!(alpha > 0.0) || !(gamma_exp > 0.0)) v.push_back("spsa.exponent_not_positive");
        if (iterations < 1) v.push_back("spsa.no_iterations");
        if (averaging_window < 1) v.push_back("spsa.window_zero");
        if (iterations < averaging_window) v.push_back("spsa.iterations_below_window");
        if (!(target_step > 0.0)) v.push_back("spsa.target_step_not_positive");
        if (big_a && !(*big_a >= 0.0)) v.push_back("spsa.stability_negative");
        return v;
    }
};

/// Objective evaluated at theta; `evaluation` is a unique index for seeding.
using Objective = std::function<double(std::span<const double> theta, std::uint64_t evaluation)>;

struct SPSAResult {
    std::vector<std::vector<double>> thetas;  ///< iterate after each update
    std::vector<std::pair<double, double>> values;  ///< y(theta + c delta), y(theta - c delta)
    std::vector<double> final_controls;
    double a = 0.0;
};

inline constexpr std::uint64_t kCalibrationEvaluations = std::uint64_t{1} << 40;

/// Two-sided simultaneous-perturbation gradient estimate along delta.
inline std::vector<double> spsa_gradient(double y_plus, double y_minus, double ck, std::span<const double> delta) {
    std::vector<double> g(delta.size());
    const double slope = (y_plus - y_minus) / (2.0 * ck);
    for (std::size_t i = 0; i < delta.size(); ++i) g[i] = slope / delta[i];
    return g;
}

/// theta_{k+1} = theta_k - a_k g_k with a_k = a/(k+1+A)^alpha, c_k = c/(k+1)^gamma
/// and g_k = (y+ - y-)/(2 c_k) / delta for a Rademacher delta.
inline SPSAResult spsa_optimize(const Objective &objective, const SPSAConfig &cfg, std::vector<double> theta) {
    if (auto v = cfg.violations(); !v.empty()) throw ValidationError("invalid SPSA config: " + v.front());
    if (theta.empty()) throw UsageError("SPSA needs at least one parameter");
    const std::size_t dim = theta.size();
    RandomStream rng(cfg.seed, {0x5b5au});
    const double big_a = cfg.stability();
    auto perturbation = [&](RandomStream &r) {
        std::vector<double> d(dim);
        for (double &x : d) x = r.sign();
        return d;
    };
    auto shifted = [&](const std::vector<double> &d, double ck, double sign) {
        std::vector<double> t = theta;
        for (std::size_t i = 0; i < dim; ++i) t[i] += sign * ck * d[i];
        return t;
    };
    auto check = [](double y, std::size_t k) {
        if (!std::isfinite(y)) throw NumericalError("SPSA objective not finite at iteration " + std::to_string(k), y);
        return y;
    };

    SPSAResult out;
    if (cfg.a) {
        out.a = *cfg.a;
    } else {
        // Mean |g_i| at theta0, scaled so the first step has size target_step.
        RandomStream cal = rng.child(1);
        double magnitude = 0.0;
        for (std::size_t s = 0; s < cfg.calibration_samples; ++s) {
            const auto d = perturbation(cal);
            const double yp = check(objective(shifted(d, cfg.c, 1.0), kCalibrationEvaluations + 2 * s), 0);
            const double ym = check(objective(shifted(d, cfg.c, -1.0), kCalibrationEvaluations + 2 * s + 1), 0);
            magnitude += std::abs(yp - ym) / (2.0 * cfg.c) / static_cast<double>(cfg.calibration_samples);
        }
        out.a = magnitude > 0.0 ? cfg.target_step * std::pow(big_a + 1.0, cfg.alpha) / magnitude : 0.0;
    }

    RandomStream steps = rng.child(2);
    for (std::size_t k = 0; k < cfg.iterations; ++k) {
        const double ak = out.a / std::pow(static_cast<double>(k + 1) + big_a, cfg.alpha);
        const double ck = cfg.c / std::pow(static_cast<double>(k + 1), cfg.gamma_exp);
        const auto d = perturbation(steps);
        const double yp = check(objective(shifted(d, ck, 1.0), 2 * k), k);
        const double ym = check(objective(shifted(d, ck, -1.0), 2 * k + 1), k);
        const auto g = spsa_gradient(yp, ym, ck, d);
        for (std::size_t i = 0; i < dim; ++i) theta[i] -= ak * g[i];
        out.thetas.push_back(theta);
        out.values.emplace_back(yp, ym);
    }
    out.final_controls.assign(dim, 0.0);
    const std::size_t window = std::min(cfg.averaging_window, out.thetas.size());
    for (std::size_t k = out.thetas.size() - window; k < out.thetas.size(); ++k)
        for (std::size_t i = 0; i < dim; ++i) out.final_controls[i] += out.thetas[k][i] / static_cast<double>(window);
    return out;
}

struct GroundState {
    double energy = 0.0;
    double gap = 0.0;                ///< to the next eigenvalue
    Vector state;
    std::vector<double> term_values;  ///< <P_i> in the ground state
};

inline GroundState exact_ground(const PauliSum &h) {
    const std::size_t n = h.n_qubits();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(dense_matrix(h, n));
    if (solver.info() != Eigen::Success) throw NumericalError("Hamiltonian diagonalisation failed");
    GroundState g;
    g.energy = solver.eigenvalues()(0);
    g.gap = solver.eigenvalues().size() > 1 ? solver.eigenvalues()(1) - g.energy : 0.0;
    g.state = solver.eigenvectors().col(0);
    const auto rho = DensityMatrix::pure(n, g.state);
    for (const auto &t : h.terms()) g.term_values.push_back(expectation(rho, t.string));
    return g;
}

struct Epsilon {
    double e1 = 0.0;  ///< |E - E0|
    double e2 = 0.0;  ///< sum_i alpha_i^2 (<P_i> - <P_i>_0)^2
};

inline Epsilon epsilon_metrics(std::span<const double> term_values, const PauliSum &h, const GroundState &g) {
    if (term_values.size() != h.size() || g.term_values.size() != h.size())
        throw UsageError("term values do not match the Hamiltonian");
    Epsilon e;
    double energy = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double alpha = h.terms()[i].coefficient;
        energy += alpha * term_values[i];
        const double d = term_values[i] - g.term_values[i];
        e.e2 += alpha * alpha * d * d;
    }
    e.e1 = std::abs(energy - g.energy);
    return e;
}

inline Epsilon epsilon_metrics(const DensityMatrix &rho, const PauliSum &h, const GroundState &g) {
    std::vector<double> v;
    for (const auto &t : h.terms()) v.push_back(expectation(rho, t.string));
    return epsilon_metrics(v, h, g);
}

struct VQEConfig {
    AnsatzConfig ansatz{};
    PauliSum hamiltonian = heisenberg_hamiltonian(1.0, 1.0);
    EnergyOptions energy{};  ///< stretch set and shots used inside the optimisation loop
    SPSAConfig spsa{};
    std::vector<double> final_stretch{1.0, 1.1, 1.25, 1.5};
    std::uint64_t final_shots = 100000;  ///< 0 gives exact final expectations
    std::uint64_t calibration_shots = 0;  ///< readout calibration shots; 0 uses the true matrix
    double initial_spread = std::numbers::pi;  ///< theta0 drawn uniformly from [-spread, spread]

    std::vector<std::string> violations() const {
        auto v = ansatz.violations();
        for (auto &s : spsa.violations()) v.push_back(std::move(s));
        if (hamiltonian.n_qubits() != ansatz.n_qubits) v.push_back("vqe.hamiltonian_register_mismatch");
        if (energy.stretch.empty() || final_stretch.empty()) v.push_back("stretch.empty");
        return v;
    }
};

struct VQEEvaluation {
    std::vector<StretchEnergy> stretches;
    double mitigated = 0.0;
};

struct VQEIteration {
    std::vector<double> theta;  ///< iterate after the update
    VQEEvaluation plus, minus;
};

struct VQERun {
    std::vector<VQEIteration> history;
    std::vector<double> final_controls;
    std::vector<StretchEnergy> final_stretches;
    MitigatedEstimate final_estimate;  ///< linear fit intercept of the energy
    std::vector<double> raw_terms;        ///< <P_i> at c = 1
    std::vector<double> mitigated_terms;  ///< linear fit intercept of every <P_i>
    double spsa_gain = 0.0;
};

/// Weighted linear fit over the final stretch set, for the energy and for
/// every term separately.
inline void finalize(VQERun &run, std::vector<StretchEnergy> final_stretches, std::size_t n_terms) {
    run.final_stretches = std::move(final_stretches);
    const auto m = energy_measurements(run.final_stretches);
    run.final_estimate = linear_fit_intercept(m);
    run.raw_terms.assign(n_terms, 0.0);
    run.mitigated_terms.assign(n_terms, 0.0);
    const auto first = std::min_element(run.final_stretches.begin(), run.final_stretches.end(),
                                        [](const auto &a, const auto &b) { return a.c < b.c; });
    for (std::size_t i = 0; i < n_terms; ++i) {
        std::vector<StretchMeasurement> t;
        for (const auto &s : run.final_stretches) t.push_back({s.c, s.terms[i], s.term_variances[i]});
        run.raw_terms[i] = first->terms[i];
        run.mitigated_terms[i] = linear_fit_intercept(t).value;
    }
}

/// Re-measures at the final controls with the final stretch set and shots.
inline std::vector<StretchEnergy> final_measurement(const VQEConfig &cfg, std::span<const double> controls,
                                                    const EnergyOptions &loop, const RandomStream &rng) {
    EnergyOptions e = loop;
    e.stretch = cfg.final_stretch;
    e.shots = cfg.final_shots;
    return evaluate_energy(build_ansatz(cfg.ansatz, controls), cfg.hamiltonian, e, rng);
}

inline VQERun run_vqe(const VQEConfig &cfg, std::uint64_t seed) {
    if (auto v = cfg.violations(); !v.empty()) throw ValidationError("invalid VQE config: " + v.front());
    const RandomStream root(seed, {0x7e9eu});
    EnergyOptions loop = cfg.energy;
    // Readout calibration once per run; the resulting correction is applied
    // at every iteration.
    if (loop.readout && !loop.correction) {
        if (cfg.calibration_shots > 0) {
            RandomStream cal = root.child(3);
            loop.correction = estimate_confusion(calibration_counts(*loop.readout, cfg.calibration_shots, cal));
        } else {
            loop.correction = loop.readout;
        }
    }

    std::vector<double> theta0(cfg.ansatz.parameter_count());
    RandomStream init = root.child(0);
    for (double &t : theta0) t = cfg.initial_spread * (2.0 * init.uniform() - 1.0);

    VQERun run;
    std::vector<VQEEvaluation> evaluations;
    const RandomStream evals = root.child(1);
    auto objective = [&](std::span<const double> theta, std::uint64_t id) {
        VQEEvaluation ev;
        ev.stretches = evaluate_energy(build_ansatz(cfg.ansatz, theta), cfg.hamiltonian, loop, evals.child(id));
        ev.mitigated = mitigated_energy(ev.stretches);
        if (id < kCalibrationEvaluations) evaluations.push_back(ev);
        return ev.mitigated;
    };
    SPSAConfig spsa = cfg.spsa;
    spsa.seed = root.child(2).next_u64() ^ cfg.spsa.seed;
    const SPSAResult r = spsa_optimize(objective, spsa, theta0);
    for (std::size_t k = 0; k < r.thetas.size(); ++k)
        run.history.push_back({r.thetas[k], std::move(evaluations[2 * k]), std::move(evaluations[2 * k + 1])});
    run.final_controls = r.final_controls;
    run.spsa_gain = r.a;
    finalize(run, final_measurement(cfg, run.final_controls, loop, root.child(4)), cfg.hamiltonian.size());
    return run;
}

/// T1 (with T2 = 2 T1) at which `circuit` loses `target` fidelity from its
/// noiseless output state, found by rescaling: infidelity ~ 1/T1 when small.
inline double calibrate_t1(const Circuit &circuit, double target, ChannelCache *cache = nullptr) {
    if (!(target > 0.0 && target < 1.0)) throw UsageError("target error must lie in (0, 1)");
    const std::size_t n = circuit.n_qubits();
    const DensityMatrix ideal = run_circuit(circuit, NoiseModel::none(n), DensityMatrix::ground(n));
    RunOptions run;
    run.cache = cache;
    double t1 = static_cast<double>(n) * circuit.total_duration() / target;
    for (int it = 0; it < 3; ++it) {
        const DensityMatrix noisy = run_circuit(circuit, NoiseModel::uniform(n, t1, 2.0 * t1), DensityMatrix::ground(n), run);
        const double infidelity = 1.0 - (ideal.matrix() * noisy.matrix()).trace().real() / ideal.matrix().trace().real();
        t1 *= infidelity / target;
    }
    return t1;
}

}  // namespace zne
