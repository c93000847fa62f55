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

// Experiment runners. Each returns its artifacts as named in-memory files;
// only the caller touches the filesystem. All randomness derives from the
// configured seeds, and numbers are printed with a fixed format, so equal
// configs give byte-identical artifacts.

#pragma once

#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "zne/config.hpp"
#include "zne/measurement.hpp"

namespace zne {

struct Artifact {
    std::string name;
    std::string content;
};

namespace detail {

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

class Csv {
   public:
    explicit Csv(std::initializer_list<std::string> header) { row_of(header); }
    explicit Csv(const std::vector<std::string> &header) { row_of(header); }

    template <class... Cells>
    void row(const Cells &...cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
    }

    std::string str() const { return out_.str(); }

   private:
    template <class Range>
    void row_of(const Range &r) {
        bool first = true;
        for (const auto &s : r) {
            out_ << (first ? "" : ",") << s;
            first = false;
        }
        out_ << '\n';
    }

    static std::string cell(double x) { return fmt(x); }
    static std::string cell(const std::string &s) { return s; }
    static std::string cell(const char *s) { return s; }
    static std::string cell(std::uint64_t v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }

    std::ostringstream out_;
};

}  // namespace detail

/// Observable whose value is a linear functional w . p of the outcome
/// distribution measured after the basis rotation for `setting`.
struct LinearReadout {
    PauliString setting;
    Eigen::VectorXd weights;
};

using Observable = std::vector<LinearReadout>;

/// Pauli sum split into qubit-wise commuting groups; identity terms ride on
/// the first group (sum p = 1).
inline Observable observable_for(const PauliSum &sum) {
    const std::size_t n = sum.n_qubits();
    const auto dim = static_cast<Eigen::Index>(dimension(n));
    double constant = 0.0;
    for (const auto &t : sum.terms())
        if (t.string.is_identity()) constant += t.coefficient;
    Observable out;
    for (const auto &g : group_qubit_wise(sum)) {
        LinearReadout r{g.setting, Eigen::VectorXd::Zero(dim)};
        for (std::size_t i : g.terms) {
            const auto mask = support_mask(sum.terms()[i].string);
            for (Eigen::Index k = 0; k < dim; ++k)
                r.weights(k) += sum.terms()[i].coefficient * (std::popcount(static_cast<std::uint32_t>(k) & mask) % 2 ? -1.0 : 1.0);
        }
        out.push_back(std::move(r));
    }
    if (out.empty()) out.push_back({PauliString(std::vector<Axis>(n, Axis::Z)), Eigen::VectorXd::Zero(dim)});
    out.front().weights.array() += constant;
    return out;
}

/// Probability of reading all zeros.
inline Observable ground_population(std::size_t n) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension(n)));
    w(0) = 1.0;
    return {{PauliString(std::vector<Axis>(n, Axis::Z)), w}};
}

/// How a group of circuits is measured and extrapolated.
struct MeasurementPlan {
    NoiseModel noise;
    std::vector<double> stretch{1.0, 2.0};
    std::uint64_t shots = 0;
    bool correct_readout = true;
    std::uint64_t calibration_shots = 0;
    bool linear_fit = false;
    std::size_t bootstrap_replicas = 0;
    ChannelCache *cache = nullptr;
};

struct ObservableEstimate {
    std::vector<StretchMeasurement> stretches;  ///< mean over circuits per stretch factor
    MitigatedEstimate mitigated;
    std::optional<BootstrapResult> bootstrap;
};

struct CellResult {
    std::vector<ObservableEstimate> observables;
    std::vector<CountsTable> tables;  ///< calibration tables first, then [stretch][circuit][setting]
    std::size_t calibration_tables = 0;
    std::optional<ConfusionMatrix> estimated_confusion;
};

namespace detail {

inline MitigatedEstimate combine_stretches(const std::vector<StretchMeasurement> &m, bool linear) {
    return linear ? linear_fit_intercept(m) : extrapolate(m);
}

/// w . p and its single-shot variance.
inline std::pair<double, double> linear_value(const Eigen::VectorXd &w, const Eigen::VectorXd &p) {
    const double mean = w.dot(p);
    const double second = w.array().square().matrix().dot(p);
    return {mean, std::max(0.0, second - mean * mean)};
}

}  // namespace detail

/// Runs every circuit at every stretch factor (counting wall-clock indices
/// for drift), measures each distinct setting, and estimates every observable
/// as the mean over circuits, extrapolated to zero noise.
inline CellResult measure_cell(const std::vector<Circuit> &circuits, const std::vector<Observable> &observables,
                               const MeasurementPlan &plan, const RandomStream &rng, std::size_t &wall_index) {
    if (circuits.empty()) throw UsageError("measure_cell needs at least one circuit");
    const std::size_t n = circuits.front().n_qubits();
    std::vector<PauliString> settings;
    std::vector<std::vector<std::size_t>> part_setting(observables.size());
    for (std::size_t o = 0; o < observables.size(); ++o)
        for (const auto &part : observables[o]) {
            auto it = std::find(settings.begin(), settings.end(), part.setting);
            if (it == settings.end()) it = settings.insert(settings.end(), part.setting);
            part_setting[o].push_back(static_cast<std::size_t>(it - settings.begin()));
        }
    const std::size_t ns = plan.stretch.size(), nc = circuits.size(), ng = settings.size();
    const auto &readout = plan.noise.confusion;

    // Outcome distributions [stretch][circuit][setting].
    std::vector<Eigen::VectorXd> dist;
    dist.reserve(ns * nc * ng);
    RunOptions run;
    run.cache = plan.cache;
    for (double c : plan.stretch)
        for (const auto &circuit : circuits) {
            run.wall_index = wall_index++;
            const DensityMatrix rho = run_circuit(circuit.stretched(c), plan.noise, DensityMatrix::ground(n), run);
            for (const auto &s : settings) dist.push_back(measurement_distribution(apply_ideal(rho, basis_rotation(s))));
        }
    auto at = [&](std::size_t si, std::size_t ci, std::size_t g) { return si * nc * ng + ci * ng + g; };

    CellResult out;
    const double inv_circuits = 1.0 / static_cast<double>(nc);

    if (plan.shots == 0) {
        for (auto &p : dist) {
            if (readout) {
                p = readout->apply(p);
                if (plan.correct_readout) p = correct_readout(p, *readout);
            }
        }
        for (std::size_t o = 0; o < observables.size(); ++o) {
            ObservableEstimate e;
            for (std::size_t si = 0; si < ns; ++si) {
                double v = 0.0;
                for (std::size_t ci = 0; ci < nc; ++ci)
                    for (std::size_t k = 0; k < observables[o].size(); ++k)
                        v += observables[o][k].weights.dot(dist[at(si, ci, part_setting[o][k])]);
                e.stretches.push_back({plan.stretch[si], v * inv_circuits, 0.0});
            }
            e.mitigated = detail::combine_stretches(e.stretches, plan.linear_fit);
            out.observables.push_back(std::move(e));
        }
        return out;
    }

    // Shot mode: calibration tables (when estimating the confusion matrix)
    // followed by the data tables, all from independent child streams.
    if (readout && plan.correct_readout && plan.calibration_shots > 0) {
        RandomStream cal = rng.child(0);
        out.tables = calibration_counts(*readout, plan.calibration_shots, cal);
        out.calibration_tables = out.tables.size();
    }
    const RandomStream data = rng.child(1);
    for (std::size_t si = 0; si < ns; ++si)
        for (std::size_t ci = 0; ci < nc; ++ci)
            for (std::size_t g = 0; g < ng; ++g) {
                RandomStream r = data.child(at(si, ci, g));
                CountsTable t = sample_distribution(dist[at(si, ci, g)], n, plan.shots, r, settings[g].str());
                if (readout) t = apply_confusion(t, *readout, r);
                out.tables.push_back(std::move(t));
            }

    const std::size_t n_cal = out.calibration_tables;
    const bool correct = readout && plan.correct_readout;
    auto estimate = [&, n_cal, correct](const std::vector<CountsTable> &tables, std::size_t o) {
        std::optional<ConfusionMatrix> m;
        if (correct)
            m = n_cal > 0 ? estimate_confusion(std::vector<CountsTable>(tables.begin(), tables.begin() + static_cast<std::ptrdiff_t>(n_cal)))
                          : *readout;
        std::vector<StretchMeasurement> sm;
        for (std::size_t si = 0; si < ns; ++si) {
            double v = 0.0, var = 0.0;
            for (std::size_t ci = 0; ci < nc; ++ci)
                for (std::size_t k = 0; k < observables[o].size(); ++k) {
                    const CountsTable &t = tables[n_cal + at(si, ci, part_setting[o][k])];
                    const Eigen::VectorXd f = m ? correct_readout(t, *m) : t.frequencies();
                    const auto [mean, single] = detail::linear_value(observables[o][k].weights, f);
                    v += mean;
                    var += single / static_cast<double>(t.shots());
                }
            sm.push_back({plan.stretch[si], v * inv_circuits, var * inv_circuits * inv_circuits});
        }
        return sm;
    };
    if (correct && n_cal > 0)
        out.estimated_confusion =
            estimate_confusion(std::vector<CountsTable>(out.tables.begin(), out.tables.begin() + static_cast<std::ptrdiff_t>(n_cal)));
    for (std::size_t o = 0; o < observables.size(); ++o) {
        ObservableEstimate e;
        e.stretches = estimate(out.tables, o);
        e.mitigated = detail::combine_stretches(e.stretches, plan.linear_fit);
        if (plan.bootstrap_replicas >= 2) {
            const bool linear = plan.linear_fit;
            e.bootstrap = bootstrap(
                out.tables,
                [&, o, linear](const std::vector<CountsTable> &t) {
                    return detail::combine_stretches(estimate(t, o), linear).value;
                },
                plan.bootstrap_replicas, rng.child(2 + o).next_u64());
        }
        out.observables.push_back(std::move(e));
    }
    return out;
}

namespace detail {

inline MeasurementPlan plan_for(const ExperimentConfig &c, const NoiseModel &noise, ChannelCache *cache) {
    MeasurementPlan p;
    p.noise = noise;
    p.stretch = c.stretch;
    p.shots = c.shots;
    p.correct_readout = c.correct_readout;
    p.calibration_shots = c.calibration_shots;
    p.linear_fit = c.extrapolation == "linear";
    p.bootstrap_replicas = c.shots > 0 ? c.bootstrap_replicas : 0;
    p.cache = cache;
    return p;
}

inline std::string stretch_label(double c) { return "iz_c" + fmt(c); }

inline std::string bootstrap_std(const ObservableEstimate &e) { return e.bootstrap ? fmt(e.bootstrap->std) : ""; }

/// Seed for the k-th random sequence of a (seed, length) cell.
inline std::uint64_t sequence_seed(std::uint64_t seed, std::uint64_t length, std::uint64_t k) {
    RandomStream r(seed, {0x5e9u, length, k});
    return r.next_u64();
}

/// Shared body of the Clifford-decay and Bell-parity experiments: one cell
/// per (seed, length), averaged over random sequences.
template <class MakeCircuit>
std::vector<Artifact> sequence_experiment(const ExperimentConfig &c, const LoadedInputs &in, const std::string &stem,
                                          const std::string &quantity, const std::vector<std::uint64_t> &lengths,
                                          std::uint64_t sequences, std::size_t n, const Observable &obs,
                                          MakeCircuit make) {
    ChannelCache cache;
    const MeasurementPlan plan = plan_for(c, build_noise(c, in, n), &cache);
    Csv raw({"seed", "length", "stretch", quantity, "variance"});
    Csv mitigated({"seed", "length", "raw", "mitigated", "std_error", "bootstrap_std"});
    Csv boot({"seed", "length", "replica", "value"});
    std::size_t wall = 0;
    for (std::uint64_t seed : c.seeds)
        for (std::uint64_t m : lengths) {
            std::vector<Circuit> circuits;
            for (std::uint64_t k = 0; k < sequences; ++k) circuits.push_back(make(m, sequence_seed(seed, m, k)));
            const auto cell = measure_cell(circuits, {obs}, plan, RandomStream(seed, {0xce11u, m}), wall);
            const auto &e = cell.observables.front();
            for (const auto &s : e.stretches) raw.row(seed, m, s.c, s.estimate, s.variance);
            mitigated.row(seed, m, e.stretches.front().estimate, e.mitigated.value, e.mitigated.std_error(), bootstrap_std(e));
            if (e.bootstrap)
                for (std::size_t r = 0; r < e.bootstrap->replicas.size(); ++r) boot.row(seed, m, r, e.bootstrap->replicas[r]);
        }
    std::vector<Artifact> out{{stem + ".csv", raw.str()}, {stem + "_mitigated.csv", mitigated.str()}};
    if (plan.bootstrap_replicas >= 2) out.push_back({stem + "_bootstrap.csv", boot.str()});
    return out;
}

}  // namespace detail

inline std::vector<Artifact> run_clifford_decay(const ExperimentConfig &c, const LoadedInputs &in, std::size_t n) {
    return detail::sequence_experiment(
        c, in, "clifford_decay", "ground_population", c.clifford.lengths, c.clifford.sequences, n, ground_population(n),
        [&](std::uint64_t m, std::uint64_t seed) { return random_identity_clifford_circuit(n, m, seed, c.timing); });
}

inline std::vector<Artifact> run_bell_parity(const ExperimentConfig &c, const LoadedInputs &in) {
    return detail::sequence_experiment(c, in, "bell_parity", "parity", c.bell.lengths, c.bell.sequences, 2,
                                       observable_for(PauliSum(1.0, "ZZ")), [&](std::uint64_t m, std::uint64_t seed) {
                                           return bell_parity_experiment(m, seed, c.timing).circuit;
                                       });
}

/// Bloch vector along the 30-step trajectory: a 30-row table (per seed) with
/// the c = 1, mitigated and ideal components, plus a per-stretch long table.
inline std::vector<Artifact> run_trajectory(const ExperimentConfig &c, const LoadedInputs &in) {
    ChannelCache cache;
    const MeasurementPlan plan = detail::plan_for(c, build_noise(c, in, 1), &cache);
    const std::vector<Observable> axes{observable_for(PauliSum(1.0, "X")), observable_for(PauliSum(1.0, "Y")),
                                       observable_for(PauliSum(1.0, "Z"))};
    detail::Csv table({"seed", "step", "theta", "x", "y", "z", "x_mitigated", "y_mitigated", "z_mitigated", "x_ideal",
                       "y_ideal", "z_ideal", "z_std_error", "z_bootstrap_std"});
    detail::Csv per_stretch({"seed", "step", "stretch", "x", "y", "z"});
    detail::Csv boot({"seed", "step", "replica", "z"});
    const auto circuits = trajectory_circuits(c.timing);
    std::size_t wall = 0;
    for (std::uint64_t seed : c.seeds)
        for (std::size_t k = 0; k < circuits.size(); ++k) {
            const auto cell = measure_cell({circuits[k]}, axes, plan, RandomStream(seed, {0x7a1u, k}), wall);
            const DensityMatrix ideal = apply_ideal(DensityMatrix::ground(1), circuits[k]);
            const auto &[x, y, z] = std::tie(cell.observables[0], cell.observables[1], cell.observables[2]);
            table.row(seed, k + 1, trajectory_angle(k + 1), x.stretches[0].estimate, y.stretches[0].estimate,
                      z.stretches[0].estimate, x.mitigated.value, y.mitigated.value, z.mitigated.value,
                      expectation(ideal, PauliString("X")), expectation(ideal, PauliString("Y")),
                      expectation(ideal, PauliString("Z")), z.mitigated.std_error(), detail::bootstrap_std(z));
            for (std::size_t si = 0; si < plan.stretch.size(); ++si)
                per_stretch.row(seed, k + 1, plan.stretch[si], x.stretches[si].estimate, y.stretches[si].estimate,
                                z.stretches[si].estimate);
            if (z.bootstrap)
                for (std::size_t r = 0; r < z.bootstrap->replicas.size(); ++r) boot.row(seed, k + 1, r, z.bootstrap->replicas[r]);
        }
    std::vector<Artifact> out{{"trajectory.csv", table.str()}, {"trajectory_stretch.csv", per_stretch.str()}};
    if (plan.bootstrap_replicas >= 2) out.push_back({"trajectory_bootstrap.csv", boot.str()});
    return out;
}

inline CRDecayOptions cr_options(const ExperimentConfig &c) {
    CRDecayOptions o;
    o.t_gate = c.cr.t_gate;
    o.stretch = c.stretch;
    o.total_time = c.cr.total_time;
    o.points = c.cr.points;
    o.mode = c.cr.mode == "linear" ? CRMode::linear_only : CRMode::full_nonlinear;
    o.policy = c.cr.policy == "recalibrated" ? ScalingPolicy::recalibrated : ScalingPolicy::naive;
    o.drive = c.cr.drive == "perturbative" ? CRDrive::from_perturbative(c.cr.params) : CRDrive::quoted_simplified(c.cr.params.J);
    return o;
}

/// <IZ>(t) of the driven two-qubit model per stretch factor, combined
/// pointwise. Seeds play no role: the model is deterministic.
inline std::vector<Artifact> run_cr_model(const ExperimentConfig &c) {
    const auto s = simulate_cr_decay(cr_options(c), c.cr.params);
    std::vector<std::string> header{"t"};
    for (double f : s.stretch) header.push_back(detail::stretch_label(f));
    header.push_back("iz_mitigated");
    header.push_back("iz_noiseless");
    std::ostringstream csv;
    for (std::size_t i = 0; i < header.size(); ++i) csv << (i ? "," : "") << header[i];
    csv << '\n';
    for (std::size_t k = 0; k < s.t.size(); ++k) {
        csv << detail::fmt(s.t[k]);
        for (const auto &series : s.iz) csv << ',' << detail::fmt(series[k]);
        csv << ',' << detail::fmt(s.mitigated[k]) << ',' << detail::fmt(s.noiseless[k]) << '\n';
    }
    json drive = {{"coefficients", s.coefficients}, {"amplitude", s.amplitude}, {"strength", s.strength}, {"stretch", s.stretch}};
    return {{"cr_model.csv", csv.str()}, {"cr_drive.json", drive.dump(2) + "\n"}};
}

struct VQEScores {
    Epsilon raw;
    Epsilon mitigated;  ///< e1 from the fitted energy, e2 from the fitted terms
};

inline VQEScores vqe_scores(const VQERun &run, const PauliSum &h, const GroundState &g) {
    VQEScores s{epsilon_metrics(run.raw_terms, h, g), epsilon_metrics(run.mitigated_terms, h, g)};
    s.mitigated.e1 = std::abs(run.final_estimate.value - g.energy);
    return s;
}

inline PauliSum vqe_hamiltonian(const ExperimentConfig &c, const LoadedInputs &in) {
    if (c.vqe.hamiltonian == "file") {
        if (!in.hamiltonian) throw UsageError("Hamiltonian file not loaded");
        return *in.hamiltonian;
    }
    return heisenberg_hamiltonian(c.vqe.J, c.vqe.B, c.vqe.n_qubits);
}

inline VQEConfig vqe_config(const ExperimentConfig &c, const LoadedInputs &in, const PauliSum &h, std::size_t depth,
                            ChannelCache *cache) {
    VQEConfig v;
    const std::size_t n = h.n_qubits();
    v.ansatz = build_ansatz_config(c, n, depth);
    v.hamiltonian = h;
    const NoiseModel noise = build_noise(c, in, n);
    v.energy.noise = noise;
    v.energy.noise.confusion.reset();
    v.energy.stretch = c.stretch;
    v.energy.shots = c.shots;
    if (noise.confusion && c.shots > 0) {
        v.energy.readout = noise.confusion;
        // The identity "correction" leaves the frequencies as measured.
        if (!c.correct_readout) v.energy.correction = ConfusionMatrix::identity(n);
    }
    v.energy.cache = cache;
    v.spsa.a = c.vqe.a;
    v.spsa.c = c.vqe.c;
    v.spsa.alpha = c.vqe.alpha;
    v.spsa.gamma_exp = c.vqe.gamma;
    v.spsa.big_a = c.vqe.stability;
    v.spsa.iterations = c.vqe.iterations;
    v.spsa.averaging_window = c.vqe.window;
    v.spsa.target_step = c.vqe.target_step;
    v.final_stretch = c.vqe.final_stretch;
    v.final_shots = c.vqe.final_shots;
    v.calibration_shots = c.calibration_shots;
    v.initial_spread = c.vqe.initial_spread;
    return v;
}

namespace detail {

inline json to_json(const StretchEnergy &s) {
    return {{"c", s.c}, {"energy", s.energy}, {"variance", s.variance}, {"terms", s.terms}};
}

inline json to_json(const VQEEvaluation &e) {
    json st = json::array();
    for (const auto &s : e.stretches) st.push_back({{"c", s.c}, {"energy", s.energy}, {"variance", s.variance}});
    return {{"mitigated", e.mitigated}, {"stretches", st}};
}

}  // namespace detail

/// One SPSA run per (depth, seed). The JSON record keeps the whole history.
inline std::vector<Artifact> run_vqe_experiment(const ExperimentConfig &c, const LoadedInputs &in) {
    const PauliSum h = vqe_hamiltonian(c, in);
    const GroundState g = exact_ground(h);
    ChannelCache cache;
    detail::Csv summary({"d", "seed", "e1_raw", "e1_mitigated", "e2_raw", "e2_mitigated", "energy_raw", "energy_mitigated",
                         "energy_std_error", "exact_energy", "parameters"});
    json runs = json::array();
    for (std::uint64_t d : c.vqe.depths) {
        const VQEConfig cfg = vqe_config(c, in, h, d, &cache);
        for (std::uint64_t seed : c.seeds) {
            const VQERun run = run_vqe(cfg, seed);
            const VQEScores s = vqe_scores(run, h, g);
            summary.row(d, seed, s.raw.e1, s.mitigated.e1, s.raw.e2, s.mitigated.e2, run.final_stretches.front().energy,
                        run.final_estimate.value, run.final_estimate.std_error(), g.energy, cfg.ansatz.parameter_count());
            json history = json::array();
            for (std::size_t k = 0; k < run.history.size(); ++k)
                history.push_back({{"iteration", k + 1},
                                   {"theta", run.history[k].theta},
                                   {"plus", detail::to_json(run.history[k].plus)},
                                   {"minus", detail::to_json(run.history[k].minus)}});
            json finals = json::array();
            for (const auto &st : run.final_stretches) finals.push_back(detail::to_json(st));
            runs.push_back({{"depth", d},
                            {"seed", seed},
                            {"spsa_gain", run.spsa_gain},
                            {"final_controls", run.final_controls},
                            {"final_stretches", finals},
                            {"final_estimate", to_json(run.final_estimate)},
                            {"raw_terms", run.raw_terms},
                            {"mitigated_terms", run.mitigated_terms},
                            {"epsilon", {{"e1_raw", s.raw.e1}, {"e1_mitigated", s.mitigated.e1},
                                         {"e2_raw", s.raw.e2}, {"e2_mitigated", s.mitigated.e2}}},
                            {"history", history}});
        }
    }
    json record = {{"hamiltonian", format_pauli_sum(h)}, {"exact_energy", g.energy}, {"runs", runs}};
    return {{"vqe_summary.csv", summary.str()}, {"vqe_runs.json", record.dump(1) + "\n"}};
}

/// User circuit and observable: one estimate per seed (seeds only matter
/// when sampling). Shot mode also writes the raw counts per table.
inline std::vector<Artifact> run_zne_generic(const ExperimentConfig &c, const LoadedInputs &in) {
    if (!in.circuit || !in.observable) throw UsageError("circuit or observable not loaded");
    const std::size_t n = in.circuit->n_qubits();
    ChannelCache cache;
    const MeasurementPlan plan = detail::plan_for(c, build_noise(c, in, n), &cache);
    const Observable obs = observable_for(*in.observable);
    detail::Csv per_stretch({"seed", "stretch", "estimate", "variance"});
    detail::Csv mitigated({"seed", "raw", "mitigated", "std_error", "bootstrap_std"});
    detail::Csv boot({"seed", "replica", "value"});
    json estimates = json::array();
    std::vector<Artifact> extra;
    std::size_t wall = 0;
    for (std::uint64_t seed : c.seeds) {
        const auto cell = measure_cell({*in.circuit}, {obs}, plan, RandomStream(seed, {0x2e9u}), wall);
        const auto &e = cell.observables.front();
        for (const auto &s : e.stretches) per_stretch.row(seed, s.c, s.estimate, s.variance);
        mitigated.row(seed, e.stretches.front().estimate, e.mitigated.value, e.mitigated.std_error(), detail::bootstrap_std(e));
        json entry = {{"seed", seed}, {"estimate", to_json(e.mitigated)}};
        if (e.bootstrap) {
            entry["bootstrap_std"] = e.bootstrap->std;
            for (std::size_t r = 0; r < e.bootstrap->replicas.size(); ++r) boot.row(seed, r, e.bootstrap->replicas[r]);
        }
        estimates.push_back(entry);
        const std::string tag = "seed" + std::to_string(seed);
        for (std::size_t k = 0; k < cell.tables.size(); ++k) {
            std::ostringstream os;
            write_counts_csv(os, cell.tables[k]);
            const std::string what = k < cell.calibration_tables
                                         ? "calibration_" + std::to_string(k)
                                         : "t" + std::to_string(k - cell.calibration_tables) + "_" + cell.tables[k].setting;
            extra.push_back({"counts_" + tag + "_" + what + ".csv", os.str()});
        }
        if (cell.estimated_confusion) {
            std::ostringstream os;
            cell.estimated_confusion->to_csv(os);
            extra.push_back({"confusion_" + tag + ".csv", os.str()});
        }
    }
    std::vector<Artifact> out{{"zne.csv", per_stretch.str()},
                              {"zne_mitigated.csv", mitigated.str()},
                              {"zne_mitigated.json", estimates.dump(2) + "\n"}};
    if (plan.bootstrap_replicas >= 2) out.push_back({"zne_bootstrap.csv", boot.str()});
    for (auto &a : extra) out.push_back(std::move(a));
    return out;
}

/// Dispatch; assumes the config passed check_config.
inline std::vector<Artifact> run_experiment(const ExperimentConfig &c, const LoadedInputs &in) {
    switch (c.experiment) {
        case Experiment::clifford_decay_1q: return run_clifford_decay(c, in, 1);
        case Experiment::clifford_decay_2q: return run_clifford_decay(c, in, 2);
        case Experiment::trajectory: return run_trajectory(c, in);
        case Experiment::bell_parity: return run_bell_parity(c, in);
        case Experiment::cr_model: return run_cr_model(c);
        case Experiment::vqe: return run_vqe_experiment(c, in);
        case Experiment::zne_generic: return run_zne_generic(c, in);
    }
    throw UsageError("unknown experiment");
}

}  // namespace zne
