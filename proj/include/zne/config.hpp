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

// Experiment configuration: a JSON document read strictly (unknown keys and
// wrong types are violations), plus the named semantic checks run before any
// computation. Every violation has a stable dotted code.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zne/cr_drive.hpp"
#include "zne/protocols.hpp"
#include "zne/serialization.hpp"
#include "zne/vqe.hpp"

namespace zne {

enum class Experiment { clifford_decay_1q, clifford_decay_2q, trajectory, bell_parity, cr_model, vqe, zne_generic };

inline constexpr std::array<std::pair<Experiment, std::string_view>, 7> kExperimentNames{{
    {Experiment::clifford_decay_1q, "clifford-decay-1q"},
    {Experiment::clifford_decay_2q, "clifford-decay-2q"},
    {Experiment::trajectory, "trajectory"},
    {Experiment::bell_parity, "bell-parity"},
    {Experiment::cr_model, "cr-model"},
    {Experiment::vqe, "vqe"},
    {Experiment::zne_generic, "zne-generic"},
}};

inline std::optional<Experiment> experiment_from_name(std::string_view name) {
    for (const auto &[e, n] : kExperimentNames)
        if (n == name) return e;
    return std::nullopt;
}

inline std::string experiment_name(Experiment e) {
    for (const auto &[k, n] : kExperimentNames)
        if (k == e) return std::string(n);
    return {};
}

struct Violation {
    std::string code;    ///< stable dotted name, e.g. stretch.first_must_be_1
    std::string detail;  ///< human-readable context

    bool operator==(const Violation &) const = default;
};

/// Times are in ns, rates in 1/ns. Infinite times are written as null.
struct NoiseSpec {
    bool enabled = true;
    double t1 = 40000.0;
    double t2 = 40000.0;
    std::vector<QubitCoherence> per_qubit;  ///< overrides t1/t2 when non-empty
    double depolarizing = 0.0;
    double readout_flip = 0.0;      ///< symmetric per-qubit bit-flip probability
    std::string confusion_file;     ///< header-free row-major CSV
    std::vector<std::pair<std::size_t, double>> drift;
};

struct CliffordSpec {
    std::vector<std::uint64_t> lengths{1, 2, 4, 8, 16, 32};
    std::uint64_t sequences = 10;
};

struct BellSpec {
    std::vector<std::uint64_t> lengths{0, 1, 2, 4, 8};
    std::uint64_t sequences = 10;
};

struct CRSpec {
    double t_gate = 2.0;
    double total_time = 100.0;
    std::uint64_t points = 400;
    std::string mode = "full";       ///< full | linear
    std::string policy = "naive";    ///< naive | recalibrated
    std::string drive = "quoted";    ///< quoted | perturbative
    CRParams params{};
};

struct VQESpec {
    std::string hamiltonian = "heisenberg";  ///< heisenberg | file
    double J = 1.0;
    double B = 1.0;
    std::uint64_t n_qubits = 4;
    std::string hamiltonian_file;
    std::vector<std::uint64_t> depths{1};
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;  ///< empty means ring
    double entangler_angle = std::numbers::pi / 4;
    std::uint64_t iterations = 300;
    std::uint64_t window = 25;
    std::optional<double> a;
    double c = 0.1;
    double alpha = 0.602;
    double gamma = 0.101;
    std::optional<double> stability;
    double target_step = 0.1;
    std::vector<double> final_stretch{1.0, 1.1, 1.25, 1.5};
    std::uint64_t final_shots = 100000;
    double initial_spread = std::numbers::pi;
};

struct ZneSpec {
    std::string circuit_file;
    std::string observable = "1 Z";  ///< Hamiltonian text format; lines split by ';' allowed
};

struct ExperimentConfig {
    Experiment experiment = Experiment::trajectory;
    std::vector<std::uint64_t> seeds{0};
    std::vector<double> stretch{1.0, 2.0};
    std::uint64_t shots = 0;  ///< 0 evaluates exact expectations
    std::string output_dir;
    std::uint64_t bootstrap_replicas = kDefaultBootstrapReplicas;
    std::string extrapolation = "richardson";  ///< richardson | linear
    bool correct_readout = true;
    std::uint64_t calibration_shots = 0;  ///< 0 corrects with the true matrix
    NoiseSpec noise{};
    NativeTiming timing{};
    CliffordSpec clifford{};
    BellSpec bell{};
    CRSpec cr{};
    VQESpec vqe{};
    ZneSpec zne{};
};

namespace detail {

/// Non-negative integer, whether stored signed or unsigned.
inline bool as_count(const json &x, std::uint64_t &v) {
    if (x.is_number_unsigned()) {
        v = x.get<std::uint64_t>();
        return true;
    }
    if (x.is_number_integer() && x.get<std::int64_t>() >= 0) {
        v = static_cast<std::uint64_t>(x.get<std::int64_t>());
        return true;
    }
    return false;
}

/// Reads one JSON object, remembering which keys were consumed so the rest
/// can be reported as unknown.
class StrictObject {
   public:
    StrictObject(const json &j, std::string path, std::vector<Violation> &out) : j_(j), path_(std::move(path)), out_(out) {
        if (!j_.is_object()) {
            type_error(path_, "object");
            ok_ = false;
        }
    }

    StrictObject(const StrictObject &) = delete;
    StrictObject &operator=(const StrictObject &) = delete;

    ~StrictObject() {
        if (!ok_) return;
        for (const auto &[key, value] : j_.items())
            if (!seen_.count(key)) out_.push_back({"config.unknown_key", where(key)});
    }

    const json *find(const std::string &key) {
        if (!ok_) return nullptr;
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string where(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

    void read(const std::string &key, double &v) {
        if (const json *x = find(key)) {
            if (x->is_number()) v = x->get<double>();
            else type_error(where(key), "number");
        }
    }

    /// Number or null (null meaning infinite time).
    void read_time(const std::string &key, double &v) {
        if (const json *x = find(key)) {
            if (x->is_null()) v = kInfinity;
            else if (x->is_number()) v = x->get<double>();
            else type_error(where(key), "number or null");
        }
    }

    void read(const std::string &key, std::optional<double> &v) {
        if (const json *x = find(key)) {
            if (x->is_null()) v.reset();
            else if (x->is_number()) v = x->get<double>();
            else type_error(where(key), "number or null");
        }
    }

    void read(const std::string &key, std::uint64_t &v) {
        if (const json *x = find(key)) {
            if (!as_count(*x, v)) type_error(where(key), "non-negative integer");
        }
    }

    void read(const std::string &key, bool &v) {
        if (const json *x = find(key)) {
            if (x->is_boolean()) v = x->get<bool>();
            else type_error(where(key), "boolean");
        }
    }

    void read(const std::string &key, std::string &v) {
        if (const json *x = find(key)) {
            if (x->is_string()) v = x->get<std::string>();
            else type_error(where(key), "string");
        }
    }

    void read(const std::string &key, std::vector<double> &v) {
        if (const json *x = find(key)) {
            std::vector<double> out;
            if (!x->is_array()) return type_error(where(key), "array of numbers");
            for (const auto &e : *x) {
                if (!e.is_number()) return type_error(where(key), "array of numbers");
                out.push_back(e.get<double>());
            }
            v = std::move(out);
        }
    }

    /// Also accepts a single integer for convenience.
    void read(const std::string &key, std::vector<std::uint64_t> &v) {
        if (const json *x = find(key)) {
            std::vector<std::uint64_t> out;
            std::uint64_t one = 0;
            if (as_count(*x, one)) {
                v = {one};
                return;
            }
            if (!x->is_array()) return type_error(where(key), "array of non-negative integers");
            for (const auto &e : *x) {
                if (!as_count(e, one)) return type_error(where(key), "array of non-negative integers");
                out.push_back(one);
            }
            v = std::move(out);
        }
    }

    void type_error(const std::string &where, const std::string &expected) {
        out_.push_back({"config.type_error", where + ": expected " + expected});
    }

   private:
    const json &j_;
    std::string path_;
    std::vector<Violation> &out_;
    std::set<std::string> seen_;
    bool ok_ = true;
};

inline void read_noise(const json &j, NoiseSpec &n, std::vector<Violation> &out) {
    if (j.is_string()) {
        if (j.get<std::string>() == "none") n = NoiseSpec{false, kInfinity, kInfinity, {}, 0.0, 0.0, {}, {}};
        else out.push_back({"noise.unknown_preset", "noise: only the string \"none\" is a preset"});
        return;
    }
    StrictObject o(j, "noise", out);
    o.read_time("t1", n.t1);
    o.read_time("t2", n.t2);
    if (const json *pq = o.find("per_qubit")) {
        n.per_qubit.clear();
        if (!pq->is_array()) {
            o.type_error("noise.per_qubit", "array of {t1, t2} objects");
        } else {
            for (std::size_t i = 0; i < pq->size(); ++i) {
                QubitCoherence q{n.t1, n.t2};
                StrictObject e((*pq)[i], "noise.per_qubit[" + std::to_string(i) + "]", out);
                e.read_time("t1", q.t1);
                e.read_time("t2", q.t2);
                n.per_qubit.push_back(q);
            }
        }
    }
    o.read("depolarizing", n.depolarizing);
    o.read("readout_flip", n.readout_flip);
    o.read("confusion_file", n.confusion_file);
    if (const json *d = o.find("drift")) {
        n.drift.clear();
        bool good = d->is_array();
        if (good)
            for (const auto &step : *d) {
                std::uint64_t start = 0;
                if (!step.is_array() || step.size() != 2 || !as_count(step[0], start) || !step[1].is_number()) {
                    good = false;
                    break;
                }
                n.drift.emplace_back(start, step[1].get<double>());
            }
        if (!good) o.type_error("noise.drift", "array of [start_index, multiplier] pairs");
    }
    n.enabled = true;
}

inline void read_timing(const json &j, NativeTiming &t, std::vector<Violation> &out) {
    StrictObject o(j, "timing", out);
    o.read("x90_duration", t.x90_duration);
    o.read("buffer", t.buffer);
    std::uint64_t seg = t.x_segments;
    o.read("x_segments", seg);
    t.x_segments = seg;
    o.read("cr_half_duration", t.cr_half_duration);
    o.read("cr_rise", t.cr_rise);
    seg = t.cr_edge_segments;
    o.read("cr_edge_segments", seg);
    t.cr_edge_segments = seg;
}

inline void read_vqe(const json &j, VQESpec &v, std::vector<Violation> &out) {
    StrictObject o(j, "vqe", out);
    o.read("hamiltonian", v.hamiltonian);
    o.read("J", v.J);
    o.read("B", v.B);
    o.read("n_qubits", v.n_qubits);
    o.read("hamiltonian_file", v.hamiltonian_file);
    o.read("depths", v.depths);
    if (const json *p = o.find("pairs")) {
        v.pairs.clear();
        bool good = p->is_array();
        if (good)
            for (const auto &e : *p) {
                std::uint64_t a = 0, b = 0;
                if (!e.is_array() || e.size() != 2 || !as_count(e[0], a) || !as_count(e[1], b)) {
                    good = false;
                    break;
                }
                v.pairs.emplace_back(a, b);
            }
        if (!good) o.type_error("vqe.pairs", "array of [control, target] pairs");
    }
    o.read("entangler_angle", v.entangler_angle);
    o.read("iterations", v.iterations);
    o.read("window", v.window);
    o.read("a", v.a);
    o.read("c", v.c);
    o.read("alpha", v.alpha);
    o.read("gamma", v.gamma);
    o.read("stability", v.stability);
    o.read("target_step", v.target_step);
    o.read("final_stretch", v.final_stretch);
    o.read("final_shots", v.final_shots);
    o.read("initial_spread", v.initial_spread);
}

inline json time_json(double t) { return std::isfinite(t) ? json(t) : json(nullptr); }

}  // namespace detail

/// Parses a config document; every problem found is appended to `out`.
inline ExperimentConfig parse_config(const json &doc, std::vector<Violation> &out) {
    ExperimentConfig cfg;
    detail::StrictObject o(doc, "", out);
    std::string name;
    o.read("experiment", name);
    if (name.empty()) {
        out.push_back({"experiment.missing", "experiment: required"});
    } else if (auto e = experiment_from_name(name)) {
        cfg.experiment = *e;
    } else {
        out.push_back({"experiment.unknown", "experiment: '" + name + "' is not a known experiment"});
    }
    o.read("seeds", cfg.seeds);
    o.read("stretch", cfg.stretch);
    o.read("shots", cfg.shots);
    o.read("output_dir", cfg.output_dir);
    o.read("bootstrap_replicas", cfg.bootstrap_replicas);
    o.read("extrapolation", cfg.extrapolation);
    o.read("correct_readout", cfg.correct_readout);
    o.read("calibration_shots", cfg.calibration_shots);
    if (const json *n = o.find("noise")) detail::read_noise(*n, cfg.noise, out);
    if (const json *t = o.find("timing")) detail::read_timing(*t, cfg.timing, out);
    if (const json *c = o.find("clifford")) {
        detail::StrictObject s(*c, "clifford", out);
        s.read("lengths", cfg.clifford.lengths);
        s.read("sequences", cfg.clifford.sequences);
    }
    if (const json *b = o.find("bell")) {
        detail::StrictObject s(*b, "bell", out);
        s.read("lengths", cfg.bell.lengths);
        s.read("sequences", cfg.bell.sequences);
    }
    if (const json *c = o.find("cr")) {
        detail::StrictObject s(*c, "cr", out);
        s.read("t_gate", cfg.cr.t_gate);
        s.read("total_time", cfg.cr.total_time);
        s.read("points", cfg.cr.points);
        s.read("mode", cfg.cr.mode);
        s.read("policy", cfg.cr.policy);
        s.read("drive", cfg.cr.drive);
        s.read("J", cfg.cr.params.J);
        s.read("delta1", cfg.cr.params.delta1);
        s.read("detuning", cfg.cr.params.Delta);
        s.read("lambda", cfg.cr.params.lambda);
    }
    if (const json *v = o.find("vqe")) detail::read_vqe(*v, cfg.vqe, out);
    if (const json *z = o.find("zne")) {
        detail::StrictObject s(*z, "zne", out);
        s.read("circuit_file", cfg.zne.circuit_file);
        s.read("observable", cfg.zne.observable);
    }
    return cfg;
}

/// Fully resolved config; parsing it back yields the same config.
inline json to_json(const ExperimentConfig &c) {
    json j;
    j["experiment"] = experiment_name(c.experiment);
    j["seeds"] = c.seeds;
    j["stretch"] = c.stretch;
    j["shots"] = c.shots;
    j["output_dir"] = c.output_dir;
    j["bootstrap_replicas"] = c.bootstrap_replicas;
    j["extrapolation"] = c.extrapolation;
    j["correct_readout"] = c.correct_readout;
    j["calibration_shots"] = c.calibration_shots;
    if (!c.noise.enabled) {
        j["noise"] = "none";
    } else {
        json n;
        n["t1"] = detail::time_json(c.noise.t1);
        n["t2"] = detail::time_json(c.noise.t2);
        if (!c.noise.per_qubit.empty()) {
            n["per_qubit"] = json::array();
            for (const auto &q : c.noise.per_qubit)
                n["per_qubit"].push_back({{"t1", detail::time_json(q.t1)}, {"t2", detail::time_json(q.t2)}});
        }
        n["depolarizing"] = c.noise.depolarizing;
        n["readout_flip"] = c.noise.readout_flip;
        if (!c.noise.confusion_file.empty()) n["confusion_file"] = c.noise.confusion_file;
        if (!c.noise.drift.empty()) {
            n["drift"] = json::array();
            for (const auto &[start, m] : c.noise.drift) n["drift"].push_back({start, m});
        }
        j["noise"] = n;
    }
    j["timing"] = {{"x90_duration", c.timing.x90_duration},   {"buffer", c.timing.buffer},
                   {"x_segments", c.timing.x_segments},       {"cr_half_duration", c.timing.cr_half_duration},
                   {"cr_rise", c.timing.cr_rise},             {"cr_edge_segments", c.timing.cr_edge_segments}};
    switch (c.experiment) {
        case Experiment::clifford_decay_1q:
        case Experiment::clifford_decay_2q:
            j["clifford"] = {{"lengths", c.clifford.lengths}, {"sequences", c.clifford.sequences}};
            break;
        case Experiment::bell_parity:
            j["bell"] = {{"lengths", c.bell.lengths}, {"sequences", c.bell.sequences}};
            break;
        case Experiment::cr_model:
            j["cr"] = {{"t_gate", c.cr.t_gate},       {"total_time", c.cr.total_time}, {"points", c.cr.points},
                       {"mode", c.cr.mode},           {"policy", c.cr.policy},         {"drive", c.cr.drive},
                       {"J", c.cr.params.J},          {"delta1", c.cr.params.delta1},  {"detuning", c.cr.params.Delta},
                       {"lambda", c.cr.params.lambda}};
            break;
        case Experiment::vqe: {
            const auto &v = c.vqe;
            json pairs = json::array();
            for (const auto &[a, b] : v.pairs) pairs.push_back({a, b});
            j["vqe"] = {{"hamiltonian", v.hamiltonian},
                        {"J", v.J},
                        {"B", v.B},
                        {"n_qubits", v.n_qubits},
                        {"hamiltonian_file", v.hamiltonian_file},
                        {"depths", v.depths},
                        {"pairs", pairs},
                        {"entangler_angle", v.entangler_angle},
                        {"iterations", v.iterations},
                        {"window", v.window},
                        {"a", v.a ? json(*v.a) : json(nullptr)},
                        {"c", v.c},
                        {"alpha", v.alpha},
                        {"gamma", v.gamma},
                        {"stability", v.stability ? json(*v.stability) : json(nullptr)},
                        {"target_step", v.target_step},
                        {"final_stretch", v.final_stretch},
                        {"final_shots", v.final_shots},
                        {"initial_spread", v.initial_spread}};
            break;
        }
        case Experiment::zne_generic:
            j["zne"] = {{"circuit_file", c.zne.circuit_file}, {"observable", c.zne.observable}};
            break;
        case Experiment::trajectory:
            break;
    }
    return j;
}

/// Inputs read from files named in the config.
struct LoadedInputs {
    std::optional<ConfusionMatrix> confusion;
    std::optional<PauliSum> hamiltonian;
    std::optional<Circuit> circuit;
    std::optional<PauliSum> observable;
};

namespace detail {

inline std::optional<std::string> slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::string observable_text(std::string text) {
    for (char &ch : text)
        if (ch == ';') ch = '\n';
    return text;
}

}  // namespace detail

/// Register size of the simulated experiment (0 when it cannot be known).
inline std::size_t register_size(const ExperimentConfig &c, const LoadedInputs &in) {
    switch (c.experiment) {
        case Experiment::clifford_decay_1q:
        case Experiment::trajectory: return 1;
        case Experiment::clifford_decay_2q:
        case Experiment::bell_parity:
        case Experiment::cr_model: return 2;
        case Experiment::vqe:
            if (c.vqe.hamiltonian == "file") return in.hamiltonian ? in.hamiltonian->n_qubits() : 0;
            return c.vqe.n_qubits;
        case Experiment::zne_generic: return in.circuit ? in.circuit->n_qubits() : 0;
    }
    return 0;
}

/// Noise model for `n` qubits; assumes the config passed validation.
inline NoiseModel build_noise(const ExperimentConfig &c, const LoadedInputs &in, std::size_t n) {
    if (!c.noise.enabled) return NoiseModel::none(n);
    NoiseModel m = NoiseModel::none(n);
    m.per_qubit = c.noise.per_qubit.empty() ? std::vector<QubitCoherence>(n, QubitCoherence{c.noise.t1, c.noise.t2})
                                            : c.noise.per_qubit;
    m.depolarizing_rate = c.noise.depolarizing;
    if (in.confusion) m.confusion = in.confusion;
    else if (c.noise.readout_flip > 0.0) m.confusion = ConfusionMatrix::symmetric_flip(n, c.noise.readout_flip);
    if (!c.noise.drift.empty()) m.drift = DriftProfile(c.noise.drift);
    return m;
}

inline AnsatzConfig build_ansatz_config(const ExperimentConfig &c, std::size_t n, std::size_t depth) {
    AnsatzConfig a;
    a.n_qubits = n;
    a.depth = depth;
    if (!c.vqe.pairs.empty()) {
        a.entangler_pairs.clear();
        for (const auto &[p, q] : c.vqe.pairs) a.entangler_pairs.push_back({p, q});
    } else {
        a.entangler_pairs = ring_pairs(n);
    }
    a.entangler_angle = c.vqe.entangler_angle;
    a.timing = c.timing;
    return a;
}

/// Every semantic violation of a parsed config; also loads referenced files.
inline std::vector<Violation> check_config(const ExperimentConfig &c, LoadedInputs &in) {
    std::vector<Violation> v;
    auto add = [&](std::string code, std::string detail) { v.push_back({std::move(code), std::move(detail)}); };

    if (c.seeds.empty()) add("seeds.empty", "seeds: at least one seed is required");
    if (auto why = StretchSet::violation(c.stretch); !why.empty()) add(why, "stretch");
    else if (c.stretch.front() < 1.0) add("stretch.below_1", "stretch");
    if (c.extrapolation != "richardson" && c.extrapolation != "linear")
        add("extrapolation.unknown_method", "extrapolation: '" + c.extrapolation + "'");
    if (c.extrapolation == "linear" && c.stretch.size() < 2)
        add("stretch.too_few_for_fit", "a linear fit needs at least two stretch factors");
    if (c.bootstrap_replicas == 1) add("bootstrap.too_few_replicas", "bootstrap_replicas must be 0 or at least 2");

    const NativeTiming &t = c.timing;
    if (!(t.x90_duration > 0.0) || !(t.cr_half_duration > 0.0) || !(t.buffer >= 0.0) || !(t.cr_rise >= 0.0) ||
        2.0 * t.cr_rise > t.cr_half_duration)
        add("timing.invalid_duration", "timing: durations must be positive and rise <= half the CR pulse");
    if (t.x_segments < 1 || t.cr_edge_segments < 1) add("timing.no_segments", "timing: segment counts must be >= 1");

    // Files named by the config.
    if (c.noise.enabled && !c.noise.confusion_file.empty()) {
        if (auto text = detail::slurp(c.noise.confusion_file)) {
            try {
                std::istringstream s(*text);
                in.confusion = ConfusionMatrix::from_csv(s);
            } catch (const std::exception &e) {
                add("noise.confusion_invalid", c.noise.confusion_file + ": " + e.what());
            }
        } else {
            add("noise.confusion_file_unreadable", c.noise.confusion_file);
        }
        if (c.noise.readout_flip > 0.0) add("noise.readout_conflict", "set readout_flip or confusion_file, not both");
    }
    if (c.experiment == Experiment::vqe && c.vqe.hamiltonian == "file") {
        if (c.vqe.hamiltonian_file.empty()) add("vqe.hamiltonian_file_missing", "vqe.hamiltonian is 'file'");
        else if (auto text = detail::slurp(c.vqe.hamiltonian_file)) {
            try {
                in.hamiltonian = parse_pauli_sum(*text);
            } catch (const std::exception &e) {
                add("vqe.hamiltonian_invalid", c.vqe.hamiltonian_file + ": " + e.what());
            }
        } else {
            add("vqe.hamiltonian_file_unreadable", c.vqe.hamiltonian_file);
        }
    }
    if (c.experiment == Experiment::zne_generic) {
        if (c.zne.circuit_file.empty()) add("zne.circuit_file_missing", "zne.circuit_file is required");
        else if (auto text = detail::slurp(c.zne.circuit_file)) {
            try {
                in.circuit = circuit_from_json(json::parse(*text));
            } catch (const std::exception &e) {
                add("zne.circuit_invalid", c.zne.circuit_file + ": " + e.what());
            }
        } else {
            add("zne.circuit_file_unreadable", c.zne.circuit_file);
        }
        try {
            in.observable = parse_pauli_sum(detail::observable_text(c.zne.observable));
        } catch (const std::exception &e) {
            add("zne.observable_invalid", e.what());
        }
        if (in.circuit && in.observable && in.observable->n_qubits() != in.circuit->n_qubits())
            add("zne.observable_register_mismatch", "observable and circuit act on different registers");
    }

    // Noise, once the register size is known.
    const std::size_t n = register_size(c, in);
    if (c.noise.enabled && c.experiment != Experiment::cr_model) {
        if (!c.noise.per_qubit.empty() && n > 0 && c.noise.per_qubit.size() != n)
            add("noise.per_qubit_size", "noise.per_qubit has " + std::to_string(c.noise.per_qubit.size()) +
                                            " entries for " + std::to_string(n) + " qubits");
        if (!(c.noise.readout_flip >= 0.0 && c.noise.readout_flip < 0.5))
            add("noise.readout_flip_out_of_range", "noise.readout_flip must lie in [0, 0.5)");
        std::vector<QubitCoherence> qs = c.noise.per_qubit;
        if (qs.empty()) qs.push_back({c.noise.t1, c.noise.t2});
        NoiseModel probe = NoiseModel::none(qs.size());
        probe.per_qubit = qs;
        probe.depolarizing_rate = c.noise.depolarizing;
        std::set<std::string> seen;
        for (const auto &code : probe.violations())
            if (seen.insert(code).second) add(code, "noise");
        if (in.confusion && n > 0 && in.confusion->n_qubits() != n)
            add("noise.confusion_size", "confusion matrix acts on " + std::to_string(in.confusion->n_qubits()) +
                                            " qubits, experiment on " + std::to_string(n));
        try {
            if (!c.noise.drift.empty()) DriftProfile{c.noise.drift};
        } catch (const std::exception &e) {
            add("noise.drift_invalid", e.what());
        }
        if (!c.noise.drift.empty() && c.experiment == Experiment::vqe)
            add("noise.drift_unsupported", "drift is not modelled inside the VQE loop");
    }

    switch (c.experiment) {
        case Experiment::clifford_decay_1q:
        case Experiment::clifford_decay_2q:
            if (c.clifford.lengths.empty()) add("clifford.no_lengths", "clifford.lengths is empty");
            for (auto m : c.clifford.lengths)
                if (m == 0) add("clifford.length_zero", "clifford.lengths must be >= 1");
            if (c.clifford.sequences == 0) add("clifford.no_sequences", "clifford.sequences must be >= 1");
            break;
        case Experiment::bell_parity:
            if (c.bell.lengths.empty()) add("bell.no_lengths", "bell.lengths is empty");
            if (c.bell.sequences == 0) add("bell.no_sequences", "bell.sequences must be >= 1");
            break;
        case Experiment::cr_model:
            for (const auto &code : c.cr.params.violations()) add(code, "cr");
            if (!(c.cr.t_gate > 0.0)) add("cr.t_gate_not_positive", "cr.t_gate");
            if (!(c.cr.total_time > 0.0)) add("cr.total_time_not_positive", "cr.total_time");
            if (c.cr.points < 2) add("cr.too_few_points", "cr.points must be >= 2");
            if (c.cr.mode != "full" && c.cr.mode != "linear") add("cr.unknown_mode", "cr.mode: '" + c.cr.mode + "'");
            if (c.cr.policy != "naive" && c.cr.policy != "recalibrated")
                add("cr.unknown_policy", "cr.policy: '" + c.cr.policy + "'");
            if (c.cr.drive != "quoted" && c.cr.drive != "perturbative")
                add("cr.unknown_drive", "cr.drive: '" + c.cr.drive + "'");
            break;
        case Experiment::vqe: {
            const auto &q = c.vqe;
            if (q.hamiltonian != "heisenberg" && q.hamiltonian != "file")
                add("vqe.unknown_hamiltonian", "vqe.hamiltonian: '" + q.hamiltonian + "'");
            if (q.depths.empty()) add("vqe.no_depths", "vqe.depths is empty");
            if (auto why = StretchSet::violation(q.final_stretch); !why.empty()) add(why, "vqe.final_stretch");
            if (n < 1 || n > kMaxQubits) {
                if (q.hamiltonian == "heisenberg") add("ansatz.n_qubits_out_of_range", "vqe.n_qubits");
                break;
            }
            AnsatzConfig a = build_ansatz_config(c, n, q.depths.empty() ? 1 : q.depths.front());
            for (const auto &code : a.violations()) add(code, "vqe");
            SPSAConfig s;
            s.a = q.a;
            s.c = q.c;
            s.alpha = q.alpha;
            s.gamma_exp = q.gamma;
            s.big_a = q.stability;
            s.iterations = q.iterations;
            s.averaging_window = q.window;
            s.target_step = q.target_step;
            for (const auto &code : s.violations()) add(code, "vqe");
            break;
        }
        case Experiment::trajectory:
        case Experiment::zne_generic: break;
    }
    return v;
}

/// Parse plus semantic checks. Semantic checks run only on a document that
/// parsed cleanly, so each problem is reported once.
inline std::vector<Violation> validate_config(const json &doc, ExperimentConfig &cfg, LoadedInputs &in) {
    std::vector<Violation> v;
    cfg = parse_config(doc, v);
    if (!v.empty()) return v;
    return check_config(cfg, in);
}

/// Sets `value` at a dotted path, creating objects along the way; used for
/// command-line overrides so they go through the same strict reader.
inline void set_path(json &doc, const std::string &dotted, json value) {
    json *cur = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw UsageError("empty key in override path '" + dotted + "'");
        if (!cur->is_object()) *cur = json::object();
        if (dot == std::string::npos) {
            (*cur)[key] = std::move(value);
            return;
        }
        cur = &(*cur)[key];
        start = dot + 1;
    }
}

}  // namespace zne
