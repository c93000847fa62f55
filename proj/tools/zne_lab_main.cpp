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

// zne-lab command line:
//
//   zne-lab [run] <experiment> [--config FILE] [--seed N ...] [--stretch LIST]
//                              [--shots N] [--out DIR] [experiment flags]
//   zne-lab validate [<experiment>] [--config FILE] [flags]
//
// Flags are overrides applied to the config document before it is checked,
// so they obey the same schema. Exit status: 0 ok, 2 validation or usage
// error, 3 numerical or I/O failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "zne/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitFailure = 3;

constexpr const char *kOutputEnv = "ZNE_LAB_OUTPUT_DIR";
constexpr const char *kDefaultOutput = "zne-lab-out";

std::string quoted(const std::string &s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += (ch == '\n' || ch == '\r') ? ' ' : ch;
    }
    return out + "\"";
}

void report(const std::string &kind, const std::string &code, const std::string &detail) {
    std::cerr << "zne-lab: error kind=" << kind << " code=" << code << " detail=" << quoted(detail) << "\n";
}

/// Flag values that map one-to-one onto config paths.
struct Overrides {
    std::string config_file;
    std::vector<std::uint64_t> seeds;
    std::vector<double> stretch;
    std::optional<std::uint64_t> shots;
    std::string out;
    std::string noise;
    std::optional<double> t_gate;
    std::string hamiltonian;
    std::string hamiltonian_file;
    std::optional<double> J, B;
    std::vector<std::uint64_t> depths;
    std::optional<std::uint64_t> iterations;
    std::vector<std::uint64_t> lengths;
    std::optional<std::uint64_t> sequences;
    std::optional<std::uint64_t> bootstrap;
    std::string circuit;
    std::string observable;
    std::string extrapolation;
    std::vector<std::string> sets;
};

/// `key=value`, value parsed as JSON when possible and as a string otherwise.
void apply_set(zne::json &doc, const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw zne::UsageError("--set expects KEY=VALUE, got '" + assignment + "'");
    const std::string value = assignment.substr(eq + 1);
    zne::json parsed = zne::json::parse(value, nullptr, false);
    zne::set_path(doc, assignment.substr(0, eq), parsed.is_discarded() ? zne::json(value) : parsed);
}

void apply(zne::json &doc, const Overrides &o, const std::string &experiment) {
    using zne::set_path;
    if (!experiment.empty()) set_path(doc, "experiment", experiment);
    if (!o.seeds.empty()) set_path(doc, "seeds", o.seeds);
    if (!o.stretch.empty()) set_path(doc, "stretch", o.stretch);
    if (o.shots) set_path(doc, "shots", *o.shots);
    if (!o.out.empty()) set_path(doc, "output_dir", o.out);
    if (!o.noise.empty()) set_path(doc, "noise", o.noise);
    if (o.t_gate) set_path(doc, "cr.t_gate", *o.t_gate);
    if (!o.hamiltonian.empty()) set_path(doc, "vqe.hamiltonian", o.hamiltonian);
    if (!o.hamiltonian_file.empty()) {
        set_path(doc, "vqe.hamiltonian_file", o.hamiltonian_file);
        if (o.hamiltonian.empty()) set_path(doc, "vqe.hamiltonian", "file");
    }
    if (o.J) set_path(doc, "vqe.J", *o.J);
    if (o.B) set_path(doc, "vqe.B", *o.B);
    if (!o.depths.empty()) set_path(doc, "vqe.depths", o.depths);
    if (o.iterations) set_path(doc, "vqe.iterations", *o.iterations);
    const std::string section = doc.value("experiment", "") == "bell-parity" ? "bell" : "clifford";
    if (!o.lengths.empty()) set_path(doc, section + ".lengths", o.lengths);
    if (o.sequences) set_path(doc, section + ".sequences", *o.sequences);
    if (o.bootstrap) set_path(doc, "bootstrap_replicas", *o.bootstrap);
    if (!o.circuit.empty()) set_path(doc, "zne.circuit_file", o.circuit);
    if (!o.observable.empty()) set_path(doc, "zne.observable", o.observable);
    if (!o.extrapolation.empty()) set_path(doc, "extrapolation", o.extrapolation);
    for (const auto &s : o.sets) apply_set(doc, s);
}

std::string resolve_output_dir(const std::string &configured) {
    if (!configured.empty()) return configured;
    if (const char *env = std::getenv(kOutputEnv); env != nullptr && *env != '\0') return env;
    return kDefaultOutput;
}

void write_file(const std::filesystem::path &dir, const std::string &name, const std::string &content) {
    if (name.empty() || name.find('/') != std::string::npos || name.find('\\') != std::string::npos || name == "." ||
        name == "..")
        throw std::runtime_error("refusing to write artifact '" + name + "' outside the output directory");
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Zero-noise extrapolation simulation lab", "zne-lab"};
    app.set_version_flag("--version", std::string(ZNE_LAB_VERSION));
    std::vector<std::string> command;
    Overrides o;
    app.add_option("command", command, "[run|validate] <experiment>")->expected(0, 2);
    app.add_option("--config", o.config_file, "JSON config file");
    app.add_option("--seed,--seeds", o.seeds, "Seed(s); repeat or comma-separate")->delimiter(',');
    app.add_option("--stretch", o.stretch, "Stretch factors, e.g. 1,1.5,2")->delimiter(',');
    app.add_option("--shots", o.shots, "Shots per setting; 0 = exact expectations");
    app.add_option("--out", o.out, std::string("Output directory (default: $") + kOutputEnv + " or " + kDefaultOutput + ")");
    app.add_option("--noise", o.noise, "Noise preset; 'none' disables every noise source");
    app.add_option("--t-gate", o.t_gate, "cr-model: gate time in units of 1/J");
    app.add_option("--hamiltonian", o.hamiltonian, "vqe: heisenberg | file");
    app.add_option("--hamiltonian-file", o.hamiltonian_file, "vqe: Hamiltonian text file");
    app.add_option("--J", o.J, "vqe: Heisenberg exchange");
    app.add_option("--B", o.B, "vqe: Heisenberg field");
    app.add_option("--depth,--depths", o.depths, "vqe: ansatz depth(s)")->delimiter(',');
    app.add_option("--iterations", o.iterations, "vqe: SPSA iterations");
    app.add_option("--length,--lengths", o.lengths, "clifford/bell: sequence lengths")->delimiter(',');
    app.add_option("--sequences", o.sequences, "clifford/bell: random sequences per length");
    app.add_option("--bootstrap", o.bootstrap, "Bootstrap replicas (0 disables)");
    app.add_option("--circuit", o.circuit, "zne-generic: circuit JSON file");
    app.add_option("--observable", o.observable, "zne-generic: observable, e.g. '1 ZZ;0.5 XI'");
    app.add_option("--extrapolation", o.extrapolation, "richardson | linear");
    app.add_option("--set", o.sets, "Any config key: --set vqe.c=0.2 (repeatable)")
        ->allow_extra_args(false);
    app.footer("Experiments: clifford-decay-1q clifford-decay-2q trajectory bell-parity cr-model vqe zne-generic");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        report("usage", "cli.parse_error", e.what());
        return kExitValidation;
    }

    bool validate_only = false;
    std::string experiment;
    if (!command.empty() && (command.front() == "run" || command.front() == "validate")) {
        validate_only = command.front() == "validate";
        command.erase(command.begin());
    }
    if (command.size() > 1) {
        report("usage", "cli.extra_arguments", "unexpected argument '" + command[1] + "'");
        return kExitValidation;
    }
    if (!command.empty()) experiment = command.front();

    zne::json doc = zne::json::object();
    zne::ExperimentConfig cfg;
    zne::LoadedInputs inputs;
    std::vector<zne::Violation> violations;
    try {
        if (!o.config_file.empty()) {
            std::ifstream f(o.config_file);
            if (!f) {
                report("validation", "config.unreadable", o.config_file);
                return kExitValidation;
            }
            doc = zne::json::parse(f, nullptr, false);
            if (doc.is_discarded()) {
                report("validation", "config.parse_error", o.config_file + ": not valid JSON");
                return kExitValidation;
            }
        }
        apply(doc, o, experiment);
        violations = zne::validate_config(doc, cfg, inputs);
    } catch (const std::exception &e) {
        report("usage", "cli.bad_override", e.what());
        return kExitValidation;
    }

    if (validate_only) {
        for (const auto &v : violations) std::cout << v.code << '\t' << v.detail << '\n';
        return violations.empty() ? kExitOk : kExitValidation;
    }
    if (!violations.empty()) {
        for (const auto &v : violations) report("validation", v.code, v.detail);
        return kExitValidation;
    }

    cfg.output_dir = resolve_output_dir(cfg.output_dir);
    const auto started = std::chrono::steady_clock::now();
    std::vector<zne::Artifact> artifacts;
    try {
        artifacts = zne::run_experiment(cfg, inputs);
    } catch (const zne::NumericalError &e) {
        report("numerical", "run.numerical_failure", e.what());
        return kExitFailure;
    } catch (const zne::CapacityError &e) {
        report("numerical", "run.capacity", e.what());
        return kExitFailure;
    } catch (const std::invalid_argument &e) {
        report("validation", "run.invalid_input", e.what());
        return kExitValidation;
    } catch (const std::exception &e) {
        report("numerical", "run.failure", e.what());
        return kExitFailure;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    try {
        const std::filesystem::path dir(cfg.output_dir);
        std::filesystem::create_directories(dir);
        const zne::json resolved = zne::to_json(cfg);
        artifacts.push_back({"config.json", resolved.dump(2) + "\n"});
        zne::json files = zne::json::array();
        for (const auto &a : artifacts) {
            write_file(dir, a.name, a.content);
            files.push_back({{"name", a.name}, {"bytes", a.content.size()}});
        }
        const zne::json manifest = {{"tool", "zne-lab"},
                                    {"version", ZNE_LAB_VERSION},
                                    {"experiment", zne::experiment_name(cfg.experiment)},
                                    {"seeds", cfg.seeds},
                                    {"config", resolved},
                                    {"artifacts", files},
                                    {"wall_time_seconds", seconds}};
        write_file(dir, "manifest.json", manifest.dump(2) + "\n");
    } catch (const std::exception &e) {
        report("io", "output.write_failed", e.what());
        return kExitFailure;
    }
    return kExitOk;
}
