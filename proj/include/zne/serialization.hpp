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

// JSON forms of circuits and extrapolation results. Objects are emitted with
// sorted keys, so dumps are stable across runs.

#pragma once

#include <json.hpp>

#include <string>
#include <variant>

#include "zne/extrapolation.hpp"
#include "zne/pulse.hpp"

namespace zne {

using json = nlohmann::json;

inline json to_json(const PauliSum &s) {
    json out = json::array();
    for (const auto &t : s.terms()) out.push_back({{"coefficient", t.coefficient}, {"string", t.string.str()}});
    return out;
}

inline PauliSum pauli_sum_from_json(const json &j) {
    if (!j.is_array()) throw UsageError("pauli sum must be a JSON array");
    std::vector<PauliTerm> terms;
    for (const auto &t : j) terms.push_back({t.at("coefficient").get<double>(), PauliString(t.at("string").get<std::string>())});
    return PauliSum(std::move(terms));
}

inline json to_json(const Envelope &e) { return {{"amplitudes", e.amplitudes()}, {"breakpoints", e.breakpoints()}}; }

inline json to_json(const Operation &op) {
    if (const auto *p = std::get_if<PulseGate>(&op))
        return {{"duration", p->duration},
                {"envelope", to_json(p->envelope)},
                {"generator", to_json(p->generator)},
                {"kind", "pulse"},
                {"label", p->label}};
    const auto &g = std::get<InstantGate>(op);
    return {{"generator", to_json(g.generator)}, {"kind", "instant"}, {"label", g.label}};
}

inline json to_json(const Circuit &c) {
    json gates = json::array();
    for (const auto &op : c.operations()) gates.push_back(to_json(op));
    return {{"buffer_time", c.buffer_time()}, {"gates", gates}, {"n_qubits", c.n_qubits()}};
}

inline Circuit circuit_from_json(const json &j) {
    try {
        Circuit c(j.at("n_qubits").get<std::size_t>(), j.at("buffer_time").get<double>());
        for (const auto &g : j.at("gates")) {
            const auto kind = g.at("kind").get<std::string>();
            const auto gen = pauli_sum_from_json(g.at("generator"));
            const auto label = g.at("label").get<std::string>();
            if (kind == "instant") {
                c.add(InstantGate{gen, label});
            } else if (kind == "pulse") {
                const auto &e = g.at("envelope");
                c.add(PulseGate(gen,
                                Envelope(e.at("breakpoints").get<std::vector<double>>(),
                                         e.at("amplitudes").get<std::vector<double>>()),
                                label));
            } else {
                throw UsageError("unknown gate kind '" + kind + "'");
            }
        }
        return c;
    } catch (const json::exception &e) {
        throw UsageError(std::string("malformed circuit JSON: ") + e.what());
    }
}

inline json to_json(const MitigatedEstimate &m) {
    json inputs = json::array();
    for (const auto &in : m.inputs) inputs.push_back({{"c", in.c}, {"estimate", in.estimate}, {"variance", in.variance}});
    json out = {{"coefficients", m.coefficients},
                {"inputs", inputs},
                {"order", m.order},
                {"std_error", m.std_error()},
                {"value", m.value},
                {"variance", m.variance}};
    if (m.warning) out["warning"] = *m.warning;
    return out;
}

}  // namespace zne
