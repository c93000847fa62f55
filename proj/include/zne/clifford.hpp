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

// Clifford groups on one and two qubits.
//
// An element is stored as its tableau: the signed Pauli images U X_q U^+ and
// U Z_q U^+ of the generators. All arithmetic is exact (Pauli products with
// phases tracked mod 4). Both groups are small enough (24 and 11520 elements
// modulo global phase) to enumerate completely; every element gets a
// minimum-cost word over the native gates
//
//   Z90 (q)  = exp(-i pi/4 Z_q)      virtual, cost 1
//   X90 (q)  = exp(-i pi/4 X_q)      one pulse, cost 10^3
//   ZX90     = exp(-i pi/4 Z_0 X_1)  echoed cross resonance, cost 10^6
//
// found by Dijkstra from the identity. The costs make the search minimise
// entangling gates first, then pulses. Sampling is uniform over indices and
// inversion is an exact tableau lookup.

#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <mutex>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "zne/pauli.hpp"
#include "zne/random.hpp"

namespace zne {

struct SignedPauli {
    bool negative = false;
    PauliString string;

    bool operator==(const SignedPauli &) const = default;
    std::string str() const { return (negative ? "-" : "+") + string.str(); }
};

enum class NativeKind { Z90, X90, ZX90 };

/// One native gate. Z90 carries 1..3 quarter turns; ZX90 acts with `qubit`
/// as control and `target` as target.
struct NativeGate {
    NativeKind kind = NativeKind::X90;
    std::size_t qubit = 0;
    int quarter_turns = 1;
    std::size_t target = 1;

    bool operator==(const NativeGate &) const = default;

    static NativeGate z90(std::size_t q, int turns = 1) { return {NativeKind::Z90, q, ((turns % 4) + 4) % 4, 0}; }
    static NativeGate x90(std::size_t q) { return {NativeKind::X90, q, 1, 0}; }
    static NativeGate zx90(std::size_t control, std::size_t target) { return {NativeKind::ZX90, control, 1, target}; }

    /// Pauli G with gate = exp(-i pi/4 G) (per quarter turn for Z90).
    PauliString generator(std::size_t n) const {
        if (kind == NativeKind::Z90) return PauliString::single(n, qubit, Axis::Z);
        if (kind == NativeKind::X90) return PauliString::single(n, qubit, Axis::X);
        std::vector<Axis> axes(n, Axis::I);
        axes.at(qubit) = Axis::Z;
        axes.at(target) = Axis::X;
        return PauliString(std::move(axes));
    }

    std::string str() const {
        switch (kind) {
            case NativeKind::Z90: return "Z90^" + std::to_string(quarter_turns) + "(q" + std::to_string(qubit) + ")";
            case NativeKind::X90: return "X90(q" + std::to_string(qubit) + ")";
            default: return "ZX90(q" + std::to_string(qubit) + ",q" + std::to_string(target) + ")";
        }
    }
};

class CliffordTableau {
   public:
    CliffordTableau() = default;

    static CliffordTableau identity(std::size_t n) {
        check_register(n);
        CliffordTableau t;
        t.n_ = n;
        for (std::size_t q = 0; q < n; ++q) {
            t.images_.push_back({false, PauliString::single(n, q, Axis::X)});
            t.images_.push_back({false, PauliString::single(n, q, Axis::Z)});
        }
        return t;
    }

    /// From images ordered X_0, Z_0, X_1, Z_1, ...; throws unless they satisfy
    /// the Pauli commutation relations.
    static CliffordTableau from_images(std::vector<SignedPauli> images) {
        if (images.empty() || images.size() % 2 != 0) throw UsageError("tableau needs 2n images");
        CliffordTableau t;
        t.n_ = images.size() / 2;
        t.images_ = std::move(images);
        for (const auto &im : t.images_)
            if (im.string.size() != t.n_) throw UsageError("tableau image has the wrong length");
        if (!t.is_symplectic()) throw UsageError("tableau images violate the Pauli commutation relations");
        return t;
    }

    std::size_t n_qubits() const { return n_; }
    const std::vector<SignedPauli> &images() const { return images_; }
    const SignedPauli &x_image(std::size_t q) const { return images_[2 * q]; }
    const SignedPauli &z_image(std::size_t q) const { return images_[2 * q + 1]; }

    /// U P U^+ for a signed Pauli P.
    SignedPauli apply(const SignedPauli &p) const {
        if (p.string.size() != n_) throw UsageError("Pauli and tableau sizes differ");
        Phase phase = p.negative ? Phase::minus_one() : Phase::one();
        PauliString acc = PauliString::identity(n_);
        auto absorb = [&](const SignedPauli &img) {
            auto prod = multiply(acc, img.string);
            phase = phase * prod.phase * (img.negative ? Phase::minus_one() : Phase::one());
            acc = std::move(prod.product);
        };
        for (std::size_t q = 0; q < n_; ++q) {
            switch (p.string[q]) {
                case Axis::I: break;
                case Axis::X: absorb(x_image(q)); break;
                case Axis::Z: absorb(z_image(q)); break;
                case Axis::Y:  // Y = i X Z
                    phase = phase * Phase{1};
                    absorb(x_image(q));
                    absorb(z_image(q));
                    break;
            }
        }
        if (phase.power % 2 != 0) throw UsageError("non-Hermitian image; tableau is corrupt");
        return {phase.power == 2, std::move(acc)};
    }

    /// The element "this, then next": T(P) = next(this(P)).
    CliffordTableau then(const CliffordTableau &next) const {
        if (next.n_ != n_) throw UsageError("tableau sizes differ");
        CliffordTableau out;
        out.n_ = n_;
        for (const auto &im : images_) out.images_.push_back(next.apply(im));
        return out;
    }

    /// Conjugation by exp(-i pi/4 G): P -> i P G when P anticommutes with G.
    CliffordTableau then(const NativeGate &g) const {
        const PauliString gen = g.generator(n_);
        const int turns = g.kind == NativeKind::Z90 ? g.quarter_turns : 1;
        CliffordTableau out = *this;
        for (int t = 0; t < turns; ++t)
            for (auto &im : out.images_) {
                if (commutes(im.string, gen)) continue;
                auto prod = multiply(im.string, gen);
                const Phase phase = Phase{1} * prod.phase * (im.negative ? Phase::minus_one() : Phase::one());
                im = {phase.power == 2, std::move(prod.product)};
            }
        return out;
    }

    /// Exact inverse from the full Pauli image table.
    CliffordTableau inverse() const {
        CliffordTableau out;
        out.n_ = n_;
        out.images_.resize(2 * n_);
        const std::size_t count = std::size_t{1} << (2 * n_);
        for (std::size_t code = 0; code < count; ++code) {
            std::vector<Axis> axes(n_);
            for (std::size_t q = 0; q < n_; ++q) axes[q] = static_cast<Axis>((code >> (2 * q)) & 3);
            const SignedPauli p{false, PauliString(axes)};
            const SignedPauli image = apply(p);
            // U P U^+ = s Q  implies  U^+ Q U = s P.
            for (std::size_t q = 0; q < n_; ++q) {
                for (int which = 0; which < 2; ++which) {
                    const auto target = PauliString::single(n_, q, which == 0 ? Axis::X : Axis::Z);
                    if (image.string == target) out.images_[2 * q + which] = {image.negative, p.string};
                }
            }
        }
        return out;
    }

    bool is_identity() const { return *this == identity(n_); }

    bool is_symplectic() const {
        for (std::size_t a = 0; a < images_.size(); ++a) {
            if (images_[a].string.is_identity()) return false;
            for (std::size_t b = a + 1; b < images_.size(); ++b) {
                const bool should_anticommute = (a / 2 == b / 2);
                if (commutes(images_[a].string, images_[b].string) == should_anticommute) return false;
            }
        }
        return true;
    }

    /// Packed 5 bits per image (sign, x, z per qubit); unique for n <= 2.
    std::uint64_t key() const {
        std::uint64_t k = 0;
        for (const auto &im : images_) {
            k = (k << 1) | (im.negative ? 1 : 0);
            k = (k << n_) | im.string.x_mask();
            k = (k << n_) | im.string.z_mask();
        }
        return k;
    }

    bool operator==(const CliffordTableau &) const = default;

    std::string str() const {
        std::string s;
        for (std::size_t q = 0; q < n_; ++q) {
            if (q) s += ", ";
            s += "X" + std::to_string(q) + "->" + x_image(q).str() + ", Z" + std::to_string(q) + "->" + z_image(q).str();
        }
        return s;
    }

   private:
    std::size_t n_ = 0;
    std::vector<SignedPauli> images_;
};

/// Tableau of a native gate word applied left to right.
inline CliffordTableau clifford_of(const std::vector<NativeGate> &gates, std::size_t n) {
    CliffordTableau t = CliffordTableau::identity(n);
    for (const auto &g : gates) t = t.then(g);
    return t;
}

/// Merges runs of Z90 gates per qubit into single frame changes.
inline std::vector<NativeGate> merge_virtual_z(const std::vector<NativeGate> &gates, std::size_t n) {
    std::vector<NativeGate> out;
    std::vector<int> pending(n, 0);
    auto flush = [&] {
        for (std::size_t q = 0; q < n; ++q)
            if (pending[q] % 4 != 0) out.push_back(NativeGate::z90(q, pending[q]));
        std::fill(pending.begin(), pending.end(), 0);
    };
    for (const auto &g : gates) {
        if (g.kind == NativeKind::Z90) {
            pending.at(g.qubit) = (pending.at(g.qubit) + g.quarter_turns) % 4;
            continue;
        }
        flush();
        out.push_back(g);
    }
    flush();
    return out;
}

/// Complete enumeration of the n-qubit Clifford group (n = 1 or 2).
class CliffordGroup {
   public:
    static constexpr std::uint64_t kZCost = 1, kPulseCost = 1000, kEntanglerCost = 1000000;

    static const CliffordGroup &get(std::size_t n) {
        if (n == 1) {
            static const CliffordGroup g1(1);
            return g1;
        }
        if (n == 2) {
            static const CliffordGroup g2(2);
            return g2;
        }
        throw UsageError("Clifford groups are provided for 1 or 2 qubits");
    }

    std::size_t n_qubits() const { return n_; }
    std::size_t size() const { return elements_.size(); }
    const CliffordTableau &element(std::size_t i) const { return elements_.at(i); }

    std::size_t index_of(const CliffordTableau &t) const {
        auto it = index_.find(t.key());
        if (it == index_.end() || t.n_qubits() != n_) throw UsageError("tableau is not in the group");
        return it->second;
    }

    /// Minimum-cost native word (merged Z frames) implementing element i.
    const std::vector<NativeGate> &word(std::size_t i) const { return words_.at(i); }

    std::size_t entangler_count(std::size_t i) const {
        return static_cast<std::size_t>(std::count_if(words_.at(i).begin(), words_.at(i).end(),
                                                      [](const NativeGate &g) { return g.kind == NativeKind::ZX90; }));
    }

    std::size_t pulse_count(std::size_t i) const {
        return static_cast<std::size_t>(std::count_if(words_.at(i).begin(), words_.at(i).end(),
                                                      [](const NativeGate &g) { return g.kind == NativeKind::X90; }));
    }

    std::size_t sample(RandomStream &rng) const { return static_cast<std::size_t>(rng.below(size())); }

    std::size_t inverse_index(std::size_t i) const { return index_of(element(i).inverse()); }

   private:
    explicit CliffordGroup(std::size_t n) : n_(n) {
        std::vector<NativeGate> moves;
        for (std::size_t q = 0; q < n; ++q) {
            moves.push_back(NativeGate::z90(q));
            moves.push_back(NativeGate::x90(q));
        }
        if (n == 2) moves.push_back(NativeGate::zx90(0, 1));
        auto cost_of = [](const NativeGate &g) {
            return g.kind == NativeKind::Z90 ? kZCost : g.kind == NativeKind::X90 ? kPulseCost : kEntanglerCost;
        };

        // Dijkstra with insertion-order tie-breaking, so the result is deterministic.
        struct Node {
            CliffordTableau t;
            std::uint64_t cost;
            std::int64_t parent;
            NativeGate via;
            bool settled;
        };
        std::vector<Node> nodes;
        std::unordered_map<std::uint64_t, std::size_t> seen;
        using Entry = std::tuple<std::uint64_t, std::size_t>;  // (cost, node)
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
        nodes.push_back({CliffordTableau::identity(n), 0, -1, {}, false});
        seen.emplace(nodes[0].t.key(), 0);
        queue.emplace(0, 0);
        std::vector<std::size_t> order;
        while (!queue.empty()) {
            auto [cost, id] = queue.top();
            queue.pop();
            if (nodes[id].settled || cost != nodes[id].cost) continue;
            nodes[id].settled = true;
            order.push_back(id);
            for (const auto &m : moves) {
                CliffordTableau next = nodes[id].t.then(m);
                const std::uint64_t c = cost + cost_of(m);
                auto [it, fresh] = seen.emplace(next.key(), nodes.size());
                if (fresh) {
                    nodes.push_back({std::move(next), c, static_cast<std::int64_t>(id), m, false});
                    queue.emplace(c, it->second);
                } else if (!nodes[it->second].settled && c < nodes[it->second].cost) {
                    nodes[it->second].cost = c;
                    nodes[it->second].parent = static_cast<std::int64_t>(id);
                    nodes[it->second].via = m;
                    queue.emplace(c, it->second);
                }
            }
        }
        for (std::size_t id : order) {
            std::vector<NativeGate> path;
            for (std::int64_t k = static_cast<std::int64_t>(id); nodes[k].parent >= 0; k = nodes[k].parent)
                path.push_back(nodes[k].via);
            std::reverse(path.begin(), path.end());
            index_.emplace(nodes[id].t.key(), elements_.size());
            elements_.push_back(nodes[id].t);
            words_.push_back(merge_virtual_z(path, n));
        }
    }

    std::size_t n_;
    std::vector<CliffordTableau> elements_;
    std::vector<std::vector<NativeGate>> words_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

}  // namespace zne
