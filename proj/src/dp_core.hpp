#pragma once

// Leaf-to-root recurrences shared by the log-domain and exact-rational engines.

#include <cstdint>
#include <vector>

#include "varent/engines.hpp"
#include "varent/tree.hpp"

namespace varent::detail {

template <class V>
struct DpTable {
    std::vector<std::vector<V>> value;
    std::vector<std::vector<std::uint8_t>> flag;
};

// f(u) = min(w(u), sum_children f); w = +inf above the admissible depth. Ties cut
// at the shallower node.
template <class Ops>
DpTable<typename Ops::value_type> cutset_table(const CylinderTree& t, const NodeWeighting& w, const Ops& ops) {
    using V = typename Ops::value_type;
    const int D = t.depth();
    DpTable<V> out;
    out.value.resize(static_cast<std::size_t>(D) + 1);
    out.flag.resize(static_cast<std::size_t>(D) + 1);
    for (int d = D; d >= 0; --d) {
        const auto n = t.class_count(d);
        auto& v = out.value[static_cast<std::size_t>(d)];
        auto& fl = out.flag[static_cast<std::size_t>(d)];
        v.resize(n);
        fl.assign(n, 0);
        const bool admissible = d >= w.min_depth;
        const V wt = admissible ? ops.weight(w.exponent(d)) : ops.zero();
        for (ClassId c = 0; c < n; ++c) {
            if (d == D) {
                v[c] = wt;
                fl[c] = 1;
                continue;
            }
            V sum = ops.zero();
            for (const auto& e : t.children(d, c)) sum = ops.add(sum, out.value[static_cast<std::size_t>(d) + 1][e.child]);
            if (admissible && !ops.less(sum, wt)) {
                v[c] = wt;
                fl[c] = 1;
            } else {
                v[c] = sum;
            }
        }
    }
    return out;
}

// g(u) = max(w(u), sum_children g); w = -inf above the admissible depth. Ties keep
// the deeper set.
template <class Ops>
DpTable<typename Ops::value_type> antichain_table(const CylinderTree& t, const NodeWeighting& w, const Ops& ops) {
    using V = typename Ops::value_type;
    const int D = t.depth();
    DpTable<V> out;
    out.value.resize(static_cast<std::size_t>(D) + 1);
    out.flag.resize(static_cast<std::size_t>(D) + 1);
    for (int d = D; d >= 0; --d) {
        const auto n = t.class_count(d);
        auto& v = out.value[static_cast<std::size_t>(d)];
        auto& fl = out.flag[static_cast<std::size_t>(d)];
        v.resize(n);
        fl.assign(n, 0);
        const bool admissible = d >= w.min_depth;
        const V wt = admissible ? ops.weight(w.exponent(d)) : ops.zero();
        for (ClassId c = 0; c < n; ++c) {
            if (d == D) {
                v[c] = wt;
                fl[c] = admissible ? 1 : 0;
                continue;
            }
            V sum = ops.zero();
            for (const auto& e : t.children(d, c)) sum = ops.add(sum, out.value[static_cast<std::size_t>(d) + 1][e.child]);
            if (admissible && ops.less(sum, wt)) {
                v[c] = wt;
                fl[c] = 1;
            } else {
                v[c] = sum;
            }
        }
    }
    return out;
}

}  // namespace varent::detail
