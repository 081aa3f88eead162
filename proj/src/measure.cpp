#include "varent/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "varent/error.hpp"
#include "varent/generators.hpp"
#include "varent/logmath.hpp"
#include "varent/tree_io.hpp"

namespace varent {

namespace {

// Conditionals proportional to `weights` over the children of one class.
// Returns false when the children carry no weight at all (uniform fallback).
bool fill_conditionals(std::span<const TreeEdge> kids, const std::vector<double>& weights, double* out, bool& partial) {
    double Z = 0.0;
    for (const auto& e : kids) Z += weights[static_cast<std::size_t>(e.symbol) - 1];
    if (Z <= 0.0) {
        for (std::size_t i = 0; i < kids.size(); ++i) out[i] = -std::log(static_cast<double>(kids.size()));
        partial = true;
        return false;
    }
    if (Z < 1.0 - 1e-12) partial = true;
    for (std::size_t i = 0; i < kids.size(); ++i) {
        const double p = weights[static_cast<std::size_t>(kids[i].symbol) - 1];
        out[i] = p > 0.0 ? std::log(p) - std::log(Z) : kNegInf;
    }
    return true;
}

void check_probability_vector(std::span<const double> p, int l, const char* what) {
    if (static_cast<int>(p.size()) != l) throw DomainError(std::string(what) + " must have one entry per symbol");
    double sum = 0.0;
    for (double x : p) {
        if (!(x >= 0.0)) throw DomainError(std::string(what) + " entries must be nonnegative");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError(std::string(what) + " must sum to 1");
}

}  // namespace

CylinderMeasure::CylinderMeasure(std::shared_ptr<const CylinderTree> tree, double log_root_mass,
                                 std::vector<std::vector<double>> log_conditional, bool renormalized)
    : tree_(std::move(tree)), log_root_(log_root_mass), log_cond_(std::move(log_conditional)), renormalized_(renormalized) {
    if (!tree_) throw DomainError("measure needs a tree");
    if (!(log_root_ > kNegInf)) throw DomainError("zero-mass root");
    const int D = tree_->depth();
    log_cond_.resize(static_cast<std::size_t>(D) + 1);
    for (int d = 0; d < D; ++d)
        if (log_cond_[static_cast<std::size_t>(d)].size() != tree_->edge_count(d))
            throw DomainError("conditional table does not match the tree at depth " + std::to_string(d));
}

std::vector<double> CylinderMeasure::log_prefix_masses(const Word& x, std::size_t len) const {
    if (len > x.size()) throw InsufficientPrefix("word shorter than the requested prefix");
    if (static_cast<int>(len) > tree_->depth())
        throw InsufficientPrefix("prefix length " + std::to_string(len) + " exceeds tree depth " + std::to_string(tree_->depth()));
    std::vector<double> out(len + 1, kNegInf);
    out[0] = log_root_;
    ClassId c = 0;
    for (std::size_t d = 0; d < len; ++d) {
        const auto kids = tree_->children(static_cast<int>(d), c);
        const auto base = tree_->edge_begin(static_cast<int>(d), c);
        bool found = false;
        for (std::size_t i = 0; i < kids.size(); ++i)
            if (kids[i].symbol == x[d]) {
                out[d + 1] = out[d] + log_cond_[d][base + i];
                c = kids[i].child;
                found = true;
                break;
            }
        if (!found) break;
    }
    return out;
}

double CylinderMeasure::log_mass(const Word& u) const {
    if (static_cast<int>(u.size()) > tree_->depth()) return kNegInf;
    return log_prefix_masses(u, u.size()).back();
}

double CylinderMeasure::mass(const Word& u) const { return std::exp(log_mass(u)); }

double CylinderMeasure::additivity_defect() const {
    double worst = 0.0;
    for (int d = 0; d < tree_->depth(); ++d)
        for (ClassId c = 0; c < tree_->class_count(d); ++c) {
            const auto base = tree_->edge_begin(d, c);
            LogAccumulator acc;
            for (std::size_t i = 0; i < tree_->children(d, c).size(); ++i) acc.add(log_cond_[static_cast<std::size_t>(d)][base + i]);
            worst = std::max(worst, std::abs(std::expm1(acc.value())));
        }
    return worst;
}

CylinderMeasure CylinderMeasure::normalized() const { return CylinderMeasure(tree_, 0.0, log_cond_, renormalized_); }

Word CylinderMeasure::sample_branch(std::mt19937_64& rng) const {
    Word w;
    ClassId c = 0;
    for (int d = 0; d < tree_->depth(); ++d) {
        const auto kids = tree_->children(d, c);
        const auto base = tree_->edge_begin(d, c);
        const double u = unit_draw(rng());
        double cum = 0.0;
        std::size_t pick = kids.size() - 1;
        for (std::size_t i = 0; i < kids.size(); ++i) {
            cum += std::exp(log_cond_[static_cast<std::size_t>(d)][base + i]);
            if (u < cum) {
                pick = i;
                break;
            }
        }
        // Never step onto a zero-mass edge through rounding in the last bucket.
        while (pick > 0 && log_cond_[static_cast<std::size_t>(d)][base + pick] == kNegInf) --pick;
        w.push_back(kids[pick].symbol);
        c = kids[pick].child;
    }
    return w;
}

std::vector<std::pair<Word, double>> CylinderMeasure::entries(std::size_t limit) const {
    std::vector<std::pair<Word, double>> out{{Word{}, log_root_}};
    std::vector<std::tuple<Word, ClassId, double>> frontier{{Word{}, 0, log_root_}};
    for (int d = 0; d < tree_->depth(); ++d) {
        std::vector<std::tuple<Word, ClassId, double>> next;
        for (const auto& [w, c, lm] : frontier) {
            const auto kids = tree_->children(d, c);
            const auto base = tree_->edge_begin(d, c);
            for (std::size_t i = 0; i < kids.size(); ++i) {
                Word child = w;
                child.push_back(kids[i].symbol);
                const double lc = lm + log_cond_[static_cast<std::size_t>(d)][base + i];
                out.emplace_back(child, lc);
                if (out.size() > limit) throw DomainError("measure has too many nodes to enumerate");
                next.emplace_back(std::move(child), kids[i].child, lc);
            }
        }
        frontier = std::move(next);
    }
    return out;
}

CylinderMeasure bernoulli(std::shared_ptr<const CylinderTree> tree, std::span<const double> p) {
    const int l = tree->alphabet().size();
    check_probability_vector(p, l, "Bernoulli weights");
    const std::vector<double> weights(p.begin(), p.end());
    std::vector<std::vector<double>> cond(static_cast<std::size_t>(tree->depth()) + 1);
    bool partial = false;
    for (int d = 0; d < tree->depth(); ++d) {
        cond[static_cast<std::size_t>(d)].resize(tree->edge_count(d));
        for (ClassId c = 0; c < tree->class_count(d); ++c) {
            const bool ok = fill_conditionals(tree->children(d, c), weights, cond[static_cast<std::size_t>(d)].data() + tree->edge_begin(d, c), partial);
            if (!ok && d == 0) throw DomainError("zero-mass root: no first symbol of the tree has positive weight");
        }
    }
    return CylinderMeasure(std::move(tree), 0.0, std::move(cond), partial);
}

CylinderMeasure markov(std::shared_ptr<const CylinderTree> tree, const std::vector<std::vector<double>>& P,
                       std::span<const double> pi) {
    const int l = tree->alphabet().size();
    check_probability_vector(pi, l, "initial law");
    if (static_cast<int>(P.size()) != l) throw DomainError("transition matrix must be l x l");
    for (const auto& row : P) check_probability_vector(row, l, "transition matrix row");

    auto refined = std::make_shared<const CylinderTree>(tree->refine_by_last_symbol());
    std::vector<std::vector<double>> cond(static_cast<std::size_t>(refined->depth()) + 1);
    bool partial = false;
    const std::vector<double> initial(pi.begin(), pi.end());
    for (int d = 0; d < refined->depth(); ++d) {
        cond[static_cast<std::size_t>(d)].resize(refined->edge_count(d));
        for (ClassId c = 0; c < refined->class_count(d); ++c) {
            const auto& weights = d == 0 ? initial : P[static_cast<std::size_t>(*refined->incoming_symbol(d, c)) - 1];
            const bool ok = fill_conditionals(refined->children(d, c), weights, cond[static_cast<std::size_t>(d)].data() + refined->edge_begin(d, c), partial);
            if (!ok && d == 0) throw DomainError("zero-mass root: the initial law misses every first symbol");
        }
    }
    return CylinderMeasure(std::move(refined), 0.0, std::move(cond), partial);
}

nlohmann::json measure_to_json(const CylinderMeasure& mu, const std::string& tree_ref) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "cylinder_measure";
    j["tree_ref"] = tree_ref;
    j["alphabet"] = mu.tree().alphabet().size();
    j["depth"] = mu.tree().depth();
    j["renormalized"] = mu.renormalized();
    auto& arr = j["entries"] = nlohmann::json::array();
    for (const auto& [w, lm] : mu.entries()) {
        if (lm == kNegInf) arr.push_back({format_word(w), nullptr});
        else arr.push_back({format_word(w), lm});
    }
    return j;
}

CylinderMeasure measure_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("entries") || !j.contains("alphabet") || !j.contains("depth"))
        throw DomainError("measure JSON needs 'alphabet', 'depth' and 'entries'");
    if (j.contains("schema_version") && j["schema_version"].get<int>() != kSchemaVersion)
        throw DomainError("unsupported measure schema_version");
    Alphabet alphabet(j["alphabet"].get<int>());
    const int D = j["depth"].get<int>();
    std::vector<std::pair<Word, std::size_t>> nodes;
    std::map<Word, double> lmass;
    std::size_t i = 0;
    for (const auto& item : j["entries"]) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_string())
            throw DomainError("entries[" + std::to_string(i) + "]: expected [word, mass_log]");
        Word w = parse_word(item[0].get<std::string>(), alphabet);
        lmass[w] = item[1].is_null() ? kNegInf : item[1].get<double>();
        nodes.emplace_back(std::move(w), i++);
    }
    auto tree = std::make_shared<const CylinderTree>(tree_from_node_list(alphabet, D, nodes, true));
    if (!lmass.count(Word{})) throw DomainError("measure JSON lacks the root entry");
    std::vector<std::vector<double>> cond(static_cast<std::size_t>(D) + 1);
    // Explicit tree: class order is lexicographic, so representatives are the words themselves.
    for (int d = 0; d < D; ++d) {
        cond[static_cast<std::size_t>(d)].resize(tree->edge_count(d));
        for (ClassId c = 0; c < tree->class_count(d); ++c) {
            const Word u = tree->representative(d, c);
            const double lu = lmass.at(u);
            const auto kids = tree->children(d, c);
            const auto base = tree->edge_begin(d, c);
            LogAccumulator sum;
            for (const auto& e : kids) {
                Word v = u;
                v.push_back(e.symbol);
                sum.add(lmass.at(v));
            }
            if (lu == kNegInf) {
                if (sum.value() != kNegInf) throw DomainError("additivity violated below zero-mass node '" + format_word(u) + "'");
                for (std::size_t k = 0; k < kids.size(); ++k)
                    cond[static_cast<std::size_t>(d)][base + k] = -std::log(static_cast<double>(kids.size()));
                continue;
            }
            if (std::abs(std::expm1(sum.value() - lu)) > 1e-9)
                throw DomainError("additivity violated at node '" + format_word(u) + "'");
            for (std::size_t k = 0; k < kids.size(); ++k) {
                Word v = u;
                v.push_back(kids[k].symbol);
                cond[static_cast<std::size_t>(d)][base + k] = lmass.at(v) - lu;
            }
        }
    }
    const bool renorm = j.value("renormalized", false);
    return CylinderMeasure(tree, lmass.at(Word{}), std::move(cond), renorm);
}

int tail_window_begin(int n_max) { return n_max - std::max(1, n_max / 3) + 1; }

LocalEntropyEstimate local_entropy(const CylinderMeasure& mu, const Word& x, ScaleIndex m, int n_max,
                                   LocalNormalization norm) {
    if (n_max < 1) throw DomainError("n_max must be >= 1");
    const auto need = static_cast<std::size_t>(n_max + m.value());
    if (x.size() < need)
        throw InsufficientPrefix("point has length " + std::to_string(x.size()) + " but n_max + m = " + std::to_string(need));
    const auto lm = mu.log_prefix_masses(x, need);
    LocalEntropyEstimate est;
    est.point = Word(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(need));
    est.m = m.value();
    est.values.resize(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) {
        const double l = lm[static_cast<std::size_t>(n + m.value())];
        const double denom = norm == LocalNormalization::time ? n : n + m.value();
        est.values[static_cast<std::size_t>(n) - 1] = l == kNegInf ? kPosInf : -l / denom;
    }
    est.window_begin = tail_window_begin(n_max);
    est.window_end = n_max;
    const auto first = est.values.begin() + (est.window_begin - 1);
    est.liminf_estimate = *std::min_element(first, est.values.end());
    est.limsup_estimate = *std::max_element(first, est.values.end());
    return est;
}

namespace {

struct StateKey {
    ClassId c;
    long long lm;
    long long stat;
    bool operator==(const StateKey&) const = default;
};

struct StateKeyHash {
    std::size_t operator()(const StateKey& k) const noexcept {
        std::size_t h = std::hash<long long>()(k.lm);
        h ^= std::hash<long long>()(k.stat) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= std::hash<std::uint32_t>()(k.c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

struct State {
    double lm;         // log mass of the node
    double stat;       // running min or max over the window so far (NaN before it)
    double log_count;  // number of merged nodes
};

constexpr double kQuantum = 1e12;

long long quantize(double v) { return std::isnan(v) ? std::numeric_limits<long long>::min() : std::llround(v * kQuantum); }

double update_stat(double stat, double v, LocalKind kind) {
    if (std::isnan(stat)) return v;
    return kind == LocalKind::lower ? std::min(stat, v) : std::max(stat, v);
}

}  // namespace

IntegralEstimate integral_local_entropy(const CylinderMeasure& mu, ScaleIndex m, int n_max, LocalKind kind,
                                        const IntegralOptions& opt) {
    if (n_max < 1) throw DomainError("n_max must be >= 1");
    const int L = n_max + m.value();
    const auto& tree = mu.tree();
    if (tree.depth() < L) throw InsufficientPrefix("tree depth " + std::to_string(tree.depth()) + " < n_max + m = " + std::to_string(L));
    IntegralEstimate out;
    out.n_max = n_max;
    out.m = m.value();
    out.window_begin = tail_window_begin(n_max);
    const auto mu_n = mu.normalized();
    auto value_at = [&](double lm, int depth) {
        const int n = depth - m.value();
        const double denom = opt.norm == LocalNormalization::time ? n : depth;
        return -lm / denom;
    };

    if (!opt.force_monte_carlo) {
        std::vector<std::pair<StateKey, State>> current{{{0, 0, quantize(NAN)}, {0.0, NAN, 0.0}}};
        bool overflow = false;
        for (int d = 0; d < L && !overflow; ++d) {
            std::unordered_map<StateKey, std::size_t, StateKeyHash> index;
            std::vector<std::pair<StateKey, State>> next;
            for (const auto& [key, st] : current) {
                const auto kids = tree.children(d, key.c);
                const auto base = tree.edge_begin(d, key.c);
                for (std::size_t i = 0; i < kids.size(); ++i) {
                    const double lc = mu_n.log_conditional(d, base + i);
                    if (lc == kNegInf) continue;
                    State ns{st.lm + lc, st.stat, st.log_count};
                    const int n = d + 1 - m.value();
                    if (n >= out.window_begin) ns.stat = update_stat(ns.stat, value_at(ns.lm, d + 1), kind);
                    const StateKey nk{kids[i].child, quantize(ns.lm), quantize(ns.stat)};
                    auto [it, inserted] = index.try_emplace(nk, next.size());
                    if (inserted) next.emplace_back(nk, ns);
                    else next[it->second].second.log_count = log_add(next[it->second].second.log_count, ns.log_count);
                }
            }
            if (next.size() > opt.max_states) overflow = true;
            current = std::move(next);
        }
        if (!overflow) {
            double total = 0.0;
            for (const auto& [key, st] : current) total += std::exp(st.lm + st.log_count) * st.stat;
            out.value = total;
            out.method = "exact";
            return out;
        }
    }

    std::mt19937_64 rng(opt.seed);
    const int samples = std::max(1, opt.mc_samples);
    double sum = 0.0, sumsq = 0.0;
    for (int k = 0; k < samples; ++k) {
        ClassId c = 0;
        double lm = 0.0, stat = NAN;
        for (int d = 0; d < L; ++d) {
            const auto kids = tree.children(d, c);
            const auto base = tree.edge_begin(d, c);
            const double u = unit_draw(rng());
            double cum = 0.0;
            std::size_t pick = kids.size() - 1;
            for (std::size_t i = 0; i < kids.size(); ++i) {
                cum += std::exp(mu_n.log_conditional(d, base + i));
                if (u < cum) {
                    pick = i;
                    break;
                }
            }
            while (pick > 0 && mu_n.log_conditional(d, base + pick) == kNegInf) --pick;
            lm += mu_n.log_conditional(d, base + pick);
            c = kids[pick].child;
            if (d + 1 - m.value() >= out.window_begin) stat = update_stat(stat, value_at(lm, d + 1), kind);
        }
        sum += stat;
        sumsq += stat * stat;
    }
    out.value = sum / samples;
    out.samples = samples;
    const double var = std::max(0.0, sumsq / samples - out.value * out.value);
    out.standard_error = std::sqrt(var / samples);
    out.method = "monte_carlo";
    return out;
}

}  // namespace varent
