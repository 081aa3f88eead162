// Batch front-end: trees, entropies, measures, variational checks, property suite.
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "varent/entropy.hpp"
#include "varent/error.hpp"
#include "varent/frostman.hpp"
#include "varent/measure.hpp"
#include "varent/report_io.hpp"
#include "varent/tree_io.hpp"
#include "varent/tree_spec.hpp"
#include "varent/verifier.hpp"

using namespace varent;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitAssert = 2;
constexpr const char* kOutDirEnv = "VARENT_OUT_DIR";

struct Config {
    std::string gen;
    std::string tree_file;
    int m = 1;
    int depth = 24;
    std::optional<int> N;
    double tol = 1e-3;
    std::optional<double> s;
    std::uint64_t seed = 1;
    int count = 1;
    std::string out;
    std::string format = "json";
    std::string csv;
    bool base2 = false;
    int jobs = 1;
    bool assert_pass = false;
    std::string mode = "depth";
    int stages = 3;
    std::string probs;
    int n_max = 0;
    std::string measure_file;
    bool progress = false;
};

void validate(const Config& c) {
    if (!(c.tol > 0.0)) throw DomainError("--tol must be > 0");
    if (c.depth < 2) throw DomainError("--depth must be >= 2");
    if (c.m < 1) throw DomainError("--m must be >= 1");
    if (c.jobs < 1) throw DomainError("--jobs must be >= 1");
}

std::shared_ptr<const CylinderTree> load_source(const Config& c, json* meta = nullptr) {
    if (!c.tree_file.empty() && !c.gen.empty()) throw DomainError("give either --gen or --tree, not both");
    if (!c.tree_file.empty()) {
        auto t = std::make_shared<const CylinderTree>(load_tree(c.tree_file));
        if (meta) *meta = {{"tree_file", c.tree_file}};
        return t;
    }
    if (c.gen.empty()) throw DomainError("a tree source is required: --gen SPEC or --tree FILE");
    auto g = tree_from_spec(c.gen, c.depth, c.seed);
    if (meta) *meta = g.metadata;
    return std::make_shared<const CylinderTree>(std::move(g.tree));
}

std::string render(const json& j, const std::string& format) {
    if (format == "json") return j.dump(2) + "\n";
    if (format != "text") throw DomainError("--format must be json or text");
    std::ostringstream os;
    for (const auto& [k, v] : j.items())
        if (!v.is_array() && !v.is_object()) os << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    return os.str();
}

// Explicit --out wins; otherwise the env directory; otherwise stdout.
void emit(const Config& c, const std::string& default_name, const std::string& content) {
    std::filesystem::path path = c.out;
    if (path.empty()) {
        if (const char* dir = std::getenv(kOutDirEnv); dir && *dir) path = std::filesystem::path(dir) / default_name;
    }
    if (path.empty()) {
        std::cout << content;
        return;
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_file(path, content);
    std::cerr << "wrote " << path.string() << '\n';
}

void emit_csv(const Config& c, const std::string& content) {
    if (c.csv.empty()) return;
    write_file(c.csv, content);
    std::cerr << "wrote " << c.csv << '\n';
}

std::vector<double> parse_probs(const std::string& text, int l) {
    std::vector<double> p;
    if (text.empty()) return std::vector<double>(static_cast<std::size_t>(l), 1.0 / l);
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            p.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw DomainError("bad probability '" + item + "' in --p");
        }
    }
    return p;
}

int cmd_tree_gen(const Config& c) {
    json meta;
    auto t = load_source(c, &meta);
    json summary{{"schema_version", kSchemaVersion}, {"kind", "tree_summary"}, {"depth", t->depth()},
                 {"alphabet", t->alphabet().size()}, {"log_depth_counts", t->log_depth_counts()}, {"metadata", meta}};
    try {
        summary["depth_counts"] = t->depth_counts();
    } catch (const DomainError&) {
        // counts past 2^64 are only reported in log form
    }
    std::string content;
    if (c.format == "json") {
        auto j = tree_to_json(*t);
        j["metadata"] = meta;
        content = j.dump(1) + "\n";
    } else if (c.format == "text") {
        content = tree_to_text(*t);
    } else {
        throw DomainError("--format must be json or text");
    }
    if (c.out.empty() && !std::getenv(kOutDirEnv)) {
        std::cout << content;
    } else {
        emit(c, c.format == "json" ? "tree.json" : "tree.txt", content);
        std::cout << summary.dump(2) << '\n';
    }
    return kExitOk;
}

int cmd_entropy(const Config& c, const std::string& which) {
    json meta;
    auto t = load_source(c, &meta);
    EntropyOptions opt;
    opt.N = c.N;
    opt.mode = weight_mode_from_string(c.mode);
    const ScaleIndex m(c.m);
    EntropyEstimate est;
    if (which == "bowen") est = bowen_entropy(*t, m, c.tol, opt);
    else if (which == "packing") est = packing_entropy(*t, m, c.tol, opt);
    else if (which == "capacity") est = capacity_entropy(*t, m, c.tol, opt);
    else est = weighted_entropy(*t, m, c.tol, opt);
    if (c.progress)
        for (const auto& d : est.diagnostics)
            std::cerr << d.label << " depth=" << d.depth << " N=" << d.N << " m=" << d.m << " value=" << d.value << '\n';
    auto j = estimate_to_json(est, {c.base2});
    j["source"] = meta;
    emit(c, "entropy_" + which + ".json", render(j, c.format));
    emit_csv(c, diagnostics_csv(est));
    return kExitOk;
}

int cmd_measure(const Config& c, const std::string& which) {
    const ScaleIndex m(c.m);
    const auto mode = weight_mode_from_string(c.mode);
    if (which == "frostman") {
        auto t = load_source(c);
        if (!c.s) throw DomainError("measure frostman needs --s");
        const auto fr = frostman_measure(t, *c.s, c.N.value_or(1), m, mode);
        emit(c, "frostman.json", render(frostman_to_json(fr, *t), c.format));
        return kExitOk;
    }
    if (which == "packing-frostman") {
        auto t = load_source(c);
        if (!c.s) throw DomainError("measure packing-frostman needs --s");
        const auto pf = packing_frostman(*t, *c.s, m, c.stages, {c.N.value_or(1), mode});
        auto j = packing_frostman_to_json(pf);
        if (t->is_explicit()) j["measure"] = measure_to_json(pf.to_measure(t), c.gen.empty() ? c.tree_file : c.gen);
        emit(c, "packing_frostman.json", render(j, c.format));
        return kExitOk;
    }
    // local: Bernoulli(--p) on the tree, or a saved measure.
    std::optional<CylinderMeasure> mu;
    if (!c.measure_file.empty()) {
        mu = measure_from_json(json::parse(read_file(c.measure_file)));
    } else {
        auto t = load_source(c);
        mu = bernoulli(t, parse_probs(c.probs, t->alphabet().size()));
    }
    const int n_max = c.n_max > 0 ? c.n_max : mu->tree().depth() - c.m;
    std::mt19937_64 rng(c.seed);
    json points = json::array();
    double lo_sum = 0.0, hi_sum = 0.0;
    for (int k = 0; k < c.count; ++k) {
        const auto x = mu->sample_branch(rng);
        const auto est = local_entropy(*mu, x, m, n_max);
        lo_sum += est.liminf_estimate;
        hi_sum += est.limsup_estimate;
        auto pj = local_entropy_to_json(est);
        pj.erase("values");
        pj["point"] = format_word(Word(x.begin(), x.begin() + std::min<std::ptrdiff_t>(64, static_cast<std::ptrdiff_t>(x.size()))));
        points.push_back(pj);
    }
    json j{{"schema_version", kSchemaVersion},
           {"kind", "local_entropy_sample"},
           {"m", c.m},
           {"n_max", n_max},
           {"samples", c.count},
           {"seed", c.seed},
           {"mean_liminf", lo_sum / c.count},
           {"mean_limsup", hi_sum / c.count},
           {"points", points}};
    emit(c, "local_entropy.json", render(j, c.format));
    return kExitOk;
}

int cmd_vp(const Config& c, const std::string& which) {
    json meta;
    auto t = load_source(c, &meta);
    const ScaleIndex m(c.m);
    const auto r = which == "bowen" ? verify_bowen_vp(t, m, c.tol) : verify_packing_vp(t, m, c.tol, c.stages);
    auto j = vp_report_to_json(r, {c.base2});
    j["source"] = meta;
    emit(c, "vp_" + which + ".json", render(j, c.format));
    emit_csv(c, diagnostics_csv(r.entropy));
    return c.assert_pass && !r.passed() ? kExitAssert : kExitOk;
}

int cmd_suite(const Config& c) {
    SuiteOptions opt;
    opt.seed = c.seed;
    opt.count = c.count;
    opt.depth = c.depth;
    opt.jobs = c.jobs;
    const auto rep = run_property_suite(opt);
    if (c.progress)
        for (const auto& [name, pc] : rep.summary()) std::cerr << name << ' ' << pc.first << '/' << pc.second << '\n';
    emit(c, "suite.json", render(suite_to_json(rep), c.format));
    emit_csv(c, suite_csv(rep));
    return c.assert_pass && !rep.all_passed() ? kExitAssert : kExitOk;
}

void add_source(CLI::App* app, Config& c) {
    app->add_option("--gen", c.gen, "generator spec: full:L, sft:L:forbid=11, golden, freq:p1,p2:delta, besicovitch:p1,p2:delta, single[:L], upper-density, nontypical:L:s, random[:seed], bushy:K");
    app->add_option("--tree", c.tree_file, "tree file (text or JSON)");
    app->add_option("--depth", c.depth, "truncation depth D for generated trees");
    app->add_option("--seed", c.seed, "seed for random generators and sampling");
}

void add_common(CLI::App* app, Config& c) {
    app->add_option("--m", c.m, "scale index, epsilon = e^{-m}");
    app->add_option("--tol", c.tol, "bisection tolerance (nats)");
    app->add_option("--out", c.out, "output file; defaults to $VARENT_OUT_DIR/<command>.json, else stdout");
    app->add_option("--format", c.format, "json or text");
    app->add_flag("--base2", c.base2, "add bit-valued display fields");
    app->add_option("--jobs", c.jobs, "worker threads");
    app->add_flag("--progress", c.progress, "stream diagnostics to stderr");
}

}  // namespace

int main(int argc, char** argv) {
    Config c;
    CLI::App app{"Entropy of subsets of the full shift: cutset, packing and capacity engines, Frostman measures, "
                 "variational checks.\nAll values are in nats. Exit status: 0 ok, 1 domain error, 2 failed --assert.\n"
                 "Environment: " + std::string(kOutDirEnv) + " sets the default output directory."};
    app.require_subcommand(1);

    auto* tree = app.add_subcommand("tree", "tree generation");
    auto* tree_gen = tree->add_subcommand("gen", "generate a tree and write it");
    tree->require_subcommand(1);
    add_source(tree_gen, c);
    tree_gen->add_option("--out", c.out, "output file");
    tree_gen->add_option("--format", c.format, "json or text");

    auto* entropy = app.add_subcommand("entropy", "entropy estimates by bisection on the critical exponent");
    entropy->require_subcommand(1);
    std::vector<CLI::App*> entropy_cmds;
    for (const char* k : {"bowen", "packing", "capacity", "weighted"}) {
        auto* sub = entropy->add_subcommand(k, std::string(k) + " entropy");
        add_source(sub, c);
        add_common(sub, c);
        sub->add_option("--N", c.N, "minimal time length N (default floor(D/2))");
        sub->add_option("--mode", c.mode, "weight mode: depth (default), ball, clopen");
        sub->add_option("--csv", c.csv, "diagnostics CSV: label,depth,N,m,s,value");
        entropy_cmds.push_back(sub);
    }

    auto* measure = app.add_subcommand("measure", "measure constructions and local entropies");
    measure->require_subcommand(1);
    std::vector<CLI::App*> measure_cmds;
    for (const char* k : {"frostman", "packing-frostman", "local"}) {
        auto* sub = measure->add_subcommand(k, k);
        add_source(sub, c);
        add_common(sub, c);
        sub->add_option("--s", c.s, "exponent s");
        sub->add_option("--N", c.N, "minimal time length N (default 1)");
        sub->add_option("--mode", c.mode, "weight mode: depth (default), ball, clopen");
        measure_cmds.push_back(sub);
    }
    measure_cmds[1]->add_option("--stages", c.stages, "number of refinement stages");
    measure_cmds[2]->add_option("--p", c.probs, "Bernoulli probabilities, comma separated (default uniform)");
    measure_cmds[2]->add_option("--measure", c.measure_file, "saved measure JSON instead of a Bernoulli measure");
    measure_cmds[2]->add_option("--count", c.count, "number of sampled points");
    measure_cmds[2]->add_option("--n-max", c.n_max, "largest n (default D - m)");

    auto* vp = app.add_subcommand("vp", "variational principle reports");
    vp->require_subcommand(1);
    std::vector<CLI::App*> vp_cmds;
    for (const char* k : {"bowen", "packing"}) {
        auto* sub = vp->add_subcommand(k, std::string(k) + " variational report");
        add_source(sub, c);
        add_common(sub, c);
        sub->add_flag("--assert", c.assert_pass, "exit 2 unless the report passes");
        sub->add_option("--csv", c.csv, "entropy diagnostics CSV: label,depth,N,m,s,value");
        vp_cmds.push_back(sub);
    }
    vp_cmds[1]->add_option("--stages", c.stages, "packing-Frostman stages");

    auto* suite = app.add_subcommand("suite", "property suite");
    suite->require_subcommand(1);
    auto* suite_run = suite->add_subcommand("run", "run every invariant on seeded random trees");
    suite_run->add_option("--seed", c.seed, "suite seed");
    suite_run->add_option("--count", c.count, "number of trees");
    suite_run->add_option("--depth", c.depth, "tree depth");
    suite_run->add_option("--jobs", c.jobs, "worker threads");
    suite_run->add_option("--out", c.out, "output file");
    suite_run->add_option("--format", c.format, "json or text");
    suite_run->add_option("--csv", c.csv, "CSV: tree,seed,invariant,pass,margin,detail (one row per invariant per tree)");
    suite_run->add_flag("--assert", c.assert_pass, "exit 2 unless every invariant passes");
    suite_run->add_flag("--progress", c.progress, "print the per-invariant summary to stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitDomain;
    }

    try {
        validate(c);
        if (tree_gen->parsed()) return cmd_tree_gen(c);
        for (auto* sub : entropy_cmds)
            if (sub->parsed()) return cmd_entropy(c, sub->get_name());
        for (auto* sub : measure_cmds)
            if (sub->parsed()) return cmd_measure(c, sub->get_name());
        for (auto* sub : vp_cmds)
            if (sub->parsed()) return cmd_vp(c, sub->get_name());
        if (suite_run->parsed()) return cmd_suite(c);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    }
    return kExitDomain;
}
