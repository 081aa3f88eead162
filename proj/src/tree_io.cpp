#include "varent/tree_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "varent/error.hpp"

namespace varent {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(bool json, std::size_t where, const std::string& msg) {
    if (json) throw DomainError("nodes[" + std::to_string(where) + "]: " + msg);
    throw ParseError(where, msg);
}

}  // namespace

std::string tree_to_text(const CylinderTree& tree) {
    const auto nodes = tree.nodes();
    std::ostringstream out;
    out << "# cylinder tree\n";
    out << "alphabet " << tree.alphabet().size() << "\n";
    out << "depth " << tree.depth() << "\n";
    out << "nodes " << nodes.size() - 1 << "\n";
    for (std::size_t i = 1; i < nodes.size(); ++i) out << format_word(nodes[i]) << "\n";
    return out.str();
}

CylinderTree tree_from_node_list(const Alphabet& alphabet, int D, const std::vector<std::pair<Word, std::size_t>>& nodes,
                                 bool json) {
    if (D < 1) throw DomainError("tree depth must be >= 1");
    std::map<Word, std::size_t> where;  // node -> source position
    where.emplace(Word{}, 0);
    for (const auto& [w, pos] : nodes) {
        if (w.empty()) continue;
        if (static_cast<int>(w.size()) > D) fail(json, pos, "node '" + format_word(w) + "' deeper than depth " + std::to_string(D));
        if (!where.emplace(w, pos).second) fail(json, pos, "duplicate node '" + format_word(w) + "'");
    }
    // Prefix closure and pruning, each reported at the offending node.
    std::map<Word, int> child_count;
    for (const auto& [w, pos] : where) {
        if (w.empty()) continue;
        Word parent(w.begin(), w.end() - 1);
        if (!where.count(parent))
            fail(json, pos, "node '" + format_word(w) + "' has no parent '" + format_word(parent) + "' (not prefix-closed)");
        ++child_count[parent];
    }
    for (const auto& [w, pos] : where)
        if (static_cast<int>(w.size()) < D && !child_count.count(w))
            fail(json, pos, "node '" + format_word(w) + "' is a dead branch above depth " + std::to_string(D));

    // Explicit layers: ids per depth in lexicographic order.
    std::vector<std::vector<Word>> by_depth(static_cast<std::size_t>(D) + 1);
    for (const auto& [w, pos] : where) by_depth[w.size()].push_back(w);
    std::vector<TreeLayer> layers(static_cast<std::size_t>(D) + 1);
    for (int d = 0; d < D; ++d) {
        const auto& here = by_depth[static_cast<std::size_t>(d)];
        const auto& below = by_depth[static_cast<std::size_t>(d) + 1];
        auto& L = layers[static_cast<std::size_t>(d)];
        std::size_t j = 0;
        for (const auto& w : here) {
            while (j < below.size() && is_prefix(w, below[j])) {
                L.edges.push_back({below[j].back(), static_cast<ClassId>(j)});
                ++j;
            }
            L.offsets.push_back(static_cast<std::uint32_t>(L.edges.size()));
        }
    }
    layers.back().offsets.assign(by_depth.back().size() + 1, 0);
    return CylinderTree(alphabet, std::move(layers));
}

CylinderTree tree_from_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    int alphabet = -1, depth = -1;
    long declared = -1;
    std::vector<std::pair<Word, std::size_t>> nodes;
    bool in_nodes = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (!in_nodes) {
            std::istringstream fields(line);
            std::string key;
            long value = 0;
            fields >> key;
            if (!(fields >> value)) throw ParseError(line_no, "expected '<key> <integer>', got '" + line + "'");
            std::string rest;
            if (fields >> rest) throw ParseError(line_no, "trailing text after header value");
            if (key == "alphabet") alphabet = static_cast<int>(value);
            else if (key == "depth") depth = static_cast<int>(value);
            else if (key == "nodes") {
                declared = value;
                in_nodes = true;
                if (alphabet < 0 || depth < 0) throw ParseError(line_no, "'nodes' before 'alphabet' and 'depth'");
            } else
                throw ParseError(line_no, "unknown header key '" + key + "'");
            continue;
        }
        try {
            nodes.emplace_back(parse_word(line, Alphabet(alphabet)), line_no);
        } catch (const ParseError&) {
            throw;
        } catch (const DomainError& e) {
            throw ParseError(line_no, e.what());
        }
    }
    if (!in_nodes) throw ParseError(line_no, "missing 'nodes' section");
    if (declared != static_cast<long>(nodes.size()))
        throw ParseError(line_no, "declared " + std::to_string(declared) + " nodes but found " + std::to_string(nodes.size()));
    try {
        return tree_from_node_list(Alphabet(alphabet), depth, nodes, false);
    } catch (const ParseError&) {
        throw;
    } catch (const DomainError& e) {
        throw ParseError(line_no, e.what());
    }
}

nlohmann::json tree_to_json(const CylinderTree& tree) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "cylinder_tree";
    j["alphabet"] = tree.alphabet().size();
    j["depth"] = tree.depth();
    auto& arr = j["nodes"] = nlohmann::json::array();
    for (const auto& w : tree.nodes()) arr.push_back(format_word(w));
    return j;
}

CylinderTree tree_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("alphabet") || !j.contains("depth") || !j.contains("nodes"))
        throw DomainError("tree JSON needs 'alphabet', 'depth' and 'nodes'");
    if (j.contains("schema_version") && j["schema_version"].get<int>() != kSchemaVersion)
        throw DomainError("unsupported tree schema_version");
    Alphabet alphabet(j["alphabet"].get<int>());
    const int depth = j["depth"].get<int>();
    std::vector<std::pair<Word, std::size_t>> nodes;
    std::size_t i = 0;
    for (const auto& item : j["nodes"]) {
        if (!item.is_string()) throw DomainError("nodes[" + std::to_string(i) + "]: expected a string");
        try {
            nodes.emplace_back(parse_word(item.get<std::string>(), alphabet), i);
        } catch (const DomainError& e) {
            throw DomainError("nodes[" + std::to_string(i) + "]: " + e.what());
        }
        ++i;
    }
    return tree_from_node_list(alphabet, depth, nodes, true);
}

CylinderTree tree_from_json_text(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
        throw ParseError(line, std::string("malformed JSON: ") + e.what());
    }
    return tree_from_json(j);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write '" + path.string() + "'");
    out << content;
}

void save_tree(const std::filesystem::path& path, const CylinderTree& tree, bool json) {
    write_file(path, json ? tree_to_json(tree).dump(1) + "\n" : tree_to_text(tree));
}

CylinderTree load_tree(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return tree_from_json_text(text);
    return tree_from_text(text);
}

}  // namespace varent
