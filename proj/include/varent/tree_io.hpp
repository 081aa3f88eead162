#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "varent/tree.hpp"

namespace varent {

inline constexpr int kSchemaVersion = 1;

// Line format:
//   # comment
//   alphabet <l>
//   depth <D>
//   nodes <count>
//   one node per line as a symbol string; the root is implicit
std::string tree_to_text(const CylinderTree& tree);
CylinderTree tree_from_text(std::string_view text);

nlohmann::json tree_to_json(const CylinderTree& tree);
CylinderTree tree_from_json(const nlohmann::json& j);
// Parses JSON text; syntax errors are reported with their line number.
CylinderTree tree_from_json_text(std::string_view text);

// Builds an explicit tree from node strings; `where` names the source of each
// node for error messages (line number or array index).
CylinderTree tree_from_node_list(const Alphabet& alphabet, int D, const std::vector<std::pair<Word, std::size_t>>& nodes,
                                 bool json_indices);

void save_tree(const std::filesystem::path& path, const CylinderTree& tree, bool json);
// Detects the format from the first non-blank character.
CylinderTree load_tree(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace varent
