#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "rlfalsify/mdp.hpp"
#include "rlfalsify/synthesis.hpp"
#include "rlfalsify/td.hpp"

namespace rlfalsify::io {

// JSON file formats. State and control indices are 1-based in files and
// 0-based in memory. Per-state lists in "P" and "g" run parallel to that
// state's "actions" entry.
//
//   MDP:    {"n": 2, "alpha": 0.9, "actions": [[1,2],[1]],
//            "P": [[[0.3,0.7],[1,0]], [[0.5,0.5]]], "g": [[1,2],[0]]}
//           "g" may also be triple-form, g[i][k][j], which is reduced to
//           expected costs on load.
//   basis:  {"K": 3, "Phi": [[...], ...]}          one row per state
//   policy: {"policy": [1, 2, ...]}                 or a bare array
//   costs:  {"g": [[...], ...]}                     or a bare array, MDP "g" shape
//   matrix: {"H": [[...], ...]}                     or a bare array of rows

/// Reads a whole file; throws kIoError.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

Mdp parse_mdp(std::string_view text, std::string_view source = "<mdp>");
FeatureBasis parse_basis(std::string_view text, int num_states, std::string_view source = "<basis>");
Policy parse_policy(std::string_view text, const Mdp& mdp, std::string_view source = "<policy>");
CostTable parse_cost_table(std::string_view text, const Mdp& mdp, std::string_view source = "<costs>");
Matrix parse_matrix(std::string_view text, std::string_view source = "<matrix>");

Mdp load_mdp(const std::filesystem::path& path);
FeatureBasis load_basis(const std::filesystem::path& path, int num_states);
Policy load_policy(const std::filesystem::path& path, const Mdp& mdp);
CostTable load_cost_table(const std::filesystem::path& path, const Mdp& mdp);
Matrix load_matrix(const std::filesystem::path& path);

std::string to_json(const Mdp& mdp);
std::string to_json(const Policy& mu);
std::string cost_table_to_json(const CostTable& cost);

/// {"feasible", "g_tilde", "certificate_y", "scale", "slacks", "note"}
std::string to_json(const PartialAttackResult& result);

/// Space-separated 1-based controls, e.g. "2 1 1".
std::string policy_label(const Policy& mu);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace rlfalsify::io
