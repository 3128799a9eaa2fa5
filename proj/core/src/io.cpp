#include "rlfalsify/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rlfalsify/errors.hpp"

namespace rlfalsify::io {
namespace {

using nlohmann::json;

[[noreturn]] void fail(std::string_view source, const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kParseError, std::string(source) + ": field '" + where + "': " + what);
}

json parse_json(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line:column.
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t k = 0; k < limit; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::kParseError, std::string(source) + ":" + std::to_string(line) + ":" +
                                            std::to_string(column) + ": malformed JSON (" + e.what() + ")");
  }
}

const json& member(const json& obj, const char* key, std::string_view source) {
  if (!obj.is_object()) fail(source, "<root>", "expected a JSON object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(source, key, "missing");
  return *it;
}

double as_double(const json& v, std::string_view source, const std::string& where) {
  if (!v.is_number()) fail(source, where, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, std::string_view source, const std::string& where) {
  if (!v.is_number_integer()) fail(source, where, "expected an integer");
  return v.get<int>();
}

const json& as_array(const json& v, std::string_view source, const std::string& where, std::size_t expected_size) {
  if (!v.is_array()) fail(source, where, "expected an array");
  if (expected_size != std::size_t(-1) && v.size() != expected_size) {
    fail(source, where, "expected " + std::to_string(expected_size) + " entries, found " + std::to_string(v.size()));
  }
  return v;
}

std::string idx(const std::string& base, std::size_t k) { return base + "[" + std::to_string(k) + "]"; }

bool is_triple_form(const json& g) {
  for (const auto& row : g) {
    if (!row.is_array()) return false;
    for (const auto& entry : row) {
      if (entry.is_array()) return true;
    }
  }
  return false;
}

CostTable costs_from_json(const json& g, const Mdp& mdp, std::string_view source, const std::string& where) {
  as_array(g, source, where, static_cast<std::size_t>(mdp.num_states));
  if (is_triple_form(g)) {
    std::vector<std::vector<std::vector<double>>> triple(static_cast<std::size_t>(mdp.num_states));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto& us = mdp.actions[i];
      const auto& row = as_array(g[i], source, idx(where, i), us.size());
      for (std::size_t k = 0; k < us.size(); ++k) {
        const auto& per_next = as_array(row[k], source, idx(idx(where, i), k), static_cast<std::size_t>(mdp.num_states));
        std::vector<double> values;
        for (std::size_t j = 0; j < per_next.size(); ++j) {
          values.push_back(as_double(per_next[j], source, idx(idx(idx(where, i), k), j)));
        }
        triple[i].push_back(std::move(values));
      }
    }
    return reduce_triple_costs(mdp, triple);
  }
  CostTable cost = zero_table(mdp);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& us = mdp.actions[i];
    const auto& row = as_array(g[i], source, idx(where, i), us.size());
    for (std::size_t k = 0; k < us.size(); ++k) {
      cost(static_cast<int>(i), us[k]) = as_double(row[k], source, idx(idx(where, i), k));
    }
  }
  return cost;
}

Matrix matrix_from_json(const json& rows, std::string_view source, const std::string& where) {
  as_array(rows, source, where, std::size_t(-1));
  if (rows.empty()) return Matrix(0, 0);
  const std::size_t cols = as_array(rows[0], source, idx(where, 0), std::size_t(-1)).size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = as_array(rows[r], source, idx(where, r), cols);
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = as_double(row[c], source, idx(idx(where, r), c));
    }
  }
  return m;
}

json table_json(const CostTable& cost) {
  json g = json::array();
  for (int i = 0; i < cost.num_states(); ++i) {
    json row = json::array();
    for (int u : cost.admissible()[static_cast<std::size_t>(i)]) row.push_back(cost(i, u));
    g.push_back(std::move(row));
  }
  return g;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

Mdp parse_mdp(std::string_view text, std::string_view source) {
  const json doc = parse_json(text, source);
  Mdp mdp;
  mdp.num_states = as_int(member(doc, "n", source), source, "n");
  if (mdp.num_states <= 0) fail(source, "n", "must be positive");
  const auto n = static_cast<std::size_t>(mdp.num_states);
  mdp.alpha = as_double(member(doc, "alpha", source), source, "alpha");

  const auto& actions = as_array(member(doc, "actions", source), source, "actions", n);
  mdp.actions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = as_array(actions[i], source, idx("actions", i), std::size_t(-1));
    for (std::size_t k = 0; k < row.size(); ++k) {
      const int u = as_int(row[k], source, idx(idx("actions", i), k));
      if (u < 1) fail(source, idx(idx("actions", i), k), "control indices are 1-based");
      mdp.actions[i].push_back(u - 1);
      mdp.num_controls = std::max(mdp.num_controls, u);
    }
  }

  const auto& p = as_array(member(doc, "P", source), source, "P", n);
  mdp.transitions.assign(static_cast<std::size_t>(mdp.num_controls), Matrix::Zero(mdp.num_states, mdp.num_states));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& per_state = as_array(p[i], source, idx("P", i), mdp.actions[i].size());
    for (std::size_t k = 0; k < per_state.size(); ++k) {
      const std::string where = idx(idx("P", i), k);
      const auto& row = as_array(per_state[k], source, where, n);
      for (std::size_t j = 0; j < n; ++j) {
        mdp.transitions[static_cast<std::size_t>(mdp.actions[i][k])](static_cast<Eigen::Index>(i),
                                                                     static_cast<Eigen::Index>(j)) =
            as_double(row[j], source, idx(where, j));
      }
    }
  }
  // Structural checks (sorted action lists, stochastic rows) before costs,
  // so errors point at the real problem.
  mdp.costs = zero_table(mdp);
  validate(mdp);
  mdp.costs = costs_from_json(member(doc, "g", source), mdp, source, "g");
  validate(mdp);
  return mdp;
}

FeatureBasis parse_basis(std::string_view text, int num_states, std::string_view source) {
  const json doc = parse_json(text, source);
  const int k = as_int(member(doc, "K", source), source, "K");
  Matrix phi = matrix_from_json(member(doc, "Phi", source), source, "Phi");
  if (phi.rows() != num_states) fail(source, "Phi", "expected one row per state (" + std::to_string(num_states) + ")");
  if (phi.cols() != k) fail(source, "Phi", "row length differs from K");
  return FeatureBasis(std::move(phi));
}

Policy parse_policy(std::string_view text, const Mdp& mdp, std::string_view source) {
  const json doc = parse_json(text, source);
  const json& arr = doc.is_array() ? doc : member(doc, "policy", source);
  as_array(arr, source, "policy", static_cast<std::size_t>(mdp.num_states));
  Policy mu;
  for (std::size_t i = 0; i < arr.size(); ++i) mu.control.push_back(as_int(arr[i], source, idx("policy", i)) - 1);
  validate_policy(mdp, mu);
  return mu;
}

CostTable parse_cost_table(std::string_view text, const Mdp& mdp, std::string_view source) {
  const json doc = parse_json(text, source);
  const json& g = doc.is_array() ? doc : member(doc, "g", source);
  CostTable cost = costs_from_json(g, mdp, source, "g");
  validate_cost_table(mdp, cost);
  return cost;
}

Matrix parse_matrix(std::string_view text, std::string_view source) {
  const json doc = parse_json(text, source);
  return matrix_from_json(doc.is_array() ? doc : member(doc, "H", source), source, "H");
}

Mdp load_mdp(const std::filesystem::path& path) { return parse_mdp(read_text(path), path.string()); }

FeatureBasis load_basis(const std::filesystem::path& path, int num_states) {
  return parse_basis(read_text(path), num_states, path.string());
}

Policy load_policy(const std::filesystem::path& path, const Mdp& mdp) {
  return parse_policy(read_text(path), mdp, path.string());
}

CostTable load_cost_table(const std::filesystem::path& path, const Mdp& mdp) {
  return parse_cost_table(read_text(path), mdp, path.string());
}

Matrix load_matrix(const std::filesystem::path& path) { return parse_matrix(read_text(path), path.string()); }

std::string to_json(const Mdp& mdp) {
  json doc;
  doc["n"] = mdp.num_states;
  doc["alpha"] = mdp.alpha;
  json actions = json::array();
  json p = json::array();
  for (int i = 0; i < mdp.num_states; ++i) {
    json us = json::array();
    json rows = json::array();
    for (int u : mdp.actions[static_cast<std::size_t>(i)]) {
      us.push_back(u + 1);
      rows.push_back(vector_json(mdp.transition_row(i, u).transpose()));
    }
    actions.push_back(std::move(us));
    p.push_back(std::move(rows));
  }
  doc["actions"] = std::move(actions);
  doc["P"] = std::move(p);
  doc["g"] = table_json(mdp.costs);
  return doc.dump(2) + "\n";
}

std::string to_json(const Policy& mu) {
  json arr = json::array();
  for (int u : mu.control) arr.push_back(u + 1);
  return json{{"policy", arr}}.dump() + "\n";
}

std::string cost_table_to_json(const CostTable& cost) { return json{{"g", table_json(cost)}}.dump(2) + "\n"; }

std::string to_json(const PartialAttackResult& result) {
  json doc;
  doc["feasible"] = result.feasible;
  doc["g_tilde"] = result.g_tilde ? table_json(*result.g_tilde) : json(nullptr);
  doc["certificate_y"] = result.certificate ? vector_json(*result.certificate) : json(nullptr);
  doc["scale"] = result.scale ? json(*result.scale) : json(nullptr);
  json slacks = json::array();
  for (const auto& s : result.slacks) {
    slacks.push_back({{"state", s.state + 1}, {"control", s.control + 1}, {"slack", s.slack}});
  }
  doc["slacks"] = std::move(slacks);
  doc["note"] = result.note;
  return doc.dump(2) + "\n";
}

std::string policy_label(const Policy& mu) {
  std::string out;
  for (std::size_t i = 0; i < mu.control.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(mu.control[i] + 1);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace rlfalsify::io
