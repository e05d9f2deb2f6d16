#include "gmmpc/graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "gmmpc/error.hpp"

namespace gmmpc {

namespace {

struct TextPos {
  std::size_t line = 1;
  std::size_t column = 1;
};

TextPos position_of(std::string_view text, std::size_t offset) {
  TextPos p;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

// Byte offset of the index-th element of the top-level array stored under
// `key`. Only used to point error messages at the offending entry, so it
// assumes the text already parsed as JSON.
std::size_t locate_element(std::string_view text, std::string_view key,
                           std::size_t index) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  std::size_t pos = text.find(quoted);
  if (pos == std::string_view::npos) return 0;
  pos = text.find('[', pos + quoted.size());
  if (pos == std::string_view::npos) return 0;
  std::size_t depth = 0;
  std::size_t seen = 0;
  bool in_string = false;
  bool expecting = true;
  for (std::size_t i = pos; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') continue;
    if (depth == 1 && expecting && c != ']') {
      if (seen == index) return i;
      ++seen;
      expecting = false;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      ++depth;
    } else if (c == ']' || c == '}') {
      if (--depth == 0) break;
    } else if (c == ',' && depth == 1) {
      expecting = true;
    }
  }
  return pos;
}

[[noreturn]] void fail_at(std::string_view text, std::size_t offset,
                          const std::string& msg) {
  const TextPos p = position_of(text, offset);
  std::ostringstream os;
  os << "graph line " << p.line << ", column " << p.column << ": " << msg;
  throw Error(ErrorCode::parse, os.str());
}

bool reaches(const std::vector<std::vector<NodeId>>& out, NodeId from, NodeId target) {
  std::vector<bool> visited(out.size(), false);
  std::vector<NodeId> stack{from};
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    if (v == target) return true;
    if (visited[v]) continue;
    visited[v] = true;
    for (NodeId c : out[v]) stack.push_back(c);
  }
  return false;
}

}  // namespace

Dag::Dag(std::vector<std::string> names, std::vector<Edge> edges)
    : names_(std::move(names)), edges_(std::move(edges)) {
  const std::size_t n = names_.size();
  {
    std::unordered_map<std::string_view, NodeId> seen;
    for (NodeId v = 0; v < n; ++v) {
      if (names_[v].empty())
        throw Error(ErrorCode::graph, "node " + std::to_string(v) + " has an empty name");
      if (!seen.emplace(names_[v], v).second)
        throw Error(ErrorCode::graph, "duplicate node name '" + names_[v] + "'");
    }
  }
  parents_.assign(n, {});
  children_.assign(n, {});
  adj_.assign(n, std::vector<bool>(n, false));
  std::vector<std::vector<bool>> directed(n, std::vector<bool>(n, false));
  for (const auto& [from, to] : edges_) {
    if (from >= n || to >= n)
      throw Error(ErrorCode::graph, "edge refers to a node id out of range");
    if (from == to)
      throw Error(ErrorCode::graph, "self-loop on '" + names_[from] + "'");
    if (directed[from][to])
      throw Error(ErrorCode::graph, "duplicate edge " + names_[from] + " -> " + names_[to]);
    if (directed[to][from])
      throw Error(ErrorCode::graph, "edges in both directions between '" + names_[from] +
                                        "' and '" + names_[to] + "'");
    directed[from][to] = true;
    adj_[from][to] = adj_[to][from] = true;
    parents_[to].push_back(from);
    children_[from].push_back(to);
  }
  for (NodeId v = 0; v < n; ++v) {
    std::sort(parents_[v].begin(), parents_[v].end());
    std::sort(children_[v].begin(), children_[v].end());
  }
  if (topological_order().size() != n)
    throw Error(ErrorCode::graph, "graph contains a cycle");
}

void Dag::check(NodeId v) const {
  if (v >= names_.size())
    throw Error(ErrorCode::graph, "unknown node id " + std::to_string(v));
}

const std::string& Dag::name(NodeId v) const {
  check(v);
  return names_[v];
}

std::optional<NodeId> Dag::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<NodeId>(it - names_.begin());
}

NodeId Dag::id(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw Error(ErrorCode::graph, "unknown node '" + std::string(name) + "'");
}

const std::vector<NodeId>& Dag::parents(NodeId v) const {
  check(v);
  return parents_[v];
}

const std::vector<NodeId>& Dag::children(NodeId v) const {
  check(v);
  return children_[v];
}

std::vector<NodeId> Dag::pc_set(NodeId v) const {
  check(v);
  std::vector<NodeId> out;
  std::set_union(parents_[v].begin(), parents_[v].end(), children_[v].begin(),
                 children_[v].end(), std::back_inserter(out));
  return out;
}

bool Dag::has_edge(NodeId from, NodeId to) const {
  check(from);
  check(to);
  return adj_[from][to] &&
         std::binary_search(parents_[to].begin(), parents_[to].end(), from);
}

bool Dag::adjacent(NodeId a, NodeId b) const {
  check(a);
  check(b);
  return adj_[a][b];
}

bool Dag::is_collider(NodeId v) const {
  const auto& pa = parents(v);
  for (std::size_t i = 0; i < pa.size(); ++i)
    for (std::size_t j = i + 1; j < pa.size(); ++j)
      if (!adj_[pa[i]][pa[j]]) return true;
  return false;
}

std::vector<NodeId> Dag::topological_order() const {
  const std::size_t n = names_.size();
  std::vector<std::size_t> indegree(n);
  for (NodeId v = 0; v < n; ++v) indegree[v] = parents_[v].size();
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(v);
  std::vector<NodeId> order;
  order.reserve(n);
  while (!ready.empty()) {
    const NodeId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (NodeId c : children_[v])
      if (--indegree[c] == 0) ready.push(c);
  }
  return order;
}

Dag parse_graph(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail_at(text, e.byte > 0 ? e.byte - 1 : 0, "malformed JSON");
  }
  if (!doc.is_object()) fail_at(text, 0, "expected a JSON object");
  if (!doc.contains("nodes") || !doc["nodes"].is_array())
    fail_at(text, 0, "missing \"nodes\" array");
  if (doc.contains("edges") && !doc["edges"].is_array())
    fail_at(text, text.find("\"edges\""), "\"edges\" must be an array");

  std::vector<std::string> names;
  std::unordered_map<std::string, NodeId> index;
  const auto& nodes = doc["nodes"];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].is_string())
      fail_at(text, locate_element(text, "nodes", i), "node name must be a string");
    const std::string name = nodes[i].get<std::string>();
    if (name.empty())
      fail_at(text, locate_element(text, "nodes", i), "empty node name");
    if (!index.emplace(name, names.size()).second)
      fail_at(text, locate_element(text, "nodes", i), "duplicate node '" + name + "'");
    names.push_back(name);
  }

  std::vector<Edge> edges;
  std::vector<std::vector<bool>> seen(names.size(), std::vector<bool>(names.size()));
  std::vector<std::vector<NodeId>> out(names.size());
  if (doc.contains("edges")) {
    const auto& list = doc["edges"];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& e = list[i];
      const auto at = [&] { return locate_element(text, "edges", i); };
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
        fail_at(text, at(), "edge must be [\"parent\", \"child\"]");
      const auto from = e[0].get<std::string>();
      const auto to = e[1].get<std::string>();
      auto f = index.find(from);
      if (f == index.end()) fail_at(text, at(), "unknown node '" + from + "' in edge");
      auto t = index.find(to);
      if (t == index.end()) fail_at(text, at(), "unknown node '" + to + "' in edge");
      if (f->second == t->second) fail_at(text, at(), "self-loop on '" + from + "'");
      if (seen[f->second][t->second])
        fail_at(text, at(), "duplicate edge " + from + " -> " + to);
      if (seen[t->second][f->second])
        fail_at(text, at(), "edge " + from + " -> " + to + " creates a cycle (reverse edge present)");
      if (reaches(out, t->second, f->second))
        fail_at(text, at(), "edge " + from + " -> " + to + " closes a cycle");
      seen[f->second][t->second] = true;
      out[f->second].push_back(t->second);
      edges.emplace_back(f->second, t->second);
    }
  }
  try {
    return Dag(std::move(names), std::move(edges));
  } catch (const Error& e) {
    throw Error(ErrorCode::graph, std::string("graph: ") + e.what());
  }
}

Dag load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open graph file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_graph(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string serialize_graph(const Dag& dag) {
  nlohmann::ordered_json doc;
  doc["nodes"] = dag.names();
  auto edges = nlohmann::ordered_json::array();
  for (const auto& [from, to] : dag.edges())
    edges.push_back({dag.name(from), dag.name(to)});
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

std::string to_dot(const Dag& dag) {
  std::ostringstream os;
  os << "digraph {\n";
  for (const auto& n : dag.names()) os << "  \"" << n << "\";\n";
  for (const auto& [from, to] : dag.edges())
    os << "  \"" << dag.name(from) << "\" -> \"" << dag.name(to) << "\";\n";
  os << "}\n";
  return os.str();
}

}  // namespace gmmpc
