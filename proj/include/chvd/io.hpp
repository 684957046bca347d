#pragma once

#include <sstream>

#include <json.hpp>

#include "kernel.hpp"

namespace chvd {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Contents of an instance file, kept in file order so emitting reproduces the input.
struct InstanceFile {
  std::vector<std::string> comments;  // text after "c "
  int n = 0;
  int k = 0;
  std::vector<Edge> edges;
  VertexList modulator;
  std::vector<Edge> forced;
  bool extended_header = false;  // header carries |M| and |Eh|

  Graph graph() const {
    Graph g(n);
    for (auto [u, v] : edges) g.add_edge(u, v);
    return g;
  }

  bool operator==(const InstanceFile&) const = default;
};

inline InstanceFile make_instance_file(const Graph& g, int k, const VertexList& m = {},
                                       const std::vector<Edge>& forced = {}) {
  InstanceFile f;
  f.n = g.size();
  f.k = k;
  f.edges = g.edges();
  f.modulator = m;
  f.forced = forced;
  f.extended_header = !m.empty() || !forced.empty();
  return f;
}

inline InstanceFile make_instance_file(const AChvdInstance& a) {
  return make_instance_file(a.g, a.k, a.modulator, a.forced);
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline long long parse_int(const std::string& s, int line) {
  if (s.empty()) throw ParseError(line, "empty number");
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw ParseError(line, "not a number: '" + s + "'");
  }
  if (pos != s.size()) throw ParseError(line, "not a number: '" + s + "'");
  return v;
}

}  // namespace detail

inline InstanceFile parse_instance(std::istream& in) {
  InstanceFile f;
  long long m = -1, msize = -1, fsize = -1;
  bool header = false;
  std::set<Edge> seen;
  std::set<Vertex> mod;
  std::set<Edge> forced;
  std::string raw;
  int line = 0;
  auto vertex = [&](const std::string& s) {
    long long v = detail::parse_int(s, line);
    if (v < 0 || v >= f.n) throw ParseError(line, "vertex id " + s + " out of range");
    return static_cast<Vertex>(v);
  };
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.rfind("c", 0) == 0 && (raw.size() == 1 || raw[1] == ' ')) {
      f.comments.push_back(raw.size() > 2 ? raw.substr(2) : "");
      continue;
    }
    auto w = detail::split_ws(raw);
    if (w.empty()) continue;
    if (w[0] == "p") {
      if (header) throw ParseError(line, "duplicate header");
      if (w.size() != 5 && w.size() != 7) throw ParseError(line, "header must be 'p chvd n m k [|M| |Eh|]'");
      if (w[1] != "chvd") throw ParseError(line, "unknown format '" + w[1] + "'");
      long long n = detail::parse_int(w[2], line);
      m = detail::parse_int(w[3], line);
      long long k = detail::parse_int(w[4], line);
      if (n < 0 || m < 0 || k < 0) throw ParseError(line, "negative header field");
      if (n > 10'000'000) throw ParseError(line, "too many vertices");
      f.n = static_cast<int>(n);
      f.k = static_cast<int>(k);
      if (w.size() == 7) {
        f.extended_header = true;
        msize = detail::parse_int(w[5], line);
        fsize = detail::parse_int(w[6], line);
        if (msize < 0 || fsize < 0) throw ParseError(line, "negative header field");
      }
      header = true;
      continue;
    }
    if (!header) throw ParseError(line, "data before header");
    if (w[0] == "e") {
      if (w.size() != 3) throw ParseError(line, "edge line must be 'e u v'");
      Vertex u = vertex(w[1]), v = vertex(w[2]);
      if (u == v) throw ParseError(line, "self-loop");
      if (!seen.insert(make_edge(u, v)).second) throw ParseError(line, "duplicate edge");
      f.edges.emplace_back(u, v);
    } else if (w[0] == "m") {
      if (w.size() != 2) throw ParseError(line, "modulator line must be 'm v'");
      Vertex v = vertex(w[1]);
      if (!mod.insert(v).second) throw ParseError(line, "duplicate modulator vertex");
      f.modulator.push_back(v);
    } else if (w[0] == "f") {
      if (w.size() != 3) throw ParseError(line, "forced line must be 'f x y'");
      Vertex u = vertex(w[1]), v = vertex(w[2]);
      if (u == v) throw ParseError(line, "forced pair repeats a vertex");
      if (!forced.insert(make_edge(u, v)).second) throw ParseError(line, "duplicate forced pair");
      f.forced.emplace_back(u, v);
    } else {
      throw ParseError(line, "unknown line type '" + w[0] + "'");
    }
  }
  if (!header) throw ParseError(line, "missing header");
  if (static_cast<long long>(f.edges.size()) != m)
    throw ParseError(line, "header announces " + std::to_string(m) + " edges, found " + std::to_string(f.edges.size()));
  if (f.extended_header) {
    if (static_cast<long long>(f.modulator.size()) != msize) throw ParseError(line, "modulator size mismatch");
    if (static_cast<long long>(f.forced.size()) != fsize) throw ParseError(line, "forced pair count mismatch");
  } else if (!f.modulator.empty() || !f.forced.empty()) {
    throw ParseError(line, "modulator or forced lines need the extended header");
  }
  for (auto [u, v] : f.forced) {
    if (!mod.count(u) || !mod.count(v)) throw ParseError(line, "forced pair outside the modulator");
    if (!seen.count(make_edge(u, v))) throw ParseError(line, "forced pair is not an edge");
  }
  return f;
}

inline InstanceFile parse_instance(const std::string& text) {
  std::istringstream in(text);
  return parse_instance(in);
}

inline void emit_instance(std::ostream& out, const InstanceFile& f) {
  for (const auto& c : f.comments) out << (c.empty() ? "c" : "c " + c) << '\n';
  out << "p chvd " << f.n << ' ' << f.edges.size() << ' ' << f.k;
  if (f.extended_header) out << ' ' << f.modulator.size() << ' ' << f.forced.size();
  out << '\n';
  for (auto [u, v] : f.edges) out << "e " << u << ' ' << v << '\n';
  for (Vertex v : f.modulator) out << "m " << v << '\n';
  for (auto [u, v] : f.forced) out << "f " << u << ' ' << v << '\n';
}

inline std::string emit_instance(const InstanceFile& f) {
  std::ostringstream out;
  emit_instance(out, f);
  return out.str();
}

inline VertexList parse_solution(std::istream& in) {
  VertexList s;
  long long size = -1;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto w = detail::split_ws(raw);
    if (w.empty() || w[0] == "c") continue;
    if (w[0] == "s") {
      if (w.size() != 2 || size >= 0) throw ParseError(line, "malformed size line");
      size = detail::parse_int(w[1], line);
    } else if (w[0] == "v") {
      if (w.size() != 2) throw ParseError(line, "vertex line must be 'v id'");
      long long v = detail::parse_int(w[1], line);
      if (v < 0) throw ParseError(line, "negative vertex id");
      s.push_back(static_cast<Vertex>(v));
    } else {
      throw ParseError(line, "unknown line type '" + w[0] + "'");
    }
  }
  if (size >= 0 && size != static_cast<long long>(s.size())) throw ParseError(line, "solution size mismatch");
  return s;
}

inline VertexList parse_solution(const std::string& text) {
  std::istringstream in(text);
  return parse_solution(in);
}

inline std::string emit_solution(const VertexList& s) {
  std::ostringstream out;
  out << "s " << s.size() << '\n';
  for (Vertex v : s) out << "v " << v << '\n';
  return out.str();
}

using Json = nlohmann::ordered_json;

inline Json to_json(const ReductionEvent& e) {
  Json pairs_added = Json::array(), pairs_forced = Json::array();
  for (auto [u, v] : e.added_edges) pairs_added.push_back({u, v});
  for (auto [u, v] : e.forced) pairs_forced.push_back({u, v});
  Json counters = Json::object();
  for (const auto& [name, value] : e.counters) counters[name] = value;
  Json j;
  j["rule"] = e.rule;
  j["note"] = e.note;
  j["witness"] = e.witness;
  j["delta"] = {{"deleted", e.deleted},
                {"added_vertices", e.added_vertices},
                {"added_edges", pairs_added},
                {"forced", pairs_forced},
                {"modulator_added", e.modulator_added},
                {"k", e.k_delta}};
  j["counters"] = counters;
  return j;
}

inline ReductionEvent event_from_json(const Json& j) {
  ReductionEvent e;
  e.rule = j.at("rule").get<std::string>();
  e.note = j.value("note", "");
  e.witness = j.at("witness").get<std::vector<int>>();
  const Json& d = j.at("delta");
  e.deleted = d.at("deleted").get<std::vector<int>>();
  e.added_vertices = d.at("added_vertices").get<std::vector<int>>();
  for (const auto& p : d.at("added_edges")) e.added_edges.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  for (const auto& p : d.at("forced")) e.forced.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  e.modulator_added = d.at("modulator_added").get<std::vector<int>>();
  e.k_delta = d.at("k").get<int>();
  for (const auto& [name, value] : j.at("counters").items()) e.counters.emplace_back(name, value.get<long long>());
  return e;
}

// One JSON record per line.
inline std::string emit_trace(const ReductionTrace& t) {
  std::string out;
  for (const auto& e : t.events) out += to_json(e).dump() + "\n";
  return out;
}

inline ReductionTrace parse_trace(const std::string& text) {
  ReductionTrace t;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.empty()) continue;
    try {
      t.events.push_back(event_from_json(Json::parse(raw)));
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(line, ex.what());
    }
  }
  return t;
}

}  // namespace chvd
