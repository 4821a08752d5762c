#pragma once

// JSON and CSV serialization, atomic file output and config hashing.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <unistd.h>
#include <vector>

#include "json.hpp"
#include "squareice/connect.hpp"
#include "squareice/instances.hpp"
#include "squareice/mcmc.hpp"

namespace squareice {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Plain values

inline void to_json(Json& j, const Vertex& v) { j = Json::array({v.x, v.y}); }
inline void from_json(const Json& j, Vertex& v) {
  if (!j.is_array() || j.size() != 2) throw InvalidArgument("a vertex is a pair [x, y]");
  v = {j.at(0).get<int>(), j.at(1).get<int>()};
}

/// Interval sets are {"lo", "hi"} with null for an infinite end; finite lists
/// are {"values": [...]}.
inline Json value_set_json(const ValueSet& s) {
  if (!s.is_interval()) return Json{{"values", s.values()}};
  Json j;
  j["lo"] = s.bounded_below() ? Json(s.lo()) : Json(nullptr);
  j["hi"] = s.bounded_above() ? Json(s.hi()) : Json(nullptr);
  return j;
}

inline ValueSet value_set_from_json(const Json& j) {
  if (j.is_number_integer()) return ValueSet::single(j.get<int>());
  if (!j.is_object()) throw InvalidArgument("a value set is an object or an integer");
  if (j.contains("values")) return ValueSet::finite(j.at("values").get<std::vector<int>>());
  auto end = [&](const char* key, int inf) {
    if (!j.contains(key) || j.at(key).is_null()) return inf;
    return j.at(key).get<int>();
  };
  return ValueSet::interval(end("lo", kNegInf), end("hi", kPosInf));
}

inline Json predicate_json(const LevelPredicate& p) {
  Json j;
  switch (p.transform) {
    case LevelPredicate::Transform::Identity: j["transform"] = "identity"; break;
    case LevelPredicate::Transform::Absolute: j["transform"] = "abs"; break;
    case LevelPredicate::Transform::Shift:
      j["transform"] = "shift";
      j["shift"] = p.shift;
      break;
  }
  j["set"] = value_set_json(p.set);
  return j;
}

inline LevelPredicate predicate_from_json(const Json& j) {
  LevelPredicate p;
  auto t = j.value("transform", std::string("identity"));
  if (t == "identity") p.transform = LevelPredicate::Transform::Identity;
  else if (t == "abs") p.transform = LevelPredicate::Transform::Absolute;
  else if (t == "shift") p.transform = LevelPredicate::Transform::Shift;
  else throw InvalidArgument("unknown predicate transform '" + t + "'");
  p.shift = j.value("shift", 0);
  if (!j.contains("set")) throw InvalidArgument("predicate needs a set");
  p.set = value_set_from_json(j.at("set"));
  return p;
}

// ---------------------------------------------------------------------------
// Domains, boundary conditions, instances

inline Json domain_json(const Domain& d) {
  if (auto n = d.torus_period()) return Json{{"torus", *n}};
  return Json{{"kind", to_string(d.kind())}, {"vertices", d.vertices()}};
}

/// Accepts {"torus": n}, {"even_box": n}, {"rect": [w, h], "origin": [x, y]}
/// or an explicit {"kind", "vertices"} list.
inline DomainRef domain_from_json(const Json& j) {
  if (j.contains("torus")) return share(Domain::torus(j.at("torus").get<int>()));
  if (j.contains("even_box")) return share(build_even_box(j.at("even_box").get<int>()));
  if (j.contains("rect")) {
    auto wh = j.at("rect").get<std::vector<int>>();
    if (wh.size() != 2) throw InvalidArgument("rect is [w, h]");
    Vertex o = j.contains("origin") ? j.at("origin").get<Vertex>() : Vertex{0, 0};
    return share(build_rect(wh[0], wh[1], o.x, o.y));
  }
  if (!j.contains("vertices")) throw InvalidArgument("domain needs torus, even_box, rect or vertices");
  auto kind = domain_kind_from_string(j.value("kind", std::string("general")));
  return share(Domain::from_vertices(j.at("vertices").get<std::vector<Vertex>>(), kind));
}

inline Json bc_json(const BoundaryCondition& bc) {
  Json entries = Json::array();
  for (auto& [v, s] : bc.entries()) entries.push_back(Json{{"v", v}, {"set", value_set_json(s)}});
  Json j{{"entries", entries}};
  if (bc.pos_part()) j["pos"] = *bc.pos_part();
  return j;
}

/// Also accepts {"zero": true}, {"constant": g} and {"pinned": [x, y, value]}.
inline BoundaryCondition bc_from_json(const Json& j, const Domain& d) {
  if (j.is_null()) return {};
  if (j.contains("zero")) return BoundaryCondition::zero(d);
  if (j.contains("constant")) return BoundaryCondition::constant(d, j.at("constant").get<int>());
  if (j.contains("pinned")) {
    auto p = j.at("pinned").get<std::vector<int>>();
    if (p.size() != 3) throw InvalidArgument("pinned is [x, y, value]");
    return BoundaryCondition::pinned({p[0], p[1]}, p[2]);
  }
  BoundaryCondition bc;
  for (const auto& e : j.value("entries", Json::array())) {
    Vertex v = e.at("v").get<Vertex>();
    if (d.index_of(v) < 0) throw InvalidArgument("boundary vertex outside the domain");
    bc.set(v, value_set_from_json(e.at("set")));
  }
  if (j.contains("pos")) bc.set_pos_part(j.at("pos").get<std::vector<Vertex>>());
  return bc;
}

inline Json quad_json(const Quad& q) { return Json(q.marks()); }

inline Quad quad_from_json(const Json& j, DomainRef d) {
  auto m = j.get<std::vector<Vertex>>();
  if (m.size() != 4) throw InvalidArgument("a quad has four marked points");
  return Quad(std::move(d), m[0], m[1], m[2], m[3]);
}

inline Json instance_json(const Instance& inst) {
  Json j{{"name", inst.name}, {"domain", domain_json(*inst.domain)}, {"bc", bc_json(inst.bc)}};
  if (inst.quad) j["quad"] = quad_json(*inst.quad);
  return j;
}

/// A string names a built-in instance; an object is an inline instance.
inline Instance instance_from_json(const Json& j) {
  if (j.is_string()) return named_instance(j.get<std::string>());
  if (!j.is_object()) throw InvalidArgument("an instance is a name or an object");
  if (!j.contains("domain")) {
    if (j.contains("name")) return named_instance(j.at("name").get<std::string>());
    throw InvalidArgument("instance needs a domain or a name");
  }
  Instance inst;
  inst.name = j.value("name", std::string("inline"));
  inst.domain = domain_from_json(j.at("domain"));
  inst.bc = bc_from_json(j.value("bc", Json()), *inst.domain);
  if (j.contains("quad")) inst.quad = quad_from_json(j.at("quad"), inst.domain);
  return inst;
}

inline Json heights_json(const HeightFunction& h) { return h.values(); }

inline HeightFunction heights_from_json(const Json& j, DomainRef d) {
  auto vals = j.get<std::vector<int>>();
  if (vals.size() != d->size()) throw InvalidArgument("height list does not match the domain size");
  return HeightFunction(std::move(d), std::move(vals));
}

// ---------------------------------------------------------------------------
// Events

inline Json event_json(const EventSpec& e) {
  Json target;
  std::string mode;
  switch (e.mode) {
    case EventSpec::Mode::Crossing:
      mode = "crossing";
      target = Json{{"quad", quad_json(*e.quad)}};
      break;
    case EventSpec::Mode::Circuit:
      mode = "circuit";
      target = Json{{"annulus", {{"center", e.annulus->center}, {"inner", e.annulus->inner}, {"outer", e.annulus->outer}}}};
      break;
    case EventSpec::Mode::BoxCrossing:
      mode = "box_crossing";
      target = Json{{"box", {{"nx", e.box->nx}, {"ny", e.box->ny}, {"horizontal", e.box->horizontal}}}};
      break;
  }
  return Json{{"target", target}, {"predicate", predicate_json(e.predicate)}, {"adjacency", to_string(e.adjacency)},
              {"mode", mode}};
}

/// Quads refer to `d`; a crossing with target "quad": "instance" uses the
/// instance's own quad (or its rotation with "instance-rotated").
inline EventSpec event_from_json(const Json& j, const Instance& inst) {
  auto mode = j.value("mode", std::string("crossing"));
  auto pred = predicate_from_json(j.at("predicate"));
  auto adj = adjacency_from_string(j.value("adjacency", std::string("nn")));
  const Json& t = j.at("target");
  if (mode == "crossing") {
    const Json& q = t.at("quad");
    if (q.is_string()) {
      if (!inst.quad) throw InvalidArgument("instance has no quad");
      auto name = q.get<std::string>();
      if (name == "instance") return EventSpec::crossing(*inst.quad, pred, adj);
      if (name == "instance-rotated") return EventSpec::crossing(inst.quad->rotated(), pred, adj);
      throw InvalidArgument("unknown quad reference '" + name + "'");
    }
    return EventSpec::crossing(quad_from_json(q, inst.domain), pred, adj);
  }
  if (mode == "circuit") {
    const Json& a = t.at("annulus");
    return EventSpec::circuit(Annulus(a.value("center", Json::array({0, 0})).get<Vertex>(), a.at("inner").get<int>(),
                                      a.at("outer").get<int>()),
                              pred, adj);
  }
  if (mode == "box_crossing") {
    const Json& b = t.at("box");
    return EventSpec::box_crossing(Box{b.at("nx").get<int>(), b.at("ny").get<int>(), b.value("horizontal", true)}, pred,
                                   adj);
  }
  throw InvalidArgument("unknown event mode '" + mode + "'");
}

// ---------------------------------------------------------------------------
// Chain settings

inline Json chain_config_json(const ChainConfig& c) {
  return Json{{"sweeps", c.sweeps},
              {"burn_in", c.burn_in},
              {"thin", c.thin},
              {"seed", c.seed},
              {"scan", c.scan == ScanOrder::Raster ? "raster" : "random"}};
}

/// Overwrites only the keys present in j.
inline void update_chain_config(ChainConfig& c, const Json& j) {
  if (j.contains("sweeps")) c.sweeps = j.at("sweeps").get<long>();
  if (j.contains("burn_in")) c.burn_in = j.at("burn_in").get<long>();
  if (j.contains("thin")) c.thin = j.at("thin").get<long>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("scan")) {
    auto s = j.at("scan").get<std::string>();
    if (s == "raster") c.scan = ScanOrder::Raster;
    else if (s == "random") c.scan = ScanOrder::Random;
    else throw InvalidArgument("scan is raster or random");
  }
}

// ---------------------------------------------------------------------------
// Hashing, CSV, files

/// FNV-1a of the canonical (key-sorted, compact) dump, as 16 hex digits.
inline std::string content_hash(const Json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Decimal with 9 significant digits; "nan" and "inf" spelled out.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    Row& operator<<(const std::string& s) {
      cells_.push_back(quote(s));
      return *this;
    }
    Row& operator<<(const char* s) { return *this << std::string(s); }
    Row& operator<<(double x) {
      cells_.push_back(format_number(x));
      return *this;
    }
    template <class I>
      requires std::is_integral_v<I>
    Row& operator<<(I x) {
      cells_.push_back(std::to_string(x));
      return *this;
    }
    Row& operator<<(bool b) {
      cells_.push_back(b ? "true" : "false");
      return *this;
    }

   private:
    friend class CsvTable;
    static std::string quote(const std::string& s) {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string out = "\"";
      for (char c : s) {
        if (c == '"') out += '"';
        out += c;
      }
      return out + "\"";
    }
    std::vector<std::string> cells_;
  };

  Row& row() { return rows_.emplace_back(); }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      if (cells.size() != header_.size()) throw InternalCorruption("CSV row width differs from the header");
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r.cells_);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

/// Writes to a sibling temporary file, then renames over the target.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InvalidArgument("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw InvalidArgument("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument("invalid JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace squareice
