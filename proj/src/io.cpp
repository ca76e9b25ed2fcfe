#include "homord/io.hpp"

#include <fstream>
#include <sstream>

#include "homord/errors.hpp"

namespace homord {

namespace {

std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

long parse_number(const std::string& w, std::size_t line) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(w, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != w.size() || w.empty())
    throw ValidationError("line " + std::to_string(line) + ": expected a number, got '" + w + "'");
  return v;
}

RelationTables tables_of(const FinStructure& s) {
  RelationTables t;
  for (std::size_t r = 0; r < s.signature().size(); ++r) t[s.signature()[r].name] = s.tuples(r);
  return t;
}

}  // namespace

std::string to_text(const FinStructure& s) {
  std::ostringstream out;
  out << "sig";
  for (const auto& r : s.signature().relations()) {
    out << ' ' << r.name << ':' << r.arity;
    if (r.symmetric) out << ":sym";
    if (r.irreflexive) out << ":irr";
  }
  out << "\nsize " << s.size() << '\n';
  if (s.has_sorts()) {
    out << "sorts";
    for (const auto& l : s.sort_labels()) out << ' ' << l;
    out << '\n';
  }
  for (std::size_t r = 0; r < s.signature().size(); ++r)
    for (const auto& t : s.tuples(r)) {
      out << "rel " << s.signature()[r].name;
      for (auto e : t) out << ' ' << e;
      out << '\n';
    }
  return out.str();
}

FinStructure parse_text(std::string_view text) {
  std::optional<Signature> sig;
  std::optional<std::size_t> size;
  std::vector<std::string> sorts;
  RelationTables tables;
  std::istringstream in{std::string(text)};
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto w = split_words(line);
    if (w.empty()) continue;
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (w[0] == "sig") {
      if (sig) throw ValidationError(where + "repeated sig line");
      std::vector<RelationSymbol> rels;
      for (std::size_t i = 1; i < w.size(); ++i) {
        const auto parts = split(w[i], ':');
        if (parts.size() < 2) throw ValidationError(where + "relation '" + w[i] + "' needs name:arity");
        RelationSymbol r;
        r.name = parts[0];
        r.arity = static_cast<int>(parse_number(parts[1], lineno));
        for (std::size_t k = 2; k < parts.size(); ++k) {
          if (parts[k] == "sym") r.symmetric = true;
          else if (parts[k] == "irr") r.irreflexive = true;
          else throw ValidationError(where + "unknown relation flag '" + parts[k] + "'");
        }
        rels.push_back(std::move(r));
      }
      sig = Signature(std::move(rels));
    } else if (w[0] == "size") {
      if (w.size() != 2) throw ValidationError(where + "size takes one number");
      const long n = parse_number(w[1], lineno);
      if (n < 0) throw ValidationError(where + "size must be nonnegative");
      size = static_cast<std::size_t>(n);
    } else if (w[0] == "sorts") {
      sorts.assign(w.begin() + 1, w.end());
    } else if (w[0] == "rel") {
      if (w.size() < 2) throw ValidationError(where + "rel needs a relation name");
      Tuple t;
      for (std::size_t i = 2; i < w.size(); ++i) t.push_back(static_cast<Element>(parse_number(w[i], lineno)));
      tables[w[1]].push_back(std::move(t));
    } else {
      throw ValidationError(where + "unknown directive '" + w[0] + "'");
    }
  }
  if (!sig) throw ValidationError("missing sig line");
  if (!size) throw ValidationError("missing size line");
  return make_structure(*sig, *size, tables, std::move(sorts));
}

Json to_json(const FinStructure& s) {
  Json sig = Json::array();
  for (const auto& r : s.signature().relations())
    sig.push_back({{"name", r.name}, {"arity", r.arity}, {"symmetric", r.symmetric}, {"irreflexive", r.irreflexive}});
  Json rels = Json::object();
  for (const auto& [name, tuples] : tables_of(s)) rels[name] = tuples;
  Json j{{"signature", sig}, {"size", s.size()}, {"relations", rels}};
  if (s.has_sorts()) j["sorts"] = s.sort_labels();
  return j;
}

FinStructure structure_from_json(const Json& j) {
  try {
    std::vector<RelationSymbol> rels;
    for (const auto& r : j.at("signature")) {
      RelationSymbol sym;
      sym.name = r.at("name").get<std::string>();
      sym.arity = r.at("arity").get<int>();
      sym.symmetric = r.value("symmetric", false);
      sym.irreflexive = r.value("irreflexive", false);
      rels.push_back(std::move(sym));
    }
    RelationTables tables;
    if (j.contains("relations"))
      for (const auto& [name, tuples] : j.at("relations").items()) tables[name] = tuples.get<std::vector<Tuple>>();
    std::vector<std::string> sorts;
    if (j.contains("sorts")) sorts = j.at("sorts").get<std::vector<std::string>>();
    return make_structure(Signature(std::move(rels)), j.at("size").get<std::size_t>(), tables, std::move(sorts));
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed structure JSON: ") + e.what());
  }
}

Json to_json(const StructureChain& chain) {
  Json levels = Json::array();
  for (const auto& l : chain.levels) levels.push_back(to_json(l));
  return {{"class", chain.class_name},
          {"seed", chain.seed},
          {"levels", levels},
          {"sizes", [&] {
             std::vector<std::size_t> v;
             for (const auto& l : chain.levels) v.push_back(l.size());
             return v;
           }()},
          {"saturation", chain.saturation},
          {"relativeSaturation", chain.relative_saturation}};
}

StructureChain chain_from_json(const Json& j) {
  StructureChain chain;
  if (!j.contains("levels")) {
    chain.levels.push_back(structure_from_json(j));
    chain.saturation.push_back(-1);
    chain.relative_saturation.push_back(0);
    return chain;
  }
  try {
    chain.class_name = j.value("class", std::string{});
    chain.seed = j.value("seed", std::uint64_t{0});
    for (const auto& l : j.at("levels")) chain.levels.push_back(structure_from_json(l));
    chain.saturation = j.value("saturation", std::vector<int>(chain.levels.size(), -1));
    chain.relative_saturation = j.value("relativeSaturation", std::vector<int>(chain.levels.size(), 0));
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed chain JSON: ") + e.what());
  }
  if (chain.levels.empty()) throw ValidationError("chain has no levels");
  validate_chain(chain);
  return chain;
}

StructureChain load_chain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::exception& e) {
      throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
    return chain_from_json(j);
  }
  StructureChain chain;
  chain.levels.push_back(parse_text(text));
  chain.saturation.push_back(-1);
  chain.relative_saturation.push_back(0);
  return chain;
}

Json to_json(const OrbitPartition& p) {
  return {{"k", p.arity}, {"fixed", p.stabilized_by}, {"count", p.blocks.size()}, {"blocks", p.blocks}};
}

Json to_json(const AclProfile& p) {
  return {{"verdict", to_string(p.verdict)}, {"orbitSizes", p.orbit_sizes}, {"orbits", p.orbits}};
}

Json to_json(const Equivalence& e) {
  return {{"classes", e.classes}, {"trivial", e.is_equality() || e.is_total()}};
}

Json to_json(const TauPath& p) {
  return {{"nodes", p.nodes}, {"tau", p.tau.hex()}, {"length", p.length()}};
}

Json to_json(const TauPathFamily& f) {
  Json paths = Json::array();
  for (const auto& p : f.paths) paths.push_back(to_json(p));
  return {{"paths", paths}, {"requested", f.requested}, {"shortage", f.shortage}, {"exhaustive", f.exhaustive}};
}

Json to_json(const Estimate& e) {
  return {{"value", e.value}, {"stderr", e.stderr_}, {"n", e.n}, {"ci99", {e.ci99_low, e.ci99_high}}};
}

Json to_json(const TestVerdict& v) {
  return {{"name", v.name},       {"statistic", v.statistic}, {"threshold", v.threshold}, {"rule", v.rule},
          {"pass", v.pass},       {"seed", v.seed},           {"n", v.n},                 {"detail", v.detail}};
}

Json to_json(const CROSystem& system, const UniquenessReport& report) {
  Json vars = Json::array();
  for (const auto& v : system.variables)
    vars.push_back({{"code", v.code.hex()}, {"size", v.size}, {"base", v.base.hex()}, {"count", v.count}});
  Json dirac = Json::array();
  for (const auto& sol : report.dirac_solutions) {
    Json codes = Json::array();
    for (auto i : sol) codes.push_back(system.variables[i].code.hex());
    dirac.push_back(codes);
  }
  return {{"class", system.class_name},
          {"n", system.n},
          {"variables", vars},
          {"equalities", {{"levelMass", system.mass_rows}, {"consistency", system.consistency_rows},
                          {"total", system.rows.size()}}},
          {"rank", report.rank},
          {"uniformFeasible", report.uniform_feasible},
          {"nullspaceDim", report.nullspace_dim},
          {"diracSolutions", dirac},
          {"diracSearchComplete", report.dirac_search_complete}};
}

Json to_json(const ProjectedDimension& p) {
  return {{"byRank", p.by_rank}, {"byElimination", p.by_elimination}, {"targetVariables", p.target_variables}};
}

}  // namespace homord
