#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <string_view>

#include "homord/chain.hpp"
#include "homord/cro.hpp"
#include "homord/group.hpp"
#include "homord/stats.hpp"
#include "homord/structure.hpp"
#include "homord/tau_paths.hpp"

namespace homord {

using Json = nlohmann::json;

/// Text format, one directive per line, `#` starts a comment:
///
///     sig E:2:sym:irr P:1
///     size 5
///     sorts S0 S0 S1 S1 S1      (optional, one label per element)
///     rel E 0 1
///     rel E 1 0
///
/// `sym` and `irr` declare binary relations symmetric and irreflexive.
std::string to_text(const FinStructure& s);
/// Throws ValidationError naming the offending line.
FinStructure parse_text(std::string_view text);

Json to_json(const FinStructure& s);
FinStructure structure_from_json(const Json& j);

Json to_json(const StructureChain& chain);
/// Accepts a chain object, or a bare structure as a one-level chain.
StructureChain chain_from_json(const Json& j);

/// Reads a chain from a .json file, or a single structure from any other file
/// in the text format.
StructureChain load_chain(const std::string& path);

Json to_json(const OrbitPartition& p);
Json to_json(const AclProfile& p);
Json to_json(const Equivalence& e);
Json to_json(const TauPath& p);
Json to_json(const TauPathFamily& f);
Json to_json(const Estimate& e);
Json to_json(const TestVerdict& v);
Json to_json(const CROSystem& system, const UniquenessReport& report);
Json to_json(const ProjectedDimension& p);

}  // namespace homord
