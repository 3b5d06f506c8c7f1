#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "struktnorm/range.hpp"
#include "struktnorm/setfn.hpp"

namespace struktnorm {

using json = nlohmann::json;

/// A parsed set-function spec: a mask-based function for d <= 64, or an
/// index-list range oracle for the range families at any size.
struct ParsedFunction {
  std::optional<SetFunction> fn;
  std::optional<RangeOracle> range;
  int d = 0;
  std::string family;
};

inline double parse_ext(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Infinity") return kInf;
    throw InvalidArgument("unrecognized extended real '" + s + "'");
  }
  if (!v.is_number()) throw InvalidArgument("expected a number or \"inf\"");
  return v.get<double>();
}

inline json ext_to_json(double v) { return v == kInf ? json("inf") : json(v); }

inline SubsetMask parse_subset(const json& v, int d) {
  if (!v.is_array()) throw InvalidArgument("subsets are arrays of 1-based indices");
  return SubsetMask::from_one_based(v.get<std::vector<int>>(), d);
}

inline json subset_to_json(SubsetMask m) { return json(m.one_based()); }

inline std::vector<SubsetMask> parse_subsets(const json& v, int d, const char* what) {
  if (!v.is_array()) throw InvalidArgument(std::string("'") + what + "' must be an array of subsets");
  std::vector<SubsetMask> out;
  for (const auto& g : v) out.push_back(parse_subset(g, d));
  return out;
}

inline ParsedFunction parse_function(const json& j) {
  if (!j.is_object()) throw InvalidArgument("set function spec must be a JSON object");
  ParsedFunction pf;
  const json params = j.value("params", json::object());
  if (j.contains("table")) {
    const int d = j.at("d").get<int>();
    std::vector<double> vals;
    for (const auto& v : j.at("table")) vals.push_back(parse_ext(v));
    pf.fn = SetFunction::explicit_table(d, std::move(vals));
    pf.d = d;
    pf.family = "table";
    return pf;
  }
  if (!j.contains("family")) throw InvalidArgument("spec needs either 'table' or 'family'");
  const auto fam = j.at("family").get<std::string>();
  pf.family = fam;
  int d = j.value("d", 0);
  if (fam == "projected_range_2d") {
    const int d1 = params.at("d1").get<int>(), d2 = params.at("d2").get<int>();
    if (d != 0 && d != d1 * d2) throw InvalidArgument("d must equal d1 * d2");
    pf.d = d1 * d2;
    pf.range = RangeOracle::projected_range_2d(d1, d2);
    if (pf.d <= kMaxGround) pf.fn = SetFunction::projected_range_2d(d1, d2);
    return pf;
  }
  if (d < 1) throw InvalidArgument("'d' must be a positive integer");
  pf.d = d;
  if (fam == "modified_range") {
    pf.range = RangeOracle::modified_range(d);
    if (d <= kMaxGround) pf.fn = SetFunction::modified_range(d);
    return pf;
  }
  if (d > kMaxGround) throw InvalidArgument("family '" + fam + "' supports d <= 64");
  if (fam == "cardinality") pf.fn = SetFunction::cardinality(d);
  else if (fam == "indicator_nonempty") pf.fn = SetFunction::indicator_nonempty(d);
  else if (fam == "range") pf.fn = SetFunction::range(d);
  else if (fam == "partition_group_count" || fam == "overlap_count") {
    auto groups = parse_subsets(params.at("groups"), d, "groups");
    std::vector<double> weights;
    if (params.contains("weights")) weights = params.at("weights").get<std::vector<double>>();
    pf.fn = fam == "overlap_count" ? SetFunction::overlap_count(d, std::move(groups), std::move(weights))
                                   : SetFunction::partition_group_count(d, std::move(groups), std::move(weights));
  } else if (fam == "exclusive_hard") {
    pf.fn = SetFunction::exclusive_hard(d, parse_subsets(params.at("groups"), d, "groups"));
  } else if (fam == "exclusive_max_overlap") {
    pf.fn = SetFunction::exclusive_max_overlap(d, parse_subsets(params.at("groups"), d, "groups"));
  } else if (fam == "block_code") {
    auto blocks = parse_subsets(params.at("blocks"), d, "blocks");
    std::vector<double> costs;
    for (const auto& c : params.at("costs")) costs.push_back(parse_ext(c));
    pf.fn = SetFunction::block_code(d, std::move(blocks), std::move(costs));
  } else {
    throw InvalidArgument("unknown family '" + fam + "'");
  }
  return pf;
}

/// Serializes a root (non-minor) function; minors are written as tables.
inline json function_to_json(const SetFunction& f) {
  json j;
  j["d"] = f.d();
  const auto& b = f.base();
  if (f.is_minor() || f.family() == Family::ExplicitTable) {
    json t = json::array();
    for (double v : f.table()) t.push_back(ext_to_json(v));
    j["table"] = t;
    return j;
  }
  j["family"] = family_name(f.family());
  json params = json::object();
  auto groups = [&] {
    json g = json::array();
    for (auto m : b.groups) g.push_back(subset_to_json(m));
    return g;
  };
  switch (f.family()) {
    case Family::PartitionGroupCount:
    case Family::OverlapCount:
      params["groups"] = groups();
      params["weights"] = b.weights;
      break;
    case Family::ExclusiveHard:
    case Family::ExclusiveMaxOverlap: params["groups"] = groups(); break;
    case Family::BlockCode:
      params["blocks"] = groups();
      params["costs"] = b.weights;
      break;
    case Family::ProjectedRange2D:
      params["d1"] = b.d1;
      params["d2"] = b.d2;
      break;
    default: break;
  }
  if (!params.empty()) j["params"] = params;
  return j;
}

/// p from a number or the string "inf".
inline double parse_p(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "infinity") return kInf;
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("cannot parse p from '" + s + "'");
  }
  if (used != s.size()) throw InvalidArgument("cannot parse p from '" + s + "'");
  if (!(p > 1.0)) throw InvalidArgument("p must be > 1 or \"inf\"");
  return p;
}

}  // namespace struktnorm
