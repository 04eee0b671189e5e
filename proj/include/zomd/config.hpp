// SPDX-License-Identifier: Apache-2.0
//
// Run configuration documents. A document has the sections
//
//   problem, graph, kernel, mirror, schedules, run
//
// and may start from a named preset ("preset": "reproduce-paper"), with the
// given sections merged over it. Unknown keys anywhere are rejected.
#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "zomd/engine.hpp"
#include "zomd/graph.hpp"

namespace zomd::config {

using Json = nlohmann::json;

/// Document for a named preset. Known: "reproduce-paper".
Json preset(const std::string& name);

/// Apply "a.b.c=value" overrides; the value is parsed as JSON when possible
/// and taken as a string otherwise.
void apply_overrides(Json& doc, const std::vector<std::string>& overrides);

/// Expand presets, fill defaults and check every key. Throws ConfigError
/// naming the first unknown or malformed key.
Json resolve(const Json& doc);

/// Build an engine config from a resolved document.
engine::RunConfig build(const Json& resolved);

/// Graph section alone (resolved or not).
graph::GraphSchedule build_graph(const Json& graph_section);

/// resolve + build from text.
struct Loaded {
  Json resolved;
  engine::RunConfig run;
  unsigned threads = 1;
};
Loaded load(const std::string& text, const std::vector<std::string>& overrides = {});
Loaded load_file(const std::string& path, const std::vector<std::string>& overrides = {});

}  // namespace zomd::config
