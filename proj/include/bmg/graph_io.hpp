#pragma once

#include <iosfwd>
#include <string>

#include "bmg/graph.hpp"

namespace bmg {

struct ParsedGraph {
    MetricGraph g;
    WentzellData data;
};

// Parses the line-oriented graph description format:
//   graph <name>
//   vertex <id>
//   iedge <id> <v_from> <v_to> <length>
//   eedge <id> <v>
//   tadpole <id> <v> <length>
//   wentzell <v> a=<float> c=<float>
//   wb <v> <edge-id> <float>
// '#' starts a comment. Per vertex, a + sum(b) + c must equal 1 within 1e-9;
// the triple is then renormalized to sum exactly to 1. A wb line naming a
// tadpole splits the weight equally between the loop's two half-edges.
// Throws GraphError with a line number on malformed input.
ParsedGraph parse_graph(const std::string& text);
ParsedGraph load_graph_file(const std::string& path);

// Canonical text form: ids sorted, internal edges oriented with the smaller
// vertex id first. Two graphs are treated as equal iff the forms match.
std::string canonical_form(const MetricGraph& g);

}  // namespace bmg
