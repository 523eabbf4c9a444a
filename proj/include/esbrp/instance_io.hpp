#pragma once

#include "esbrp/instance.hpp"

#include <string>

namespace esbrp {

// Raised when the document is not valid JSON or a field has the wrong shape.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when the document parses but violates an instance invariant; the
// message names the failed invariant.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses an instance document (see docs/formats.md). Distances fall back to
// Euclidean coordinates, travel times to dist/speed. Unknown fields are
// rejected. The returned instance is finalized and valid.
Instance load_instance(const std::string& text);
Instance load_instance_file(const std::string& path);

// Canonical round-trippable form: load_instance(serialize(inst)) reproduces
// every field.
std::string serialize(const Instance& inst);
void save_instance(const Instance& inst, const std::string& path);

// Fills dist from node coordinates; every node needs coordinates.
Matrix euclidean_matrix(const std::vector<Node>& nodes);

} // namespace esbrp
