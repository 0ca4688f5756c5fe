#pragma once

#include <string>

#include "oag/formula.hpp"
#include "oag/group.hpp"

namespace oag {

// Parse a group spec from its text form, one component per line, most
// significant first:
//
//   component <name>: dims{<p>:<n|inf>, ...} default <n|inf> [discrete]
//                     [realize Z | Q | Z_inv{<p>, ...}]
//   omega_tower: dims{...} default <n|inf> [discrete] [realize ...]
//
// '#' starts a comment; blank lines are ignored; the omega_tower line, if
// present, must come last. Throws parse_error with a line-oriented message.
GroupSpec parse_group_spec(const std::string& text);

// Read and parse a *.oag file. Throws domain_error if the file cannot be
// read and parse_error on bad content.
GroupSpec read_group_spec_file(const std::string& path);

// Render a spec back to the text form accepted by parse_group_spec.
std::string format_group_spec(const GroupSpec& g);

}  // namespace oag
