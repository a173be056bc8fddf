#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bfuse/mol.hpp"

namespace bfuse {

// One record of a multi-record V2000 structure file: the molecule, its title
// line, and any trailing data items ("> <name>" blocks).
struct SdfRecord {
    std::string title;
    MolecularGraph mol;
    std::map<std::string, std::string> properties;
};

// Parses a V2000 multi-record structure file. Coordinates are taken verbatim
// from the atom block (x, y; z ignored); hydrogens are kept as written.
// Old-style charge codes and "M  CHG" lines are both honored, the latter
// taking precedence. Throws ParseError with record/line info on malformed
// input; a record with zero atoms is a ValidationError.
std::vector<SdfRecord> parse_sdf_records(std::string_view text);

// Molecule list only, record order preserved.
std::vector<MolecularGraph> parse_structure_file(std::string_view bytes);

// Serializes records back to V2000 text (used by fixtures and generators).
std::string write_sdf(const std::vector<SdfRecord>& records);

}  // namespace bfuse
