#pragma once

#include <string>
#include <utility>
#include <vector>

namespace bfuse {

struct Atom {
    std::string element;
    double x = 0.0;  // angstrom
    double y = 0.0;
    int formal_charge = 0;
};

struct Bond {
    int a = 0;
    int b = 0;
    double order = 1.0;  // 1, 2, 3, or 1.5 for aromatic
};

// 2D molecular graph; the source of truth for rasterization.
struct MolecularGraph {
    std::vector<Atom> atoms;
    std::vector<Bond> bonds;

    // At least one atom, bond indices in range, no self-bonds.
    void validate() const;

    std::pair<double, double> centroid() const;
};

// Atomic number for an element symbol (case-sensitive standard symbols,
// H..Fm); throws ValidationError for unknown symbols.
int atomic_number(const std::string& symbol);

// Number of bond records touching each atom.
std::vector<int> atom_degrees(const MolecularGraph& mol);

// Rotates all atom coordinates about the molecule centroid. The bond list is
// untouched; pairwise distances are preserved.
MolecularGraph rotate_molecule(const MolecularGraph& mol, double angle_degrees);

}  // namespace bfuse
