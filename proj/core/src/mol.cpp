#include "bfuse/mol.hpp"

#include <cmath>
#include <map>

#include "bfuse/errors.hpp"

namespace bfuse {

void MolecularGraph::validate() const {
    if (atoms.empty()) throw ValidationError("molecule has no atoms");
    const int n = static_cast<int>(atoms.size());
    for (const Bond& b : bonds) {
        if (b.a < 0 || b.a >= n || b.b < 0 || b.b >= n) {
            throw ValidationError("bond references a missing atom");
        }
        if (b.a == b.b) throw ValidationError("self-bond on atom " + std::to_string(b.a));
    }
}

std::pair<double, double> MolecularGraph::centroid() const {
    if (atoms.empty()) throw ValidationError("molecule has no atoms");
    double cx = 0.0, cy = 0.0;
    for (const Atom& a : atoms) {
        cx += a.x;
        cy += a.y;
    }
    const double inv = 1.0 / static_cast<double>(atoms.size());
    return {cx * inv, cy * inv};
}

int atomic_number(const std::string& symbol) {
    static const std::map<std::string, int> table = {
        {"H", 1},    {"He", 2},   {"Li", 3},   {"Be", 4},   {"B", 5},    {"C", 6},
        {"N", 7},    {"O", 8},    {"F", 9},    {"Ne", 10},  {"Na", 11},  {"Mg", 12},
        {"Al", 13},  {"Si", 14},  {"P", 15},   {"S", 16},   {"Cl", 17},  {"Ar", 18},
        {"K", 19},   {"Ca", 20},  {"Sc", 21},  {"Ti", 22},  {"V", 23},   {"Cr", 24},
        {"Mn", 25},  {"Fe", 26},  {"Co", 27},  {"Ni", 28},  {"Cu", 29},  {"Zn", 30},
        {"Ga", 31},  {"Ge", 32},  {"As", 33},  {"Se", 34},  {"Br", 35},  {"Kr", 36},
        {"Rb", 37},  {"Sr", 38},  {"Y", 39},   {"Zr", 40},  {"Nb", 41},  {"Mo", 42},
        {"Tc", 43},  {"Ru", 44},  {"Rh", 45},  {"Pd", 46},  {"Ag", 47},  {"Cd", 48},
        {"In", 49},  {"Sn", 50},  {"Sb", 51},  {"Te", 52},  {"I", 53},   {"Xe", 54},
        {"Cs", 55},  {"Ba", 56},  {"La", 57},  {"Ce", 58},  {"Pr", 59},  {"Nd", 60},
        {"Pm", 61},  {"Sm", 62},  {"Eu", 63},  {"Gd", 64},  {"Tb", 65},  {"Dy", 66},
        {"Ho", 67},  {"Er", 68},  {"Tm", 69},  {"Yb", 70},  {"Lu", 71},  {"Hf", 72},
        {"Ta", 73},  {"W", 74},   {"Re", 75},  {"Os", 76},  {"Ir", 77},  {"Pt", 78},
        {"Au", 79},  {"Hg", 80},  {"Tl", 81},  {"Pb", 82},  {"Bi", 83},  {"Po", 84},
        {"At", 85},  {"Rn", 86},  {"Fr", 87},  {"Ra", 88},  {"Ac", 89},  {"Th", 90},
        {"Pa", 91},  {"U", 92},   {"Np", 93},  {"Pu", 94},  {"Am", 95},  {"Cm", 96},
        {"Bk", 97},  {"Cf", 98},  {"Es", 99},  {"Fm", 100},
    };
    auto it = table.find(symbol);
    if (it == table.end()) throw ValidationError("unknown element symbol: " + symbol);
    return it->second;
}

std::vector<int> atom_degrees(const MolecularGraph& mol) {
    std::vector<int> deg(mol.atoms.size(), 0);
    for (const Bond& b : mol.bonds) {
        ++deg[static_cast<std::size_t>(b.a)];
        ++deg[static_cast<std::size_t>(b.b)];
    }
    return deg;
}

MolecularGraph rotate_molecule(const MolecularGraph& mol, double angle_degrees) {
    if (!std::isfinite(angle_degrees)) {
        throw ValidationError("rotation angle must be finite");
    }
    mol.validate();
    const auto [cx, cy] = mol.centroid();
    const double rad = angle_degrees * M_PI / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    MolecularGraph out = mol;
    for (Atom& a : out.atoms) {
        const double dx = a.x - cx;
        const double dy = a.y - cy;
        a.x = cx + c * dx - s * dy;
        a.y = cy + s * dx + c * dy;
    }
    return out;
}

}  // namespace bfuse
