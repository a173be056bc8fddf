#include "bfuse/sdf.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "bfuse/errors.hpp"

namespace bfuse {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

bool parse_int(std::string_view s, int& out) {
    s = trim(s);
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    try {
        std::size_t used = 0;
        out = std::stod(std::string(s), &used);
        return used == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

std::string_view field(std::string_view line, std::size_t pos, std::size_t len) {
    if (pos >= line.size()) return {};
    return line.substr(pos, std::min(len, line.size() - pos));
}

// Old-style atom-block charge column: 1->+3, 2->+2, 3->+1, 5->-1, 6->-2, 7->-3.
int charge_from_code(int code) {
    switch (code) {
        case 1: return 3;
        case 2: return 2;
        case 3: return 1;
        case 5: return -1;
        case 6: return -2;
        case 7: return -3;
        default: return 0;  // 0 = none, 4 = doublet radical
    }
}

struct LineCursor {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;  // next line index

    bool done() const { return pos >= lines.size(); }
    std::string_view take() { return lines[pos++]; }
    long line_no() const { return static_cast<long>(pos); }  // 1-based, last taken
};

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            std::string_view line = text.substr(start, i - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            lines.push_back(line);
            start = i + 1;
        }
    }
    // Drop a trailing empty line from a final newline.
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

SdfRecord parse_record(LineCursor& cur, long record_no) {
    SdfRecord rec;
    if (cur.lines.size() - cur.pos < 4) {
        throw ParseError("truncated record header", record_no, cur.line_no() + 1);
    }
    rec.title = std::string(trim(cur.take()));
    cur.take();  // program line
    cur.take();  // comment line

    const std::string_view counts = cur.take();
    const long counts_line = cur.line_no();
    int natoms = 0, nbonds = 0;
    bool ok = parse_int(field(counts, 0, 3), natoms) && parse_int(field(counts, 3, 3), nbonds);
    if (!ok) {
        // Fallback for writers that do not pad the counts line.
        const auto tok = split_ws(counts);
        ok = tok.size() >= 2 && parse_int(tok[0], natoms) && parse_int(tok[1], nbonds);
    }
    if (!ok || natoms < 0 || nbonds < 0) {
        throw ParseError("malformed counts line", record_no, counts_line);
    }
    if (natoms == 0) {
        throw ValidationError("record " + std::to_string(record_no) + " has zero atoms (line " +
                              std::to_string(counts_line) + ")");
    }

    rec.mol.atoms.reserve(static_cast<std::size_t>(natoms));
    for (int i = 0; i < natoms; ++i) {
        if (cur.done()) {
            throw ParseError("truncated atom block", record_no, cur.line_no() + 1);
        }
        const std::string_view line = cur.take();
        Atom atom;
        double z_ignored = 0.0;
        bool fixed = parse_double(field(line, 0, 10), atom.x) &&
                     parse_double(field(line, 10, 10), atom.y) &&
                     parse_double(field(line, 20, 10), z_ignored);
        std::string_view sym = trim(field(line, 31, 3));
        if (fixed && !sym.empty()) {
            atom.element = std::string(sym);
            int code = 0;
            if (parse_int(field(line, 36, 3), code)) {
                atom.formal_charge = charge_from_code(code);
            }
        } else {
            const auto tok = split_ws(line);
            if (tok.size() < 4 || !parse_double(tok[0], atom.x) ||
                !parse_double(tok[1], atom.y) || !parse_double(tok[2], z_ignored)) {
                throw ParseError("malformed atom line", record_no, cur.line_no());
            }
            atom.element = std::string(tok[3]);
        }
        rec.mol.atoms.push_back(std::move(atom));
    }

    rec.mol.bonds.reserve(static_cast<std::size_t>(nbonds));
    for (int i = 0; i < nbonds; ++i) {
        if (cur.done()) {
            throw ParseError("truncated bond block", record_no, cur.line_no() + 1);
        }
        const std::string_view line = cur.take();
        int a = 0, b = 0, type = 0;
        bool fixed = parse_int(field(line, 0, 3), a) && parse_int(field(line, 3, 3), b) &&
                     parse_int(field(line, 6, 3), type);
        if (!fixed) {
            const auto tok = split_ws(line);
            if (tok.size() < 3 || !parse_int(tok[0], a) || !parse_int(tok[1], b) ||
                !parse_int(tok[2], type)) {
                throw ParseError("malformed bond line", record_no, cur.line_no());
            }
        }
        if (a < 1 || a > natoms || b < 1 || b > natoms) {
            throw ParseError("bond references atom outside the atom block", record_no,
                             cur.line_no());
        }
        Bond bond;
        bond.a = a - 1;
        bond.b = b - 1;
        if (type == 4) {
            bond.order = 1.5;
        } else if (type >= 1 && type <= 3) {
            bond.order = static_cast<double>(type);
        } else {
            throw ParseError("unsupported bond type " + std::to_string(type), record_no,
                             cur.line_no());
        }
        rec.mol.bonds.push_back(bond);
    }

    // Property block: "M  CHG" lines override atom-block charges; the first
    // such line resets every charge per the format's semantics.
    bool chg_seen = false;
    while (!cur.done()) {
        const std::string_view line = cur.take();
        const std::string_view t = trim(line);
        if (t == "$$$$") return rec;
        if (t == "M  END" || t == "M END") break;
        if (line.substr(0, 6) == "M  CHG") {
            const auto tok = split_ws(line.substr(6));
            if (tok.empty()) throw ParseError("malformed M  CHG line", record_no, cur.line_no());
            int count = 0;
            if (!parse_int(tok[0], count) || static_cast<int>(tok.size()) < 1 + 2 * count) {
                throw ParseError("malformed M  CHG line", record_no, cur.line_no());
            }
            if (!chg_seen) {
                for (Atom& atom : rec.mol.atoms) atom.formal_charge = 0;
                chg_seen = true;
            }
            for (int i = 0; i < count; ++i) {
                int idx = 0, q = 0;
                if (!parse_int(tok[1 + 2 * i], idx) || !parse_int(tok[2 + 2 * i], q) ||
                    idx < 1 || idx > natoms) {
                    throw ParseError("malformed M  CHG entry", record_no, cur.line_no());
                }
                rec.mol.atoms[static_cast<std::size_t>(idx - 1)].formal_charge = q;
            }
        }
    }

    // Data items until the record terminator.
    while (!cur.done()) {
        std::string_view line = cur.take();
        std::string_view t = trim(line);
        if (t == "$$$$") break;
        if (!t.empty() && t.front() == '>') {
            const std::size_t lt = t.find('<');
            const std::size_t gt = t.rfind('>');
            if (lt == std::string_view::npos || gt == std::string_view::npos || gt <= lt) {
                throw ParseError("malformed data item header", record_no, cur.line_no());
            }
            const std::string name(t.substr(lt + 1, gt - lt - 1));
            std::string value;
            while (!cur.done()) {
                std::string_view v = cur.lines[cur.pos];
                if (trim(v) == "$$$$" || trim(v).empty()) break;
                if (!value.empty()) value += '\n';
                value += std::string(trim(v));
                ++cur.pos;
            }
            rec.properties[name] = value;
        }
    }
    return rec;
}

}  // namespace

std::vector<SdfRecord> parse_sdf_records(std::string_view text) {
    LineCursor cur{split_lines(text)};
    std::vector<SdfRecord> records;
    long record_no = 1;
    while (!cur.done()) {
        // Skip blank padding between records.
        while (!cur.done() && trim(cur.lines[cur.pos]).empty()) ++cur.pos;
        if (cur.done()) break;
        SdfRecord rec = parse_record(cur, record_no);
        rec.mol.validate();
        records.push_back(std::move(rec));
        ++record_no;
    }
    return records;
}

std::vector<MolecularGraph> parse_structure_file(std::string_view bytes) {
    std::vector<MolecularGraph> mols;
    for (auto& rec : parse_sdf_records(bytes)) {
        mols.push_back(std::move(rec.mol));
    }
    return mols;
}

std::string write_sdf(const std::vector<SdfRecord>& records) {
    std::ostringstream out;
    char buf[128];
    for (const SdfRecord& rec : records) {
        rec.mol.validate();
        out << rec.title << "\n  bfuse\n\n";
        std::snprintf(buf, sizeof(buf), "%3d%3d  0  0  0  0  0  0  0  0999 V2000\n",
                      static_cast<int>(rec.mol.atoms.size()),
                      static_cast<int>(rec.mol.bonds.size()));
        out << buf;
        for (const Atom& a : rec.mol.atoms) {
            std::snprintf(buf, sizeof(buf), "%10.4f%10.4f%10.4f %-3s 0  0  0  0  0  0  0  0  0  0  0  0\n",
                          a.x, a.y, 0.0, a.element.c_str());
            out << buf;
        }
        for (const Bond& b : rec.mol.bonds) {
            const int type = b.order == 1.5 ? 4 : static_cast<int>(b.order);
            std::snprintf(buf, sizeof(buf), "%3d%3d%3d  0\n", b.a + 1, b.b + 1, type);
            out << buf;
        }
        std::vector<std::pair<int, int>> charges;
        for (std::size_t i = 0; i < rec.mol.atoms.size(); ++i) {
            if (rec.mol.atoms[i].formal_charge != 0) {
                charges.emplace_back(static_cast<int>(i) + 1, rec.mol.atoms[i].formal_charge);
            }
        }
        for (std::size_t i = 0; i < charges.size(); i += 8) {
            const std::size_t n = std::min<std::size_t>(8, charges.size() - i);
            out << "M  CHG" << std::string(3 - std::to_string(n).size(), ' ') << n;
            for (std::size_t j = i; j < i + n; ++j) {
                std::snprintf(buf, sizeof(buf), "%4d%4d", charges[j].first, charges[j].second);
                out << buf;
            }
            out << "\n";
        }
        out << "M  END\n";
        for (const auto& [name, value] : rec.properties) {
            out << "> <" << name << ">\n" << value << "\n\n";
        }
        out << "$$$$\n";
    }
    return out.str();
}

}  // namespace bfuse
