#include "gradvi/field_io.hpp"

#include "gradvi/error.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace gradvi {

namespace {

void append_number(std::string& out, double v) {
    if (std::isnan(v)) {
        out += "nan";
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

std::map<std::string, std::string> header_fields(const std::string& line) {
    if (line.rfind("# ", 0) != 0) throw Error("field csv: missing header line");
    std::map<std::string, std::string> out;
    std::istringstream in(line.substr(2));
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw Error("field csv: malformed header token '" + token + "'");
        out[token.substr(0, eq)] = token.substr(eq + 1);
    }
    for (const char* key : {"shape", "h", "nx", "ny", "components"}) {
        if (!out.count(key)) throw Error(std::string("field csv: header lacks '") + key + "'");
    }
    return out;
}

std::size_t parse_count(const std::string& s, const char* what) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') throw Error(std::string("field csv: bad ") + what + " '" + s + "'");
    return static_cast<std::size_t>(v);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("field csv: cannot write '" + path + "'");
    out << text;
    if (!out) throw Error("field csv: write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("field csv: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string field_to_csv(const VectorField& f) {
    if (!f.grid) throw Error("field csv: field without grid");
    const auto& g = *f.grid;
    std::string out = "# shape=" + g.shape().descriptor() + " h=";
    append_number(out, g.h());
    out += " nx=" + std::to_string(g.nx()) + " ny=" + std::to_string(g.ny()) +
           " components=" + std::to_string(f.size()) + "\n";
    for (std::size_t l = 0; l < f.size(); ++l) {
        if (f.components[l].size() != g.node_count()) throw Error("field csv: component size mismatch");
        out += "# component=" + std::to_string(l) + "\n";
        for (std::size_t y = 0; y < g.ny(); ++y) {
            for (std::size_t x = 0; x < g.nx(); ++x) {
                if (x > 0) out += ',';
                append_number(out, f.components[l][g.index(x, y)]);
            }
            out += '\n';
        }
    }
    return out;
}

VectorField field_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error("field csv: empty input");
    const auto hdr = header_fields(line);
    const char* hs = hdr.at("h").c_str();
    char* end = nullptr;
    const double h = std::strtod(hs, &end);
    if (end == hs || *end != '\0') throw Error("field csv: bad spacing '" + hdr.at("h") + "'");
    const auto grid = build_grid(DomainShape::from_descriptor(hdr.at("shape")), h);
    const std::size_t nx = parse_count(hdr.at("nx"), "nx"), ny = parse_count(hdr.at("ny"), "ny");
    if (nx != grid->nx() || ny != grid->ny()) throw Error("field csv: lattice size does not match the shape");
    const std::size_t ncomp = parse_count(hdr.at("components"), "components");
    VectorField f{grid, std::vector<std::vector<double>>(ncomp, std::vector<double>(grid->node_count()))};
    for (std::size_t l = 0; l < ncomp; ++l) {
        if (!std::getline(in, line) || line != "# component=" + std::to_string(l)) {
            throw Error("field csv: expected '# component=" + std::to_string(l) + "'");
        }
        for (std::size_t y = 0; y < ny; ++y) {
            if (!std::getline(in, line)) throw Error("field csv: too few rows");
            std::size_t x = 0, start = 0;
            while (start <= line.size()) {
                const auto comma = line.find(',', start);
                const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
                if (x >= nx) throw Error("field csv: too many columns in row " + std::to_string(y));
                const char* cs = cell.c_str();
                char* ce = nullptr;
                const double v = std::strtod(cs, &ce);
                if (ce == cs || *ce != '\0') throw Error("field csv: bad value '" + cell + "'");
                f.components[l][grid->index(x, y)] = v;
                ++x;
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            if (x != nx) throw Error("field csv: too few columns in row " + std::to_string(y));
        }
    }
    if (std::getline(in, line) && !line.empty()) throw Error("field csv: trailing data");
    return f;
}

void export_field(const ScalarField& f, const std::string& path) {
    write_text(path, field_to_csv(VectorField{f.grid, {f.values}}));
}

void export_field(const VectorField& f, const std::string& path) { write_text(path, field_to_csv(f)); }

ScalarField import_scalar_field(const std::string& path) {
    auto v = field_from_csv(read_text(path));
    if (v.size() != 1) throw Error("field csv: expected one component in '" + path + "'");
    return ScalarField{v.grid, std::move(v.components.front())};
}

VectorField import_vector_field(const std::string& path) { return field_from_csv(read_text(path)); }

}  // namespace gradvi
