#include "eigenshape/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace eigenshape {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

}  // namespace

void write_mask_pgm(const DomainMask& mask, const std::string& path) {
    const GridSpec& g = mask.grid();
    if (g.dim != 2) throw std::invalid_argument("write_mask_pgm: PGM rasters are 2-D only");
    std::ofstream out = open_out(path);
    out << "P2\n";
    out << "# h=" << format_double(g.h) << " origin=" << format_double(g.origin[0]) << " "
        << format_double(g.origin[1]) << "\n";
    out << g.cells[0] << " " << g.cells[1] << "\n1\n";
    for (int j = g.cells[1] - 1; j >= 0; --j) {
        for (int i = 0; i < g.cells[0]; ++i) {
            out << (mask.test(g.index_of(i, j)) ? 1 : 0);
            out << (i + 1 == g.cells[0] ? '\n' : ' ');
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

// Tokenizer for plain PGM that captures the grid placement comment.
struct PgmHeader {
    int nx = 0, ny = 0, maxval = 0;
    double h = 1.0;
    double ox = 0.0, oy = 0.0;
    bool have_sidecar = false;
};

std::string next_token(std::istream& in, PgmHeader& hdr) {
    std::string tok;
    while (in >> tok) {
        if (tok[0] != '#') return tok;
        std::string rest;
        std::getline(in, rest);
        std::string line = tok + rest;
        const auto hpos = line.find("h=");
        const auto opos = line.find("origin=");
        if (hpos != std::string::npos && opos != std::string::npos) {
            hdr.h = std::stod(line.substr(hpos + 2));
            std::istringstream os(line.substr(opos + 7));
            os >> hdr.ox >> hdr.oy;
            hdr.have_sidecar = true;
        }
    }
    throw std::runtime_error("unexpected end of PGM stream");
}

}  // namespace

DomainMask read_mask_pgm(const std::string& path) {
    std::ifstream in = open_in(path);
    PgmHeader hdr;
    std::string magic = next_token(in, hdr);
    if (magic != "P2") throw std::runtime_error("read_mask_pgm: not a plain PGM (P2): " + path);
    hdr.nx = std::stoi(next_token(in, hdr));
    hdr.ny = std::stoi(next_token(in, hdr));
    hdr.maxval = std::stoi(next_token(in, hdr));
    if (hdr.maxval != 1)
        throw std::runtime_error("read_mask_pgm: mask PGM must have maxval 1: " + path);
    GridSpec g(2, {hdr.nx, hdr.ny, 1}, {hdr.ox, hdr.oy, 0.0}, hdr.h);
    DomainMask mask(g);
    for (int j = g.cells[1] - 1; j >= 0; --j)
        for (int i = 0; i < g.cells[0]; ++i) {
            const int v = std::stoi(next_token(in, hdr));
            if (v != 0) mask.set(g.index_of(i, j), true);
        }
    return mask;
}

void write_field_pgm(const ScalarField& field, const std::string& path) {
    const GridSpec& g = field.grid;
    if (g.dim != 2) throw std::invalid_argument("write_field_pgm: PGM rasters are 2-D only");
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) {
        const double v = field[idx];
        if (first) {
            lo = hi = v;
            first = false;
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    std::ofstream out = open_out(path);
    out << "P2\n";
    out << "# h=" << format_double(g.h) << " origin=" << format_double(g.origin[0]) << " "
        << format_double(g.origin[1]) << " min=" << format_double(lo)
        << " max=" << format_double(hi) << "\n";
    out << g.cells[0] << " " << g.cells[1] << "\n65535\n";
    for (int j = g.cells[1] - 1; j >= 0; --j) {
        for (int i = 0; i < g.cells[0]; ++i) {
            const double v = field[g.index_of(i, j)];
            out << long(std::lround((v - lo) / span * 65535.0));
            out << (i + 1 == g.cells[0] ? '\n' : ' ');
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_field_csv(const ScalarField& field, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "cell_index,value\n";
    for (std::int64_t idx = 0; idx < field.grid.total_cells(); ++idx)
        if (field.support.test(idx)) out << idx << "," << format_double(field[idx]) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

ScalarField read_field_csv(const std::string& path, const DomainMask& support) {
    std::ifstream in = open_in(path);
    ScalarField f(support);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("read_field_csv: malformed row in " + path);
        const std::int64_t idx = std::stoll(line.substr(0, comma));
        if (idx < 0 || idx >= support.grid().total_cells())
            throw std::runtime_error("read_field_csv: cell index out of range in " + path);
        f[idx] = std::stod(line.substr(comma + 1));
    }
    return f;
}

void write_eigen_csv(const EigenResult& result, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "index,eigenvalue,residual\n";
    for (int j = 0; j < result.k; ++j)
        out << (j + 1) << "," << format_double(result.eigenvalues[static_cast<std::size_t>(j)])
            << "," << format_double(result.residuals[static_cast<std::size_t>(j)]) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_trace_csv(const OptimizationTrace& trace, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "iteration,objective,measure,flips,residual\n";
    for (const auto& e : trace.entries)
        out << e.iteration << "," << format_double(e.objective) << "," << format_double(e.measure)
            << "," << e.flips << "," << format_double(e.residual) << "\n";
    out << "# status="
        << (trace.status == OptimizeStatus::converged ? "converged" : "budget_exhausted")
        << " best_iteration=" << trace.best_iteration << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace eigenshape
