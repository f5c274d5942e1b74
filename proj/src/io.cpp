#include "capax/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace capax {

namespace {

using ordered_json = nlohmann::ordered_json;

Grid header_grid(int dim, double h, int sx, int sy, double ox, double oy) {
    if (dim != 1 && dim != 2) throw io_error("field file: dim must be 1 or 2");
    if (!(h > 0.0)) throw io_error("field file: h must be positive");
    if (sx <= 0 || sy <= 0 || (dim == 1 && sy != 1))
        throw io_error("field file: bad shape");
    Grid g;
    g.dim = dim;
    g.h = h;
    g.shape = {sx, sy};
    g.origin = {ox, oy};
    return g;
}

void write_any(const std::string& path, const Field& f) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    if (infer_format(path) == FileFormat::json) {
        ordered_json j;
        j["dim"] = f.grid.dim;
        j["h"] = f.grid.h;
        j["shape"] = {f.grid.shape[0], f.grid.shape[1]};
        j["origin"] = {f.grid.origin[0], f.grid.origin[1]};
        j["values"] = f.values;
        out << j.dump(2) << "\n";
    } else {
        out << std::setprecision(17);
        out << f.grid.dim << " " << f.grid.h << " " << f.grid.shape[0] << " "
            << f.grid.shape[1] << " " << f.grid.origin[0] << " "
            << f.grid.origin[1] << "\n";
        for (std::size_t i = 0; i < f.values.size(); ++i)
            out << f.values[i] << "\n";
    }
    if (!out) throw io_error("failed writing " + path);
}

Field read_any(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    Field f;
    if (infer_format(path) == FileFormat::json) {
        ordered_json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw io_error(path + ": " + e.what());
        }
        try {
            f.grid = header_grid(j.at("dim").get<int>(), j.at("h").get<double>(),
                                 j.at("shape").at(0).get<int>(),
                                 j.at("shape").at(1).get<int>(),
                                 j.at("origin").at(0).get<double>(),
                                 j.at("origin").at(1).get<double>());
            f.values = j.at("values").get<std::vector<double>>();
        } catch (const ordered_json::exception& e) {
            throw io_error(path + ": " + e.what());
        }
    } else {
        int dim = 0, sx = 0, sy = 0;
        double h = 0.0, ox = 0.0, oy = 0.0;
        if (!(in >> dim >> h >> sx >> sy >> ox >> oy))
            throw io_error(path + ": bad header line");
        f.grid = header_grid(dim, h, sx, sy, ox, oy);
        f.values.reserve(f.grid.cell_count());
        double v = 0.0;
        while (in >> v) f.values.push_back(v);
    }
    if (f.values.size() != f.grid.cell_count())
        throw io_error(path + ": value count does not match the grid shape");
    return f;
}

}  // namespace

FileFormat infer_format(const std::string& path) {
    const auto dot = path.rfind('.');
    if (dot != std::string::npos && path.substr(dot) == ".json")
        return FileFormat::json;
    return FileFormat::text;
}

void write_field(const std::string& path, const Field& f) { write_any(path, f); }

Field read_field(const std::string& path) { return read_any(path); }

void write_measure(const std::string& path, const DiscreteMeasure& mu) {
    Field carrier;
    carrier.grid = mu.grid;
    carrier.values = mu.masses;
    write_any(path, carrier);
}

DiscreteMeasure read_measure(const std::string& path) {
    const Field carrier = read_any(path);
    DiscreteMeasure mu;
    mu.grid = carrier.grid;
    mu.masses = carrier.values;
    for (double m : mu.masses)
        if (!(m >= 0.0)) throw io_error(path + ": measure masses must be >= 0");
    return mu;
}

}  // namespace capax
