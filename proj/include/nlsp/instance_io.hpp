#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <type_traits>
#include <sstream>
#include <string>
#include <vector>

#include "nlsp/csv.hpp"
#include "nlsp/errors.hpp"
#include "nlsp/fem.hpp"
#include "nlsp/smoothing.hpp"

namespace nlsp {

// Ordered key-value text, one "key = value" per line. Used for instance and
// run manifests and checkpoint sidecars.
class Manifest {
public:
    void set(const std::string& key, const std::string& value) {
        for (auto& [k, v] : entries_)
            if (k == key) {
                v = value;
                return;
            }
        entries_.emplace_back(key, value);
    }
    void set(const std::string& key, double value) { set(key, format_double(value)); }
    template <class Int>
        requires std::is_integral_v<Int>
    void set(const std::string& key, Int value) {
        set(key, std::to_string(value));
    }

    bool has(const std::string& key) const {
        for (const auto& [k, v] : entries_)
            if (k == key) return true;
        return false;
    }

    const std::string& get(const std::string& key) const {
        for (const auto& [k, v] : entries_)
            if (k == key) return v;
        throw ValidationError("manifest: missing key " + key);
    }

    double get_double(const std::string& key) const { return std::stod(get(key)); }
    std::uint64_t get_u64(const std::string& key) const { return std::stoull(get(key)); }

    std::string to_string() const {
        std::ostringstream out;
        for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
        return out.str();
    }

    static Manifest parse(const std::string& text) {
        Manifest m;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ValidationError("manifest: bad line: " + line);
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t");
                const auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            m.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        return m;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot open for write: " + path);
        out << to_string();
    }

    static Manifest load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open for read: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// --- instance directory -----------------------------------------------------
// vertices.csv, triangles.csv, matrix.mtx, rhs.csv, coefficients.csv,
// manifest.txt

inline void save_instance(const PdeInstance& inst, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    CsvTable vertices;
    vertices.header = {"x", "y", "boundary"};
    for (std::size_t v = 0; v < inst.mesh.vertices.size(); ++v)
        vertices.add_row({csv_cell(inst.mesh.vertices[v].x), csv_cell(inst.mesh.vertices[v].y),
                          csv_cell(static_cast<bool>(inst.mesh.boundary_mask[v]))});
    save_csv(vertices, dir + "/vertices.csv");

    CsvTable triangles;
    triangles.header = {"v0", "v1", "v2"};
    for (const auto& t : inst.mesh.triangles)
        triangles.add_row({csv_cell(t.v[0]), csv_cell(t.v[1]), csv_cell(t.v[2])});
    save_csv(triangles, dir + "/triangles.csv");

    save_matrix_market(inst.matrix, dir + "/matrix.mtx");

    CsvTable rhs;
    rhs.header = {"f"};
    for (double v : inst.rhs) rhs.add_row({csv_cell(v)});
    save_csv(rhs, dir + "/rhs.csv");

    CsvTable coeff;
    switch (inst.family) {
        case PdeFamily::Diffusion:
            coeff.header = {"g"};
            for (double v : inst.coefficients.g) coeff.add_row({csv_cell(v)});
            break;
        case PdeFamily::Anisotropic:
            coeff.header = {"k11", "k12", "k22"};
            for (const auto& t : inst.coefficients.tensor)
                coeff.add_row({csv_cell(t.k11), csv_cell(t.k12), csv_cell(t.k22)});
            break;
        case PdeFamily::ScreenedPoisson:
            coeff.header = {"kappa"};
            for (double v : inst.coefficients.kappa) coeff.add_row({csv_cell(v)});
            break;
    }
    save_csv(coeff, dir + "/coefficients.csv");

    Manifest m;
    m.set("family", family_name(inst.family));
    m.set("N", inst.grid_n);
    m.set("seed", inst.seed);
    m.set("jitter", inst.jitter);
    m.set("n", inst.mesh.vertices.size());
    m.set("triangles", inst.mesh.triangles.size());
    if (inst.family == PdeFamily::ScreenedPoisson) m.set("alpha", inst.coefficients.alpha);
    m.save(dir + "/manifest.txt");
}

inline PdeInstance load_instance(const std::string& dir) {
    PdeInstance inst;
    const auto m = Manifest::load(dir + "/manifest.txt");
    inst.family = family_from_name(m.get("family"));
    inst.grid_n = m.get_u64("N");
    inst.seed = m.get_u64("seed");
    inst.jitter = m.get_double("jitter");

    const auto vertices = load_csv(dir + "/vertices.csv");
    for (std::size_t r = 0; r < vertices.rows.size(); ++r) {
        inst.mesh.vertices.push_back({vertices.number(r, "x"), vertices.number(r, "y")});
        inst.mesh.boundary_mask.push_back(vertices.number(r, "boundary") != 0.0);
    }
    const auto triangles = load_csv(dir + "/triangles.csv");
    for (std::size_t r = 0; r < triangles.rows.size(); ++r)
        inst.mesh.triangles.push_back({{static_cast<std::size_t>(triangles.number(r, "v0")),
                                        static_cast<std::size_t>(triangles.number(r, "v1")),
                                        static_cast<std::size_t>(triangles.number(r, "v2"))}});

    inst.matrix = load_matrix_market(dir + "/matrix.mtx");
    inst.rhs = load_csv(dir + "/rhs.csv").numbers("f");

    const auto coeff = load_csv(dir + "/coefficients.csv");
    switch (inst.family) {
        case PdeFamily::Diffusion:
            inst.coefficients.g = coeff.numbers("g");
            break;
        case PdeFamily::Anisotropic:
            for (std::size_t r = 0; r < coeff.rows.size(); ++r)
                inst.coefficients.tensor.push_back({coeff.number(r, "k11"),
                                                    coeff.number(r, "k12"),
                                                    coeff.number(r, "k22")});
            break;
        case PdeFamily::ScreenedPoisson:
            inst.coefficients.kappa = coeff.numbers("kappa");
            inst.coefficients.alpha = m.get_double("alpha");
            break;
    }
    inst.coefficients.family = inst.family;
    return inst;
}

// Smoothed vector sets ship as the dense binary with a sidecar manifest.
inline void save_smoothed_set(const SmoothedVectorSet& sv, const std::string& path_base) {
    save_dense_binary(sv.s, path_base + ".bin");
    Manifest m;
    m.set("K", sv.s.cols());
    m.set("s1", sv.sweeps_applied);
    m.set("omega", sv.omega);
    m.set("seed", sv.source_seed);
    m.save(path_base + ".manifest.txt");
}

inline SmoothedVectorSet load_smoothed_set(const std::string& path_base) {
    SmoothedVectorSet sv;
    sv.s = load_dense_binary(path_base + ".bin");
    const auto m = Manifest::load(path_base + ".manifest.txt");
    sv.sweeps_applied = m.get_u64("s1");
    sv.omega = m.get_double("omega");
    sv.source_seed = m.get_u64("seed");
    return sv;
}

// FNV-1a over a file's bytes; corpus digests go into checkpoints
inline std::uint64_t fnv1a_file(const std::string& path, std::uint64_t h = 14695981039346656037ULL) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for read: " + path);
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (!in) break;
    }
    return h;
}

} // namespace nlsp
