#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nlsp/errors.hpp"
#include "nlsp/fem.hpp"
#include "nlsp/instance_io.hpp"

namespace nlsp {

inline constexpr const char* kToolVersion = "nlsp 0.1.0";

enum class Method { Nlss, Subspace, Svd, Sa };

inline std::string method_name(Method m) {
    switch (m) {
        case Method::Nlss: return "NLSS";
        case Method::Subspace: return "Subspace";
        case Method::Svd: return "SVD";
        case Method::Sa: return "SA";
    }
    return "unknown";
}

inline Method method_from_name(const std::string& s) {
    if (s == "NLSS") return Method::Nlss;
    if (s == "Subspace") return Method::Subspace;
    if (s == "SVD") return Method::Svd;
    if (s == "SA") return Method::Sa;
    throw ValidationError("unknown method: " + s + " (expected NLSS, Subspace, SVD or SA)");
}

// Resolved run settings. File format is "key = value" lines; CLI flags
// override file values and a duplicated key inside one file is a validation
// error.
struct ExperimentConfig {
    PdeFamily family = PdeFamily::Diffusion;
    std::size_t grid_n = 9;
    std::size_t k_vectors = 32;
    std::size_t smoothing_sweeps = 10;
    double jitter = 0.25;
    std::vector<std::size_t> ranks = {4, 8, 16, 24, 32};
    std::size_t train_count = 50;
    std::size_t test_count = 20;
    std::uint64_t seed = 1;
    std::vector<Method> methods = {Method::Nlss, Method::Subspace, Method::Svd, Method::Sa};
    double delta = 1e-6;
    std::size_t nu1 = 5;
    std::size_t nu2 = 5;
    double omega = 0.66;
    std::size_t epochs = 1000;
    double learning_rate = 1e-3;
    std::size_t train_rank = 0; // 0 = full rank K
    bool permutation_augmentation = true;
    std::vector<std::size_t> hidden; // empty = size-dependent default
    double sa_theta = 0.25;
    std::size_t max_iters_factor = 10; // max_iters = factor * n
    double load_constant = 1.0;
    double anisotropy_strength = 1e5;
    std::vector<std::size_t> ablate_grid = {8, 16, 24};
    std::size_t ablate_instances = 10;
    std::size_t ablate_train = 12;
    std::size_t ablate_epochs = 150;
    std::string out_dir = "runs/default";

    FemOptions fem_options() const { return {load_constant, anisotropy_strength}; }

    std::uint64_t train_seed(std::size_t index) const { return mix_seed(seed, index); }
    std::uint64_t test_seed(std::size_t index) const { return mix_seed(seed, train_count + index); }
    // smoothed vectors draw from a stream disjoint from mesh/coefficient tags
    static std::uint64_t smoothing_seed(std::uint64_t instance_seed) {
        return mix_seed(instance_seed, 3);
    }

    bool wants(Method m) const {
        return std::find(methods.begin(), methods.end(), m) != methods.end();
    }

    void validate() const {
        if (grid_n < 2) throw ValidationError("config: N must be at least 2");
        if (jitter < 0.0 || jitter >= 0.5) throw ValidationError("config: jitter outside [0, 0.5)");
        if (k_vectors < 1) throw ValidationError("config: K must be positive");
        if (ranks.empty()) throw ValidationError("config: ranks list empty");
        for (std::size_t r : ranks)
            if (r == 0 || r > k_vectors)
                throw ValidationError("config: every rank must lie in [1, K]");
        if (train_rank > k_vectors) throw ValidationError("config: train rank exceeds K");
        if (learning_rate <= 0.0) throw ValidationError("config: learning rate must be positive");
        if (delta <= 0.0) throw ValidationError("config: delta must be positive");
        if (omega < 0.0 || omega > 1.0) throw ValidationError("config: omega outside [0, 1]");
        if (methods.empty()) throw ValidationError("config: methods list empty");
        if (train_count == 0 || test_count == 0)
            throw ValidationError("config: train and test counts must be positive");
        if (ablate_instances < 2) throw ValidationError("config: ablate instances must be >= 2");
        for (std::size_t n : ablate_grid)
            if (n < 2 || n % 2 != 0)
                throw ValidationError("config: ablate N values must be even and >= 2 (r = K/2)");
    }

    Manifest to_manifest() const {
        Manifest m;
        m.set("version", std::string(kToolVersion));
        m.set("family", family_name(family));
        m.set("N", grid_n);
        m.set("K", k_vectors);
        m.set("s1", smoothing_sweeps);
        m.set("jitter", jitter);
        m.set("ranks", join_sizes(ranks));
        m.set("train", train_count);
        m.set("test", test_count);
        m.set("seed", seed);
        m.set("methods", join_methods(methods));
        m.set("delta", delta);
        m.set("nu1", nu1);
        m.set("nu2", nu2);
        m.set("omega", omega);
        m.set("epochs", epochs);
        m.set("lr", learning_rate);
        m.set("train_rank", train_rank == 0 ? k_vectors : train_rank);
        m.set("permute", std::string(permutation_augmentation ? "true" : "false"));
        if (!hidden.empty()) m.set("hidden", join_sizes(hidden));
        m.set("sa_theta", sa_theta);
        m.set("max_iters_factor", max_iters_factor);
        m.set("f", load_constant);
        m.set("anisotropy_strength", anisotropy_strength);
        m.set("ablate_N", join_sizes(ablate_grid));
        m.set("ablate_instances", ablate_instances);
        m.set("ablate_train", ablate_train);
        m.set("ablate_epochs", ablate_epochs);
        m.set("out", out_dir);
        return m;
    }

    static std::string join_sizes(const std::vector<std::size_t>& v) {
        std::ostringstream out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out << ',';
            out << v[i];
        }
        return out.str();
    }

    static std::string join_methods(const std::vector<Method>& v) {
        std::ostringstream out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out << ',';
            out << method_name(v[i]);
        }
        return out.str();
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(ch))) {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline std::vector<std::size_t> parse_sizes(const std::string& s) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(s)) out.push_back(std::stoull(item));
    return out;
}

} // namespace detail

inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
    if (key == "family") cfg.family = family_from_name(value);
    else if (key == "N") cfg.grid_n = std::stoull(value);
    else if (key == "K") cfg.k_vectors = std::stoull(value);
    else if (key == "s1") cfg.smoothing_sweeps = std::stoull(value);
    else if (key == "jitter") cfg.jitter = std::stod(value);
    else if (key == "ranks") cfg.ranks = detail::parse_sizes(value);
    else if (key == "train") cfg.train_count = std::stoull(value);
    else if (key == "test") cfg.test_count = std::stoull(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "methods") {
        cfg.methods.clear();
        for (const auto& m : detail::split_list(value)) cfg.methods.push_back(method_from_name(m));
    } else if (key == "delta") cfg.delta = std::stod(value);
    else if (key == "nu1") cfg.nu1 = std::stoull(value);
    else if (key == "nu2") cfg.nu2 = std::stoull(value);
    else if (key == "omega") cfg.omega = std::stod(value);
    else if (key == "epochs") cfg.epochs = std::stoull(value);
    else if (key == "lr") cfg.learning_rate = std::stod(value);
    else if (key == "train_rank") cfg.train_rank = std::stoull(value);
    else if (key == "permute") cfg.permutation_augmentation = (value == "true" || value == "1");
    else if (key == "hidden") cfg.hidden = detail::parse_sizes(value);
    else if (key == "sa_theta") cfg.sa_theta = std::stod(value);
    else if (key == "max_iters_factor") cfg.max_iters_factor = std::stoull(value);
    else if (key == "f") cfg.load_constant = std::stod(value);
    else if (key == "anisotropy_strength") cfg.anisotropy_strength = std::stod(value);
    else if (key == "ablate_N") cfg.ablate_grid = detail::parse_sizes(value);
    else if (key == "ablate_instances") cfg.ablate_instances = std::stoull(value);
    else if (key == "ablate_train") cfg.ablate_train = std::stoull(value);
    else if (key == "ablate_epochs") cfg.ablate_epochs = std::stoull(value);
    else if (key == "out") cfg.out_dir = value;
    else if (key == "version") { /* informational in replayed manifests */ }
    else throw ValidationError("config: unknown key " + key);
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path);
    ExperimentConfig cfg;
    std::vector<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError("config: bad line: " + line);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw ValidationError("config: key " + key + " given twice in " + path);
        seen.push_back(key);
        apply_config_entry(cfg, key, value);
    }
    return cfg;
}

// "key=value" strings from the command line, applied after the file
inline void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& overrides) {
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ValidationError("override must look like key=value: " + item);
        apply_config_entry(cfg, item.substr(0, eq), item.substr(eq + 1));
    }
}

} // namespace nlsp
