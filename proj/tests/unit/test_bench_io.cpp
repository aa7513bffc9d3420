#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nlsp/csv.hpp"
#include "nlsp/experiment.hpp"
#include "nlsp/instance_io.hpp"
#include "nlsp/stats.hpp"
#include "nlsp/svg.hpp"

using namespace nlsp;

TEST(Stats, LowerInterpolationConvention) {
    std::vector<double> v = {5.0, 1.0, 3.0, 2.0, 4.0};
    EXPECT_DOUBLE_EQ(median_lower(v), 3.0);
    EXPECT_DOUBLE_EQ(quantile_lower(v, 0.25), 2.0);
    EXPECT_DOUBLE_EQ(quantile_lower(v, 0.75), 4.0);
    // even-length sample takes the lower middle, no averaging
    std::vector<double> w = {1.0, 2.0, 3.0, 10.0};
    EXPECT_DOUBLE_EQ(median_lower(w), 2.0);
    EXPECT_DOUBLE_EQ(quantile_lower(w, 1.0), 10.0);
    EXPECT_DOUBLE_EQ(quantile_lower(w, 0.0), 1.0);
}

TEST(Stats, MeanAndStdev) {
    std::vector<double> v = {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
    EXPECT_DOUBLE_EQ(mean(v), 5.0);
    EXPECT_NEAR(stdev(v), std::sqrt(32.0 / 7.0), 1e-14);
    EXPECT_THROW(mean({}), ValidationError);
}

TEST(Csv, RoundTripReproducesDoublesExactly) {
    Rng rng(3);
    CsvTable t;
    t.comments = {"round trip check"};
    t.header = {"name", "value", "count"};
    for (int i = 0; i < 50; ++i)
        t.add_row({"row" + std::to_string(i), csv_cell(rng.normal() * std::pow(10.0, rng.uniform(-8, 8))),
                   csv_cell(static_cast<std::size_t>(i))});
    const std::string path = ::testing::TempDir() + "nlsp_csv_roundtrip.csv";
    save_csv(t, path);
    auto back = load_csv(path);
    ASSERT_EQ(back.header, t.header);
    ASSERT_EQ(back.rows.size(), t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        EXPECT_EQ(std::stod(back.rows[r][1]), std::stod(t.rows[r][1]));
        EXPECT_EQ(back.rows[r], t.rows[r]);
    }
    EXPECT_EQ(back.comments.size(), 1u);
}

TEST(Csv, RowWidthValidated) {
    CsvTable t;
    t.header = {"a", "b"};
    EXPECT_THROW(t.add_row({"only one"}), ValidationError);
}

TEST(ManifestText, RoundTrip) {
    Manifest m;
    m.set("family", "diffusion");
    m.set("N", std::size_t{9});
    m.set("jitter", 0.25);
    auto parsed = Manifest::parse(m.to_string());
    EXPECT_EQ(parsed.get("family"), "diffusion");
    EXPECT_EQ(parsed.get_u64("N"), 9u);
    EXPECT_DOUBLE_EQ(parsed.get_double("jitter"), 0.25);
    EXPECT_THROW(parsed.get("missing"), ValidationError);
}

TEST(InstanceIo, SaveLoadRoundTrip) {
    const auto inst = make_instance(PdeFamily::ScreenedPoisson, 5, 0.25, 77);
    const std::string dir = ::testing::TempDir() + "nlsp_instance_roundtrip";
    save_instance(inst, dir);
    const auto back = load_instance(dir);
    EXPECT_EQ(back.family, inst.family);
    EXPECT_EQ(back.seed, inst.seed);
    EXPECT_EQ(back.grid_n, inst.grid_n);
    ASSERT_EQ(back.mesh.vertices.size(), inst.mesh.vertices.size());
    for (std::size_t v = 0; v < inst.mesh.vertices.size(); ++v) {
        EXPECT_EQ(back.mesh.vertices[v].x, inst.mesh.vertices[v].x);
        EXPECT_EQ(back.mesh.vertices[v].y, inst.mesh.vertices[v].y);
        EXPECT_EQ(back.mesh.boundary_mask[v], inst.mesh.boundary_mask[v]);
    }
    ASSERT_EQ(back.matrix.nnz(), inst.matrix.nnz());
    for (std::size_t i = 0; i < inst.matrix.dim(); ++i)
        for (std::size_t k = inst.matrix.row_ptr()[i]; k < inst.matrix.row_ptr()[i + 1]; ++k)
            EXPECT_EQ(back.matrix.values()[k], inst.matrix.values()[k]);
    EXPECT_EQ(back.rhs, inst.rhs);
    EXPECT_EQ(back.coefficients.kappa, inst.coefficients.kappa);
    EXPECT_EQ(back.coefficients.alpha, inst.coefficients.alpha);
}

TEST(SmoothedSetIo, RoundTripWithSidecar) {
    const auto inst = make_instance(PdeFamily::Diffusion, 4, 0.25, 5);
    auto sv = generate_smoothed_vectors(inst.matrix, inst.mesh.boundary_mask, 6, 7, 0.66, 11);
    const std::string base = ::testing::TempDir() + "nlsp_smoothed_roundtrip";
    save_smoothed_set(sv, base);
    auto back = load_smoothed_set(base);
    EXPECT_EQ(back.sweeps_applied, sv.sweeps_applied);
    EXPECT_EQ(back.omega, sv.omega);
    EXPECT_EQ(back.source_seed, sv.source_seed);
    for (std::size_t i = 0; i < sv.s.rows(); ++i)
        for (std::size_t j = 0; j < sv.s.cols(); ++j) EXPECT_EQ(back.s(i, j), sv.s(i, j));
}

TEST(Config, FileParseOverridesAndValidation) {
    const std::string path = ::testing::TempDir() + "nlsp_config_test.txt";
    {
        std::ofstream out(path);
        out << "# comment line\n";
        out << "family = anisotropic\n";
        out << "N = 7\n";
        out << "K = 12\n";
        out << "ranks = 2,4,8\n";
        out << "methods = NLSS,SVD\n";
    }
    auto cfg = load_config_file(path);
    EXPECT_EQ(cfg.family, PdeFamily::Anisotropic);
    EXPECT_EQ(cfg.grid_n, 7u);
    EXPECT_EQ(cfg.k_vectors, 12u);
    ASSERT_EQ(cfg.methods.size(), 2u);
    apply_overrides(cfg, {"N=9", "jitter=0.1"});
    EXPECT_EQ(cfg.grid_n, 9u);
    EXPECT_DOUBLE_EQ(cfg.jitter, 0.1);
    cfg.validate();

    cfg.ranks = {40}; // above K
    EXPECT_THROW(cfg.validate(), ValidationError);
    EXPECT_THROW(apply_overrides(cfg, {"nonsense=1"}), ValidationError);
    EXPECT_THROW(apply_overrides(cfg, {"no_equals_sign"}), ValidationError);
}

TEST(Config, DuplicateKeyInFileRejected) {
    const std::string path = ::testing::TempDir() + "nlsp_config_dup.txt";
    {
        std::ofstream out(path);
        out << "family = diffusion\n";
        out << "family = anisotropic\n";
    }
    EXPECT_THROW(load_config_file(path), ValidationError);
}

TEST(Config, SeedRangesDisjoint) {
    ExperimentConfig cfg;
    cfg.train_count = 10;
    cfg.test_count = 10;
    std::set<std::uint64_t> seeds;
    for (std::size_t i = 0; i < cfg.train_count; ++i) seeds.insert(cfg.train_seed(i));
    for (std::size_t i = 0; i < cfg.test_count; ++i) seeds.insert(cfg.test_seed(i));
    EXPECT_EQ(seeds.size(), 20u);
}

TEST(Svg, WritesWellFormedPlot) {
    SvgLinePlot plot("demo", "x", "y");
    SvgSeries s;
    s.label = "series";
    s.color = "#d62728";
    s.x = {1.0, 2.0, 3.0};
    s.y = {0.5, 0.2, 0.1};
    s.y_low = {0.4, 0.15, 0.05};
    s.y_high = {0.6, 0.3, 0.2};
    plot.add_series(s);
    const std::string path = ::testing::TempDir() + "nlsp_plot.svg";
    plot.save(path);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    EXPECT_NE(text.find("<svg"), std::string::npos);
    EXPECT_NE(text.find("</svg>"), std::string::npos);
    EXPECT_NE(text.find("polyline"), std::string::npos);
    EXPECT_NE(text.find("series"), std::string::npos);
}
