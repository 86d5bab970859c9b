#include <sstream>
#include <doctest.h>

#include <filesystem>

#include "nvmap/config.hpp"
#include "nvmap/errors.hpp"
#include "nvmap/io.hpp"
#include "nvmap/reference.hpp"
#include "test_util.hpp"

using namespace nvmap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nvmap_test_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

FidTrace sample_trace(double t_beta) {
    ExperimentConfig c;
    c.t_beta = t_beta;
    std::vector<SpinParams> s{{kTwoPi * 2e3, kTwoPi * 20e3, 0.3}};
    return fid(s, GlobalParams{0.6, 0.01, 1e-6}, c);
}

}  // namespace

TEST_CASE("reference tables round-trip byte for byte") {
    for (const char* name : {"nv1_positions.csv", "nv2_positions.csv"}) {
        const std::string text = read_text_file(data_path(name));
        CHECK(format_reference_table(parse_reference_table(text)) == text);
    }
    CHECK(table_nv1().rows.size() == 20);
    CHECK(table_nv2().rows.size() == 29);
    CHECK_THROWS_AS(parse_reference_table("index,a\n1,2\n"), DataError);
    CHECK_THROWS_AS(load_reference_table("/nonexistent/table.csv"), DataError);
}

TEST_CASE("reference measurement sets") {
    const auto nv1 = reference_nv1(), nv2 = reference_nv2();
    REQUIRE(nv1.experiments.size() == 4);
    const double tb1[] = {0.930e-6, 1.860e-6, 2.790e-6, 3.720e-6};
    for (int i = 0; i < 4; ++i) CHECK(nv1.experiments[i].t_beta == approx(tb1[i]));
    CHECK(nv2.experiments[3].t_beta == approx(5.932e-6));
    CHECK(nv1.globals.p0 == 0.66);
    CHECK(nv2.globals.t2n_star == approx(8.4e-3));
    CHECK(nv1.repetitions() == approx(2.5 * 3600 / (36e-3 + 800 * 8e-6)).epsilon(1e-9));
}

TEST_CASE("FID files round-trip") {
    const FidTrace t = sample_trace(1.5e-6);
    const std::string text = format_fid_trace(t);
    const FidTrace back = parse_fid_trace(text);
    CHECK(back.samples == t.samples);
    CHECK(back.config.t_beta == t.config.t_beta);
    CHECK(back.config.b0 == t.config.b0);
    const std::string again = format_fid_trace(back);
    CHECK(format_fid_trace(parse_fid_trace(again)) == again);

    std::string bad = text;
    bad.erase(bad.rfind('\n', bad.size() - 2));
    CHECK_THROWS_AS(parse_fid_trace(bad), DataError);
    CHECK_THROWS_AS(parse_fid_trace("k_samples = 2\n\n1\nx\n"), DataError);
}

TEST_CASE("bundle directories load in file-name order") {
    const fs::path dir = scratch("bundle");
    write_text_file(dir / "b.fid", format_fid_trace(sample_trace(2e-6)));
    write_text_file(dir / "a.fid", format_fid_trace(sample_trace(1e-6)));
    write_text_file(dir / "notes.txt", "ignored");
    const DatasetBundle b = load_bundle_dir(dir);
    REQUIRE(b.datasets.size() == 2);
    CHECK(b.datasets[0].config.t_beta == 1e-6);
    CHECK_THROWS_AS(load_bundle_dir(dir / "missing"), DataError);
    CHECK_THROWS_AS(load_bundle_dir(scratch("empty")), DataError);
    // inconsistent headers
    ExperimentConfig other;
    other.k_samples = 400;
    write_text_file(dir / "c.fid", format_fid_trace(fid({}, GlobalParams{}, other)));
    CHECK_THROWS_AS(load_bundle_dir(dir), DataError);
}

TEST_CASE("model files round-trip") {
    FitResult f;
    f.model.spins = {{kTwoPi * 1.23456789e3, kTwoPi * 3.3e4, -0.5}, {1.0, 2.0, 3.0}};
    f.model.globals = {0.71, 0.0123, 1.5e-6};
    f.n = 2;
    const std::string text = format_model(f);
    const ClusterModel m = parse_model(text);
    CHECK(encode_model(m) == encode_model(f.model));
    f.model.globals.t2n_star = std::numeric_limits<double>::infinity();
    CHECK(std::isinf(parse_model(format_model(f)).globals.t2n_star));
    CHECK_THROWS_AS(parse_model("n = 1\n"), DataError);
}

TEST_CASE("csv emitters") {
    const auto spec = fid_to_spectrum(sample_trace(1e-6));
    const std::string s = format_spectrum_csv(spec);
    CHECK(s.rfind("freq_hz,re,im,psd\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 401);
    const std::string p = format_positions_csv({{khz_to_rad(-8.14), khz_to_rad(36.40), deg_to_rad(137.2)}});
    std::vector<std::string> cells;
    std::istringstream row(p.substr(p.find('\n') + 1));
    for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 6);
    CHECK(std::abs(std::stod(cells[3]) - 0.89) < 0.01);
}

TEST_CASE("digests are stable") {
    const fs::path dir = scratch("digest");
    write_text_file(dir / "x.txt", "hello\n");
    write_text_file(dir / "y.txt", "hello\n");
    CHECK(file_digest(dir / "x.txt") == file_digest(dir / "y.txt"));
    CHECK(file_digest(dir / "x.txt").size() == 16);
    write_text_file(dir / "y.txt", "hello!\n");
    CHECK(file_digest(dir / "x.txt") != file_digest(dir / "y.txt"));
}

TEST_CASE("config parsing") {
    const auto c = ConfigFile::parse("# c\n[a]\nx = 1.5\nflag = yes\nlist = 1, 2,3\n[b]\nname = foo # tail\n");
    CHECK(c.get_double("a", "x", 0) == 1.5);
    CHECK(c.get_bool("a", "flag", false));
    CHECK(c.get_list("a", "list") == std::vector<double>{1, 2, 3});
    CHECK(c.get_string("b", "name", "") == "foo");
    CHECK(c.get_int("b", "missing", 7) == 7);
    CHECK_THROWS_AS(c.get_int("a", "x", 0), ConfigError);
    CHECK_THROWS_AS(c.check_known({"a.x", "a.flag", "a.list"}), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("[a]\nx = 1\nx = 2\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("[a\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::load("/nonexistent/x.cfg"), ConfigError);

    CHECK(parse_n_range("3") == std::vector<int>{3});
    CHECK(parse_n_range("3-5") == std::vector<int>{3, 4, 5});
    CHECK(parse_n_range("3:5") == std::vector<int>{3, 4, 5});
    CHECK(parse_n_range("8,3,5") == std::vector<int>{8, 3, 5});
    CHECK_THROWS_AS(parse_n_range("5-3"), ConfigError);
    CHECK_THROWS_AS(parse_n_range("3,3"), ConfigError);
}

TEST_CASE("bundled run configs load") {
    const RunConfig nv1 = load_run_config(data_path("nv1.cfg"));
    REQUIRE(nv1.experiments.size() == 4);
    CHECK(nv1.experiments[2].t_beta == approx(2.790e-6));
    CHECK(nv1.cluster_source == ClusterSource::Table);
    CHECK(nv1.n_range.front() == 18);
    CHECK(nv1.noise.has_value());
    const RunConfig pl = load_run_config(data_path("planted.cfg"));
    CHECK(pl.cluster_source == ClusterSource::Lattice);
    CHECK(pl.schedule.max_iters == 300);
    CHECK(pl.resolution() == approx(1.0 / (800 * 8e-6)));
    const RunConfig nv2 = load_run_config(data_path("nv2.cfg"));
    CHECK(nv2.resolution() == 110.0);

    const fs::path dir = scratch("cfg");
    write_text_file(dir / "bad.cfg", "[experiment]\nt_beta_us = 1\nbogus = 2\n");
    CHECK_THROWS_AS(load_run_config(dir / "bad.cfg"), ConfigError);
    write_text_file(dir / "neg.cfg", "[experiment]\nt_beta_us = -1\n");
    CHECK_THROWS_AS(load_run_config(dir / "neg.cfg"), ConfigError);
}
