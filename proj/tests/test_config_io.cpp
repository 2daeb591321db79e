#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "hhgdis/config.hpp"
#include "hhgdis/io.hpp"

using namespace hhgdis;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("hhgdis_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty file gives the documented defaults") {
  const auto c = parse_config(std::string{});
  CHECK(c == RunConfig{});
  CHECK(c.structure.a == 10.0);
  CHECK(c.structure.sigma == 1.0);
  CHECK(c.perturbers.depth == 0.8);
  CHECK(c.perturbers.width == 0.5);
  CHECK(c.n_c == 1000);
  CHECK(c.atom.softening == 0.4837);
  CHECK(c.laser.omega == 0.044);
  CHECK(c.laser.field == 0.15);
  CHECK(c.laser.n_up == 2);
  CHECK(c.laser.n_plateau == 11);
  CHECK(c.laser.n_down == 2);
  CHECK(c.gabor_window == 0.35);
  CHECK(c.mask.radius == 5.0);
  CHECK(resolved_perturber_count(c) == 38);
}

TEST_CASE("gas phase and unit keys") {
  const auto c = parse_config("[environment]\nA_E = 0\n\n[laser]\nwavelength_nm = 800 ; comment\nintensity_w_cm2 = 1e14\n");
  CHECK(c.perturbers.depth == 0.0);
  CHECK(c.laser.omega == Approx(0.05695).epsilon(1e-3));
  CHECK(c.laser.field == Approx(0.0534).epsilon(1e-3));
}

TEST_CASE("errors name the line and key") {
  const auto e1 = error_of("[environment]\nsigma = -1\n");
  CHECK(e1.find("sigma") != std::string::npos);
  CHECK(e1.find("line 2") != std::string::npos);
  CHECK(error_of("[laser]\nbogus = 1\n").find("unknown key") != std::string::npos);
  CHECK(error_of("[nowhere]\n").find("unknown section") != std::string::npos);
  CHECK(error_of("[grid]\nn 12\n").find("line 2") != std::string::npos);
  CHECK(error_of("[grid]\nn = 12.5\n").find("integer") != std::string::npos);
  CHECK(error_of("n_c = 3\n").find("outside any section") != std::string::npos);
  CHECK(error_of("[laser]\nomega = 0.05\nwavelength_nm = 800\n").find("either") != std::string::npos);
  CHECK(error_of("[laser]\nomega = 0.05\nomega = 0.06\n").find("duplicate") != std::string::npos);
  CHECK(error_of("[grid]\nx_min = 10\nx_max = -10\n").find("x_max") != std::string::npos);
  CHECK(error_of("[ensemble]\nmaster_seed = -4\n").find("master_seed") != std::string::npos);
}

TEST_CASE("render then parse is the identity") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int k = 0; k < 50; ++k) {
    RunConfig c;
    c.laser.field = u(rng) * 0.1;
    c.laser.omega = u(rng) * 0.03;
    c.laser.n_plateau = k % 7;
    c.atom.softening = u(rng);
    c.perturbers.depth = k % 3 ? u(rng) : 0.0;
    c.structure.sigma = u(rng);
    c.structure.n_p = 2 * (k % 5);
    c.grid = {-u(rng) * 100, u(rng) * 100, static_cast<std::size_t>(64 + k)};
    c.propagator.dt = u(rng) * 0.01;
    c.propagator.absorber = k % 2;
    c.n_c = 1 + k;
    c.master_seed = rng();
    c.out_dir = "runs/r" + std::to_string(k);
    c.mask = {5.0 + k, 1.0 + 0.1 * k};
    c.band = {3 + k, 40 + k};
    CHECK(parse_config(render_config(c)) == c);
  }
}

TEST_CASE("ensemble spec from a config") {
  auto c = parse_config("[environment]\nn_p = 0\n[ensemble]\nprobes_per_cycle = 4\n");
  const auto s = make_ensemble_spec(c);
  CHECK(s.structure.n_p == 38);
  CHECK(s.probe_times.size() == 15 * 4 + 1);
  c.probes_per_cycle = 0;
  CHECK(make_ensemble_spec(c).probe_times.empty());
}

TEST_CASE("sha256") {
  CHECK(sha256_hex(std::string("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(config_checksum(RunConfig{}) == config_checksum(parse_config(render_config(RunConfig{}))));
}

TEST_CASE("csv round trip with full precision") {
  const auto dir = scratch_dir("csv");
  const std::vector<double> a{0.1, 1.0 / 3.0, -2.5e-300}, b{1e300, std::numbers::pi, 0.0};
  write_csv(dir / "x.csv", header_line("spectrum", "deadbeef"), {"a", "b"}, {a, b});
  const auto t = read_csv(dir / "x.csv");
  REQUIRE(t.comments.size() == 1);
  CHECK(t.comments[0].find("spectrum") != std::string::npos);
  CHECK(t.comments[0].find("deadbeef") != std::string::npos);
  CHECK(t.column("a") == a);
  CHECK(t.column("b") == b);
  CHECK_THROWS_AS(read_csv(dir / "missing.csv"), MissingArtifact);
  CHECK_THROWS_AS(write_csv(dir / "y.csv", "#", {"a"}, {a, b}), DataError);
}

TEST_CASE("binary wavefunction and map formats") {
  const Grid g{-5.0, 7.0, 16};
  Wavefunction w = gaussian_packet(g, 1.0, 1.5, 0.3);
  w.time = 12.25;
  std::stringstream ss;
  write_wavefunction(ss, w);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "HHG1");
  CHECK(bytes.size() == 4 + 4 + 4 + 8 + 8 + 8 + 8 + 16 * 16);
  // little-endian version field
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  const auto r = read_wavefunction(ss);
  CHECK(r.grid == g);
  CHECK(r.time == w.time);
  CHECK(r.amplitudes == w.amplitudes);

  SpectralMap m("tau", {0.0, 1.0}, "order", {1.0, 2.0, 3.0});
  for (std::size_t k = 0; k < m.values.size(); ++k) m.values[k] = 0.5 * k;
  std::stringstream ms;
  write_map(ms, m);
  CHECK(read_map(ms) == m);

  std::stringstream wrong;
  write_map(wrong, m);
  CHECK_THROWS_AS(read_wavefunction(wrong), DataError);
  std::stringstream truncated(bytes.substr(0, 40));
  CHECK_THROWS_AS(read_wavefunction(truncated), DataError);
}

TEST_CASE("records file round trip") {
  const auto dir = scratch_dir("records");
  const Grid g{-4.0, 4.0, 8};
  RecordsHeader h;
  h.config_text = render_config(RunConfig{});
  h.grid = g;
  h.n_c = 2;
  h.n_positions = 2;
  h.times = {0.0, 0.5, 1.0};
  h.probe_times = {0.0, 1.0};
  std::vector<Recording> runs(2);
  std::vector<EnvironmentConfig> cfgs{{{-11.0, 9.0}}, {{-10.0, 10.5}}};
  for (int i = 0; i < 2; ++i) {
    runs[i].times = h.times;
    runs[i].position = {0.0, 0.1 * i, 0.2};
    runs[i].acceleration = {1.0, 2.0, 3.0 + i};
    runs[i].norm = {1.0, 0.99, 0.98};
    for (double t : h.probe_times) {
      Wavefunction w = gaussian_packet(g, 0.5 * i, 1.0);
      w.time = t;
      runs[i].snapshots.push_back(w);
    }
  }
  {
    RecordsWriter w(dir / "records.bin", h);
    w.append(cfgs[0], runs[0]);
    CHECK_THROWS_AS(w.close(), DataError);
    w.append(cfgs[1], runs[1]);
    CHECK_THROWS_AS(w.append(cfgs[1], runs[1]), DataError);
    w.close();
  }
  RecordsReader r(dir / "records.bin");
  CHECK(r.size() == 2);
  CHECK(r.config() == RunConfig{});
  CHECK(r.configuration(1) == cfgs[1]);
  CHECK(r.series(1).acceleration == runs[1].acceleration);
  CHECK(r.snapshot(1, 1).amplitudes == runs[1].snapshots[1].amplitudes);
  CHECK(r.snapshot(0, 1).time == 1.0);
  const auto all = r.load();
  CHECK(all.runs[0].norm == runs[0].norm);
  CHECK_THROWS_AS(r.snapshot(2, 0), DataError);
  CHECK_THROWS_AS(RecordsReader(dir / "nothing.bin"), MissingArtifact);

  // truncation is detected from the header
  fs::resize_file(dir / "records.bin", fs::file_size(dir / "records.bin") - 8);
  CHECK_THROWS_AS(RecordsReader(dir / "records.bin"), DataError);
}

TEST_CASE("manifest stages and checksums") {
  const auto dir = scratch_dir("manifest");
  write_csv(dir / "a.csv", "# x", {"v"}, {{1.0}});
  {
    Manifest m(dir);
    m.set_config(RunConfig{});
    m.record_stage("run", utc_timestamp(), {dir / "a.csv"});
    m.save();
  }
  Manifest again(dir);
  CHECK(again.recorded("run", "a.csv") == sha256_file(dir / "a.csv"));
  CHECK_FALSE(again.recorded("spectrum", "a.csv"));
  CHECK(again.json()["config"]["laser"]["omega"] == "0.043999999999999997");
  CHECK(again.json()["config_sha256"] == config_checksum(RunConfig{}));
}
