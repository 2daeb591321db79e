// hhgdis: command-line driver. Each subcommand wraps one pipeline stage and
// writes plain CSV / HHG1 binaries plus an updated manifest.json.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hhgdis/config.hpp"
#include "hhgdis/ensemble.hpp"
#include "hhgdis/env_sampler.hpp"
#include "hhgdis/io.hpp"
#include "hhgdis/purity_fit.hpp"
#include "hhgdis/semiclassics.hpp"
#include "hhgdis/spectra.hpp"
#include "hhgdis/tdse.hpp"
#include "hhgdis/units.hpp"

namespace fs = std::filesystem;
using namespace hhgdis;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::string out_dir;
  std::string records_path;
};

RunConfig load_config(const Globals& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw ConfigError("cannot open config file " + g.config_path);
    cfg = parse_config(in);
  }
  if (g.seed) cfg.master_seed = *g.seed;
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  return cfg;
}

// Shared plumbing for one subcommand invocation.
class Stage {
 public:
  Stage(std::string name, const RunConfig& cfg)
      : name_(std::move(name)), cfg_(cfg), dir_(cfg.out_dir), started_(utc_timestamp()) {
    fs::create_directories(dir_);
    checksum_ = config_checksum(cfg_);
  }

  fs::path path(const std::string& file) const { return dir_ / file; }
  std::string header() const { return header_line(name_, checksum_); }

  void csv(const std::string& file, const std::vector<std::string>& names,
           const std::vector<std::vector<double>>& cols) {
    write_csv(path(file), header(), names, cols);
    outputs_.push_back(path(file));
  }

  void map(const std::string& file, const SpectralMap& m) {
    save_file(path(file), m, [](std::ostream& os, const SpectralMap& x) { write_map(os, x); });
    outputs_.push_back(path(file));
  }

  void text(const std::string& file, const std::string& body) {
    std::ofstream os(path(file), std::ios::binary);
    if (!os) throw Error("cannot write " + path(file).string());
    os << header() << '\n' << body;
    os.close();
    outputs_.push_back(path(file));
  }

  void add_output(const fs::path& p) { outputs_.push_back(p); }

  void finish() {
    Manifest m(dir_);
    m.set_config(cfg_);
    m.record_stage(name_, started_, outputs_);
    m.save();
    for (const auto& p : outputs_) std::cout << p.string() << '\n';
  }

 private:
  std::string name_;
  RunConfig cfg_;
  fs::path dir_;
  std::string started_;
  std::string checksum_;
  std::vector<fs::path> outputs_;
};

// Records are opened read-only; the checksum is compared with the manifest
// written by `run` before and after analysis.
class RecordsGuard {
 public:
  explicit RecordsGuard(const fs::path& path) : path_(path) {
    if (!fs::exists(path_)) throw MissingArtifact("required file missing: " + path_.string() + " (run `hhgdis run` first)");
    before_ = sha256_file(path_);
    const Manifest m(path_.parent_path().empty() ? fs::path(".") : path_.parent_path());
    const auto expected = m.recorded("run", path_.filename().string());
    if (expected && *expected != before_)
      std::cerr << "warning: " << path_.string() << " does not match the checksum in manifest.json\n";
  }

  void verify_unchanged() const {
    if (sha256_file(path_) != before_) throw DataError(path_.string() + " changed during analysis");
  }

 private:
  fs::path path_;
  std::string before_;
};

fs::path records_path(const Globals& g, const RunConfig& cfg) {
  return g.records_path.empty() ? fs::path(cfg.out_dir) / "records.bin" : fs::path(g.records_path);
}

// Physics comes from the configuration stored with the records; analysis
// options and the output directory from the command line.
RunConfig analysis_config(const Globals& g, RecordsReader& reader) {
  RunConfig cfg = reader.config();
  const RunConfig cli = load_config(g);
  cfg.out_dir = cli.out_dir;
  cfg.mask = cli.mask;
  cfg.gabor_window = cli.gabor_window;
  cfg.gabor_steps_per_cycle = cli.gabor_steps_per_cycle;
  cfg.gabor_max_order = cli.gabor_max_order;
  cfg.band = cli.band;
  return cfg;
}

std::vector<double> dipole_series(RecordsReader& reader, std::optional<std::size_t> index) {
  if (index) {
    if (*index >= reader.size()) throw ConfigError("--config-index out of range");
    return reader.series(*index).acceleration;
  }
  std::vector<Recording> runs;
  for (std::size_t i = 0; i < reader.size(); ++i) runs.push_back(reader.series(i));
  return ensemble_expectation(runs, Observable::acceleration);
}

GroundState compute_ground_state(const RunConfig& cfg) {
  const AtomParams atom = cfg.atom;
  return ground_state(cfg.grid, [atom](double x) { return potential_atom(x, atom); });
}

// ----------------------------------------------------------------------------

void cmd_ground_state(const Globals& g) {
  const RunConfig cfg = load_config(g);
  Stage st("ground-state", cfg);
  const GroundState gs = compute_ground_state(cfg);
  save_file(st.path("ground_state.bin"), gs.psi, [](std::ostream& os, const Wavefunction& w) { write_wavefunction(os, w); });
  st.add_output(st.path("ground_state.bin"));
  std::vector<double> xs, dens;
  for (std::size_t j = 0; j < cfg.grid.n; ++j) {
    xs.push_back(cfg.grid.x(j));
    dens.push_back(std::norm(gs.psi[j]));
  }
  st.csv("ground_state_density.csv", {"x", "density"}, {xs, dens});
  st.csv("ground_state_energy.csv", {"energy", "iterations"}, {{gs.energy}, {static_cast<double>(gs.iterations)}});
  st.finish();
  std::cerr << "E0 = " << fmt_double(gs.energy) << " a.u. after " << gs.iterations << " iterations\n";
}

void cmd_sample_env(const Globals& g) {
  const RunConfig cfg = load_config(g);
  Stage st("sample-env", cfg);
  StructureParams s = cfg.structure;
  s.n_p = resolved_perturber_count(cfg);
  const auto configs = sample_configurations(cfg.master_seed, cfg.n_c, s);
  std::ostringstream body;
  write_configurations(body, configs, s, cfg.master_seed);
  st.text("configurations.txt", body.str());
  st.finish();
}

void cmd_pair_correlation(const Globals& g, const std::string& input, double bin_width, double max_distance) {
  const RunConfig cfg = load_config(g);
  const fs::path in_path = input.empty() ? fs::path(cfg.out_dir) / "configurations.txt" : fs::path(input);
  auto in = open_artifact(in_path);
  const auto file = read_configurations(in);
  Stage st("pair-correlation", cfg);
  if (!(max_distance > 0.0))
    for (const auto& c : file.configs)
      if (c.size() >= 2) max_distance = std::max(max_distance, c.positions.back() - c.positions.front());
  const auto h = pair_correlation(file.configs, bin_width, max_distance);
  st.csv("pair_correlation.csv", {"distance", "pairs_per_configuration"}, {h.centers, h.mass});
  st.finish();
}

void cmd_run(const Globals& g) {
  const RunConfig cfg = load_config(g);
  const EnsembleSpec spec = make_ensemble_spec(cfg);
  spec.validate();
  Stage st("run", cfg);
  const GroundState gs = compute_ground_state(cfg);

  RecordsHeader header;
  header.config_text = render_config(portable_config(cfg));
  header.grid = cfg.grid;
  header.n_c = spec.n_c;
  header.n_positions = static_cast<std::uint64_t>(spec.structure.n_p);
  // Sample axis exactly as the propagator produces it.
  {
    const Schedule sched = spec.schedule();
    const double dt = sched.effective_dt();
    for (long long k = 0; k <= sched.steps(); k += spec.record_stride) header.times.push_back(sched.t_start + k * dt);
  }
  header.probe_times = spec.probe_times;

  const fs::path rec_path = g.records_path.empty() ? st.path("records.bin") : fs::path(g.records_path);
  RecordsWriter writer(rec_path, header);
  std::vector<double> mean_x(header.times.size(), 0.0), mean_a(header.times.size(), 0.0),
      mean_n(header.times.size(), 0.0);
  run_ensemble_streaming(spec, g.workers, &gs, [&](std::size_t i, const EnvironmentConfig& c, Recording&& r) {
    writer.append(c, r);
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      mean_x[k] += r.position[k];
      mean_a[k] += r.acceleration[k];
      mean_n[k] += r.norm[k];
    }
    std::cerr << "configuration " << i + 1 << "/" << spec.n_c << " done\n";
  });
  writer.close();
  st.add_output(rec_path);
  const double inv = 1.0 / static_cast<double>(spec.n_c);
  for (std::size_t k = 0; k < mean_x.size(); ++k) {
    mean_x[k] *= inv;
    mean_a[k] *= inv;
    mean_n[k] *= inv;
  }
  st.csv("ensemble_series.csv", {"t", "position", "acceleration", "norm"}, {header.times, mean_x, mean_a, mean_n});
  st.finish();
}

void cmd_spectrum(const Globals& g, std::optional<std::size_t> index, bool hann) {
  const RunConfig base = load_config(g);
  const fs::path rp = records_path(g, base);
  RecordsGuard guard(rp);
  RecordsReader reader(rp);
  const RunConfig cfg = analysis_config(g, reader);
  Stage st("spectrum", cfg);
  const auto d = dipole_series(reader, index);
  const auto s = hhg_spectrum(reader.header().times, d, cfg.laser.omega, hann ? Apodization::hann : Apodization::none);
  st.csv("spectrum.csv", {"order", "magnitude"}, {s.order, s.magnitude});

  std::vector<double> qs, peaks;
  for (int q = 1; q <= static_cast<int>(s.order.back()) - 1; ++q) {
    qs.push_back(q);
    peaks.push_back(harmonic_peak(s, q));
  }
  st.csv("harmonic_peaks.csv", {"order", "peak"}, {qs, peaks});

  const double ip = -compute_ground_state(cfg).energy;
  const double predicted = cutoff_harmonic(cfg.laser, ip);
  const OrderBand band = cfg.band;
  const bool band_ok = band.hi + 1 < s.order.back();
  const double contrast = band_ok ? parity_contrast(s, band) : std::nan("");
  const double odd_mean = band_ok ? plateau_statistics(s, band, PeakSelection::odd) : std::nan("");
  const double all_mean = band_ok ? plateau_statistics(s, band, PeakSelection::all) : std::nan("");
  const double knee = cutoff_order(s, std::min(predicted * 0.5, static_cast<double>(band.lo)));
  st.csv("spectrum_stats.csv",
         {"band_lo", "band_hi", "parity_contrast", "plateau_mean_odd", "plateau_mean_all", "cutoff_knee",
          "cutoff_predicted", "ionization_potential", "configurations"},
         {{static_cast<double>(band.lo)},
          {static_cast<double>(band.hi)},
          {contrast},
          {odd_mean},
          {all_mean},
          {knee},
          {predicted},
          {ip},
          {index ? 1.0 : static_cast<double>(reader.size())}});
  guard.verify_unchanged();
  st.finish();
}

void cmd_gabor(const Globals& g, std::optional<std::size_t> index) {
  const RunConfig base = load_config(g);
  const fs::path rp = records_path(g, base);
  RecordsGuard guard(rp);
  RecordsReader reader(rp);
  const RunConfig cfg = analysis_config(g, reader);
  Stage st("gabor", cfg);
  const auto d = dipole_series(reader, index);
  const auto& t = reader.header().times;
  const double period = cfg.laser.period();
  const auto taus = uniform_taus(t.front(), t.back(), period / cfg.gabor_steps_per_cycle);
  const auto m = gabor(t, d, cfg.gabor_window * period, taus, cfg.laser.omega, cfg.gabor_max_order);
  st.map("gabor.bin", m);
  guard.verify_unchanged();
  st.finish();
}

void cmd_purity(const Globals& g) {
  const RunConfig base = load_config(g);
  const fs::path rp = records_path(g, base);
  RecordsGuard guard(rp);
  RecordsReader reader(rp);
  const RunConfig cfg = analysis_config(g, reader);
  const auto& probes = reader.header().probe_times;
  if (probes.empty()) throw MissingArtifact(rp.string() + " holds no snapshots (probes_per_cycle = 0)");
  Stage st("purity", cfg);
  std::vector<double> t_au, t_fs, total, photo;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto snaps = reader.snapshots_at(p);
    t_au.push_back(probes[p]);
    t_fs.push_back(units::fs_from_au(probes[p]));
    total.push_back(purity(snaps, std::nullopt, g.workers));
    photo.push_back(purity(snaps, cfg.mask, g.workers));
  }
  st.csv("purity.csv", {"t", "t_fs", "purity", "purity_photoelectron"}, {t_au, t_fs, total, photo});

  FitWindow window;
  window.t_min = units::fs_from_au(cfg.laser.n_up * cfg.laser.period());
  window.t_max = units::fs_from_au((cfg.laser.n_up + cfg.laser.n_plateau) * cfg.laser.period());
  std::vector<double> which, gam, tstar, tzero, rms, degen;
  for (int k = 0; k < 2; ++k) {
    const auto f = fit_purity_decay(t_fs, k == 0 ? total : photo, window);
    which.push_back(k);
    gam.push_back(f.gamma);
    tstar.push_back(f.t_star);
    tzero.push_back(f.t0);
    rms.push_back(f.residual_rms);
    degen.push_back(f.degenerate ? 1.0 : 0.0);
  }
  st.csv("purity_fit.csv", {"photoelectron", "gamma", "t_star_fs", "t0_fs", "residual_rms", "degenerate"},
         {which, gam, tstar, tzero, rms, degen});
  guard.verify_unchanged();
  st.finish();
}

void cmd_density_map(const Globals& g, const std::string& kind, double probe_time, double x_lo, double x_hi,
                     std::size_t stride, bool masked) {
  const RunConfig base = load_config(g);
  const fs::path rp = records_path(g, base);
  RecordsGuard guard(rp);
  RecordsReader reader(rp);
  const RunConfig cfg = analysis_config(g, reader);
  const auto& probes = reader.header().probe_times;
  if (probes.empty()) throw MissingArtifact(rp.string() + " holds no snapshots (probes_per_cycle = 0)");
  Stage st("density-map", cfg);
  if (kind == "probability") {
    EnsembleRecord rec;
    rec.grid = reader.header().grid;
    for (std::size_t i = 0; i < reader.size(); ++i) {
      Recording r;
      for (std::size_t p = 0; p < probes.size(); ++p) r.snapshots.push_back(reader.snapshot(i, p));
      rec.runs.push_back(std::move(r));
    }
    st.map("probability_density.bin", probability_density_map(rec, stride));
  } else {
    std::size_t best = 0;
    for (std::size_t p = 1; p < probes.size(); ++p)
      if (std::abs(probes[p] - probe_time) < std::abs(probes[best] - probe_time)) best = p;
    const auto snaps = reader.snapshots_at(best);
    std::vector<const Wavefunction*> ptrs;
    for (const auto& s : snaps) ptrs.push_back(&s);
    const std::optional<MaskSpec> mask = masked ? std::optional<MaskSpec>(cfg.mask) : std::nullopt;
    st.map("density_matrix.bin", density_matrix_map(ptrs, mask, {x_lo, x_hi, stride}));
    std::cerr << "probe time " << fmt_double(probes[best]) << " a.u.\n";
  }
  guard.verify_unchanged();
  st.finish();
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("bad number in list: '" + tok + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::string ell_tag(double ell) {
  std::ostringstream os;
  os << ell;
  return os.str();
}

void cmd_sfa(const Globals& g, const std::string& ell_list, int ti_samples, const std::string& backscatter_list) {
  const RunConfig cfg = load_config(g);
  Stage st("sfa", cfg);
  const LaserParams& laser = cfg.laser;
  const double up = ponderomotive_energy(laser);
  const double period = laser.period();
  std::vector<double> ells, emax, ratio;
  for (double ell : parse_list(ell_list)) {
    std::vector<double> ti, tr, site, e, e_up;
    for (int k = 0; k < ti_samples; ++k) {
      const double t = period * k / ti_samples;
      for (const auto& ev : find_returns(t, ell, laser)) {
        ti.push_back(ev.t_i);
        tr.push_back(ev.t_r);
        site.push_back(ev.site);
        e.push_back(ev.energy);
        e_up.push_back(ev.energy / up);
      }
    }
    st.csv("sfa_returns_l" + ell_tag(ell) + ".csv", {"t_i", "t_r", "site", "energy", "energy_over_up"},
           {ti, tr, site, e, e_up});
    ells.push_back(ell);
    emax.push_back(max_return_energy(ell, laser));
    ratio.push_back(emax.back() / up);
  }
  st.csv("sfa_cutoff.csv", {"ell", "max_return_energy", "max_over_up"}, {ells, emax, ratio});

  if (!backscatter_list.empty()) {
    for (double ell : parse_list(backscatter_list)) {
      // Scatter at the first arrival on either site, then return to the origin.
      std::vector<double> ti, ts, site, tr, e, e_up;
      for (int k = 0; k < ti_samples; ++k) {
        const double t = period * k / ti_samples;
        const auto arrivals = find_returns(t, ell, laser);
        if (arrivals.empty()) continue;
        const auto& first = arrivals.front();
        const auto traj = backscatter_trajectory(t, first.t_r, laser);
        for (const auto& ev : traj.returns()) {
          ti.push_back(t);
          ts.push_back(first.t_r);
          site.push_back(first.site);
          tr.push_back(ev.t_r);
          e.push_back(ev.energy);
          e_up.push_back(ev.energy / up);
        }
      }
      st.csv("sfa_backscatter_l" + ell_tag(ell) + ".csv", {"t_i", "t_s", "site", "t_r", "energy", "energy_over_up"},
             {ti, ts, site, tr, e, e_up});
    }
  }
  st.finish();
}

void cmd_orbits(const Globals& g, const std::string& t0_list, int steps_per_period) {
  const RunConfig cfg = load_config(g);
  Stage st("orbits", cfg);
  ClassicalModel model;
  model.laser = cfg.laser;
  model.atom = cfg.atom;
  model.steps_per_period = steps_per_period;
  const double period = model.period();
  std::ostringstream body;
  std::vector<std::vector<double>> cols;
  std::vector<std::string> names;
  int k = 0;
  for (double cycles : parse_list(t0_list)) {
    const double t0 = cycles * period;
    const auto orbit = find_periodic_orbit(zero_drift_guess(t0, cfg.laser), t0, model);
    const auto partner = symmetry_partner(orbit, model);
    for (const auto* o : {&orbit, &partner}) {
      const auto& M = o->monodromy;
      body << "[orbit " << k << "]\n"
           << "t0 = " << fmt_double(o->t0) << "\n"
           << "t0_cycles = " << fmt_double(o->t0 / period) << "\n"
           << "x = " << fmt_double(o->z.x) << "\n"
           << "p = " << fmt_double(o->z.p) << "\n"
           << "residual = " << fmt_double(o->residual) << "\n"
           << "newton_iterations = " << o->residual_history.size() - 1 << "\n"
           << "M = " << fmt_double(M(0, 0)) << " " << fmt_double(M(0, 1)) << " " << fmt_double(M(1, 0)) << " "
           << fmt_double(M(1, 1)) << "\n"
           << "trace = " << fmt_double(M.trace()) << "\n"
           << "det = " << fmt_double(M.determinant()) << "\n"
           << "stability = " << to_string(o->stability) << "\n"
           << "partner_of = " << (o == &partner ? std::to_string(k - 1) : std::string("none")) << "\n\n";
      const auto path = overlay_orbit(*o, model, 0.0, cfg.laser.duration());
      std::vector<double> t, x;
      // One sample per 64 integrator steps keeps the overlay file small.
      for (std::size_t s = 0; s < path.size(); s += 64) {
        t.push_back(path[s].t);
        x.push_back(path[s].x);
      }
      names.push_back("t_" + std::to_string(k));
      cols.push_back(t);
      names.push_back("x_" + std::to_string(k));
      cols.push_back(x);
      ++k;
    }
  }
  // Overlay columns can differ in length by a sample; trim to the shortest.
  std::size_t n = cols.front().size();
  for (const auto& c : cols) n = std::min(n, c.size());
  for (auto& c : cols) c.resize(n);
  st.text("orbits.txt", body.str());
  st.csv("orbit_overlay.csv", names, cols);
  st.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disordered-medium high-harmonic generation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--config", g.config_path, "configuration file (defaults apply when omitted)");
  app.add_option("--seed", g.seed, "master seed override");
  app.add_option("--workers", g.workers, "worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--out", g.out_dir, "output directory (overrides [output] dir)");
  app.add_option("--records", g.records_path, "records file (default <out>/records.bin)");

  auto* c_gs = app.add_subcommand("ground-state", "imaginary-time ground state of the bare atom");
  auto* c_env = app.add_subcommand("sample-env", "sample n_c perturber configurations");
  auto* c_run = app.add_subcommand("run", "propagate the ensemble and store records");
  auto* c_spec = app.add_subcommand("spectrum", "HHG spectrum from stored records");
  auto* c_gab = app.add_subcommand("gabor", "Gabor time-frequency map from stored records");
  auto* c_pur = app.add_subcommand("purity", "ensemble purity series and exponential fit");
  auto* c_dm = app.add_subcommand("density-map", "density-matrix or probability-density maps");
  auto* c_sfa = app.add_subcommand("sfa", "simple-man return energies");
  auto* c_orb = app.add_subcommand("orbits", "periodic orbits of the driven atom");
  auto* c_pc = app.add_subcommand("pair-correlation", "pair-distance histogram of sampled configurations");

  std::optional<std::size_t> index;
  bool hann = false;
  c_spec->add_option("--config-index", index, "single configuration instead of the ensemble average");
  c_spec->add_flag("--hann", hann, "apply a Hann window (diagnostic)");
  c_gab->add_option("--config-index", index, "single configuration instead of the ensemble average");

  std::string kind = "density-matrix";
  double probe_time = 0.0, x_lo = -100.0, x_hi = 100.0;
  std::size_t stride = 4;
  bool masked = false;
  c_dm->add_option("--kind", kind)->check(CLI::IsMember({"density-matrix", "probability"}));
  c_dm->add_option("--time", probe_time, "probe time in a.u. (nearest stored probe)");
  c_dm->add_option("--x-min", x_lo);
  c_dm->add_option("--x-max", x_hi);
  c_dm->add_option("--stride", stride)->check(CLI::PositiveNumber);
  c_dm->add_flag("--mask", masked, "apply the photoelectron mask");

  std::string ell_list = "0,10,20,30,40,50,60", back_list;
  int ti_samples = 2000;
  c_sfa->add_option("--ell-list", ell_list, "comma-separated distances in a.u.");
  c_sfa->add_option("--ti-samples", ti_samples, "ionization times per cycle")->check(CLI::Range(10, 1000000));
  c_sfa->add_option("--backscatter-ell", back_list, "comma-separated scatterer distances");

  std::string t0_list = "2,2.5";
  int steps = 16384;
  c_orb->add_option("--t0", t0_list, "anchor times in laser periods");
  c_orb->add_option("--steps-per-period", steps)->check(CLI::Range(64, 10000000));

  std::string pc_input;
  double bin_width = 0.25, max_distance = 0.0;
  c_pc->add_option("--input", pc_input, "configurations file (default <out>/configurations.txt)");
  c_pc->add_option("--bin-width", bin_width)->check(CLI::PositiveNumber);
  c_pc->add_option("--max-distance", max_distance, "0 = largest observed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::config_error);
  }

  try {
    if (c_gs->parsed()) cmd_ground_state(g);
    else if (c_env->parsed()) cmd_sample_env(g);
    else if (c_run->parsed()) cmd_run(g);
    else if (c_spec->parsed()) cmd_spectrum(g, index, hann);
    else if (c_gab->parsed()) cmd_gabor(g, index);
    else if (c_pur->parsed()) cmd_purity(g);
    else if (c_dm->parsed()) cmd_density_map(g, kind, probe_time, x_lo, x_hi, stride, masked);
    else if (c_sfa->parsed()) cmd_sfa(g, ell_list, ti_samples, back_list);
    else if (c_orb->parsed()) cmd_orbits(g, t0_list, steps);
    else if (c_pc->parsed()) cmd_pair_correlation(g, pc_input, bin_width, max_distance);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::missing_artifact);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::numerical_failure);
  }
  return 0;
}
