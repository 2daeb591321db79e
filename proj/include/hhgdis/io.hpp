#pragma once

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hhgdis/config.hpp"
#include "hhgdis/ensemble.hpp"
#include "hhgdis/error.hpp"
#include "hhgdis/grid.hpp"
#include "hhgdis/spectral_map.hpp"
#include "hhgdis/tdse.hpp"

namespace hhgdis {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------- checksums

inline std::string sha256_hex(const void* data, std::size_t size) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data, size) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

/// Configuration with the output location reset, so that identical runs
/// written to different directories share one identity.
inline RunConfig portable_config(RunConfig cfg) {
  cfg.out_dir = RunConfig{}.out_dir;
  return cfg;
}

/// Identity of a resolved configuration: hash of its canonical rendering.
inline std::string config_checksum(const RunConfig& cfg) { return sha256_hex(render_config(portable_config(cfg))); }

// ---------------------------------------------------------------- text output

/// First line of every output file.
inline std::string header_line(const std::string& subcommand, const std::string& checksum) {
  return "# hhgdis " + subcommand + " version " + kVersion + " config-sha256 " + checksum;
}

inline std::string fmt_double(double v) { return detail::fmt17(v); }

/// Column-oriented CSV: comment header, name row, then rows.
inline void write_csv(const std::filesystem::path& path, const std::string& header,
                      const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw DataError("write_csv: names and columns differ in count");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw DataError("write_csv: ragged columns");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << header << '\n';
  for (std::size_t k = 0; k < names.size(); ++k) os << (k ? "," : "") << names[k];
  os << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << fmt_double(columns[k][r]);
    os << '\n';
  }
  if (!os) throw Error("write failed: " + path.string());
}

struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t k = 0; k < names.size(); ++k)
      if (names[k] == name) return columns[k];
    throw DataError("csv: no column " + name);
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("required file missing: " + path.string());
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line);
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (t.names.empty()) {
      t.names = cells;
      t.columns.resize(cells.size());
      continue;
    }
    if (cells.size() != t.names.size()) throw DataError("csv: ragged row in " + path.string());
    for (std::size_t k = 0; k < cells.size(); ++k) t.columns[k].push_back(std::stod(cells[k]));
  }
  return t;
}

// ---------------------------------------------------------------- binary format
//
// Every binary file: "HHG1", u32 format version, u32 kind, then a payload of
// little-endian u64 integers and IEEE doubles.

inline constexpr std::uint32_t kFormatVersion = 1;
enum class BinaryKind : std::uint32_t { wavefunction = 1, map = 2, records = 3 };

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& os) : os_(os) {}

  void magic(BinaryKind kind) {
    os_.write("HHG1", 4);
    u32(kFormatVersion);
    u32(static_cast<std::uint32_t>(kind));
  }
  void u32(std::uint32_t v) { raw(v); }
  void u64(std::uint64_t v) { raw(v); }
  void f64(double v) { raw(std::bit_cast<std::uint64_t>(v)); }
  void f64s(const double* p, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) f64(p[k]);
  }
  void f64s(const std::vector<double>& v) { f64s(v.data(), v.size()); }
  void str(const std::string& s) {
    u64(s.size());
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void complex(const std::vector<cplx>& v) {
    for (const auto& z : v) {
      f64(z.real());
      f64(z.imag());
    }
  }

 private:
  template <class T>
  void raw(T v) {
    if constexpr (std::endian::native == std::endian::big) v = byteswap(v);
    os_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  template <class T>
  static T byteswap(T v) {
    std::array<char, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof v);
    std::reverse(b.begin(), b.end());
    std::memcpy(&v, b.data(), sizeof v);
    return v;
  }
  std::ostream& os_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& is, std::string name) : is_(is), name_(std::move(name)) {}

  void magic(BinaryKind kind) {
    char m[4];
    is_.read(m, 4);
    if (!is_ || std::memcmp(m, "HHG1", 4) != 0) fail("bad magic");
    if (u32() != kFormatVersion) fail("unsupported format version");
    if (u32() != static_cast<std::uint32_t>(kind)) fail("unexpected payload kind");
  }
  std::uint32_t u32() { return raw<std::uint32_t>(); }
  std::uint64_t u64() { return raw<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(raw<std::uint64_t>()); }
  std::vector<double> f64s(std::size_t n) {
    check_size(n, 8);
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }
  std::string str() {
    const auto n = u64();
    check_size(n, 1);
    std::string s(n, '\0');
    is_.read(s.data(), static_cast<std::streamsize>(n));
    if (!is_) fail("truncated");
    return s;
  }
  std::vector<cplx> complex(std::size_t n) {
    check_size(n, 16);
    std::vector<cplx> v(n);
    for (auto& z : v) {
      const double re = f64();
      z = {re, f64()};
    }
    return v;
  }
  [[noreturn]] void fail(const std::string& what) const { throw DataError(name_ + ": " + what); }

 private:
  void check_size(std::uint64_t n, std::uint64_t unit) {
    if (n > (std::uint64_t{1} << 40) / unit) fail("implausible length");
  }
  template <class T>
  T raw() {
    T v;
    is_.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is_) fail("truncated");
    if constexpr (std::endian::native == std::endian::big) {
      std::array<char, sizeof(T)> b;
      std::memcpy(b.data(), &v, sizeof v);
      std::reverse(b.begin(), b.end());
      std::memcpy(&v, b.data(), sizeof v);
    }
    return v;
  }
  std::istream& is_;
  std::string name_;
};

inline void write_grid(BinaryWriter& w, const Grid& g) {
  w.f64(g.x_min);
  w.f64(g.x_max);
  w.u64(g.n);
}

inline Grid read_grid(BinaryReader& r) {
  Grid g;
  g.x_min = r.f64();
  g.x_max = r.f64();
  g.n = r.u64();
  if (!(g.x_max > g.x_min) || g.n < 2 || g.n > (std::size_t{1} << 32)) r.fail("bad grid descriptor");
  return g;
}

inline void write_wavefunction(std::ostream& os, const Wavefunction& psi) {
  BinaryWriter w(os);
  w.magic(BinaryKind::wavefunction);
  write_grid(w, psi.grid);
  w.f64(psi.time);
  w.complex(psi.amplitudes);
}

inline Wavefunction read_wavefunction(std::istream& is, const std::string& name = "wavefunction") {
  BinaryReader r(is, name);
  r.magic(BinaryKind::wavefunction);
  Wavefunction psi;
  psi.grid = read_grid(r);
  psi.time = r.f64();
  psi.amplitudes = r.complex(psi.grid.n);
  return psi;
}

inline void write_map(std::ostream& os, const SpectralMap& m) {
  BinaryWriter w(os);
  w.magic(BinaryKind::map);
  w.str(m.row_label);
  w.u64(m.rows.size());
  w.f64s(m.rows);
  w.str(m.col_label);
  w.u64(m.cols.size());
  w.f64s(m.cols);
  w.f64s(m.values);
}

inline SpectralMap read_map(std::istream& is, const std::string& name = "map") {
  BinaryReader r(is, name);
  r.magic(BinaryKind::map);
  SpectralMap m;
  m.row_label = r.str();
  m.rows = r.f64s(r.u64());
  m.col_label = r.str();
  m.cols = r.f64s(r.u64());
  m.values = r.f64s(m.rows.size() * m.cols.size());
  return m;
}

template <class T, class F>
void save_file(const std::filesystem::path& path, const T& obj, F&& writer) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  writer(os, obj);
  if (!os) throw Error("write failed: " + path.string());
}

inline std::ifstream open_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("required file missing: " + path.string());
  return in;
}

// ---------------------------------------------------------------- records
//
// Header: config text, grid, n_c, perturbers per configuration, sample times,
// probe times. Then one fixed-size block per configuration: positions,
// <x>(t), a(t), norm(t), and each probe snapshot (time + n complex values).

struct RecordsHeader {
  std::string config_text;
  Grid grid;
  std::uint64_t n_c = 0;
  std::uint64_t n_positions = 0;
  std::vector<double> times;
  std::vector<double> probe_times;
};

inline std::uint64_t records_block_size(const RecordsHeader& h) {
  return 8 * (h.n_positions + 3 * h.times.size() + h.probe_times.size() * (1 + 2 * h.grid.n));
}

class RecordsWriter {
 public:
  RecordsWriter(const std::filesystem::path& path, RecordsHeader header)
      : header_(std::move(header)), os_(path, std::ios::binary), w_(os_), path_(path) {
    if (!os_) throw Error("cannot write " + path.string());
    w_.magic(BinaryKind::records);
    w_.str(header_.config_text);
    write_grid(w_, header_.grid);
    w_.u64(header_.n_c);
    w_.u64(header_.n_positions);
    w_.u64(header_.times.size());
    w_.f64s(header_.times);
    w_.u64(header_.probe_times.size());
    w_.f64s(header_.probe_times);
  }

  void append(const EnvironmentConfig& config, const Recording& rec) {
    if (written_ >= header_.n_c) throw DataError("records: more configurations than declared");
    if (config.size() != header_.n_positions) throw DataError("records: perturber count changed");
    if (rec.times != header_.times) throw DataError("records: misaligned time axis");
    if (rec.snapshots.size() != header_.probe_times.size()) throw DataError("records: snapshot count mismatch");
    w_.f64s(config.positions);
    w_.f64s(rec.position);
    w_.f64s(rec.acceleration);
    w_.f64s(rec.norm);
    for (const auto& s : rec.snapshots) {
      if (!(s.grid == header_.grid)) throw DataError("records: snapshot grid mismatch");
      w_.f64(s.time);
      w_.complex(s.amplitudes);
    }
    ++written_;
  }

  void close() {
    if (written_ != header_.n_c) throw DataError("records: fewer configurations than declared");
    os_.close();
    if (!os_) throw Error("write failed: " + path_.string());
  }

 private:
  RecordsHeader header_;
  std::ofstream os_;
  BinaryWriter w_;
  std::filesystem::path path_;
  std::uint64_t written_ = 0;
};

/// Random access to a records file; nothing beyond the header is kept in memory.
class RecordsReader {
 public:
  explicit RecordsReader(const std::filesystem::path& path) : path_(path), in_(open_artifact(path)) {
    BinaryReader r(in_, path.string());
    r.magic(BinaryKind::records);
    header_.config_text = r.str();
    header_.grid = read_grid(r);
    header_.n_c = r.u64();
    header_.n_positions = r.u64();
    header_.times = r.f64s(r.u64());
    header_.probe_times = r.f64s(r.u64());
    data_begin_ = static_cast<std::uint64_t>(in_.tellg());
    in_.seekg(0, std::ios::end);
    const auto size = static_cast<std::uint64_t>(in_.tellg());
    if (size != data_begin_ + header_.n_c * records_block_size(header_)) r.fail("size does not match its header");
  }

  const RecordsHeader& header() const { return header_; }
  std::size_t size() const { return header_.n_c; }
  RunConfig config() const { return parse_config(header_.config_text); }

  EnvironmentConfig configuration(std::size_t i) {
    seek(i, 0);
    BinaryReader r(in_, path_.string());
    return {r.f64s(header_.n_positions)};
  }

  /// Time series only; snapshots are loaded on demand.
  Recording series(std::size_t i) {
    seek(i, 8 * header_.n_positions);
    BinaryReader r(in_, path_.string());
    Recording rec;
    rec.times = header_.times;
    rec.position = r.f64s(header_.times.size());
    rec.acceleration = r.f64s(header_.times.size());
    rec.norm = r.f64s(header_.times.size());
    return rec;
  }

  Wavefunction snapshot(std::size_t i, std::size_t probe) {
    if (probe >= header_.probe_times.size()) throw DataError("records: probe index out of range");
    seek(i, 8 * (header_.n_positions + 3 * header_.times.size() + probe * (1 + 2 * header_.grid.n)));
    BinaryReader r(in_, path_.string());
    Wavefunction psi;
    psi.grid = header_.grid;
    psi.time = r.f64();
    psi.amplitudes = r.complex(header_.grid.n);
    return psi;
  }

  std::vector<Wavefunction> snapshots_at(std::size_t probe) {
    std::vector<Wavefunction> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(snapshot(i, probe));
    return out;
  }

  /// Whole file in memory; for small ensembles and tests.
  EnsembleRecord load() {
    EnsembleRecord rec;
    rec.grid = header_.grid;
    for (std::size_t i = 0; i < size(); ++i) {
      rec.configs.push_back(configuration(i));
      Recording r = series(i);
      for (std::size_t p = 0; p < header_.probe_times.size(); ++p) r.snapshots.push_back(snapshot(i, p));
      rec.runs.push_back(std::move(r));
    }
    return rec;
  }

 private:
  void seek(std::size_t i, std::uint64_t offset) {
    if (i >= size()) throw DataError("records: configuration index out of range");
    in_.clear();
    in_.seekg(static_cast<std::streamoff>(data_begin_ + i * records_block_size(header_) + offset));
  }
  std::filesystem::path path_;
  std::ifstream in_;
  RecordsHeader header_;
  std::uint64_t data_begin_ = 0;
};

// ---------------------------------------------------------------- manifest

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Resolved configuration as nested JSON, values in atomic units.
inline nlohmann::json config_json(const RunConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& k : detail::key_table())
    if (k.get) j[k.section][k.key] = k.get(cfg);
  j["environment"]["n_p_resolved"] = resolved_perturber_count(cfg);
  return j;
}

/// manifest.json in the output directory; one entry per stage, replaced on rerun.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path dir) : path_(std::move(dir) / "manifest.json") {
    if (std::filesystem::exists(path_)) {
      std::ifstream in(path_);
      try {
        doc_ = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        std::cerr << "warning: ignoring unreadable manifest " << path_ << ": " << e.what() << '\n';
        doc_ = nlohmann::json::object();
      }
    }
    if (!doc_.is_object()) doc_ = nlohmann::json::object();
  }

  void set_config(const RunConfig& cfg) {
    doc_["version"] = kVersion;
    doc_["master_seed"] = cfg.master_seed;
    doc_["config"] = config_json(cfg);
    doc_["config_sha256"] = config_checksum(cfg);
  }

  void record_stage(const std::string& stage, const std::string& started,
                    const std::vector<std::filesystem::path>& outputs) {
    nlohmann::json entry;
    entry["started"] = started;
    entry["finished"] = utc_timestamp();
    entry["outputs"] = nlohmann::json::object();
    for (const auto& p : outputs) entry["outputs"][p.filename().string()] = sha256_file(p);
    doc_["stages"][stage] = entry;
  }

  /// Checksum a stage recorded for a file name, if any.
  std::optional<std::string> recorded(const std::string& stage, const std::string& file) const {
    if (!doc_.contains("stages") || !doc_["stages"].contains(stage)) return std::nullopt;
    const auto& outs = doc_["stages"][stage]["outputs"];
    if (!outs.contains(file)) return std::nullopt;
    return outs[file].get<std::string>();
  }

  void save() const {
    std::ofstream os(path_);
    if (!os) throw Error("cannot write " + path_.string());
    os << doc_.dump(2) << '\n';
  }

  const nlohmann::json& json() const { return doc_; }

 private:
  std::filesystem::path path_;
  nlohmann::json doc_ = nlohmann::json::object();
};

}  // namespace hhgdis
