#include "pmetube/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pmetube/numerics.hpp"

namespace pmetube {

using nlohmann::json;
namespace fs = std::filesystem;

std::string tool_version() { return "pmetube 1.0.0"; }

void ensure_directory(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw io_failure("cannot create directory " + path + ": " + ec.message());
}

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_failure("cannot open " + path + " for hashing");
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h = fnv1a64(reinterpret_cast<const unsigned char*>(buf),
                static_cast<std::size_t>(in.gcount()), h);
  }
  return h;
}

std::string hash_string(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016" PRIx64, h);
  return buf;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_failure("cannot write " + path);
  out << text;
  if (!out) throw io_failure("write failed for " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_failure("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

constexpr char kSnapshotMagic[8] = {'P', 'M', 'T', 'B', 'F', '1', '\n', '\0'};

void put_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_f64(std::ofstream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint64_t get_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
double get_f64(std::ifstream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

void write_field_binary(const std::string& path, const TubeField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_failure("cannot write " + path);
  out.write(kSnapshotMagic, sizeof kSnapshotMagic);
  put_u64(out, static_cast<std::uint64_t>(f.nz()));
  put_u64(out, static_cast<std::uint64_t>(f.ny()));
  put_f64(out, f.grid.section.length);
  put_f64(out, f.grid.y_min);
  put_f64(out, f.grid.y_max);
  put_f64(out, f.time);
  put_f64(out, f.m);
  put_f64(out, f.t0);
  put_u64(out, f.variable == Variable::physical_u ? 0 : 1);
  put_u64(out, f.frame == Frame::lab ? 0 : 1);
  put_f64(out, f.frame_speed);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!out) throw io_failure("write failed for " + path);
}

TubeField read_field_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_failure("cannot read " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0) {
    throw io_failure(path + " is not a field dump");
  }
  const auto nz = static_cast<int>(get_u64(in));
  const auto ny = static_cast<int>(get_u64(in));
  const double L = get_f64(in);
  const double y_min = get_f64(in);
  const double y_max = get_f64(in);
  const double time = get_f64(in);
  const double m = get_f64(in);
  const double t0 = get_f64(in);
  const auto var = get_u64(in) == 0 ? Variable::physical_u : Variable::rescaled_v;
  const auto frame = get_u64(in) == 0 ? Frame::lab : Frame::comoving;
  const double speed = get_f64(in);
  TubeGrid grid = TubeGrid::make(SectionGrid::make(L, nz), y_min, y_max, ny);
  TubeField f = make_field(grid, m, var, time, frame, speed, t0);
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!in) throw io_failure("truncated field dump " + path);
  return f;
}

}  // namespace

void write_profile(const std::string& dir, const SectionProfile& p, const std::string& stem) {
  ensure_directory(dir);
  std::ostringstream csv;
  csv << "z,phi\n";
  for (int i = 0; i < p.grid.n; ++i) {
    csv << fmt(p.grid.node(i)) << ',' << fmt(p.phi[i]) << '\n';
  }
  write_text(dir + "/" + stem + ".csv", csv.str());
  json meta = {{"L", p.grid.length}, {"m", p.m},         {"n", p.grid.n},
               {"lambda1", p.lambda1}, {"cstar", p.cstar}, {"sup_phi", p.sup_phi}};
  write_text(dir + "/" + stem + ".json", meta.dump(2) + "\n");
}

SectionProfile read_profile(const std::string& dir, const std::string& stem) {
  json meta = json::parse(read_text(dir + "/" + stem + ".json"));
  SectionProfile p;
  p.grid = SectionGrid::make(meta.at("L").get<double>(), meta.at("n").get<int>());
  p.m = meta.at("m").get<double>();
  p.lambda1 = meta.at("lambda1").get<double>();
  p.cstar = meta.at("cstar").get<double>();
  p.sup_phi = meta.at("sup_phi").get<double>();
  std::istringstream csv(read_text(dir + "/" + stem + ".csv"));
  std::string line;
  std::getline(csv, line);  // header
  p.phi.clear();
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw io_failure("malformed profile row: " + line);
    p.phi.push_back(std::stod(line.substr(comma + 1)));
  }
  if (static_cast<int>(p.phi.size()) != p.grid.n) {
    throw io_failure("profile row count does not match n");
  }
  return p;
}

std::string write_snapshot(const std::string& dir, const TubeField& f, std::size_t index) {
  ensure_directory(dir);
  char name[64];
  std::snprintf(name, sizeof name, "snapshot_%04zu", index);
  const std::string base = dir + "/" + name;
  write_field_binary(base + ".bin", f);
  json meta = {{"tau", f.time},
               {"frame", f.frame == Frame::lab ? "lab" : "comoving"},
               {"frame_speed", f.frame_speed},
               {"variable", f.variable == Variable::physical_u ? "physical-u" : "rescaled-v"},
               {"m", f.m},
               {"t0", f.t0},
               {"grid",
                {{"L", f.grid.section.length},
                 {"n", f.grid.section.n},
                 {"y_min", f.grid.y_min},
                 {"y_max", f.grid.y_max},
                 {"ny", f.grid.ny}}},
               {"file", std::string(name) + ".bin"},
               {"hash", hash_string(hash_file(base + ".bin"))}};
  write_text(base + ".json", meta.dump(2) + "\n");
  return base + ".bin";
}

TubeField read_snapshot(const std::string& path) { return read_field_binary(path); }

void export_snapshot_csv(const std::string& path, const TubeField& f) {
  std::ostringstream csv;
  csv << "z,y,value\n";
  for (int i = 0; i < f.nz(); ++i) {
    for (int j = 0; j < f.ny(); ++j) {
      csv << fmt(f.grid.section.node(i)) << ',' << fmt(f.grid.y(j)) << ','
          << fmt(f.at(i, j)) << '\n';
    }
  }
  write_text(path, csv.str());
}

void write_wave(const std::string& dir, const WaveProfile& w, const std::string& stem) {
  ensure_directory(dir);
  TubeGrid grid = TubeGrid::make(w.section, w.xi_min, w.xi_max, w.n_xi);
  TubeField f = make_field(grid, w.m, Variable::rescaled_v, 0, Frame::comoving, w.speed);
  f.values = w.values;
  write_field_binary(dir + "/" + stem + ".bin", f);
  json meta = {{"L", w.section.length},   {"n", w.section.n},
               {"m", w.m},                {"xi_min", w.xi_min},
               {"xi_max", w.xi_max},      {"n_xi", w.n_xi},
               {"speed", w.speed},        {"xi0", w.xi0},
               {"normalized", w.normalized},
               {"front_threshold", w.front_threshold},
               {"drift_rate", w.drift_rate},
               {"final_residual", w.final_residual},
               {"file", stem + ".bin"},
               {"hash", hash_string(hash_file(dir + "/" + stem + ".bin"))}};
  write_text(dir + "/" + stem + ".json", meta.dump(2) + "\n");
  std::ostringstream csv;
  csv << "z,gamma\n";
  for (int i = 0; i < w.section.n; ++i) {
    csv << fmt(w.section.node(i)) << ','
        << (is_empty_front(w.front[i]) ? std::string("") : fmt(w.front[i])) << '\n';
  }
  write_text(dir + "/" + stem + "_front.csv", csv.str());
}

WaveProfile read_wave(const std::string& dir, const std::string& stem) {
  json meta = json::parse(read_text(dir + "/" + stem + ".json"));
  TubeField f = read_field_binary(dir + "/" + meta.at("file").get<std::string>());
  WaveProfile w;
  w.section = f.grid.section;
  w.m = f.m;
  w.xi_min = f.grid.y_min;
  w.xi_max = f.grid.y_max;
  w.n_xi = f.grid.ny;
  w.values = std::move(f.values);
  w.speed = meta.at("speed").get<double>();
  w.xi0 = meta.at("xi0").get<double>();
  w.normalized = meta.at("normalized").get<bool>();
  w.front_threshold = meta.at("front_threshold").get<double>();
  w.drift_rate = meta.at("drift_rate").get<double>();
  w.final_residual = meta.at("final_residual").get<double>();
  w.front = front_curve(w, w.front_threshold);
  return w;
}

void write_barrier(const std::string& dir, const BarrierPath& p, const std::string& stem) {
  ensure_directory(dir);
  std::ostringstream csv;
  csv << "tau,f,g,g_minus_cstar_tau\n";
  for (std::size_t k = 0; k < p.f.size(); ++k) {
    const double tau = p.dtau * static_cast<double>(k);
    csv << fmt(tau) << ',' << fmt(p.f[k]) << ',' << fmt(p.g[k]) << ','
        << fmt(p.g[k] - p.params.cstar * tau) << '\n';
  }
  write_text(dir + "/" + stem + ".csv", csv.str());
  json meta = {{"kind", p.params.kind == BarrierKind::sub ? "sub" : "super"},
               {"m", p.params.m},
               {"cstar", p.params.cstar},
               {"f0", p.params.f0},
               {"g0", p.params.g0},
               {"delta0", p.params.delta0},
               {"dtau", p.dtau},
               {"samples", p.f.size()},
               {"predicted_shift", p.predicted_shift}};
  write_text(dir + "/" + stem + ".json", meta.dump(2) + "\n");
}

BarrierPath read_barrier(const std::string& dir, const std::string& stem) {
  json meta = json::parse(read_text(dir + "/" + stem + ".json"));
  BarrierPath p;
  p.params.kind = meta.at("kind").get<std::string>() == "sub" ? BarrierKind::sub
                                                              : BarrierKind::super;
  p.params.m = meta.at("m").get<double>();
  p.params.cstar = meta.at("cstar").get<double>();
  p.params.f0 = meta.at("f0").get<double>();
  p.params.g0 = meta.at("g0").get<double>();
  p.params.delta0 = meta.at("delta0").get<double>();
  p.dtau = meta.at("dtau").get<double>();
  p.predicted_shift = meta.at("predicted_shift").get<double>();
  std::istringstream csv(read_text(dir + "/" + stem + ".csv"));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    p.f.push_back(std::stod(cell));
    std::getline(row, cell, ',');
    p.g.push_back(std::stod(cell));
  }
  return p;
}

void write_error_series(const std::string& path, const ErrorSeries& s) {
  std::ostringstream csv;
  csv << "tau,c,error,count\n";
  for (const auto& e : s.samples) {
    if (e.empty) continue;
    csv << fmt(e.tau) << ',' << fmt(e.c) << ',' << fmt(e.error) << ',' << e.count << '\n';
  }
  write_text(path, csv.str());
}

void write_front_series(const std::string& path, const FrontSeries& s,
                        const SectionGrid& section) {
  std::ostringstream csv;
  csv << "tau,z,gamma\n";
  for (const auto& sample : s.samples) {
    for (std::size_t i = 0; i < sample.gamma.size(); ++i) {
      if (is_empty_front(sample.gamma[i])) continue;
      csv << fmt(sample.tau) << ',' << fmt(section.node(static_cast<int>(i))) << ','
          << fmt(sample.gamma[i]) << '\n';
    }
  }
  write_text(path, csv.str());
}

std::string run_config_to_json(const RunConfig& c) {
  const char* kind = "phi-bump";
  switch (c.datum.kind) {
    case DatumKind::phi_bump: kind = "phi-bump"; break;
    case DatumKind::plateau: kind = "plateau"; break;
    case DatumKind::two_bump: kind = "two-bump"; break;
    case DatumKind::csv: kind = "csv"; break;
  }
  json j = {{"grid",
             {{"L", c.grid.section.length},
              {"n", c.grid.section.n},
              {"y_min", c.grid.y_min},
              {"y_max", c.grid.y_max},
              {"ny", c.grid.ny}}},
            {"m", c.m},
            {"t0", c.t0},
            {"datum",
             {{"kind", kind},
              {"amplitude", c.datum.amplitude},
              {"width", c.datum.width},
              {"separation", c.datum.separation},
              {"center", c.datum.center},
              {"csv_path", c.datum.csv_path}}},
            {"frame", c.frame == Frame::lab ? "lab" : "comoving"},
            {"frame_speed", c.frame_speed},
            {"tau_end", c.tau_end},
            {"snapshot_dtau", c.snapshot_dtau},
            {"safety", c.safety},
            {"support_threshold_rel", c.support_threshold_rel},
            {"support_guard_nodes", c.support_guard_nodes}};
  return j.dump(2);
}

RunConfig run_config_from_json(const std::string& text) {
  json j = json::parse(text);
  static const char* known[] = {"grid", "m", "t0", "datum", "frame", "frame_speed",
                                "tau_end", "snapshot_dtau", "safety",
                                "support_threshold_rel", "support_guard_nodes"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw invalid_parameter("unknown config key: " + it.key());
  }
  RunConfig c;
  const auto& g = j.at("grid");
  c.grid = TubeGrid::make(
      SectionGrid::make(g.at("L").get<double>(), g.at("n").get<int>()),
      g.at("y_min").get<double>(), g.at("y_max").get<double>(), g.at("ny").get<int>());
  c.m = j.at("m").get<double>();
  c.t0 = j.value("t0", 0.0);
  if (j.contains("datum")) {
    const auto& d = j.at("datum");
    const std::string kind = d.value("kind", "phi-bump");
    if (kind == "phi-bump") c.datum.kind = DatumKind::phi_bump;
    else if (kind == "plateau") c.datum.kind = DatumKind::plateau;
    else if (kind == "two-bump") c.datum.kind = DatumKind::two_bump;
    else if (kind == "csv") c.datum.kind = DatumKind::csv;
    else throw invalid_parameter("unknown datum kind: " + kind);
    c.datum.amplitude = d.value("amplitude", 0.5);
    c.datum.width = d.value("width", 1.0);
    c.datum.separation = d.value("separation", 4.0);
    c.datum.center = d.value("center", 0.0);
    c.datum.csv_path = d.value("csv_path", std::string());
  }
  const std::string frame = j.value("frame", "lab");
  if (frame == "lab") c.frame = Frame::lab;
  else if (frame == "comoving") c.frame = Frame::comoving;
  else throw invalid_parameter("unknown frame: " + frame);
  c.frame_speed = j.value("frame_speed", 0.0);
  c.tau_end = j.at("tau_end").get<double>();
  c.snapshot_dtau = j.value("snapshot_dtau", 0.5);
  c.safety = j.value("safety", 0.9);
  c.support_threshold_rel = j.value("support_threshold_rel", 1e-10);
  c.support_guard_nodes = j.value("support_guard_nodes", 5);
  return c;
}

void write_run_manifest(const std::string& dir, const RunRecord& rec) {
  ensure_directory(dir);
  write_profile(dir, rec.profile);
  json snaps = json::array();
  for (std::size_t i = 0; i < rec.snapshot_paths.size(); ++i) {
    snaps.push_back({{"tau", rec.snapshot_times[i]},
                     {"path", fs::path(rec.snapshot_paths[i]).filename().string()},
                     {"hash", hash_string(hash_file(rec.snapshot_paths[i]))}});
  }
  json j = {{"version", tool_version()},
            {"config", json::parse(run_config_to_json(rec.config))},
            {"t0_used", rec.t0_used},
            {"tau_start", rec.tau_start},
            {"steps", rec.steps},
            {"clamps", rec.clamps},
            {"wall_seconds", rec.wall_seconds},
            {"snapshots", snaps}};
  write_text(dir + "/run.json", j.dump(2) + "\n");
}

RunRecord read_run(const std::string& dir) {
  json j = json::parse(read_text(dir + "/run.json"));
  RunRecord rec;
  rec.config = run_config_from_json(j.at("config").dump());
  rec.profile = read_profile(dir);
  rec.t0_used = j.at("t0_used").get<double>();
  rec.tau_start = j.at("tau_start").get<double>();
  rec.steps = j.at("steps").get<long long>();
  rec.clamps = j.at("clamps").get<long long>();
  rec.wall_seconds = j.at("wall_seconds").get<double>();
  for (const auto& s : j.at("snapshots")) {
    const std::string path = dir + "/" + s.at("path").get<std::string>();
    const std::string expect = s.at("hash").get<std::string>();
    if (hash_string(hash_file(path)) != expect) {
      throw io_failure("snapshot hash mismatch for " + path);
    }
    rec.snapshot_times.push_back(s.at("tau").get<double>());
    rec.snapshot_paths.push_back(path);
    rec.snapshots.push_back(read_snapshot(path));
  }
  return rec;
}

TubeField load_field_csv(const std::string& path, const TubeGrid& grid, double m) {
  std::istringstream csv(read_text(path));
  TubeField f = make_field(grid, m, Variable::physical_u, 0.0);
  std::string line;
  std::getline(csv, line);
  if (line.rfind("z,y,value", 0) != 0) throw io_failure("field CSV must start with z,y,value");
  const double hz = grid.section.h(), hy = grid.hy();
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    const double z = std::stod(cell);
    std::getline(row, cell, ',');
    const double y = std::stod(cell);
    std::getline(row, cell, ',');
    const double val = std::stod(cell);
    const int i = static_cast<int>(std::lround(z / hz));
    const int j = static_cast<int>(std::lround((y - grid.y_min) / hy));
    if (i < 0 || i >= grid.section.n || j < 0 || j >= grid.ny ||
        std::abs(z - grid.section.node(i)) > 1e-9 * std::max(1.0, std::abs(z)) ||
        std::abs(y - grid.y(j)) > 1e-9 * std::max(1.0, std::abs(y))) {
      throw io_failure("field CSV coordinates do not match the grid: " + line);
    }
    if (val < 0) throw io_failure("field CSV carries a negative value: " + line);
    f.at(i, j) = val;
  }
  return f;
}

}  // namespace pmetube
