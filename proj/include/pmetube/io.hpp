#pragma once

// Artifact persistence:
//   * profiles: CSV `z,phi` plus a JSON sidecar {L, m, n, lambda1, cstar, sup_phi}
//   * snapshots: compact binary field dumps plus JSON metadata, with a CSV
//     export (`z,y,value`) for external plotters
//   * wave profiles: the snapshot layout with `xi` in place of `y`, plus a
//     front CSV `z,gamma`
//   * barrier paths: CSV `tau,f,g,g_minus_cstar_tau` with a JSON params sidecar
//   * runs: a JSON manifest with config echo, artifact paths, and FNV-1a
//     content hashes.

#include <cstdint>
#include <string>
#include <vector>

#include "pmetube/barriers.hpp"
#include "pmetube/dynamics.hpp"
#include "pmetube/section.hpp"
#include "pmetube/series.hpp"
#include "pmetube/types.hpp"
#include "pmetube/waves.hpp"

namespace pmetube {

std::string tool_version();

std::uint64_t hash_file(const std::string& path);
std::string hash_string(std::uint64_t h);

void ensure_directory(const std::string& path);

// ---- profiles --------------------------------------------------------------
void write_profile(const std::string& dir, const SectionProfile& p,
                   const std::string& stem = "profile");
SectionProfile read_profile(const std::string& dir, const std::string& stem = "profile");

// ---- snapshots -------------------------------------------------------------
std::string write_snapshot(const std::string& dir, const TubeField& f, std::size_t index);
TubeField read_snapshot(const std::string& path);
void export_snapshot_csv(const std::string& path, const TubeField& f);

// ---- waves -----------------------------------------------------------------
void write_wave(const std::string& dir, const WaveProfile& w, const std::string& stem = "wave");
WaveProfile read_wave(const std::string& dir, const std::string& stem = "wave");

// ---- barriers --------------------------------------------------------------
void write_barrier(const std::string& dir, const BarrierPath& p,
                   const std::string& stem = "barrier");
BarrierPath read_barrier(const std::string& dir, const std::string& stem = "barrier");

// ---- series ----------------------------------------------------------------
void write_error_series(const std::string& path, const ErrorSeries& s);
void write_front_series(const std::string& path, const FrontSeries& s,
                        const SectionGrid& section);

// ---- runs ------------------------------------------------------------------
void write_run_manifest(const std::string& dir, const RunRecord& rec);
// Reads the manifest and reloads every snapshot listed in it.
RunRecord read_run(const std::string& dir);

std::string run_config_to_json(const RunConfig& c);
RunConfig run_config_from_json(const std::string& text);

// CSV field import `z,y,value` onto a given grid (nearest-node placement,
// exact grid match required).
TubeField load_field_csv(const std::string& path, const TubeGrid& grid, double m);

}  // namespace pmetube
