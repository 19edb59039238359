#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lrsci/types.hpp"

namespace lrsci::io {

/// LRSCI1 tensor container.
///
/// Layout: 7-byte magic "LRSCI1\n", 4-byte little-endian unsigned JSON
/// length L, L bytes of JSON metadata, then the raw little-endian payload
/// in row-major order (slowest-varying dimension first in `shape`).
/// Required metadata keys: kind (hsi|mask|meas|basis|subspace|weights),
/// dtype (f32|f64), shape. Optional: step, noise_sigma, plus free-form
/// keys (weights manifests live here).
struct TensorFile {
  std::string kind;
  std::string dtype = "f64";
  std::vector<std::int64_t> shape;
  std::optional<int> step;
  std::optional<double> noise_sigma;
  std::string extra_json; // serialized object with any additional keys
  std::vector<double> payload;

  std::int64_t element_count() const;
};

TensorFile load(const std::string &path);

/// Atomic write: the file appears complete or not at all.
void save(const std::string &path, const TensorFile &t);

// Typed conveniences. Cubes use shape [B, H, W] (canonical layout is the
// file byte order), masks/measurements [H, W], bases [B, k] (row-major is
// the band-major basis vector), subspaces [k, H, W] (one plane per rank).
void save_hsi(const std::string &path, const HsiCube &cube,
              const std::string &dtype = "f64");
HsiCube load_hsi(const std::string &path);

void save_mask(const std::string &path, const RowMajorMatrixXd &mask,
               const std::string &dtype = "f64");
RowMajorMatrixXd load_mask(const std::string &path);

void save_measurement(const std::string &path, const Measurement &meas,
                      int step, const std::string &dtype = "f64");
Measurement load_measurement(const std::string &path, int *step = nullptr);

void save_basis(const std::string &path, const MatrixXd &basis,
                const std::string &dtype = "f64");
MatrixXd load_basis(const std::string &path);

void save_subspace(const std::string &path, const MatrixXd &subspace,
                   int height, int width, const std::string &dtype = "f64");
MatrixXd load_subspace(const std::string &path, int *height = nullptr,
                       int *width = nullptr);

/// Writes a text file atomically (CSV reports, sidecar JSON).
void save_text(const std::string &path, const std::string &content);

} // namespace lrsci::io
