#include "lrsci/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace lrsci::io {

static_assert(std::endian::native == std::endian::little,
              "LRSCI1 payloads are little-endian; big-endian hosts are "
              "not supported");

namespace {

constexpr char kMagic[7] = {'L', 'R', 'S', 'C', 'I', '1', '\n'};

const std::vector<std::string> kKinds = {"hsi",   "mask",     "meas",
                                         "basis", "subspace", "weights"};

void require_kind(const std::string &kind) {
  for (const auto &k : kKinds)
    if (k == kind) return;
  throw IoError("LRSCI1: unknown kind '" + kind + "'");
}

class AtomicFile {
public:
  explicit AtomicFile(const std::string &path)
      : path_(path), tmp_(path + ".tmp"),
        out_(tmp_, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open for writing: " + tmp_);
  }
  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }
  std::ofstream &stream() { return out_; }
  void commit() {
    out_.flush();
    if (!out_) throw IoError("write failed: " + tmp_);
    out_.close();
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
  }

private:
  std::string path_, tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

} // namespace

std::int64_t TensorFile::element_count() const {
  std::int64_t n = 1;
  for (const auto d : shape) {
    if (d < 1) throw IoError("LRSCI1: nonpositive shape entry");
    n *= d;
  }
  return n;
}

void save(const std::string &path, const TensorFile &t) {
  require_kind(t.kind);
  if (t.dtype != "f32" && t.dtype != "f64")
    throw IoError("LRSCI1: dtype must be f32 or f64");
  if (t.element_count() != static_cast<std::int64_t>(t.payload.size()))
    throw IoError("LRSCI1: payload size does not match shape");

  nlohmann::json meta;
  if (!t.extra_json.empty()) {
    meta = nlohmann::json::parse(t.extra_json);
    if (!meta.is_object()) throw IoError("LRSCI1: extra metadata not an object");
  }
  meta["kind"] = t.kind;
  meta["dtype"] = t.dtype;
  meta["shape"] = t.shape;
  if (t.step) meta["step"] = *t.step;
  if (t.noise_sigma) meta["noise_sigma"] = *t.noise_sigma;
  const std::string json = meta.dump();
  if (json.size() > UINT32_MAX) throw IoError("LRSCI1: metadata too large");

  AtomicFile file(path);
  auto &os = file.stream();
  os.write(kMagic, sizeof(kMagic));
  const std::uint32_t len = static_cast<std::uint32_t>(json.size());
  os.write(reinterpret_cast<const char *>(&len), 4);
  os.write(json.data(), static_cast<std::streamsize>(json.size()));

  if (t.dtype == "f64") {
    os.write(reinterpret_cast<const char *>(t.payload.data()),
             static_cast<std::streamsize>(t.payload.size() * 8));
  } else {
    std::vector<float> f(t.payload.begin(), t.payload.end());
    os.write(reinterpret_cast<const char *>(f.data()),
             static_cast<std::streamsize>(f.size() * 4));
  }
  file.commit();
}

TensorFile load(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);

  char magic[7];
  is.read(magic, 7);
  if (!is || std::memcmp(magic, kMagic, 7) != 0)
    throw IoError("not an LRSCI1 file: " + path);

  std::uint32_t len = 0;
  is.read(reinterpret_cast<char *>(&len), 4);
  if (!is) throw IoError("truncated header: " + path);
  std::string json(len, '\0');
  is.read(json.data(), len);
  if (!is) throw IoError("truncated metadata: " + path);

  nlohmann::json meta = nlohmann::json::parse(json, nullptr, false);
  if (meta.is_discarded() || !meta.is_object())
    throw IoError("bad metadata JSON: " + path);

  TensorFile t;
  try {
    t.kind = meta.at("kind").get<std::string>();
    t.dtype = meta.at("dtype").get<std::string>();
    t.shape = meta.at("shape").get<std::vector<std::int64_t>>();
  } catch (const nlohmann::json::exception &e) {
    throw IoError("missing/invalid required metadata in " + path + ": " +
                  e.what());
  }
  require_kind(t.kind);
  if (t.dtype != "f32" && t.dtype != "f64")
    throw IoError("bad dtype in " + path);
  if (meta.contains("step")) t.step = meta["step"].get<int>();
  if (meta.contains("noise_sigma"))
    t.noise_sigma = meta["noise_sigma"].get<double>();
  nlohmann::json extra = meta;
  for (const char *k : {"kind", "dtype", "shape", "step", "noise_sigma"})
    extra.erase(k);
  if (!extra.empty()) t.extra_json = extra.dump();

  const std::int64_t n = t.element_count();
  t.payload.resize(static_cast<std::size_t>(n));
  if (t.dtype == "f64") {
    is.read(reinterpret_cast<char *>(t.payload.data()),
            static_cast<std::streamsize>(n * 8));
  } else {
    std::vector<float> f(static_cast<std::size_t>(n));
    is.read(reinterpret_cast<char *>(f.data()),
            static_cast<std::streamsize>(n * 4));
    for (std::int64_t i = 0; i < n; ++i) t.payload[i] = f[i];
  }
  if (!is) throw IoError("truncated payload: " + path);
  return t;
}

void save_hsi(const std::string &path, const HsiCube &cube,
              const std::string &dtype) {
  TensorFile t;
  t.kind = "hsi";
  t.dtype = dtype;
  t.shape = {cube.bands(), cube.height(), cube.width()};
  t.payload.assign(cube.data(), cube.data() + cube.size());
  save(path, t);
}

HsiCube load_hsi(const std::string &path) {
  const TensorFile t = load(path);
  if (t.kind != "hsi" || t.shape.size() != 3)
    throw IoError("expected an hsi tensor: " + path);
  HsiCube cube(static_cast<int>(t.shape[1]), static_cast<int>(t.shape[2]),
               static_cast<int>(t.shape[0]));
  std::copy(t.payload.begin(), t.payload.end(), cube.data());
  return cube;
}

void save_mask(const std::string &path, const RowMajorMatrixXd &mask,
               const std::string &dtype) {
  TensorFile t;
  t.kind = "mask";
  t.dtype = dtype;
  t.shape = {mask.rows(), mask.cols()};
  t.payload.assign(mask.data(), mask.data() + mask.size());
  save(path, t);
}

RowMajorMatrixXd load_mask(const std::string &path) {
  const TensorFile t = load(path);
  if (t.kind != "mask" || t.shape.size() != 2)
    throw IoError("expected a mask tensor: " + path);
  RowMajorMatrixXd m(t.shape[0], t.shape[1]);
  std::copy(t.payload.begin(), t.payload.end(), m.data());
  return m;
}

void save_measurement(const std::string &path, const Measurement &meas,
                      int step, const std::string &dtype) {
  TensorFile t;
  t.kind = "meas";
  t.dtype = dtype;
  t.shape = {meas.data.rows(), meas.data.cols()};
  t.step = step;
  t.noise_sigma = meas.noise_sigma;
  t.payload.assign(meas.data.data(), meas.data.data() + meas.data.size());
  save(path, t);
}

Measurement load_measurement(const std::string &path, int *step) {
  const TensorFile t = load(path);
  if (t.kind != "meas" || t.shape.size() != 2)
    throw IoError("expected a meas tensor: " + path);
  Measurement m;
  m.data.resize(t.shape[0], t.shape[1]);
  std::copy(t.payload.begin(), t.payload.end(), m.data.data());
  if (t.noise_sigma) m.noise_sigma = *t.noise_sigma;
  if (step) *step = t.step.value_or(0);
  return m;
}

void save_basis(const std::string &path, const MatrixXd &basis,
                const std::string &dtype) {
  TensorFile t;
  t.kind = "basis";
  t.dtype = dtype;
  t.shape = {basis.rows(), basis.cols()};
  // row-major file order = band-major basis vector
  const RowMajorMatrixXd rm = basis;
  t.payload.assign(rm.data(), rm.data() + rm.size());
  save(path, t);
}

MatrixXd load_basis(const std::string &path) {
  const TensorFile t = load(path);
  if (t.kind != "basis" || t.shape.size() != 2)
    throw IoError("expected a basis tensor: " + path);
  RowMajorMatrixXd rm(t.shape[0], t.shape[1]);
  std::copy(t.payload.begin(), t.payload.end(), rm.data());
  return rm;
}

void save_subspace(const std::string &path, const MatrixXd &subspace,
                   int height, int width, const std::string &dtype) {
  if (subspace.rows() != static_cast<Eigen::Index>(height) * width)
    throw InvalidArgument("save_subspace: H*W != rows");
  TensorFile t;
  t.kind = "subspace";
  t.dtype = dtype;
  t.shape = {subspace.cols(), height, width};
  // column-major factor = one contiguous plane per rank, matching the
  // [k, H, W] file order exactly
  t.payload.assign(subspace.data(), subspace.data() + subspace.size());
  save(path, t);
}

MatrixXd load_subspace(const std::string &path, int *height, int *width) {
  const TensorFile t = load(path);
  if (t.kind != "subspace" || t.shape.size() != 3)
    throw IoError("expected a subspace tensor: " + path);
  MatrixXd m(t.shape[1] * t.shape[2], t.shape[0]);
  std::copy(t.payload.begin(), t.payload.end(), m.data());
  if (height) *height = static_cast<int>(t.shape[1]);
  if (width) *width = static_cast<int>(t.shape[2]);
  return m;
}

void save_text(const std::string &path, const std::string &content) {
  AtomicFile file(path);
  file.stream() << content;
  file.commit();
}

} // namespace lrsci::io
