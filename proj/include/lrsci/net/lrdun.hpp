#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lrsci/net/blocks.hpp"
#include "lrsci/types.hpp"

namespace lrsci::net {

struct NetConfig {
  int stages = 3;
  int rank = 11;    // physical rank k
  int channels = 16; // feature dimension C >= k
  bool share_weights = false;
  int unet_depth = 2;   // number of scales in the subspace proxy
  int scab_kernel = 11; // attention kernel (odd)
  std::uint64_t seed = 0;

  void validate() const;
};

/// Lifted optimization state: spectral features B x C and spatial
/// features H x W x C. The first `rank` channels are the physical
/// component, the remainder the auxiliary carrier; the partition is
/// positional and fixed.
struct FeatureState {
  MatrixXd basis_feat; // B x C
  FeatureMap subspace_feat;
  int rank = 0;
};

/// Positional channel split of a lifted feature block.
struct SplitFeat {
  MatrixXd physical, auxiliary;
};
SplitFeat gfum_split(const MatrixXd &feat, int rank);
MatrixXd gfum_concat(const MatrixXd &physical, const MatrixXd &auxiliary);

struct StageOutput {
  MatrixXd basis;    // B x k, orthonormal
  MatrixXd subspace; // HW x k
  HsiCube cube;      // composed reconstruction of this stage
};

double multi_stage_loss(const std::vector<StageOutput> &stages,
                        const HsiCube &truth,
                        std::vector<MatrixXd> *cube_grads = nullptr);

struct CountResult {
  std::int64_t params = 0;
  std::int64_t macs = 0;
  std::int64_t flops = 0; // 2 * macs
};

/// Analytic parameter/compute accounting for a configuration at the given
/// spatial size. MACs cover convolutions, matrix products and the
/// data-fidelity operators (mask multiply + shifted accumulation + factor
/// contractions); norms, activations and the QR are not counted.
/// Convolution positions are counted on the padded grid.
CountResult count_params_flops(const NetConfig &cfg, int height, int width);

/// The unfolded reconstruction network. Stages alternate a basis update
/// (data-fidelity feature step, then the spectral proxy) and a subspace
/// update (data-fidelity feature step, then the spatial proxy). Feature
/// lifting keeps the physical slice on the classical gradient path while
/// auxiliary channels pass through data-fidelity steps untouched.
class LrdunNet {
public:
  explicit LrdunNet(const NetConfig &cfg);

  const NetConfig &config() const { return cfg_; }
  ParamStore &params() { return store_; }
  const ParamStore &params() const { return store_; }

  /// Initializes per-stage step sizes to 0.9 / L-hat measured by power
  /// iteration on the classical init factors of the given measurement.
  void calibrate_step_sizes(const Measurement &y, const SensingSpec &spec);

  struct ForwardCtx; // stage activations for the backward pass

  struct Result {
    std::vector<StageOutput> stages;
    bool padded = false; // spatial dims were reflect-padded internally
  };

  Result forward(const Measurement &y, const SensingSpec &spec,
                 ForwardCtx *ctx = nullptr) const;

  /// Accumulates parameter gradients given per-stage cube gradients
  /// (each HW x B, matching StageOutput::cube.as_matrix()).
  void backward(const ForwardCtx &ctx,
                const std::vector<MatrixXd> &cube_grads) const;

  void save_weights(const std::string &path) const;
  static LrdunNet load_weights(const std::string &path);

  ~LrdunNet();
  LrdunNet(LrdunNet &&) noexcept;
  LrdunNet &operator=(LrdunNet &&) noexcept;

private:
  struct Modules;
  const Modules &stage_modules(int stage) const;

  NetConfig cfg_;
  ParamStore store_;
  std::vector<std::unique_ptr<Modules>> modules_;
  std::unique_ptr<Conv1d> lift_basis_;   // k -> C pointwise, identity top
  std::unique_ptr<Conv2d> lift_subspace_; // (k+1) -> C, 3x3, identity top
  std::vector<Parameter *> rho_basis_raw_, rho_subspace_raw_;
};

} // namespace lrsci::net
