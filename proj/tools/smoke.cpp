#include <iostream>
#include "lrsci/cassi.hpp"
#include "lrsci/datakit.hpp"
#include "lrsci/kernels.hpp"
#include "lrsci/lowrank.hpp"
#include "lrsci/solver.hpp"

int main() {
  using namespace lrsci;
  std::cout << "isa: " << kernels::isa_name(kernels::active_isa()) << "\n";
  auto synth = data::synth_hsi({.height = 16, .width = 16, .bands = 8, .rank = 3, .smoothness = 3.0, .seed = 1});
  auto spec = SensingSpec::make(data::random_mask(16, 16, 2), 8, 2);
  auto y = cassi::forward(synth.cube, spec);
  auto z = cassi::adjoint(y, spec);
  std::cout << "y норм" << y.data.norm() << " z " << z.vec().norm() << "\n";
  auto f = lowrank::decompose_truncated_svd(synth.cube, 3);
  auto rec = lowrank::compose(f.subspace, f.basis, 16, 16);
  std::cout << "tsvd rel err: " << (rec.vec() - synth.cube.vec()).norm() / synth.cube.vec().norm() << "\n";
  std::cout << "psnr self: " << data::psnr(synth.cube, synth.cube) << "\n";
  return 0;
}
