#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace steinpi {

// Counter-based generator (Philox4x32-10). A generator is identified by a
// 64-bit key and a 128-bit counter split into (position, block). Draws for
// a given (key, position) never depend on how many draws were taken at other
// positions, which is what makes per-step and per-replicate streams
// reproducible independently of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Independent stream derived from this one; tags are arbitrary labels such
  // as a replicate index or epoch number.
  Rng substream(std::uint64_t tag) const;

  // Fresh generator at the start of `position` on the same key.
  Rng at(std::uint64_t position) const;

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  Eigen::VectorXd normal_vector(Eigen::Index d);
  std::size_t uniform_index(std::size_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return position_; }

 private:
  Rng(std::uint64_t key, std::uint64_t position, int /*tag*/);
  void refill();

  std::uint64_t key_ = 0;
  std::uint64_t position_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// One application of the Philox4x32-10 bijection; exposed for tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace steinpi
