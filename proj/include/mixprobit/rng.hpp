#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace mixprobit {

// Seedable stream of uniform, normal and gamma variates. Substreams are
// derived deterministically from (seed, stream id) so replications and pilot
// chains can run concurrently without sharing state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0);

  RngStream substream(std::uint64_t stream) const;

  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  // Gamma with unit scale (Marsaglia-Tsang).
  double gamma(double shape);
  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }
  bool bernoulli(double p) { return uniform() < p; }
  // Index drawn from unnormalized nonnegative weights.
  std::size_t categorical(const double* weights, std::size_t count);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  // Full engine state as text; restoring continues the exact sequence.
  std::string save_state() const;
  void load_state(const std::string& state);

  friend bool operator==(const RngStream& a, const RngStream& b) {
    return a.engine_ == b.engine_ && a.has_spare_ == b.has_spare_ &&
           (!a.has_spare_ || a.spare_ == b.spare_);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mixprobit
