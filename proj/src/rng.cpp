#include "mixprobit/rng.hpp"

#include <cmath>
#include <sstream>

#include "mixprobit/error.hpp"

namespace mixprobit {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32),
                    0x6d697870u};
  return std::mt19937_64(seq);
}

// SplitMix64 finalizer; mixes parent and child ids into a child stream id.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

RngStream RngStream::substream(std::uint64_t stream) const {
  return RngStream(seed_, mix(stream_ ^ mix(stream + 1)));
}

double RngStream::uniform() {
  // 53 random bits centred in their cell, so 0 and 1 are never returned.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) throw UsageError("gamma shape must be positive");
  if (shape < 1.0) {
    // Boost to shape + 1 and rescale by U^(1/shape).
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::size_t RngStream::categorical(const double* weights, std::size_t count) {
  double total = 0.0;
  for (std::size_t k = 0; k < count; ++k) total += weights[k];
  double target = uniform() * total;
  for (std::size_t k = 0; k + 1 < count; ++k) {
    target -= weights[k];
    if (target < 0.0) return k;
  }
  return count - 1;
}

std::string RngStream::save_state() const {
  std::ostringstream out;
  out.precision(17);
  out << seed_ << ' ' << stream_ << ' ' << has_spare_ << ' ' << spare_ << ' '
      << engine_;
  return out.str();
}

void RngStream::load_state(const std::string& state) {
  std::istringstream in(state);
  in >> seed_ >> stream_ >> has_spare_ >> spare_ >> engine_;
  if (!in) throw DataError("corrupt random stream state");
}

}  // namespace mixprobit
