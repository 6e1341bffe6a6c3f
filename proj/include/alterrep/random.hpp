#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace alterrep {

/// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> streams) noexcept {
  std::uint64_t s = mix_seed(base);
  for (auto stream : streams) s = mix_seed(s ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
  return s;
}

inline Eigen::VectorXd gaussian_vector(long d, std::mt19937_64& rng, double sigma = 1.0) {
  std::normal_distribution<double> normal(0.0, sigma);
  Eigen::VectorXd v(d);
  for (long i = 0; i < d; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace alterrep
