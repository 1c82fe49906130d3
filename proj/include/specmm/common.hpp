#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace specmm {

// Error taxonomy. Every throwing contract in the library uses one of these so
// callers (and tests) can tell a bad generator request from a numeric failure.
struct invalid_generator_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct invalid_operator_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct contract_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// splitmix64 step; used both as a stream seeder and as a hash combiner.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ mix64(b));
}

// Deterministic RNG. mt19937_64 is fully specified by the standard; the
// uniform and gaussian draws below avoid std::*_distribution on purpose,
// since those are implementation-defined and would break byte-stable output
// across toolchains.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {  // [0,1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double gaussian() {  // Box-Muller, one value per call, cache the partner
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t bits() { return gen_(); }

    int sign() { return (gen_() & 1u) ? 1 : -1; }

    // Haar-distributed orthogonal matrix: QR of a gaussian matrix with the
    // R-diagonal sign fix; includes reflections (full O(n), not SO(n)).
    Eigen::MatrixXd haar_orthogonal(int n);

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Worker count for coarse-grained loops: min(hardware, SPECMM_THREADS).
int thread_budget();

}  // namespace specmm
