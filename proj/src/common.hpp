#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kbfg {

inline constexpr const char* kVersion = "0.1.0";

// All recoverable failures in the library surface as this exception type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const std::string& message);

// Deterministic RNG wrapper. std::shuffle and uniform_int_distribution are
// implementation-defined, so every random draw in the library goes through
// the explicit algorithms below to keep outputs byte-identical across
// platforms and standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, n) by modulo with rejection of the biased tail.
    size_t uniform_index(size_t n);

    // Uniform double in [0, 1).
    double uniform01();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Stable derivation of per-unit seeds (splitmix64 finalizer).
uint64_t mix_seed(uint64_t seed, uint64_t salt);

// round-half-up on nonnegative values
size_t round_half_up(double x);

uint64_t fnv1a64(std::span<const unsigned char> bytes, uint64_t h = 0xcbf29ce484222325ull);
uint64_t fnv1a64_str(std::string_view s, uint64_t h = 0xcbf29ce484222325ull);

// Shortest round-trip decimal rendering of a double (via std::to_chars).
std::string double_to_string(double v);
bool parse_double(std::string_view s, double& out);

std::string lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);

// Runs fn(0..n-1). jobs <= 1 executes serially in index order; otherwise a
// small worker pool pulls indices from an atomic counter. Units must be
// independent; callers assemble results by index so the outcome does not
// depend on the thread count.
void parallel_for(size_t n, int jobs, const std::function<void(size_t)>& fn);

}  // namespace kbfg
