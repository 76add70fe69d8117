#ifndef CCM_RNG_HPP
#define CCM_RNG_HPP

#include <cstdint>
#include <string_view>
#include <vector>

namespace ccm {

// Finalizer from splitmix64 (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic hierarchical random stream.
//
// A stream is identified by (root seed, path of labels); two streams with the
// same identity produce the same sequence, and child streams are independent
// of how much their parent has been consumed.  Output is a keyed splitmix64
// counter sequence, so construction and forking are O(1).
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed)
        : key_(mix64(seed ^ 0x243f6a8885a308d3ULL)), ctr_(0) {}

    RngStream child(std::uint64_t label) const {
        return RngStream(derived_tag{}, mix64(key_ ^ mix64(label ^ 0x452821e638d01377ULL)));
    }

    RngStream child(std::string_view label) const {
        std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
        for (unsigned char c : label) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return child(h);
    }

    std::uint64_t next_u64() {
        return mix64((ctr_++ * 0x9e3779b97f4a7c15ULL) ^ key_);
    }

    // Uniform in the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound), bound >= 1 (Lemire's method).
    std::uint64_t uniform_below(std::uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            std::uint64_t t = -bound % bound;
            while (lo < t) {
                m = static_cast<unsigned __int128>(next_u64()) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via the inverse CDF, declared in stats.hpp;
    // defined out of line to avoid a circular include.
    double normal();

  private:
    struct derived_tag {};
    RngStream(derived_tag, std::uint64_t key) : key_(key), ctr_(0) {}

    std::uint64_t key_;
    std::uint64_t ctr_;
};

}  // namespace ccm

#endif
