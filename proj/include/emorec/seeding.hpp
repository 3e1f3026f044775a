#pragma once

// Seed derivation shared by the generator and the learners.
//
// Every random stream in the library is a std::mt19937_64 seeded with a value
// derived here, so a run is fully determined by its base seed.

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace emorec {

/// SplitMix64 finalizer (Steele, Lea & Flood).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// 64-bit FNV-1a over raw bytes.
class Fnv1a {
public:
    void update(const void* data, std::size_t size) noexcept {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
    }
    void update(std::string_view s) noexcept {
        const std::uint64_t n = s.size();
        update(&n, sizeof n);
        update(s.data(), s.size());
    }
    template <class T>
    void update_value(const T& v) noexcept { update(&v, sizeof v); }

    std::uint64_t digest() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t hash_string(std::string_view s) noexcept {
    Fnv1a h;
    h.update(s);
    return h.digest();
}

/// Folds a list of integers into one well-mixed seed; order matters.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t acc = 0x6a09e667f3bcc908ULL;
    for (std::uint64_t p : parts) acc = splitmix64(acc ^ splitmix64(p));
    return acc;
}

}  // namespace emorec
