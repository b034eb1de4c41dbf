#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rsh/spectra.hpp"
#include "rsh/types.hpp"

namespace rsh {

// On-disk store of full spectra, keyed by a content hash of the operator.
//
// Entry layout (fixed-width binary, all integers and floats little-endian):
//   bytes 0..7    magic "RSHSPEC\0"
//   bytes 8..11   format version (u32, currently 1)
//   bytes 12..19  dimension n (u64)
//   bytes 20..27  content hash of the source operator (u64)
//   then n        eigenvalues (f64)
//   then n*n      eigenvectors, column-major, interleaved re/im (2 x f64 each)
//
// Writers stage into a temp file and rename into place, so concurrent readers
// never observe a partial entry (single-writer / multi-reader discipline).
class SpectrumCache {
public:
    explicit SpectrumCache(std::filesystem::path dir);

    // FNV-1a over dimension and element bytes, column-major. Stable across runs.
    static std::uint64_t content_hash(const Operator& h);

    // nullopt on miss or on any malformed/mismatched entry (treated as a miss).
    std::optional<Spectrum> load(std::uint64_t key) const;

    void store(std::uint64_t key, const Spectrum& spec) const;

    std::filesystem::path entry_path(std::uint64_t key) const;
    const std::filesystem::path& dir() const { return dir_; }

    // Number of entries and total bytes on disk.
    struct Stats {
        std::size_t entries = 0;
        std::uintmax_t bytes = 0;
    };
    Stats stats() const;
    void clear() const;

private:
    std::filesystem::path dir_;
};

// Full diagonalization through an optional cache (pass nullptr to bypass).
Spectrum diagonalize_cached(const Operator& h, const SpectrumCache* cache);

}  // namespace rsh
