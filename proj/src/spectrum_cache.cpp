#include "rsh/spectrum_cache.hpp"

#include <atomic>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "rsh/errors.hpp"

namespace rsh {

namespace {

constexpr char kMagic[8] = {'R', 'S', 'H', 'S', 'P', 'E', 'C', '\0'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "cache serialization assumes a little-endian host");

void put_u32(std::ofstream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_u64(std::ofstream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

bool get_u32(std::ifstream& is, std::uint32_t& v) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof v));
}

bool get_u64(std::ifstream& is, std::uint64_t& v) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof v));
}

std::uint64_t fnv1a(std::uint64_t state, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        state ^= p[i];
        state *= 1099511628211ULL;
    }
    return state;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

SpectrumCache::SpectrumCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ResourceError("cache: cannot create directory " + dir_.string());
}

std::uint64_t SpectrumCache::content_hash(const Operator& h) {
    std::uint64_t state = 14695981039346656037ULL;
    const std::uint64_t n = static_cast<std::uint64_t>(h.rows());
    state = fnv1a(state, &n, sizeof n);
    // Eigen stores column-major; complex<double> is a contiguous (re, im) pair.
    state = fnv1a(state, h.data(), sizeof(Complex) * static_cast<std::size_t>(h.size()));
    return state;
}

std::filesystem::path SpectrumCache::entry_path(std::uint64_t key) const {
    return dir_ / (hex64(key) + ".spec");
}

std::optional<Spectrum> SpectrumCache::load(std::uint64_t key) const {
    std::ifstream is(entry_path(key), std::ios::binary);
    if (!is) return std::nullopt;

    char magic[8];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        return std::nullopt;
    std::uint32_t version = 0;
    if (!get_u32(is, version) || version != kVersion) return std::nullopt;
    std::uint64_t dim = 0, stored_key = 0;
    if (!get_u64(is, dim) || !get_u64(is, stored_key)) return std::nullopt;
    if (stored_key != key) return std::nullopt;
    if (dim > (1u << 20)) return std::nullopt;  // implausible; refuse to allocate

    const auto n = static_cast<Index>(dim);
    Spectrum spec;
    spec.values.resize(n);
    spec.vectors.resize(n, n);
    if (!is.read(reinterpret_cast<char*>(spec.values.data()),
                 static_cast<std::streamsize>(sizeof(double) * dim)))
        return std::nullopt;
    if (!is.read(reinterpret_cast<char*>(spec.vectors.data()),
                 static_cast<std::streamsize>(sizeof(Complex) * dim * dim)))
        return std::nullopt;
    // Trailing garbage means a foreign or damaged file.
    if (is.peek() != std::ifstream::traits_type::eof()) return std::nullopt;
    return spec;
}

void SpectrumCache::store(std::uint64_t key, const Spectrum& spec) const {
    const auto final_path = entry_path(key);
    // Stage under a per-writer name: concurrent stores of the same entry then
    // never share a temp file, and the rename publishes whole entries only.
    static std::atomic<unsigned> stamp{0};
    const auto tmp_path =
        final_path.string() + ".w" + std::to_string(stamp.fetch_add(1)) + ".tmp";
    {
        std::ofstream os(tmp_path, std::ios::binary | std::ios::trunc);
        if (!os) throw ResourceError("cache: cannot write " + tmp_path);
        os.write(kMagic, sizeof kMagic);
        put_u32(os, kVersion);
        put_u64(os, static_cast<std::uint64_t>(spec.dim()));
        put_u64(os, key);
        os.write(reinterpret_cast<const char*>(spec.values.data()),
                 static_cast<std::streamsize>(sizeof(double) * spec.values.size()));
        os.write(reinterpret_cast<const char*>(spec.vectors.data()),
                 static_cast<std::streamsize>(sizeof(Complex) * spec.vectors.size()));
        if (!os) throw ResourceError("cache: short write to " + tmp_path);
    }
    std::error_code ec;
    std::filesystem::rename(tmp_path, final_path, ec);
    if (ec) throw ResourceError("cache: cannot finalize " + final_path.string());
}

SpectrumCache::Stats SpectrumCache::stats() const {
    Stats st;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir_, ec)) {
        if (entry.path().extension() != ".spec") continue;
        ++st.entries;
        st.bytes += entry.file_size(ec);
    }
    return st;
}

void SpectrumCache::clear() const {
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir_, ec))
        if (entry.path().extension() == ".spec") std::filesystem::remove(entry.path(), ec);
}

Spectrum diagonalize_cached(const Operator& h, const SpectrumCache* cache) {
    if (cache == nullptr) return diagonalize(h);
    const std::uint64_t key = SpectrumCache::content_hash(h);
    if (auto hit = cache->load(key)) {
        if (hit->dim() == h.rows()) return std::move(*hit);
    }
    Spectrum spec = diagonalize(h);
    cache->store(key, spec);
    return spec;
}

}  // namespace rsh
