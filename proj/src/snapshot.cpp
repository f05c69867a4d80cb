#include "stlab/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "stlab/errors.hpp"

namespace stlab {

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'T', 'L', 'B'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ConfigError("truncated snapshot header");
    return v;
}

}  // namespace

RealField Snapshot::to_field(const GridPtr& g) const {
    if (g->nx() != nx || g->nz() != nz || g->height() != height)
        throw ConfigError("snapshot shape does not match the grid");
    return RealField(g, values);
}

void write_snapshot(const std::string& path, const RealField& f, double time) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid->nx()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid->nz()));
    put<double>(os, f.grid->height());
    put<double>(os, time);
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!os) throw ConfigError("failed writing " + path);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError(path + ": not a snapshot file");
    if (get<std::uint32_t>(is) != kVersion) throw ConfigError(path + ": unsupported snapshot version");
    Snapshot s;
    s.nx = static_cast<int>(get<std::uint32_t>(is));
    s.nz = static_cast<int>(get<std::uint32_t>(is));
    s.height = get<double>(is);
    s.time = get<double>(is);
    s.values.resize(static_cast<size_t>(s.nx) * s.nz);
    is.read(reinterpret_cast<char*>(s.values.data()), static_cast<std::streamsize>(s.values.size() * sizeof(double)));
    if (!is) throw ConfigError(path + ": truncated snapshot data");
    return s;
}

}  // namespace stlab
