#include "hwm/snapshot.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "hwm/errors.hpp"

namespace hwm {

namespace {

constexpr char kMagic[6] = {'H', 'W', 'M', 'A', 'P', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kByteOrder = 0x01020304u;

// All header and payload scalars are serialized little-endian byte by byte,
// so files are portable regardless of host endianness.
void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(buf, bits);
}

void put_i32(std::string& buf, std::int32_t v) {
    put_u32(buf, static_cast<std::uint32_t>(v));
}

class Cursor {
public:
    Cursor(const std::string& data, std::size_t start, const std::string& path)
        : data_(data), path_(path), pos_(start) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }

    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::size_t n) {
        if (data_.size() - pos_ < n)
            throw IoError(path_ + ": snapshot ends mid-header", IoError::Reason::Truncated);
    }

    const std::string& data_;
    std::string path_;
    std::size_t pos_ = 0;
};

} // namespace

void snapshot_write(const std::string& path, const Snapshot& s) {
    s.grid.validate();
    const std::size_t points = s.grid.points();
    const std::uint64_t count = static_cast<std::uint64_t>(points) * (s.ut ? 6 : 3);

    std::string buf;
    buf.reserve(64 + count * 8);
    buf.append(kMagic, sizeof kMagic);
    put_u32(buf, kVersion);
    put_u32(buf, kByteOrder);
    put_u32(buf, static_cast<std::uint32_t>(s.grid.n));
    put_u32(buf, static_cast<std::uint32_t>(s.grid.N));
    put_f64(buf, s.grid.L);
    put_i32(buf, s.eta);
    put_f64(buf, s.time);
    put_u32(buf, s.ut ? 1u : 0u);
    put_u64(buf, count);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < points; ++i) put_f64(buf, s.u.c[c][i]);
    if (s.ut)
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < points; ++i) put_f64(buf, s.ut->c[c][i]);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path + ": cannot open for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError(path + ": write failed");
}

Snapshot snapshot_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open for reading");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof()) throw IoError(path + ": read failed");

    if (data.size() < sizeof kMagic)
        throw IoError(path + ": snapshot ends mid-header", IoError::Reason::Truncated);
    if (std::memcmp(data.data(), kMagic, sizeof kMagic) != 0)
        throw IoError(path + ": not a snapshot file (bad magic)", IoError::Reason::BadMagic);

    Cursor cur(data, sizeof kMagic, path);
    const std::uint32_t version = cur.u32();
    if (version != kVersion)
        throw IoError(path + ": unsupported snapshot version " + std::to_string(version));
    const std::uint32_t order = cur.u32();
    if (order != kByteOrder)
        throw IoError(path + ": unrecognized byte-order marker");

    Snapshot s;
    s.grid.n = static_cast<int>(cur.u32());
    s.grid.N = static_cast<int>(cur.u32());
    s.grid.L = cur.f64();
    s.eta = cur.i32();
    s.time = cur.f64();
    const bool has_ut = cur.u32() != 0;
    const std::uint64_t count = cur.u64();

    try {
        s.grid.validate();
    } catch (const ConfigError& e) {
        throw IoError(path + ": invalid grid in header (" + e.what() + ")");
    }
    if (s.eta != 1 && s.eta != -1)
        throw IoError(path + ": invalid eta in header");

    const std::uint64_t expected =
        static_cast<std::uint64_t>(s.grid.points()) * (has_ut ? 6 : 3);
    if (count != expected)
        throw IoError(path + ": header announces " + std::to_string(count) +
                          " values, grid requires " + std::to_string(expected),
                      IoError::Reason::LengthMismatch);
    if (cur.remaining() < count * 8)
        throw IoError(path + ": snapshot ends mid-payload", IoError::Reason::Truncated);

    const std::size_t points = s.grid.points();
    s.u = VecField(s.grid);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < points; ++i) s.u.c[c][i] = cur.f64();
    if (has_ut) {
        VecField ut(s.grid);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < points; ++i) ut.c[c][i] = cur.f64();
        s.ut = std::move(ut);
    }
    return s;
}

} // namespace hwm
