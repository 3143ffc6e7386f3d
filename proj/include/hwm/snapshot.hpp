#pragma once

#include <optional>
#include <string>

#include "hwm/field.hpp"
#include "hwm/grid.hpp"

namespace hwm {

// Binary field snapshot. Layout:
//   magic "HWMAP1" (6 bytes), then a fixed little-endian header
//   (version u32, byte-order marker u32 = 0x01020304, n u32, N u32,
//    L f64, eta i32, time f64, has_ut u32, payload count u64),
// then the payload: raw little-endian IEEE-754 float64, component-major
// (u1 plane, u2 plane, u3 plane, then the u_t planes when flagged),
// row-major within each plane. Write-then-read is bit-identical.
struct Snapshot {
    Grid grid;
    int eta = 1;
    double time = 0.0;
    VecField u;
    std::optional<VecField> ut;
};

// IoError reasons distinguish a wrong magic, a short file, and a payload
// count that disagrees with the header. A failed read returns nothing
// partial; the exception is the only outcome.
void snapshot_write(const std::string& path, const Snapshot& s);
Snapshot snapshot_read(const std::string& path);

} // namespace hwm
