#pragma once

#include <string>

#include "stlab/domain.hpp"

namespace stlab {

// Little-endian: "STLB", u32 version = 1, u32 nx, u32 nz, f64 height,
// f64 time, then nx*nz f64 values with x outer.
struct Snapshot {
    int nx = 0, nz = 0;
    double height = 1.0;
    double time = 0.0;
    std::vector<double> values;

    RealField to_field(const GridPtr& g) const;
};

void write_snapshot(const std::string& path, const RealField& f, double time);
Snapshot read_snapshot(const std::string& path);

}  // namespace stlab
