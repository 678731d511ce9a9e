#pragma once

#include <iosfwd>
#include <string>

#include "kslab/space.hpp"

namespace kslab {

/// Reads the plain-text cloud format:
///
///     # optional comment lines
///     <n> coords <dim>          |   <n> matrix
///     x_1 ... x_dim weight      |   d_i1 ... d_in weight
///
/// One line per point. Throws std::runtime_error on unreadable or malformed input and
/// std::invalid_argument on semantic errors (asymmetric matrix, bad weights).
MeasuredPointCloud load_cloud_file(const std::string& path);
MeasuredPointCloud read_cloud(std::istream& in, SpaceSpec spec);

/// CSV with header `id,x0..x{d-1},weight` (Euclidean) or `id,weight` (abstract).
void write_cloud_csv(const MeasuredPointCloud& cloud, std::ostream& out);

/// CSV `center,r,mass_r,mass_2r,ratio`.
void write_doubling_csv(const DoublingProfile& profile, std::ostream& out);

/// Round-trip text in the import format above.
void write_cloud_text(const MeasuredPointCloud& cloud, std::ostream& out);

}  // namespace kslab
