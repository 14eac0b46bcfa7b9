// csv.hpp — deterministic CSV serialization of baths, trajectories, and analysis series.
// All writers emit a single header row, '.' decimal separator, and doubles with 17
// significant digits so reruns are byte-identical and values round-trip exactly.
#pragma once

#include <string>
#include <vector>

#include "spinmap/dynmap.hpp"
#include "spinmap/propagator.hpp"
#include "spinmap/spectral.hpp"

namespace spinmap::io {

std::string format_double(double x);

// columns: index, omega, coupling
void write_bath_csv(const std::string& path, const spectral::DiscretizedBath& bath);
spectral::DiscretizedBath read_bath_csv(const std::string& path);

// columns: t, rho00, rho01_re, rho01_im, rho11, sx, sy, sz
void write_trajectory_csv(const std::string& path, const propagator::Trajectory& traj);
propagator::Trajectory read_trajectory_csv(const std::string& path);

// columns: t, S1, S2, S3, b1, b2, b3  (descending singular values)
void write_svd_csv(const std::string& path, const dynmap::SvdSeries& svd);
// Read-back carries t, s and b only; the singular-vector factors are not serialized.
dynmap::SvdSeries read_svd_csv(const std::string& path);

// columns: t, m11, m12, m13, m21, ..., m33 (row-major), b1, b2, b3
void write_map_csv(const std::string& path, const dynmap::AffineBlochMap& affine);
dynmap::AffineBlochMap read_map_csv(const std::string& path);

// columns: t, delta, bound_general, bound_sigma_z
void write_bound_csv(const std::string& path, const dynmap::BoundReport& report);

}  // namespace spinmap::io
