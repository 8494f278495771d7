#pragma once

#include "geometry/mesh.hpp"

#include <cstdint>

namespace drape::testing {

// Subdivided icosahedron projected to a sphere: 10 * 4^s + 2 vertices.
SurfaceMesh icosphere(int subdivisions, double radius = 1.0);
SurfaceMesh ellipsoid(int subdivisions, const Vec3& axes);
// Ellipsoid whose radius is modulated by 1 + amplitude * sin(f x) sin(f y) sin(f z)
// over the unit-sphere direction.
SurfaceMesh bumpy_ellipsoid(int subdivisions, const Vec3& axes, double amplitude, double frequency);
// nx x ny vertices on [0,sx] x [0,sy] in the z = 0 plane.
SurfaceMesh grid(int nx, int ny, double sx = 1.0, double sy = 1.0, bool quads = false);
// Small jittered, non-planar grid used for gradient checks.
SurfaceMesh random_mesh(std::uint64_t seed, int nx = 5, int ny = 4);
// Points spread uniformly over an ellipsoid surface.
Points ellipsoid_cloud(std::size_t n, const Vec3& axes, std::uint64_t seed);

}  // namespace drape::testing
