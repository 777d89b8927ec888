#pragma once

#include <span>

#include "softjig/geom.hpp"

namespace softjig {

/// Axis-aligned box centred at the origin, outward winding.
TriMesh make_box(const Vec3& size);

/// Prism approximating a cylinder along +z, centred at the origin.
TriMesh make_cylinder(double diameter, double length, int segments = 24);

/// Convex polyhedron through `extra` points plus a Fibonacci lattice on the sphere.
TriMesh make_sphere(double radius, int samples = 200, std::span<const Vec3> extra = {});

/// Triangulated convex hull of a 3-D point set.
TriMesh mesh_from_convex_points(std::span<const Vec3> points);

}  // namespace softjig
