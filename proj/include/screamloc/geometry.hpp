#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace screamloc {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

struct Mic {
    std::string id;
    Vec3 pos;
};

struct MicArray {
    std::vector<Mic> mics;

    void validate() const; // >= 2 mics, unique ids, pairwise distance > 1e-6 m
    int index_of(const std::string& id) const; // -1 when missing
    Vec3 centroid() const;
    /// True when every microphone shares one z coordinate (within tol);
    /// localization then runs in the plane.
    bool shares_z(double tol = 1e-9) const;
};

struct Bounds {
    Vec3 min;
    Vec3 max;
};

struct Geometry {
    MicArray array;
    double c = 343.0;
    Bounds bounds;
};

Geometry load_geometry(const std::string& path);
void save_geometry(const Geometry& g, const std::string& path);

} // namespace screamloc
