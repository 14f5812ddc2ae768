#include "screamloc/geometry.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "screamloc/errors.hpp"

namespace screamloc {

void MicArray::validate() const {
    if (mics.size() < 2) raise(Errc::degenerate_geometry, "need at least 2 microphones");
    for (std::size_t i = 0; i < mics.size(); ++i) {
        if (!std::isfinite(mics[i].pos.x) || !std::isfinite(mics[i].pos.y) ||
            !std::isfinite(mics[i].pos.z))
            raise(Errc::invalid_input, "non-finite mic position: " + mics[i].id);
        for (std::size_t j = 0; j < i; ++j) {
            if (mics[i].id == mics[j].id)
                raise(Errc::invalid_input, "duplicate mic id: " + mics[i].id);
            if (distance(mics[i].pos, mics[j].pos) <= 1e-6)
                raise(Errc::degenerate_geometry,
                      "mics " + mics[j].id + " and " + mics[i].id + " coincide");
        }
    }
}

int MicArray::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < mics.size(); ++i)
        if (mics[i].id == id) return static_cast<int>(i);
    return -1;
}

Vec3 MicArray::centroid() const {
    Vec3 c;
    for (const auto& m : mics) c = c + m.pos;
    return mics.empty() ? c : c * (1.0 / static_cast<double>(mics.size()));
}

bool MicArray::shares_z(double tol) const {
    for (const auto& m : mics)
        if (std::abs(m.pos.z - mics[0].pos.z) > tol) return false;
    return true;
}

Geometry load_geometry(const std::string& path) {
    std::ifstream f(path);
    if (!f) raise(Errc::file_not_found, "cannot open geometry: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::config, "geometry is not valid JSON: " + std::string(e.what()));
    }
    Geometry g;
    try {
        for (const auto& m : j.at("mics")) {
            Mic mic;
            mic.id = m.at("id").is_string() ? m.at("id").get<std::string>()
                                            : std::to_string(m.at("id").get<long long>());
            mic.pos = {m.at("x").get<double>(), m.at("y").get<double>(), m.at("z").get<double>()};
            g.array.mics.push_back(std::move(mic));
        }
        g.c = j.value("c", 343.0);
        if (j.contains("bounds")) {
            const auto& b = j.at("bounds");
            const auto lo = b.at("min").get<std::vector<double>>();
            const auto hi = b.at("max").get<std::vector<double>>();
            if (lo.size() != 3 || hi.size() != 3)
                raise(Errc::config, "geometry bounds must be 3-vectors");
            g.bounds.min = {lo[0], lo[1], lo[2]};
            g.bounds.max = {hi[0], hi[1], hi[2]};
        } else {
            // default: array bounding box padded by 5 m per axis
            Vec3 lo = g.array.mics.at(0).pos, hi = lo;
            for (const auto& m : g.array.mics) {
                lo.x = std::min(lo.x, m.pos.x);
                lo.y = std::min(lo.y, m.pos.y);
                lo.z = std::min(lo.z, m.pos.z);
                hi.x = std::max(hi.x, m.pos.x);
                hi.y = std::max(hi.y, m.pos.y);
                hi.z = std::max(hi.z, m.pos.z);
            }
            g.bounds.min = lo - Vec3{5, 5, 5};
            g.bounds.max = hi + Vec3{5, 5, 5};
        }
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::config, "geometry JSON missing fields: " + std::string(e.what()));
    }
    if (g.c <= 0) raise(Errc::config, "geometry: speed of sound must be positive");
    g.array.validate();
    return g;
}

void save_geometry(const Geometry& g, const std::string& path) {
    nlohmann::json j;
    j["mics"] = nlohmann::json::array();
    for (const auto& m : g.array.mics)
        j["mics"].push_back({{"id", m.id}, {"x", m.pos.x}, {"y", m.pos.y}, {"z", m.pos.z}});
    j["c"] = g.c;
    j["bounds"] = {{"min", {g.bounds.min.x, g.bounds.min.y, g.bounds.min.z}},
                   {"max", {g.bounds.max.x, g.bounds.max.y, g.bounds.max.z}}};
    std::ofstream f(path, std::ios::trunc);
    if (!f) raise(Errc::file_not_found, "cannot write geometry: " + path);
    f << j.dump(2) << "\n";
}

} // namespace screamloc
