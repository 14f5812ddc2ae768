#include "screamloc/localizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "screamloc/errors.hpp"

namespace screamloc {

namespace {

constexpr double kMinDistance = 1e-9; // gradient singularity guard at a mic

struct ResolvedPair {
    Vec3 pos_i;
    Vec3 pos_j;
    double tau_s;
    double weight;
};

std::vector<ResolvedPair> resolve(const std::vector<TdoaMeasurement>& measurements,
                                  const MicArray& array) {
    std::vector<ResolvedPair> out;
    out.reserve(measurements.size());
    for (const auto& m : measurements) {
        const int i = array.index_of(m.mic_i);
        const int j = array.index_of(m.mic_j);
        if (i < 0 || j < 0)
            raise(Errc::unknown_mic_id, "measurement references unknown mic " +
                                            (i < 0 ? m.mic_i : m.mic_j));
        if (i == j) raise(Errc::invalid_input, "measurement pairs a mic with itself");
        if (m.weight < 0) raise(Errc::invalid_input, "negative measurement weight");
        out.push_back({array.mics[i].pos, array.mics[j].pos, m.tau_s, m.weight});
    }
    return out;
}

// True when the mics span less than 3 dimensions (within tol of a plane).
bool coplanar(const MicArray& array, double tol = 1e-6) {
    if (array.mics.size() < 4) return true;
    const Vec3 c = array.centroid();
    // power iteration on the Gram matrix is overkill; use the determinant test
    // over all triples of centered difference vectors instead
    for (std::size_t a = 0; a < array.mics.size(); ++a)
        for (std::size_t b = a + 1; b < array.mics.size(); ++b)
            for (std::size_t d = b + 1; d < array.mics.size(); ++d) {
                const Vec3 u = array.mics[a].pos - c;
                const Vec3 v = array.mics[b].pos - c;
                const Vec3 w = array.mics[d].pos - c;
                const double det = u.x * (v.y * w.z - v.z * w.y) -
                                   u.y * (v.x * w.z - v.z * w.x) +
                                   u.z * (v.x * w.y - v.y * w.x);
                if (std::abs(det) > tol) return false;
            }
    return true;
}

bool collinear(const MicArray& array, double tol = 1e-9) {
    if (array.mics.size() < 3) return true;
    const Vec3 base = array.mics[0].pos;
    Vec3 dir;
    for (std::size_t i = 1; i < array.mics.size(); ++i) {
        const Vec3 d = array.mics[i].pos - base;
        if (d.norm() > tol) {
            dir = d * (1.0 / d.norm());
            break;
        }
    }
    for (const auto& m : array.mics) {
        const Vec3 d = m.pos - base;
        const Vec3 perp = d - dir * d.dot(dir);
        if (perp.norm() > tol) return false;
    }
    return true;
}

} // namespace

double expected_tdoa(const Vec3& pos, const Vec3& mic_i, const Vec3& mic_j, double c) {
    if (c <= 0) raise(Errc::invalid_input, "expected_tdoa: c must be positive");
    return (distance(pos, mic_i) - distance(pos, mic_j)) / c;
}

double tdoa_loss(const Vec3& pos, const std::vector<TdoaMeasurement>& measurements,
                 const MicArray& array, double c) {
    if (c <= 0) raise(Errc::invalid_input, "tdoa_loss: c must be positive");
    double loss = 0.0;
    for (const auto& p : resolve(measurements, array)) {
        const double r = p.tau_s - (distance(pos, p.pos_i) - distance(pos, p.pos_j)) / c;
        loss += p.weight * r * r;
    }
    return loss;
}

Vec3 tdoa_loss_gradient(const Vec3& pos, const std::vector<TdoaMeasurement>& measurements,
                        const MicArray& array, double c) {
    if (c <= 0) raise(Errc::invalid_input, "tdoa_loss_gradient: c must be positive");
    Vec3 g;
    for (const auto& p : resolve(measurements, array)) {
        const double di = std::max(distance(pos, p.pos_i), kMinDistance);
        const double dj = std::max(distance(pos, p.pos_j), kMinDistance);
        const double r = p.tau_s - (di - dj) / c;
        // d(d_i)/dp = (p - mic_i)/d_i
        const Vec3 dd = (pos - p.pos_i) * (1.0 / di) - (pos - p.pos_j) * (1.0 / dj);
        const double k = -2.0 * p.weight * r / c;
        g = g + dd * k;
    }
    return g;
}

SrpPeak srp_phat_init(const std::vector<PairCorrelation>& curves, const MicArray& array,
                      const Bounds& bounds, double grid_step_m, double c) {
    array.validate();
    if (grid_step_m <= 0) raise(Errc::invalid_input, "srp_phat_init: grid step must be positive");
    if (c <= 0) raise(Errc::invalid_input, "srp_phat_init: c must be positive");
    if (bounds.max.x < bounds.min.x || bounds.max.y < bounds.min.y || bounds.max.z < bounds.min.z)
        raise(Errc::invalid_input, "srp_phat_init: degenerate bounds");

    struct Pair {
        Vec3 pos_i, pos_j;
        const GccResult* curve;
        double sr;
    };
    std::vector<Pair> pairs;
    pairs.reserve(curves.size());
    for (const auto& pc : curves) {
        const int i = array.index_of(pc.mic_i);
        const int j = array.index_of(pc.mic_j);
        if (i < 0 || j < 0)
            raise(Errc::unknown_mic_id, "curve references unknown mic " + (i < 0 ? pc.mic_i : pc.mic_j));
        if (pc.gcc.sample_rate_hz <= 0)
            raise(Errc::invalid_input, "srp_phat_init: curve missing sample rate");
        pairs.push_back({array.mics[i].pos, array.mics[j].pos, &pc.gcc,
                         static_cast<double>(pc.gcc.sample_rate_hz)});
    }

    const auto axis_count = [&](double lo, double hi) {
        return static_cast<int>(std::floor((hi - lo) / grid_step_m + 1e-9)) + 1;
    };
    const int nx = axis_count(bounds.min.x, bounds.max.x);
    const int ny = axis_count(bounds.min.y, bounds.max.y);
    const int nz = axis_count(bounds.min.z, bounds.max.z);
    if (static_cast<long long>(nx) * ny * nz < 8)
        raise(Errc::grid_too_coarse, "srp_phat_init: fewer than 8 grid points");

    const Vec3 centroid = array.centroid();
    double best_power = -std::numeric_limits<double>::infinity();
    double best_dist2 = std::numeric_limits<double>::infinity();
    Vec3 best;

    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            for (int iz = 0; iz < nz; ++iz) {
                const Vec3 q{bounds.min.x + ix * grid_step_m, bounds.min.y + iy * grid_step_m,
                             bounds.min.z + iz * grid_step_m};
                double power = 0.0;
                for (const auto& p : pairs) {
                    const double tau = (distance(q, p.pos_i) - distance(q, p.pos_j)) / c;
                    const int lag = static_cast<int>(std::lround(tau * p.sr));
                    power += p.curve->at_lag(lag);
                }
                const double d2 = (q - centroid).dot(q - centroid);
                if (power > best_power || (power == best_power && d2 < best_dist2)) {
                    best_power = power;
                    best_dist2 = d2;
                    best = q;
                }
            }
        }
    }
    return {best, best_power};
}

PositionEstimate gradient_descent_localize(const Vec3& init,
                                           const std::vector<TdoaMeasurement>& measurements,
                                           const MicArray& array, const SolverOptions& opts) {
    array.validate();
    if (opts.learning_rate <= 0 || opts.max_iters < 1 || opts.grad_tol <= 0 ||
        opts.step_tol <= 0 || opts.c <= 0)
        raise(Errc::invalid_input, "gradient_descent_localize: bad solver options");
    if (measurements.empty())
        raise(Errc::invalid_input, "gradient_descent_localize: no measurements");

    // Coplanar arrays that share one z plane are solved in 2-D; any other
    // degenerate configuration cannot pin down a 3-D position.
    const bool planar = array.shares_z();
    if (planar) {
        if (collinear(array))
            raise(Errc::degenerate_geometry, "collinear array cannot localize in the plane");
    } else if (array.mics.size() < 4 || coplanar(array)) {
        raise(Errc::degenerate_geometry,
              "3-D localization needs at least 4 non-coplanar microphones");
    }

    Vec3 p = init;
    if (planar) p.z = array.mics[0].pos.z;

    PositionEstimate est;
    double loss = tdoa_loss(p, measurements, array, opts.c);
    if (!std::isfinite(loss)) raise(Errc::non_finite_loss, "initial loss is not finite");
    est.path.push_back(p);
    est.path_loss.push_back(loss);

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        Vec3 g = tdoa_loss_gradient(p, measurements, array, opts.c);
        if (planar) g.z = 0.0;
        if (!std::isfinite(g.x) || !std::isfinite(g.y) || !std::isfinite(g.z))
            raise(Errc::non_finite_loss, "gradient is not finite");
        if (g.norm() < opts.grad_tol) {
            est.converged = true;
            break;
        }

        double step = opts.learning_rate;
        Vec3 candidate;
        double candidate_loss = 0.0;
        bool accepted = false;
        for (int halving = 0; halving < 20; ++halving) {
            candidate = p - g * step;
            candidate_loss = tdoa_loss(candidate, measurements, array, opts.c);
            if (!std::isfinite(candidate_loss))
                raise(Errc::non_finite_loss, "loss became non-finite during descent");
            if (candidate_loss < loss) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // no descent step found

        const double moved = (candidate - p).norm();
        p = candidate;
        loss = candidate_loss;
        est.path.push_back(p);
        est.path_loss.push_back(loss);
        est.iterations = iter + 1;
        if (moved < opts.step_tol) {
            est.converged = true;
            break;
        }
    }

    est.position = p;
    est.final_loss = loss;
    return est;
}

void write_descent_csv(const PositionEstimate& estimate, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) raise(Errc::file_not_found, "cannot write: " + path);
    f << "iter,x,y,z,loss\n";
    char line[160];
    for (std::size_t i = 0; i < estimate.path.size(); ++i) {
        std::snprintf(line, sizeof(line), "%zu,%.12g,%.12g,%.12g,%.12g\n", i, estimate.path[i].x,
                      estimate.path[i].y, estimate.path[i].z, estimate.path_loss[i]);
        f << line;
    }
}

} // namespace screamloc
