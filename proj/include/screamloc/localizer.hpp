#pragma once

#include <string>
#include <vector>

#include "screamloc/geometry.hpp"
#include "screamloc/tdoa.hpp"

namespace screamloc {

struct SolverOptions {
    double learning_rate = 1e4; // loss is in s^2, positions in m
    int max_iters = 10000;
    double grad_tol = 1e-9;
    double step_tol = 1e-6; // meters
    double c = 343.0;       // speed of sound, m/s
};

struct PositionEstimate {
    Vec3 position;
    double final_loss = 0.0;
    int iterations = 0; // accepted steps
    bool converged = false;
    std::vector<Vec3> path;        // every accepted iterate, init included
    std::vector<double> path_loss; // loss at each path point
};

/// (||pos - mic_i|| - ||pos - mic_j||) / c.
double expected_tdoa(const Vec3& pos, const Vec3& mic_i, const Vec3& mic_j, double c);

/// Weighted sum of squared TDOA residuals, units s^2.
double tdoa_loss(const Vec3& pos, const std::vector<TdoaMeasurement>& measurements,
                 const MicArray& array, double c);

/// Analytic gradient of tdoa_loss. Distances are clamped below by 1e-9 m to
/// guard the singularity at a microphone position.
Vec3 tdoa_loss_gradient(const Vec3& pos, const std::vector<TdoaMeasurement>& measurements,
                        const MicArray& array, double c);

struct SrpPeak {
    Vec3 position;
    double power = 0.0; // 0 with all-zero curves: low-confidence result
};

/// Steered-response grid search: sums each pair's correlation at the lag
/// nearest the candidate position's expected TDOA and returns the argmax.
/// Ties go to the grid point closest to the array centroid.
SrpPeak srp_phat_init(const std::vector<PairCorrelation>& curves, const MicArray& array,
                      const Bounds& bounds, double grid_step_m, double c);

/// Fixed-learning-rate descent on tdoa_loss with a backtracking safeguard
/// (step halved while the candidate raises the loss, up to 20 times).
/// Arrays sharing one z coordinate are solved in that plane; otherwise at
/// least 4 non-coplanar microphones are required.
PositionEstimate gradient_descent_localize(const Vec3& init,
                                           const std::vector<TdoaMeasurement>& measurements,
                                           const MicArray& array, const SolverOptions& opts);

/// CSV with columns iter, x, y, z, loss.
void write_descent_csv(const PositionEstimate& estimate, const std::string& path);

} // namespace screamloc
