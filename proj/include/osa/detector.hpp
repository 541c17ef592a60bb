#pragma once

#include <string>
#include <vector>

#include "osa/rng.hpp"

namespace osa {

enum class Observation { idle, busy };

const char* to_string(Observation o);

/// Imperfect sensing: an idle channel reads busy with probability epsilon (false
/// alarm), a busy channel reads idle with probability delta (miss). Consumes
/// exactly one draw from the stream.
Observation sense(bool truly_idle, double epsilon, double delta, Rng& rng);

struct RocPoint {
    double epsilon = 0.0; // false-alarm probability
    double delta = 1.0;   // miss probability
};

/// Piecewise-linear ROC; detection power 1-delta as a function of epsilon.
class RocCurve {
public:
    explicit RocCurve(std::vector<RocPoint> points);

    const std::vector<RocPoint>& points() const { return points_; }

    double min_epsilon() const { return points_.front().epsilon; }
    double max_epsilon() const { return points_.back().epsilon; }
    double min_delta() const { return points_.back().delta; }
    double max_delta() const { return points_.front().delta; }

    double delta_at(double epsilon) const;
    double power_at(double epsilon) const { return 1.0 - delta_at(epsilon); }

    /// Smallest epsilon achieving miss probability delta.
    double epsilon_at(double delta) const;

    /// Power is concave in epsilon (within tol on the sampled points).
    bool is_concave(double tol = 1e-12) const;

    /// Two-column text: "epsilon delta" per line, '#' comments allowed.
    static RocCurve parse(const std::string& text);
    static RocCurve load(const std::string& path);
    std::string to_text() const;

private:
    std::vector<RocPoint> points_;
};

/// Q(x) = P(N(0,1) > x) and its inverse.
double q_function(double x);
double q_inverse(double p);

struct EnergyDetectorSpec {
    double snr = 1.0;        // sigma_s^2 / sigma_n^2, linear
    int num_samples = 1;     // Ns per sensing epoch
    double threshold = 1.0; // in multiples of sigma_n^2

    void validate() const;
};

/// Gaussian (deflection) approximation of the normalized energy statistic,
/// evaluated at spec.threshold.
RocPoint energy_operating_point(const EnergyDetectorSpec& spec);

/// Gaussian-approximation ROC over a threshold grid, with the (0,1) and (1,0)
/// endpoints appended.
RocCurve energy_roc_analytic(const EnergyDetectorSpec& spec, int grid_points = 201);

/// Empirical ROC from exact chi-square draws of the energy statistic.
RocCurve energy_roc_monte_carlo(const EnergyDetectorSpec& spec, int trials, Rng& rng, int grid_points = 201);

struct SampleRequirement {
    long long energy_samples = 1;
    // c/snr reference for a coherent detector with c = (Q^-1(eps) - Q^-1(power))^2.
    double matched_filter_samples = 0.0;
    double matched_filter_constant = 0.0;
};

/// Inverts the analytic energy-detector ROC for the smallest Ns meeting both
/// targets. Throws std::invalid_argument when power_target < epsilon_target.
SampleRequirement samples_required(double snr, double epsilon_target, double power_target);

} // namespace osa
