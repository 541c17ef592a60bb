#include "osa/detector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

#include "osa/text_util.hpp"

namespace osa {

const char* to_string(Observation o) {
    return o == Observation::idle ? "idle" : "busy";
}

Observation sense(bool truly_idle, double epsilon, double delta, Rng& rng) {
    const double u = uniform01(rng);
    if (truly_idle) {
        return u < epsilon ? Observation::busy : Observation::idle;
    }
    return u < delta ? Observation::idle : Observation::busy;
}

RocCurve::RocCurve(std::vector<RocPoint> points) : points_(std::move(points)) {
    if (points_.empty()) {
        throw std::invalid_argument("ROC curve needs at least one point");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& p = points_[i];
        if (!(p.epsilon >= 0.0 && p.epsilon <= 1.0 && p.delta >= 0.0 && p.delta <= 1.0)) {
            throw std::invalid_argument("ROC values must lie in [0,1]");
        }
        if (i > 0) {
            if (!(p.epsilon > points_[i - 1].epsilon)) {
                throw std::invalid_argument("ROC epsilon must be strictly increasing");
            }
            if (p.delta > points_[i - 1].delta) {
                throw std::invalid_argument("ROC delta must be nonincreasing");
            }
        }
    }
}

double RocCurve::delta_at(double epsilon) const {
    if (epsilon < min_epsilon() - 1e-12 || epsilon > max_epsilon() + 1e-12) {
        throw std::out_of_range("epsilon outside ROC support");
    }
    if (epsilon <= min_epsilon()) {
        return points_.front().delta;
    }
    if (epsilon >= max_epsilon()) {
        return points_.back().delta;
    }
    const auto hi = std::upper_bound(points_.begin(), points_.end(), epsilon,
                                     [](double e, const RocPoint& p) { return e < p.epsilon; });
    const auto lo = hi - 1;
    const double t = (epsilon - lo->epsilon) / (hi->epsilon - lo->epsilon);
    return lo->delta + t * (hi->delta - lo->delta);
}

double RocCurve::epsilon_at(double delta) const {
    if (delta > max_delta() + 1e-12 || delta < min_delta() - 1e-12) {
        throw std::out_of_range("delta outside ROC support");
    }
    // delta is nonincreasing in epsilon: the first segment reaching delta gives the smallest epsilon.
    if (delta >= points_.front().delta) {
        return points_.front().epsilon;
    }
    for (std::size_t i = 1; i < points_.size(); ++i) {
        const auto& lo = points_[i - 1];
        const auto& hi = points_[i];
        if (hi.delta <= delta) {
            if (lo.delta == hi.delta) {
                return lo.epsilon;
            }
            const double t = (lo.delta - delta) / (lo.delta - hi.delta);
            return lo.epsilon + t * (hi.epsilon - lo.epsilon);
        }
    }
    return points_.back().epsilon;
}

bool RocCurve::is_concave(double tol) const {
    for (std::size_t i = 1; i + 1 < points_.size(); ++i) {
        const auto& a = points_[i - 1];
        const auto& b = points_[i];
        const auto& c = points_[i + 1];
        const double s1 = ((1 - b.delta) - (1 - a.delta)) / (b.epsilon - a.epsilon);
        const double s2 = ((1 - c.delta) - (1 - b.delta)) / (c.epsilon - b.epsilon);
        if (s2 > s1 + tol) {
            return false;
        }
    }
    return true;
}

RocCurve RocCurve::parse(const std::string& text) {
    std::vector<RocPoint> pts;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = strip_comment(raw);
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::string e;
        std::string d;
        std::string extra;
        ls >> e >> d;
        if (d.empty() || (ls >> extra)) {
            throw ConfigError("roc", line_no, "expected two columns 'epsilon delta'");
        }
        try {
            pts.push_back({parse_double(e), parse_double(d)});
        } catch (const std::invalid_argument& ex) {
            throw ConfigError("roc", line_no, ex.what());
        }
    }
    try {
        return RocCurve(std::move(pts));
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("roc: ") + ex.what());
    }
}

RocCurve RocCurve::load(const std::string& path) {
    return parse(read_file(path));
}

std::string RocCurve::to_text() const {
    std::ostringstream out;
    out.precision(17);
    for (const auto& p : points_) {
        out << p.epsilon << ' ' << p.delta << '\n';
    }
    return out.str();
}

double q_function(double x) {
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

double q_inverse(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("q_inverse needs p in (0,1)");
    }
    return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

void EnergyDetectorSpec::validate() const {
    if (!(snr > 0.0)) {
        throw std::invalid_argument("snr must be positive");
    }
    if (num_samples < 1) {
        throw std::invalid_argument("num_samples must be at least 1");
    }
    if (!(threshold > 0.0)) {
        throw std::invalid_argument("threshold must be positive");
    }
}

namespace {

// Statistic T = (1/Ns) sum |x_k|^2 / sigma_n^2 with real Gaussian samples:
// mean 1 and variance 2/Ns under noise, mean 1+snr and variance 2(1+snr)^2/Ns with signal.
RocPoint gaussian_point(double snr, int ns, double tau) {
    const double k = std::sqrt(ns / 2.0);
    const double eps = q_function((tau - 1.0) * k);
    const double power = q_function((tau - (1.0 + snr)) * k / (1.0 + snr));
    return {eps, 1.0 - power};
}

RocCurve finish_curve(std::vector<RocPoint> raw) {
    std::sort(raw.begin(), raw.end(), [](const RocPoint& a, const RocPoint& b) {
        return a.epsilon < b.epsilon || (a.epsilon == b.epsilon && a.delta < b.delta);
    });
    std::vector<RocPoint> pts;
    pts.push_back({0.0, 1.0});
    for (const auto& p : raw) {
        if (p.epsilon <= pts.back().epsilon) {
            pts.back().delta = std::min(pts.back().delta, p.delta);
            continue;
        }
        pts.push_back({p.epsilon, std::min(p.delta, pts.back().delta)});
    }
    if (pts.back().epsilon < 1.0) {
        pts.push_back({1.0, 0.0});
    } else {
        pts.back().delta = 0.0;
    }
    return RocCurve(std::move(pts));
}

std::vector<double> threshold_grid(double snr, int ns, int n) {
    const double spread = 8.0 * std::sqrt(2.0 / ns);
    const double lo = std::max(1e-9, 1.0 - spread);
    const double hi = (1.0 + snr) * (1.0 + spread);
    std::vector<double> taus(n);
    for (int i = 0; i < n; ++i) {
        taus[i] = lo + (hi - lo) * i / (n - 1);
    }
    return taus;
}

} // namespace

RocPoint energy_operating_point(const EnergyDetectorSpec& spec) {
    spec.validate();
    return gaussian_point(spec.snr, spec.num_samples, spec.threshold);
}

RocCurve energy_roc_analytic(const EnergyDetectorSpec& spec, int grid_points) {
    spec.validate();
    if (grid_points < 2) {
        throw std::invalid_argument("grid_points must be at least 2");
    }
    std::vector<RocPoint> raw;
    for (double tau : threshold_grid(spec.snr, spec.num_samples, grid_points)) {
        raw.push_back(gaussian_point(spec.snr, spec.num_samples, tau));
    }
    return finish_curve(std::move(raw));
}

RocCurve energy_roc_monte_carlo(const EnergyDetectorSpec& spec, int trials, Rng& rng, int grid_points) {
    spec.validate();
    if (trials < 1 || grid_points < 2) {
        throw std::invalid_argument("trials and grid_points must be positive");
    }
    // Sum of Ns squared unit Gaussians is chi-square(Ns) = Gamma(Ns/2, 2).
    std::gamma_distribution<double> chi2(spec.num_samples / 2.0, 2.0);
    std::vector<double> noise(trials);
    std::vector<double> signal(trials);
    for (int t = 0; t < trials; ++t) {
        noise[t] = chi2(rng) / spec.num_samples;
        signal[t] = (1.0 + spec.snr) * chi2(rng) / spec.num_samples;
    }
    std::sort(noise.begin(), noise.end());
    std::sort(signal.begin(), signal.end());
    std::vector<RocPoint> raw;
    for (double tau : threshold_grid(spec.snr, spec.num_samples, grid_points)) {
        const auto above_noise = noise.end() - std::upper_bound(noise.begin(), noise.end(), tau);
        const auto above_signal = signal.end() - std::upper_bound(signal.begin(), signal.end(), tau);
        raw.push_back({static_cast<double>(above_noise) / trials, 1.0 - static_cast<double>(above_signal) / trials});
    }
    return finish_curve(std::move(raw));
}

SampleRequirement samples_required(double snr, double epsilon_target, double power_target) {
    if (!(snr > 0.0)) {
        throw std::invalid_argument("snr must be positive");
    }
    if (!(epsilon_target > 0.0 && epsilon_target < 1.0 && power_target > 0.0 && power_target < 1.0)) {
        throw std::invalid_argument("targets must lie in (0,1)");
    }
    if (power_target < epsilon_target) {
        throw std::invalid_argument("infeasible targets: detection power below false-alarm rate");
    }
    const double z_eps = q_inverse(epsilon_target);
    const double z_pow = q_inverse(power_target);
    // From (tau-1)k = z_eps and (tau-1-snr)k/(1+snr) = z_pow with k = sqrt(Ns/2).
    const double k = (z_eps - (1.0 + snr) * z_pow) / snr;
    SampleRequirement out;
    out.energy_samples = k <= 0.0 ? 1 : std::max(1LL, static_cast<long long>(std::ceil(2.0 * k * k - 1e-9)));
    out.matched_filter_constant = (z_eps - z_pow) * (z_eps - z_pow);
    out.matched_filter_samples = out.matched_filter_constant / snr;
    return out;
}

} // namespace osa
