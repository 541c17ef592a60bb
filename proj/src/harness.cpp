#include "osa/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include "osa/text_util.hpp"

namespace osa {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string opt_num(const std::optional<double>& v) {
    return v ? num(*v) : std::string("nan");
}

struct SeedResult {
    TrackRecord record;
    SeedMetrics metrics;
};

SeedResult run_seed(const Scenario& sc, const ClosedLoopSetup& setup, const SensingPolicy& policy,
                    DetectorParams det, const AccessPolicy& access, const TransmissionGate& gate,
                    const RequestContext& ctx, std::uint64_t seed) {
    Rng rng(seed);
    SeedResult out;
    out.record = run_tracking(initial_process(setup, rng), policy, det, access, setup.slots, rng, gate);
    auto& m = out.metrics;
    m.seed = seed;
    m.delivered_bits = out.record.total_reward();
    m.mean_throughput = out.record.mean_throughput();
    m.collisions = collision_stats(out.record);
    for (const auto& s : out.record.slots) {
        if (s.wanted_access && !s.accessed) {
            ++m.gated;
        }
    }
    if (sc.topology && !sc.topology->links.empty()) {
        const auto& link = sc.topology->links.front();
        for (const auto& s : out.record.slots) {
            const int ch = static_cast<int>(s.action);
            if (is_opportunity(*sc.topology, link.tx, link.rx, ch, s.slot)) {
                ++m.opportunities;
                if (!conservative_detect(*sc.topology, link.tx, ch, s.slot)) {
                    ++m.overlooked;
                }
            }
        }
    }
    if (sc.policy.rules) {
        std::vector<double> power;
        power.reserve(out.record.slots.size());
        for (const auto& s : out.record.slots) {
            power.push_back(s.power);
        }
        m.compliance = check_run(*sc.policy.rules, out.record, power, ctx);
    }
    return out;
}

} // namespace

std::optional<double> SeedMetrics::overlooked_rate() const {
    if (opportunities == 0) {
        return std::nullopt;
    }
    return static_cast<double>(overlooked) / static_cast<double>(opportunities);
}

MetricsReport run(const Scenario& sc) {
    const ClosedLoopSetup setup = sc.closed_loop();
    const DetectorParams det = sc.detector.operating_point();
    const double zeta = sc.constraint.zeta;
    const SensingPolicy policy = build_policy(setup, det, zeta);
    const AccessPolicy access = optimal_access_policy(det.delta, zeta);
    const double power = sc.transmit_power();

    RequestContext ctx;
    ctx.detector_class = sc.detector.detector_class;
    if (sc.topology && !sc.topology->links.empty()) {
        ctx.location = sc.topology->secondary(sc.topology->links.front().tx).position;
    }

    TransmissionGate gate;
    if (sc.policy.rules) {
        const PolicySet* rules = &*sc.policy.rules;
        gate = [rules, ctx, power](std::uint64_t slot, std::size_t channel) {
            TransmissionRequest req;
            req.band = static_cast<int>(channel);
            req.power = power;
            req.duration = ctx.duration;
            req.location = ctx.location;
            req.time = slot;
            req.detector_class = ctx.detector_class;
            const Decision d = evaluate(*rules, req);
            if (d.verdict == Verdict::no) {
                return GateResult{false, 0.0};
            }
            return GateResult{true, tighten(req, d).power};
        };
    } else {
        gate = [power](std::uint64_t, std::size_t) { return GateResult{true, power}; };
    }

    // Seeds run concurrently; results are merged in sorted seed order.
    std::vector<std::uint64_t> seeds = setup.seeds;
    std::sort(seeds.begin(), seeds.end());
    std::vector<std::future<SeedResult>> futures;
    for (const auto seed : seeds) {
        futures.push_back(std::async(std::launch::async, [&, seed] {
            return run_seed(sc, setup, policy, det, access, gate, ctx, seed);
        }));
    }

    MetricsReport m;
    m.config_hash = sc.config_hash();
    m.seeds = seeds;
    m.strategy = sc.strategy.kind;
    m.detector = det;
    m.zeta = zeta;
    m.transmit_power = power;
    m.window = sc.run.effective_window();
    for (auto& f : futures) {
        SeedResult r = f.get();
        m.per_seed.push_back(r.metrics);
        m.records.push_back(std::move(r.record));
    }

    double bits = 0.0;
    std::uint64_t slots = 0;
    std::uint64_t opp = 0;
    std::uint64_t overlooked = 0;
    for (const auto& s : m.per_seed) {
        bits += s.delivered_bits;
        slots += s.collisions.slots;
        m.collisions.slots += s.collisions.slots;
        m.collisions.busy_slots += s.collisions.busy_slots;
        m.collisions.collisions += s.collisions.collisions;
        opp += s.opportunities;
        overlooked += s.overlooked;
        m.policy_violations += s.compliance.violations.size();
    }
    m.mean_throughput = slots == 0 ? 0.0 : bits / static_cast<double>(slots);
    if (m.per_seed.size() >= 2) {
        double ss = 0.0;
        for (const auto& s : m.per_seed) {
            ss += (s.mean_throughput - m.mean_throughput) * (s.mean_throughput - m.mean_throughput);
        }
        const double n = static_cast<double>(m.per_seed.size());
        m.throughput_stderr = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    } else {
        m.throughput_stderr = throughput_mean_stderr(m.records).second;
    }
    if (opp > 0) {
        m.overlooked_rate = static_cast<double>(overlooked) / static_cast<double>(opp);
    }
    if (const auto cond = m.collisions.conditional()) {
        const double sigma = std::sqrt(zeta * (1.0 - zeta) / static_cast<double>(m.collisions.busy_slots));
        m.constraint_violated = *cond > zeta + 3.0 * sigma;
    }

    const std::size_t t_len = setup.slots;
    m.cumulative_series.assign(t_len, 0.0);
    m.windowed_series.assign(t_len, 0.0);
    for (const auto& r : m.records) {
        const auto cum = r.cumulative_throughput();
        const auto win = r.windowed_throughput(m.window);
        for (std::size_t t = 0; t < t_len; ++t) {
            m.cumulative_series[t] += cum[t];
            m.windowed_series[t] += win[t];
        }
    }
    const double n_seeds = static_cast<double>(m.records.size());
    for (std::size_t t = 0; t < t_len; ++t) {
        m.cumulative_series[t] /= n_seeds;
        m.windowed_series[t] /= n_seeds;
    }
    return m;
}

SweepAxis parse_sweep_axis(const std::string& s) {
    if (s == "delta") {
        return SweepAxis::delta;
    }
    if (s == "zeta") {
        return SweepAxis::zeta;
    }
    if (s == "snr") {
        return SweepAxis::snr;
    }
    if (s == "horizon") {
        return SweepAxis::horizon;
    }
    throw std::invalid_argument("unknown sweep axis '" + s + "'");
}

const char* to_string(SweepAxis a) {
    switch (a) {
    case SweepAxis::delta:
        return "delta";
    case SweepAxis::zeta:
        return "zeta";
    case SweepAxis::snr:
        return "snr";
    case SweepAxis::horizon:
        return "horizon";
    }
    return "?";
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> out;
    const std::string s = trim(spec);
    if (s.find(':') != std::string::npos) {
        const auto parts = split(s, ':');
        if (parts.size() != 3) {
            throw std::invalid_argument("grid must be lo:hi:step");
        }
        const double lo = parse_double(parts[0]);
        const double hi = parse_double(parts[1]);
        const double step = parse_double(parts[2]);
        if (!(step > 0.0) || hi < lo) {
            throw std::invalid_argument("grid needs step > 0 and hi >= lo");
        }
        const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
        for (long long i = 0; i <= n; ++i) {
            // Round to the step's decimal resolution so 0.1 prints as 0.1.
            const double v = lo + static_cast<double>(i) * step;
            out.push_back(std::round(v * 1e12) / 1e12);
        }
    } else if (!s.empty()) {
        out = parse_double_list(s);
    }
    if (out.empty()) {
        throw std::invalid_argument("empty grid");
    }
    return out;
}

std::vector<SweepRow> sweep(const Scenario& scenario, SweepAxis axis, const std::vector<double>& grid) {
    if (grid.empty()) {
        throw std::invalid_argument("empty grid");
    }
    switch (axis) {
    case SweepAxis::snr:
        if (scenario.detector.kind != DetectorKind::energy) {
            throw std::invalid_argument("snr sweep needs an energy detector (snr=, samples=, threshold=)");
        }
        break;
    case SweepAxis::horizon:
        if (scenario.strategy.kind != StrategyKind::value_iteration) {
            throw std::invalid_argument("horizon sweep needs strategy kind=value_iteration");
        }
        break;
    default:
        break;
    }
    std::vector<SweepRow> rows;
    for (double v : grid) {
        Scenario sc = scenario;
        switch (axis) {
        case SweepAxis::delta:
            if (sc.detector.kind == DetectorKind::energy) {
                sc.detector.roc = energy_roc_analytic(*sc.detector.energy);
                sc.detector.kind = DetectorKind::roc;
            }
            sc.detector.delta = v;
            break;
        case SweepAxis::zeta:
            sc.constraint.zeta = v;
            sc.constraint.validate();
            break;
        case SweepAxis::snr:
            sc.detector.energy->snr = v;
            sc.detector.energy->validate();
            break;
        case SweepAxis::horizon:
            sc.strategy.horizon = static_cast<int>(v);
            if (sc.strategy.horizon < 1) {
                throw std::invalid_argument("horizon must be at least 1");
            }
            break;
        }
        const MetricsReport m = run(sc);
        SweepRow row;
        row.value = v;
        row.detector = m.detector;
        row.mean_throughput = m.mean_throughput;
        row.throughput_stderr = m.throughput_stderr;
        row.collision_conditional = m.collisions.conditional();
        if (row.collision_conditional) {
            const double c = *row.collision_conditional;
            row.collision_conditional_stderr = std::sqrt(c * (1.0 - c) / static_cast<double>(m.collisions.busy_slots));
        }
        row.collision_unconditional = m.collisions.unconditional();
        row.policy_violations = m.policy_violations;
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << to_string(axis)
        << ",op_delta,op_epsilon,mean_throughput,throughput_stderr,collision_conditional,collision_conditional_stderr,"
           "collision_unconditional,policy_violations\n";
    for (const auto& r : rows) {
        out << num(r.value) << ',' << num(r.detector.delta) << ',' << num(r.detector.epsilon) << ','
            << num(r.mean_throughput) << ',' << num(r.throughput_stderr) << ',' << opt_num(r.collision_conditional)
            << ',' << num(r.collision_conditional_stderr) << ',' << num(r.collision_unconditional) << ','
            << r.policy_violations << '\n';
    }
    return out.str();
}

std::string trace_csv(const TrackRecord& record) {
    std::ostringstream out;
    out << "slot,action,observation,accessed,true_state_bits,reward,collision_flag";
    for (std::size_t i = 0; i < record.num_channels; ++i) {
        out << ",belief_" << i;
    }
    out << ",power\n";
    for (const auto& s : record.slots) {
        out << s.slot << ',' << s.action << ',' << to_string(s.observation) << ',' << (s.accessed ? 1 : 0) << ',';
        for (std::size_t i = 0; i < record.num_channels; ++i) {
            out << (((s.true_state_bits >> i) & 1U) != 0 ? '1' : '0');
        }
        out << ',' << num(s.reward) << ',' << (s.collision ? 1 : 0);
        for (double b : s.belief) {
            out << ',' << num(b);
        }
        out << ',' << num(s.power) << '\n';
    }
    return out.str();
}

TrackRecord parse_trace_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("trace: empty input");
    }
    const auto header = split(line, ',');
    if (header.size() < 8 || header[0] != "slot" || header.back() != "power") {
        throw ConfigError("trace", 1, "unexpected header");
    }
    TrackRecord r;
    r.num_channels = header.size() - 8;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != header.size()) {
            throw ConfigError("trace", line_no, "wrong column count");
        }
        try {
            TrackSlot s;
            s.slot = static_cast<std::uint64_t>(parse_int(f[0]));
            s.action = static_cast<std::size_t>(parse_int(f[1]));
            if (f[2] != "idle" && f[2] != "busy") {
                throw std::invalid_argument("observation must be idle or busy");
            }
            s.observation = f[2] == "idle" ? Observation::idle : Observation::busy;
            s.accessed = parse_int(f[3]) != 0;
            s.wanted_access = s.accessed;
            if (f[4].size() != r.num_channels) {
                throw std::invalid_argument("state bits length mismatch");
            }
            for (std::size_t i = 0; i < r.num_channels; ++i) {
                if (f[4][i] == '1') {
                    s.true_state_bits |= std::uint64_t{1} << i;
                } else if (f[4][i] != '0') {
                    throw std::invalid_argument("state bits must be 0/1");
                }
            }
            s.reward = parse_double(f[5]);
            s.collision = parse_int(f[6]) != 0;
            for (std::size_t i = 0; i < r.num_channels; ++i) {
                s.belief.push_back(parse_double(f[7 + i]));
            }
            s.power = parse_double(f.back());
            r.slots.push_back(std::move(s));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("trace", line_no, e.what());
        }
    }
    return r;
}

std::string metrics_csv(const MetricsReport& m) {
    std::ostringstream out;
    out << "seed,mean_throughput,delivered_bits,slots,busy_slots,collisions,collision_conditional,"
           "collision_unconditional,overlooked_rate,gated,policy_violations\n";
    std::uint64_t gated = 0;
    for (const auto& s : m.per_seed) {
        out << s.seed << ',' << num(s.mean_throughput) << ',' << num(s.delivered_bits) << ',' << s.collisions.slots
            << ',' << s.collisions.busy_slots << ',' << s.collisions.collisions << ','
            << opt_num(s.collisions.conditional()) << ',' << num(s.collisions.unconditional()) << ','
            << opt_num(s.overlooked_rate()) << ',' << s.gated << ',' << s.compliance.violations.size() << '\n';
        gated += s.gated;
    }
    out << "all," << num(m.mean_throughput) << ',' << num(m.mean_throughput * static_cast<double>(m.collisions.slots))
        << ',' << m.collisions.slots << ',' << m.collisions.busy_slots << ',' << m.collisions.collisions << ','
        << opt_num(m.collisions.conditional()) << ',' << num(m.collisions.unconditional()) << ','
        << opt_num(m.overlooked_rate) << ',' << gated << ',' << m.policy_violations << '\n';
    return out.str();
}

std::string series_csv(const MetricsReport& m) {
    std::ostringstream out;
    out << "slot,cumulative_throughput,windowed_throughput\n";
    for (std::size_t t = 0; t < m.cumulative_series.size(); ++t) {
        out << t << ',' << num(m.cumulative_series[t]) << ',' << num(m.windowed_series[t]) << '\n';
    }
    return out.str();
}

std::string summary_text(const MetricsReport& m, const Scenario& sc) {
    std::ostringstream out;
    out << "config: " << sc.source << '\n';
    out << "config_hash: " << m.config_hash << '\n';
    out << "seeds:";
    for (std::size_t i = 0; i < m.seeds.size(); ++i) {
        out << (i ? "," : " ") << m.seeds[i];
    }
    out << '\n';
    out << "strategy: " << to_string(m.strategy);
    if (m.strategy == StrategyKind::value_iteration) {
        out << " horizon=" << sc.strategy.horizon << " grid=" << sc.strategy.grid_resolution;
    }
    out << '\n';
    out << "channels: " << sc.chains.size() << (sc.joint ? " (joint chain)" : " (independent chains)") << '\n';
    out << "slots_per_seed: " << sc.run.slots << '\n';
    out << "detector: epsilon=" << short_num(m.detector.epsilon) << " delta=" << short_num(m.detector.delta)
        << " class=" << sc.detector.detector_class << '\n';
    out << "zeta: " << short_num(m.zeta) << '\n';
    out << "transmit_power_w: " << short_num(m.transmit_power) << '\n';
    out << "mean_throughput: " << short_num(m.mean_throughput) << " (stderr " << short_num(m.throughput_stderr)
        << ")\n";
    const auto cond = m.collisions.conditional();
    out << "collision_busy_conditional: " << (cond ? short_num(*cond) : std::string("undefined")) << '\n';
    out << "collision_unconditional: " << short_num(m.collisions.unconditional()) << '\n';
    out << "collision_space_reported: " << to_string(sc.constraint.collision_space) << '\n';
    out << "overlooked_opportunity_rate: " << (m.overlooked_rate ? short_num(*m.overlooked_rate) : std::string("n/a"))
        << '\n';
    out << "policy_violations: " << m.policy_violations << '\n';
    out << "constraint_check: " << (m.constraint_violated ? "VIOLATED" : "ok") << '\n';
    if (!cond) {
        out << "note: busy-conditional collision rate undefined (the sensed channel was never busy); "
               "only the unconditional rate is meaningful for this run\n";
    }
    return out.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    f << contents;
    if (!f) {
        throw std::runtime_error("write failed for '" + path + "'");
    }
}

std::vector<std::string> report(const MetricsReport& m, const Scenario& scenario, const std::string& dir,
                                ReportFormat format) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
    }
    std::vector<std::string> written;
    auto put = [&](const std::string& name, const std::string& contents) {
        const std::string path = (std::filesystem::path(dir) / name).string();
        write_text_file(path, contents);
        written.push_back(path);
    };
    if (format == ReportFormat::csv) {
        for (std::size_t i = 0; i < m.records.size(); ++i) {
            put("trace_seed" + std::to_string(m.seeds[i]) + ".csv", trace_csv(m.records[i]));
        }
        put("metrics.csv", metrics_csv(m));
        put("series.csv", series_csv(m));
    } else {
        put("summary.txt", summary_text(m, scenario));
    }
    return written;
}

} // namespace osa
