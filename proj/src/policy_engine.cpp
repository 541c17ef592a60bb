#include "osa/policy_engine.hpp"

#include <algorithm>
#include <sstream>

#include "osa/text_util.hpp"

namespace osa {

namespace {

std::set<int> int_set(const std::string& s) {
    const auto v = parse_int_list(s);
    return {v.begin(), v.end()};
}

std::string join(const std::set<int>& s) {
    std::string out;
    for (int v : s) {
        out += (out.empty() ? "" : ",") + std::to_string(v);
    }
    return out;
}

Effect parse_effect(const std::string& s) {
    if (s == "permit") {
        return Effect::permit;
    }
    if (s == "deny") {
        return Effect::deny;
    }
    throw std::invalid_argument("effect must be permit or deny, got '" + s + "'");
}

PolicyRule parse_rule(const KeyValueLine& kv) {
    static const std::set<std::string> known = {
        "id",         "priority",   "match.band", "match.region",  "match.time", "match.detector_class",
        "effect",     "cap.power",  "cap.duration", "cap.bands"};
    for (const auto& [k, v] : kv.values) {
        if (known.count(k) == 0) {
            throw std::invalid_argument("unknown rule field '" + k + "'");
        }
    }
    if (!kv.positional.empty()) {
        throw std::invalid_argument("unexpected token '" + kv.positional.front() + "'");
    }
    PolicyRule r;
    r.id = kv.require("id");
    r.priority = static_cast<int>(parse_int(kv.require("priority")));
    r.effect = parse_effect(kv.require("effect"));
    if (auto v = kv.get("match.band")) {
        r.match.bands = int_set(*v);
    }
    if (auto v = kv.get("match.region")) {
        const auto c = parse_double_list(*v);
        if (c.size() != 4 || c[0] > c[2] || c[1] > c[3]) {
            throw std::invalid_argument("match.region must be x_min,y_min,x_max,y_max");
        }
        r.match.region = Region{c[0], c[1], c[2], c[3]};
    }
    if (auto v = kv.get("match.time")) {
        const auto dash = v->find('-');
        if (dash == std::string::npos) {
            throw std::invalid_argument("match.time must be lo-hi");
        }
        const auto lo = parse_int(v->substr(0, dash));
        const auto hi = parse_int(v->substr(dash + 1));
        if (lo < 0 || hi < lo) {
            throw std::invalid_argument("match.time range is empty");
        }
        r.match.time = std::make_pair(static_cast<std::uint64_t>(lo), static_cast<std::uint64_t>(hi));
    }
    if (auto v = kv.get("match.detector_class")) {
        std::set<std::string> classes;
        for (auto& c : split(*v, ',')) {
            classes.insert(c);
        }
        r.match.detector_classes = std::move(classes);
    }
    if (auto v = kv.get("cap.power")) {
        r.caps.max_power = parse_double(*v);
    }
    if (auto v = kv.get("cap.duration")) {
        r.caps.max_duration = static_cast<int>(parse_int(*v));
    }
    if (auto v = kv.get("cap.bands")) {
        r.caps.allowed_bands = int_set(*v);
    }
    return r;
}

RuleCaps merge_caps(const RuleCaps& a, const RuleCaps& b) {
    RuleCaps out = a;
    if (b.max_power) {
        out.max_power = out.max_power ? std::min(*out.max_power, *b.max_power) : *b.max_power;
    }
    if (b.max_duration) {
        out.max_duration = out.max_duration ? std::min(*out.max_duration, *b.max_duration) : *b.max_duration;
    }
    if (b.allowed_bands) {
        if (out.allowed_bands) {
            std::set<int> both;
            std::set_intersection(out.allowed_bands->begin(), out.allowed_bands->end(), b.allowed_bands->begin(),
                                  b.allowed_bands->end(), std::inserter(both, both.begin()));
            out.allowed_bands = std::move(both);
        } else {
            out.allowed_bands = b.allowed_bands;
        }
    }
    return out;
}

} // namespace

void TransmissionRequest::validate() const {
    if (!(power >= 0.0)) {
        throw std::invalid_argument("request power must be nonnegative");
    }
    if (duration < 1) {
        throw std::invalid_argument("request duration must be at least 1 slot");
    }
}

TransmissionRequest TransmissionRequest::parse(const std::string& text) {
    TransmissionRequest r;
    std::string flat = text;
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    const auto kv = parse_key_values(strip_comment(flat));
    static const std::set<std::string> known = {"band", "power", "duration", "x", "y", "time", "class"};
    for (const auto& [k, v] : kv.values) {
        if (known.count(k) == 0) {
            throw std::invalid_argument("unknown request field '" + k + "'");
        }
    }
    if (!kv.keyword.empty() || !kv.positional.empty()) {
        throw std::invalid_argument("request must be key=value tokens");
    }
    r.band = static_cast<int>(parse_int(kv.require("band")));
    r.power = parse_double(kv.require("power"));
    if (auto v = kv.get("duration")) {
        r.duration = static_cast<int>(parse_int(*v));
    }
    if (auto v = kv.get("x")) {
        r.location.x = parse_double(*v);
    }
    if (auto v = kv.get("y")) {
        r.location.y = parse_double(*v);
    }
    if (auto v = kv.get("time")) {
        const auto t = parse_int(*v);
        if (t < 0) {
            throw std::invalid_argument("time must be nonnegative");
        }
        r.time = static_cast<std::uint64_t>(t);
    }
    if (auto v = kv.get("class")) {
        r.detector_class = *v;
    }
    r.validate();
    return r;
}

bool matches(const PolicyRule& rule, const TransmissionRequest& req) {
    const auto& m = rule.match;
    if (m.bands && m.bands->count(req.band) == 0) {
        return false;
    }
    if (m.region && !m.region->contains(req.location)) {
        return false;
    }
    if (m.time && (req.time < m.time->first || req.time > m.time->second)) {
        return false;
    }
    if (m.detector_classes && m.detector_classes->count(req.detector_class) == 0) {
        return false;
    }
    return true;
}

void PolicySet::validate() const {
    std::set<std::string> ids;
    for (const auto& r : rules) {
        if (!ids.insert(r.id).second) {
            throw std::invalid_argument("duplicate rule id '" + r.id + "'");
        }
        if ((r.caps.max_power && *r.caps.max_power < 0.0) || (r.caps.max_duration && *r.caps.max_duration < 0)) {
            throw std::invalid_argument("rule '" + r.id + "' has a negative cap");
        }
    }
}

PolicySet PolicySet::parse(const std::string& text) {
    PolicySet p;
    bool have_default = false;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = strip_comment(raw);
        if (line.empty()) {
            continue;
        }
        try {
            const auto kv = parse_key_values(line);
            if (kv.keyword == "default") {
                if (kv.positional.size() != 1 || !kv.values.empty()) {
                    throw std::invalid_argument("expected 'default permit|deny'");
                }
                if (have_default) {
                    throw std::invalid_argument("default declared twice");
                }
                p.default_effect = parse_effect(kv.positional[0]);
                have_default = true;
            } else if (kv.keyword == "rule") {
                p.rules.push_back(parse_rule(kv));
                p.validate();
            } else {
                throw std::invalid_argument("expected 'rule' or 'default' record");
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError("policy", line_no, e.what());
        }
    }
    if (!have_default) {
        throw ConfigError("policy: missing 'default permit|deny' record");
    }
    if (p.rules.empty()) {
        throw ConfigError("policy: no rules");
    }
    return p;
}

PolicySet PolicySet::load(const std::string& path) {
    return parse(read_file(path));
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::yes:
        return "yes";
    case Verdict::no:
        return "no";
    case Verdict::yes_with_constraints:
        return "yes_with_constraints";
    }
    return "?";
}

Decision evaluate(const PolicySet& policy, const TransmissionRequest& request) {
    if (policy.rules.empty()) {
        throw std::invalid_argument("policy has no rules");
    }
    request.validate();
    std::vector<const PolicyRule*> top;
    for (const auto& r : policy.rules) {
        if (!matches(r, request)) {
            continue;
        }
        if (top.empty() || r.priority > top.front()->priority) {
            top.assign(1, &r);
        } else if (r.priority == top.front()->priority) {
            top.push_back(&r);
        }
    }

    Decision d;
    if (top.empty()) {
        d.verdict = policy.default_effect == Effect::permit ? Verdict::yes : Verdict::no;
        d.reason = "no rule matched; default applies";
        return d;
    }
    for (const auto* r : top) {
        d.rule_ids.push_back(r->id);
        if (r->effect != top.front()->effect) {
            throw AmbiguousPolicy("rules '" + top.front()->id + "' and '" + r->id + "' conflict at priority " +
                                  std::to_string(r->priority));
        }
    }
    if (top.front()->effect == Effect::deny) {
        d.verdict = Verdict::no;
        d.reason = "denied by rule";
        return d;
    }

    RuleCaps caps;
    for (const auto* r : top) {
        caps = merge_caps(caps, r->caps);
    }
    if (caps.allowed_bands && caps.allowed_bands->count(request.band) == 0) {
        d.verdict = Verdict::no;
        d.reason = "band " + std::to_string(request.band) + " outside permitted bands {" + join(*caps.allowed_bands) + "}";
        return d;
    }
    if (caps.max_power && request.power > *caps.max_power) {
        d.binding.max_power = caps.max_power;
    }
    if (caps.max_duration && request.duration > *caps.max_duration) {
        if (*caps.max_duration < 1) {
            d.verdict = Verdict::no;
            d.reason = "duration cap below one slot";
            return d;
        }
        d.binding.max_duration = caps.max_duration;
    }
    if (d.binding.empty()) {
        d.verdict = Verdict::yes;
        d.reason = "permitted";
    } else {
        d.verdict = Verdict::yes_with_constraints;
        d.reason = "permitted after tightening";
    }
    return d;
}

TransmissionRequest tighten(const TransmissionRequest& request, const Decision& decision) {
    TransmissionRequest out = request;
    if (decision.binding.max_power) {
        out.power = std::min(out.power, *decision.binding.max_power);
    }
    if (decision.binding.max_duration) {
        out.duration = std::min(out.duration, *decision.binding.max_duration);
    }
    return out;
}

std::string format_decision(const Decision& d) {
    std::ostringstream out;
    out << to_string(d.verdict);
    if (d.verdict == Verdict::yes_with_constraints) {
        out << '(';
        bool first = true;
        if (d.binding.max_power) {
            out << "power<=" << *d.binding.max_power;
            first = false;
        }
        if (d.binding.max_duration) {
            out << (first ? "" : ", ") << "duration<=" << *d.binding.max_duration;
        }
        out << ')';
    }
    if (!d.rule_ids.empty()) {
        out << " rule=";
        for (std::size_t i = 0; i < d.rule_ids.size(); ++i) {
            out << (i ? "," : "") << d.rule_ids[i];
        }
    }
    out << " reason=\"" << d.reason << '"';
    return out.str();
}

ComplianceReport check_run(const PolicySet& policy, const TrackRecord& record, const std::vector<double>& power_trace,
                           const RequestContext& context) {
    if (power_trace.size() != record.slots.size()) {
        throw std::invalid_argument("misaligned trace lengths: " + std::to_string(record.slots.size()) + " slots vs " +
                                    std::to_string(power_trace.size()) + " power samples");
    }
    ComplianceReport report;
    for (std::size_t i = 0; i < record.slots.size(); ++i) {
        const auto& s = record.slots[i];
        if (!s.accessed) {
            continue;
        }
        ++report.transmissions;
        TransmissionRequest req;
        req.band = static_cast<int>(s.action);
        req.power = power_trace[i];
        req.duration = context.duration;
        req.location = context.location;
        req.time = s.slot;
        req.detector_class = context.detector_class;
        const Decision d = evaluate(policy, req);
        if (d.verdict == Verdict::yes) {
            continue;
        }
        if (d.verdict == Verdict::no) {
            ++report.hard_denials;
        } else {
            ++report.cap_violations;
        }
        report.violations.push_back({s.slot, d.verdict, format_decision(d)});
    }
    return report;
}

} // namespace osa
