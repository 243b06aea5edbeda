#include "zbias/report_json.hpp"

#include <cmath>
#include <cstdio>

namespace zbias {

namespace {

void append_string(std::string& out, std::string_view s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(c));
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void append_key(std::string& out, std::string_view key) {
    if (out.back() != '{') out += ", ";
    append_string(out, key);
    out += ": ";
}

void append_number(std::string& out, std::string_view key, double x) {
    append_key(out, key);
    out += format_json_number(x);
}

void append_count(std::string& out, std::string_view key, std::uint64_t n) {
    append_key(out, key);
    out += std::to_string(n);
}

std::string slots_body(const EffectSlots& e) {
    std::string out = "{";
    append_number(out, "true_treated", e.true_treated);
    append_number(out, "true_control", e.true_control);
    append_number(out, "true_all", e.true_all);
    append_number(out, "unadj", e.unadj);
    append_number(out, "adj_treated", e.adj_treated);
    append_number(out, "adj_control", e.adj_control);
    append_number(out, "adj_all", e.adj_all);
    append_number(out, "f", e.f);
    append_key(out, "conditioning");
    append_string(out, to_string(e.conditioning));
    return out;
}

}  // namespace

std::string format_json_number(double x) {
    if (!std::isfinite(x)) return "null";
    if (x == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string to_json(const EstimateSet& e) { return slots_body(e) + "}"; }

std::string to_json(const DceSet& e) {
    std::string out = slots_body(e);
    append_number(out, "threshold", e.threshold);
    return out + "}";
}

std::string to_json(const RrSet& e) { return slots_body(e) + "}"; }

std::string to_json(const ConditionReport& r) {
    std::string out = "{";
    append_key(out, "condition_id");
    append_string(out, r.condition_id);
    append_key(out, "holds");
    out += r.holds ? "true" : "false";
    append_number(out, "margin", r.margin);
    append_key(out, "witnesses");
    out += '[';
    for (std::size_t i = 0; i < r.witnesses.size(); ++i) {
        if (i) out += ", ";
        const Witness& w = r.witnesses[i];
        out += '{';
        append_key(out, "cell");
        append_string(out, w.cell);
        append_number(out, "lhs", w.lhs);
        append_number(out, "rhs", w.rhs);
        out += '}';
    }
    return out + "]}";
}

std::string to_json(const ConditionBundle& bundle) {
    std::string out = "[";
    for (std::size_t i = 0; i < bundle.size(); ++i) {
        if (i) out += ",\n ";
        out += to_json(bundle[i]);
    }
    return out + "]";
}

std::string to_json(const McResult& r) {
    std::string out = "{";
    append_number(out, "volume", r.volume);
    append_number(out, "stderr", r.stderr_);
    append_count(out, "draws", r.draws);
    append_count(out, "accepted", r.accepted);
    append_count(out, "seed", r.seed);
    append_count(out, "zbias_count", r.zbias_count);
    append_count(out, "tie_count", r.tie_count);
    append_count(out, "redraws", r.redraws);
    return out + "}";
}

}  // namespace zbias
