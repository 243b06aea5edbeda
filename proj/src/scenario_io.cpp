#include "zbias/scenario_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "zbias/error.hpp"

namespace zbias {

namespace {

struct Entry {
    std::string value;
    std::size_t line = 0;
};

/// Key/value pairs of one block (the whole file, or one stratum body).
struct Block {
    std::map<std::string, Entry> entries;
    std::size_t begin_line = 0;
    std::string label;
    double weight = 0.0;
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\f\v");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\f\v");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_number(std::string_view token, std::size_t line, const std::string& field) {
    token = trim(token);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (token.empty() || ec != std::errc{} || ptr != last) {
        throw ParseError(line, "field " + field + ": '" + std::string(token) + "' is not a decimal number");
    }
    return value;
}

std::vector<double> parse_list(const Entry& e, const std::string& field) {
    std::vector<double> out;
    for (auto tok : split(e.value, ',')) out.push_back(parse_number(tok, e.line, field));
    return out;
}

bool parse_bool(const Entry& e, const std::string& field) {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    throw ParseError(e.line, "field " + field + ": expected true or false, got '" + e.value + "'");
}

/// Splits `name[i][j]...` into its base name and indices. Returns nullopt for plain names.
std::optional<std::pair<std::string, std::vector<std::size_t>>> split_indexed(const std::string& key,
                                                                               std::size_t line) {
    const auto open = key.find('[');
    if (open == std::string::npos) return std::nullopt;
    std::string base = key.substr(0, open);
    std::vector<std::size_t> idx;
    std::size_t pos = open;
    while (pos < key.size()) {
        if (key[pos] != '[') throw ParseError(line, "malformed indexed key '" + key + "'");
        const auto close = key.find(']', pos);
        if (close == std::string::npos) throw ParseError(line, "malformed indexed key '" + key + "'");
        const std::string_view digits(key.data() + pos + 1, close - pos - 1);
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) {
            throw ParseError(line, "malformed index in key '" + key + "'");
        }
        idx.push_back(v);
        pos = close + 1;
    }
    return std::make_pair(std::move(base), std::move(idx));
}

const Entry& require(const Block& b, const std::string& key) {
    const auto it = b.entries.find(key);
    if (it == b.entries.end()) {
        throw ParseError(b.begin_line, "missing required key '" + key + "'");
    }
    return it->second;
}

BinaryScenario parse_binary(const Block& b) {
    static const std::array<std::string_view, 12> known = {"kind", "pZ",  "pU",  "p11", "p10", "p01",
                                                           "p00",  "r11", "r10", "r01", "r00", "binary_outcome"};
    for (const auto& [key, e] : b.entries) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ParseError(e.line, "unknown key '" + key + "' for kind binary");
        }
    }
    auto num = [&](const std::string& key) { return parse_number(require(b, key).value, require(b, key).line, key); };
    BinaryScenario s;
    s.p_z = num("pZ");
    s.p_u = num("pU");
    for (int x = 0; x < 2; ++x) {
        for (int u = 0; u < 2; ++u) {
            const std::string suffix = std::to_string(x) + std::to_string(u);
            s.p[x][u] = num("p" + suffix);
            s.r[x][u] = num("r" + suffix);
        }
    }
    if (auto it = b.entries.find("binary_outcome"); it != b.entries.end()) {
        s.binary_outcome = parse_bool(it->second, "binary_outcome");
    }
    validate(s);
    return s;
}

OutcomeLaw parse_law(const Entry& e, const std::string& field) {
    OutcomeLaw law;
    for (auto item : split(e.value, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) {
            throw ParseError(e.line, "field " + field + ": expected value:prob pairs");
        }
        law.values.push_back(parse_number(item.substr(0, colon), e.line, field));
        law.probs.push_back(parse_number(item.substr(colon + 1), e.line, field));
    }
    return law;
}

DiscreteScenario parse_discrete(const Block& b) {
    DiscreteScenario s;
    s.z_support = parse_list(require(b, "z_support"), "z_support");
    s.z_pmf = parse_list(require(b, "z_pmf"), "z_pmf");
    s.u_support = parse_list(require(b, "u_support"), "u_support");
    s.u_pmf = parse_list(require(b, "u_pmf"), "u_pmf");
    const std::size_t nz = s.z_support.size();
    const std::size_t nu = s.u_support.size();
    s.treat = Table(nz, nu);
    s.outcome_mean = {Table(nz, nu), Table(nz, nu)};
    Table seen_treat(nz, nu);
    std::array<Table, 2> seen_mean{Table(nz, nu), Table(nz, nu)};
    std::array<std::vector<std::optional<OutcomeLaw>>, 2> laws{std::vector<std::optional<OutcomeLaw>>(nu),
                                                               std::vector<std::optional<OutcomeLaw>>(nu)};
    bool any_law = false;

    for (const auto& [key, e] : b.entries) {
        if (key == "kind" || key == "z_support" || key == "z_pmf" || key == "u_support" || key == "u_pmf") continue;
        if (key == "binary_outcome") {
            s.binary_outcome = parse_bool(e, key);
            continue;
        }
        if (key == "direct_effect") {
            s.direct_effect = parse_bool(e, key);
            continue;
        }
        const auto indexed = split_indexed(key, e.line);
        if (!indexed) throw ParseError(e.line, "unknown key '" + key + "' for kind discrete");
        const auto& [base, idx] = *indexed;
        if (base == "treat" && idx.size() == 2) {
            if (idx[0] >= nz || idx[1] >= nu) throw ParseError(e.line, "index out of range in '" + key + "'");
            s.treat(idx[0], idx[1]) = parse_number(e.value, e.line, key);
            seen_treat(idx[0], idx[1]) = 1.0;
        } else if (base == "mean" && idx.size() == 3) {
            if (idx[0] > 1 || idx[1] >= nz || idx[2] >= nu) {
                throw ParseError(e.line, "index out of range in '" + key + "'");
            }
            s.outcome_mean[idx[0]](idx[1], idx[2]) = parse_number(e.value, e.line, key);
            seen_mean[idx[0]](idx[1], idx[2]) = 1.0;
        } else if (base == "law" && idx.size() == 2) {
            if (idx[0] > 1 || idx[1] >= nu) throw ParseError(e.line, "index out of range in '" + key + "'");
            laws[idx[0]][idx[1]] = parse_law(e, key);
            any_law = true;
        } else {
            throw ParseError(e.line, "unknown key '" + key + "' for kind discrete");
        }
    }
    for (std::size_t i = 0; i < nz; ++i) {
        for (std::size_t j = 0; j < nu; ++j) {
            if (seen_treat(i, j) == 0.0) {
                throw ParseError(b.begin_line,
                                 "missing required key 'treat[" + std::to_string(i) + "][" + std::to_string(j) + "]'");
            }
            for (int a = 0; a < 2; ++a) {
                if (seen_mean[a](i, j) == 0.0) {
                    throw ParseError(b.begin_line, "missing required key 'mean[" + std::to_string(a) + "][" +
                                                       std::to_string(i) + "][" + std::to_string(j) + "]'");
                }
            }
        }
    }
    if (any_law) {
        std::array<std::vector<OutcomeLaw>, 2> full;
        for (int a = 0; a < 2; ++a) {
            for (std::size_t j = 0; j < nu; ++j) {
                if (!laws[a][j]) {
                    throw ParseError(b.begin_line, "law given for some cells but missing 'law[" + std::to_string(a) +
                                                       "][" + std::to_string(j) + "]'");
                }
                full[a].push_back(*laws[a][j]);
            }
        }
        s.outcome_law = std::move(full);
    }
    validate(s);
    return s;
}

PotentialOutcomeScenario parse_potential_outcomes(const Block& b) {
    PotentialOutcomeScenario s;
    s.pi_support = parse_list(require(b, "pi_support"), "pi_support");
    s.pi_pmf = parse_list(require(b, "pi_pmf"), "pi_pmf");
    const Entry& pairs = require(b, "y_pairs");
    for (auto item : split(pairs.value, ';')) {
        if (item.empty()) continue;
        const auto colon = item.find(':');
        const auto comma = item.find(',');
        if (colon == std::string_view::npos || comma == std::string_view::npos || comma > colon) {
            throw ParseError(pairs.line, "field y_pairs: expected entries of the form y1,y0:prob separated by ';'");
        }
        OutcomePair p;
        p.y1 = parse_number(item.substr(0, comma), pairs.line, "y_pairs");
        p.y0 = parse_number(item.substr(comma + 1, colon - comma - 1), pairs.line, "y_pairs");
        p.prob = parse_number(item.substr(colon + 1), pairs.line, "y_pairs");
        s.pairs.push_back(p);
    }
    const std::size_t nk = s.pi_support.size();
    const std::size_t np = s.pairs.size();
    s.treat = Table(nk, np);
    Table seen(nk, np);
    for (const auto& [key, e] : b.entries) {
        if (key == "kind" || key == "pi_support" || key == "pi_pmf" || key == "y_pairs") continue;
        const auto indexed = split_indexed(key, e.line);
        if (!indexed || indexed->first != "treat" || indexed->second.size() != 2) {
            throw ParseError(e.line, "unknown key '" + key + "' for kind potential_outcomes");
        }
        const auto& idx = indexed->second;
        if (idx[0] >= nk || idx[1] >= np) throw ParseError(e.line, "index out of range in '" + key + "'");
        s.treat(idx[0], idx[1]) = parse_number(e.value, e.line, key);
        seen(idx[0], idx[1]) = 1.0;
    }
    for (std::size_t k = 0; k < nk; ++k) {
        for (std::size_t j = 0; j < np; ++j) {
            if (seen(k, j) == 0.0) {
                throw ParseError(b.begin_line,
                                 "missing required key 'treat[" + std::to_string(k) + "][" + std::to_string(j) + "]'");
            }
        }
    }
    validate(s);
    return s;
}

DiscreteScenario parse_stratum_body(const Block& b) {
    const auto it = b.entries.find("kind");
    if (it == b.entries.end() || it->second.value == "discrete") return parse_discrete(b);
    if (it->second.value == "binary") return to_discrete(parse_binary(b));
    throw ParseError(it->second.line, "stratum body must be of kind discrete or binary");
}

}  // namespace

AnyScenario parse_scenario(std::string_view text) {
    Block top;
    top.begin_line = 1;
    std::vector<Block> strata;
    Block* current = &top;
    bool in_stratum = false;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string_view line = trim(raw);
        if (line.empty()) continue;

        if (line.starts_with("begin ")) {
            std::istringstream words{std::string(line)};
            std::string begin_kw, what, label, weight_tok, extra;
            words >> begin_kw >> what >> label >> weight_tok;
            if (what != "stratum" || label.empty() || weight_tok.empty() || (words >> extra)) {
                throw ParseError(line_no, "expected 'begin stratum <label> <weight>'");
            }
            if (in_stratum) throw ParseError(line_no, "nested stratum blocks are not allowed");
            strata.emplace_back();
            strata.back().begin_line = line_no;
            strata.back().label = label;
            strata.back().weight = parse_number(weight_tok, line_no, "stratum weight");
            current = &strata.back();
            in_stratum = true;
            continue;
        }
        if (line == "end stratum") {
            if (!in_stratum) throw ParseError(line_no, "'end stratum' without matching 'begin stratum'");
            current = &top;
            in_stratum = false;
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ParseError(line_no, "empty key");
        if (value.empty()) throw ParseError(line_no, "empty value for key '" + key + "'");
        if (!current->entries.emplace(key, Entry{value, line_no}).second) {
            throw ParseError(line_no, "duplicate key '" + key + "'");
        }
    }
    if (in_stratum) throw ParseError(line_no, "unterminated stratum block");

    const auto kind_it = top.entries.find("kind");
    if (kind_it == top.entries.end()) throw ParseError(0, "missing required key 'kind'");
    const std::string& kind = kind_it->second.value;

    if (kind != "covariate_family" && !strata.empty()) {
        throw ParseError(strata.front().begin_line, "stratum blocks are only allowed for kind covariate_family");
    }
    if (kind == "binary") return parse_binary(top);
    if (kind == "discrete") return parse_discrete(top);
    if (kind == "potential_outcomes") return parse_potential_outcomes(top);
    if (kind == "covariate_family") {
        for (const auto& [key, e] : top.entries) {
            if (key != "kind") throw ParseError(e.line, "unexpected key '" + key + "' outside stratum blocks");
        }
        CovariateFamily fam;
        for (const Block& b : strata) {
            try {
                fam.strata.push_back(Stratum{b.label, b.weight, parse_stratum_body(b)});
            } catch (const ValidationError& e) {
                throw ValidationError("stratum '" + b.label + "': " + e.what());
            }
        }
        validate(fam);
        return fam;
    }
    throw ParseError(kind_it->second.line, "unknown kind '" + kind + "'");
}

AnyScenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error reading scenario file '" + path.string() + "'");
    return parse_scenario(buf.str());
}

std::string format_shortest(double x) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), ptr);
}

namespace {

std::string join(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += format_shortest(xs[i]);
    }
    return out;
}

void write_discrete_body(std::ostringstream& os, const DiscreteScenario& s) {
    os << "z_support = " << join(s.z_support) << '\n';
    os << "z_pmf = " << join(s.z_pmf) << '\n';
    os << "u_support = " << join(s.u_support) << '\n';
    os << "u_pmf = " << join(s.u_pmf) << '\n';
    os << "binary_outcome = " << (s.binary_outcome ? "true" : "false") << '\n';
    os << "direct_effect = " << (s.direct_effect ? "true" : "false") << '\n';
    for (std::size_t i = 0; i < s.z_levels(); ++i) {
        for (std::size_t j = 0; j < s.u_levels(); ++j) {
            os << "treat[" << i << "][" << j << "] = " << format_shortest(s.treat(i, j)) << '\n';
        }
    }
    for (int a = 0; a < 2; ++a) {
        for (std::size_t i = 0; i < s.z_levels(); ++i) {
            for (std::size_t j = 0; j < s.u_levels(); ++j) {
                os << "mean[" << a << "][" << i << "][" << j << "] = " << format_shortest(s.outcome_mean[a](i, j))
                   << '\n';
            }
        }
    }
    if (s.outcome_law) {
        for (int a = 0; a < 2; ++a) {
            for (std::size_t j = 0; j < s.u_levels(); ++j) {
                const OutcomeLaw& law = (*s.outcome_law)[a][j];
                os << "law[" << a << "][" << j << "] = ";
                for (std::size_t k = 0; k < law.values.size(); ++k) {
                    if (k) os << ", ";
                    os << format_shortest(law.values[k]) << ':' << format_shortest(law.probs[k]);
                }
                os << '\n';
            }
        }
    }
}

struct Serializer {
    std::ostringstream& os;

    void operator()(const BinaryScenario& s) const {
        os << "kind = binary\n";
        os << "pZ = " << format_shortest(s.p_z) << '\n';
        os << "pU = " << format_shortest(s.p_u) << '\n';
        for (int z = 1; z >= 0; --z) {
            for (int u = 1; u >= 0; --u) os << 'p' << z << u << " = " << format_shortest(s.p[z][u]) << '\n';
        }
        for (int a = 1; a >= 0; --a) {
            for (int u = 1; u >= 0; --u) os << 'r' << a << u << " = " << format_shortest(s.r[a][u]) << '\n';
        }
        os << "binary_outcome = " << (s.binary_outcome ? "true" : "false") << '\n';
    }

    void operator()(const DiscreteScenario& s) const {
        os << "kind = discrete\n";
        write_discrete_body(os, s);
    }

    void operator()(const PotentialOutcomeScenario& s) const {
        os << "kind = potential_outcomes\n";
        os << "pi_support = " << join(s.pi_support) << '\n';
        os << "pi_pmf = " << join(s.pi_pmf) << '\n';
        os << "y_pairs = ";
        for (std::size_t j = 0; j < s.pairs.size(); ++j) {
            if (j) os << "; ";
            os << format_shortest(s.pairs[j].y1) << ',' << format_shortest(s.pairs[j].y0) << ':'
               << format_shortest(s.pairs[j].prob);
        }
        os << '\n';
        for (std::size_t k = 0; k < s.treat.rows(); ++k) {
            for (std::size_t j = 0; j < s.treat.cols(); ++j) {
                os << "treat[" << k << "][" << j << "] = " << format_shortest(s.treat(k, j)) << '\n';
            }
        }
    }

    void operator()(const CovariateFamily& f) const {
        os << "kind = covariate_family\n";
        for (const Stratum& st : f.strata) {
            os << "\nbegin stratum " << st.label << ' ' << format_shortest(st.weight) << '\n';
            write_discrete_body(os, st.scenario);
            os << "end stratum\n";
        }
    }
};

}  // namespace

std::string serialize(const AnyScenario& scenario) {
    std::ostringstream os;
    std::visit(Serializer{os}, scenario);
    return os.str();
}

}  // namespace zbias
