#include "zbias/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "zbias/conditions.hpp"
#include "zbias/error.hpp"
#include "zbias/estimators.hpp"
#include "zbias/montecarlo.hpp"
#include "zbias/report_json.hpp"
#include "zbias/scenario_io.hpp"

namespace zbias::cli {

namespace {

const std::vector<std::string> kTheoremIds = {"thm1", "thm2", "thm3", "cor1", "cor2", "thm4", "thm5-binary",
                                              "cor3", "cor4", "thm7", "weaker", "lemma_s5", "lemma_s7", "collider"};

std::string one_line(std::string text) {
    for (char& c : text) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    return text;
}

const char* kind_name(const AnyScenario& s) {
    switch (s.index()) {
        case 0: return "binary";
        case 1: return "discrete";
        case 2: return "potential_outcomes";
        default: return "covariate_family";
    }
}

/// Discrete view of a binary or discrete scenario.
DiscreteScenario as_discrete(const AnyScenario& s, const char* command) {
    if (const auto* b = std::get_if<BinaryScenario>(&s)) return to_discrete(*b);
    if (const auto* d = std::get_if<DiscreteScenario>(&s)) return *d;
    throw ValidationError(std::string(command) + " needs a binary or discrete scenario, got " + kind_name(s));
}

bool binary_pairs(const PotentialOutcomeScenario& s) {
    std::set<std::pair<double, double>> cells;
    for (const OutcomePair& p : s.pairs) {
        if ((p.y1 != 0.0 && p.y1 != 1.0) || (p.y0 != 0.0 && p.y0 != 1.0)) return false;
        cells.emplace(p.y1, p.y0);
    }
    return cells.size() == 4 && s.pairs.size() == 4;
}

std::vector<std::string> default_theorems(const AnyScenario& s) {
    switch (s.index()) {
        case 0: return {"thm1", "thm2", "thm3", "thm7", "collider", "weaker", "cor1", "cor2"};
        case 1: return {"thm1", "thm2", "thm3", "thm7", "collider"};
        case 2: {
            if (binary_pairs(std::get<PotentialOutcomeScenario>(s))) return {"thm4", "thm5-binary", "cor3", "cor4"};
            return {"thm4"};
        }
        default: throw ValidationError("check does not apply to a covariate_family file; check each stratum");
    }
}

void append(ConditionBundle& out, ConditionBundle more) {
    for (ConditionReport& r : more) out.push_back(std::move(r));
}

ConditionBundle run_check(const AnyScenario& s, const std::string& id) {
    const auto* bin = std::get_if<BinaryScenario>(&s);
    const auto* po = std::get_if<PotentialOutcomeScenario>(&s);
    auto need_binary = [&]() -> const BinaryScenario& {
        if (!bin) throw ValidationError("--theorem " + id + " needs a binary scenario, got " + kind_name(s));
        return *bin;
    };
    auto need_po = [&]() -> const PotentialOutcomeScenario& {
        if (!po) throw ValidationError("--theorem " + id + " needs a potential_outcomes scenario, got " + kind_name(s));
        return *po;
    };
    const std::string command = "--theorem " + id;
    if (id == "thm1") return check_thm1(as_discrete(s, command.c_str()));
    if (id == "thm2") return check_thm2(as_discrete(s, command.c_str()));
    if (id == "thm3") return check_thm3(as_discrete(s, command.c_str()));
    if (id == "thm7") return check_thm7(as_discrete(s, command.c_str()));
    if (id == "collider") {
        const DiscreteScenario d = as_discrete(s, command.c_str());
        ConditionBundle out = check_collider_association(d, 0);
        append(out, check_collider_association(d, 1));
        return out;
    }
    if (id == "weaker") return {check_weaker_condition(need_binary())};
    if (id == "cor1") return check_cor1(need_binary());
    if (id == "cor2") return check_cor2(need_binary());
    if (id == "lemma_s5" || id == "lemma_s7") {
        const BinaryScenario& b = need_binary();
        const auto& p = b.p;
        return {id == "lemma_s5" ? check_lemma_s5(p[1][1], p[1][0], p[0][1], p[0][0])
                                 : check_lemma_s7(p[1][1], p[1][0], p[0][1], p[0][0])};
    }
    if (id == "thm4") return check_thm4(need_po());
    if (id == "thm5-binary") return check_thm5_binary(need_po());
    if (id == "cor3") return check_cor3(need_po());
    if (id == "cor4") return check_cor4(need_po());
    throw ValidationError("unknown theorem id '" + id + "'");
}

EstimateSet run_eval(const AnyScenario& s, Conditioning conditioning, bool conditioning_given) {
    if (const auto* po = std::get_if<PotentialOutcomeScenario>(&s)) {
        if (conditioning_given && conditioning != Conditioning::OnPropensity) {
            throw ValidationError("potential_outcomes scenarios are adjusted on the propensity score only");
        }
        return po_estimates(*po);
    }
    if (std::holds_alternative<CovariateFamily>(s)) {
        throw ValidationError("eval needs a single scenario; use 'average' for a covariate_family file");
    }
    return estimates(as_discrete(s, "eval"), conditioning);
}

std::string table_row(const EstimateSet& e) {
    const ZBiasVerdict v = zbias_verdict(e);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%8s %8s %8s  %s", table_cell(e.true_all).c_str(), table_cell(e.unadj).c_str(),
                  table_cell(e.adj_all).c_str(), v.zbias ? "YES" : "NO");
    return buf;
}

unsigned threads_from_env() {
    const char* text = std::getenv("ZBIAS_THREADS");
    if (!text || !*text) return 0;
    char* end = nullptr;
    const unsigned long n = std::strtoul(text, &end, 10);
    if (*end != '\0' || text[0] == '-') throw ValidationError("ZBIAS_THREADS must be a non-negative integer");
    return static_cast<unsigned>(std::min<unsigned long>(n, 1024));
}

struct McOptions {
    std::uint64_t draws = 1000000;
    std::uint64_t seed = 0;
    std::vector<std::string> filter;
    bool binary_outcome = true;

    McConfig config() const {
        McConfig cfg;
        cfg.draws = draws;
        cfg.seed = seed;
        cfg.filter = filter;
        cfg.binary_outcome = binary_outcome;
        cfg.threads = threads_from_env();
        return cfg;
    }
};

void add_mc_options(CLI::App* cmd, McOptions& o) {
    cmd->add_option("--draws", o.draws, "Number of draws")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--seed", o.seed, "64-bit seed")->capture_default_str();
    cmd->add_option("--filter", o.filter, "Restrict to draws passing: weaker, thm1, cor1, cor2")->delimiter(',');
    cmd->add_option("--binary-outcome", o.binary_outcome, "Treat outcome probabilities as binary outcomes")
        ->capture_default_str();
}

}  // namespace

std::string table_cell(double x) {
    double scaled = std::nearbyint(x * 1e4);
    if (scaled == 0.0) scaled = 0.0;  // no "-0.0000"
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", scaled / 1e4);
    return buf;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact bias-amplification analysis for discrete causal models", "zbias"};
    app.require_subcommand(1);

    std::string path;
    std::string conditioning_text = "on_z";
    bool table = false;
    std::vector<std::string> theorems;
    double threshold = 0.0;
    std::string out_path;
    McOptions mc_opts;

    auto conditioning_option = [&](CLI::App* cmd) {
        return cmd->add_option("--conditioning", conditioning_text, "on_z or on_propensity")
            ->check(CLI::IsMember({"on_z", "on_propensity"}))
            ->capture_default_str();
    };

    CLI::App* eval = app.add_subcommand("eval", "Estimands for a scenario (EstimateSet JSON)");
    eval->add_option("scenario", path, "Scenario file")->required();
    CLI::Option* eval_cond = conditioning_option(eval);
    eval->add_flag("--table", table, "Print a rounded table row instead of JSON");

    CLI::App* check = app.add_subcommand("check", "Theorem condition reports (JSON array)");
    check->add_option("scenario", path, "Scenario file")->required();
    check->add_option("--theorem", theorems, "Condition ids")->delimiter(',')->check(CLI::IsMember(kTheoremIds));

    CLI::App* dce_cmd = app.add_subcommand("dce", "Effects on I(Y > threshold) (DceSet JSON)");
    dce_cmd->add_option("scenario", path, "Scenario file")->required();
    dce_cmd->add_option("--threshold", threshold, "Outcome threshold y")->required();
    conditioning_option(dce_cmd);

    CLI::App* rr_cmd = app.add_subcommand("rr", "Ratio-scale effects (RrSet JSON)");
    rr_cmd->add_option("scenario", path, "Scenario file")->required();
    conditioning_option(rr_cmd);

    CLI::App* average = app.add_subcommand("average", "Covariate-averaged estimands (EstimateSet JSON)");
    average->add_option("scenario", path, "covariate_family file")->required();
    conditioning_option(average);

    CLI::App* mc = app.add_subcommand("mc", "Monte Carlo Z-bias volume (McResult JSON)");
    add_mc_options(mc, mc_opts);

    CLI::App* scatter = app.add_subcommand("scatter", "Per-draw biases as CSV");
    add_mc_options(scatter, mc_opts);
    scatter->add_option("--out", out_path, "Destination CSV")->required();

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForAllHelp&) {
            out << app.help("", CLI::AppFormatMode::All);
            return kOk;
        } catch (const CLI::Success&) {
            out << app.help();
            return kOk;
        } catch (const CLI::Error& e) {
            err << "zbias: " << one_line(e.what()) << '\n';
            return kValidation;
        }

        const Conditioning conditioning = parse_conditioning(conditioning_text);

        if (*eval) {
            const EstimateSet e = run_eval(load_scenario(path), conditioning, eval_cond->count() > 0);
            out << (table ? table_row(e) : to_json(e)) << '\n';
        } else if (*check) {
            const AnyScenario s = load_scenario(path);
            if (theorems.empty()) theorems = default_theorems(s);
            ConditionBundle bundle;
            for (const std::string& id : theorems) append(bundle, run_check(s, id));
            out << to_json(bundle) << '\n';
        } else if (*dce_cmd) {
            out << to_json(dce(as_discrete(load_scenario(path), "dce"), threshold, conditioning)) << '\n';
        } else if (*rr_cmd) {
            out << to_json(rr(as_discrete(load_scenario(path), "rr"), conditioning)) << '\n';
        } else if (*average) {
            const AnyScenario s = load_scenario(path);
            const auto* fam = std::get_if<CovariateFamily>(&s);
            if (!fam) throw ValidationError(std::string("average needs a covariate_family file, got ") + kind_name(s));
            out << to_json(covariate_average(*fam, conditioning)) << '\n';
        } else if (*mc) {
            out << to_json(estimate_volume(mc_opts.config())) << '\n';
        } else if (*scatter) {
            const std::uint64_t rows = export_scatter(mc_opts.config(), out_path);
            out << "{\"rows\": " << rows << "}\n";
        }
        return kOk;
    } catch (const IoError& e) {
        err << "zbias: " << one_line(e.what()) << '\n';
        return kIo;
    } catch (const DegenerateError& e) {
        err << "zbias: " << one_line(e.what()) << '\n';
        return kDegenerate;
    } catch (const UndefinedStratumError& e) {
        err << "zbias: " << one_line(e.what()) << '\n';
        return kDegenerate;
    } catch (const std::exception& e) {
        err << "zbias: " << one_line(e.what()) << '\n';
        return kValidation;
    }
}

}  // namespace zbias::cli
