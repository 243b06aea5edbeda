#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "zbias/cli.hpp"
#include "zbias/conditions.hpp"
#include "zbias/error.hpp"
#include "zbias/estimators.hpp"
#include "zbias/montecarlo.hpp"
#include "zbias/scenario_io.hpp"

namespace py = pybind11;
using namespace zbias;

namespace {

py::dict slots_dict(const EffectSlots& e) {
    py::dict d;
    d["true_treated"] = e.true_treated;
    d["true_control"] = e.true_control;
    d["true_all"] = e.true_all;
    d["unadj"] = e.unadj;
    d["adj_treated"] = e.adj_treated;
    d["adj_control"] = e.adj_control;
    d["adj_all"] = e.adj_all;
    d["f"] = e.f;
    d["conditioning"] = std::string(to_string(e.conditioning));
    return d;
}

py::list bundle_list(const ConditionBundle& bundle) {
    py::list out;
    for (const ConditionReport& r : bundle) {
        py::list witnesses;
        for (const Witness& w : r.witnesses) witnesses.append(py::make_tuple(w.cell, w.lhs, w.rhs));
        py::dict d;
        d["condition_id"] = r.condition_id;
        d["holds"] = r.holds;
        d["margin"] = r.margin;
        d["witnesses"] = witnesses;
        out.append(d);
    }
    return out;
}

DiscreteScenario discrete_of(const AnyScenario& s) {
    if (const auto* b = std::get_if<BinaryScenario>(&s)) return to_discrete(*b);
    if (const auto* d = std::get_if<DiscreteScenario>(&s)) return *d;
    throw ValidationError("expected a binary or discrete scenario");
}

McConfig mc_config(std::uint64_t draws, std::uint64_t seed, std::vector<std::string> filter, unsigned threads) {
    McConfig cfg;
    cfg.draws = draws;
    cfg.seed = seed;
    cfg.filter = std::move(filter);
    cfg.threads = threads;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_zbias, m) {
    m.doc() = "Exact bias-amplification analysis for discrete causal models";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<DegenerateError>(m, "DegenerateError", base.ptr());
    py::register_exception<UndefinedStratumError>(m, "UndefinedStratumError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    py::class_<BinaryScenario>(m, "BinaryScenario")
        .def(py::init([](double p_z, double p_u, std::array<std::array<double, 2>, 2> p,
                         std::array<std::array<double, 2>, 2> r, bool binary_outcome) {
                 BinaryScenario s;
                 s.p_z = p_z;
                 s.p_u = p_u;
                 for (int i = 0; i < 2; ++i) {
                     for (int j = 0; j < 2; ++j) {
                         s.p[i][j] = p[i][j];
                         s.r[i][j] = r[i][j];
                     }
                 }
                 s.binary_outcome = binary_outcome;
                 validate(s);
                 return s;
             }),
             py::arg("p_z"), py::arg("p_u"), py::arg("p"), py::arg("r"), py::arg("binary_outcome") = true,
             "p[z][u] = pr(A=1|Z=z,U=u), r[a][u] = E(Y|A=a,U=u)")
        .def_readonly("p_z", &BinaryScenario::p_z)
        .def_readonly("p_u", &BinaryScenario::p_u)
        .def_property_readonly("p", [](const BinaryScenario& s) { return s.p; })
        .def_property_readonly("r", [](const BinaryScenario& s) { return s.r; });

    py::class_<DiscreteScenario>(m, "DiscreteScenario")
        .def_readonly("z_support", &DiscreteScenario::z_support)
        .def_readonly("z_pmf", &DiscreteScenario::z_pmf)
        .def_readonly("u_support", &DiscreteScenario::u_support)
        .def_readonly("u_pmf", &DiscreteScenario::u_pmf);
    py::class_<PotentialOutcomeScenario>(m, "PotentialOutcomeScenario")
        .def_readonly("pi_support", &PotentialOutcomeScenario::pi_support)
        .def_readonly("pi_pmf", &PotentialOutcomeScenario::pi_pmf);
    py::class_<CovariateFamily>(m, "CovariateFamily")
        .def_property_readonly("labels", [](const CovariateFamily& f) {
            std::vector<std::string> out;
            for (const Stratum& s : f.strata) out.push_back(s.label);
            return out;
        });

    m.def("parse_scenario", [](const std::string& text) { return parse_scenario(text); }, py::arg("text"));
    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("serialize", &serialize, py::arg("scenario"));

    m.def(
        "estimates",
        [](const AnyScenario& s, const std::string& conditioning) {
            if (const auto* po = std::get_if<PotentialOutcomeScenario>(&s)) return slots_dict(po_estimates(*po));
            if (const auto* fam = std::get_if<CovariateFamily>(&s)) {
                return slots_dict(covariate_average(*fam, parse_conditioning(conditioning)));
            }
            return slots_dict(estimates(discrete_of(s), parse_conditioning(conditioning)));
        },
        py::arg("scenario"), py::arg("conditioning") = "on_z");
    m.def(
        "dce",
        [](const AnyScenario& s, double threshold, const std::string& conditioning) {
            const DceSet e = dce(discrete_of(s), threshold, parse_conditioning(conditioning));
            py::dict d = slots_dict(e);
            d["threshold"] = e.threshold;
            return d;
        },
        py::arg("scenario"), py::arg("threshold"), py::arg("conditioning") = "on_z");
    m.def(
        "rr",
        [](const AnyScenario& s, const std::string& conditioning) {
            return slots_dict(rr(discrete_of(s), parse_conditioning(conditioning)));
        },
        py::arg("scenario"), py::arg("conditioning") = "on_z");

    m.def("check_thm1", [](const AnyScenario& s) { return bundle_list(check_thm1(discrete_of(s))); });
    m.def("check_thm2", [](const AnyScenario& s) { return bundle_list(check_thm2(discrete_of(s))); });
    m.def("check_thm3", [](const AnyScenario& s) { return bundle_list(check_thm3(discrete_of(s))); });
    m.def("check_weaker_condition",
          [](const BinaryScenario& s) { return bundle_list({check_weaker_condition(s)}); });
    m.def("check_cor1", [](const BinaryScenario& s) { return bundle_list(check_cor1(s)); });
    m.def("check_cor2", [](const BinaryScenario& s) { return bundle_list(check_cor2(s)); });
    m.def("check_thm4", [](const PotentialOutcomeScenario& s) { return bundle_list(check_thm4(s)); });
    m.def("check_cor3", [](const PotentialOutcomeScenario& s) { return bundle_list(check_cor3(s)); });

    m.def(
        "estimate_volume",
        [](std::uint64_t draws, std::uint64_t seed, std::vector<std::string> filter, unsigned threads) {
            McResult r;
            {
                py::gil_scoped_release release;
                r = estimate_volume(mc_config(draws, seed, std::move(filter), threads));
            }
            py::dict d;
            d["volume"] = r.volume;
            d["stderr"] = r.stderr_;
            d["draws"] = r.draws;
            d["accepted"] = r.accepted;
            d["seed"] = r.seed;
            d["zbias_count"] = r.zbias_count;
            d["tie_count"] = r.tie_count;
            d["redraws"] = r.redraws;
            return d;
        },
        py::arg("draws"), py::arg("seed") = 0, py::arg("filter") = std::vector<std::string>{},
        py::arg("threads") = 0);
    m.def(
        "export_scatter",
        [](std::uint64_t draws, std::uint64_t seed, const std::filesystem::path& path) {
            return export_scatter(mc_config(draws, seed, {}, 1), path);
        },
        py::arg("draws"), py::arg("seed"), py::arg("path"));

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "zbias");
            std::vector<const char*> argv;
            for (const std::string& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command line; returns (exit status, stdout, stderr).");
    m.def("table_cell", &cli::table_cell, py::arg("x"));
}
