// Command-line front end: reads a JSON input, runs one analysis and writes a
// JSON report. Exit codes: 0 success or true verdict, 1 false verdict,
// 2 input error, 3 numerical failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nhomog/calculus.hpp"
#include "nhomog/decomposition.hpp"
#include "nhomog/haar.hpp"
#include "nhomog/json_io.hpp"
#include "nhomog/n_space.hpp"
#include "nhomog/sw_engine.hpp"

namespace {

using namespace nhomog;
using json_io::Json;
using json_io::to_json;

struct RunConfig {
    std::string command;
    std::string in;
    std::optional<long long> n;
    std::optional<double> tol_all;
    std::optional<double> rank_cut;
    std::optional<double> psd_slack;
    std::optional<double> eq_tol;
    std::uint64_t seed = 0;
    long samples = 20000;
    std::string out;
    bool human = false;

    Tolerance tolerance() const {
        Tolerance t;
        if (tol_all) t.rank_cut = t.psd_slack = t.eq_tol = *tol_all;
        if (rank_cut) t.rank_cut = *rank_cut;
        if (psd_slack) t.psd_slack = *psd_slack;
        if (eq_tol) t.eq_tol = *eq_tol;
        t.validate();
        return t;
    }
};

struct Outcome {
    Json result;
    int code = 0;
    std::string summary;
};

Index resolve_n(const RunConfig& cfg, const Json& doc, bool required) {
    if (cfg.n) {
        require(*cfg.n >= 1, ErrorKind::DomainError, "--n must be positive");
        return static_cast<Index>(*cfg.n);
    }
    if (doc.is_object() && doc.contains("n")) {
        const long long n = json_io::integer(doc["n"], "n");
        require(n >= 1, ErrorKind::SchemaError, "n must be positive");
        return static_cast<Index>(n);
    }
    require(!required, ErrorKind::SchemaError, "n is required (--n or an \"n\" field)");
    return 0;
}

Json decomposition_json(const Decomposition& dec) {
    Json classes = Json::array();
    for (Index c = 0; c < dec.class_count(); ++c)
        classes.push_back({{"dim", dec.class_dim(c)},
                           {"multiplicity", dec.multiplicities[static_cast<size_t>(c)]},
                           {"representative", to_json(dec.classes[static_cast<size_t>(c)])}});
    return {{"dim", dec.dim()}, {"zero_dim", dec.zero_dim()}, {"classes", classes}};
}

Outcome run_analyze(const RunConfig& cfg, const Json& doc, const Tolerance& tol) {
    const MatTuple t = json_io::tuple(doc);
    const Index n = resolve_n(cfg, doc, true);
    const Decomposition dec = decompose(t, tol, cfg.seed);
    const HomogeneityReport rep = homogeneity_verdict(dec, n);
    Outcome o;
    o.result = {{"is_n_homogeneous", rep.is_n_homogeneous},
                {"n", rep.n},
                {"block_dims", rep.block_dims},
                {"zero_dim", rep.zero_dim},
                {"reason", rep.reason},
                {"decomposition", decomposition_json(dec)}};
    o.code = rep.is_n_homogeneous ? 0 : 1;
    o.summary = std::string(rep.is_n_homogeneous ? "n-homogeneous" : "not n-homogeneous") + " (" + rep.reason + ")";
    return o;
}

Outcome run_spectrum(const RunConfig& cfg, const Json& doc, const Tolerance& tol) {
    const MatTuple t = json_io::tuple(doc);
    const Index n = resolve_n(cfg, doc, true);
    const Decomposition dec = decompose(t, tol, cfg.seed);
    const HomogeneityReport rep = homogeneity_verdict(dec, n);
    Outcome o;
    if (!rep.is_n_homogeneous) {
        o.result = {{"is_n_homogeneous", false}, {"n", n}, {"reason", rep.reason}};
        o.code = 1;
        o.summary = "no n-spectrum: " + rep.reason;
        return o;
    }
    const NSpectrum sp = n_spectrum(dec, n);
    Json points = Json::array();
    for (size_t i = 0; i < sp.points.size(); ++i)
        points.push_back({{"tuple", to_json(sp.points[i])}, {"multiplicity", sp.multiplicities[i]}});
    o.result = {{"is_n_homogeneous", true}, {"n", n}, {"points", points}, {"zero_in_closure", sp.zero_in_closure}};
    o.summary = std::to_string(sp.points.size()) + " spectral point(s)" + (sp.zero_in_closure ? " plus zero" : "");
    return o;
}

Outcome run_calc(const RunConfig& cfg, const Json& doc, const Tolerance& tol) {
    const MatTuple t = json_io::tuple(doc);
    const Decomposition dec = decompose(t, tol, cfg.seed);
    if (const Index n = resolve_n(cfg, doc, false); n > 0) {
        const HomogeneityReport rep = homogeneity_verdict(dec, n);
        require(rep.is_n_homogeneous, ErrorKind::NotNHomogeneous, rep.reason);
    }
    Outcome o;
    const bool has_poly = doc.contains("polynomial"), has_table = doc.contains("table");
    require(has_poly != has_table, ErrorKind::SchemaError, "calc needs exactly one of \"polynomial\" or \"table\"");
    if (has_poly) {
        require(doc["polynomial"].is_string(), ErrorKind::SchemaError, "polynomial must be a string");
        const StarPolynomial p = parse_star_polynomial(doc["polynomial"].get<std::string>(), static_cast<int>(t.size()), true);
        o.result = {{"polynomial", p.to_string()}, {"value", to_json(calc(p, dec))}};
    } else {
        const Json& tab = doc["table"];
        require(tab.is_array() && static_cast<Index>(tab.size()) == dec.class_count(), ErrorKind::SchemaError,
                "table must hold one matrix per class (" + std::to_string(dec.class_count()) + ")");
        std::vector<CMatrix> values;
        for (size_t c = 0; c < tab.size(); ++c)
            values.push_back(json_io::square_matrix(tab[c], "table[" + std::to_string(c) + "]", dec.class_dim(static_cast<Index>(c))));
        o.result = {{"value", to_json(calc(OrbitTable::from_values(dec, values), dec))}};
    }
    o.result["classes"] = decomposition_json(dec)["classes"];
    o.summary = "calculus value computed";
    return o;
}

Outcome run_sw_check(const RunConfig& cfg, const Json& doc, const Tolerance& tol) {
    const FnAlgebra e = json_io::fn_algebra(doc, tol);
    const DensityReport d = density_check(e, tol, cfg.seed);
    const FnAlgebra d2 = delta2_subspace(e, tol);
    const UnitReport u = unit_in_closure(e, tol);
    Json pairs = Json::array();
    for (size_t q = 0; q < d.pairs.size(); ++q)
        pairs.push_back({{"x", d.pairs[q].first}, {"y", d.pairs[q].second}, {"separated", d.separated[q] ? "certified" : "not-found"}});
    Outcome o;
    o.result = {{"points", e.points},
                {"n", e.n},
                {"span_dim", e.dim()},
                {"ambient_dim", e.ambient_dim()},
                {"dense", d.dense},
                {"full_at_point", d.full_at_point},
                {"pairs", pairs},
                {"not_found", d.not_found},
                {"criterion", d.criterion},
                {"biconditional_holds", d.biconditional_holds ? Json(*d.biconditional_holds) : Json(nullptr)},
                {"delta2_dim", d2.dim()},
                {"delta2_equals_span", same_span(d2, e, tol)},
                {"unit_in_closure", u.in_closure}};
    o.code = d.dense ? 0 : 1;
    o.summary = std::string(d.dense ? "dense" : "not dense") + ", dim E = " + std::to_string(e.dim()) + " of " +
                std::to_string(e.ambient_dim()) + ", dim Delta2 = " + std::to_string(d2.dim());
    return o;
}

Outcome run_haar(const RunConfig& cfg, const Json& doc, const Tolerance&) {
    const CMatrix a = json_io::square_matrix(json_io::field(doc, "matrix", "input"), "matrix");
    const McConfig mc{cfg.samples, cfg.seed};
    require(mc.samples >= kMinMcSamples, ErrorKind::MCBudgetTooSmall,
            "need at least " + std::to_string(kMinMcSamples) + " samples");
    const CMatrix exact = twirl_exact(a);
    HaarSampler s{a.rows(), mc.seed, 0};
    CMatrix est = CMatrix::Zero(a.rows(), a.cols());
    for (long i = 0; i < mc.samples; ++i) {
        const CMatrix u = next_unitary(s);
        est += u * a * u.adjoint();
    }
    est /= static_cast<double>(mc.samples);
    const double dev = op_norm(est - exact);
    const double radius = mc_radius(op_norm(a), mc.samples);
    Outcome o;
    o.result = {{"exact", to_json(exact)},
                {"estimate", to_json(est)},
                {"deviation", dev},
                {"radius", radius},
                {"within_radius", dev <= radius}};
    o.code = dev <= radius ? 0 : 1;
    o.summary = "twirl deviation " + std::to_string(dev) + " vs radius " + std::to_string(radius);
    return o;
}

Json point_json(const std::optional<PointRef>& p) {
    if (!p) return nullptr;
    return {{"orbit", p->orbit}, {"u", to_json(p->u)}};
}

Outcome run_nspace(const RunConfig&, const Json& doc, const Tolerance& tol) {
    const FiniteNSpace s = json_io::n_space(doc);
    Outcome o;
    o.result = {{"n", s.n}, {"orbits", s.m}, {"algebra_dim", s.algebra_dim()}};
    if (doc.contains("generators")) {
        const Json& g = doc["generators"];
        require(g.is_array(), ErrorKind::SchemaError, "generators must be an array");
        std::vector<EquivariantElement> gens;
        for (size_t q = 0; q < g.size(); ++q) gens.push_back(json_io::element(g[q], s, "generators[" + std::to_string(q) + "]"));
        const IdealCorrespondence c = ideal_set_correspondence(gens, s, tol);
        const IdealCorrespondence back = ideal_of_set(s, c.vanishing_set);
        o.result["ideal"] = {{"vanishing_set", c.vanishing_set},
                             {"ideal_dim", c.ideal_basis.size()},
                             {"roundtrip", same_ideal(c.ideal_basis, back.ideal_basis, tol)}};
        o.summary += "ideal of dim " + std::to_string(c.ideal_basis.size()) + "; ";
    }
    if (doc.contains("representation")) {
        const auto images = json_io::square_matrices(doc["representation"], "representation", s.n);
        require(static_cast<Index>(images.size()) == s.algebra_dim(), ErrorKind::SchemaError,
                "representation must give one image per matrix unit (" + std::to_string(s.algebra_dim()) + ")");
        const auto p = classify_matrix_rep(images, s, tol);
        o.result["representation"] = {{"zero", !p.has_value()}, {"point", point_json(p)}};
        o.summary += p ? "evaluation at orbit " + std::to_string(p->orbit) : std::string("zero representation");
    }
    if (o.summary.empty()) o.summary = "n-space of " + std::to_string(s.m) + " orbit(s)";
    return o;
}

int run(const RunConfig& cfg) {
    try {
        const Tolerance tol = cfg.tolerance();
        const Json doc = json_io::parse_file(cfg.in);
        Outcome o;
        if (cfg.command == "analyze") o = run_analyze(cfg, doc, tol);
        else if (cfg.command == "spectrum") o = run_spectrum(cfg, doc, tol);
        else if (cfg.command == "calc") o = run_calc(cfg, doc, tol);
        else if (cfg.command == "sw-check") o = run_sw_check(cfg, doc, tol);
        else if (cfg.command == "haar") o = run_haar(cfg, doc, tol);
        else o = run_nspace(cfg, doc, tol);

        Json report = {{"command", cfg.command}, {"tolerance", to_json(tol)}, {"seed", cfg.seed}, {"result", o.result}};
        if (cfg.command == "haar") report["samples"] = cfg.samples;
        std::string text = report.dump(2) + "\n";
        if (cfg.human) text += "# " + o.summary + "\n";
        if (cfg.out.empty()) {
            std::cout << text;
        } else {
            std::ofstream f(cfg.out);
            if (!f) {
                std::cerr << "error: cannot write " << cfg.out << "\n";
                return 2;
            }
            f << text;
        }
        return o.code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::NumericalFailure ? 3 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-dimensional n-homogeneous C*-algebra toolkit"};
    app.require_subcommand(1);
    RunConfig cfg;
    if (const char* env = std::getenv("NHOMOG_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "error: NHOMOG_SEED is not an unsigned integer\n";
            return 2;
        }
    }
    const std::vector<std::pair<std::string, std::string>> commands{
        {"analyze", "decompose a tuple and decide n-homogeneity"},
        {"spectrum", "n-spectrum of an n-homogeneous tuple"},
        {"calc", "n-functional calculus of a *-polynomial or orbit table"},
        {"sw-check", "density and Delta2 report for a function algebra on a finite set"},
        {"haar", "Monte-Carlo twirl of a matrix against the exact average"},
        {"nspace", "ideal and representation correspondence on a finite n-space"}};
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--in", cfg.in, "input JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--n", cfg.n, "matrix size n");
        sub->add_option("--tol", cfg.tol_all, "sets rank_cut, psd_slack and eq_tol together");
        sub->add_option("--rank-cut", cfg.rank_cut, "relative rank cutoff");
        sub->add_option("--psd-slack", cfg.psd_slack, "slack of the Loewner order tests");
        sub->add_option("--eq-tol", cfg.eq_tol, "relative equality tolerance");
        sub->add_option("--seed", cfg.seed, "random seed (default: NHOMOG_SEED or 0)");
        sub->add_option("--samples", cfg.samples, "Monte-Carlo samples")->check(CLI::PositiveNumber);
        sub->add_option("--out", cfg.out, "write the report here instead of stdout");
        sub->add_flag("--human", cfg.human, "append a one-line text summary");
        sub->callback([&cfg, name = name] { cfg.command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return run(cfg);
}
