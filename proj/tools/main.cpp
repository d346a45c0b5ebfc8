#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "css/cli_io.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

int run_analyze(const std::string& spec_path, const std::string& out_dir, bool svg,
                const std::string& kinds, int samples, double tol, bool no_timing,
                const std::string& lambdas) {
    css::CurveSpec spec = css::load_curve_file(spec_path);
    css::AnalysisConfig config;
    if (!kinds.empty()) {
        config.kinds.clear();
        for (const std::string& k : split_list(kinds)) {
            if (k == "css")
                config.kinds.push_back(css::CausticKind::css);
            else if (k == "wigner")
                config.kinds.push_back(css::CausticKind::wigner);
            else if (k == "secant")
                config.kinds.push_back(css::CausticKind::secant);
            else if (k == "equidistant")
                config.kinds.push_back(css::CausticKind::equidistant);
            else
                throw css::CliIoError("unknown kind '" + k + "'");
        }
    }
    for (const std::string& l : split_list(lambdas))
        config.equidistant_lambdas.push_back(std::stod(l));
    if (!config.equidistant_lambdas.empty()) {
        bool has = false;
        for (css::CausticKind k : config.kinds) has = has || k == css::CausticKind::equidistant;
        if (!has) config.kinds.push_back(css::CausticKind::equidistant);
    }
    if (samples > 0) config.samples_per_period = samples;
    if (tol > 0.0) config.root_tol = tol;
    config.include_timing = !no_timing;

    css::AnalysisReport report = css::run_analysis(spec, config);
    std::vector<std::string> files = css::emit_outputs(report, out_dir, svg);
    for (const std::string& f : files) std::printf("wrote %s\n", f.c_str());
    for (const std::string& err : report.stage_errors)
        std::printf("stage error: %s\n", err.c_str());
    return report.stage_errors.empty() ? 0 : 1;
}

int run_oracle(const std::string& spec_path, int samples) {
    css::CurveSpec spec = css::load_curve_file(spec_path);
    bool all_pass = true;
    for (const css::OracleComparison& cmp : css::compare_envelope_oracle(spec, samples)) {
        std::printf("scheme %d: hausdorff=%.6g (tol %.6g) at n, %.6g at 2n, ratio=%.3f  [%s]\n",
                    cmp.scheme, cmp.hausdorff, cmp.tolerance, cmp.hausdorff_2n, cmp.ratio,
                    cmp.pass ? "PASS" : "FAIL");
        all_pass = all_pass && cmp.pass;
    }
    return all_pass ? 0 : 1;
}

int run_verify(const std::string& spec_path, const std::string& theorems) {
    css::CurveSpec spec = css::load_curve_file(spec_path);
    css::AnalysisConfig config;
    config.run_genericity = false;
    css::AnalysisReport report = css::run_analysis(spec, config);

    std::vector<std::string> groups = split_list(theorems);
    auto selected = [&](const std::string& name) {
        if (groups.empty()) return true;
        for (const std::string& g : groups) {
            if (g == "rosette" && name.rfind("rosette_", 0) == 0) return true;
            if (g == "parity" && (name == "cusp_parity" || name == "scheme_cusp_parity"))
                return true;
            if (g == "arcs" && name == "scheme_arc_pair_total") return true;
            if (g == "shell" &&
                (name == "inflexion_branch_count" || name == "each_inflexion_bounds_one_branch" ||
                 name == "interior_inflexions_even"))
                return true;
        }
        return false;
    };

    bool all_pass = report.stage_errors.empty();
    for (const std::string& err : report.stage_errors)
        std::printf("stage error: %s\n", err.c_str());
    for (const css::VerdictEntry& e : report.verdicts.entries) {
        if (!selected(e.name)) continue;
        std::printf("%-36s %s%s%s\n", e.name.c_str(), e.pass ? "PASS" : "FAIL",
                    e.witness.empty() ? "" : "  ", e.witness.c_str());
        all_pass = all_pass && e.pass;
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Centre Symmetry Set, Wigner caustic and secant caustic analyzer"};
    app.require_subcommand(1);

    std::string spec_path, out_dir = "out", kinds, lambdas, theorems;
    bool svg = false, no_timing = false;
    int samples = 0;
    double tol = 0.0;

    CLI::App* analyze = app.add_subcommand("analyze", "run the full analysis and emit files");
    analyze->add_option("spec", spec_path, "curve spec JSON")->required();
    analyze->add_option("--out", out_dir, "output directory");
    analyze->add_flag("--svg", svg, "emit figure.svg");
    analyze->add_option("--kinds", kinds, "comma list: css,wigner,secant,equidistant");
    analyze->add_option("--samples", samples, "detector scan samples per period");
    analyze->add_option("--tol", tol, "root tolerance");
    analyze->add_flag("--no-timing", no_timing, "omit timing from report.json");
    analyze->add_option("--lambdas", lambdas, "equidistant lambda list");

    int oracle_samples = 20000;
    CLI::App* oracle = app.add_subcommand("oracle", "envelope-oracle comparison");
    oracle->add_option("spec", spec_path, "curve spec JSON")->required();
    oracle->add_option("--samples", oracle_samples, "chord samples per period");

    CLI::App* verify = app.add_subcommand("verify", "theorem verdicts only");
    verify->add_option("spec", spec_path, "curve spec JSON")->required();
    verify->add_option("--theorems", theorems, "comma list: rosette,parity,arcs,shell");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze))
            return run_analyze(spec_path, out_dir, svg, kinds, samples, tol, no_timing, lambdas);
        if (app.got_subcommand(oracle)) return run_oracle(spec_path, oracle_samples);
        if (app.got_subcommand(verify)) return run_verify(spec_path, theorems);
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 2;
    }
    return 2;
}
