#include "css/cli_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace css {

namespace {

using nlohmann::json;

std::pair<int, int> line_column(const std::string& text, std::size_t byte_pos) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte_pos && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

Rational parse_frequency(const json& j) {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>(), 1);
    if (j.is_number_float()) {
        double v = j.get<double>();
        // Accept exact halves and integers given as numbers.
        double doubled = v * 2.0;
        if (std::fabs(doubled - std::round(doubled)) > 1e-9)
            throw ValidationError("numeric frequency " + std::to_string(v) +
                                  " is not an exact rational; use a \"num/den\" string");
        return Rational(static_cast<std::int64_t>(std::llround(doubled)), 2);
    }
    if (!j.is_string())
        throw ValidationError("frequency must be an integer or a \"num/den\" string");
    std::string s = j.get<std::string>();
    std::size_t slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(std::stoll(s), 1);
        return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::exception&) {
        throw ValidationError("cannot parse frequency '" + s + "'");
    }
}

double parse_period(const json& j) {
    if (j.is_number()) {
        double v = j.get<double>();
        if (v <= 0.0) throw ValidationError("period must be positive");
        return v;
    }
    if (!j.is_string()) throw ValidationError("period must be a number or \"<k>pi\" string");
    std::string s = j.get<std::string>();
    if (s.size() < 3 || s.substr(s.size() - 2) != "pi")
        throw ValidationError("period string must end in 'pi', got '" + s + "'");
    try {
        double mult = std::stod(s.substr(0, s.size() - 2));
        if (mult <= 0.0) throw ValidationError("period must be positive");
        return mult * kPi;
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception&) {
        throw ValidationError("cannot parse period '" + s + "'");
    }
}

std::vector<CurveTerm> parse_terms(const json& j) {
    if (!j.is_array()) throw ValidationError("'terms' must be an array");
    std::vector<CurveTerm> terms;
    for (const json& item : j) {
        if (!item.is_object()) throw ValidationError("each term must be an object");
        if (!item.contains("freq")) throw ValidationError("term is missing 'freq'");
        CurveTerm term;
        term.freq = parse_frequency(item.at("freq"));
        term.cos_coeff = item.value("cos", 0.0);
        term.sin_coeff = item.value("sin", 0.0);
        if (term.freq.num <= 0) throw ValidationError("frequencies must be positive");
        terms.push_back(term);
    }
    return terms;
}

TrigSeries parse_series(const json& j) {
    TrigSeries series;
    if (j.is_array()) {
        series.terms = parse_terms(j);
        return series;
    }
    if (!j.is_object()) throw ValidationError("coordinate block must be an object or array");
    series.constant = j.value("constant", 0.0);
    if (j.contains("terms")) series.terms = parse_terms(j.at("terms"));
    return series;
}

const char* endpoints_name(SchemeEndpoints e) {
    switch (e) {
        case SchemeEndpoints::inflexion_to_inflexion: return "inflexion_to_inflexion";
        case SchemeEndpoints::closed_same_pair: return "closed_same_pair";
        default: return "closed_swapped_pair";
    }
}

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::cusp: return "cusp";
        case EventKind::asymptote: return "asymptote";
        default: return "double_tangent";
    }
}

const char* status_name(ConditionStatus s) {
    switch (s) {
        case ConditionStatus::pass: return "pass";
        case ConditionStatus::fail: return "fail";
        default: return "not_checkable";
    }
}

/// Deterministic JSON writer: fixed field order, %.17g numbers.
class JsonWriter {
  public:
    std::string str() const { return out_; }

    void begin_object() { punct("{"); }
    void end_object() { trim_comma(); out_ += "}"; comma(); }
    void begin_array() { punct("["); }
    void end_array() { trim_comma(); out_ += "]"; comma(); }

    void key(const std::string& name) {
        out_ += "\"" + escape(name) + "\":";
    }
    void value(double v) {
        char buf[40];
        if (std::isfinite(v)) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out_ += buf;
        } else {
            out_ += "null";
        }
        comma();
    }
    void value(long v) { out_ += std::to_string(v); comma(); }
    void value(int v) { out_ += std::to_string(v); comma(); }
    void value(std::size_t v) { out_ += std::to_string(v); comma(); }
    void value(bool v) { out_ += v ? "true" : "false"; comma(); }
    void value(const std::string& v) { out_ += "\"" + escape(v) + "\""; comma(); }
    void value(const char* v) { value(std::string(v)); }
    void null_value() { out_ += "null"; comma(); }

  private:
    void punct(const char* p) { out_ += p; }
    void comma() { out_ += ","; }
    void trim_comma() {
        if (!out_.empty() && out_.back() == ',') out_.pop_back();
    }
    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                default: out += c;
            }
        }
        return out;
    }
    std::string out_;
};

std::string format_double(double v, const char* fmt) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

class StageTimer {
  public:
    StageTimer(AnalysisReport& report, std::string name)
        : report_(&report), name_(std::move(name)),
          start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        auto end = std::chrono::steady_clock::now();
        report_->timing_ms[name_] =
            std::chrono::duration<double, std::milli>(end - start_).count();
    }

  private:
    AnalysisReport* report_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

void AnalysisConfig::validate() const {
    if (samples_per_period < 64) throw ValidationError("samples_per_period must be >= 64");
    if (root_tol <= 0.0 || asymptote_band <= 0.0)
        throw ValidationError("tolerances must be positive");
    if (event_refine_factor < 1) throw ValidationError("event_refine_factor must be >= 1");
}

CurveSpec parse_curve_file(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& err) {
        auto [line, col] = line_column(text, err.byte);
        throw ParseError(err.what(), line, col);
    }
    if (!j.is_object()) throw ValidationError("curve spec must be a JSON object");
    if (!j.contains("kind")) throw ValidationError("curve spec is missing 'kind'");
    std::string kind = j.at("kind").get<std::string>();
    if (!j.contains("period")) throw ValidationError("curve spec is missing 'period'");
    double period = parse_period(j.at("period"));

    CurveSpec spec;
    spec.period = period;
    if (kind == "support") {
        spec.kind = CurveKind::support_rosette;
        spec.support.constant = j.value("constant", 0.0);
        if (j.contains("terms")) spec.support.terms = parse_terms(j.at("terms"));
    } else if (kind == "fourier") {
        spec.kind = CurveKind::fourier_parametric;
        if (!j.contains("x") || !j.contains("y"))
            throw ValidationError("fourier spec needs 'x' and 'y' blocks");
        spec.x = parse_series(j.at("x"));
        spec.y = parse_series(j.at("y"));
    } else {
        throw ValidationError("unknown curve kind '" + kind + "' (support|fourier)");
    }
    // Surface constructor failures as validation errors with the invariant.
    try {
        build_curve(spec);
    } catch (const CurveModelError& err) {
        throw ValidationError(err.what());
    }
    return spec;
}

CurveSpec load_curve_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliIoError("cannot open curve spec '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_curve_file(buffer.str());
}

const CausticBranch* AnalysisReport::find_branch(CausticKind kind, int scheme) const {
    for (const CausticBranch& b : branches)
        if (b.kind == kind && b.scheme_index == scheme &&
            (kind != CausticKind::equidistant))
            return &b;
    return nullptr;
}

AnalysisReport run_analysis(const CurveSpec& spec, const AnalysisConfig& config) {
    config.validate();
    AnalysisReport report;
    report.spec = spec;
    report.config = config;

    auto stage = [&](const char* name, auto&& fn) {
        StageTimer timer(report, name);
        try {
            fn();
            return true;
        } catch (const std::exception& err) {
            report.stage_errors.push_back(std::string(name) + ": " + err.what());
            return false;
        }
    };

    if (!stage("build", [&] { report.curve.emplace(build_curve(spec)); })) return report;
    const CurveGeometry& curve = *report.curve;

    if (!stage("curve_summary", [&] {
            report.rotation = rotation_number(curve);
            report.inflexions = find_inflexions(curve);
        }))
        return report;

    std::optional<AngleFunction> angles;
    if (!stage("decomposition", [&] {
            angles.emplace(angle_function(curve, choose_base_point(curve)));
            report.decomposition.emplace(decompose(curve, *angles));
        }))
        return report;

    if (!stage("schemes", [&] {
            report.schemes = enumerate_maximal_schemes(*report.decomposition);
        }))
        return report;

    SamplingConfig sampling;
    sampling.samples_per_segment = config.samples_per_segment;
    sampling.root_tol = config.root_tol;
    sampling.event_refine_factor = config.event_refine_factor;
    sampling.asymptote_band = config.asymptote_band;
    sampling.detector_scan_samples = config.samples_per_period;

    stage("branches", [&] {
        for (CausticKind kind :
             {CausticKind::css, CausticKind::wigner, CausticKind::secant}) {
            bool wanted = false;
            for (CausticKind k : config.kinds) wanted = wanted || k == kind;
            if (!wanted) continue;
            for (const GlueingScheme& scheme : report.schemes)
                report.branches.push_back(
                    assemble_branch(curve, *angles, *report.decomposition, scheme, kind,
                                    sampling));
        }
        for (CausticKind k : config.kinds) {
            if (k != CausticKind::equidistant) continue;
            for (double lambda : config.equidistant_lambdas)
                for (const GlueingScheme& scheme : report.schemes)
                    report.branches.push_back(
                        assemble_branch(curve, *angles, *report.decomposition, scheme,
                                        CausticKind::equidistant, sampling, lambda));
        }
    });

    stage("merge", [&] {
        std::vector<CausticBranch> css_only;
        for (CausticBranch& b : report.branches)
            if (b.kind == CausticKind::css) css_only.push_back(std::move(b));
        css_only = merge_semibranches(std::move(css_only), curve.scale());
        std::size_t j = 0;
        for (CausticBranch& b : report.branches)
            if (b.kind == CausticKind::css) b = std::move(css_only[j++]);
    });

    stage("rotation_numbers", [&] {
        for (CausticBranch& b : report.branches) {
            if (!b.closed) continue;
            try {
                b.rotation = branch_rotation_number(b);
            } catch (const OpenBranch&) {
                b.rotation.reset();
            }
        }
    });

    stage("verdicts", [&] {
        std::vector<CausticBranch> cssb, wigb, secb;
        for (const CausticBranch& b : report.branches) {
            if (b.kind == CausticKind::css) cssb.push_back(b);
            if (b.kind == CausticKind::wigner) wigb.push_back(b);
            if (b.kind == CausticKind::secant) secb.push_back(b);
        }
        report.verdicts = classify_and_count(curve, *report.decomposition, report.schemes,
                                             cssb, wigb, secb);
    });

    if (config.run_genericity) {
        stage("genericity", [&] {
            report.genericity.emplace(
                check_genericity(curve, *angles, *report.decomposition,
                                 config.samples_per_period));
        });
    }
    return report;
}

std::string report_to_json(const AnalysisReport& report) {
    JsonWriter w;
    w.begin_object();
    w.key("schema");
    w.value(1);

    w.key("config");
    w.begin_object();
    w.key("samples_per_period");
    w.value(report.config.samples_per_period);
    w.key("samples_per_segment");
    w.value(report.config.samples_per_segment);
    w.key("root_tol");
    w.value(report.config.root_tol);
    w.key("event_refine_factor");
    w.value(report.config.event_refine_factor);
    w.key("asymptote_band");
    w.value(report.config.asymptote_band);
    w.key("seed");
    w.value(static_cast<long>(report.config.seed));
    w.key("kinds");
    w.begin_array();
    for (CausticKind k : report.config.kinds) w.value(caustic_kind_name(k));
    w.end_array();
    w.end_object();

    w.key("curve");
    w.begin_object();
    w.key("kind");
    w.value(report.spec.kind == CurveKind::support_rosette ? "support" : "fourier");
    w.key("period");
    w.value(report.spec.period);
    if (report.curve) {
        w.key("scale");
        w.value(report.curve->scale());
        w.key("diameter");
        w.value(report.curve->diameter());
    }
    w.key("rotation_number");
    w.value(report.rotation);
    w.key("inflexion_count");
    w.value(report.inflexions.size());
    w.key("inflexions");
    w.begin_array();
    for (const InflexionRecord& rec : report.inflexions) {
        w.begin_object();
        w.key("t");
        w.value(rec.t);
        w.key("kind");
        w.value(rec.kind == InflexionKind::nondegenerate_inflexion
                    ? "nondegenerate_inflexion"
                    : rec.kind == InflexionKind::undulation ? "undulation" : "degenerate");
        w.key("witness");
        w.value(rec.witness);
        w.end_object();
    }
    w.end_array();
    if (report.decomposition) {
        w.key("division_point_count");
        w.value(report.decomposition->division.points.size());
        w.key("phi_set_sizes");
        w.begin_array();
        for (const ParallelArcSet& f : report.decomposition->families) w.value(f.arcs.size());
        w.end_array();
    }
    w.end_object();

    w.key("branches");
    w.begin_array();
    for (const CausticBranch& b : report.branches) {
        w.begin_object();
        w.key("kind");
        w.value(caustic_kind_name(b.kind));
        if (b.kind == CausticKind::equidistant) {
            w.key("lambda");
            w.value(b.lambda);
        }
        w.key("scheme");
        w.value(b.scheme_index);
        w.key("endpoints");
        w.value(endpoints_name(b.endpoints));
        w.key("sigma");
        w.value(b.sigma);
        w.key("closed");
        w.value(b.closed);
        w.key("doubled");
        w.value(b.doubled);
        w.key("degenerate_family");
        w.value(b.degenerate_family);
        w.key("cusp_count");
        w.value(b.cusps.size());
        w.key("asymptote_count");
        w.value(b.asymptotes.size());
        w.key("double_tangent_count");
        w.value(b.double_tangents.size());
        w.key("rotation_number");
        if (b.rotation)
            w.value(*b.rotation);
        else
            w.null_value();
        w.key("connects_inflexions");
        if (b.connects_inflexions) {
            w.begin_array();
            w.value(b.connects_inflexions->first);
            w.value(b.connects_inflexions->second);
            w.end_array();
        } else {
            w.null_value();
        }
        w.key("sample_count");
        w.value(b.samples.size());
        w.key("events");
        w.begin_array();
        auto emit_event = [&](const SingularEvent& ev) {
            w.begin_object();
            w.key("kind");
            w.value(event_kind_name(ev.kind));
            w.key("s1");
            w.value(ev.s1);
            w.key("s2");
            w.value(ev.s2);
            w.key("x");
            w.value(ev.location.x);
            w.key("y");
            w.value(ev.location.y);
            w.key("degenerate");
            w.value(ev.degenerate);
            w.end_object();
        };
        for (const SingularEvent& ev : b.cusps) emit_event(ev);
        for (const SingularEvent& ev : b.asymptotes) emit_event(ev);
        for (const SingularEvent& ev : b.double_tangents) emit_event(ev);
        w.end_array();
        w.end_object();
    }
    w.end_array();

    w.key("verdicts");
    w.begin_object();
    w.key("all_pass");
    w.value(report.verdicts.all_pass());
    w.key("entries");
    w.begin_array();
    for (const VerdictEntry& e : report.verdicts.entries) {
        w.begin_object();
        w.key("name");
        w.value(e.name);
        w.key("pass");
        w.value(e.pass);
        w.key("witness");
        w.value(e.witness);
        w.end_object();
    }
    w.end_array();
    w.end_object();

    w.key("genericity");
    if (report.genericity) {
        w.begin_object();
        w.key("overall");
        w.value(report.genericity->overall);
        w.key("resolution");
        w.value(report.genericity->resolution);
        w.key("entries");
        w.begin_array();
        for (const GenericityEntry& e : report.genericity->entries) {
            w.begin_object();
            w.key("id");
            w.value(e.id);
            w.key("status");
            w.value(status_name(e.status));
            w.key("note");
            w.value(e.note);
            w.key("min_margin");
            w.value(e.min_margin);
            w.key("witness");
            w.begin_array();
            for (double v : e.witness) w.value(v);
            w.end_array();
            w.end_object();
        }
        w.end_array();
        w.end_object();
    } else {
        w.null_value();
    }

    w.key("stage_errors");
    w.begin_array();
    for (const std::string& err : report.stage_errors) w.value(err);
    w.end_array();

    if (report.config.include_timing) {
        w.key("timing_ms");
        w.begin_object();
        for (const auto& [name, ms] : report.timing_ms) {
            w.key(name);
            w.value(ms);
        }
        w.end_object();
    }
    w.end_object();
    return w.str();
}

std::string branch_to_csv(const CausticBranch& branch) {
    std::string out = "s1,s2,x,y,event\n";
    auto row = [&](double s1, double s2, double x, double y, const char* event) {
        out += format_double(s1, "%.12g") + "," + format_double(s2, "%.12g") + "," +
               format_double(x, "%.12g") + "," + format_double(y, "%.12g") + "," + event +
               "\n";
    };
    for (const BranchSample& s : branch.samples)
        row(s.s1, s.s2, s.point.x, s.point.y, s.gap_before ? "gap" : "");
    auto rows_for = [&](const std::vector<SingularEvent>& events) {
        for (const SingularEvent& ev : events)
            row(ev.s1, ev.s2, ev.location.x, ev.location.y, event_kind_name(ev.kind));
    };
    rows_for(branch.cusps);
    rows_for(branch.asymptotes);
    rows_for(branch.double_tangents);
    return out;
}

namespace {

std::string branch_file_name(const CausticBranch& b) {
    std::string name = caustic_kind_name(b.kind);
    if (b.kind == CausticKind::equidistant) name += "_" + format_double(b.lambda, "%g");
    return name + "_branch_" + std::to_string(b.scheme_index) + ".csv";
}

}  // namespace

std::string render_svg(const AnalysisReport& report) {
    if (!report.curve || !report.decomposition) return "<svg/>";
    const CurveGeometry& curve = *report.curve;
    // Fit the view box to the curve with a 5% margin.
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    const int n = 1024;
    std::vector<Vec2> curve_pts(n + 1);
    for (int i = 0; i <= n; ++i) {
        Vec2 p = curve.position(curve.period() * static_cast<double>(i) / n);
        curve_pts[i] = p;
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    double span = std::max(max_x - min_x, max_y - min_y);
    double margin = 0.05 * span;
    double cx = 0.5 * (min_x + max_x), cy = 0.5 * (min_y + max_y);
    double half = 0.5 * span + margin;
    double view = 1000.0;
    auto X = [&](double x) { return (x - (cx - half)) / (2 * half) * view; };
    auto Y = [&](double y) { return view - (y - (cy - half)) / (2 * half) * view; };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 1000\">\n";
    auto polyline = [&](const std::vector<Vec2>& pts, const std::vector<bool>& gaps,
                        const char* style) {
        std::string d;
        bool move = true;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i < gaps.size() && gaps[i]) move = true;
            double px = X(pts[i].x), py = Y(pts[i].y);
            if (std::fabs(px - 500.0) > 20000.0 || std::fabs(py - 500.0) > 20000.0) {
                move = true;  // far outside the view; break the path
                continue;
            }
            d += (move ? "M" : "L") + format_double(px, "%.2f") + " " + format_double(py, "%.2f");
            move = false;
        }
        if (!d.empty())
            svg += "<path d=\"" + d + "\" fill=\"none\" " + style + "/>\n";
    };

    polyline(curve_pts, {}, "stroke=\"#202020\" stroke-width=\"2\"");
    for (const CausticBranch& b : report.branches) {
        std::vector<Vec2> pts;
        std::vector<bool> gaps;
        for (const BranchSample& s : b.samples) {
            pts.push_back(s.point);
            gaps.push_back(s.gap_before);
        }
        switch (b.kind) {
            case CausticKind::css:
                polyline(pts, gaps, "stroke=\"#c02040\" stroke-width=\"1.5\"");
                break;
            case CausticKind::wigner:
                polyline(pts, gaps,
                         "stroke=\"#2060c0\" stroke-width=\"1.5\" stroke-dasharray=\"8 5\"");
                break;
            case CausticKind::secant:
                polyline(pts, gaps,
                         "stroke=\"#208040\" stroke-width=\"1\" stroke-dasharray=\"2 4\"");
                break;
            case CausticKind::equidistant:
                polyline(pts, gaps,
                         "stroke=\"#806020\" stroke-width=\"1\" stroke-dasharray=\"5 5\"");
                break;
        }
        if (b.kind == CausticKind::css) {
            for (const SingularEvent& ev : b.asymptotes) {
                // Dotted asymptote line clipped to the view span.
                Vec2 p0 = ev.line.point - ev.line.dir * (4 * half);
                Vec2 p1 = ev.line.point + ev.line.dir * (4 * half);
                svg += "<line x1=\"" + format_double(X(p0.x), "%.2f") + "\" y1=\"" +
                       format_double(Y(p0.y), "%.2f") + "\" x2=\"" +
                       format_double(X(p1.x), "%.2f") + "\" y2=\"" +
                       format_double(Y(p1.y), "%.2f") +
                       "\" stroke=\"#808080\" stroke-width=\"1\" stroke-dasharray=\"2 6\"/>\n";
            }
            for (const SingularEvent& ev : b.cusps) {
                svg += "<circle cx=\"" + format_double(X(ev.location.x), "%.2f") + "\" cy=\"" +
                       format_double(Y(ev.location.y), "%.2f") +
                       "\" r=\"5\" fill=\"none\" stroke=\"#c02040\" stroke-width=\"1.5\"/>\n";
            }
        }
    }
    svg += "</svg>\n";
    return svg;
}

std::vector<std::string> emit_outputs(const AnalysisReport& report, const std::string& out_dir,
                                      bool svg) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    auto write_file = [&](const std::string& name, const std::string& content) {
        fs::path path = fs::path(out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw CliIoError("cannot write '" + path.string() + "'");
        out << content;
        written.push_back(path.string());
    };
    write_file("report.json", report_to_json(report));
    for (const CausticBranch& b : report.branches)
        write_file(branch_file_name(b), branch_to_csv(b));
    if (svg) write_file("figure.svg", render_svg(report));
    return written;
}

std::vector<OracleComparison> compare_envelope_oracle(const CurveSpec& spec, int n_samples) {
    CurveGeometry curve = build_curve(spec);
    AngleFunction angles = angle_function(curve, choose_base_point(curve));
    ParallelDecomposition dec = decompose(curve, angles);
    std::vector<GlueingScheme> schemes = enumerate_maximal_schemes(dec);
    const double period = curve.period();
    const double tolerance = 1e-3 * curve.diameter();
    const double exclusion = 0.05;  // parameter radius around asymptote roots

    std::vector<OracleComparison> out;
    for (const GlueingScheme& scheme : schemes) {
        bool shell = scheme.endpoints == SchemeEndpoints::inflexion_to_inflexion;
        double worst_n = 0.0, worst_2n = 0.0;
        for (std::size_t k = 0; k < scheme.segments.size(); ++k) {
            const SchemeSegment& seg = scheme.segments[k];
            Correspondence corr = solve_correspondence(angles, dec, seg.top_arc, seg.bottom_arc);
            const Arc& src = corr.source();
            double sigma = corr.sigma();
            // Asymptote roots of this segment, for the exclusion zones.
            DetectorConfig det;
            det.scan_samples = 4096;
            if (shell && k == 0) det.skip_lo = 1e-3;
            if (shell && k + 1 == scheme.segments.size()) det.skip_hi = 1e-3;
            std::vector<double> a_roots;
            for (const SingularEvent& ev : detect_asymptotes(curve, corr, det).events)
                a_roots.push_back(ev.s1);
            // The source parameterization degenerates where the partner sits
            // at an inflexion (t'(s) blows up); skip a thin band there.
            double span = src.t_hi - src.t_lo;
            double kappa_floor = 1e-3 * curve.max_abs_kappa();
            bool lo_infl = std::fabs(curve.kappa(corr.map(src.t_lo))) < kappa_floor;
            bool hi_infl = std::fabs(curve.kappa(corr.map(src.t_hi))) < kappa_floor;
            auto excluded = [&](double s) {
                for (double r : a_roots)
                    if (std::fabs(s - r) < exclusion) return true;
                if ((lo_infl || (shell && k == 0)) && s - src.t_lo < 2e-3 * span) return true;
                if ((hi_infl || (shell && k + 1 == scheme.segments.size())) &&
                    src.t_hi - s < 2e-3 * span)
                    return true;
                return false;
            };

            auto run = [&](int n) {
                int n_seg =
                    std::max(64, static_cast<int>(n * (src.t_hi - src.t_lo) / period));
                std::vector<EnvelopeVertex> oracle = envelope_oracle(curve, corr, n_seg);
                // Formula samples on the same chord grid.
                std::vector<Vec2> formula(n_seg + 1);
                std::vector<bool> valid(n_seg + 1, false);
                for (int i = 0; i <= n_seg; ++i) {
                    double s =
                        src.t_lo + (src.t_hi - src.t_lo) * static_cast<double>(i) / n_seg;
                    if (excluded(s)) continue;
                    PairSample pair = make_pair_sample(curve, s, corr.map(s));
                    double a_val = pair.a.kappa - sigma * pair.b.kappa;
                    if (std::fabs(a_val) < 1e-7 * curve.max_abs_kappa()) continue;
                    formula[i] = css_point(pair);
                    valid[i] = true;
                }
                double worst = 0.0;
                for (std::size_t vi = 0; vi < oracle.size(); ++vi) {
                    const EnvelopeVertex& v = oracle[vi];
                    if (excluded(v.s_mid)) continue;
                    int i0 = static_cast<int>((v.s_mid - src.t_lo) /
                                              (src.t_hi - src.t_lo) * n_seg);
                    i0 = std::max(0, std::min(n_seg - 1, i0));
                    // Skip edge vertices whose bracketing formula segment was
                    // excluded; they sit half a sample into the zone.
                    if (!valid[i0] || !valid[i0 + 1]) continue;
                    double best = 1e300;
                    for (int i = std::max(0, i0 - 3); i <= std::min(n_seg - 1, i0 + 3); ++i) {
                        if (!valid[i] || !valid[i + 1]) continue;
                        best = std::min(best,
                                        point_segment_distance(v.point, formula[i],
                                                               formula[i + 1]));
                    }
                    if (best < 1e300) worst = std::max(worst, best);
                }
                return worst;
            };
            worst_n = std::max(worst_n, run(n_samples));
            worst_2n = std::max(worst_2n, run(2 * n_samples));
        }
        OracleComparison cmp;
        cmp.scheme = scheme.index;
        cmp.hausdorff = worst_n;
        cmp.hausdorff_2n = worst_2n;
        cmp.ratio = worst_2n > 0.0 ? worst_n / worst_2n : 1e300;
        cmp.tolerance = tolerance;
        // The convergence-ratio check is meaningless once the error sits at
        // the numerical noise floor (degenerate CSS collapsing to a point).
        bool at_noise_floor = worst_2n < 1e-6 * tolerance;
        cmp.pass = worst_n < tolerance && (at_noise_floor || cmp.ratio >= 1.8);
        out.push_back(cmp);
    }
    return out;
}

}  // namespace css
