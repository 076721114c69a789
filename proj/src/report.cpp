#include "qpfactor/report.hpp"

#include <charconv>
#include <fstream>

#include "qpfactor/error.hpp"

namespace qpf {

namespace {

Json bin_values(const UModel& model) {
    Json out = Json::array();
    for (std::size_t b = 0; b < model.bins; ++b) {
        const auto v = model.bin(b);
        if (model.dim == 1) {
            out.push_back(v[0]);
        } else {
            out.push_back(Json(std::vector<double>(v.begin(), v.end())));
        }
    }
    return out;
}

Json gauge_json(const Gauge& g) { return Json{{"anchor", g.anchor}, {"sign", g.sign}}; }

bool parse_double(std::string_view s, double& out) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Json number_or_inf(double v) {
    if (v == kInfinity) return "inf";
    return v;
}

Json diagnostics_json(const Factorization& fz) {
    Json d;
    d["scale"] = fz.scale;
    d["winding"] = fz.winding;
    d["gauge"] = gauge_json(fz.gauge);
    d["solver_iterations"] = fz.solver_iterations;
    d["normal_residual"] = fz.normal_residual;
    d["offsets"] = fz.offsets;
    d["landmarks"] = fz.landmark_count;
    d["rmax"] = fz.rmax;
    d["h1_bars"] = fz.h1_bars;
    if (fz.dominant_bar)
        d["dominant_bar"] = Json{{"birth", fz.dominant_bar->birth}, {"death", number_or_inf(fz.dominant_bar->death)}};
    else
        d["dominant_bar"] = nullptr;
    d["continued_samples"] = fz.continued_samples;
    return d;
}

Json factorization_json(const SampledSignal& signal, const Factorization& fz, const Json& config_echo) {
    Json j;
    j["phase_class"] = std::string(phase_class_name(fz.phase_class));
    if (fz.period_estimate)
        j["period_estimate"] = *fz.period_estimate;
    else
        j["period_estimate"] = nullptr;
    j["winding"] = fz.winding;
    j["residual_rms"] = fz.residual_rms;
    j["residual_sup"] = fz.residual_sup;
    j["bins"] = bin_values(fz.u_model);
    j["gauge"] = gauge_json(fz.gauge);
    j["config_echo"] = config_echo;
    j["warnings"] = fz.warnings;
    if (fz.injectivity) {
        Json w = Json::array();
        for (const auto& [a, b] : fz.injectivity->witnesses)
            w.push_back(Json::array({signal.x(fz.samples[a]), signal.x(fz.samples[b])}));
        j["injectivity"] = Json{{"pass", fz.injectivity->pass},
                                {"violations", fz.injectivity->violations},
                                {"witnesses", w}};
    } else {
        j["injectivity"] = nullptr;
    }
    j["diagnostics"] = diagnostics_json(fz);
    return j;
}

Json join_json(const QuotientPartition& q, std::size_t bins, const std::vector<WitnessPair>& witnesses,
               const Json& config_echo) {
    Json j;
    j["class_count"] = q.class_count;
    j["winding_estimate"] = q.winding_estimate;
    j["cycle_rank"] = q.cycle_rank;
    j["bins"] = bins;
    Json w = Json::array();
    for (const auto& p : witnesses) w.push_back(Json{{"direction", p.direction}, {"x", Json::array({p.x1, p.x2})}});
    j["witness_pairs"] = w;
    j["config_echo"] = config_echo;
    return j;
}

void write_json(const Json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void save_phase_csv(const std::filesystem::path& path, const PhaseSeries& series) {
    require(series.x.size() == series.theta.size(), "phase series columns differ in length");
    std::ofstream out(path);
    if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
    out.precision(17);
    out << "x,theta\n";
    for (std::size_t i = 0; i < series.x.size(); ++i) out << series.x[i] << ',' << series.theta[i] << '\n';
}

PhaseSeries load_phase_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
    PhaseSeries s;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        if (line.rfind("x,", 0) == 0) continue;
        const auto comma = line.find(',');
        double x = 0.0, t = 0.0;
        if (comma == std::string::npos || !parse_double(std::string_view(line).substr(0, comma), x) ||
            !parse_double(std::string_view(line).substr(comma + 1), t))
            fail(ErrorKind::FormatError, path.string() + ":" + std::to_string(lineno) + ": expected x,theta");
        if (!s.x.empty() && !(x > s.x.back()))
            fail(ErrorKind::FormatError, path.string() + ":" + std::to_string(lineno) + ": x must increase");
        if (!(t >= 0.0 && t < 1.0))
            fail(ErrorKind::FormatError, path.string() + ":" + std::to_string(lineno) + ": theta outside [0,1)");
        s.x.push_back(x);
        s.theta.push_back(t);
    }
    if (s.x.empty()) fail(ErrorKind::FormatError, path.string() + ": no phase rows");
    return s;
}

PhaseSeries phase_series(const SampledSignal& signal, const Factorization& fz) {
    PhaseSeries s;
    for (std::size_t k = 0; k < fz.samples.size(); ++k) {
        s.x.push_back(signal.x(fz.samples[k]));
        s.theta.push_back(fz.theta[k]);
    }
    return s;
}

void save_u_bins_csv(const std::filesystem::path& path, const UModel& model) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
    out.precision(17);
    out << "bin,center";
    for (std::size_t c = 0; c < model.dim; ++c) out << ",u" << (c + 1);
    out << '\n';
    for (std::size_t b = 0; b < model.bins; ++b) {
        out << b << ',' << (static_cast<double>(b) + 0.5) / static_cast<double>(model.bins);
        for (double v : model.bin(b)) out << ',' << v;
        out << '\n';
    }
}

}  // namespace qpf
