#include "qpfactor/signal.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "qpfactor/circle.hpp"
#include "qpfactor/error.hpp"

namespace qpf {

namespace {

constexpr double kPi = std::numbers::pi;

void check_grid_args(std::size_t n, double a, double b) {
    require(n >= 2, "generator needs at least 2 samples");
    require(std::isfinite(a) && std::isfinite(b) && a < b, "generator needs a < b");
}

template <class F>
SampledSignal tabulate(std::size_t n, double a, double b, F&& f,
                       CodomainKind kind = CodomainKind::Euclidean) {
    check_grid_args(n, a, b);
    std::vector<double> xs = uniform_grid(n, a, b);
    std::vector<double> vs(n);
    for (std::size_t i = 0; i < n; ++i) vs[i] = f(xs[i]);
    return SampledSignal(std::move(xs), std::move(vs), 1, kind);
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view field, std::size_t line_no) {
    std::string t = trim(field);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        fail(ErrorKind::FormatError, "line " + std::to_string(line_no) + ": bad number '" + t + "'");
    return v;
}

}  // namespace

std::string_view codomain_name(CodomainKind kind) {
    return kind == CodomainKind::Circle ? "circle" : "euclidean";
}

SampledSignal::SampledSignal(std::vector<double> domain, std::vector<double> values,
                             std::size_t dim, CodomainKind kind)
    : domain_(std::move(domain)), values_(std::move(values)), dim_(dim), kind_(kind) {
    require(dim_ >= 1, "signal codomain dimension must be at least 1");
    require(!domain_.empty(), "signal must have at least one sample");
    require(values_.size() == domain_.size() * dim_, "signal values do not match domain length");
    for (std::size_t i = 1; i < domain_.size(); ++i)
        require(domain_[i] > domain_[i - 1], "signal domain must be strictly increasing");
    if (kind_ == CodomainKind::Circle)
        for (double v : values_) require(v >= 0.0 && v < 1.0, "circle values must lie in [0,1)");
}

double SampledSignal::step() const {
    return size() < 2 ? 0.0 : span_length() / static_cast<double>(size() - 1);
}

bool SampledSignal::uniform(double rel_tol) const {
    const double h = step();
    for (std::size_t i = 1; i < size(); ++i)
        if (std::abs(domain_[i] - domain_[i - 1] - h) > rel_tol * h) return false;
    return true;
}

std::vector<double> uniform_grid(std::size_t n, double a, double b) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i)
        xs[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    xs.back() = b;
    return xs;
}

SampledSignal gen_modulated_periodic(std::size_t n, double a, double b) {
    return tabulate(n, a, b, [](double x) {
        const double theta = mod1(x / 2.0);
        return theta < 0.5 ? std::sin(4.0 * kPi * theta) : 0.5 * std::sin(8.0 * kPi * theta);
    });
}

SampledSignal gen_chirp_recip(std::size_t n, double t0, double t1) {
    require(t0 > 0.0, "chirp domain must start at t0 > 0");
    return tabulate(n, t0, t1, [](double t) { return std::sin(1.0 / t); });
}

SampledSignal gen_arctan_circle(std::size_t n, double a, double b) {
    return tabulate(n, a, b, [](double x) { return mod1(std::atan(x)); }, CodomainKind::Circle);
}

SampledSignal gen_sine(std::size_t n, double a, double b, double period) {
    require(period > 0.0, "sine period must be positive");
    return tabulate(n, a, b, [period](double x) { return std::sin(2.0 * kPi * x / period); });
}

SampledSignal gen_constant(std::size_t n, double a, double b, double c) {
    return tabulate(n, a, b, [c](double) { return c; });
}

SampledSignal gen_linear(std::size_t n, double a, double b) {
    return tabulate(n, a, b, [](double x) { return x; });
}

SampledSignal add_gaussian_noise(const SampledSignal& s, double sigma, std::uint64_t seed) {
    require(sigma >= 0.0, "noise sigma must be nonnegative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, sigma);
    std::vector<double> vs = s.values();
    for (double& v : vs) {
        v += dist(rng);
        if (s.kind() == CodomainKind::Circle) v = mod1(v);
    }
    return SampledSignal(s.domain(), std::move(vs), s.dim(), s.kind());
}

void save_signal(const SampledSignal& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
    out << "# qpfactor-signal m=" << s.dim() << " kind=" << codomain_name(s.kind()) << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << s.x(i);
        for (double v : s.value(i)) out << ',' << v;
        out << '\n';
    }
    if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

SampledSignal load_signal(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());

    std::size_t dim = 0;
    CodomainKind kind = CodomainKind::Euclidean;
    std::vector<double> xs, vs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '#') {
            std::istringstream hs(t.substr(1));
            std::string tok;
            while (hs >> tok) {
                if (tok.rfind("m=", 0) == 0) {
                    dim = static_cast<std::size_t>(parse_double(tok.substr(2), line_no));
                } else if (tok == "kind=circle") {
                    kind = CodomainKind::Circle;
                } else if (tok == "kind=euclidean") {
                    kind = CodomainKind::Euclidean;
                } else if (tok.rfind("kind=", 0) == 0) {
                    fail(ErrorKind::FormatError, "unknown codomain " + tok);
                }
            }
            continue;
        }
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            auto comma = t.find(',', start);
            row.push_back(parse_double(std::string_view(t).substr(start, comma - start), line_no));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (dim == 0) dim = row.size() - 1;
        if (row.size() < 2 || row.size() != dim + 1)
            fail(ErrorKind::FormatError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(dim + 1) + " columns");
        if (!xs.empty() && row[0] <= xs.back())
            fail(ErrorKind::FormatError,
                 "line " + std::to_string(line_no) + ": domain is not strictly increasing");
        xs.push_back(row[0]);
        vs.insert(vs.end(), row.begin() + 1, row.end());
    }
    if (xs.empty()) fail(ErrorKind::FormatError, path.string() + " has no samples");
    try {
        return SampledSignal(std::move(xs), std::move(vs), dim, kind);
    } catch (const Error& e) {
        fail(ErrorKind::FormatError, e.what());
    }
}

}  // namespace qpf
