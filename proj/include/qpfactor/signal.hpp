#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace qpf {

enum class CodomainKind { Euclidean, Circle };

std::string_view codomain_name(CodomainKind kind);

/// A function u sampled on a strictly increasing grid. Values are stored
/// row-major, `dim()` reals per sample; circle values live in [0, 1).
class SampledSignal {
public:
    SampledSignal(std::vector<double> domain, std::vector<double> values, std::size_t dim,
                  CodomainKind kind = CodomainKind::Euclidean);

    std::size_t size() const { return domain_.size(); }
    std::size_t dim() const { return dim_; }
    CodomainKind kind() const { return kind_; }

    const std::vector<double>& domain() const { return domain_; }
    const std::vector<double>& values() const { return values_; }
    double x(std::size_t i) const { return domain_[i]; }
    std::span<const double> value(std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }

    double span_length() const { return domain_.back() - domain_.front(); }
    /// Mean grid spacing; zero for single-sample signals.
    double step() const;
    bool uniform(double rel_tol = 1e-9) const;

    bool operator==(const SampledSignal&) const = default;

private:
    std::vector<double> domain_;
    std::vector<double> values_;
    std::size_t dim_;
    CodomainKind kind_;
};

std::vector<double> uniform_grid(std::size_t n, double a, double b);

// Generators. All produce uniform grids x_i = a + i (b - a) / (n - 1).

/// U(phi(x)) with phi(x) = x/2 mod 1 and U(t) = sin 4 pi t on [0, 1/2),
/// (1/2) sin 8 pi t on [1/2, 1). Fundamental period 2.
SampledSignal gen_modulated_periodic(std::size_t n, double a, double b);
/// sin(1/t) on [t0, t1], t0 > 0.
SampledSignal gen_chirp_recip(std::size_t n, double t0, double t1);
/// Circle-valued arctan(x) mod 1.
SampledSignal gen_arctan_circle(std::size_t n, double a, double b);
/// sin(2 pi x / period).
SampledSignal gen_sine(std::size_t n, double a, double b, double period = 1.0);
SampledSignal gen_constant(std::size_t n, double a, double b, double c = 0.0);
/// u(x) = x.
SampledSignal gen_linear(std::size_t n, double a, double b);

/// Adds N(0, sigma^2) noise to every value component; circle values are re-wrapped.
SampledSignal add_gaussian_noise(const SampledSignal& s, double sigma, std::uint64_t seed);

/// CSV with header `# qpfactor-signal m=<int> kind=<euclidean|circle>` and
/// rows `x,v1,...,vm` written at 17 significant digits.
void save_signal(const SampledSignal& s, const std::filesystem::path& path);
SampledSignal load_signal(const std::filesystem::path& path);

}  // namespace qpf
