#include "qpfactor/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "qpfactor/error.hpp"

namespace qpf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Appends the embedded coordinates of sample i.
void push_value(const SampledSignal& s, std::size_t i, std::vector<double>& out) {
    for (double v : s.value(i)) {
        if (s.kind() == CodomainKind::Circle) {
            out.push_back(std::cos(kTwoPi * v));
            out.push_back(std::sin(kTwoPi * v));
        } else {
            out.push_back(v);
        }
    }
}

std::size_t embedded_width(const SampledSignal& s) {
    return s.kind() == CodomainKind::Circle ? 2 * s.dim() : s.dim();
}

// Index of the sample at x, or npos when x is not a grid point.
std::size_t find_grid_point(const std::vector<double>& xs, double x, double tol) {
    auto it = std::lower_bound(xs.begin(), xs.end(), x - tol);
    if (it == xs.end() || std::abs(*it - x) > tol) return std::numeric_limits<std::size_t>::max();
    return static_cast<std::size_t>(it - xs.begin());
}

}  // namespace

double distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

OffsetSet::OffsetSet(std::vector<double> offsets) : offsets_(std::move(offsets)) {
    require(!offsets_.empty(), "offset set must not be empty");
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
        require(std::isfinite(offsets_[i]) && offsets_[i] > 0.0, "offsets must be positive");
        if (i > 0) require(offsets_[i] > offsets_[i - 1], "offsets must be strictly increasing");
    }
}

OffsetSet OffsetSet::from_steps(const std::vector<std::size_t>& steps, double step) {
    std::vector<double> v;
    v.reserve(steps.size());
    for (std::size_t s : steps) v.push_back(static_cast<double>(s) * step);
    return OffsetSet(std::move(v));
}

namespace {

PointCloud embed_with_sign(const SampledSignal& signal, const OffsetSet& offsets, double sign) {
    const double h = signal.step();
    if (signal.size() < 2) fail(ErrorKind::EmptyEmbedding, "a single sample has no delayed partner");
    for (double v : offsets.offsets()) {
        const double ratio = v / h;
        const double whole = std::round(ratio);
        if (whole < 1.0 || std::abs(ratio - whole) > 1e-9 * std::max(1.0, ratio))
            fail(ErrorKind::InvalidArgument,
                 "offset " + std::to_string(v) + " is not a whole multiple of the grid step");
    }

    const auto& xs = signal.domain();
    const double tol = 1e-6 * h;
    PointCloud cloud;
    cloud.dim = embedded_width(signal) * (offsets.size() + 1);
    std::vector<std::size_t> partners(offsets.size());
    for (std::size_t i = 0; i < signal.size(); ++i) {
        bool complete = true;
        for (std::size_t j = 0; j < offsets.size() && complete; ++j) {
            partners[j] = find_grid_point(xs, xs[i] + sign * offsets.offsets()[j], tol);
            complete = partners[j] != std::numeric_limits<std::size_t>::max();
        }
        if (!complete) continue;
        push_value(signal, i, cloud.coords);
        for (std::size_t p : partners) push_value(signal, p, cloud.coords);
        cloud.source_index.push_back(i);
    }
    if (cloud.size() == 0)
        fail(ErrorKind::EmptyEmbedding, "no sample has every delayed partner inside the domain");
    return cloud;
}

}  // namespace

PointCloud delay_embed(const SampledSignal& signal, const OffsetSet& offsets) {
    return embed_with_sign(signal, offsets, 1.0);
}

PointCloud delay_embed_backward(const SampledSignal& signal, const OffsetSet& offsets) {
    return embed_with_sign(signal, offsets, -1.0);
}

int takens_dimension(int domain_dim) {
    require(domain_dim >= 1, "domain dimension must be at least 1");
    return 2 * domain_dim;
}

PointCloud derivative_embed(const SampledSignal& signal, int order) {
    require(order >= 1, "derivative order must be at least 1");
    const std::size_t n = signal.size();
    require(n >= 2 * static_cast<std::size_t>(order) + 1, "too few samples for derivative stencil");
    require(signal.uniform(), "derivative embedding needs a uniform grid");
    const double h = signal.step();
    const std::size_t m = signal.dim();

    // Real-valued series per component; circle components are unwrapped first.
    std::vector<double> series = signal.values();
    if (signal.kind() == CodomainKind::Circle) {
        for (std::size_t c = 0; c < m; ++c)
            for (std::size_t i = 1; i < n; ++i) {
                const double d = series[i * m + c] - series[(i - 1) * m + c];
                series[i * m + c] = series[(i - 1) * m + c] + (d - std::round(d));
            }
    }

    // Stencil for order j: D1 = (E - E^-1)/2h, D2 = (E - 2 + E^-1)/h^2,
    // even j -> D2^(j/2), odd j -> D1 D2^((j-1)/2).
    std::vector<std::vector<double>> stencils;  // centred weights, half-width = (size-1)/2
    for (int j = 1; j <= order; ++j) {
        std::vector<double> w{1.0};
        auto convolve = [&w](const std::vector<double>& k) {
            std::vector<double> r(w.size() + k.size() - 1, 0.0);
            for (std::size_t a = 0; a < w.size(); ++a)
                for (std::size_t b = 0; b < k.size(); ++b) r[a + b] += w[a] * k[b];
            w = std::move(r);
        };
        for (int t = 0; t < j / 2; ++t) convolve({1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)});
        if (j % 2 == 1) convolve({-0.5 / h, 0.0, 0.5 / h});
        stencils.push_back(std::move(w));
    }
    const std::size_t half = (stencils.back().size() - 1) / 2;

    PointCloud cloud;
    cloud.dim = embedded_width(signal) + m * static_cast<std::size_t>(order);
    for (std::size_t i = half; i + half < n; ++i) {
        push_value(signal, i, cloud.coords);
        for (const auto& w : stencils) {
            const std::size_t hw = (w.size() - 1) / 2;
            for (std::size_t c = 0; c < m; ++c) {
                double acc = 0.0;
                for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * series[(i - hw + k) * m + c];
                cloud.coords.push_back(acc);
            }
        }
        cloud.source_index.push_back(i);
    }
    return cloud;
}

std::vector<std::size_t> maxmin_landmarks(const PointCloud& cloud, std::size_t count,
                                          std::size_t seed) {
    require(count >= 1 && count <= cloud.size(), "landmark count out of range");
    require(seed < cloud.size(), "landmark seed index out of range");
    std::vector<std::size_t> chosen{seed};
    chosen.reserve(count);
    std::vector<double> mind(cloud.size(), std::numeric_limits<double>::infinity());
    std::size_t last = seed;
    while (chosen.size() < count) {
        std::size_t best = cloud.size();
        double best_d = -1.0;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            mind[i] = std::min(mind[i], distance(cloud.point(i), cloud.point(last)));
            if (mind[i] > best_d) {
                best_d = mind[i];
                best = i;
            }
        }
        // Remaining points coincide with chosen ones: take the lowest unchosen index.
        if (best_d <= 0.0) {
            std::vector<bool> taken(cloud.size(), false);
            for (std::size_t c : chosen) taken[c] = true;
            for (std::size_t i = 0; i < cloud.size() && chosen.size() < count; ++i)
                if (!taken[i]) chosen.push_back(i);
            break;
        }
        chosen.push_back(best);
        last = best;
    }
    return chosen;
}

std::size_t autocorrelation_zero_lag(const SampledSignal& signal) {
    const std::size_t n = signal.size();
    const std::size_t w = embedded_width(signal);
    std::vector<double> centred;
    centred.reserve(n * w);
    for (std::size_t i = 0; i < n; ++i) push_value(signal, i, centred);
    for (std::size_t c = 0; c < w; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += centred[i * w + c];
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) centred[i * w + c] -= mean;
    }
    for (std::size_t lag = 1; lag < n; ++lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i)
            for (std::size_t c = 0; c < w; ++c) acc += centred[i * w + c] * centred[(i + lag) * w + c];
        if (acc <= 0.0) return lag;
    }
    return 0;
}

OffsetSet default_offsets(const SampledSignal& signal) {
    require(signal.size() >= 3, "default offsets need at least 3 samples");
    const int k = takens_dimension(1);
    const std::size_t n = signal.size();
    std::size_t lag = autocorrelation_zero_lag(signal);
    // No zero crossing: fall back to a tenth of the record. Either way the longest
    // delay leaves at least a third of the record embedded.
    if (lag == 0) lag = std::max<std::size_t>(1, n / 10);
    lag = std::min(lag, (n - 1) / static_cast<std::size_t>(k + 1));
    lag = std::max<std::size_t>(lag, 1);
    std::vector<std::size_t> steps;
    for (int j = 1; j <= k; ++j) steps.push_back(lag * static_cast<std::size_t>(j));
    return OffsetSet::from_steps(steps, signal.step());
}

void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
    out << "idx";
    for (std::size_t c = 0; c < cloud.dim; ++c) out << ",p" << (c + 1);
    out << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out << cloud.source_index[i];
        for (double v : cloud.point(i)) out << ',' << v;
        out << '\n';
    }
}

}  // namespace qpf
