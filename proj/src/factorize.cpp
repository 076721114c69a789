#include "qpfactor/factorize.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <limits>
#include <numbers>
#include <sstream>

#include "qpfactor/circle.hpp"
#include "qpfactor/error.hpp"

namespace qpf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double bar_ratio(const Bar& b) {
    if (b.infinite() || b.birth <= 0.0) return kInfinity;
    return b.death / b.birth;
}

std::vector<double> gather_values(const SampledSignal& s, const std::vector<std::size_t>& samples) {
    std::vector<double> out;
    out.reserve(samples.size() * s.dim());
    for (std::size_t i : samples) {
        auto v = s.value(i);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

std::vector<std::size_t> all_samples(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

// True when two samples farther apart than tol_domain have values within tol_value.
bool revisits_values(const SampledSignal& s, double tol_value, double tol_domain) {
    const bool circ = s.kind() == CodomainKind::Circle;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            if (s.x(j) - s.x(i) <= tol_domain) continue;
            double acc = 0.0;
            for (std::size_t c = 0; c < s.dim(); ++c) {
                const double d = s.value(i)[c] - s.value(j)[c];
                acc += circ ? wrap_half(d) * wrap_half(d) : d * d;
            }
            if (std::sqrt(acc) < tol_value) return true;
        }
    return false;
}

}  // namespace

std::string_view phase_class_name(PhaseClass c) {
    switch (c) {
        case PhaseClass::Point: return "Point";
        case PhaseClass::Interval: return "Interval";
        case PhaseClass::Circle: return "Circle";
        case PhaseClass::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::vector<double> UModel::evaluate(double theta) const {
    double pos = theta * static_cast<double>(bins) - 0.5;
    std::size_t b0, b1;
    double t;
    if (periodic_phase) {
        const double fl = std::floor(pos);
        t = pos - fl;
        const auto k = static_cast<long long>(fl);
        const auto nb = static_cast<long long>(bins);
        b0 = static_cast<std::size_t>(((k % nb) + nb) % nb);
        b1 = (b0 + 1) % bins;
    } else {
        pos = std::clamp(pos, 0.0, static_cast<double>(bins - 1));
        b0 = static_cast<std::size_t>(std::floor(pos));
        b1 = std::min(b0 + 1, bins - 1);
        t = pos - static_cast<double>(b0);
    }
    std::vector<double> out(dim);
    for (std::size_t c = 0; c < dim; ++c) {
        const double v0 = values[b0 * dim + c], v1 = values[b1 * dim + c];
        out[c] = circular_values ? mod1(v0 + t * wrap_half(v1 - v0)) : v0 + t * (v1 - v0);
    }
    return out;
}

UModel build_U(const std::vector<double>& theta, std::span<const double> values, std::size_t dim,
               std::size_t bins, bool circular_values, bool periodic_phase) {
    require(bins >= 1, "U model needs at least one bin");
    require(dim >= 1 && values.size() == theta.size() * dim, "theta and values must have matching lengths");
    UModel m;
    m.bins = bins;
    m.dim = dim;
    m.circular_values = circular_values;
    m.periodic_phase = periodic_phase;
    m.values.assign(bins * dim, 0.0);
    m.counts.assign(bins, 0);

    std::vector<double> sum_a(bins * dim, 0.0), sum_b(bins * dim, 0.0);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        require(theta[i] >= 0.0 && theta[i] < 1.0, "phase values must lie in [0,1)");
        const auto b = std::min(static_cast<std::size_t>(theta[i] * static_cast<double>(bins)), bins - 1);
        ++m.counts[b];
        for (std::size_t c = 0; c < dim; ++c) {
            const double v = values[i * dim + c];
            if (circular_values) {
                sum_a[b * dim + c] += std::cos(kTwoPi * v);
                sum_b[b * dim + c] += std::sin(kTwoPi * v);
            } else {
                sum_a[b * dim + c] += v;
            }
        }
    }
    std::vector<std::size_t> filled;
    for (std::size_t b = 0; b < bins; ++b) {
        if (m.counts[b] == 0) continue;
        filled.push_back(b);
        for (std::size_t c = 0; c < dim; ++c) {
            const std::size_t k = b * dim + c;
            m.values[k] = circular_values ? mod1(std::atan2(sum_b[k], sum_a[k]) / kTwoPi)
                                          : sum_a[k] / static_cast<double>(m.counts[b]);
        }
    }
    require(!filled.empty(), "U model has no samples");

    // Fill empty bins by linear interpolation between the nearest occupied neighbours.
    for (std::size_t b = 0; b < bins; ++b) {
        if (m.counts[b] != 0) continue;
        auto next = std::upper_bound(filled.begin(), filled.end(), b);
        std::size_t lo, hi;
        double dl, dr;
        if (periodic_phase) {
            hi = next == filled.end() ? filled.front() : *next;
            lo = next == filled.begin() ? filled.back() : *std::prev(next);
            dl = static_cast<double>((b + bins - lo) % bins);
            dr = static_cast<double>((hi + bins - b) % bins);
        } else {
            if (next == filled.end()) {
                lo = hi = filled.back();
            } else if (next == filled.begin()) {
                lo = hi = filled.front();
            } else {
                lo = *std::prev(next);
                hi = *next;
            }
            dl = static_cast<double>(b > lo ? b - lo : lo - b);
            dr = static_cast<double>(hi > b ? hi - b : b - hi);
        }
        const double t = (lo == hi || dl + dr == 0.0) ? 0.0 : dl / (dl + dr);
        for (std::size_t c = 0; c < dim; ++c) {
            const double v0 = m.values[lo * dim + c], v1 = m.values[hi * dim + c];
            m.values[b * dim + c] = circular_values ? mod1(v0 + t * wrap_half(v1 - v0)) : v0 + t * (v1 - v0);
        }
    }
    return m;
}

Residual residual(const SampledSignal& signal, const UModel& model, const std::vector<double>& theta,
                  const std::vector<std::size_t>& samples) {
    const std::vector<std::size_t> idx = samples.empty() ? all_samples(signal.size()) : samples;
    require(idx.size() == theta.size(), "one phase value per sample required");
    require(model.dim == signal.dim(), "U model dimension does not match the signal");
    Residual r;
    if (idx.empty()) return r;
    double acc = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto u = signal.value(idx[k]);
        const auto fit = model.evaluate(theta[k]);
        double e2 = 0.0;
        for (std::size_t c = 0; c < u.size(); ++c) {
            const double d = model.circular_values ? wrap_half(u[c] - fit[c]) : u[c] - fit[c];
            e2 += d * d;
        }
        acc += e2;
        r.sup = std::max(r.sup, std::sqrt(e2));
    }
    r.rms = std::sqrt(acc / static_cast<double>(idx.size()));
    return r;
}

bool u_injective_on_bins(const UModel& model, double tol) {
    require(model.bins >= 1 && model.values.size() == model.bins * model.dim, "empty U model");
    for (std::size_t a = 0; a < model.bins; ++a)
        for (std::size_t b = a + 1; b < model.bins; ++b) {
            double acc = 0.0;
            for (std::size_t c = 0; c < model.dim; ++c) {
                const double va = model.values[a * model.dim + c], vb = model.values[b * model.dim + c];
                const double d = model.circular_values ? wrap_half(va - vb) : va - vb;
                acc += d * d;
            }
            if (!(std::sqrt(acc) > tol)) return false;
        }
    return true;
}

double estimate_period(double span, double winding) {
    if (!(std::abs(winding) > 0.5))
        fail(ErrorKind::NotPeriodic, "winding " + std::to_string(winding) + " is too small to define a period");
    return span / std::abs(winding);
}

InjectivityReport injectivity_windows(const std::vector<double>& theta, const std::vector<double>& x,
                                      double period, double tol_phase, double tol_domain,
                                      std::size_t max_witnesses) {
    require(theta.size() == x.size(), "phase and domain lengths differ");
    require(period > 0.0, "window length must be positive");
    require(!x.empty() && period <= x.back() - x.front(), "window length exceeds the domain span");
    InjectivityReport rep;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size() && x[j] < x[i] + period; ++j) {
            // Pairs within tol_domain of either window end are neighbours on the circle.
            const double sep = x[j] - x[i];
            if (sep <= tol_domain || sep >= period - tol_domain) continue;
            if (circdist(theta[i], theta[j]) < tol_phase) {
                ++rep.violations;
                if (rep.witnesses.size() < max_witnesses) rep.witnesses.emplace_back(i, j);
            }
        }
    }
    rep.pass = rep.violations == 0;
    return rep;
}

TopologyStage analyze_topology(const SampledSignal& signal, const FactorizeConfig& config) {
    TopologyStage st;
    st.offsets = config.offsets ? OffsetSet(*config.offsets) : default_offsets(signal);
    st.cloud = delay_embed(signal, st.offsets);
    const std::size_t count = std::min(std::max<std::size_t>(config.landmarks, 1), st.cloud.size());
    st.landmarks = maxmin_landmarks(st.cloud, count, config.landmark_seed);
    const auto dist = DistanceMatrix::from_cloud(st.cloud, st.landmarks);
    const double rmax = config.rmax ? *config.rmax : config.rmax_fraction * dist.diameter();
    st.filtration = rips_filtration(dist, rmax, 2);
    st.barcode = compute_persistence(st.filtration, config.prime);
    return st;
}

double codomain_spread(const SampledSignal& s) {
    double spread = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto a = s.value(i);
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            const auto b = s.value(j);
            double acc = 0.0;
            for (std::size_t c = 0; c < a.size(); ++c) {
                const double d = s.kind() == CodomainKind::Circle ? wrap_half(a[c] - b[c]) : a[c] - b[c];
                acc += d * d;
            }
            spread = std::max(spread, acc);
        }
    }
    return std::sqrt(spread);
}

double point_threshold(const SampledSignal& s, const FactorizeConfig& config) {
    if (config.eps_const) return *config.eps_const;
    double mag = 0.0;
    if (s.kind() == CodomainKind::Circle) {
        mag = 1.0;
    } else {
        for (std::size_t i = 0; i < s.size(); ++i) {
            double acc = 0.0;
            for (double v : s.value(i)) acc += v * v;
            mag = std::max(mag, std::sqrt(acc));
        }
    }
    return 1e-9 * (1.0 + mag);
}

PhaseClass classify(const SampledSignal& signal, const Barcode& barcode, const FactorizeConfig& config) {
    if (codomain_spread(signal) < point_threshold(signal, config)) return PhaseClass::Point;
    if (auto d = dominant_h1(barcode); d && bar_ratio(barcode.h1[*d]) >= config.tau) return PhaseClass::Circle;
    // a weaker bar that still clears tau leaves the class undecided
    const bool any_circle = std::any_of(barcode.h1.begin(), barcode.h1.end(),
                                        [&](const Bar& b) { return bar_ratio(b) >= config.tau; });
    const auto components = std::count_if(barcode.h0.begin(), barcode.h0.end(),
                                          [](const Bar& b) { return b.infinite(); });
    return !any_circle && components == 1 ? PhaseClass::Interval : PhaseClass::Unknown;
}

PhaseMap build_phase_map(const SampledSignal& signal, const FactorizeConfig& config) {
    if (codomain_spread(signal) < point_threshold(signal, config))
        fail(ErrorKind::InvalidArgument, "constant signal has no circular phase");
    return build_phase_map(signal, analyze_topology(signal, config), config);
}

PhaseMap build_phase_map(const SampledSignal& signal, const TopologyStage& stage,
                         const FactorizeConfig& config) {
    const PhaseClass cls = classify(signal, stage.barcode, config);
    if (cls != PhaseClass::Circle)
        fail(ErrorKind::InvalidArgument,
             "phase map needs a circle-class signal, got " + std::string(phase_class_name(cls)));

    PhaseMap pm;
    if (config.cocycle_index) {
        require(*config.cocycle_index < stage.barcode.h1.size(), "cocycle index out of range");
        pm.bar_index = *config.cocycle_index;
    } else {
        pm.bar_index = *dominant_h1(stage.barcode);
    }
    pm.bar = stage.barcode.h1[pm.bar_index];
    // The class lives on every complex inside the bar; a thin graph just above birth keeps
    // long chords from flattening the coordinate.
    require(config.smoothing_factor >= 1.0, "smoothing_factor must be at least 1");
    const double scale = std::min(pm.bar.cocycle.scale, config.smoothing_factor * pm.bar.birth);
    const IntegerCocycle lifted = lift_to_integers(pm.bar.cocycle, config.prime, stage.filtration);

    // Graph of all edges at the working scale, carrying the lifted cocycle.
    const std::size_t nv = stage.filtration.vertex_count;
    std::vector<OrientedEdge> edges;
    std::vector<double> z;
    {
        std::vector<std::pair<std::uint64_t, std::int64_t>> sorted;
        for (std::size_t k = 0; k < lifted.edges.size(); ++k)
            sorted.emplace_back((static_cast<std::uint64_t>(lifted.edges[k].from) << 32) | lifted.edges[k].to,
                                lifted.values[k]);
        std::sort(sorted.begin(), sorted.end());
        for (const auto& s : stage.filtration.simplices) {
            if (s.dim != 1 || s.diameter > scale) continue;
            const std::uint64_t key = (static_cast<std::uint64_t>(s.vertices[0]) << 32) | s.vertices[1];
            auto it = std::lower_bound(sorted.begin(), sorted.end(), std::make_pair(key, std::int64_t{0}),
                                       [](const auto& a, const auto& b) { return a.first < b.first; });
            edges.push_back({s.vertices[0], s.vertices[1]});
            z.push_back(it != sorted.end() && it->first == key ? static_cast<double>(it->second) : 0.0);
        }
    }

    // Smooth each connected component with its lowest vertex as anchor.
    std::vector<double> f(nv, 0.0);
    const auto comp = graph_components(edges, nv);
    const std::size_t ncomp = nv == 0 ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
    for (std::size_t c = 0; c < ncomp; ++c) {
        std::vector<std::uint32_t> local(nv, std::numeric_limits<std::uint32_t>::max());
        std::vector<std::size_t> members;
        for (std::size_t v = 0; v < nv; ++v)
            if (comp[v] == c) {
                local[v] = static_cast<std::uint32_t>(members.size());
                members.push_back(v);
            }
        std::vector<OrientedEdge> ce;
        std::vector<double> cz;
        for (std::size_t k = 0; k < edges.size(); ++k)
            if (comp[edges[k].from] == c) {
                ce.push_back({local[edges[k].from], local[edges[k].to]});
                cz.push_back(z[k]);
            }
        const SmoothResult sr = harmonic_smooth(ce, cz, members.size());
        for (std::size_t i = 0; i < members.size(); ++i) f[members[i]] = sr.f[i];
        pm.solver_iterations += sr.iterations;
        pm.normal_residual = std::max(pm.normal_residual, sr.normal_residual);
    }

    const auto vertex_of = nearest_landmarks(stage.cloud, stage.landmarks, scale);
    pm.phase = assign_phase(f, vertex_of, scale, Gauge{0, 1});
    if (winding(pm.phase.theta) < 0.0) {
        for (double& v : f) v = -v;
        pm.phase = assign_phase(f, vertex_of, scale, Gauge{0, -1});
    }
    pm.samples = stage.cloud.source_index;

    const std::size_t last = pm.samples.back();
    if (config.extend_tail && last + 1 < signal.size()) {
        // Samples past the last full delay window copy the phase of the embedded sample
        // whose backward delay vector is closest.
        std::optional<PointCloud> back;
        try {
            back = delay_embed_backward(signal, stage.offsets);
        } catch (const Error&) {
        }
        std::vector<std::size_t> row_of(signal.size(), signal.size());
        if (back)
            for (std::size_t r = 0; r < back->size(); ++r) row_of[back->source_index[r]] = r;
        std::vector<std::pair<std::size_t, double>> candidates;  // backward row, phase
        for (std::size_t k = 0; k < pm.samples.size(); ++k)
            if (row_of[pm.samples[k]] != signal.size())
                candidates.emplace_back(row_of[pm.samples[k]], pm.phase.theta[k]);
        for (std::size_t i = last + 1; i < signal.size() && !candidates.empty(); ++i) {
            if (row_of[i] == signal.size()) break;
            const auto q = back->point(row_of[i]);
            double best = std::numeric_limits<double>::infinity(), theta = 0.0;
            for (const auto& [r, th] : candidates) {
                const double d = distance(q, back->point(r));
                if (d < best) {
                    best = d;
                    theta = th;
                }
            }
            pm.phase.theta.push_back(theta);
            pm.samples.push_back(i);
            ++pm.continued;
        }
    }
    pm.winding = winding(pm.phase.theta);
    return pm;
}

Factorization factorize(const SampledSignal& signal, const FactorizeConfig& config,
                        FactorizeTrace* trace) {
    require(config.bins >= 1, "bins must be positive");
    require(config.tau > 0.0, "tau must be positive");
    Factorization fz;
    const bool circle_values = signal.kind() == CodomainKind::Circle;
    const double tol_phase = config.tol_phase.value_or(1.0 / (4.0 * static_cast<double>(config.bins)));
    const double tol_domain = config.tol_domain.value_or(3.0 * signal.step());

    if (codomain_spread(signal) < point_threshold(signal, config)) {
        fz.phase_class = PhaseClass::Point;
        fz.samples = all_samples(signal.size());
        fz.theta.assign(signal.size(), 0.0);
        fz.u_model = build_U(fz.theta, signal.values(), signal.dim(), 1, circle_values, true);
        const auto r = residual(signal, fz.u_model, fz.theta, fz.samples);
        fz.residual_rms = r.rms;
        fz.residual_sup = r.sup;
        return fz;
    }

    TopologyStage local_stage;
    if (trace) trace->stage = analyze_topology(signal, config);
    else local_stage = analyze_topology(signal, config);
    const TopologyStage& stage = trace ? *trace->stage : local_stage;
    fz.offsets = stage.offsets.offsets();
    fz.landmark_count = stage.landmarks.size();
    fz.rmax = stage.filtration.rmax;
    fz.h1_bars = stage.barcode.h1.size();
    double best_ratio = 0.0;
    if (auto d = dominant_h1(stage.barcode)) {
        Bar summary = stage.barcode.h1[*d];
        summary.cocycle = {};
        best_ratio = bar_ratio(summary);
        fz.dominant_bar = summary;
    }
    fz.phase_class = classify(signal, stage.barcode, config);

    if (fz.phase_class == PhaseClass::Circle) {
        PhaseMap pm = build_phase_map(signal, stage, config);
        if (trace) trace->phase_bar = pm.bar;
        fz.samples = std::move(pm.samples);
        fz.theta = std::move(pm.phase.theta);
        fz.gauge = pm.phase.gauge;
        fz.scale = pm.phase.scale;
        fz.winding = pm.winding;
        fz.continued_samples = pm.continued;
        fz.solver_iterations = pm.solver_iterations;
        fz.normal_residual = pm.normal_residual;
        fz.u_model = build_U(fz.theta, gather_values(signal, fz.samples), signal.dim(), config.bins,
                             circle_values, true);
        const double span = signal.x(fz.samples.back()) - signal.x(fz.samples.front());
        if (std::abs(fz.winding) > 0.5) {
            fz.period_estimate = estimate_period(span, fz.winding);
            if (*fz.period_estimate <= span) {
                std::vector<double> xs;
                for (std::size_t i : fz.samples) xs.push_back(signal.x(i));
                fz.injectivity = injectivity_windows(fz.theta, xs, *fz.period_estimate, tol_phase, tol_domain);
            }
        }
    } else {
        // Non-circular phase: the normalised domain position, an interval phase.
        fz.samples = all_samples(signal.size());
        const double x0 = signal.x(0), span = signal.span_length();
        const double below_one = std::nextafter(1.0, 0.0);
        for (std::size_t i = 0; i < signal.size(); ++i)
            fz.theta.push_back(span > 0.0 ? std::min((signal.x(i) - x0) / span, below_one) : 0.0);
        fz.u_model = build_U(fz.theta, signal.values(), signal.dim(), config.bins, circle_values, false);
        std::ostringstream msg;
        if (fz.phase_class == PhaseClass::Interval &&
            revisits_values(signal, tol_phase * codomain_spread(signal), tol_domain)) {
            msg << "interval phase space: u repeats values at separated points and ";
            if (fz.h1_bars == 0)
                msg << "no H1 bar was found";
            else
                msg << "the strongest H1 bar has death/birth ratio " << best_ratio << " < tau = " << config.tau;
            msg << "; the real line is the phase space here and the factorization is not certified universal"
                   " (a circle-valued phase may still exist)";
            fz.warnings.push_back(msg.str());
        } else if (fz.phase_class == PhaseClass::Unknown) {
            msg << "unknown phase class: no H1 bar reaches tau = " << config.tau
                << " and the delay cloud is disconnected at rmax = " << fz.rmax;
            fz.warnings.push_back(msg.str());
        }
    }
    const auto r = residual(signal, fz.u_model, fz.theta, fz.samples);
    fz.residual_rms = r.rms;
    fz.residual_sup = r.sup;
    return fz;
}

}  // namespace qpf
