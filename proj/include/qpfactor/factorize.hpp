#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qpfactor/circular.hpp"
#include "qpfactor/embedding.hpp"
#include "qpfactor/persistence.hpp"
#include "qpfactor/signal.hpp"

namespace qpf {

enum class PhaseClass { Point, Interval, Circle, Unknown };

std::string_view phase_class_name(PhaseClass c);

struct FactorizeConfig {
    std::optional<std::vector<double>> offsets;  // domain units; default_offsets() when empty
    std::size_t landmarks = 200;                 // capped at the cloud size
    std::size_t landmark_seed = 0;
    std::optional<double> rmax;                  // absolute truncation radius
    double rmax_fraction = 0.5;                  // of the landmark cloud diameter, when rmax unset
    int prime = 47;
    std::size_t bins = 64;
    double tau = 3.0;                            // death/birth ratio for a circular phase
    std::optional<double> eps_const;             // default 1e-9 (1 + max |u|)
    std::optional<double> tol_phase;             // default 1 / (4 bins)
    std::optional<double> tol_domain;            // default 3 grid steps
    std::optional<std::size_t> cocycle_index;    // overrides the dominant H1 bar
    double smoothing_factor = 2.0;               // smoothing graph radius, in units of the bar's birth
    bool extend_tail = true;                     // phase for samples past the last delay window
};

/// Binned model of U: one mean codomain value per phase bin [b/B, (b+1)/B).
struct UModel {
    std::size_t bins = 1;
    std::size_t dim = 1;
    bool circular_values = false;  // codomain is R/Z
    bool periodic_phase = true;    // false for interval phases: evaluation clamps at the ends
    std::vector<double> values;    // bins * dim
    std::vector<std::size_t> counts;

    std::span<const double> bin(std::size_t b) const { return {values.data() + b * dim, dim}; }
    /// Linear interpolation between adjacent bin centres.
    std::vector<double> evaluate(double theta) const;
};

UModel build_U(const std::vector<double>& theta, std::span<const double> values, std::size_t dim,
               std::size_t bins, bool circular_values = false, bool periodic_phase = true);

struct Residual {
    double rms = 0.0;
    double sup = 0.0;
};

/// Pointwise error ||u_i - U(theta_i)|| for the given samples (all samples when `samples` is empty).
Residual residual(const SampledSignal& signal, const UModel& model, const std::vector<double>& theta,
                  const std::vector<std::size_t>& samples = {});

/// Sufficient certificate that U is injective at bin resolution: every pair of bin values
/// differs by more than tol in codomain norm.
bool u_injective_on_bins(const UModel& model, double tol);

/// T = span / |winding|; throws not-periodic when |winding| <= 1/2.
double estimate_period(double span, double winding);

struct InjectivityReport {
    bool pass = true;
    std::size_t violations = 0;
    std::vector<std::pair<std::size_t, std::size_t>> witnesses;  // first few offending pairs
};

/// Looks for pairs inside a window [x_i, x_i + T) that are more than tol_domain apart but
/// share a phase to within tol_phase. Throws invalid-argument when T exceeds the span.
InjectivityReport injectivity_windows(const std::vector<double>& theta, const std::vector<double>& x,
                                      double period, double tol_phase, double tol_domain,
                                      std::size_t max_witnesses = 16);

/// Embedding, landmarks, Rips filtration and barcode shared by classification and phase maps.
struct TopologyStage {
    OffsetSet offsets{std::vector<double>{1.0}};
    PointCloud cloud;
    std::vector<std::size_t> landmarks;  // cloud positions; landmark vertex v = landmarks[v]
    Filtration filtration;
    Barcode barcode;
};

TopologyStage analyze_topology(const SampledSignal& signal, const FactorizeConfig& config);

double codomain_spread(const SampledSignal& signal);
double point_threshold(const SampledSignal& signal, const FactorizeConfig& config);

PhaseClass classify(const SampledSignal& signal, const Barcode& barcode, const FactorizeConfig& config);

struct PhaseMap {
    PhaseAssignment phase;             // theta per entry of `samples`
    std::vector<std::size_t> samples;  // signal indices, increasing
    std::size_t continued = 0;         // trailing samples phased by continuation
    std::size_t bar_index = 0;
    Bar bar;
    double winding = 0.0;
    std::size_t solver_iterations = 0;
    double normal_residual = 0.0;
};

/// Full circular-coordinate pipeline. Throws invalid-argument unless the signal classifies as
/// Circle; propagates lift-failure and coverage-error.
PhaseMap build_phase_map(const SampledSignal& signal, const FactorizeConfig& config);
PhaseMap build_phase_map(const SampledSignal& signal, const TopologyStage& stage,
                         const FactorizeConfig& config);

struct Factorization {
    PhaseClass phase_class = PhaseClass::Unknown;
    std::vector<std::size_t> samples;
    std::vector<double> theta;
    Gauge gauge;
    double scale = 0.0;
    double winding = 0.0;
    std::optional<double> period_estimate;
    UModel u_model;
    double residual_rms = 0.0;
    double residual_sup = 0.0;
    std::optional<InjectivityReport> injectivity;
    std::vector<std::string> warnings;

    // diagnostics
    std::vector<double> offsets;
    std::size_t landmark_count = 0;
    double rmax = 0.0;
    std::optional<Bar> dominant_bar;  // cocycle omitted
    std::size_t h1_bars = 0;
    std::size_t continued_samples = 0;
    std::size_t solver_iterations = 0;
    double normal_residual = 0.0;
};

/// Intermediate products kept for export.
struct FactorizeTrace {
    std::optional<TopologyStage> stage;  // absent for Point signals
    std::optional<Bar> phase_bar;        // bar whose cocycle built the phase, Circle only
};

Factorization factorize(const SampledSignal& signal, const FactorizeConfig& config,
                        FactorizeTrace* trace = nullptr);

}  // namespace qpf
