#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpfactor/factorize.hpp"
#include "qpfactor/persistence.hpp"
#include "qpfactor/universality.hpp"

namespace qpf {

using Json = nlohmann::ordered_json;

/// Infinite values are written as the string "inf".
Json number_or_inf(double v);

Json factorization_json(const SampledSignal& signal, const Factorization& fz, const Json& config_echo);
Json diagnostics_json(const Factorization& fz);

struct WitnessPair {
    std::string direction;  // "1->2" or "2->1"
    double x1 = 0.0, x2 = 0.0;
};

Json join_json(const QuotientPartition& q, std::size_t bins, const std::vector<WitnessPair>& witnesses,
               const Json& config_echo);

void write_json(const Json& j, const std::filesystem::path& path);

struct PhaseSeries {
    std::vector<double> x;
    std::vector<double> theta;
};

/// `x,theta` rows, header line included.
void save_phase_csv(const std::filesystem::path& path, const PhaseSeries& series);
PhaseSeries load_phase_csv(const std::filesystem::path& path);

PhaseSeries phase_series(const SampledSignal& signal, const Factorization& fz);

/// `bin,center,value[,value...]`
void save_u_bins_csv(const std::filesystem::path& path, const UModel& model);

}  // namespace qpf
