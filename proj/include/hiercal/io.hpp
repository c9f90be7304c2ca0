#pragma once

#include <filesystem>
#include <string>

#include "hiercal/gp.hpp"
#include "hiercal/hier.hpp"
#include "hiercal/mcmc.hpp"
#include "hiercal/metrics.hpp"
#include "hiercal/testbed.hpp"

namespace hiercal::io {

// Full double precision, '.' decimal separator.
std::string format_double(double v);

// CSV columns x1..xs, y_obs, y_true_1..y_true_T plus a JSON sidecar
// (same stem, .json) with the generation metadata.
void write_observations(const std::filesystem::path& csv_path, const ObservationSet& obs);
ObservationSet read_observations(const std::filesystem::path& csv_path);

// One row per retained sample, final column the log-density.
void write_chain_csv(const std::filesystem::path& path, const Chain& chain);

// All surrogates of a set in one JSON document (inputs, targets, kernel
// parameters); Cholesky factors are rebuilt on load.
void write_surrogates(const std::filesystem::path& path, const SurrogateSet& set);
SurrogateSet read_surrogates(const std::filesystem::path& path);

// Long-format per-point rows: method, j, t, mean, std, truth, p_hat.
void write_loo_report_csv(const std::filesystem::path& path, const LooReport& report);
// Aggregates: rmsre and 0.9-quantile interval probability per output.
void write_loo_summary_json(const std::filesystem::path& path, const LooReport& report);
LooReport read_loo_summary_json(const std::filesystem::path& path);

void write_map_trace_json(const std::filesystem::path& path, const MapResult& map);
Eigen::VectorXd read_map_alpha_star(const std::filesystem::path& path);

void write_ensemble_weights_csv(const std::filesystem::path& path, const PosteriorEnsemble& ens);

}  // namespace hiercal::io
