#pragma once

#include <string>
#include <vector>

#include "splitree/constants.hpp"
#include "splitree/experiments.hpp"
#include "splitree/fixpoint.hpp"
#include "splitree/renewal.hpp"

namespace splitree {

// CSV files use a header row, '.' decimal separator, one record per line.
void write_csv_column(const std::string& path, const std::string& header,
                      const std::vector<double>& values);

std::string constants_to_json(const ModelSpec& model, const ConstantsReport& rep);
std::string fixpoint_to_json(const FixpointRun& run);
std::string experiment_to_json(const ExperimentResult& result);

void write_text_file(const std::string& path, const std::string& content);

void write_renewal_csv(const std::string& path, const RenewalTable& table);
void write_overshoot_csv(const std::string& path, const OvershootHistogram& hist);

// Writes <out>/result.json plus one Xn CSV per n (file naming embeds model,
// n and seed); also echoes the resolved config to <out>/config.json.
void persist_experiment(const ExperimentResult& result);

// Flat-JSON config file with the ExperimentConfig fields; missing fields keep
// the defaults passed in.
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig defaults);
std::string config_to_json(const ExperimentConfig& config);

}  // namespace splitree
