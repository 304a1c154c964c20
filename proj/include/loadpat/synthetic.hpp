#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "loadpat/ingest.hpp"

namespace loadpat {

struct SynthOptions {
  std::uint64_t seed = 1;
  int n_consumers = 200;
  int n_days = 60;
  int decoys = 4;
  double noise = 0.05;                // std-dev of per-hour noise on the normalized shape
  double incomplete_day_rate = 0.0;   // fraction of days missing one 5-minute sample
  std::string start_date = "2017-01-02";
  std::vector<HourlyValues> templates;  // empty => default_templates(3)
};

struct SynthTruth {
  std::vector<HourlyValues> templates;
  std::vector<std::string> informative;
  std::vector<std::string> decoys;
  std::map<std::string, std::vector<double>> mixtures;  // per consumer, over templates
};

/// Distinct, well separated daily shapes scaled to [0,1].
std::vector<HourlyValues> default_templates(int count);

/// Writes a 5-minute load table and a raw household metadata table. Each
/// consumer's template mixture depends only on the two informative features
/// ("occupancy", "education"); decoy attributes are drawn independently.
SynthTruth make_synthetic_fixture(const SynthOptions& opts, std::ostream& loads, std::ostream& metadata);

}  // namespace loadpat
