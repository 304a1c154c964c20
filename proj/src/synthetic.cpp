#include "loadpat/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "loadpat/error.hpp"
#include "loadpat/rng.hpp"

namespace loadpat {

namespace {

constexpr std::array<const char*, 3> kOccupancy = {"away_daytime", "home_daytime", "shift_work"};
constexpr std::array<const char*, 3> kEducation = {"bachelor", "graduate", "secondary"};
constexpr std::array<const char*, 2> kHeating = {"electric", "gas"};

double bump(double hour, double center, double width) {
  double d = std::abs(hour - center);
  d = std::min(d, 24.0 - d);
  return std::exp(-0.5 * (d / width) * (d / width));
}

}  // namespace

std::vector<HourlyValues> default_templates(int count) {
  std::vector<HourlyValues> out;
  for (int k = 0; k < count; ++k) {
    HourlyValues t{};
    for (int h = 0; h < 24; ++h) {
      double v = 0.0;
      switch (k % 4) {
        case 0: v = bump(h, 7.0, 1.5) + bump(h, 19.0, 2.0); break;  // morning + evening peaks
        case 1: v = bump(h, 13.0, 3.0); break;                        // midday plateau
        case 2: v = bump(h, 1.0, 2.5); break;                         // overnight
        case 3: v = bump(h, 10.0, 1.5) + 0.6 * bump(h, 22.0, 1.5); break;
      }
      // Further templates shift the base shapes around the clock.
      if (k >= 4) v = bump(h, 3.0 * k, 1.5);
      t[h] = v;
    }
    const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    const double l = *lo, s = *hi - *lo;
    for (auto& v : t) v = (v - l) / s;
    out.push_back(t);
  }
  return out;
}

SynthTruth make_synthetic_fixture(const SynthOptions& opts, std::ostream& loads, std::ostream& metadata) {
  auto start = parse_date(opts.start_date);
  if (!start) throw Error(ErrorCode::BadConfig, "bad synth start date '" + opts.start_date + "'");
  if (opts.n_consumers < 1 || opts.n_days < 1 || opts.noise < 0.0 || opts.decoys < 0)
    throw Error(ErrorCode::BadConfig, "synth sizes must be positive and noise non-negative");

  SynthTruth truth;
  truth.templates = opts.templates.empty() ? default_templates(3) : opts.templates;
  const auto n_templates = truth.templates.size();
  truth.informative = {"occupancy", "education"};
  const std::array<const char*, 4> decoy_names = {"age", "income", "square_footage", "heating"};
  for (int d = 0; d < opts.decoys; ++d)
    truth.decoys.push_back(d < 4 ? decoy_names[d] : "decoy_" + std::to_string(d + 1));

  Rng rng(derive_seed(opts.seed, "synth"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Additive effects of each informative level on each template's logit.
  constexpr double kEffect = 1.6;
  std::vector<std::vector<double>> occ_effect(kOccupancy.size(), std::vector<double>(n_templates));
  std::vector<std::vector<double>> edu_effect(kEducation.size(), std::vector<double>(n_templates));
  for (auto& row : occ_effect)
    for (auto& v : row) v = kEffect * gauss(rng);
  for (auto& row : edu_effect)
    for (auto& v : row) v = kEffect * gauss(rng);

  metadata << "consumer_id,occupancy,education";
  for (const auto& d : truth.decoys) metadata << ',' << d;
  metadata << '\n';
  loads << "consumer_id,timestamp,load_kw\n";

  char buf[96];
  for (int c = 0; c < opts.n_consumers; ++c) {
    std::snprintf(buf, sizeof(buf), "c%04d", c + 1);
    const std::string id = buf;
    const auto occ = static_cast<std::size_t>(unit(rng) * kOccupancy.size()) % kOccupancy.size();
    const auto edu = static_cast<std::size_t>(unit(rng) * kEducation.size()) % kEducation.size();

    metadata << id << ',' << kOccupancy[occ] << ',' << kEducation[edu];
    for (int d = 0; d < opts.decoys; ++d) {
      switch (d) {
        case 0: metadata << ',' << static_cast<int>(18 + unit(rng) * 70); break;
        case 1: std::snprintf(buf, sizeof(buf), ",%.0f", 1000.0 * std::round(20.0 + 180.0 * unit(rng))); metadata << buf; break;
        case 2: metadata << ',' << static_cast<int>(800 + unit(rng) * 3200); break;
        case 3: metadata << ',' << kHeating[unit(rng) < 0.5 ? 0 : 1]; break;
        default: metadata << ",level_" << static_cast<int>(unit(rng) * 3); break;
      }
    }
    metadata << '\n';

    std::vector<double> mixture(n_templates);
    double z = 0.0;
    for (std::size_t k = 0; k < n_templates; ++k) {
      mixture[k] = std::exp(occ_effect[occ][k] + edu_effect[edu][k]);
      z += mixture[k];
    }
    for (auto& m : mixture) m /= z;
    truth.mixtures[id] = mixture;

    const double scale = 0.5 + 2.5 * unit(rng);
    const double offset = 0.3 + 0.3 * unit(rng);
    for (int day = 0; day < opts.n_days; ++day) {
      const Date date{std::chrono::sys_days{*start} + std::chrono::days{day}};
      const std::string date_text = format_date(date);
      double u = unit(rng);
      std::size_t tpl = 0;
      while (tpl + 1 < n_templates && u >= mixture[tpl]) u -= mixture[tpl++];
      const int missing_slot = unit(rng) < opts.incomplete_day_rate ? static_cast<int>(unit(rng) * 288) : -1;
      for (int h = 0; h < 24; ++h) {
        const double shape = truth.templates[tpl][h] + opts.noise * gauss(rng);
        const double hourly = std::max(0.0, scale * (shape + offset));
        for (int s = 0; s < kSamplesPerHour; ++s) {
          if (h * kSamplesPerHour + s == missing_slot) continue;
          // Zero-mean within-hour ripple keeps the hourly mean at `hourly`.
          const double ripple = (s % 2 == 0 ? 1.0 : -1.0) * 0.02 * hourly;
          std::snprintf(buf, sizeof(buf), "%s,%sT%02d:%02d:00,%.6f\n", id.c_str(), date_text.c_str(), h, s * 5,
                        hourly + ripple);
          loads << buf;
        }
      }
    }
  }
  return truth;
}

}  // namespace loadpat
