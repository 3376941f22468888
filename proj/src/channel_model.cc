// Copyright 2026 The feelsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "feelsim/channel_model.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace feel {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

void RequirePositive(double value, const char* what) {
  if (!(value > 0.0)) {
    throw std::domain_error(std::string(what) + " must be strictly positive");
  }
}

}  // namespace

double DbmToWatts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double PathLossDb(double distance_km, double min_distance_km) {
  if (!(distance_km > 0.0) || distance_km < min_distance_km) {
    throw std::domain_error("distance " + std::to_string(distance_km) +
                            " km is below the minimum of " +
                            std::to_string(min_distance_km) + " km");
  }
  return 148.1 + 37.6 * std::log10(distance_km);
}

RadioGeometry RadioGeometry::FromDistance(double distance_km,
                                          const RadioParams& params) {
  RadioGeometry g;
  g.distance_km = distance_km;
  g.path_loss_db = PathLossDb(distance_km, params.min_distance_km);
  g.gain_std = std::sqrt(std::pow(10.0, -g.path_loss_db / 10.0));
  g.tx_power_ps_watts = DbmToWatts(params.tx_power_ps_dbm);
  g.tx_power_client_watts = DbmToWatts(params.tx_power_client_dbm);
  g.noise_ps_watts = params.noise_ps_watts;
  g.noise_client_watts = params.noise_client_watts;
  RequirePositive(g.noise_ps_watts, "noise_ps_watts");
  RequirePositive(g.noise_client_watts, "noise_client_watts");
  RequirePositive(g.tx_power_ps_watts, "tx_power_ps_watts");
  RequirePositive(g.tx_power_client_watts, "tx_power_client_watts");
  return g;
}

double RadioGeometry::MeanSnr(Direction direction) const {
  return TxPower(direction) * gain_std * gain_std / Noise(direction);
}

double SampleFading(Rng& rng) {
  std::exponential_distribution<double> exp1(1.0);
  return exp1(rng);
}

double SpectralEfficiency(double snr) {
  if (snr < 0.0 || std::isnan(snr)) {
    throw std::domain_error("snr must be nonnegative");
  }
  return std::log2(1.0 + snr);
}

double InstantaneousRate(const RadioGeometry& geom, Direction direction,
                         double fading_power, double bandwidth_hz) {
  if (fading_power < 0.0) {
    throw std::domain_error("fading power must be nonnegative");
  }
  RequirePositive(bandwidth_hz, "bandwidth_hz");
  return bandwidth_hz * SpectralEfficiency(geom.MeanSnr(direction) *
                                           fading_power);
}

LinkRates SampleLinkRates(const RadioGeometry& geom, double bandwidth_hz,
                          Rng& rng) {
  LinkRates r;
  r.bandwidth_hz = bandwidth_hz;
  r.dl_fading_power = SampleFading(rng);
  r.ul_fading_power = SampleFading(rng);
  r.dl_rate_bps = InstantaneousRate(geom, Direction::kDownlink,
                                    r.dl_fading_power, bandwidth_hz);
  r.ul_rate_bps = InstantaneousRate(geom, Direction::kUplink,
                                    r.ul_fading_power, bandwidth_hz);
  return r;
}

double ScaledExponentialIntegralE1(double x) {
  RequirePositive(x, "exponential integral argument");
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 1000;
  if (x <= 1.0) {
    // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < kMaxIter; ++k) {
      term *= -x / k;
      double contrib = term / k;
      sum += contrib;
      if (std::abs(contrib) < kEps * std::abs(sum)) break;
    }
    return std::exp(x) * (-kEulerGamma - std::log(x) - sum);
  }
  // Modified Lentz on E1(x) = e^-x / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...))).
  const double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    double delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

double ErgodicRate(double snr_mean, double bandwidth_hz) {
  if (!(snr_mean > 0.0)) {
    throw std::domain_error("mean snr must be strictly positive");
  }
  RequirePositive(bandwidth_hz, "bandwidth_hz");
  return bandwidth_hz * ScaledExponentialIntegralE1(1.0 / snr_mean) /
         std::numbers::ln2;
}

double LongTermAverageRate(const RadioGeometry& geom, Direction direction,
                           double bandwidth_hz) {
  return ErgodicRate(geom.MeanSnr(direction), bandwidth_hz);
}

double SampleDistanceKm(const RadioParams& params, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double r = params.region_radius_km * std::sqrt(unif(rng));
  return r < params.min_distance_km ? params.min_distance_km : r;
}

}  // namespace feel
