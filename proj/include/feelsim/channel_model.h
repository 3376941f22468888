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

#ifndef FEELSIM_CHANNEL_MODEL_H_
#define FEELSIM_CHANNEL_MODEL_H_

#include <random>

namespace feel {

using Rng = std::mt19937_64;

enum class Direction { kDownlink, kUplink };

// Defaults reproduce the cell used in the evaluation setup: 500 m radius,
// 15 dBm at the server, 10 dBm at each client, 7.96e-14 W thermal noise.
struct RadioParams {
  double region_radius_km = 0.5;
  double min_distance_km = 0.001;
  double tx_power_ps_dbm = 15.0;
  double tx_power_client_dbm = 10.0;
  double noise_ps_watts = 7.96e-14;
  double noise_client_watts = 7.96e-14;
};

// Static link budget of one client.
struct RadioGeometry {
  double distance_km = 0.0;
  double path_loss_db = 0.0;
  double gain_std = 0.0;  // sqrt(10^(-PL/10))
  double tx_power_ps_watts = 0.0;
  double tx_power_client_watts = 0.0;
  double noise_ps_watts = 0.0;
  double noise_client_watts = 0.0;

  // Throws std::domain_error if distance is below params.min_distance_km or
  // any power or noise variance is not strictly positive.
  static RadioGeometry FromDistance(double distance_km,
                                    const RadioParams& params);

  double TxPower(Direction direction) const {
    return direction == Direction::kDownlink ? tx_power_ps_watts
                                             : tx_power_client_watts;
  }
  // Noise at the receiver: the client for downlink, the server for uplink.
  double Noise(Direction direction) const {
    return direction == Direction::kDownlink ? noise_client_watts
                                             : noise_ps_watts;
  }
  // tx * gain_std^2 / noise, the SNR at unit fading power.
  double MeanSnr(Direction direction) const;
};

// One round's channel realization for a client.
struct LinkRates {
  double dl_fading_power = 0.0;
  double ul_fading_power = 0.0;
  double dl_rate_bps = 0.0;
  double ul_rate_bps = 0.0;
  double bandwidth_hz = 0.0;
};

double DbmToWatts(double dbm);

// 148.1 + 37.6 log10(d). Throws std::domain_error below min_distance_km.
double PathLossDb(double distance_km, double min_distance_km = 0.001);

// |h|^2 of a unit-power Rayleigh coefficient, i.e. an Exp(1) draw.
double SampleFading(Rng& rng);

// log2(1 + snr). Throws std::domain_error for negative snr.
double SpectralEfficiency(double snr);

double InstantaneousRate(const RadioGeometry& geom, Direction direction,
                         double fading_power, double bandwidth_hz);

// Draws independent downlink and uplink fading and converts both to rates.
LinkRates SampleLinkRates(const RadioGeometry& geom, double bandwidth_hz,
                          Rng& rng);

// e^x E1(x) for x > 0, where E1 is the exponential integral. Power series
// for x <= 1, Lentz continued fraction otherwise; the scaled form stays
// finite for large x.
double ScaledExponentialIntegralE1(double x);

// W * E[log2(1 + snr_mean X)] with X ~ Exp(1), evaluated in closed form as
// W e^(1/snr) E1(1/snr) / ln 2. Throws std::domain_error for snr_mean <= 0.
double ErgodicRate(double snr_mean, double bandwidth_hz);

double LongTermAverageRate(const RadioGeometry& geom, Direction direction,
                           double bandwidth_hz);

// Area-uniform radius in the disk, clamped to min_distance_km.
double SampleDistanceKm(const RadioParams& params, Rng& rng);

}  // namespace feel

#endif  // FEELSIM_CHANNEL_MODEL_H_
