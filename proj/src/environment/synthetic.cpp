// Copyright 2026 The PyroGrid Authors
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

#include "pyrogrid/environment/synthetic.hpp"

#include <algorithm>

#include "pyrogrid/error.hpp"

namespace pyrogrid::environment {
namespace {

constexpr double kTwoPi = 6.283185307179586;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::vector<WorldState> init_world(std::size_t agents, std::size_t height, std::size_t width,
                                   const GeneratorParams& params, Rng& rng) {
  if (agents == 0 || height < 2 || width < 2) throw ConfigError("world needs >= 1 agent and >= 2x2 cells");
  std::vector<WorldState> out(agents);
  for (WorldState& w : out) {
    w.dryness = Tensor({height, width});
    w.fuel = Tensor::filled({height, width}, 1.0);
    w.fire = Tensor({height, width});
    w.bias = Tensor({height, width});
    const double px = rng.uniform(0.0, kTwoPi), py = rng.uniform(0.0, kTwoPi);
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) {
        w.bias.at(y, x) = params.spatial_bias * numerics::portable::sin(kTwoPi * double(x) / double(width) + px) *
                          numerics::portable::cos(kTwoPi * double(y) / double(height) + py);
        w.dryness.at(y, x) = clamp01(0.5 + w.bias.at(y, x));
      }
  }
  return out;
}

std::vector<Tensor> synth_step(std::vector<WorldState>& states, const GeneratorParams& p, Rng& rng) {
  namespace pm = numerics::portable;
  const std::size_t n = states.size();
  const std::size_t h = states.front().fire.dim(0), w = states.front().fire.dim(1);
  std::vector<Tensor> prev_fire;
  prev_fire.reserve(n);
  for (const WorldState& s : states) prev_fire.push_back(s.fire);

  std::vector<Tensor> frames;
  frames.reserve(n);
  for (std::size_t a = 0; a < n; ++a) {
    WorldState& st = states[a];
    const Tensor& fire0 = prev_fire[a];
    const double day = static_cast<double>(st.day);
    const double season = pm::sin(kTwoPi * day / p.season_days);

    const double rain_p = clamp01(p.rain_chance * (1.0 - season));
    const double u_rain = rng.uniform(), u_amount = rng.uniform();
    const double rain = u_rain < rain_p ? -p.rain_mean_mm * pm::log(1.0 - u_amount) : 0.0;
    st.synoptic = 0.9 * st.synoptic + 0.3 * rng.normal();

    // Fire spreads from yesterday's state of this agent and its neighbours.
    Tensor fire({h, w});
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double u = rng.uniform();
        if (p.decorrelated) {
          fire.at(y, x) = u < p.decorrelated_rate ? 1.0 : 0.0;
          continue;
        }
        const double fuel = st.fuel.at(y, x);
        if (fire0.at(y, x) > 0.0) {
          fire.at(y, x) = u < p.persistence * fuel ? 1.0 : 0.0;
          continue;
        }
        double nb = 0.0;
        if (y > 0) nb += fire0.at(y - 1, x);
        if (y + 1 < h) nb += fire0.at(y + 1, x);
        if (x > 0) nb += fire0.at(y, x - 1);
        if (x + 1 < w) nb += fire0.at(y, x + 1);
        double edge = 0.0;
        if (x == 0 && a > 0) edge += prev_fire[a - 1].at(y, w - 1);
        if (x + 1 == w && a + 1 < n) edge += prev_fire[a + 1].at(y, 0);
        const double z = p.k_dry * st.dryness.at(y, x) + p.k_neighbor * nb + p.k_coupling * edge - p.k_bias;
        fire.at(y, x) = u < fuel * pm::sigmoid(z) ? 1.0 : 0.0;
      }

    Tensor dry({h, w});
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double d = st.dryness.at(y, x);
        const double lap = st.dryness.at(y > 0 ? y - 1 : y, x) + st.dryness.at(y + 1 < h ? y + 1 : y, x) +
                           st.dryness.at(y, x > 0 ? x - 1 : x) + st.dryness.at(y, x + 1 < w ? x + 1 : x) - 4.0 * d;
        const double target = 0.5 + p.season_amplitude * season + st.bias.at(y, x);
        dry.at(y, x) = clamp01(d + p.dry_relax * (target - d) + p.diffusion * lap + p.dry_noise * rng.normal() -
                               p.rain_drying * rain);
      }

    for (std::size_t i = 0; i < h * w; ++i) {
      double f = st.fuel[i] - p.burn_rate * fire[i];
      f += p.regrowth * (1.0 - f);
      st.fuel[i] = clamp01(f);
    }
    st.fire = fire;
    st.dryness = dry;
    ++st.day;

    // Raw observation frame.
    Tensor frame({kRawChannels, h, w});
    const double wind_phase = kTwoPi * day / 9.3;
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double d = dry.at(y, x);
        auto noise = [&](double scale) { return scale * (rng.uniform() - 0.5); };
        const double t_mean = 288.0 + 10.0 * season + 8.0 * (d - 0.5) + noise(2.0);
        frame.at(0, y, x) = fire.at(y, x) > 0.0 ? rng.uniform(0.3, 1.0) : 0.0;
        frame.at(1, y, x) = t_mean;
        frame.at(2, y, x) = t_mean - 6.0 - 4.0 * d + noise(1.0);
        frame.at(3, y, x) = t_mean + 6.0 + 4.0 * d + noise(1.0);
        frame.at(4, y, x) = t_mean - 3.0 - 14.0 * d + noise(1.5);
        frame.at(5, y, x) = rain * (0.7 + 0.6 * rng.uniform());
        frame.at(6, y, x) = 95000.0 + 400.0 * st.synoptic - 150.0 * d + noise(60.0);
        frame.at(7, y, x) = 101300.0 + 400.0 * st.synoptic + noise(60.0);
        frame.at(8, y, x) = 3.0 + 2.0 * pm::cos(wind_phase) + 1.5 * st.synoptic + noise(1.0);
        frame.at(9, y, x) = 1.5 * pm::sin(wind_phase) - 1.0 * st.synoptic + noise(1.0);
        frame.at(10, y, x) = 85.0 - 55.0 * d + noise(6.0);
      }
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace pyrogrid::environment
