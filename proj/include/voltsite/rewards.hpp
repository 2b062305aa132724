#pragma once

#include <algorithm>
#include <stdexcept>

namespace voltsite {

// Component weights and scales of the hybrid reward. Equal weights of 10
// keep the total in [0, 40].
struct RewardWeights {
  double w_pop = 10.0;
  double w_exist = 10.0;
  double w_sub = 10.0;
  double w_wait = 10.0;
  double d_min_km = 1.0;                  // clustering threshold for r_exist
  double tau_scale = 10.0;                // scaling factor in r_wait
  double neighborhood_radius_km = 2.0;    // radius for n_stations and local t_avg
};

// r_exist has two readings: the piecewise one the text describes (zero below
// d_min, otherwise W - d) and the literal formula max(0, W - d - d_min).
enum class ExistRewardForm { prose, formula };

struct RewardBreakdown {
  double pop = 0.0;
  double exist = 0.0;
  double sub = 0.0;
  double wait = 0.0;

  double total() const { return pop + exist + sub + wait; }
};

inline double reward_pop(double rho, double rho_max, const RewardWeights& w) {
  if (!(rho_max > 0.0)) throw std::invalid_argument("reward_pop: rho_max must be > 0");
  return (rho / rho_max) * w.w_pop;
}

inline double reward_exist(double d_nearest_km, const RewardWeights& w,
                           ExistRewardForm form = ExistRewardForm::prose) {
  if (form == ExistRewardForm::formula)
    return std::max(0.0, w.w_exist - d_nearest_km - w.d_min_km);
  if (d_nearest_km < w.d_min_km) return 0.0;
  return std::max(0.0, w.w_exist - d_nearest_km);
}

inline double reward_sub(double d_sub_km, const RewardWeights& w) {
  return std::max(0.0, w.w_sub - d_sub_km);
}

inline double reward_wait(double t_avg_hours, const RewardWeights& w) {
  if (t_avg_hours > 0.0) return std::min(w.w_wait, w.tau_scale / t_avg_hours);
  return w.w_wait;
}

}  // namespace voltsite
