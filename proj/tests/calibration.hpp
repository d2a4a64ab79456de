#pragma once

// Rejection rates of each diagnostic under its null and alternative DGPs.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dgp.hpp"
#include "tradenet/econometrics.hpp"

namespace calibration {

struct Rates {
  std::string name;
  double size = 0.0;   // rejection rate under the null
  double power = 0.0;  // rejection rate under the alternative
};

inline tradenet::RegressionSpec spec(std::vector<std::string> xs) {
  tradenet::RegressionSpec s;
  s.dependent = "y";
  s.regressors = std::move(xs);
  s.covariance = tradenet::CovarianceType::conventional;
  return s;
}

/// Fraction of seeds whose p-value falls below alpha.
inline double rejection_rate(int seeds, std::uint64_t base, double alpha,
                             const std::function<double(std::mt19937_64&)>& p_value) {
  int rejected = 0;
  for (int s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(base + static_cast<std::uint64_t>(s));
    rejected += p_value(rng) < alpha;
  }
  return static_cast<double>(rejected) / seeds;
}

inline Rates hausman(int seeds, std::uint64_t base) {
  auto run = [](double loading) {
    return [loading](std::mt19937_64& rng) {
      dgp::StaticOptions o;
      o.n = 50;
      o.effect_in_x = loading;
      const auto p = dgp::static_panel(rng, o);
      const auto fe = tradenet::fixed_effects_within(p, spec({"x", "w"}));
      const auto re = tradenet::random_effects_gls(p, spec({"x", "w"}));
      return tradenet::hausman_test(fe, re).p_value;
    };
  };
  return {"hausman", rejection_rate(seeds, base, 0.05, run(0.0)), rejection_rate(seeds, base, 0.05, run(1.0))};
}

inline Rates breusch_pagan(int seeds, std::uint64_t base) {
  auto run = [](double unit_sd) {
    return [unit_sd](std::mt19937_64& rng) {
      dgp::StaticOptions o;
      o.n = 50;
      o.unit_sd = unit_sd;
      return tradenet::breusch_pagan_lm(tradenet::pooled_ols(dgp::static_panel(rng, o), spec({"x", "w"}))).p_value;
    };
  };
  return {"breusch_pagan_lm", rejection_rate(seeds, base, 0.05, run(0.0)),
          rejection_rate(seeds, base, 0.01, run(1.0))};
}

inline Rates heteroskedasticity(int seeds, std::uint64_t base) {
  auto run = [](bool hetero) {
    return [hetero](std::mt19937_64& rng) {
      dgp::StaticOptions o;
      o.n = 50;
      o.unit_sd = 0.0;
      o.heteroskedastic = hetero;
      o.x_mean = 2.0;  // keeps the variance monotone in x
      return tradenet::heteroskedasticity_test(tradenet::pooled_ols(dgp::static_panel(rng, o), spec({"x", "w"})))
          .p_value;
    };
  };
  return {"heteroskedasticity", rejection_rate(seeds, base, 0.05, run(false)),
          rejection_rate(seeds, base, 0.05, run(true))};
}

inline Rates breusch_godfrey(int seeds, std::uint64_t base) {
  auto run = [](double rho) {
    return [rho](std::mt19937_64& rng) {
      dgp::StaticOptions o;
      o.n = 50;
      o.unit_sd = 0.0;
      o.error_rho = rho;
      return tradenet::breusch_godfrey(tradenet::pooled_ols(dgp::static_panel(rng, o), spec({"x", "w"})), 1)
          .p_value;
    };
  };
  return {"breusch_godfrey", rejection_rate(seeds, base, 0.05, run(0.0)),
          rejection_rate(seeds, base, 0.05, run(0.8))};
}

inline Rates durbin_wu_hausman(int seeds, std::uint64_t base) {
  auto run = [](double rho) {
    return [rho](std::mt19937_64& rng) {
      const auto p = dgp::endogeneity_panel(rng, 50, 4, rho);
      return tradenet::durbin_wu_hausman(p, spec({"x", "w"}), "x", {"z"}).p_value;
    };
  };
  return {"durbin_wu_hausman", rejection_rate(seeds, base, 0.05, run(0.0)),
          rejection_rate(seeds, base, 0.05, run(0.5))};
}

inline std::vector<Rates> all(int seeds, std::uint64_t base) {
  return {hausman(seeds, base), breusch_pagan(seeds, base), heteroskedasticity(seeds, base),
          breusch_godfrey(seeds, base), durbin_wu_hausman(seeds, base)};
}

}  // namespace calibration
