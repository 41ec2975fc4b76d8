#include "sqglab/balance.hpp"

#include <cmath>

#include "sqglab/errors.hpp"

namespace sqg {

std::vector<double> cumulative_trapezoid(const std::vector<double>& t,
                                         const std::vector<double>& f) {
  if (t.size() != f.size()) throw DimensionError("trapezoid: size mismatch");
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
  }
  return out;
}

std::vector<std::string> balance_observables(BalanceIdentity id, int q, CubicSign sign) {
  switch (id) {
    case BalanceIdentity::kAlp:
      return {"L2_sq", "H2_diss", "W14_diss"};
    case BalanceIdentity::kHmj:
      return {"Hs_-0.5", sign == CubicSign::kDerived ? "I_diss" : "I_diss_printed"};
    case BalanceIdentity::kCet: {
      if (q < 1) throw ConfigError("balance.q", "q must be >= 1");
      const std::string qs = std::to_string(q);
      std::vector<std::string> names = {"Mpow_" + qs, "Mq_diss_" + qs,
                                        "Mpow_" + std::to_string(q - 1)};
      if (q >= 2) names.push_back("Mq_qv_" + qs);
      return names;
    }
  }
  return {};
}

namespace {

std::size_t column(const EnsembleStats& stats, const std::string& name) {
  const auto i = stats.index_of(name);
  if (i < 0) throw ConfigError("observables", "balance check needs observable '" + name + "'");
  return static_cast<std::size_t>(i);
}

void require_uniform(const std::vector<double>& t) {
  if (t.size() < 2) throw ConfigError("observe_every", "balance check needs >= 2 observations");
  const double h = t[1] - t[0];
  for (std::size_t i = 2; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h))) {
      throw ConfigError("observe_every", "observation stride must divide the time window");
    }
  }
}

struct Split {
  std::vector<double> lhs, rhs;
};

Split member_balance(BalanceIdentity id, const EnsembleStats& stats, const TrajectoryRecord& r,
                     const NoiseSpec& spec, double alpha, int q, CubicSign sign) {
  const auto& t = stats.times;
  const std::size_t nt = t.size();
  auto series = [&](const std::string& name) {
    const std::size_t c = column(stats, name);
    std::vector<double> s(nt);
    for (std::size_t i = 0; i < nt; ++i) s[i] = r.values[i][c];
    return s;
  };
  Split out{std::vector<double>(nt), std::vector<double>(nt)};
  switch (id) {
    case BalanceIdentity::kAlp: {
      const auto l2 = series("L2_sq");
      auto diss = series("H2_diss");
      const auto w = series("W14_diss");
      for (std::size_t i = 0; i < nt; ++i) diss[i] += w[i];
      const auto idiss = cumulative_trapezoid(t, diss);
      const double a0 = spectral_sum(spec, 0.0);
      for (std::size_t i = 0; i < nt; ++i) {
        out.lhs[i] = l2[i] + 2.0 * alpha * idiss[i];
        out.rhs[i] = l2[0] + alpha * a0 * (t[i] - t[0]);
      }
      break;
    }
    case BalanceIdentity::kHmj: {
      const auto names = balance_observables(id, q, sign);
      const auto h = series(names[0]);
      const auto ii = cumulative_trapezoid(t, series(names[1]));
      const double a = spectral_sum(spec, -0.5);
      for (std::size_t i = 0; i < nt; ++i) {
        out.lhs[i] = h[i] + 2.0 * alpha * ii[i];
        out.rhs[i] = h[0] + alpha * a * (t[i] - t[0]);
      }
      break;
    }
    case BalanceIdentity::kCet: {
      const auto names = balance_observables(id, q, sign);
      const auto mq = series(names[0]);
      const auto idiss = cumulative_trapezoid(t, series(names[1]));
      const auto imlow = cumulative_trapezoid(t, series(names[2]));
      std::vector<double> iqv(nt, 0.0);
      if (q >= 2) iqv = cumulative_trapezoid(t, series(names[3]));
      const double a0 = spectral_sum(spec, 0.0);
      for (std::size_t i = 0; i < nt; ++i) {
        out.lhs[i] = mq[i] + alpha * q * idiss[i];
        out.rhs[i] = mq[0] + alpha * q * 0.5 * a0 * imlow[i] + alpha * q * (q - 1) * 0.5 * iqv[i];
      }
      break;
    }
  }
  return out;
}

}  // namespace

BalanceReport ito_residual(BalanceIdentity id, const EnsembleStats& stats, const NoiseSpec& spec,
                           double alpha, int q, CubicSign sign) {
  if (stats.members.empty()) throw EstimationError("balance check on an empty ensemble");
  require_uniform(stats.times);
  for (const auto& name : balance_observables(id, q, sign)) column(stats, name);

  const std::size_t nt = stats.times.size();
  const double m = static_cast<double>(stats.members.size());
  std::vector<double> lhs(nt, 0.0), rhs(nt, 0.0), sum(nt, 0.0), sum_sq(nt, 0.0);
  for (const auto& r : stats.members) {
    const Split s = member_balance(id, stats, r, spec, alpha, q, sign);
    for (std::size_t i = 0; i < nt; ++i) {
      lhs[i] += s.lhs[i] / m;
      rhs[i] += s.rhs[i] / m;
      const double res = s.lhs[i] - s.rhs[i];
      sum[i] += res;
      sum_sq[i] += res * res;
    }
  }

  BalanceReport rep;
  switch (id) {
    case BalanceIdentity::kAlp:
      rep.identity = "alp";
      break;
    case BalanceIdentity::kHmj:
      rep.identity = sign == CubicSign::kDerived ? "hmj" : "hmj_printed";
      break;
    case BalanceIdentity::kCet:
      rep.identity = "cet_q" + std::to_string(q);
      break;
  }
  rep.times = stats.times;
  rep.residual_path.resize(nt);
  rep.se_path.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    const double mean = sum[i] / m;
    rep.residual_path[i] = mean;
    const double var = m > 1.0 ? std::max(0.0, (sum_sq[i] - m * mean * mean) / (m - 1.0)) : NAN;
    rep.se_path[i] = std::sqrt(var / m);
  }
  rep.t0 = stats.times.front();
  rep.t1 = stats.times.back();
  rep.lhs = lhs.back();
  rep.rhs = rhs.back();
  rep.residual = rep.residual_path.back();
  rep.monte_carlo_se = rep.se_path.back();
  return rep;
}

}  // namespace sqg
