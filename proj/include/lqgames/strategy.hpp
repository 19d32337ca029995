#ifndef LQGAMES_STRATEGY_HPP
#define LQGAMES_STRATEGY_HPP

#include <cmath>
#include <vector>

#include "lqgames/dims.hpp"
#include "lqgames/linalg.hpp"

namespace lqgames {

// One (player, stage) affine rule: a = l_mat * vhat + m_f * f_stack + m_const.
// The public offset of the rule is m = m_f * f_stack + m_const.
struct AffineStrategy {
  MatrixXd l_mat;    // dim_a x dim_v
  MatrixXd m_f;      // dim_a x f_stack
  VectorXd m_const;  // dim_a

  static AffineStrategy zero(const Dims& d) {
    return AffineStrategy{MatrixXd::Zero(d.dim_a, d.dim_v),
                          MatrixXd::Zero(d.dim_a, d.f_stack()),
                          VectorXd::Zero(d.dim_a)};
  }

  VectorXd action(const VectorXd& vhat, const VectorXd& f) const {
    return l_mat * vhat + m_f * f + m_const;
  }
  VectorXd offset(const VectorXd& f) const { return m_f * f + m_const; }
};

struct StrategyProfile {
  // by[player][stage]
  std::vector<std::vector<AffineStrategy>> by;

  static StrategyProfile zero(const Dims& d) {
    StrategyProfile p;
    p.by.assign(d.n_players, std::vector<AffineStrategy>(d.horizon, AffineStrategy::zero(d)));
    return p;
  }

  const AffineStrategy& at(int player, int stage) const { return by.at(player).at(stage); }
  AffineStrategy& at(int player, int stage) { return by.at(player).at(stage); }
  int n_players() const { return static_cast<int>(by.size()); }
  int horizon() const { return by.empty() ? 0 : static_cast<int>(by.front().size()); }
};

// sup-norm over all coefficients of the difference
inline double profile_distance(const StrategyProfile& a, const StrategyProfile& b) {
  double d = 0.0;
  for (int i = 0; i < a.n_players(); ++i) {
    for (int t = 0; t < a.horizon(); ++t) {
      const auto& x = a.at(i, t);
      const auto& y = b.at(i, t);
      d = std::max(d, (x.l_mat - y.l_mat).cwiseAbs().maxCoeff());
      d = std::max(d, (x.m_f - y.m_f).cwiseAbs().maxCoeff());
      d = std::max(d, (x.m_const - y.m_const).cwiseAbs().maxCoeff());
    }
  }
  return d;
}

inline StrategyProfile blend_profiles(const StrategyProfile& old_p, const StrategyProfile& new_p,
                                      double damping) {
  StrategyProfile out = old_p;
  for (int i = 0; i < out.n_players(); ++i) {
    for (int t = 0; t < out.horizon(); ++t) {
      out.at(i, t).l_mat = (1.0 - damping) * old_p.at(i, t).l_mat + damping * new_p.at(i, t).l_mat;
      out.at(i, t).m_f = (1.0 - damping) * old_p.at(i, t).m_f + damping * new_p.at(i, t).m_f;
      out.at(i, t).m_const =
          (1.0 - damping) * old_p.at(i, t).m_const + damping * new_p.at(i, t).m_const;
    }
  }
  return out;
}

}  // namespace lqgames

#endif
