#include "tabdist/objectives.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "tabdist/common.hpp"

namespace tabdist {

std::string objective_kind_name(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::mse: return "mse";
    case ObjectiveKind::ce: return "ce";
    case ObjectiveKind::wce: return "wce";
    case ObjectiveKind::focal: return "focal";
    case ObjectiveKind::asig: return "asig";
  }
  return "?";
}

ObjectiveKind objective_kind_from_name(const std::string& name) {
  if (name == "mse") return ObjectiveKind::mse;
  if (name == "ce") return ObjectiveKind::ce;
  if (name == "wce") return ObjectiveKind::wce;
  if (name == "focal") return ObjectiveKind::focal;
  if (name == "asig") return ObjectiveKind::asig;
  throw ConfigError("unknown objective kind: " + name);
}

ObjectiveSpec ObjectiveSpec::mse() { return {}; }

ObjectiveSpec ObjectiveSpec::ce() {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::ce;
  return s;
}

ObjectiveSpec ObjectiveSpec::wce(double coe) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::wce;
  s.coe = coe;
  return s;
}

ObjectiveSpec ObjectiveSpec::focal(double gamma) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::focal;
  s.gamma = gamma;
  return s;
}

ObjectiveSpec ObjectiveSpec::asig(double gamma, double alpha_w, double alpha_g,
                                  double beta_g, double ir) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::asig;
  s.gamma = gamma;
  s.alpha_w = alpha_w;
  s.alpha_g = alpha_g;
  s.beta_g = beta_g;
  s.ir = ir;
  return s;
}

void validate(const ObjectiveSpec& spec) {
  const bool focal_like =
      spec.kind == ObjectiveKind::focal || spec.kind == ObjectiveKind::asig;
  if (focal_like && !(spec.gamma >= 0.0 && std::isfinite(spec.gamma))) {
    throw ConfigError("objective gamma must be finite and >= 0");
  }
  if (spec.kind == ObjectiveKind::wce && !(spec.coe > 0.0 && spec.coe < 1.0)) {
    throw ConfigError("wce coe must lie strictly in (0,1)");
  }
  if (spec.kind == ObjectiveKind::asig) {
    if (!(spec.alpha_w > 0.0 && spec.alpha_w < 1.0)) {
      throw ConfigError("asig alpha_w must lie strictly in (0,1)");
    }
    if (!(spec.ir > 0.0)) {
      throw ConfigError("asig ir must be positive");
    }
    if (!std::isfinite(spec.alpha_g) || !std::isfinite(spec.beta_g)) {
      throw ConfigError("asig alpha_g/beta_g must be finite");
    }
  }
}

double rebalancing_coe(std::int64_t n_pos, std::int64_t n_neg,
                       bool positive_fraction) {
  if (n_pos < 1 || n_neg < 1) {
    throw DataError("rebalancing_coe needs both classes present");
  }
  const double total = static_cast<double>(n_pos + n_neg);
  return positive_fraction ? static_cast<double>(n_pos) / total
                           : static_cast<double>(n_neg) / total;
}

double g_shift(double ir, double alpha_g, double beta_g) {
  if (!(ir > 0.0)) {
    throw ConfigError("g_shift: ir must be positive");
  }
  return alpha_g * std::log(ir) + beta_g;
}

namespace {

double stable_sigmoid(double u) {
  if (u >= 0.0) {
    return 1.0 / (1.0 + std::exp(-u));
  }
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// log(sigmoid(u)) without intermediate under/overflow.
double log_sigmoid(double u) {
  return u >= 0.0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u));
}

constexpr double kProbEps = 1e-12;

// Shared core for the ce/wce/focal/asig family. Positive terms are
// -w_pos * (1-p)^gamma * log(p); negative terms use the modulator
// (1-p)^gamma when neg_mod_on_p is false (the asymmetric focal form) and
// p^gamma when true (asig). gamma = 0 recovers plain weighted cross-entropy
// bitwise.
LossResult weighted_focal(const Eigen::VectorXd& Z, const Eigen::VectorXi& y_t,
                          double w_pos, double w_neg, double gamma, double G,
                          bool neg_mod_on_p) {
  const auto n = Z.size();
  const double ln_eps = std::log(kProbEps);
  const double ln_one_minus_eps = std::log1p(-kProbEps);

  LossResult out;
  out.grad = Eigen::VectorXd::Zero(n);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double u = Z[j] - G;
    const double p =
        std::clamp(stable_sigmoid(u), kProbEps, 1.0 - kProbEps);
    if (y_t[j] == 1) {
      const double lp = std::clamp(log_sigmoid(u), ln_eps, ln_one_minus_eps);
      const double mod = std::pow(1.0 - p, gamma);
      loss -= w_pos * mod * lp;
      out.grad[j] = w_pos * mod * (gamma * p * lp - (1.0 - p));
    } else {
      const double lq = std::clamp(log_sigmoid(-u), ln_eps, ln_one_minus_eps);
      if (neg_mod_on_p) {
        const double mod = std::pow(p, gamma);
        loss -= w_neg * mod * lq;
        out.grad[j] = w_neg * mod * (p - gamma * (1.0 - p) * lq);
      } else {
        const double mod = std::pow(1.0 - p, gamma);
        loss -= w_neg * mod * lq;
        out.grad[j] = w_neg * mod * p * (gamma * lq + 1.0);
      }
    }
  }
  out.loss = loss / static_cast<double>(n);
  out.grad /= static_cast<double>(n);
  return out;
}

}  // namespace

Eigen::VectorXd shifted_sigmoid(const Eigen::VectorXd& Z, double G) {
  const double lo = DBL_TRUE_MIN;
  const double hi = std::nextafter(1.0, 0.0);
  Eigen::VectorXd p(Z.size());
  for (Eigen::Index j = 0; j < Z.size(); ++j) {
    p[j] = std::clamp(stable_sigmoid(Z[j] - G), lo, hi);
  }
  return p;
}

LossResult loss_and_grad(const ObjectiveSpec& spec, const Eigen::VectorXd& Z,
                         const Eigen::VectorXi& y_t, const Eigen::VectorXd& y_enc) {
  validate(spec);
  const auto n = Z.size();
  if (n < 1) {
    throw DataError("loss_and_grad: empty batch");
  }
  if (y_t.size() != n || y_enc.size() != n) {
    throw DataError("loss_and_grad: Z, y_t, y_enc lengths disagree");
  }

  switch (spec.kind) {
    case ObjectiveKind::mse: {
      LossResult out;
      const Eigen::VectorXd r = Z - y_enc;
      out.loss = r.squaredNorm() / static_cast<double>(n);
      out.grad = (2.0 / static_cast<double>(n)) * r;
      return out;
    }
    case ObjectiveKind::ce:
      return weighted_focal(Z, y_t, 1.0, 1.0, 0.0, 0.0, false);
    case ObjectiveKind::wce:
      return weighted_focal(Z, y_t, spec.coe, 1.0 - spec.coe, 0.0, 0.0, false);
    case ObjectiveKind::focal:
      return weighted_focal(Z, y_t, 1.0, 1.0, spec.gamma, 0.0, false);
    case ObjectiveKind::asig:
      return weighted_focal(Z, y_t, spec.alpha_w, 1.0 - spec.alpha_w, spec.gamma,
                            g_shift(spec.ir, spec.alpha_g, spec.beta_g), true);
  }
  throw ConfigError("unreachable objective kind");
}

}  // namespace tabdist
