#include "fr/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace fr {
namespace {

void check_tails(const BoundInputs& in, const char* who) {
  if (in.s < 1)
    throw std::invalid_argument(std::string(who) + ": s must be >= 1");
  if (in.tails.size() != in.s)
    throw std::invalid_argument(
        std::string(who) + ": expected " + std::to_string(in.s) +
        " tail values (one per k = 1..s), got " +
        std::to_string(in.tails.size()));
  for (std::size_t k = 0; k < in.s; ++k) {
    if (!(in.tails[k] >= 0.0))
      throw std::invalid_argument(std::string(who) +
                                  ": tail values must be >= 0");
    if (k > 0 && in.tails[k] > in.tails[k - 1] + 1e-12 * (1.0 + in.tails[k - 1]))
      throw std::invalid_argument(std::string(who) +
                                  ": tail values must be nonincreasing in k");
  }
  if (!(in.param >= 0.0))
    throw std::invalid_argument(std::string(who) +
                                ": the program parameter must be >= 0");
}

BoundReport finalize(Vec per_k, std::map<std::string, double> constants) {
  BoundReport r;
  r.per_k = std::move(per_k);
  r.k_star = 1;
  r.bound = r.per_k.front();
  for (std::size_t k = 1; k < r.per_k.size(); ++k) {
    if (r.per_k[k] < r.bound) {
      r.bound = r.per_k[k];
      r.k_star = k + 1;
    }
  }
  r.constants_used = std::move(constants);
  return r;
}

BoundReport sup_constrained_bound(const BoundInputs& in, std::size_t shift,
                                  const char* who) {
  check_tails(in, who);
  if (!(in.delta < 0.5))
    throw std::invalid_argument(
        std::string(who) +
        ": hypothesis violated: requires the restricted-isometry constant at "
        "order 3s below 1/2, got " + std::to_string(in.delta));
  if (!(in.delta >= 0.0))
    throw std::invalid_argument(std::string(who) + ": delta must be >= 0");
  const double denom = 1.0 - 2.0 * in.delta;
  Vec per_k(in.s);
  for (std::size_t k = 1; k <= in.s; ++k) {
    const double ks = std::sqrt(static_cast<double>(k + shift));
    per_k[k - 1] = 4.0 * std::sqrt(2.0) * ks * in.param / denom +
                   2.0 * in.tails[k - 1] / (denom * ks);
  }
  return finalize(std::move(per_k),
                  {{"delta", in.delta},
                   {"lambda", in.param},
                   {"one_minus_2delta", denom},
                   {"s_prime", static_cast<double>(shift)}});
}

BoundReport penalized_bound(const BoundInputs& in, std::size_t shift,
                            const char* who) {
  check_tails(in, who);
  if (!(in.delta < 0.25))
    throw std::invalid_argument(
        std::string(who) +
        ": hypothesis violated: requires the restricted-isometry constant at "
        "order 3s below 1/4, got " + std::to_string(in.delta));
  if (!(in.delta >= 0.0))
    throw std::invalid_argument(std::string(who) + ": delta must be >= 0");
  if (!(in.norm11 >= 1.0))
    throw std::invalid_argument(
        std::string(who) +
        ": ||D^* D||_{1,1} must be >= 1 for a tight frame, got " +
        std::to_string(in.norm11));
  const double denom = 1.0 - 4.0 * in.delta;
  const double head = 2.0 * std::sqrt(2.0) * (1.0 + 2.0 * in.norm11);
  Vec per_k(in.s);
  for (std::size_t k = 1; k <= in.s; ++k) {
    const double ks = std::sqrt(static_cast<double>(k + shift));
    per_k[k - 1] = head * ks * in.param / denom +
                   4.0 * in.tails[k - 1] / (denom * ks);
  }
  return finalize(std::move(per_k),
                  {{"delta", in.delta},
                   {"mu", in.param},
                   {"norm11", in.norm11},
                   {"one_minus_4delta", denom},
                   {"s_prime", static_cast<double>(shift)}});
}

}  // namespace

std::string bound_report_json(const BoundReport& r) {
  nlohmann::json j;
  j["per_k"] = r.per_k;
  j["k_star"] = r.k_star;
  j["bound"] = r.bound;
  j["constants_used"] = r.constants_used;
  return j.dump(2);
}

double l1_tail(const Vec& x, std::size_t k) {
  if (k > x.size())
    throw std::invalid_argument("l1_tail: k exceeds the vector length");
  if (k == x.size()) return 0.0;
  Vec mags(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mags[i] = std::abs(x[i]);
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(k),
                   mags.end(), std::greater<double>());
  double tail = 0.0;
  for (std::size_t i = k; i < mags.size(); ++i) tail += mags[i];
  return tail;
}

BoundReport ads_bound(const BoundInputs& in) {
  return sup_constrained_bound(in, 0, "ads_bound");
}

BoundReport alasso_bound(const BoundInputs& in) {
  return penalized_bound(in, 0, "alasso_bound");
}

double abp_bound(double tail_s, std::size_t s, double epsilon, double c_tail,
                 double c_noise) {
  if (s < 1) throw std::invalid_argument("abp_bound: s must be >= 1");
  if (!(tail_s >= 0.0 && epsilon >= 0.0))
    throw std::invalid_argument("abp_bound: tail and epsilon must be >= 0");
  return c_tail * tail_s / std::sqrt(static_cast<double>(s)) +
         c_noise * epsilon;
}

BoundReport separation_bound(SeparationVariant variant, const BoundInputs& in,
                             double c_tail, double c_noise) {
  switch (variant) {
    case SeparationVariant::sads:
      return sup_constrained_bound(in, in.s_prime, "separation_bound(sads)");
    case SeparationVariant::salasso:
      return penalized_bound(in, in.s_prime, "separation_bound(salasso)");
    case SeparationVariant::sabp: {
      check_tails(in, "separation_bound(sabp)");
      const double ks = std::sqrt(static_cast<double>(in.s + in.s_prime));
      Vec per_k = {c_noise * in.param + c_tail * in.tails[in.s - 1] / ks};
      BoundReport r = finalize(std::move(per_k),
                               {{"c_tail", c_tail},
                                {"c_noise", c_noise},
                                {"epsilon", in.param},
                                {"s_prime", static_cast<double>(in.s_prime)}});
      r.k_star = in.s;  // the residual-ball bound is stated at k = s only
      return r;
    }
  }
  throw std::invalid_argument("separation_bound: unknown variant");
}

MinimaxLower minimax_lower(std::size_t s, double sigma, double delta_s,
                           MinimaxMode mode) {
  if (s < 1) throw std::invalid_argument("minimax_lower: s must be >= 1");
  if (!(sigma >= 0.0))
    throw std::invalid_argument("minimax_lower: sigma must be >= 0");
  if (!(delta_s >= 0.0))
    throw std::invalid_argument("minimax_lower: delta_s must be >= 0");
  MinimaxLower out;
  const double base =
      static_cast<double>(s) * sigma * sigma / (1.0 + delta_s);
  if (mode == MinimaxMode::expectation) {
    out.value = base;
  } else {
    out.value = base / 2.0;
    out.probability_floor =
        1.0 - std::exp(-static_cast<double>(s) / 16.0);
  }
  return out;
}

TraceRisk minimax_trace(const DenseMatrix& Phi, double sigma) {
  if (!(sigma >= 0.0))
    throw std::invalid_argument("minimax_trace: sigma must be >= 0");
  const DenseMatrix G = matmul(transpose(Phi), Phi);
  const EigResult eig = sym_eig(G);
  const double wmax = eig.values.empty() ? 0.0 : eig.values.front();
  TraceRisk out;
  double acc = 0.0;
  for (double w : eig.values) {
    if (w < 1e-12 * wmax || w <= 0.0) {
      out.unbounded = true;
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
    acc += 1.0 / w;
  }
  out.value = sigma * sigma * acc;
  return out;
}

BoundReport power_law_risk(double R, double p, double sigma, std::size_t d,
                           std::size_t s, double C0) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument(
        "power_law_risk: p must lie in (0, 1], got " + std::to_string(p));
  if (d < 2)
    throw std::invalid_argument("power_law_risk: d must be >= 2");
  if (s < 1) throw std::invalid_argument("power_law_risk: s must be >= 1");
  if (!(R >= 0.0 && sigma >= 0.0 && C0 > 0.0))
    throw std::invalid_argument(
        "power_law_risk: need R >= 0, sigma >= 0, C0 > 0");
  const double lnd = std::log(static_cast<double>(d));
  Vec per_k(s);
  for (std::size_t k = 1; k <= s; ++k) {
    const double kd = static_cast<double>(k);
    per_k[k - 1] = C0 * (sigma * sigma * kd * lnd +
                         R * R * std::pow(kd, 1.0 - 2.0 / p));
  }
  return finalize(std::move(per_k),
                  {{"C0", C0}, {"R", R}, {"p", p}, {"sigma", sigma},
                   {"ln_d", lnd}});
}

}  // namespace fr
