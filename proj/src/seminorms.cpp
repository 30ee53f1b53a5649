#include <fracsob/rules.hpp>
#include <fracsob/seminorms.hpp>
#include <fracsob/summation.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fracsob
{

  std::string to_string(Variant v)
  {
    switch (v)
      {
        case Variant::full: return "full";
        case Variant::tilde: return "tilde";
        case Variant::hat: return "hat";
      }
    return "unknown";
  }

  Variant variant_from_string(const std::string &name)
  {
    if (name == "full")
      return Variant::full;
    if (name == "tilde")
      return Variant::tilde;
    if (name == "hat")
      return Variant::hat;
    throw std::invalid_argument("unknown variant '" + name + "' (expected full, tilde or hat)");
  }

  RegimeFlags regime_flags(int dim, double p, double q)
  {
    RegimeFlags r;
    const double n = dim;
    r.a = 1.0 <= q && q <= p;
    r.b = 1.0 < p && p < q && p <= n && (p == n || q < n * p / (n - p));
    r.c = n < p && p < q;
    return r;
  }

  void SeminormSpec::validate() const
  {
    if (!(s > 0.0 && s < 1.0))
      throw std::invalid_argument("spec.s must lie in (0, 1)");
    if (s > max_s)
      throw std::invalid_argument("spec.s must not exceed 1 - 1e-6 (radial rule underflows beyond)");
    if (!(p >= 1.0) || !std::isfinite(p))
      throw std::invalid_argument("spec.p must be a finite real >= 1");
    if (!(q >= 1.0) || !std::isfinite(q))
      throw std::invalid_argument("spec.q must be a finite real >= 1");
    if (variant != Variant::full && !(tau > 0.0 && tau < 1.0))
      throw std::invalid_argument("spec.tau must lie in (0, 1)");
    if (variant == Variant::hat && !std::isfinite(R))
      throw std::invalid_argument("spec.R must be finite for the hat variant");
    if (!(R > 0.0))
      throw std::invalid_argument("spec.R must be positive");
  }

  std::vector<std::string> SeminormSpec::warnings(int dim) const
  {
    std::vector<std::string> out;
    if (!regimes(dim).any())
      out.push_back("parameters (N=" + std::to_string(dim) + ", p=" + std::to_string(p) + ", q=" +
                    std::to_string(q) + ") satisfy none of the regimes q<=p, 1<p<q<=Np/(N-p) with p<=N, N<p<q; "
                    "the limit theorem does not cover this case");
    return out;
  }

  namespace
  {
    double node_radius(const Domain &domain, const Point &x, const SeminormSpec &spec)
    {
      const double d = domain.dist_to_boundary(x);
      switch (spec.variant)
        {
          case Variant::full: return d;
          case Variant::tilde: return spec.tau * d;
          case Variant::hat: return std::min(spec.R, spec.tau * d);
        }
      return 0.0;
    }
  } // namespace

  std::vector<double> inner_values(const TestFunction &f, const Domain &domain,
                                   const std::vector<WeightedNode> &nodes, const SeminormSpec &spec,
                                   const QuadratureConfig &quad)
  {
    spec.validate();
    if (f.dim() != domain.dim())
      throw std::invalid_argument("function and domain dimensions differ");
    if (spec.variant == Variant::full && !domain.bounded())
      throw std::invalid_argument("the full variant is not defined here on the unbounded domain " +
                                  domain.describe() + "; use tilde or hat with a truncation index");
    const InnerIntegrator integ(domain.dim(), quad, f.discontinuous());
    std::vector<double>   out(nodes.size(), 0.0);
    parallel_for(nodes.size(), quad.threads, [&](std::size_t i) {
      const Point &x = nodes[i].x;
      const double r = node_radius(domain, x, spec);
      double       v = integ.ball(f, x, r, spec.s, spec.q);
      if (spec.variant == Variant::full && r > 0.0)
        v += integ.beyond(f, x, r, spec.s, spec.q, domain);
      out[i] = v;
    });
    return out;
  }

  namespace
  {
    double aggregate(const std::vector<WeightedNode> &nodes, const std::vector<double> &values, double p_over_q)
    {
      std::vector<NodeValue> nv(nodes.size());
      for (std::size_t i = 0; i < nodes.size(); ++i)
        nv[i] = {values[i], nodes[i].w};
      return outer_lp_aggregate(nv, p_over_q);
    }
  } // namespace

  double seminorm_p_on(const TestFunction &f, const Domain &domain, const std::vector<WeightedNode> &nodes,
                       const SeminormSpec &spec, const QuadratureConfig &quad)
  {
    return aggregate(nodes, inner_values(f, domain, nodes, spec, quad), spec.p / spec.q);
  }

  double seminorm_p(const TestFunction &f, const Domain &domain, const SeminormSpec &spec,
                    const QuadratureConfig &quad)
  {
    spec.validate();
    quad.validate();
    if (spec.variant == Variant::full && !domain.bounded())
      throw std::invalid_argument("the full variant is not defined here on the unbounded domain " +
                                  domain.describe() + "; use tilde or hat with a truncation index");
    return seminorm_p_on(f, domain, sample_domain(domain, quad.outer, quad.seed), spec, quad);
  }

  VariantValues evaluate_variants(const TestFunction &f, const Domain &domain, const SeminormSpec &spec,
                                  const QuadratureConfig &quad)
  {
    const auto    nodes = sample_domain(domain, quad.outer, quad.seed);
    VariantValues out;
    SeminormSpec  sp = spec;
    sp.variant = Variant::tilde;
    out.tilde = seminorm_p_on(f, domain, nodes, sp, quad);
    sp.variant = Variant::hat;
    out.hat = seminorm_p_on(f, domain, nodes, sp, quad);
    if (domain.bounded())
      {
        sp.variant = Variant::full;
        out.full = seminorm_p_on(f, domain, nodes, sp, quad);
      }
    return out;
  }

  double sphere_abs_moment(int dim, double q)
  {
    if (dim < 1 || dim > max_dim)
      throw std::invalid_argument("sphere_abs_moment: unsupported dimension");
    return 2.0 * std::pow(std::numbers::pi, 0.5 * (dim - 1)) * std::tgamma(0.5 * (q + 1.0)) /
           std::tgamma(0.5 * (dim + q));
  }

  double sphere_abs_moment_rule(int dim, double q, int order)
  {
    CompensatedSum sum;
    for (const auto &sn : sphere_rule(dim, order))
      sum.add(sn.w * std::pow(std::abs(sn.dir[0]), q));
    return sum.value();
  }

  McEstimate sphere_abs_moment_mc(int dim, double q, std::size_t samples, std::uint64_t seed)
  {
    if (samples < 2)
      throw std::invalid_argument("sphere_abs_moment_mc: need at least 2 samples");
    std::uint64_t  state = seed;
    CompensatedSum sum, sum2;
    for (std::size_t i = 0; i < samples; ++i)
      {
        const double g = std::pow(std::abs(random_direction(dim, state)[0]), q);
        sum.add(g);
        sum2.add(g * g);
      }
    const double n = static_cast<double>(samples);
    const double mean = sum.value() / n;
    const double var = std::max(0.0, (sum2.value() / n - mean * mean) * n / (n - 1.0));
    const double area = sphere_measure(dim);
    return {area * mean, area * std::sqrt(var / n)};
  }

  double bbm_constant(int dim, double p, double q)
  {
    if (dim < 1 || dim > max_dim)
      throw std::invalid_argument("bbm_constant: unsupported dimension " + std::to_string(dim));
    if (!(p >= 1.0) || !(q >= 1.0))
      throw std::invalid_argument("bbm_constant: p and q must be >= 1");
    // |sigma_1|^q has a kink on the equator, so the rule converges only
    // algebraically for small q; at these orders its error stays below 1e-6.
    const int    order = dim == 2 ? 1 << 16 : 1024;
    const double rule = sphere_abs_moment_rule(dim, q, order);
    const double closed = sphere_abs_moment(dim, q);
    if (std::abs(rule - closed) > 1e-6 * closed)
      throw std::logic_error("bbm_constant: sphere rule and closed form disagree");
    return std::pow(closed / q, p / q);
  }

  double annulus_tail_seminorm_p(const TestFunction &f, const Domain &domain, const SeminormSpec &spec,
                                 const QuadratureConfig &quad)
  {
    spec.validate();
    quad.validate();
    if (!std::isfinite(spec.R))
      throw std::invalid_argument("annulus tail needs a finite R");
    const auto            nodes = sample_domain(domain, quad.outer, quad.seed);
    const InnerIntegrator integ(domain.dim(), quad, f.discontinuous());
    std::vector<double>   values(nodes.size(), 0.0);
    parallel_for(nodes.size(), quad.threads, [&](std::size_t i) {
      const double outer = spec.tau * domain.dist_to_boundary(nodes[i].x);
      values[i] = integ.shell(f, nodes[i].x, spec.R, outer, spec.s, spec.q);
    });
    return aggregate(nodes, values, spec.p / spec.q);
  }

  double leoni_spector_truncated_p(const TestFunction &f, const Domain &domain, double lambda,
                                   const SeminormSpec &spec, const QuadratureConfig &quad)
  {
    if (spec.p != spec.q)
      throw std::invalid_argument("the truncated double integral is defined for p = q only");
    const Domain omega_lambda = Domain::truncation(domain, lambda);
    SamplingPlan plan = quad.outer;
    plan.truncation_index.reset();
    const auto nodes = sample_domain(omega_lambda, plan, quad.seed);
    if (nodes.empty())
      return 0.0;
    SeminormSpec sp = spec;
    sp.variant = Variant::full;
    return seminorm_p_on(f, omega_lambda, nodes, sp, quad);
  }

  double leoni_spector_truncated_p(const TestFunction &f, const Domain &domain, double lambda, double s, double p,
                                   const QuadratureConfig &quad)
  {
    SeminormSpec spec;
    spec.s = s;
    spec.p = p;
    spec.q = p;
    spec.variant = Variant::full;
    return leoni_spector_truncated_p(f, domain, lambda, spec, quad);
  }

} // namespace fracsob
