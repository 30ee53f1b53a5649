#include <fracsob/bbm.hpp>
#include <fracsob/rules.hpp>
#include <fracsob/summation.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fracsob
{

  std::string to_string(Verdict v)
  {
    switch (v)
      {
        case Verdict::converged: return "converged";
        case Verdict::diverging: return "diverging";
        case Verdict::inconclusive: return "inconclusive";
      }
    return "unknown";
  }

  std::string to_string(DetectorVerdict v)
  {
    switch (v)
      {
        case DetectorVerdict::bounded_suggests_w1p: return "bounded_suggests_w1p";
        case DetectorVerdict::diverging_suggests_not_w1p: return "diverging_suggests_not_w1p";
        case DetectorVerdict::inconclusive: return "inconclusive";
      }
    return "unknown";
  }

  std::vector<double> dyadic_s_sequence(int first, int last)
  {
    if (first < 1 || last < first || last > 19)
      throw std::invalid_argument("dyadic_s_sequence: need 1 <= first <= last <= 19");
    std::vector<double> s;
    for (int k = first; k <= last; ++k)
      s.push_back(1.0 - std::ldexp(1.0, -k));
    return s;
  }

  std::vector<double> detector_s_sequence() { return dyadic_s_sequence(6, 10); }

  LinearFit extrapolate_to_one(const std::vector<double> &s, const std::vector<double> &y, int points)
  {
    if (s.size() != y.size() || s.empty())
      throw std::invalid_argument("extrapolate_to_one: need matching non-empty sequences");
    const std::size_t m = std::min<std::size_t>(std::max(points, 1), s.size());
    const std::size_t o = s.size() - m;
    if (m == 1)
      return {y.back(), 0.0, 0.0};
    double mt = 0.0, my = 0.0;
    for (std::size_t k = o; k < s.size(); ++k)
      {
        mt += 1.0 - s[k];
        my += y[k];
      }
    mt /= m;
    my /= m;
    double stt = 0.0, sty = 0.0;
    for (std::size_t k = o; k < s.size(); ++k)
      {
        const double t = 1.0 - s[k] - mt;
        stt += t * t;
        sty += t * (y[k] - my);
      }
    LinearFit fit;
    fit.slope = stt > 0.0 ? sty / stt : 0.0;
    fit.intercept = my - fit.slope * mt;
    double ss = 0.0;
    for (std::size_t k = o; k < s.size(); ++k)
      {
        const double e = y[k] - (fit.intercept + fit.slope * (1.0 - s[k]));
        ss += e * e;
      }
    const double scale = std::max(std::abs(fit.intercept), 1e-300);
    fit.residual = std::sqrt(ss / m) / scale;
    return fit;
  }

  namespace
  {
    std::string num(double v)
    {
      std::ostringstream os;
      os.precision(17);
      os << v;
      return os.str();
    }

    void check_s_sequence(const std::vector<double> &s)
    {
      if (s.empty())
        throw std::invalid_argument("s sequence is empty");
      for (std::size_t k = 0; k < s.size(); ++k)
        {
          if (!(s[k] > 0.0 && s[k] <= max_s))
            throw std::invalid_argument("s values must lie in (0, 1 - 1e-6], got " + num(s[k]));
          if (k > 0 && !(s[k] > s[k - 1]))
            throw std::invalid_argument("s sequence must be strictly increasing");
        }
    }

    double relative_spread(double a, double b)
    {
      const double m = std::max(std::abs(a), std::abs(b));
      return m == 0.0 ? 0.0 : std::abs(a - b) / m;
    }

    Verdict study_verdict(const std::vector<double> &v, const StudyOptions &opts)
    {
      if (v.size() < 2)
        return Verdict::inconclusive;
      if (relative_spread(v[v.size() - 1], v[v.size() - 2]) <= opts.tolerance)
        return Verdict::converged;
      if (v.size() < 3)
        return Verdict::inconclusive;
      const double last_step = v[v.size() - 1] - v[v.size() - 2];
      const double prev_step = v[v.size() - 2] - v[v.size() - 3];
      const bool   not_slowing = last_step > 0.0 && last_step >= 0.75 * prev_step;
      if (not_slowing && v.front() > 0.0 && v.back() / v.front() >= opts.divergence_factor)
        return Verdict::diverging;
      return Verdict::inconclusive;
    }

    std::vector<std::string> domain_warnings(const TestFunction &f, const Domain &domain,
                                             const QuadratureConfig &quad)
    {
      std::vector<std::string> w;
      if (!domain.bounded())
        w.push_back("unbounded domain: integrated over Omega cap B(0, " +
                    std::to_string(quad.outer.truncation_index.value_or(0)) + "); the remainder is not included");
      if (f.discontinuous())
        w.push_back("discontinuous function: low-order convergence expected");
      return w;
    }

    bool reference_allowed(const TestFunction &f)
    {
      return f.has_gradient() && (f.regularity() == Regularity::linear || f.regularity() == Regularity::smooth_w1p ||
                                  f.regularity() == Regularity::lipschitz);
    }

    double scaled_mass(double inner, double w, double s, const SeminormSpec &spec)
    {
      if (inner == 0.0 || w == 0.0)
        return 0.0;
      return w * std::pow((1.0 - s) * inner, spec.p / spec.q);
    }
  } // namespace

  Provenance describe_run(const TestFunction &f, const Domain &domain, const SeminormSpec &spec,
                          const QuadratureConfig &quad)
  {
    Provenance p;
    p.emplace_back("domain", domain.describe());
    p.emplace_back("function", f.name());
    p.emplace_back("regularity", to_string(f.regularity()));
    p.emplace_back("spec.variant", to_string(spec.variant));
    p.emplace_back("spec.p", num(spec.p));
    p.emplace_back("spec.q", num(spec.q));
    p.emplace_back("spec.tau", num(spec.tau));
    p.emplace_back("spec.R", std::isfinite(spec.R) ? num(spec.R) : std::string("inf"));
    p.emplace_back("quad.sphere_order", std::to_string(quad.sphere_order));
    p.emplace_back("quad.radial_nodes", std::to_string(quad.radial_nodes));
    p.emplace_back("quad.radial_levels", std::to_string(quad.radial_levels));
    p.emplace_back("quad.outer.kind", to_string(quad.outer.kind));
    p.emplace_back("quad.outer.resolution", std::to_string(quad.outer.resolution));
    p.emplace_back("quad.outer.boundary_refine", std::to_string(quad.outer.boundary_refine));
    p.emplace_back("quad.outer.radial", std::to_string(quad.outer.radial));
    p.emplace_back("quad.outer.angular", std::to_string(quad.outer.angular));
    p.emplace_back("quad.outer.samples", std::to_string(quad.outer.samples));
    p.emplace_back("quad.outer.truncation_index", quad.outer.truncation_index
                                                     ? std::to_string(*quad.outer.truncation_index)
                                                     : std::string("none"));
    p.emplace_back("quad.mc_samples", std::to_string(quad.mc_samples));
    p.emplace_back("quad.seed", std::to_string(quad.seed));
    p.emplace_back("quad.rel_tol", num(quad.rel_tol));
    return p;
  }

  StudyReport convergence_study(const TestFunction &f, const Domain &domain, const SeminormSpec &spec_template,
                                const std::vector<double> &s_sequence, const QuadratureConfig &quad,
                                const StudyOptions &opts)
  {
    check_s_sequence(s_sequence);
    quad.validate();
    StudyReport rep;
    rep.provenance = describe_run(f, domain, spec_template, quad);
    rep.warnings = spec_template.warnings(domain.dim());
    for (auto &w : domain_warnings(f, domain, quad))
      rep.warnings.push_back(std::move(w));

    const auto nodes = sample_domain(domain, quad.outer, quad.seed);
    rep.s_values = s_sequence;
    for (double s : s_sequence)
      {
        SeminormSpec spec = spec_template;
        spec.s = s;
        const double raw = seminorm_p_on(f, domain, nodes, spec, quad);
        rep.raw_values.push_back(raw);
        rep.scaled_values.push_back(std::pow(1.0 - s, spec.p / spec.q) * raw);
      }
    const auto fit = extrapolate_to_one(rep.s_values, rep.scaled_values, opts.fit_points);
    rep.extrapolated_limit = fit.intercept;
    rep.fit_residual = fit.residual;

    if (reference_allowed(f))
      {
        rep.reference = bbm_constant(domain.dim(), spec_template.p, spec_template.q) *
                        w1p_seminorm_on(f, nodes, spec_template.p);
        if (*rep.reference != 0.0)
          rep.relative_error = std::abs(rep.extrapolated_limit - *rep.reference) / *rep.reference;
        else
          rep.relative_error = std::abs(rep.extrapolated_limit);
      }
    rep.verdict = study_verdict(rep.scaled_values, opts);
    return rep;
  }

  PointwiseReport pointwise_limit_check(const TestFunction &f, const Domain &domain, const Point &x,
                                        const SeminormSpec &spec, const std::vector<double> &s_sequence,
                                        const QuadratureConfig &quad, const StudyOptions &opts)
  {
    check_s_sequence(s_sequence);
    if (!f.has_gradient())
      throw std::invalid_argument("pointwise_limit_check: '" + f.name() + "' has no analytic gradient");
    PointwiseReport rep;
    rep.x = x;
    rep.delta = domain.delta(x, spec.R, spec.tau);
    if (rep.delta <= domain.geometric_epsilon())
      throw std::invalid_argument("pointwise_limit_check: x = " + x.str() + " is too close to the boundary");
    const InnerIntegrator integ(domain.dim(), quad, f.discontinuous());
    rep.s_values = s_sequence;
    for (double s : s_sequence)
      rep.scaled_values.push_back((1.0 - s) * integ.ball(f, x, rep.delta, s, spec.q));
    rep.target = sphere_abs_moment(domain.dim(), spec.q) / spec.q * std::pow(f.gradient(x).norm(), spec.q);
    rep.extrapolated_limit = extrapolate_to_one(rep.s_values, rep.scaled_values, opts.fit_points).intercept;

    double scale = rep.target;
    if (scale == 0.0)
      for (double v : rep.scaled_values)
        scale = std::max(scale, std::abs(v));
    rep.verdict = std::abs(rep.scaled_values.back() - rep.target) <= opts.tolerance * scale ? Verdict::converged
                                                                                             : Verdict::inconclusive;
    return rep;
  }

  EmbeddingReport embedding_bound_check(const TestFunction &f, const Domain &domain, const SeminormSpec &spec,
                                        const QuadratureConfig &quad, std::vector<double> s_values,
                                        const StudyOptions &opts)
  {
    if (spec.variant != Variant::hat)
      throw std::invalid_argument("embedding_bound_check: the bound concerns the hat variant (finite R)");
    spec.validate();
    if (!f.has_gradient())
      throw std::invalid_argument("embedding_bound_check: '" + f.name() + "' has no analytic gradient");

    EmbeddingReport rep;
    const int       n = domain.dim();
    rep.explicit_constant = spec.q <= spec.p;
    if (s_values.empty())
      s_values = rep.explicit_constant ? std::vector<double>{spec.s} : std::vector<double>{0.5, 0.9, 0.99, 0.999};
    check_s_sequence(s_values);
    if (!rep.explicit_constant)
      {
        const bool item1 = spec.p < n && spec.q < n * spec.p / (n - spec.p);
        const bool item2 = n <= spec.p;
        if (!(spec.p > 1.0 && (item1 || item2)))
          rep.warnings.push_back("p < q outside the conditions p < N, q < Np/(N-p) or N <= p: "
                                 "no bound is known for these parameters");
      }
    for (auto &w : domain_warnings(f, domain, quad))
      rep.warnings.push_back(std::move(w));

    const auto   nodes = sample_domain(domain, quad.outer, quad.seed);
    const double w1p = w1p_seminorm_on(f, nodes, spec.p);
    const double pq = spec.p / spec.q;
    for (double s : s_values)
      {
        SeminormSpec sp = spec;
        sp.s = s;
        EmbeddingRow row;
        row.s = s;
        row.w1p = w1p;
        row.lhs = std::pow(1.0 - s, pq) * seminorm_p_on(f, domain, nodes, sp, quad);
        row.ratio = w1p > 0.0 ? row.lhs / w1p : 0.0;
        if (rep.explicit_constant)
          {
            row.rhs = std::pow(spec.R, spec.p * (1.0 - s)) / std::pow(spec.q, pq) * w1p;
            const double t = s * spec.q - spec.q + 1.0;
            if (t > 0.0)
              row.rhs_with_sphere = std::pow(sphere_measure(n) / (spec.q * t), pq) * std::pow(spec.R, spec.p * (1.0 - s)) * w1p;
            row.satisfied = row.lhs <= *row.rhs * (1.0 + quad.rel_tol);
            rep.satisfied = rep.satisfied && *row.satisfied;
          }
        rep.rows.push_back(row);
      }
    if (!rep.explicit_constant && rep.rows.size() > 1)
      {
        double earlier = 0.0;
        for (std::size_t k = 0; k + 1 < rep.rows.size(); ++k)
          earlier = std::max(earlier, rep.rows[k].ratio);
        rep.satisfied = rep.rows.back().ratio <= opts.plateau_ratio * earlier || rep.rows.back().ratio == 0.0;
      }
    return rep;
  }

  DetectorReport main2_detector(const TestFunction &f, const Domain &domain, const SeminormSpec &spec_template,
                                const std::vector<double> &s_sequence, const QuadratureConfig &quad,
                                const StudyOptions &opts)
  {
    check_s_sequence(s_sequence);
    if (s_sequence.size() < 2)
      throw std::invalid_argument("main2_detector: need at least two s values");
    DetectorReport rep;
    rep.s_values = s_sequence;
    rep.notes.push_back("a numerical verdict is evidence, not proof: finiteness of the limit implies W^{1,p} "
                        "(BV when p = 1), and growth suggests the contrapositive");
    for (auto &w : domain_warnings(f, domain, quad))
      rep.notes.push_back(std::move(w));

    const auto nodes = sample_domain(domain, quad.outer, quad.seed);
    for (double s : s_sequence)
      {
        SeminormSpec spec = spec_template;
        spec.s = s;
        const auto     inner = inner_values(f, domain, nodes, spec, quad);
        CompensatedSum sum;
        for (std::size_t i = 0; i < nodes.size(); ++i)
          sum.add(scaled_mass(inner[i], nodes[i].w, s, spec));
        rep.values.push_back(sum.value());
      }

    const double first = rep.values.front(), last = rep.values.back(), prev = rep.values[rep.values.size() - 2];
    if (first == 0.0 && last == 0.0)
      {
        rep.growth = 1.0;
        rep.verdict = DetectorVerdict::bounded_suggests_w1p;
        return rep;
      }
    rep.growth = first > 0.0 ? last / first : std::numeric_limits<double>::infinity();
    const bool growing = last > prev;
    const bool flattening = std::abs(last - prev) <= opts.flatten_tolerance * std::abs(last);
    if (rep.growth >= opts.divergence_factor && growing)
      rep.verdict = DetectorVerdict::diverging_suggests_not_w1p;
    else if (rep.growth <= opts.plateau_ratio && flattening)
      rep.verdict = DetectorVerdict::bounded_suggests_w1p;
    else
      rep.verdict = DetectorVerdict::inconclusive;
    return rep;
  }

  TailReport tail_mass_diagnostic(const TestFunction &f, const Domain &domain, const SeminormSpec &spec_template,
                                  double s, const std::vector<int> &i_sequence, const QuadratureConfig &quad)
  {
    if (i_sequence.empty())
      throw std::invalid_argument("tail_mass_diagnostic: empty index sequence");
    for (std::size_t k = 0; k < i_sequence.size(); ++k)
      if (i_sequence[k] < 1 || (k > 0 && i_sequence[k] <= i_sequence[k - 1]))
        throw std::invalid_argument("tail_mass_diagnostic: indices must be positive and increasing");

    TailReport       rep;
    QuadratureConfig q = quad;
    if (!domain.bounded() && !q.outer.truncation_index)
      q.outer.truncation_index = 2 * i_sequence.back();
    rep.s = s;
    rep.truncation_index = q.outer.truncation_index.value_or(0);
    rep.warnings = domain_warnings(f, domain, q);

    SeminormSpec spec = spec_template;
    spec.s = s;
    const auto nodes = sample_domain(domain, q.outer, q.seed);
    const auto inner = inner_values(f, domain, nodes, spec, q);

    std::vector<double> mass(nodes.size());
    CompensatedSum      total;
    for (std::size_t k = 0; k < nodes.size(); ++k)
      {
        mass[k] = scaled_mass(inner[k], nodes[k].w, s, spec);
        total.add(mass[k]);
      }
    rep.total = total.value();
    for (int i : i_sequence)
      {
        const auto     inside = TruncationSet::by_index(domain, 2 * i);
        CompensatedSum tail;
        for (std::size_t k = 0; k < nodes.size(); ++k)
          if (!inside.member(nodes[k].x))
            tail.add(mass[k]);
        rep.tails.push_back({i, tail.value()});
      }
    return rep;
  }

  DoubleLimitReport double_limit_study(const TestFunction &f, const Domain &domain, double p,
                                       const std::vector<double> &lambda_sequence,
                                       const std::vector<double> &s_sequence, const QuadratureConfig &quad,
                                       const StudyOptions &opts)
  {
    if (lambda_sequence.empty())
      throw std::invalid_argument("double_limit_study: empty lambda sequence");
    for (std::size_t k = 1; k < lambda_sequence.size(); ++k)
      if (!(lambda_sequence[k] < lambda_sequence[k - 1]))
        throw std::invalid_argument("double_limit_study: lambda sequence must decrease");

    SeminormSpec spec;
    spec.p = p;
    spec.q = p;
    spec.variant = Variant::full;

    QuadratureConfig stage_quad = quad;
    stage_quad.outer.truncation_index.reset();

    DoubleLimitReport rep;
    for (double lambda : lambda_sequence)
      {
        const Domain omega_lambda = Domain::truncation(domain, lambda);
        rep.stages.push_back({lambda, convergence_study(f, omega_lambda, spec, s_sequence, stage_quad, opts)});
      }
    if (reference_allowed(f))
      {
        rep.reference = bbm_constant(domain.dim(), p, p) * w1p_seminorm(f, domain, p, quad);
        const double last = rep.stages.back().study.extrapolated_limit;
        rep.relative_error = *rep.reference != 0.0 ? std::abs(last - *rep.reference) / *rep.reference : std::abs(last);
      }
    rep.increasing = true;
    for (std::size_t k = 1; k < rep.stages.size(); ++k)
      if (rep.stages[k].study.extrapolated_limit < rep.stages[k - 1].study.extrapolated_limit)
        rep.increasing = false;
    return rep;
  }

} // namespace fracsob
