#include <fracsob/cli.hpp>

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace fracsob::cli
{

  ConfigError::ConfigError(const std::string &msg, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line)
  {}

  std::string to_string(Command c)
  {
    switch (c)
      {
        case Command::seminorm: return "seminorm";
        case Command::study: return "study";
        case Command::pointwise: return "pointwise";
        case Command::embedding: return "embedding";
        case Command::detect: return "detect";
        case Command::tails: return "tails";
        case Command::double_limit: return "double-limit";
        case Command::constant: return "constant";
      }
    return "unknown";
  }

  Command command_from_string(const std::string &name)
  {
    for (Command c : {Command::seminorm, Command::study, Command::pointwise, Command::embedding, Command::detect,
                      Command::tails, Command::double_limit, Command::constant})
      if (to_string(c) == name)
        return c;
    throw std::invalid_argument("unknown command '" + name +
                                "' (expected seminorm, study, pointwise, embedding, detect, tails, double-limit or "
                                "constant)");
  }

  namespace
  {
    std::string trim(const std::string &s)
    {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos)
        return {};
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    }

    std::vector<std::string> split(const std::string &s, char sep)
    {
      std::vector<std::string> out;
      std::string              item;
      std::istringstream       is(s);
      while (std::getline(is, item, sep))
        out.push_back(trim(item));
      return out;
    }

    std::string num(double v)
    {
      if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
      std::ostringstream os;
      os << std::setprecision(17) << v;
      return os.str();
    }

    double to_double(const std::string &s)
    {
      if (s == "inf" || s == "infinity")
        return std::numeric_limits<double>::infinity();
      double      v = 0.0;
      const char *b = s.data(), *e = s.data() + s.size();
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || p != e || s.empty())
        throw std::invalid_argument("'" + s + "' is not a number");
      return v;
    }

    long long to_int(const std::string &s)
    {
      long long   v = 0;
      const char *b = s.data(), *e = s.data() + s.size();
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || p != e || s.empty())
        throw std::invalid_argument("'" + s + "' is not an integer");
      return v;
    }

    std::vector<double> to_doubles(const std::string &s)
    {
      std::vector<double> out;
      for (const auto &item : split(s, ','))
        out.push_back(to_double(item));
      if (out.empty())
        throw std::invalid_argument("empty list");
      return out;
    }

    std::vector<int> to_ints(const std::string &s)
    {
      std::vector<int> out;
      for (const auto &item : split(s, ','))
        out.push_back(static_cast<int>(to_int(item)));
      if (out.empty())
        throw std::invalid_argument("empty list");
      return out;
    }

    Point to_point(const std::string &s)
    {
      const auto c = to_doubles(s);
      if (c.size() > static_cast<std::size_t>(max_dim))
        throw std::invalid_argument("points have at most 3 coordinates");
      Point p(static_cast<int>(c.size()));
      for (std::size_t i = 0; i < c.size(); ++i)
        p[static_cast<int>(i)] = c[i];
      if (!p.finite())
        throw std::invalid_argument("point coordinates must be finite");
      return p;
    }

    std::string point_str(const Point &p)
    {
      std::string out;
      for (int i = 0; i < p.dim(); ++i)
        out += (i ? "," : "") + num(p[i]);
      return out;
    }

    std::string doubles_str(const std::vector<double> &v)
    {
      std::string out;
      for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + num(v[i]);
      return out;
    }

    std::string ints_str(const std::vector<int> &v)
    {
      std::string out;
      for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + std::to_string(v[i]);
      return out;
    }

    const std::map<std::string, std::set<std::string>> &domain_keys()
    {
      static const std::map<std::string, std::set<std::string>> keys{
        {"ball", {"center", "radius"}},
        {"axis_box", {"lo", "hi"}},
        {"annulus", {"center", "r_in", "r_out"}},
        {"half_space", {"normal", "offset"}},
        {"strip", {"axis", "half_width"}},
        {"slit_disk", {"radius", "slit_angle"}},
        {"lattice_complement", {"spacing"}},
        {"polygon2d", {"vertices"}},
      };
      return keys;
    }

    const std::map<std::string, std::set<std::string>> &function_keys()
    {
      static const std::map<std::string, std::set<std::string>> keys{
        {"linear", {"a"}},
        {"constant", {"value"}},
        {"gaussian", {"center", "width", "amplitude"}},
        {"x1sq_x2", {}},
        {"radial_wave", {"center", "omega"}},
        {"abs_ridge", {}},
        {"halfspace_indicator", {"offset"}},
        {"ball_indicator", {"center", "radius"}},
        {"lacunary", {"terms", "base", "holder"}},
      };
      return keys;
    }

    std::string origin_str(int dim)
    {
      std::string out;
      for (int i = 0; i < dim; ++i)
        out += i ? ",0" : "0";
      return out;
    }

    /// Fills defaults of the function block that depend on the dimension.
    void function_defaults(std::map<std::string, std::string> &fn, int dim)
    {
      const std::string &name = fn.at("name");
      auto def = [&](const std::string &k, const std::string &v) { fn.try_emplace(k, v); };
      if (name == "gaussian")
        {
          def("center", origin_str(dim));
          def("width", "0.40000000000000002");
          def("amplitude", "1");
        }
      else if (name == "radial_wave")
        {
          def("center", origin_str(dim));
          def("omega", "2");
        }
      else if (name == "halfspace_indicator")
        def("offset", "0");
      else if (name == "ball_indicator")
        def("center", origin_str(dim));
      else if (name == "lacunary")
        {
          def("terms", "8");
          def("base", "4");
          def("holder", "0.5");
        }
    }

    std::string need(const std::map<std::string, std::string> &m, const std::string &block, const std::string &key)
    {
      auto it = m.find(key);
      if (it == m.end())
        throw std::invalid_argument("missing required key " + block + "." + key);
      return it->second;
    }

    int infer_dim(const std::map<std::string, std::string> &dom)
    {
      const auto &kind = dom.at("kind");
      if (kind == "slit_disk" || kind == "polygon2d")
        return 2;
      for (const char *k : {"center", "lo", "normal"})
        if (auto it = dom.find(k); it != dom.end())
          return to_point(it->second).dim();
      return 0;
    }
  } // namespace

  Domain make_domain(const RunConfig &cfg)
  {
    const auto &d = cfg.domain;
    const auto &kind = need(d, "domain", "kind");
    auto        pt = [&](const std::string &k) {
      Point p = to_point(need(d, "domain", k));
      if (p.dim() != cfg.dim)
        throw std::invalid_argument("domain." + k + " has " + std::to_string(p.dim()) + " coordinates, N = " +
                                    std::to_string(cfg.dim));
      return p;
    };
    auto val = [&](const std::string &k) { return to_double(need(d, "domain", k)); };
    if (kind == "ball")
      return Domain::ball(pt("center"), val("radius"));
    if (kind == "axis_box")
      return Domain::axis_box(pt("lo"), pt("hi"));
    if (kind == "annulus")
      return Domain::annulus(pt("center"), val("r_in"), val("r_out"));
    if (kind == "half_space")
      return Domain::half_space(pt("normal"), val("offset"));
    if (kind == "strip")
      return Domain::strip(cfg.dim, static_cast<int>(to_int(need(d, "domain", "axis"))), val("half_width"));
    if (kind == "slit_disk")
      return Domain::slit_disk(val("radius"), val("slit_angle"));
    if (kind == "lattice_complement")
      return Domain::lattice_complement(cfg.dim, val("spacing"));
    if (kind == "polygon2d")
      {
        std::vector<Point> v;
        for (const auto &item : split(need(d, "domain", "vertices"), ';'))
          v.push_back(to_point(item));
        return Domain::polygon2d(v);
      }
    throw std::invalid_argument("unknown domain.kind '" + kind + "'");
  }

  TestFunction make_function(const RunConfig &cfg)
  {
    const auto &fn = cfg.function;
    const auto &name = need(fn, "function", "name");
    auto        pt = [&](const std::string &k) {
      Point p = to_point(need(fn, "function", k));
      if (p.dim() != cfg.dim)
        throw std::invalid_argument("function." + k + " has " + std::to_string(p.dim()) + " coordinates, N = " +
                                    std::to_string(cfg.dim));
      return p;
    };
    auto val = [&](const std::string &k) { return to_double(need(fn, "function", k)); };
    if (name == "linear")
      return functions::linear(pt("a"));
    if (name == "constant")
      return functions::constant(cfg.dim, val("value"));
    if (name == "gaussian")
      return functions::gaussian(pt("center"), val("width"), val("amplitude"));
    if (name == "x1sq_x2")
      return functions::monomial_x1sq_x2(cfg.dim);
    if (name == "radial_wave")
      return functions::radial_wave(pt("center"), val("omega"));
    if (name == "abs_ridge")
      return functions::abs_ridge(cfg.dim);
    if (name == "halfspace_indicator")
      return functions::halfspace_indicator(cfg.dim, val("offset"));
    if (name == "ball_indicator")
      return functions::ball_indicator(pt("center"), val("radius"));
    if (name == "lacunary")
      return functions::lacunary(cfg.dim, static_cast<int>(to_int(need(fn, "function", "terms"))), val("base"),
                                 val("holder"));
    throw std::invalid_argument("unknown function.name '" + name + "'");
  }

  RunConfig parse_config(const std::string &text)
  {
    RunConfig                  cfg;
    std::map<std::string, int> seen; // key -> line

    using Setter = std::function<void(const std::string &)>;
    bool has_s = false, has_s_seq = false;
    std::map<std::string, Setter> setters{
      {"command", [&](const std::string &v) { cfg.command = command_from_string(v); }},
      {"N",
       [&](const std::string &v) {
         cfg.dim = static_cast<int>(to_int(v));
         if (cfg.dim < 1 || cfg.dim > max_dim)
           throw std::invalid_argument("N must be 1, 2 or 3");
       }},
      {"spec.s",
       [&](const std::string &v) {
         cfg.spec.s = to_double(v);
         has_s = true;
       }},
      {"spec.s_sequence",
       [&](const std::string &v) {
         cfg.s_sequence = to_doubles(v);
         has_s_seq = true;
       }},
      {"spec.p", [&](const std::string &v) { cfg.spec.p = to_double(v); }},
      {"spec.q", [&](const std::string &v) { cfg.spec.q = to_double(v); }},
      {"spec.tau", [&](const std::string &v) { cfg.spec.tau = to_double(v); }},
      {"spec.R", [&](const std::string &v) { cfg.spec.R = to_double(v); }},
      {"spec.variant", [&](const std::string &v) { cfg.spec.variant = variant_from_string(v); }},
      {"quad.sphere_order", [&](const std::string &v) { cfg.quad.sphere_order = static_cast<int>(to_int(v)); }},
      {"quad.radial_nodes", [&](const std::string &v) { cfg.quad.radial_nodes = static_cast<int>(to_int(v)); }},
      {"quad.radial_levels", [&](const std::string &v) { cfg.quad.radial_levels = static_cast<int>(to_int(v)); }},
      {"quad.outer", [&](const std::string &v) { cfg.quad.outer.kind = plan_kind_from_string(v); }},
      {"quad.resolution", [&](const std::string &v) { cfg.quad.outer.resolution = static_cast<int>(to_int(v)); }},
      {"quad.boundary_refine",
       [&](const std::string &v) { cfg.quad.outer.boundary_refine = static_cast<int>(to_int(v)); }},
      {"quad.outer_radial", [&](const std::string &v) { cfg.quad.outer.radial = static_cast<int>(to_int(v)); }},
      {"quad.outer_angular", [&](const std::string &v) { cfg.quad.outer.angular = static_cast<int>(to_int(v)); }},
      {"quad.outer_samples",
       [&](const std::string &v) {
         const auto n = to_int(v);
         if (n <= 0)
           throw std::invalid_argument("quad.outer_samples must be positive");
         cfg.quad.outer.samples = static_cast<std::size_t>(n);
       }},
      {"quad.truncation", [&](const std::string &v) { cfg.quad.outer.truncation_index = static_cast<int>(to_int(v)); }},
      {"quad.mc_samples",
       [&](const std::string &v) {
         const auto n = to_int(v);
         if (n <= 0)
           throw std::invalid_argument("quad.mc_samples must be positive");
         cfg.quad.mc_samples = static_cast<std::size_t>(n);
       }},
      {"quad.seed",
       [&](const std::string &v) {
         const auto n = to_int(v);
         if (n < 0)
           throw std::invalid_argument("quad.seed must be >= 0");
         cfg.quad.seed = static_cast<std::uint64_t>(n);
       }},
      {"quad.rel_tol", [&](const std::string &v) { cfg.quad.rel_tol = to_double(v); }},
      {"quad.threads", [&](const std::string &v) { cfg.quad.threads = static_cast<int>(to_int(v)); }},
      {"study.tolerance", [&](const std::string &v) { cfg.options.tolerance = to_double(v); }},
      {"study.divergence_factor", [&](const std::string &v) { cfg.options.divergence_factor = to_double(v); }},
      {"study.plateau_ratio", [&](const std::string &v) { cfg.options.plateau_ratio = to_double(v); }},
      {"study.flatten_tolerance", [&](const std::string &v) { cfg.options.flatten_tolerance = to_double(v); }},
      {"study.fit_points", [&](const std::string &v) { cfg.options.fit_points = static_cast<int>(to_int(v)); }},
      {"pointwise.x", [&](const std::string &v) { cfg.x = to_point(v); }},
      {"tails.i_sequence", [&](const std::string &v) { cfg.i_sequence = to_ints(v); }},
      {"double_limit.lambda_sequence", [&](const std::string &v) { cfg.lambda_sequence = to_doubles(v); }},
      {"output.path", [&](const std::string &v) { cfg.out_dir = v; }},
      {"output.format",
       [&](const std::string &v) {
         if (v == "csv")
           cfg.format = OutputFormat::csv;
         else if (v == "json")
           cfg.format = OutputFormat::json;
         else
           throw std::invalid_argument("output.format must be csv or json");
       }},
      {"output.verbosity",
       [&](const std::string &v) {
         cfg.verbosity = static_cast<int>(to_int(v));
         if (cfg.verbosity < 0 || cfg.verbosity > 2)
           throw std::invalid_argument("output.verbosity must be 0, 1 or 2");
       }},
    };

    std::istringstream is(text);
    std::string        raw;
    int                lineno = 0;
    while (std::getline(is, raw))
      {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#')
          continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
          throw ConfigError("expected 'key = value', got '" + line + "'", lineno);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
          throw ConfigError("empty key", lineno);
        if (value.empty())
          throw ConfigError("empty value for " + key, lineno);
        if (auto it = seen.find(key); it != seen.end())
          throw ConfigError("duplicate key " + key + " (first set on line " + std::to_string(it->second) + ")",
                            lineno);
        seen[key] = lineno;

        try
          {
            if (key.rfind("domain.", 0) == 0)
              cfg.domain[key.substr(7)] = value;
            else if (key.rfind("function.", 0) == 0)
              cfg.function[key.substr(9)] = value;
            else if (auto it = setters.find(key); it != setters.end())
              it->second(value);
            else
              throw std::invalid_argument("unknown key " + key);
          }
        catch (const ConfigError &)
          {
            throw;
          }
        catch (const std::exception &e)
          {
            throw ConfigError(e.what(), lineno);
          }
      }

    auto line_of = [&](const std::string &key) {
      auto it = seen.find(key);
      return it == seen.end() ? 0 : it->second;
    };
    auto fail = [&](const std::string &key, const std::string &msg) { throw ConfigError(msg, line_of(key)); };

    if (!seen.count("command"))
      throw ConfigError("missing required key command");

    // blocks: known kinds and keys
    const bool needs_problem = cfg.command != Command::constant;
    if (!cfg.domain.empty() || needs_problem)
      {
        if (!cfg.domain.count("kind"))
          throw ConfigError("missing required key domain.kind");
        auto kit = domain_keys().find(cfg.domain.at("kind"));
        if (kit == domain_keys().end())
          fail("domain.kind", "unknown domain.kind '" + cfg.domain.at("kind") + "'");
        for (const auto &[k, v] : cfg.domain)
          if (k != "kind" && !kit->second.count(k))
            fail("domain." + k, "unknown key domain." + k + " for kind " + kit->first);
      }
    if (!cfg.function.empty() || needs_problem)
      {
        if (!cfg.function.count("name"))
          throw ConfigError("missing required key function.name");
        auto fit = function_keys().find(cfg.function.at("name"));
        if (fit == function_keys().end())
          fail("function.name", "unknown function.name '" + cfg.function.at("name") + "'");
        for (const auto &[k, v] : cfg.function)
          if (k != "name" && !fit->second.count(k))
            fail("function." + k, "unknown key function." + k + " for " + fit->first);
      }

    // dimension
    int inferred = cfg.domain.empty() ? 0 : infer_dim(cfg.domain);
    if (cfg.dim == 0)
      cfg.dim = inferred;
    if (cfg.dim == 0)
      throw ConfigError("missing required key N (dimension cannot be inferred)");
    if (inferred != 0 && inferred != cfg.dim)
      fail("N", "N = " + std::to_string(cfg.dim) + " but the domain has dimension " + std::to_string(inferred));

    // sequences and command-specific defaults
    switch (cfg.command)
      {
        case Command::study:
        case Command::pointwise:
        case Command::double_limit:
          if (!has_s_seq)
            cfg.s_sequence = dyadic_s_sequence(1, 10);
          break;
        case Command::detect:
          if (!has_s_seq)
            cfg.s_sequence = detector_s_sequence();
          break;
        case Command::embedding:
          if (!has_s_seq)
            cfg.s_sequence = cfg.spec.q <= cfg.spec.p ? std::vector<double>{cfg.spec.s}
                                                      : std::vector<double>{0.5, 0.9, 0.99, 0.999};
          break;
        default: break;
      }
    if (cfg.command == Command::tails && cfg.i_sequence.empty())
      cfg.i_sequence = {2, 4, 8, 16};
    if (cfg.command == Command::double_limit && cfg.lambda_sequence.empty())
      cfg.lambda_sequence = {0.4, 0.2, 0.1};
    (void)has_s;

    try
      {
        cfg.spec.validate();
      }
    catch (const std::exception &e)
      {
        const std::string msg = e.what();
        std::string       key = "spec.s";
        for (const char *k : {"spec.tau", "spec.R", "spec.p", "spec.q", "spec.s"})
          if (msg.find(std::string(k) + " ") != std::string::npos)
            {
              key = k;
              break;
            }
        if (!seen.count(key) && key == "spec.R")
          key = "spec.variant";
        fail(key, msg);
      }
    try
      {
        cfg.quad.validate();
      }
    catch (const std::exception &e)
      {
        throw ConfigError(e.what());
      }
    if (!(cfg.options.tolerance > 0.0) || !(cfg.options.divergence_factor > 1.0) ||
        !(cfg.options.plateau_ratio >= 1.0) || !(cfg.options.flatten_tolerance > 0.0) || cfg.options.fit_points < 2)
      throw ConfigError("study thresholds out of range (tolerance > 0, divergence_factor > 1, plateau_ratio >= 1, "
                        "flatten_tolerance > 0, fit_points >= 2)");

    if (cfg.command == Command::pointwise && !cfg.x)
      throw ConfigError("missing required key pointwise.x");
    if (cfg.x && cfg.x->dim() != cfg.dim)
      fail("pointwise.x", "pointwise.x must have N coordinates");
    if (cfg.command == Command::embedding && cfg.spec.variant != Variant::hat)
      fail("spec.variant", "the embedding command needs spec.variant = hat with a finite spec.R");
    if (cfg.command == Command::double_limit && cfg.spec.p != cfg.spec.q)
      fail("spec.q", "double-limit requires spec.p = spec.q");

    if (!cfg.function.empty())
      function_defaults(cfg.function, cfg.dim);

    // build once to surface parameter errors with their keys
    if (!cfg.domain.empty())
      {
        try
          {
            const Domain d = make_domain(cfg);
            if (!d.bounded() && !cfg.quad.outer.truncation_index && cfg.command != Command::tails)
              fail("domain.kind", "unbounded domain " + d.describe() + " needs quad.truncation");
            if (!d.bounded())
              cfg.warnings.push_back("unbounded domain: integrals run over the truncation Omega cap B(0, i)");
          }
        catch (const ConfigError &)
          {
            throw;
          }
        catch (const std::exception &e)
          {
            fail("domain.kind", e.what());
          }
      }
    if (!cfg.function.empty())
      {
        try
          {
            (void)make_function(cfg);
          }
        catch (const std::exception &e)
          {
            fail("function.name", e.what());
          }
      }
    for (auto &w : cfg.spec.warnings(cfg.dim))
      cfg.warnings.push_back(std::move(w));
    return cfg;
  }

  std::vector<std::pair<std::string, std::string>> resolved(const RunConfig &cfg)
  {
    std::vector<std::pair<std::string, std::string>> r;
    r.emplace_back("command", to_string(cfg.command));
    r.emplace_back("N", std::to_string(cfg.dim));
    for (const auto &[k, v] : cfg.domain)
      r.emplace_back("domain." + k, v);
    for (const auto &[k, v] : cfg.function)
      r.emplace_back("function." + k, v);
    r.emplace_back("spec.s", num(cfg.spec.s));
    if (!cfg.s_sequence.empty())
      r.emplace_back("spec.s_sequence", doubles_str(cfg.s_sequence));
    r.emplace_back("spec.p", num(cfg.spec.p));
    r.emplace_back("spec.q", num(cfg.spec.q));
    r.emplace_back("spec.tau", num(cfg.spec.tau));
    r.emplace_back("spec.R", num(cfg.spec.R));
    r.emplace_back("spec.variant", to_string(cfg.spec.variant));
    r.emplace_back("quad.sphere_order", std::to_string(cfg.quad.sphere_order));
    r.emplace_back("quad.radial_nodes", std::to_string(cfg.quad.radial_nodes));
    r.emplace_back("quad.radial_levels", std::to_string(cfg.quad.radial_levels));
    r.emplace_back("quad.outer", to_string(cfg.quad.outer.kind));
    r.emplace_back("quad.resolution", std::to_string(cfg.quad.outer.resolution));
    r.emplace_back("quad.boundary_refine", std::to_string(cfg.quad.outer.boundary_refine));
    r.emplace_back("quad.outer_radial", std::to_string(cfg.quad.outer.radial));
    r.emplace_back("quad.outer_angular", std::to_string(cfg.quad.outer.angular));
    r.emplace_back("quad.outer_samples", std::to_string(cfg.quad.outer.samples));
    r.emplace_back("quad.truncation",
                   cfg.quad.outer.truncation_index ? std::to_string(*cfg.quad.outer.truncation_index) : "none");
    r.emplace_back("quad.mc_samples", std::to_string(cfg.quad.mc_samples));
    r.emplace_back("quad.seed", std::to_string(cfg.quad.seed));
    r.emplace_back("quad.rel_tol", num(cfg.quad.rel_tol));
    r.emplace_back("quad.threads", std::to_string(cfg.quad.threads));
    r.emplace_back("study.tolerance", num(cfg.options.tolerance));
    r.emplace_back("study.divergence_factor", num(cfg.options.divergence_factor));
    r.emplace_back("study.plateau_ratio", num(cfg.options.plateau_ratio));
    r.emplace_back("study.flatten_tolerance", num(cfg.options.flatten_tolerance));
    r.emplace_back("study.fit_points", std::to_string(cfg.options.fit_points));
    if (cfg.x)
      r.emplace_back("pointwise.x", point_str(*cfg.x));
    if (!cfg.i_sequence.empty())
      r.emplace_back("tails.i_sequence", ints_str(cfg.i_sequence));
    if (!cfg.lambda_sequence.empty())
      r.emplace_back("double_limit.lambda_sequence", doubles_str(cfg.lambda_sequence));
    r.emplace_back("output.path", cfg.out_dir);
    r.emplace_back("output.format", cfg.format == OutputFormat::csv ? "csv" : "json");
    r.emplace_back("output.verbosity", std::to_string(cfg.verbosity));
    return r;
  }

  namespace
  {
    using json = nlohmann::ordered_json;

    json opt(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

    json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

    std::string cell(const std::optional<double> &v) { return v ? num(*v) : std::string(); }

    struct Table
    {
      std::vector<std::string>              header;
      std::vector<std::vector<std::string>> rows;
    };

    Table s_table() { return {{"s", "one_minus_s", "raw_p_power", "scaled", "reference", "rel_error", "verdict"}, {}}; }

    void add_s_row(Table &t, double s, double raw, double scaled, const std::optional<double> &ref,
                   const std::string &verdict)
    {
      std::optional<double> rel;
      if (ref)
        rel = *ref != 0.0 ? std::abs(scaled - *ref) / std::abs(*ref) : std::abs(scaled);
      t.rows.push_back({num(s), num(1.0 - s), num(raw), num(scaled), cell(ref), cell(rel), verdict});
    }

    json study_json(const StudyReport &r)
    {
      json j;
      j["s_values"] = r.s_values;
      j["raw_values"] = r.raw_values;
      j["scaled_values"] = r.scaled_values;
      j["extrapolated_limit"] = r.extrapolated_limit;
      j["fit_residual"] = r.fit_residual;
      j["reference"] = opt(r.reference);
      j["relative_error"] = opt(r.relative_error);
      json tails = json::array();
      for (const auto &t : r.tail_masses)
        tails.push_back({{"i", t.i}, {"mass", t.mass}});
      j["tail_masses"] = tails;
      j["verdict"] = to_string(r.verdict);
      j["warnings"] = r.warnings;
      json prov = json::object();
      for (const auto &[k, v] : r.provenance)
        prov[k] = v;
      j["provenance"] = prov;
      return j;
    }

    void write_csv(const std::filesystem::path &path, const Table &t)
    {
      std::ofstream os(path);
      if (!os)
        throw std::runtime_error("cannot write " + path.string());
      for (std::size_t i = 0; i < t.header.size(); ++i)
        os << (i ? "," : "") << t.header[i];
      os << '\n';
      for (const auto &row : t.rows)
        {
          for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << row[i];
          os << '\n';
        }
      if (!os)
        throw std::runtime_error("write failed for " + path.string());
    }

    bool good_verdict(const std::string &v)
    {
      return v == "converged" || v == "bounded_suggests_w1p" || v == "satisfied";
    }
  } // namespace

  RunResult run(const RunConfig &cfg, bool assert_verdict, std::ostream &log)
  {
    json report;
    report["command"] = to_string(cfg.command);
    json config = json::object();
    for (const auto &[k, v] : resolved(cfg))
      config[k] = v;
    report["config"] = config;
    json warnings = cfg.warnings;

    Table       table = s_table();
    json        result;
    std::string verdict = "n/a";
    std::string summary;

    std::optional<Domain>       domain;
    std::optional<TestFunction> f;
    if (cfg.command != Command::constant)
      {
        domain = make_domain(cfg);
        f = make_function(cfg);
      }

    switch (cfg.command)
      {
        case Command::constant:
          {
            const double c_closed = sphere_abs_moment(cfg.dim, cfg.spec.q);
            const double k = bbm_constant(cfg.dim, cfg.spec.p, cfg.spec.q);
            result["N"] = cfg.dim;
            result["p"] = cfg.spec.p;
            result["q"] = cfg.spec.q;
            result["C_Nq"] = c_closed;
            result["K"] = k;
            table = {{"N", "p", "q", "C_Nq", "K"}, {}};
            table.rows.push_back({std::to_string(cfg.dim), num(cfg.spec.p), num(cfg.spec.q), num(c_closed), num(k)});
            summary = num(k);
            break;
          }
        case Command::seminorm:
          {
            const auto   nodes = sample_domain(*domain, cfg.quad.outer, cfg.quad.seed);
            const double raw = seminorm_p_on(*f, *domain, nodes, cfg.spec, cfg.quad);
            const double scaled = std::pow(1.0 - cfg.spec.s, cfg.spec.p / cfg.spec.q) * raw;
            std::optional<double> ref;
            if (f->has_gradient() && !f->discontinuous())
              ref = bbm_constant(cfg.dim, cfg.spec.p, cfg.spec.q) * w1p_seminorm_on(*f, nodes, cfg.spec.p);
            add_s_row(table, cfg.spec.s, raw, scaled, ref, verdict);
            result["s"] = cfg.spec.s;
            result["raw_p_power"] = raw;
            result["scaled"] = scaled;
            result["reference"] = opt(ref);
            result["outer_nodes"] = nodes.size();
            summary = "[f]^p = " + num(raw);
            break;
          }
        case Command::study:
          {
            const auto r = convergence_study(*f, *domain, cfg.spec, cfg.s_sequence, cfg.quad, cfg.options);
            verdict = to_string(r.verdict);
            for (std::size_t k = 0; k < r.s_values.size(); ++k)
              add_s_row(table, r.s_values[k], r.raw_values[k], r.scaled_values[k], r.reference, verdict);
            result = study_json(r);
            summary = "limit = " + num(r.extrapolated_limit) + (r.reference ? ", reference = " + num(*r.reference) : "");
            break;
          }
        case Command::pointwise:
          {
            const auto r = pointwise_limit_check(*f, *domain, *cfg.x, cfg.spec, cfg.s_sequence, cfg.quad, cfg.options);
            verdict = to_string(r.verdict);
            for (std::size_t k = 0; k < r.s_values.size(); ++k)
              add_s_row(table, r.s_values[k], r.scaled_values[k] / (1.0 - r.s_values[k]), r.scaled_values[k],
                        r.target, verdict);
            result["x"] = point_str(r.x);
            result["delta"] = r.delta;
            result["s_values"] = r.s_values;
            result["scaled_values"] = r.scaled_values;
            result["target"] = r.target;
            result["extrapolated_limit"] = r.extrapolated_limit;
            result["verdict"] = verdict;
            summary = "last = " + num(r.scaled_values.back()) + ", target = " + num(r.target);
            break;
          }
        case Command::embedding:
          {
            const auto r = embedding_bound_check(*f, *domain, cfg.spec, cfg.quad, cfg.s_sequence, cfg.options);
            verdict = r.satisfied ? "satisfied" : "violated";
            json rows = json::array();
            for (const auto &row : r.rows)
              {
                const std::string rv = row.satisfied ? (*row.satisfied ? "satisfied" : "violated") : verdict;
                add_s_row(table, row.s, row.lhs / std::pow(1.0 - row.s, cfg.spec.p / cfg.spec.q), row.lhs, row.rhs,
                          rv);
                rows.push_back({{"s", row.s},
                                {"lhs", row.lhs},
                                {"w1p", row.w1p},
                                {"rhs", opt(row.rhs)},
                                {"rhs_with_sphere", opt(row.rhs_with_sphere)},
                                {"ratio", row.ratio},
                                {"satisfied", row.satisfied ? json(*row.satisfied) : json(nullptr)}});
              }
            result["explicit_constant"] = r.explicit_constant;
            result["rows"] = rows;
            result["satisfied"] = r.satisfied;
            for (const auto &w : r.warnings)
              warnings.push_back(w);
            summary = verdict;
            break;
          }
        case Command::detect:
          {
            const auto r = main2_detector(*f, *domain, cfg.spec, cfg.s_sequence, cfg.quad, cfg.options);
            verdict = to_string(r.verdict);
            for (std::size_t k = 0; k < r.s_values.size(); ++k)
              {
                const double s = r.s_values[k];
                add_s_row(table, s, r.values[k] / std::pow(1.0 - s, cfg.spec.p / cfg.spec.q), r.values[k],
                          std::nullopt, verdict);
              }
            result["s_values"] = r.s_values;
            result["values"] = r.values;
            result["growth"] = finite_or_null(r.growth);
            result["verdict"] = verdict;
            result["notes"] = r.notes;
            summary = "growth = " + num(r.growth);
            break;
          }
        case Command::tails:
          {
            const auto r = tail_mass_diagnostic(*f, *domain, cfg.spec, cfg.spec.s, cfg.i_sequence, cfg.quad);
            table = {{"i", "tail_mass", "total", "fraction"}, {}};
            json tails = json::array();
            bool nonincreasing = true;
            for (std::size_t k = 0; k < r.tails.size(); ++k)
              {
                const auto &t = r.tails[k];
                const double frac = r.total > 0.0 ? t.mass / r.total : 0.0;
                table.rows.push_back({std::to_string(t.i), num(t.mass), num(r.total), num(frac)});
                tails.push_back({{"i", t.i}, {"mass", t.mass}, {"fraction", frac}});
                if (k > 0 && t.mass > r.tails[k - 1].mass * (1.0 + 2.0 * cfg.quad.rel_tol))
                  nonincreasing = false;
              }
            verdict = nonincreasing ? "converged" : "inconclusive";
            result["s"] = r.s;
            result["total"] = r.total;
            result["truncation_index"] = r.truncation_index;
            result["tail_masses"] = tails;
            result["nonincreasing"] = nonincreasing;
            for (const auto &w : r.warnings)
              warnings.push_back(w);
            summary = "total = " + num(r.total);
            break;
          }
        case Command::double_limit:
          {
            const auto r = double_limit_study(*f, *domain, cfg.spec.p, cfg.lambda_sequence, cfg.s_sequence, cfg.quad,
                                              cfg.options);
            table = {{"lambda", "s", "one_minus_s", "raw_p_power", "scaled", "reference", "rel_error", "verdict"}, {}};
            json stages = json::array();
            bool all_converged = true;
            for (const auto &st : r.stages)
              {
                const auto &sr = st.study;
                all_converged = all_converged && sr.verdict == Verdict::converged;
                for (std::size_t k = 0; k < sr.s_values.size(); ++k)
                  {
                    std::optional<double> rel;
                    if (sr.reference && *sr.reference != 0.0)
                      rel = std::abs(sr.scaled_values[k] - *sr.reference) / *sr.reference;
                    table.rows.push_back({num(st.lambda), num(sr.s_values[k]), num(1.0 - sr.s_values[k]),
                                          num(sr.raw_values[k]), num(sr.scaled_values[k]), cell(sr.reference),
                                          cell(rel), to_string(sr.verdict)});
                  }
                stages.push_back({{"lambda", st.lambda}, {"study", study_json(sr)}});
              }
            verdict = all_converged && r.increasing ? "converged" : "inconclusive";
            result["stages"] = stages;
            result["reference"] = opt(r.reference);
            result["relative_error"] = opt(r.relative_error);
            result["increasing"] = r.increasing;
            result["verdict"] = verdict;
            summary = "last stage = " + num(r.stages.back().study.extrapolated_limit) +
                      (r.reference ? ", reference = " + num(*r.reference) : "");
            break;
          }
      }

    report["warnings"] = warnings;
    report["result"] = result;
    report["verdict"] = verdict;

    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    if (cfg.format == OutputFormat::csv)
      write_csv(dir / "results.csv", table);
    {
      std::ofstream os(dir / "report.json");
      if (!os)
        throw std::runtime_error("cannot write " + (dir / "report.json").string());
      os << report.dump(2) << '\n';
    }

    if (cfg.verbosity >= 1)
      {
        for (const auto &w : warnings)
          log << "warning: " << w.get<std::string>() << '\n';
        log << to_string(cfg.command) << ": " << summary << '\n';
      }
    if (cfg.verbosity >= 2)
      for (const auto &row : table.rows)
        {
          for (std::size_t i = 0; i < row.size(); ++i)
            log << (i ? "  " : "  ") << table.header[i] << "=" << row[i];
          log << '\n';
        }
    if (cfg.command == Command::constant && cfg.verbosity == 0)
      log << summary << '\n';
    if (cfg.command != Command::constant)
      log << "verdict: " << verdict << '\n';

    RunResult res;
    res.verdict = verdict;
    res.exit_code = (assert_verdict && cfg.command != Command::constant && cfg.command != Command::seminorm &&
                     !good_verdict(verdict))
                      ? 1
                      : 0;
    return res;
  }

} // namespace fracsob::cli
