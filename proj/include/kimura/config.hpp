#ifndef KIMURA_CONFIG_HPP
#define KIMURA_CONFIG_HPP

#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "kimura/expr.hpp"
#include "kimura/geometry.hpp"

namespace kimura {

// INI-style config: [section] headers, key = value lines, '#' comments.
struct Config {
   std::map<std::string, std::map<std::string, std::string>> sections;

   bool has(const std::string& sec, const std::string& key) const {
      auto it = sections.find(sec);
      return it != sections.end() && it->second.count(key) > 0;
   }
   const std::string& get(const std::string& sec, const std::string& key) const {
      auto it = sections.find(sec);
      if (it == sections.end())
         throw std::invalid_argument("config: missing section [" + sec + "]");
      auto jt = it->second.find(key);
      if (jt == it->second.end())
         throw std::invalid_argument("config: missing key '" + key + "' in [" + sec + "]");
      return jt->second;
   }
   std::string get_or(const std::string& sec, const std::string& key,
                      const std::string& dflt) const {
      return has(sec, key) ? get(sec, key) : dflt;
   }
   double get_double(const std::string& sec, const std::string& key) const {
      return std::stod(get(sec, key));
   }
   double get_double_or(const std::string& sec, const std::string& key, double dflt) const {
      return has(sec, key) ? get_double(sec, key) : dflt;
   }
   std::vector<double> get_doubles(const std::string& sec, const std::string& key) const {
      std::vector<double> out;
      std::stringstream ss(get(sec, key));
      std::string tok;
      while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
      return out;
   }
};

namespace detail {

inline std::string trim(const std::string& s) {
   std::size_t b = s.find_first_not_of(" \t\r\n");
   if (b == std::string::npos) return "";
   std::size_t e = s.find_last_not_of(" \t\r\n");
   return s.substr(b, e - b + 1);
}

}  // namespace detail

inline Config parse_config(std::istream& in) {
   Config cfg;
   std::string line, section;
   while (std::getline(in, line)) {
      std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[' && line.back() == ']') {
         section = detail::trim(line.substr(1, line.size() - 2));
         cfg.sections[section];
         continue;
      }
      std::size_t eq = line.find('=');
      if (eq == std::string::npos)
         throw std::invalid_argument("config: expected 'key = value': " + line);
      cfg.sections[section][detail::trim(line.substr(0, eq))] =
         detail::trim(line.substr(eq + 1));
   }
   return cfg;
}

inline Config load_config(const std::string& path) {
   std::ifstream in(path);
   if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
   return parse_config(in);
}

// --- operator construction from config ---------------------------------------
//
// [operator] instance = triangle | unit_square | custom.  Custom operators
// declare global coefficient expressions in x, y plus [face.*], [corner.*]
// and [chart.*] sections; chart letters are expressions in X, Y.  Named
// constants from [params] are available in every expression.
namespace detail {

inline CoeffFn coeff_from_expr(const std::string& text, const Expr::Env& params,
                               const char* v1, const char* v2) {
   auto ex = std::make_shared<Expr>(text);
   std::string n1 = v1, n2 = v2;
   return [ex, params, n1, n2](Vec2 p) {
      Expr::Env env = params;
      env[n1] = p.x;
      env[n2] = p.y;
      return ex->eval(env);
   };
}

}  // namespace detail

inline OperatorSpec load_operator(const Config& cfg) {
   std::string inst = cfg.get_or("operator", "instance", "custom");
   if (inst == "triangle")
      return triangle_instance(cfg.get_double_or("operator", "gamma12", 1.0),
                               cfg.get_double_or("operator", "gamma13", 1.0),
                               cfg.get_double_or("operator", "gamma23", 1.0));
   if (inst == "unit_square") return unit_square_instance();
   if (inst != "custom")
      throw std::invalid_argument("config: unknown operator instance '" + inst + "'");

   Expr::Env params;
   if (auto it = cfg.sections.find("params"); it != cfg.sections.end())
      for (const auto& [k, v] : it->second) params[k] = std::stod(v);

   OperatorSpec spec;
   spec.name = cfg.get_or("operator", "name", "custom");
   spec.A = detail::coeff_from_expr(cfg.get("operator", "A"), params, "x", "y");
   spec.B = detail::coeff_from_expr(cfg.get("operator", "B"), params, "x", "y");
   spec.C = detail::coeff_from_expr(cfg.get("operator", "C"), params, "x", "y");
   spec.D = detail::coeff_from_expr(cfg.get("operator", "D"), params, "x", "y");
   spec.E = detail::coeff_from_expr(cfg.get("operator", "E"), params, "x", "y");
   auto bb = cfg.get_doubles("operator", "bbox");
   if (bb.size() != 4) throw std::invalid_argument("config: bbox needs 4 numbers");
   spec.bbox = {bb[0], bb[1], bb[2], bb[3]};

   for (const auto& [sec, kv] : cfg.sections) {
      if (sec.rfind("face.", 0) == 0) {
         auto p0 = cfg.get_doubles(sec, "p0");
         auto p1 = cfg.get_doubles(sec, "p1");
         auto n = cfg.get_doubles(sec, "inward");
         double len = std::hypot(n[0], n[1]);
         spec.faces.push_back({sec.substr(5), {p0[0], p0[1]}, {p1[0], p1[1]},
                               {n[0] / len, n[1] / len},
                               boundary_class_from_name(cfg.get(sec, "class"))});
      } else if (sec.rfind("corner.", 0) == 0) {
         auto p = cfg.get_doubles(sec, "p");
         spec.corners.push_back({sec.substr(7), {p[0], p[1]},
                                 boundary_class_from_name(cfg.get(sec, "class"))});
      } else if (sec.rfind("chart.", 0) == 0) {
         Chart ch;
         ch.name = sec.substr(6);
         ch.cls = boundary_class_from_name(cfg.get(sec, "class"));
         auto m = cfg.get_doubles(sec, "map");
         if (m.size() != 4) throw std::invalid_argument("config: chart map needs 4 numbers");
         ch.M = {m[0], m[1], m[2], m[3]};
         auto o = cfg.get_doubles(sec, "origin");
         ch.p0 = {o[0], o[1]};
         auto d = cfg.get_doubles(sec, "domain");
         ch.dom = {d[0], d[1], d[2], d[3]};
         ch.a = detail::coeff_from_expr(cfg.get(sec, "a"), params, "X", "Y");
         ch.b = detail::coeff_from_expr(cfg.get(sec, "b"), params, "X", "Y");
         ch.c = detail::coeff_from_expr(cfg.get(sec, "c"), params, "X", "Y");
         ch.d = detail::coeff_from_expr(cfg.get(sec, "d"), params, "X", "Y");
         ch.e = detail::coeff_from_expr(cfg.get(sec, "e"), params, "X", "Y");
         spec.charts.push_back(ch);
      }
   }

   // convex domain: inside iff on the inner side of every declared face
   auto faces = spec.faces;
   spec.inside = [faces](Vec2 p, double m) {
      for (const Face& f : faces) {
         double s = (p.x - f.p0.x) * f.inward.x + (p.y - f.p0.y) * f.inward.y;
         if (s < m) return false;
      }
      return true;
   };
   validate_spec(spec);
   return spec;
}

}  // namespace kimura

#endif  // KIMURA_CONFIG_HPP
