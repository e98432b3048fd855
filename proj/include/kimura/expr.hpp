#ifndef KIMURA_EXPR_HPP
#define KIMURA_EXPR_HPP

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace kimura {

// Small arithmetic-expression parser for config files: +, -, *, /, ^,
// parentheses, numeric literals, named variables, and a few functions
// (sqrt, exp, log, sin, cos, abs).  Parsed once into a tree, evaluated
// against a variable map.
class Expr {
 public:
   using Env = std::map<std::string, double>;

   explicit Expr(const std::string& text) : text_(text), pos_(0) {
      root_ = parse_sum();
      skip_ws();
      if (pos_ != text_.size())
         throw std::invalid_argument("expr: trailing input at '" + text_.substr(pos_) + "'");
   }

   double eval(const Env& env) const { return root_->eval(env); }

 private:
   struct Node {
      virtual ~Node() = default;
      virtual double eval(const Env&) const = 0;
   };
   using NodePtr = std::unique_ptr<Node>;

   struct Const : Node {
      double v;
      explicit Const(double v_) : v(v_) {}
      double eval(const Env&) const override { return v; }
   };
   struct Var : Node {
      std::string name;
      explicit Var(std::string n) : name(std::move(n)) {}
      double eval(const Env& env) const override {
         auto it = env.find(name);
         if (it == env.end())
            throw std::invalid_argument("expr: unknown variable '" + name + "'");
         return it->second;
      }
   };
   struct Bin : Node {
      char op;
      NodePtr l, r;
      Bin(char o, NodePtr a, NodePtr b) : op(o), l(std::move(a)), r(std::move(b)) {}
      double eval(const Env& env) const override {
         double a = l->eval(env), b = r->eval(env);
         switch (op) {
            case '+': return a + b;
            case '-': return a - b;
            case '*': return a * b;
            case '/': return a / b;
            case '^': return std::pow(a, b);
         }
         throw std::logic_error("expr: bad op");
      }
   };
   struct Neg : Node {
      NodePtr l;
      explicit Neg(NodePtr a) : l(std::move(a)) {}
      double eval(const Env& env) const override { return -l->eval(env); }
   };
   struct Fun : Node {
      std::string name;
      NodePtr arg;
      Fun(std::string n, NodePtr a) : name(std::move(n)), arg(std::move(a)) {}
      double eval(const Env& env) const override {
         double v = arg->eval(env);
         if (name == "sqrt") return std::sqrt(v);
         if (name == "exp") return std::exp(v);
         if (name == "log" || name == "ln") return std::log(v);
         if (name == "sin") return std::sin(v);
         if (name == "cos") return std::cos(v);
         if (name == "abs") return std::abs(v);
         throw std::invalid_argument("expr: unknown function '" + name + "'");
      }
   };

   void skip_ws() {
      while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
         ++pos_;
   }
   bool eat(char c) {
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == c) {
         ++pos_;
         return true;
      }
      return false;
   }
   char peek() {
      skip_ws();
      return pos_ < text_.size() ? text_[pos_] : '\0';
   }

   NodePtr parse_sum() {
      NodePtr n = parse_prod();
      while (true) {
         if (eat('+'))
            n = std::make_unique<Bin>('+', std::move(n), parse_prod());
         else if (eat('-'))
            n = std::make_unique<Bin>('-', std::move(n), parse_prod());
         else
            return n;
      }
   }
   NodePtr parse_prod() {
      NodePtr n = parse_pow();
      while (true) {
         if (eat('*'))
            n = std::make_unique<Bin>('*', std::move(n), parse_pow());
         else if (eat('/'))
            n = std::make_unique<Bin>('/', std::move(n), parse_pow());
         else
            return n;
      }
   }
   NodePtr parse_pow() {
      NodePtr n = parse_atom();
      if (eat('^')) return std::make_unique<Bin>('^', std::move(n), parse_pow());
      return n;
   }
   NodePtr parse_atom() {
      skip_ws();
      if (eat('-')) return std::make_unique<Neg>(parse_atom());
      if (eat('+')) return parse_atom();
      if (eat('(')) {
         NodePtr n = parse_sum();
         if (!eat(')')) throw std::invalid_argument("expr: expected ')'");
         return n;
      }
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
         std::size_t end = 0;
         double v = std::stod(text_.substr(pos_), &end);
         pos_ += end;
         return std::make_unique<Const>(v);
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
         std::string name;
         while (pos_ < text_.size() &&
                (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            name.push_back(text_[pos_++]);
         if (eat('(')) {
            NodePtr a = parse_sum();
            if (!eat(')')) throw std::invalid_argument("expr: expected ')' after function arg");
            return std::make_unique<Fun>(name, std::move(a));
         }
         return std::make_unique<Var>(name);
      }
      throw std::invalid_argument("expr: unexpected character '" + std::string(1, c) + "'");
   }

   std::string text_;
   std::size_t pos_;
   NodePtr root_;
};

}  // namespace kimura

#endif  // KIMURA_EXPR_HPP
