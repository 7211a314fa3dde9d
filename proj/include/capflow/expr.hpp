#pragma once

#include "dual.hpp"
#include "jet.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <string>

namespace capflow {

struct ParseError : std::runtime_error {
  std::size_t offset;
  ParseError(const std::string& msg, std::size_t off)
      : std::runtime_error(msg + " at offset " + std::to_string(off)), offset(off) {}
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Node {
  enum class Kind { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sqrt, Abs };
  Kind kind = Kind::Const;
  double value = 0.0;
  int var = 0;
  long p = 1, q = 1;  // rational exponent for Pow
  std::shared_ptr<const Node> a, b;
};
using NodePtr = std::shared_ptr<const Node>;

struct Expression {
  NodePtr root;
  int arity = 3;
  bool smooth = true;
};

namespace detail {

inline NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

inline bool has_var(const Node& n) {
  if (n.kind == Node::Kind::Var) return true;
  return (n.a && has_var(*n.a)) || (n.b && has_var(*n.b));
}

inline bool has_abs(const Node& n) {
  if (n.kind == Node::Kind::Abs) return true;
  return (n.a && has_abs(*n.a)) || (n.b && has_abs(*n.b));
}

double eval_const(const Node& n);

class Parser {
 public:
  Parser(const std::string& s, int arity) : s_(s), arity_(arity) {}

  NodePtr run() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
    return e;
  }

 private:
  const std::string& s_;
  int arity_;
  std::size_t pos_ = 0;

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr l = term();
    for (;;) {
      if (eat('+')) l = make(Node::Kind::Add, l, term());
      else if (eat('-')) l = make(Node::Kind::Sub, l, term());
      else return l;
    }
  }

  NodePtr term() {
    NodePtr l = unary();
    for (;;) {
      if (eat('*')) l = make(Node::Kind::Mul, l, unary());
      else if (eat('/')) l = make(Node::Kind::Div, l, unary());
      else return l;
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Node::Kind::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    skip();
    if (pos_ < s_.size() && s_[pos_] == '^') {
      const std::size_t at = pos_;
      ++pos_;
      NodePtr ex = unary();
      if (has_var(*ex)) throw ParseError("exponent must be constant", at);
      const double e = eval_const(*ex);
      long q = 0, p = 0;
      for (long cand = 1; cand <= 10000; ++cand) {
        const double pe = e * static_cast<double>(cand);
        if (std::abs(pe - std::round(pe)) < 1e-9 * static_cast<double>(cand)) {
          q = cand;
          p = std::lround(pe);
          break;
        }
      }
      if (q == 0) throw ParseError("exponent must be rational", at);
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Pow;
      n->a = base;
      n->p = p;
      n->q = q;
      return n;
    }
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) throw ParseError("bad number", pos_);
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Const;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      skip();
      if (pos_ < s_.size() && s_[pos_] == '(') {
        Node::Kind k;
        if (id == "sqrt") k = Node::Kind::Sqrt;
        else if (id == "abs") k = Node::Kind::Abs;
        else throw ParseError("unsupported function '" + id + "'", start);
        ++pos_;
        NodePtr arg = expr();
        if (!eat(')')) throw ParseError("expected ')'", pos_);
        return make(k, arg);
      }
      int idx = -1;
      if (id == "x") idx = 0;
      else if (id == "y") idx = 1;
      else if (id == "z") idx = 2;
      else if (id == "w") idx = 3;
      if (idx < 0 || idx >= arity_) throw ParseError("unknown identifier '" + id + "'", start);
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Var;
      n->var = idx;
      return n;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }
};

template <typename T>
T ipow(const T& x, long p) {
  if (p == 0) return lift<T>(1.0);
  if (p < 0) return lift<T>(1.0) / ipow(x, -p);
  T r = x;
  for (long i = 1; i < p; ++i) r = r * x;
  return r;
}

template <typename T>
T eval(const Node& n, const T* vars) {
  using K = Node::Kind;
  switch (n.kind) {
    case K::Const: return lift<T>(n.value);
    case K::Var: return vars[n.var];
    case K::Add: return eval(*n.a, vars) + eval(*n.b, vars);
    case K::Sub: return eval(*n.a, vars) - eval(*n.b, vars);
    case K::Mul: return eval(*n.a, vars) * eval(*n.b, vars);
    case K::Div: {
      T den = eval(*n.b, vars);
      if (primal(den) == 0.0) throw DomainError("division by zero");
      return eval(*n.a, vars) / den;
    }
    case K::Neg: return -eval(*n.a, vars);
    case K::Pow: {
      T u = eval(*n.a, vars);
      if (n.q == 1) {
        if (n.p < 0 && primal(u) == 0.0) throw DomainError("division by zero");
        return ipow(u, n.p);
      }
      if (primal(u) <= 0.0) throw DomainError("fractional power of non-positive base");
      return exp(lift<T>(static_cast<double>(n.p) / static_cast<double>(n.q)) * log(u));
    }
    case K::Sqrt: {
      T u = eval(*n.a, vars);
      if (primal(u) < 0.0) throw DomainError("sqrt of negative value");
      return sqrt(u);
    }
    case K::Abs: {
      T u = eval(*n.a, vars);
      return primal(u) < 0.0 ? -u : u;
    }
  }
  return lift<T>(0.0);
}

inline double eval_const(const Node& n) { return eval<double>(n, nullptr); }

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string print(const Node& n) {
  using K = Node::Kind;
  static const char* names[] = {"x", "y", "z", "w"};
  switch (n.kind) {
    case K::Const: return n.value < 0 ? "(-" + fmt(-n.value) + ")" : fmt(n.value);
    case K::Var: return names[n.var];
    case K::Add: return "(" + print(*n.a) + "+" + print(*n.b) + ")";
    case K::Sub: return "(" + print(*n.a) + "-" + print(*n.b) + ")";
    case K::Mul: return "(" + print(*n.a) + "*" + print(*n.b) + ")";
    case K::Div: return "(" + print(*n.a) + "/" + print(*n.b) + ")";
    case K::Neg: return "(-" + print(*n.a) + ")";
    case K::Pow:
      return "(" + print(*n.a) + "^(" + std::to_string(n.p) + "/" + std::to_string(n.q) + "))";
    case K::Sqrt: return "sqrt(" + print(*n.a) + ")";
    case K::Abs: return "abs(" + print(*n.a) + ")";
  }
  return "";
}

inline bool equal(const Node& x, const Node& y) {
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case Node::Kind::Const: return x.value == y.value;
    case Node::Kind::Var: return x.var == y.var;
    case Node::Kind::Pow:
      if (x.p * y.q != y.p * x.q) return false;
      break;
    default: break;
  }
  if (static_cast<bool>(x.a) != static_cast<bool>(y.a) || static_cast<bool>(x.b) != static_cast<bool>(y.b)) return false;
  return (!x.a || equal(*x.a, *y.a)) && (!x.b || equal(*x.b, *y.b));
}

}  // namespace detail

inline Expression parse(const std::string& source, int arity = 3) {
  if (arity < 1 || arity > 4) throw std::invalid_argument("arity must be in 1..4");
  detail::Parser p(source, arity);
  Expression e;
  e.root = p.run();
  e.arity = arity;
  e.smooth = !detail::has_abs(*e.root);
  return e;
}

inline std::string print(const Expression& e) { return detail::print(*e.root); }

inline bool same_ast(const Expression& a, const Expression& b) {
  return a.arity == b.arity && detail::equal(*a.root, *b.root);
}

template <int D>
double eval_value(const Expression& e, const Vec<D>& x) {
  double v[4] = {0, 0, 0, 0};
  for (int i = 0; i < D; ++i) v[i] = x[i];
  return detail::eval<double>(*e.root, v);
}

namespace detail {

template <int D>
Jet<D> jet_fd(const Expression& e, const Vec<D>& x, int order) {
  Jet<D> r;
  r.order = order;
  r.value = eval_value<D>(e, x);
  const double s = std::max(1.0, x.norm());
  auto f = [&](const Vec<D>& y) { return eval_value<D>(e, y); };
  auto E = [](int i) { Vec<D> v = Vec<D>::Zero(); v[i] = 1.0; return v; };
  if (order >= 1) {
    const double h = 1e-6 * s;
    for (int i = 0; i < D; ++i) r.grad[i] = (f(x + h * E(i)) - f(x - h * E(i))) / (2 * h);
  }
  if (order >= 2) {
    const double h = 1e-4 * s;
    for (int i = 0; i < D; ++i)
      for (int j = i; j < D; ++j) {
        double acc = 0;
        for (int a = -1; a <= 1; a += 2)
          for (int b = -1; b <= 1; b += 2) acc += a * b * f(x + h * (a * E(i) + b * E(j)));
        r.hess(i, j) = r.hess(j, i) = acc / (4 * h * h);
      }
  }
  if (order >= 3) {
    const double h = 1e-3 * s;
    for (int i = 0; i < D; ++i)
      for (int j = i; j < D; ++j)
        for (int k = j; k < D; ++k) {
          double acc = 0;
          for (int a = -1; a <= 1; a += 2)
            for (int b = -1; b <= 1; b += 2)
              for (int c = -1; c <= 1; c += 2)
                acc += a * b * c * f(x + h * (a * E(i) + b * E(j) + c * E(k)));
          r.set_sym(i, j, k, acc / (8 * h * h * h));
        }
  }
  return r;
}

}  // namespace detail

// Value and derivatives up to `order` (0..3).
template <int D>
Jet<D> eval_jet(const Expression& e, const Vec<D>& x, int order = 3) {
  if (e.arity != D) throw std::invalid_argument("expression arity does not match point dimension");
  if (!e.smooth) return detail::jet_fd<D>(e, x, order);
  Jet<D> r;
  r.order = order;
  if (order == 0) {
    r.value = eval_value<D>(e, x);
  } else if (order == 1) {
    using T = Dual<double>;
    for (int i = 0; i < D; ++i) {
      T v[D];
      for (int m = 0; m < D; ++m) v[m] = {x[m], m == i ? 1.0 : 0.0};
      const T out = detail::eval<T>(*e.root, v);
      r.value = out.a;
      r.grad[i] = out.b;
    }
  } else if (order == 2) {
    using T1 = Dual<double>;
    using T = Dual<T1>;
    for (int i = 0; i < D; ++i)
      for (int j = i; j < D; ++j) {
        T v[D];
        for (int m = 0; m < D; ++m) v[m] = {{x[m], m == j ? 1.0 : 0.0}, {m == i ? 1.0 : 0.0, 0.0}};
        const T out = detail::eval<T>(*e.root, v);
        r.value = out.a.a;
        r.grad[j] = out.a.b;
        r.grad[i] = out.b.a;
        r.hess(i, j) = r.hess(j, i) = out.b.b;
      }
  } else {
    using T1 = Dual<double>;
    using T2 = Dual<T1>;
    using T = Dual<T2>;
    for (int i = 0; i < D; ++i)
      for (int j = i; j < D; ++j)
        for (int k = j; k < D; ++k) {
          T v[D];
          for (int m = 0; m < D; ++m)
            v[m] = {{{x[m], m == k ? 1.0 : 0.0}, {m == j ? 1.0 : 0.0, 0.0}},
                    {{m == i ? 1.0 : 0.0, 0.0}, {0.0, 0.0}}};
          const T out = detail::eval<T>(*e.root, v);
          r.value = out.a.a.a;
          r.grad[k] = out.a.a.b;
          r.grad[j] = out.a.b.a;
          r.grad[i] = out.b.a.a;
          r.hess(j, k) = r.hess(k, j) = out.a.b.b;
          r.hess(i, k) = r.hess(k, i) = out.b.a.b;
          r.hess(i, j) = r.hess(j, i) = out.b.b.a;
          r.set_sym(i, j, k, out.b.b.b);
        }
  }
  auto finite = std::isfinite(r.value) && r.grad.allFinite() && r.hess.allFinite();
  for (double t : r.third) finite = finite && std::isfinite(t);
  if (!finite) throw DomainError("non-finite derivative");
  return r;
}

}  // namespace capflow
