#pragma once

// Tiny evaluator for the regime forms: numbers, variables, + - * / ^,
// log() exp() sqrt(), and the binary max operator "v".

#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace gztest {

class Expr {
 public:
  Expr(std::string s, const std::map<std::string, double>& vars) : s_(std::move(s)), vars_(vars) {}

  double eval() {
    pos_ = 0;
    double v = max_expr();
    skip();
    if (pos_ != s_.size()) throw std::runtime_error("trailing input in " + s_);
    return v;
  }

 private:
  std::string s_;
  const std::map<std::string, double>& vars_;
  std::size_t pos_ = 0;

  void skip() {
    while (pos_ < s_.size() && s_[pos_] == ' ') ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool eat_max() {
    skip();
    if (pos_ + 1 < s_.size() && s_[pos_] == 'v' && s_[pos_ + 1] == ' ') {
      ++pos_;
      return true;
    }
    return false;
  }
  double max_expr() {
    double v = sum();
    while (eat_max()) v = std::max(v, sum());
    return v;
  }
  double sum() {
    double v = product();
    for (;;) {
      if (eat('+')) v += product();
      else if (eat('-')) v -= product();
      else return v;
    }
  }
  double product() {
    double v = unary();
    for (;;) {
      if (eat('*')) v *= unary();
      else if (eat('/')) v /= unary();
      else return v;
    }
  }
  double unary() {
    if (eat('-')) return -unary();
    return power();
  }
  double power() {
    double b = atom();
    if (eat('^')) return std::pow(b, unary());
    return b;
  }
  double atom() {
    skip();
    if (eat('(')) {
      double v = max_expr();
      if (!eat(')')) throw std::runtime_error("missing ) in " + s_);
      return v;
    }
    if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      std::size_t used = 0;
      double v = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      return v;
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    std::string name = s_.substr(start, pos_ - start);
    if (name.empty()) throw std::runtime_error("bad token in " + s_);
    if (name == "log" || name == "exp" || name == "sqrt") {
      if (!eat('(')) throw std::runtime_error("call without ( in " + s_);
      double a = max_expr();
      if (!eat(')')) throw std::runtime_error("missing ) in " + s_);
      return name == "log" ? std::log(a) : name == "exp" ? std::exp(a) : std::sqrt(a);
    }
    auto it = vars_.find(name);
    if (it == vars_.end()) throw std::runtime_error("unknown variable " + name);
    return it->second;
  }
};

inline double eval(const std::string& s, const std::map<std::string, double>& vars) {
  return Expr(s, vars).eval();
}

}  // namespace gztest
