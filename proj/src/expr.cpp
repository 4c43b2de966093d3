#include "switchreg/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace switchreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Token {
  enum class Type { Number, Ident, Op, LParen, RParen, Comma, End };
  Type type = Type::End;
  double value = 0.0;
  std::string text;
  char op = 0;
  std::size_t pos = 0;
};

class Lexer {
public:
  explicit Lexer(const std::string& s) : s_(s) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

private:
  void advance() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
    tok_ = Token{};
    tok_.pos = i_;
    if (i_ >= s_.size()) {
      tok_.type = Token::Type::End;
      return;
    }
    char c = s_[i_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = i_;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      if (i_ < s_.size() && s_[i_] == '.') {
        ++i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      }
      if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
        std::size_t save = i_;
        ++i_;
        if (i_ < s_.size() && (s_[i_] == '+' || s_[i_] == '-')) ++i_;
        if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
          while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        } else {
          i_ = save;  // "2e" is the number 2 followed by the identifier e
        }
      }
      tok_.type = Token::Type::Number;
      tok_.text = s_.substr(start, i_ - start);
      tok_.value = std::strtod(tok_.text.c_str(), nullptr);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i_;
      while (i_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_'))
        ++i_;
      tok_.type = Token::Type::Ident;
      tok_.text = s_.substr(start, i_ - start);
      return;
    }
    ++i_;
    switch (c) {
      case '+': case '-': case '*': case '/': case '^':
        tok_.type = Token::Type::Op;
        tok_.op = c;
        return;
      case '(': tok_.type = Token::Type::LParen; return;
      case ')': tok_.type = Token::Type::RParen; return;
      case ',': tok_.type = Token::Type::Comma; return;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", tok_.pos);
    }
  }

  const std::string& s_;
  std::size_t i_ = 0;
  Token tok_;
};

class Parser {
public:
  explicit Parser(const std::string& text) : lex_(text) {}

  int run() {
    int root = parse_sum();
    if (lex_.peek().type != Token::Type::End)
      throw ParseError("trailing input", lex_.peek().pos);
    return root;
  }

  std::vector<Expression::Node> take_nodes() { return std::move(nodes_); }

private:
  using Node = Expression::Node;

  int add(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int parse_sum() {
    int left = parse_product();
    while (lex_.peek().type == Token::Type::Op &&
           (lex_.peek().op == '+' || lex_.peek().op == '-')) {
      Token t = lex_.take();
      int right = parse_product();
      Node n;
      n.kind = Expression::Kind::Binary;
      n.op = t.op;
      n.a = left;
      n.b = right;
      n.pos = t.pos;
      left = add(n);
    }
    return left;
  }

  int parse_product() {
    int left = parse_unary();
    while (lex_.peek().type == Token::Type::Op &&
           (lex_.peek().op == '*' || lex_.peek().op == '/')) {
      Token t = lex_.take();
      int right = parse_unary();
      Node n;
      n.kind = Expression::Kind::Binary;
      n.op = t.op;
      n.a = left;
      n.b = right;
      n.pos = t.pos;
      left = add(n);
    }
    return left;
  }

  int parse_unary() {
    if (lex_.peek().type == Token::Type::Op && lex_.peek().op == '-') {
      Token t = lex_.take();
      int child = parse_unary();
      Node n;
      n.kind = Expression::Kind::Unary;
      n.op = '-';
      n.a = child;
      n.pos = t.pos;
      return add(n);
    }
    return parse_power();
  }

  int parse_power() {
    int base = parse_atom();
    if (lex_.peek().type == Token::Type::Op && lex_.peek().op == '^') {
      Token t = lex_.take();
      int exp = parse_unary();  // right-associative, allows 2^-3
      Node n;
      n.kind = Expression::Kind::Binary;
      n.op = '^';
      n.a = base;
      n.b = exp;
      n.pos = t.pos;
      return add(n);
    }
    return base;
  }

  int parse_atom() {
    const Token& p = lex_.peek();
    switch (p.type) {
      case Token::Type::Number: {
        Token t = lex_.take();
        Node n;
        n.kind = Expression::Kind::Number;
        n.value = t.value;
        n.pos = t.pos;
        return add(n);
      }
      case Token::Type::Ident: {
        Token t = lex_.take();
        if (t.text == "pi") {
          Node n;
          n.kind = Expression::Kind::Number;
          n.value = kPi;
          n.pos = t.pos;
          return add(n);
        }
        if (t.text == "x" || t.text == "y" || t.text == "r") {
          Node n;
          n.kind = Expression::Kind::Variable;
          n.var = t.text == "x"   ? Expression::Var::X
                  : t.text == "y" ? Expression::Var::Y
                                  : Expression::Var::R;
          n.pos = t.pos;
          return add(n);
        }
        Expression::Func f;
        int arity;
        if (!lookup_func(t.text, f, arity))
          throw ParseError("unknown identifier '" + t.text + "'", t.pos);
        expect(Token::Type::LParen, "expected '('");
        int a = parse_sum();
        int b = -1;
        if (arity == 2) {
          expect(Token::Type::Comma, "expected ','");
          b = parse_sum();
        }
        expect(Token::Type::RParen, "expected ')'");
        Node n;
        n.kind = Expression::Kind::Call;
        n.func = f;
        n.a = a;
        n.b = b;
        n.pos = t.pos;
        return add(n);
      }
      case Token::Type::LParen: {
        lex_.take();
        int inner = parse_sum();
        expect(Token::Type::RParen, "expected ')'");
        return inner;
      }
      default:
        throw ParseError("expected expression", p.pos);
    }
  }

  void expect(Token::Type type, const char* msg) {
    if (lex_.peek().type != type) throw ParseError(msg, lex_.peek().pos);
    lex_.take();
  }

  static bool lookup_func(const std::string& name, Expression::Func& f, int& arity) {
    using F = Expression::Func;
    struct Entry { const char* name; F f; int arity; };
    static const Entry table[] = {
        {"sin", F::Sin, 1},  {"cos", F::Cos, 1},   {"ln", F::Ln, 1},
        {"exp", F::Exp, 1},  {"abs", F::Abs, 1},   {"sqrt", F::Sqrt, 1},
        {"min", F::Min, 2},  {"max", F::Max, 2},   {"atan2", F::Atan2, 2},
    };
    for (const Entry& e : table) {
      if (name == e.name) {
        f = e.f;
        arity = e.arity;
        return true;
      }
    }
    return false;
  }

  Lexer lex_;
  std::vector<Node> nodes_;
};

double eval_node(const Expression& e, int idx, double x, double y) {
  const Expression::Node& n = e.nodes()[idx];
  switch (n.kind) {
    case Expression::Kind::Number:
      return n.value;
    case Expression::Kind::Variable:
      switch (n.var) {
        case Expression::Var::X: return x;
        case Expression::Var::Y: return y;
        case Expression::Var::R: return std::sqrt(x * x + y * y);
      }
      return 0.0;
    case Expression::Kind::Unary:
      return -eval_node(e, n.a, x, y);
    case Expression::Kind::Binary: {
      double a = eval_node(e, n.a, x, y);
      double b = eval_node(e, n.b, x, y);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/':
          if (b == 0.0)
            throw EvalError("division by zero at position " + std::to_string(n.pos));
          return a / b;
        case '^':
          if (a < 0.0 && b != std::floor(b))
            throw EvalError("negative base with non-integer exponent at position " +
                            std::to_string(n.pos));
          if (a == 0.0 && b < 0.0)
            throw EvalError("division by zero at position " + std::to_string(n.pos));
          return std::pow(a, b);
      }
      return 0.0;
    }
    case Expression::Kind::Call: {
      double a = eval_node(e, n.a, x, y);
      switch (n.func) {
        case Expression::Func::Sin: return std::sin(a);
        case Expression::Func::Cos: return std::cos(a);
        case Expression::Func::Exp: return std::exp(a);
        case Expression::Func::Abs: return std::fabs(a);
        case Expression::Func::Ln:
          if (!(a > 0.0))
            throw EvalError("ln of non-positive value at position " +
                            std::to_string(n.pos));
          return std::log(a);
        case Expression::Func::Sqrt:
          if (a < 0.0)
            throw EvalError("sqrt of negative value at position " +
                            std::to_string(n.pos));
          return std::sqrt(a);
        case Expression::Func::Min:
          return std::fmin(a, eval_node(e, n.b, x, y));
        case Expression::Func::Max:
          return std::fmax(a, eval_node(e, n.b, x, y));
        case Expression::Func::Atan2:
          return std::atan2(a, eval_node(e, n.b, x, y));
      }
      return 0.0;
    }
  }
  return 0.0;
}

// Precedence levels used by the printer; parse_* mirrors these.
int precedence(const Expression& e, int idx) {
  const Expression::Node& n = e.nodes()[idx];
  switch (n.kind) {
    case Expression::Kind::Binary:
      switch (n.op) {
        case '+': case '-': return 1;
        case '*': case '/': return 2;
        case '^': return 4;
      }
      return 5;
    case Expression::Kind::Unary:
      return 3;
    default:
      return 5;
  }
}

const char* func_name(Expression::Func f) {
  switch (f) {
    case Expression::Func::Sin: return "sin";
    case Expression::Func::Cos: return "cos";
    case Expression::Func::Ln: return "ln";
    case Expression::Func::Exp: return "exp";
    case Expression::Func::Abs: return "abs";
    case Expression::Func::Sqrt: return "sqrt";
    case Expression::Func::Min: return "min";
    case Expression::Func::Max: return "max";
    case Expression::Func::Atan2: return "atan2";
  }
  return "?";
}

void print_node(const Expression& e, int idx, std::string& out);

void print_child(const Expression& e, int idx, bool parens, std::string& out) {
  if (parens) out += '(';
  print_node(e, idx, out);
  if (parens) out += ')';
}

void print_node(const Expression& e, int idx, std::string& out) {
  const Expression::Node& n = e.nodes()[idx];
  switch (n.kind) {
    case Expression::Kind::Number: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case Expression::Kind::Variable:
      out += (n.var == Expression::Var::X   ? "x"
              : n.var == Expression::Var::Y ? "y"
                                            : "r");
      return;
    case Expression::Kind::Unary:
      out += '-';
      // the operand of unary minus is parsed at power level, so anything
      // looser than ^ needs parentheses
      print_child(e, n.a, precedence(e, n.a) < 3, out);
      return;
    case Expression::Kind::Binary: {
      int p = precedence(e, idx);
      if (n.op == '^') {
        print_child(e, n.a, precedence(e, n.a) <= 4, out);
        out += '^';
        print_child(e, n.b, precedence(e, n.b) < 3, out);
      } else {
        print_child(e, n.a, precedence(e, n.a) < p, out);
        out += n.op;
        print_child(e, n.b, precedence(e, n.b) <= p, out);
      }
      return;
    }
    case Expression::Kind::Call:
      out += func_name(n.func);
      out += '(';
      print_node(e, n.a, out);
      if (n.b >= 0) {
        out += ", ";
        print_node(e, n.b, out);
      }
      out += ')';
      return;
  }
}

bool same_node(const Expression& a, int ia, const Expression& b, int ib) {
  const Expression::Node& na = a.nodes()[ia];
  const Expression::Node& nb = b.nodes()[ib];
  if (na.kind != nb.kind) return false;
  switch (na.kind) {
    case Expression::Kind::Number:
      return na.value == nb.value;
    case Expression::Kind::Variable:
      return na.var == nb.var;
    case Expression::Kind::Unary:
      return same_node(a, na.a, b, nb.a);
    case Expression::Kind::Binary:
      return na.op == nb.op && same_node(a, na.a, b, nb.a) &&
             same_node(a, na.b, b, nb.b);
    case Expression::Kind::Call:
      if (na.func != nb.func) return false;
      if (!same_node(a, na.a, b, nb.a)) return false;
      if ((na.b >= 0) != (nb.b >= 0)) return false;
      return na.b < 0 || same_node(a, na.b, b, nb.b);
  }
  return false;
}

}  // namespace

Expression parse_expression(const std::string& text) {
  Parser p(text);
  Expression e;
  e.root_ = p.run();
  e.nodes_ = p.take_nodes();
  e.source_ = text;
  return e;
}

double evaluate(const Expression& e, double x, double y) {
  if (e.root() < 0) throw EvalError("empty expression");
  return eval_node(e, e.root(), x, y);
}

std::string pretty_print(const Expression& e) {
  std::string out;
  if (e.root() >= 0) print_node(e, e.root(), out);
  return out;
}

bool same_ast(const Expression& a, const Expression& b) {
  if ((a.root() < 0) != (b.root() < 0)) return false;
  if (a.root() < 0) return true;
  return same_node(a, a.root(), b, b.root());
}

}  // namespace switchreg
