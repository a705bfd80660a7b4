#include "lifestate/life/parser.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "lifestate/error.hpp"

namespace lifestate::life {

namespace {

struct Sexp {
  bool is_list = false;
  std::string atom;
  std::vector<Sexp> items;
  int line = 0;
  int column = 0;
};

[[noreturn]] void parse_error(int line, int column, const std::string& what) {
  throw Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
}

[[noreturn]] void parse_error(const Sexp& at, const std::string& what) {
  parse_error(at.line, at.column, what);
}

class Reader {
 public:
  explicit Reader(std::string_view src) : src_(src) {}

  Sexp read_toplevel() {
    skip();
    if (done()) parse_error(line_, col_, "empty program");
    Sexp s = read();
    skip();
    if (!done()) parse_error(line_, col_, "trailing input after the program expression");
    return s;
  }

 private:
  bool done() const { return pos_ >= src_.size(); }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip() {
    while (!done()) {
      char c = src_[pos_];
      if (c == ';') {
        while (!done() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  Sexp read() {
    skip();
    if (done()) parse_error(line_, col_, "unexpected end of input");
    Sexp s;
    s.line = line_;
    s.column = col_;
    char c = src_[pos_];
    if (c == ')') parse_error(line_, col_, "unexpected ')'");
    if (c == '(') {
      advance();
      s.is_list = true;
      for (;;) {
        skip();
        if (done()) parse_error(s, "unclosed '('");
        if (src_[pos_] == ')') {
          advance();
          break;
        }
        s.items.push_back(read());
      }
      return s;
    }
    while (!done()) {
      c = src_[pos_];
      if (c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c))) break;
      s.atom += advance();
    }
    return s;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

bool is_integer(const std::string& atom, std::int64_t& out) {
  const char* first = atom.data();
  const char* last = atom.data() + atom.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

const std::map<std::string, PrimOp, std::less<>> kPrims = {
    {"+", PrimOp::add}, {"-", PrimOp::sub}, {"*", PrimOp::mul},  {"=", PrimOp::eq},  {"<", PrimOp::lt},
    {"<=", PrimOp::le}, {"not", PrimOp::not_}, {"and", PrimOp::and_}, {"or", PrimOp::or_}};

const std::map<std::string, MessageOp, std::less<>> kMessageOps = {{"enable", MessageOp::enable},
                                                                   {"disable", MessageOp::disable},
                                                                   {"allow", MessageOp::allow},
                                                                   {"disallow", MessageOp::disallow}};

bool is_reserved(const std::string& name) {
  static const char* const words[] = {"let",   "seq",  "if",   "bind", "enable", "disable", "allow", "disallow",
                                      "invoke", "call", "new",  "get",  "set",    "tuple",   "nth",   "fun",
                                      "me",    "true", "false", "unit", "app",    "fwk"};
  for (const char* w : words) {
    if (name == w) return true;
  }
  return kPrims.contains(name);
}

class Normalizer {
 public:
  ExprPtr expr(const Sexp& s) {
    if (!s.is_list) return make_expr(ValueE{atom(s)}, s.line);
    if (s.items.empty()) parse_error(s, "empty form");
    const Sexp& head = s.items[0];
    if (head.is_list) parse_error(head, "application is not part of the language; use bind/invoke or call");
    const std::string& op = head.atom;

    if (op == "fun") return make_expr(ValueE{fun(s)}, s.line);
    if (op == "let") return let(s);
    if (op == "seq") return seq(s);
    if (op == "if") {
      arity(s, 3);
      Bindings b;
      ValueExpr guard = value(s.items[1], b);
      return wrap(b, make_expr(IfE{guard, expr(s.items[2]), expr(s.items[3])}, s.line));
    }
    if (op == "bind") {
      arity(s, 2);
      Bindings b;
      ValueExpr f = value(s.items[1], b);
      ValueExpr a = value(s.items[2], b);
      return wrap(b, make_expr(BindE{f, a}, s.line));
    }
    if (auto it = kMessageOps.find(op); it != kMessageOps.end()) {
      arity(s, 1);
      Bindings b;
      ValueExpr v = value(s.items[1], b);
      return wrap(b, make_expr(MessageE{it->second, v}, s.line));
    }
    if (op == "invoke") {
      arity(s, 2);
      Bindings b;
      ValueExpr h = value(s.items[1], b);
      ValueExpr k = value(s.items[2], b);
      return wrap(b, make_expr(InvokeE{h, k}, s.line));
    }
    if (op == "call") {
      arity(s, 2);
      Bindings b;
      ValueExpr f = value(s.items[1], b);
      ValueExpr a = value(s.items[2], b);
      std::string k = fresh();
      std::string h = fresh();
      ExprPtr body = make_expr(
          LetE{k, make_expr(BindE{f, a}, s.line),
               make_expr(LetE{h, make_expr(MessageE{MessageOp::allow, VarRef{k}}, s.line),
                              make_expr(InvokeE{VarRef{h}, VarRef{k}}, s.line)},
                         s.line)},
          s.line);
      return wrap(b, body);
    }
    if (op == "new") {
      arity(s, 1);
      const Sexp& t = s.items[1];
      if (t.is_list || t.atom.empty()) parse_error(t, "new expects a type name");
      return make_expr(NewE{t.atom}, s.line);
    }
    if (op == "get") {
      arity(s, 2);
      Bindings b;
      ValueExpr obj = value(s.items[1], b);
      return wrap(b, make_expr(GetE{obj, field(s.items[2])}, s.line));
    }
    if (op == "set") {
      arity(s, 3);
      Bindings b;
      ValueExpr obj = value(s.items[1], b);
      std::string f = field(s.items[2]);
      ValueExpr v = value(s.items[3], b);
      return wrap(b, make_expr(SetE{obj, f, v}, s.line));
    }
    if (op == "tuple") {
      Bindings b;
      std::vector<ValueExpr> elems;
      for (std::size_t i = 1; i < s.items.size(); ++i) elems.push_back(value(s.items[i], b));
      return wrap(b, make_expr(TupleE{std::move(elems)}, s.line));
    }
    if (op == "nth") {
      arity(s, 2);
      Bindings b;
      ValueExpr t = value(s.items[1], b);
      std::int64_t idx = 0;
      if (s.items[2].is_list || !is_integer(s.items[2].atom, idx) || idx < 0) {
        parse_error(s.items[2], "nth expects a non-negative integer index");
      }
      return wrap(b, make_expr(NthE{t, static_cast<std::size_t>(idx)}, s.line));
    }
    if (auto it = kPrims.find(op); it != kPrims.end()) {
      const std::size_t want = it->second == PrimOp::not_ ? 1 : 2;
      arity(s, want);
      Bindings b;
      std::vector<ValueExpr> operands;
      for (std::size_t i = 1; i < s.items.size(); ++i) operands.push_back(value(s.items[i], b));
      return wrap(b, make_expr(PrimE{it->second, std::move(operands)}, s.line));
    }
    parse_error(head, "unknown form '" + op + "'");
  }

 private:
  using Bindings = std::vector<std::pair<std::string, ExprPtr>>;

  std::string fresh() { return "%t" + std::to_string(++counter_); }

  static void arity(const Sexp& s, std::size_t n) {
    if (s.items.size() != n + 1) {
      parse_error(s, "'" + s.items[0].atom + "' expects " + std::to_string(n) + " operand(s)");
    }
  }

  static std::string field(const Sexp& s) {
    if (s.is_list || s.atom.empty()) parse_error(s, "expected a field name");
    return s.atom;
  }

  static std::string identifier(const Sexp& s) {
    if (s.is_list || s.atom.empty()) parse_error(s, "expected an identifier");
    std::int64_t ignored = 0;
    if (is_integer(s.atom, ignored) || is_reserved(s.atom) || s.atom.front() == ':' || s.atom.front() == '%') {
      parse_error(s, "'" + s.atom + "' cannot be used as a variable");
    }
    return s.atom;
  }

  static ExprPtr wrap(const Bindings& b, ExprPtr body) {
    for (auto it = b.rbegin(); it != b.rend(); ++it) {
      int line = it->second->line;
      body = make_expr(LetE{it->first, it->second, std::move(body)}, line);
    }
    return body;
  }

  ValueExpr atom(const Sexp& s) {
    const std::string& a = s.atom;
    if (a == "unit") return Unit{};
    if (a == "true") return true;
    if (a == "false") return false;
    if (a == "me") return MeRef{};
    std::int64_t n = 0;
    if (is_integer(a, n)) return n;
    return VarRef{identifier(s)};
  }

  ValueExpr value(const Sexp& s, Bindings& b) {
    if (!s.is_list) return atom(s);
    if (!s.items.empty() && !s.items[0].is_list && s.items[0].atom == "fun") return fun(s);
    std::string name = fresh();
    b.emplace_back(name, expr(s));
    return VarRef{name};
  }

  ValueExpr fun(const Sexp& s) {
    if (s.items.size() < 4) parse_error(s, "fun expects: (fun app|fwk x [:sig T.m | :event Name] body)");
    auto lit = std::make_shared<FunLit>();
    const Sexp& pkg = s.items[1];
    if (pkg.is_list || (pkg.atom != "app" && pkg.atom != "fwk")) parse_error(pkg, "package must be app or fwk");
    lit->pkg = pkg.atom == "app" ? Package::app : Package::fwk;
    lit->param = identifier(s.items[2]);
    std::size_t next = 3;
    if (!s.items[next].is_list && !s.items[next].atom.empty() && s.items[next].atom.front() == ':') {
      const Sexp& key = s.items[next];
      if (next + 2 >= s.items.size() || s.items[next + 1].is_list) parse_error(key, "annotation needs a name");
      const std::string& name = s.items[next + 1].atom;
      FunAnnotation ann;
      if (key.atom == ":sig") {
        auto dot = name.rfind('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == name.size()) {
          parse_error(s.items[next + 1], ":sig expects Type.method");
        }
        ann.type_name = name.substr(0, dot);
        ann.method = name.substr(dot + 1);
      } else if (key.atom == ":event") {
        ann.method = name;
        ann.is_event = true;
      } else {
        parse_error(key, "unknown annotation " + key.atom);
      }
      lit->annotation = std::move(ann);
      next += 2;
    }
    if (next + 1 != s.items.size()) parse_error(s, "fun has exactly one body expression");
    lit->body = expr(s.items[next]);
    return FunRef{std::move(lit)};
  }

  ExprPtr let(const Sexp& s) {
    if (s.items.size() != 3 && s.items.size() != 4) parse_error(s, "malformed let");
    if (s.items.size() == 4) {
      std::string var = identifier(s.items[1]);
      return make_expr(LetE{var, expr(s.items[2]), expr(s.items[3])}, s.line);
    }
    const Sexp& bindings = s.items[1];
    if (!bindings.is_list) parse_error(bindings, "let expects a binding list");
    ExprPtr body = expr(s.items[2]);
    std::vector<std::pair<std::string, ExprPtr>> parsed;
    for (const auto& bnd : bindings.items) {
      if (!bnd.is_list || bnd.items.size() != 2) parse_error(bnd, "binding must be (x e)");
      parsed.emplace_back(identifier(bnd.items[0]), expr(bnd.items[1]));
    }
    for (auto it = parsed.rbegin(); it != parsed.rend(); ++it) {
      body = make_expr(LetE{it->first, it->second, std::move(body)}, it->second->line);
    }
    return body;
  }

  ExprPtr seq(const Sexp& s) {
    if (s.items.size() < 2) parse_error(s, "seq expects at least one expression");
    ExprPtr body = expr(s.items.back());
    for (std::size_t i = s.items.size() - 1; i-- > 1;) {
      body = make_expr(LetE{fresh(), expr(s.items[i]), std::move(body)}, s.items[i].line);
    }
    return body;
  }

  int counter_ = 0;
};

}  // namespace

ExprPtr parse_program(std::string_view source) {
  Sexp root = Reader(source).read_toplevel();
  return Normalizer().expr(root);
}

ExprPtr parse_program_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_program(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace lifestate::life
