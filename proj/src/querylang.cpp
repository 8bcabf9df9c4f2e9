#include "aqp/querylang.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "aqp/errors.hpp"

namespace aqp::ql {

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq:
      return "==";
    case CompareOp::Ne:
      return "!=";
    case CompareOp::Le:
      return "<=";
    case CompareOp::Ge:
      return ">=";
    case CompareOp::Lt:
      return "<";
    case CompareOp::Gt:
      return ">";
    case CompareOp::Contains:
      return "contains";
  }
  return "==";
}

std::optional<std::string> Filter::udf_name() const {
  if (const auto* u = std::get_if<UdfCall>(&cmp.lhs)) return u->name;
  if (const auto* u = std::get_if<UdfCall>(&cmp.rhs)) return u->name;
  return std::nullopt;
}

namespace {

enum class Tok { Ident, Int, String, Pipe, LParen, RParen, Comma, Op, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t value = 0;
  CompareOp op = CompareOp::Eq;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '_' || src_[pos_] == '.')) {
          advance();
        }
        t.text = std::string(src_.substr(start, pos_ - start));
        if (t.text == "contains") {
          t.kind = Tok::Op;
          t.op = CompareOp::Contains;
        } else {
          t.kind = Tok::Ident;
        }
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '-' && pos_ + 1 < src_.size() &&
                  std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        std::size_t start = pos_;
        advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        t.kind = Tok::Int;
        t.text = std::string(src_.substr(start, pos_ - start));
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
        if (ec != std::errc{}) throw SyntaxError("integer out of range", t.line, t.column);
      } else if (c == '"') {
        advance();
        t.kind = Tok::String;
        for (;;) {
          if (pos_ >= src_.size()) throw SyntaxError("unterminated string", t.line, t.column);
          char d = src_[pos_];
          if (d == '"') {
            advance();
            break;
          }
          if (d == '\\') {
            advance();
            if (pos_ >= src_.size()) throw SyntaxError("unterminated string", t.line, t.column);
            char e = src_[pos_];
            switch (e) {
              case 'n':
                t.text.push_back('\n');
                break;
              case 't':
                t.text.push_back('\t');
                break;
              case '"':
              case '\\':
                t.text.push_back(e);
                break;
              default:
                throw SyntaxError(std::string("bad escape \\") + e, line_, col_);
            }
            advance();
            continue;
          }
          t.text.push_back(d);
          advance();
        }
      } else {
        auto two = src_.substr(pos_, 2);
        if (two == "==" || two == "!=" || two == "<=" || two == ">=") {
          t.kind = Tok::Op;
          t.op = two == "==" ? CompareOp::Eq
                 : two == "!=" ? CompareOp::Ne
                 : two == "<=" ? CompareOp::Le
                               : CompareOp::Ge;
          t.text = std::string(two);
          advance();
          advance();
        } else {
          switch (c) {
            case '|':
              t.kind = Tok::Pipe;
              break;
            case '(':
              t.kind = Tok::LParen;
              break;
            case ')':
              t.kind = Tok::RParen;
              break;
            case ',':
              t.kind = Tok::Comma;
              break;
            case '<':
              t.kind = Tok::Op;
              t.op = CompareOp::Lt;
              break;
            case '>':
              t.kind = Tok::Op;
              t.op = CompareOp::Gt;
              break;
            default:
              throw SyntaxError(std::string("unexpected character '") + c + "'", line_, col_);
          }
          t.text = std::string(1, c);
          advance();
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  PipelineExpr program() {
    PipelineExpr e;
    bool have_scan = false;
    bool have_select = false;
    for (;;) {
      const Token& kw = expect(Tok::Ident, "stage keyword");
      if (kw.text == "scan") {
        if (have_scan) fail(kw, "duplicate scan stage");
        if (!e.apply_ops.empty() || !e.filters.empty() || have_select) {
          fail(kw, "scan must be the first stage");
        }
        have_scan = true;
        e.source.dataset = expect(Tok::Ident, "dataset name").text;
        if (peek().kind == Tok::Ident && peek().text == "range") {
          next();
          const Token& lo = expect(Tok::Int, "range start");
          const Token& hi = expect(Tok::Int, "range end");
          if (lo.value < 0 || hi.value < lo.value) fail(lo, "invalid row range");
          e.source.range = TupleRange{static_cast<TupleId>(lo.value), static_cast<TupleId>(hi.value)};
        }
      } else {
        if (!have_scan) fail(kw, "program must start with a scan stage");
        if (kw.text == "apply") {
          e.apply_ops.push_back(expect(Tok::Ident, "function name").text);
        } else if (kw.text == "filter") {
          e.filters.push_back(Filter{comparison()});
          while (peek().kind == Tok::Ident && peek().text == "and") {
            next();
            e.filters.push_back(Filter{comparison()});
          }
        } else if (kw.text == "select") {
          if (have_select) fail(kw, "duplicate select stage");
          have_select = true;
          e.projection.push_back(expect(Tok::Ident, "column name").text);
          while (peek().kind == Tok::Comma) {
            next();
            e.projection.push_back(expect(Tok::Ident, "column name").text);
          }
        } else {
          fail(kw, "unknown stage '" + kw.text + "'");
        }
      }
      if (peek().kind == Tok::End) break;
      expect(Tok::Pipe, "'|'");
    }
    return e;
  }

 private:
  Comparison comparison() {
    Comparison c;
    c.lhs = operand();
    const Token& op = expect(Tok::Op, "comparison operator");
    c.op = op.op;
    c.rhs = operand();
    if (std::holds_alternative<UdfCall>(c.lhs) && std::holds_alternative<UdfCall>(c.rhs)) {
      fail(op, "a comparison may call at most one udf");
    }
    return c;
  }

  Operand operand() {
    const Token& t = next();
    switch (t.kind) {
      case Tok::Int:
        return t.value;
      case Tok::String:
        return t.text;
      case Tok::Ident:
        if (t.text == "udf" && peek().kind == Tok::LParen) {
          next();
          std::string name = expect(Tok::Ident, "udf name").text;
          expect(Tok::RParen, "')'");
          return UdfCall{std::move(name)};
        }
        if (t.text == "and") fail(t, "expected operand");
        return AttributeRef{t.text};
      default:
        fail(t, "expected operand");
    }
  }

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (t.kind != Tok::End) ++pos_;
    return t;
  }
  const Token& expect(Tok kind, const std::string& what) {
    const Token& t = next();
    if (t.kind != kind) {
      fail(t, "expected " + what + (t.kind == Tok::End ? " but reached end of input" : ", got '" + t.text + "'"));
    }
    return t;
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw SyntaxError(msg, t.line, t.column);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

std::string print_operand(const Operand& o) {
  if (const auto* a = std::get_if<AttributeRef>(&o)) return a->name;
  if (const auto* i = std::get_if<std::int64_t>(&o)) return std::to_string(*i);
  if (const auto* s = std::get_if<std::string>(&o)) return quote(*s);
  return "udf(" + std::get<UdfCall>(o).name + ")";
}

std::optional<Scalar> resolve(const Operand& o, const TupleRow& row) {
  if (const auto* i = std::get_if<std::int64_t>(&o)) return Scalar{*i};
  if (const auto* s = std::get_if<std::string>(&o)) return Scalar{*s};
  if (const auto* a = std::get_if<AttributeRef>(&o)) {
    auto it = row.attributes.find(a->name);
    if (it != row.attributes.end()) return it->second;
    if (a->name == "id") return Scalar{static_cast<std::int64_t>(row.tuple_id)};
    if (a->name == "payload_size") return Scalar{static_cast<std::int64_t>(row.payload_size)};
    return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> as_number(const Scalar& s) {
  if (const auto* i = std::get_if<std::int64_t>(&s)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&s)) return *d;
  return std::nullopt;
}

template <typename T>
bool apply_order(CompareOp op, const T& a, const T& b) {
  switch (op) {
    case CompareOp::Eq:
      return a == b;
    case CompareOp::Ne:
      return a != b;
    case CompareOp::Le:
      return a <= b;
    case CompareOp::Ge:
      return a >= b;
    case CompareOp::Lt:
      return a < b;
    case CompareOp::Gt:
      return a > b;
    case CompareOp::Contains:
      return false;
  }
  return false;
}

}  // namespace

PipelineExpr parse(std::string_view text) { return Parser(Lexer(text).run()).program(); }

PipelineExpr parse(std::string_view text, const std::set<std::string>& known_udfs) {
  PipelineExpr e = parse(text);
  for (const auto& f : e.filters) {
    if (auto name = f.udf_name(); name && !known_udfs.contains(*name)) throw UnknownPredicate(*name);
  }
  return e;
}

std::string pretty_print(const Filter& filter) {
  return "filter " + print_operand(filter.cmp.lhs) + " " + std::string(to_string(filter.cmp.op)) +
         " " + print_operand(filter.cmp.rhs);
}

std::string pretty_print(const PipelineExpr& expr) {
  std::ostringstream os;
  os << "scan " << expr.source.dataset;
  if (expr.source.range) os << " range " << expr.source.range->begin << " " << expr.source.range->end;
  for (const auto& a : expr.apply_ops) os << " | apply " << a;
  for (const auto& f : expr.filters) os << " | " << pretty_print(f);
  if (!expr.projection.empty()) {
    os << " | select ";
    for (std::size_t i = 0; i < expr.projection.size(); ++i) {
      if (i) os << ", ";
      os << expr.projection[i];
    }
  }
  return os.str();
}

PhysicalPlan plan(const PipelineExpr& expr, const std::map<std::string, PredicateSpec>& registry) {
  PhysicalPlan p;
  p.scan = expr.source;
  p.apply = expr.apply_ops;
  p.projection = expr.projection;
  for (const auto& f : expr.filters) {
    auto name = f.udf_name();
    if (!name) {
      p.simple_filters.push_back(f);
      continue;
    }
    auto it = registry.find(*name);
    if (it == registry.end()) throw UnknownPredicate(*name);
    PredicateSpec spec = it->second;
    spec.predicate_id = static_cast<PredicateId>(p.aqp.size());
    if (spec.name.empty()) spec.name = *name;
    p.aqp.push_back(std::move(spec));
    p.aqp_filters.push_back(f);
  }
  return p;
}

bool eval_simple(const Filter& filter, const TupleRow& row) {
  auto lhs = resolve(filter.cmp.lhs, row);
  auto rhs = resolve(filter.cmp.rhs, row);
  if (!lhs || !rhs) return false;
  if (filter.cmp.op == CompareOp::Contains) {
    const auto* hay = std::get_if<std::string>(&*lhs);
    if (!hay) return false;
    return hay->find(aqp::to_string(*rhs)) != std::string::npos;
  }
  auto ln = as_number(*lhs);
  auto rn = as_number(*rhs);
  if (ln && rn) return apply_order(filter.cmp.op, *ln, *rn);
  const auto* ls = std::get_if<std::string>(&*lhs);
  const auto* rs = std::get_if<std::string>(&*rhs);
  if (ls && rs) return apply_order(filter.cmp.op, *ls, *rs);
  return filter.cmp.op == CompareOp::Ne;
}

}  // namespace aqp::ql
