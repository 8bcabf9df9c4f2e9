#pragma once

// A small pipe-separated pipeline language:
//
//   program := stage ('|' stage)*
//   stage   := scan | apply | filter | select
//   scan    := 'scan' IDENT ('range' INT INT)?
//   apply   := 'apply' IDENT
//   filter  := 'filter' cmp ('and' cmp)*
//   select  := 'select' IDENT (',' IDENT)*
//   cmp     := operand OP operand      OP in {==, !=, <=, >=, <, >, contains}
//   operand := IDENT | INT | STRING | 'udf' '(' IDENT ')'
//
// Conjunctions are split into independent filters while parsing.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aqp/core.hpp"

namespace aqp::ql {

enum class CompareOp { Eq, Ne, Le, Ge, Lt, Gt, Contains };

std::string_view to_string(CompareOp op);

struct AttributeRef {
  std::string name;
  friend bool operator==(const AttributeRef&, const AttributeRef&) = default;
};
struct UdfCall {
  std::string name;
  friend bool operator==(const UdfCall&, const UdfCall&) = default;
};

using Operand = std::variant<AttributeRef, std::int64_t, std::string, UdfCall>;

struct Comparison {
  Operand lhs;
  CompareOp op = CompareOp::Eq;
  Operand rhs;
  friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct Filter {
  Comparison cmp;

  // Name of the UDF this filter calls, if any.
  std::optional<std::string> udf_name() const;
  bool udf_backed() const { return udf_name().has_value(); }
  friend bool operator==(const Filter&, const Filter&) = default;
};

struct Source {
  std::string dataset;
  std::optional<TupleRange> range;  // [begin, end)
  friend bool operator==(const Source&, const Source&) = default;
};

struct PipelineExpr {
  Source source;
  std::vector<std::string> apply_ops;
  std::vector<Filter> filters;
  std::vector<std::string> projection;  // empty: all attributes
  friend bool operator==(const PipelineExpr&, const PipelineExpr&) = default;
};

PipelineExpr parse(std::string_view text);

// Also rejects udf-backed filters whose name is not in known_udfs.
PipelineExpr parse(std::string_view text, const std::set<std::string>& known_udfs);

// Canonical text form; parse(pretty_print(e)) == e.
std::string pretty_print(const PipelineExpr& expr);
std::string pretty_print(const Filter& filter);

struct PhysicalPlan {
  Source scan;
  std::vector<std::string> apply;
  std::vector<Filter> simple_filters;  // pushed below the AQP stage
  std::vector<Filter> aqp_filters;     // parallel to aqp
  std::vector<PredicateSpec> aqp;      // initial (textual) order; ids are 0..n-1
  std::vector<std::string> projection;
};

// Pushes simple filters below the AQP stage (stable) and binds udf filters to
// registry entries. Throws UnknownPredicate for unresolved names.
PhysicalPlan plan(const PipelineExpr& expr, const std::map<std::string, PredicateSpec>& registry);

// Evaluates a filter that does not call a UDF. Attributes "id" and
// "payload_size" resolve to the row's fields unless shadowed.
bool eval_simple(const Filter& filter, const TupleRow& row);

}  // namespace aqp::ql
