#pragma once

// Abstract syntax of the event-driven calculus, in let-normal form: every
// compound position except let bodies holds a value, never a sub-expression.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lifestate/trace.hpp"

namespace lifestate::life {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Optional naming of a function for the trace: callbacks and callins carry
/// "Type.method", event handlers carry the event name.
struct FunAnnotation {
  std::string type_name;
  std::string method;
  bool is_event = false;
};

struct FunLit {
  Package pkg = Package::app;
  std::string param;
  ExprPtr body;
  std::optional<FunAnnotation> annotation;
};

struct Unit {
  friend bool operator==(Unit, Unit) { return true; }
};

struct VarRef { std::string name; };
struct MeRef {};
struct FunRef { std::shared_ptr<const FunLit> fun; };

/// Syntactic values: the only thing allowed in operand position.
using ValueExpr = std::variant<Unit, bool, std::int64_t, VarRef, MeRef, FunRef>;

enum class MessageOp { enable, disable, allow, disallow };

enum class PrimOp { add, sub, mul, eq, lt, le, not_, and_, or_ };

struct ValueE { ValueExpr value; };
struct IfE { ValueExpr guard; ExprPtr then_branch; ExprPtr else_branch; };
struct BindE { ValueExpr fun; ValueExpr arg; };
struct MessageE { MessageOp op; ValueExpr operand; };
struct InvokeE { ValueExpr handle; ValueExpr thunk; };
struct LetE { std::string var; ExprPtr bound; ExprPtr body; };
struct NewE { std::string type_name; };
struct GetE { ValueExpr object; std::string field; };
struct SetE { ValueExpr object; std::string field; ValueExpr value; };
struct PrimE { PrimOp op; std::vector<ValueExpr> operands; };
struct TupleE { std::vector<ValueExpr> elements; };
struct NthE { ValueExpr tuple; std::size_t index = 0; };

struct Expr {
  using Node = std::variant<ValueE, IfE, BindE, MessageE, InvokeE, LetE, NewE, GetE, SetE, PrimE,
                            TupleE, NthE>;
  Node node;
  int line = 0;
};

template <typename T>
ExprPtr make_expr(T node, int line = 0) {
  return std::make_shared<const Expr>(Expr{Expr::Node(std::move(node)), line});
}

}  // namespace lifestate::life
