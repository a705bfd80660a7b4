#pragma once

#include <filesystem>
#include <string_view>

#include "lifestate/life/syntax.hpp"

namespace lifestate::life {

/// Parses the s-expression surface syntax into let-normal form. Operand
/// positions may hold arbitrary expressions; they are hoisted into fresh
/// let bindings, evaluated left to right.
///
///   e ::= atom | (fun app|fwk x [:sig T.m | :event Name] e)
///       | (let x e e) | (let ((x e) ...) e) | (seq e ...) | (if e e e)
///       | (bind e e) | (enable e) | (disable e) | (allow e) | (disallow e)
///       | (invoke e e) | (call e e) | (new T) | (get e f) | (set e f e)
///       | (tuple e ...) | (nth e i) | (+ e e) | (- e e) | (* e e) | (= e e)
///       | (< e e) | (<= e e) | (not e) | (and e e) | (or e e)
///   atom ::= integer | true | false | unit | me | identifier
///
/// `(call f v)` abbreviates `(let k (bind f v) (let h (allow k) (invoke h k)))`.
/// Throws Error{ParseError} with line and column.
ExprPtr parse_program(std::string_view source);
ExprPtr parse_program_file(const std::filesystem::path& path);

}  // namespace lifestate::life
