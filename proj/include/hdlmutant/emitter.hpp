#pragma once

#include <string>

#include "hdlmutant/ast.hpp"

namespace hdlmutant {

/// Canonical Verilog text: ANSI ports, one statement per line, explicit
/// begin-end around every arm and body, fully parenthesized expressions.
std::string emit(const ModuleAst& ast);

std::string emit_expr(const Expr& e);
std::string emit_stmt(const Stmt& s, int indent = 0);

}  // namespace hdlmutant
