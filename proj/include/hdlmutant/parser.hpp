#pragma once

#include <filesystem>
#include <string_view>

#include "hdlmutant/ast.hpp"

namespace hdlmutant {

/// Parses a single-module Verilog source in the supported subset.
///
/// Bare statements in if/case/for arms and always/initial bodies are wrapped
/// in begin-end, `localparam`/`parameter` references are substituted by
/// their values, replications are expanded into concatenations and NodeIds
/// are assigned in pre-order. The result passes validate().
///
/// Throws SyntaxError, UnsupportedConstruct, UndeclaredIdentifier or
/// SemanticError.
ModuleAst parse(std::string_view source);

ModuleAst parse_file(const std::filesystem::path& path);

/// Checks the design rules of the subset: every referenced identifier is
/// declared, widths are 1..64, selects are in range, continuous assigns drive
/// wires and procedural assigns drive regs, each signal has a single driving
/// item, edge events name input ports, case labels are constant and for
/// loops are statically bounded.
void validate(const ModuleAst& ast);

/// Upper bound on the trip count of a statically bounded for loop.
inline constexpr int kMaxLoopIterations = 4096;

/// Number of iterations a for statement executes (validate() guarantees it
/// is static). Throws UnsupportedConstruct when it is not.
int static_trip_count(const Stmt& for_stmt, const SignalTable& sigs);

}  // namespace hdlmutant
