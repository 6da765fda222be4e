#pragma once

#include <map>
#include <set>
#include <vector>

#include "hdlmutant/ast.hpp"
#include "hdlmutant/sim.hpp"

namespace hdlmutant {

enum class ZombieKind { kStatic, kDynamic };

struct ZombieAnnotation {
  /// Outermost zero-hit statement subtrees that may be edited.
  std::map<NodeId, ZombieKind> zombie_nodes;
  /// Zero-hit statements that hold every write of a signal observed
  /// elsewhere; never pruned as a whole.
  std::set<NodeId> protected_nodes;

  bool empty() const { return zombie_nodes.empty(); }
};

/// Throws CoverageMismatch when the coverage keys do not match the design's
/// statements.
ZombieAnnotation mark_zombie(const ModuleAst& ast, const CoverageReport& cov);

/// Static iff some condition guarding the statement folds to a constant that
/// excludes it. Throws NotZombie for statements that executed or do not exist.
ZombieKind classify_zombie(NodeId node, const ModuleAst& ast,
                           const CoverageReport& cov);

/// Zombie roots plus every statement below them: the sites mutation may
/// touch.
std::set<NodeId> zombie_region(const ModuleAst& ast, const ZombieAnnotation& ann);

/// True when the statement at `path` holds every write of a signal that is
/// read outside it or is an output port.
bool is_sole_writer(const ModuleAst& ast, const StmtPath& path);

}  // namespace hdlmutant
