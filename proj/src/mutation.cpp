#include "hdlmutant/mutation.hpp"

#include <deque>

#include "hdlmutant/emitter.hpp"
#include "hdlmutant/errors.hpp"
#include "hdlmutant/parser.hpp"

namespace hdlmutant {

std::string to_string(MutationAction a) {
  switch (a) {
    case MutationAction::kPruneLeaf: return "prune_leaf";
    case MutationAction::kPruneSubtree: return "prune_subtree";
    case MutationAction::kInsertBefore: return "insert_before";
    case MutationAction::kInsertAfter: return "insert_after";
  }
  return "?";
}

MutationStats& MutationStats::operator+=(const MutationStats& o) {
  attempts += o.attempts;
  invalid += o.invalid;
  not_equivalent += o.not_equivalent;
  verified += o.verified;
  degenerate += o.degenerate;
  return *this;
}

bool flip_coin(double p, SplitMix64& rng) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return rng.uniform() < p;
}

namespace {

const char* kind_name(StmtKind k) {
  switch (k) {
    case StmtKind::kBlockingAssign: return "blocking assign";
    case StmtKind::kNonBlockingAssign: return "non-blocking assign";
    case StmtKind::kIf: return "if";
    case StmtKind::kCase: return "case";
    case StmtKind::kFor: return "for";
    case StmtKind::kBeginEnd: return "begin-end";
  }
  return "?";
}

Stmt empty_block(NodeId id) {
  Stmt b;
  b.kind = StmtKind::kBeginEnd;
  b.id = id;
  return b;
}

std::vector<ScopeSignal> scope_of(const ModuleAst& ast, const std::string& temp_prefix) {
  std::vector<ScopeSignal> scope;
  for (const auto& p : ast.ports) scope.push_back({p.name, p.width(), p.is_signed});
  for (const auto& n : ast.nets) {
    if (n.name.rfind(temp_prefix, 0) == 0) continue;
    scope.push_back({n.name, n.width(), n.is_signed});
  }
  return scope;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) {
    if (!s.empty()) s += ' ';
    s += x;
  }
  return s;
}

}  // namespace

ModuleAst prune_visit(const ModuleAst& ast, NodeId stmt, const std::set<NodeId>& region,
                      const MutationConfig& cfg, SplitMix64& rng,
                      std::vector<MutationLogEntry>* log) {
  ModuleAst out = ast;
  std::deque<NodeId> queue{stmt};
  while (!queue.empty()) {
    const NodeId id = queue.front();
    queue.pop_front();
    auto path = find_stmt(out, id);
    if (!path) continue;
    const Stmt& s = stmt_at(out, *path);
    if (region.count(id) && !is_sole_writer(out, *path)) {
      const bool leaf = classify_stmt(s) == NodeClass::kLeaf;
      if (flip_coin(leaf ? cfg.p_leaf_prune : cfg.p_parent_prune, rng)) {
        if (log)
          log->push_back({id, leaf ? MutationAction::kPruneLeaf : MutationAction::kPruneSubtree,
                          kind_name(s.kind)});
        remove_stmt(out, *path);
        continue;
      }
    }
    for (const auto& k : s.body)
      if (k.id != kNoNode) queue.push_back(k.id);
  }
  return out;
}

ModuleAst insert_visit(const ModuleAst& ast, NodeId stmt, const std::set<NodeId>& region,
                       const FragmentModel& model, const MutationConfig& cfg, SplitMix64& rng,
                       std::vector<MutationLogEntry>* log,
                       std::vector<std::vector<std::string>>* fragments) {
  ModuleAst out = ast;
  std::set<std::string> taken;
  for (const auto& p : out.ports) taken.insert(p.name);
  for (const auto& n : out.nets) taken.insert(n.name);
  FragmentOptions opts;
  opts.taken = &taken;
  std::size_t next_temp = 0;
  for (const auto& n : out.nets) {
    if (n.name.rfind(opts.temp_prefix, 0) != 0) continue;
    const std::string digits = n.name.substr(opts.temp_prefix.size());
    if (!digits.empty() && digits.size() < 10 &&
        std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
      next_temp = std::max<std::size_t>(next_temp, std::stoul(digits) + 1);
  }
  opts.next_temp = &next_temp;
  const auto scope = scope_of(out, opts.temp_prefix);

  std::deque<NodeId> queue{stmt};
  while (!queue.empty()) {
    const NodeId id = queue.front();
    queue.pop_front();
    auto path = find_stmt(out, id);
    if (!path) continue;
    std::vector<NodeId> kids;
    for (const auto& k : stmt_at(out, *path).body)
      if (k.id != kNoNode) kids.push_back(k.id);
    if (region.count(id)) {
      const bool leaf = classify_stmt(stmt_at(out, *path)) == NodeClass::kLeaf;
      if (flip_coin(leaf ? cfg.p_leaf_insert : cfg.p_parent_insert, rng)) {
        opts.nonblocking = out.items[path->item].is_edge_triggered();
        std::optional<Fragment> frag;
        try {
          frag = sample_fragment(model, scope, rng, opts);
        } catch (const NoViableFragment&) {
        } catch (const EmptyModel&) {
        }
        if (frag) {
          const bool before = flip_coin(0.5, rng);
          std::vector<Stmt>* container = nullptr;
          std::size_t pos = 0;
          const Stmt* parent = nullptr;
          if (!path->indices.empty()) {
            StmtPath pp = *path;
            pos = pp.indices.back();
            pp.indices.pop_back();
            parent = &stmt_at(out, pp);
          }
          if (parent && parent->kind == StmtKind::kBeginEnd) {
            StmtPath pp = *path;
            pp.indices.pop_back();
            container = &stmt_at(out, pp).body;
          } else {
            // Promote the site into a begin-end so the fragment can be its sibling.
            Stmt& site = stmt_at(out, *path);
            Stmt wrapper = empty_block(kNoNode);
            wrapper.body.push_back(std::move(site));
            site = std::move(wrapper);
            container = &site.body;
            pos = 0;
          }
          const auto at = container->begin() + static_cast<std::ptrdiff_t>(before ? pos : pos + 1);
          container->insert(at, frag->stmts.begin(), frag->stmts.end());
          for (auto& t : frag->temps) out.nets.push_back(t);
          if (log)
            log->push_back({id, before ? MutationAction::kInsertBefore : MutationAction::kInsertAfter,
                            join(frag->elements)});
          if (fragments) fragments->push_back(frag->elements);
        }
      }
    }
    for (NodeId k : kids) queue.push_back(k);
  }
  return out;
}

TestbenchAst second_testbench(const TestbenchAst& tb) {
  StimulusConfig cfg = tb.config;
  cfg.rng_seed = derive_seed(tb.config.rng_seed, 0x2b);
  return generate_testbench(tb.ports, cfg, tb.dut_name);
}

bool check_equivalence(const ModuleAst& seed, const ModuleAst& variant, const TestbenchAst& tb,
                       const SimLimits& limits) {
  for (const TestbenchAst* bench : std::initializer_list<const TestbenchAst*>{&tb, nullptr}) {
    TestbenchAst other;
    if (!bench) {
      other = second_testbench(tb);
      bench = &other;
    }
    Trace a, b;
    try {
      a = simulate(seed, *bench, limits).trace;
    } catch (const Error& e) {
      throw SimulationFailed("seed", e.what());
    }
    try {
      b = simulate(variant, *bench, limits).trace;
    } catch (const Error& e) {
      throw SimulationFailed("variant", e.what());
    }
    if (!compare_traces(a, b).equivalent) return false;
  }
  return true;
}

Variant gen_variant(const ModuleAst& seed, const CoverageReport& cov, const FragmentModel* model,
                    const MutationConfig& cfg, const TestbenchAst& tb, SplitMix64& rng,
                    MutationStats* stats) {
  MutationStats local;
  MutationStats& st = stats ? *stats : local;
  auto degenerate = [&] {
    ++st.degenerate;
    Variant v;
    v.ast = seed;
    v.equivalence = Equivalence::kVerified;
    return v;
  };
  const ZombieAnnotation ann = mark_zombie(seed, cov);
  const std::set<NodeId> region = zombie_region(seed, ann);
  if (region.empty()) return degenerate();

  std::vector<std::size_t> items;
  for (std::size_t i = 0; i < seed.items.size(); ++i) {
    if (seed.items[i].kind == ItemKind::kContinuousAssign) continue;
    bool any = false;
    std::function<void(const Stmt&)> walk = [&](const Stmt& s) {
      if (region.count(s.id)) any = true;
      for (const auto& k : s.body) walk(k);
    };
    walk(seed.items[i].body);
    if (any) items.push_back(i);
  }

  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    ModuleAst cand = seed;
    std::vector<MutationLogEntry> log;
    std::vector<std::vector<std::string>> frags;
    for (std::size_t i : items) {
      MutationConfig pass = cfg;
      if (cfg.resample) {
        pass.p_parent_prune = rng.uniform();
        pass.p_leaf_prune = rng.uniform();
        pass.p_parent_insert = rng.uniform();
        pass.p_leaf_insert = rng.uniform();
      }
      const NodeId root = cand.items[i].body.id;
      const bool prune = flip_coin(cfg.prune_coin, rng) || model == nullptr;
      if (prune) {
        cand = prune_visit(cand, root, region, pass, rng, &log);
      } else {
        cand = insert_visit(cand, root, region, *model, pass, rng, &log, &frags);
      }
    }
    if (log.empty()) continue;
    ++st.attempts;
    renumber(cand);
    ModuleAst parsed;
    try {
      parsed = parse(emit(cand));
    } catch (const Error&) {
      ++st.invalid;
      continue;
    }
    bool eq = false;
    try {
      eq = check_equivalence(seed, parsed, tb, cfg.limits);
    } catch (const SimulationFailed& e) {
      if (e.which() == "seed") throw;
    }
    if (!eq) {
      ++st.not_equivalent;
      continue;
    }
    ++st.verified;
    Variant v;
    v.ast = std::move(parsed);
    v.log = std::move(log);
    v.fragments = std::move(frags);
    v.equivalence = Equivalence::kVerified;
    return v;
  }
  return degenerate();
}

}  // namespace hdlmutant
