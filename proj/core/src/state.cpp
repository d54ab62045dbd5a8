#include "chrconf/state.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace chrconf {

CanonState CanonState::failure() {
  CanonState s;
  s.failed_ = true;
  s.builtins_ = BuiltinStore::from_atoms({Term::constant("fail")});
  s.key_ = "<failure>";
  return s;
}

namespace {

// Renders the state under a first-occurrence canonical renaming for one
// candidate atom order; also returns the renaming.
std::string render_candidate(const std::vector<Term>& atoms, const BuiltinStore& builtins,
                             std::map<std::string, std::string>* renaming_out) {
  std::vector<std::string> occurrence;
  for (const Term& a : atoms) a.collect_vars(occurrence);
  for (const Term& a : builtins.solved_atoms()) a.collect_vars(occurrence);
  std::map<std::string, std::string> renaming;
  int next = 0;
  for (const auto& v : occurrence)
    if (!renaming.count(v)) renaming.emplace(v, "V" + std::to_string(next++));
  std::ostringstream os;
  os << "<";
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) os << ",";
    os << rename_vars(atoms[i], renaming).to_string();
  }
  os << " ; " << builtins.renamed(renaming).to_string() << ">";
  if (renaming_out) *renaming_out = renaming;
  return os.str();
}

}  // namespace

CanonState canonicalize(const StateRepr& repr) {
  if (repr.failed()) return CanonState::failure();

  std::vector<Term> atoms = repr.builtins.apply(repr.store);

  // Variables absent from the store after substitution are existential in
  // the representation; project the built-in store onto the rest.
  std::set<std::string> relevant;
  for (const Term& a : atoms)
    for (const auto& v : a.var_set()) relevant.insert(v);
  BuiltinStore builtins = repr.builtins.projected(relevant);

  // Group by renaming-invariant skeleton; only permutations within a group
  // can affect the canonical text.
  std::sort(atoms.begin(), atoms.end(),
            [](const Term& x, const Term& y) { return x.skeleton() < y.skeleton(); });
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end)
  for (std::size_t i = 0; i < atoms.size();) {
    std::size_t j = i + 1;
    while (j < atoms.size() && atoms[j].skeleton() == atoms[i].skeleton()) ++j;
    groups.emplace_back(i, j);
    i = j;
  }
  std::size_t budget = 1;
  for (auto [b, e] : groups) {
    for (std::size_t k = 2; k <= e - b; ++k) budget *= k;
    if (budget > 5040) break;
  }

  std::string best;
  std::map<std::string, std::string> best_renaming;
  std::vector<Term> best_atoms;

  auto consider = [&](const std::vector<Term>& candidate) {
    std::map<std::string, std::string> renaming;
    std::string text = render_candidate(candidate, builtins, &renaming);
    if (best.empty() || text < best) {
      best = text;
      best_renaming = renaming;
      best_atoms = candidate;
    }
  };

  if (budget > 5040) {
    // Permutation budget exceeded: deterministic fallback (sound, and
    // complete unless many same-skeleton atoms differ only by variables).
    std::sort(atoms.begin(), atoms.end());
    consider(atoms);
  } else {
    // Enumerate the cartesian product of within-group permutations.
    std::vector<std::vector<Term>> group_perms;
    std::vector<Term> current = atoms;
    std::function<void(std::size_t)> rec = [&](std::size_t g) {
      if (g == groups.size()) {
        consider(current);
        return;
      }
      auto [b, e] = groups[g];
      std::vector<Term> slice(atoms.begin() + b, atoms.begin() + e);
      std::sort(slice.begin(), slice.end());
      do {
        for (std::size_t i = b; i < e; ++i) current[i] = slice[i - b];
        rec(g + 1);
      } while (std::next_permutation(slice.begin(), slice.end()));
    };
    rec(0);
  }

  CanonState out;
  out.failed_ = false;
  out.store_ = rename_vars(best_atoms, best_renaming);
  out.builtins_ = builtins.renamed(best_renaming);
  out.key_ = best;
  return out;
}

std::string TransitionLabel::to_string(const Program* prog) const {
  if (kind == Kind::Builtin) return "builtin " + builtin_atom.to_string();
  std::ostringstream os;
  if (prog && rule_index >= 0 && rule_index < static_cast<int>(prog->rules.size()) &&
      prog->rules[rule_index].name) {
    os << *prog->rules[rule_index].name;
  } else {
    os << "rule#" << rule_index;
  }
  return os.str();
}

std::vector<Transition> successors(const CanonState& s, const Program& prog) {
  std::vector<Transition> out;
  if (s.failed()) return out;

  std::set<std::string> seen;  // dedup: label kind + rule + successor key
  std::set<std::string> state_vars;
  for (const Term& a : s.store())
    for (const auto& v : a.var_set()) state_vars.insert(v);
  for (const Term& a : s.builtins().solved_atoms())
    for (const auto& v : a.var_set()) state_vars.insert(v);

  for (int ri = 0; ri < static_cast<int>(prog.rules.size()); ++ri) {
    PreApplication pre = make_pre_application(prog.rules[ri], ri, Subst(), state_vars);
    const Rule& inst = pre.instance;
    std::vector<Term> heads = inst.head();
    std::size_t kept_count = inst.kept.size();
    if (heads.size() > s.store().size()) continue;

    std::vector<int> chosen;
    std::vector<bool> used(s.store().size(), false);
    std::function<void(std::size_t, const Subst&)> rec = [&](std::size_t k, const Subst& sigma) {
      if (k == heads.size()) {
        if (s.builtins().entails(pre.local_vars, sigma.apply(inst.guard)) != Trivalent::Yes)
          return;
        StateRepr next;
        for (std::size_t p = 0; p < s.store().size(); ++p) {
          bool removed = false;
          for (std::size_t h = kept_count; h < heads.size(); ++h)
            if (chosen[h] == static_cast<int>(p)) removed = true;
          if (!removed) next.store.push_back(s.store()[p]);
        }
        for (const Term& b : sigma.apply(inst.body)) next.store.push_back(b);
        next.builtins = s.builtins().add_all(sigma.apply(inst.guard));
        CanonState to = canonicalize(next);
        std::string key = "r" + std::to_string(ri) + "|" + to.key();
        if (seen.insert(key).second) {
          TransitionLabel label;
          label.kind = TransitionLabel::Kind::RuleApp;
          label.rule_index = ri;
          label.positions = chosen;
          out.push_back(Transition{s, to, label});
        }
        return;
      }
      for (std::size_t p = 0; p < s.store().size(); ++p) {
        if (used[p]) continue;
        Subst extended = sigma;
        if (!match_extend(extended, heads[k], s.store()[p])) continue;
        used[p] = true;
        chosen.push_back(static_cast<int>(p));
        rec(k + 1, extended);
        chosen.pop_back();
        used[p] = false;
      }
    };
    rec(0, Subst());
  }

  for (std::size_t p = 0; p < s.store().size(); ++p) {
    const Term& b = s.store()[p];
    if (b.is_var() || b.is_int()) continue;
    if (!builtins::supported(b.functor(), b.arity())) continue;
    StateRepr next;
    for (std::size_t q = 0; q < s.store().size(); ++q)
      if (q != p) next.store.push_back(s.store()[q]);
    next.builtins = s.builtins().add(b);
    CanonState to = canonicalize(next);
    std::string key = "b" + b.to_string() + "|" + to.key();
    if (seen.insert(key).second) {
      TransitionLabel label;
      label.kind = TransitionLabel::Kind::Builtin;
      label.builtin_atom = b;
      label.positions = {static_cast<int>(p)};
      out.push_back(Transition{s, to, label});
    }
  }
  return out;
}

int TransitionGraph::add_node(const CanonState& s) {
  auto it = index.find(s.key());
  if (it != index.end()) return it->second;
  int id = static_cast<int>(nodes.size());
  nodes.push_back(s);
  index[s.key()] = id;
  out_edges.emplace_back();
  return id;
}

int TransitionGraph::find(const CanonState& s) const {
  auto it = index.find(s.key());
  return it == index.end() ? -1 : it->second;
}

bool TransitionGraph::bit(const std::vector<std::uint64_t>& row, int i) {
  return (row[i / 64] >> (i % 64)) & 1;
}

std::vector<std::vector<std::uint64_t>> TransitionGraph::reachability() const {
  // Tarjan SCC condensation, then bitset union in reverse topological order.
  int n = static_cast<int>(nodes.size());
  std::vector<int> comp(n, -1), low(n), disc(n, -1), stack;
  std::vector<bool> on_stack(n, false);
  int timer = 0, ncomp = 0;
  std::vector<int> order;  // components in completion order (reverse topo)
  std::function<void(int)> dfs = [&](int u) {
    disc[u] = low[u] = timer++;
    stack.push_back(u);
    on_stack[u] = true;
    for (std::size_t ei : out_edges[u]) {
      int v = edges[ei].to;
      if (disc[v] == -1) {
        dfs(v);
        low[u] = std::min(low[u], low[v]);
      } else if (on_stack[v]) {
        low[u] = std::min(low[u], disc[v]);
      }
    }
    if (low[u] == disc[u]) {
      for (;;) {
        int v = stack.back();
        stack.pop_back();
        on_stack[v] = false;
        comp[v] = ncomp;
        if (v == u) break;
      }
      ++ncomp;
    }
  };
  for (int i = 0; i < n; ++i)
    if (disc[i] == -1) dfs(i);

  std::size_t words = (n + 63) / 64;
  std::vector<std::vector<std::uint64_t>> comp_reach(ncomp, std::vector<std::uint64_t>(words, 0));
  for (int i = 0; i < n; ++i) comp_reach[comp[i]][i / 64] |= 1ull << (i % 64);
  // Tarjan numbers components in reverse topological order: comp(u) <= comp(v)
  // whenever u reaches v, so accumulate in increasing component id.
  for (int c = 0; c < ncomp; ++c) {
    for (int u = 0; u < n; ++u) {
      if (comp[u] != c) continue;
      for (std::size_t ei : out_edges[u]) {
        int vc = comp[edges[ei].to];
        if (vc == c) continue;
        for (std::size_t w = 0; w < words; ++w) comp_reach[c][w] |= comp_reach[vc][w];
      }
    }
  }
  std::vector<std::vector<std::uint64_t>> reach(n);
  for (int i = 0; i < n; ++i) reach[i] = comp_reach[comp[i]];
  return reach;
}

std::vector<int> TransitionGraph::final_states() const {
  std::vector<int> finals;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
    if (out_edges[i].empty()) finals.push_back(i);
  return finals;
}

TransitionGraph enumerate_reachable(const std::vector<CanonState>& inits, const Program& prog,
                                    const EnumLimits& limits) {
  TransitionGraph g;
  std::deque<std::pair<int, std::size_t>> frontier;  // node, depth
  for (const CanonState& s : inits) {
    int id = g.add_node(s);
    frontier.emplace_back(id, 0);
  }
  std::set<int> expanded;
  while (!frontier.empty()) {
    auto [u, depth] = frontier.front();
    frontier.pop_front();
    if (!expanded.insert(u).second) continue;
    if (depth >= limits.max_depth) {
      g.truncated = true;
      continue;
    }
    g.depth_reached = std::max(g.depth_reached, depth);
    for (const Transition& t : successors(g.nodes[u], prog)) {
      if (g.find(t.to) == -1 && g.nodes.size() >= limits.max_states) {
        g.truncated = true;
        continue;
      }
      int v = g.add_node(t.to);
      g.out_edges[u].push_back(g.edges.size());
      g.edges.push_back(TransitionGraph::Edge{u, v, t.label});
      frontier.emplace_back(v, depth + 1);
    }
  }
  return g;
}

namespace {

// Equivalence classes over enumerated nodes: class_key kernel when available,
// otherwise union-find closure of the pairwise relation.
std::vector<int> equivalence_classes(const TransitionGraph& g, const OracleEquiv* equiv) {
  int n = static_cast<int>(g.nodes.size());
  std::vector<int> cls(n);
  std::iota(cls.begin(), cls.end(), 0);
  if (!equiv) return cls;
  if (equiv->class_key) {
    std::map<std::string, int> by_key;
    for (int i = 0; i < n; ++i) {
      std::string k = equiv->class_key(g.nodes[i]);
      auto [it, fresh] = by_key.emplace(k, i);
      cls[i] = it->second;
      (void)fresh;
    }
    return cls;
  }
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (find(i) != find(j) && equiv->pairwise(g.nodes[i], g.nodes[j])) parent[find(i)] = find(j);
  for (int i = 0; i < n; ++i) cls[i] = find(i);
  return cls;
}

// Class ids reachable from each node, as bitsets over classes.
std::vector<std::vector<std::uint64_t>> class_reachability(
    const TransitionGraph& g, const std::vector<std::vector<std::uint64_t>>& reach,
    const std::vector<int>& cls) {
  int n = static_cast<int>(g.nodes.size());
  std::vector<int> class_index(n, -1);
  int nclasses = 0;
  for (int i = 0; i < n; ++i)
    if (class_index[cls[i]] == -1) class_index[cls[i]] = nclasses++;
  std::size_t words = (nclasses + 63) / 64;
  std::vector<std::vector<std::uint64_t>> creach(n, std::vector<std::uint64_t>(words, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (TransitionGraph::bit(reach[i], j)) {
        int c = class_index[cls[j]];
        creach[i][c / 64] |= 1ull << (c % 64);
      }
  return creach;
}

bool intersects(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] & b[i]) return true;
  return false;
}

}  // namespace

OracleResult oracle_local_confluence(const std::vector<CanonState>& inits, const Program& prog,
                                     const OracleEquiv* equiv, const EnumLimits& limits) {
  OracleResult res;
  res.graph = enumerate_reachable(inits, prog, limits);
  const TransitionGraph& g = res.graph;
  auto reach = g.reachability();
  auto cls = equivalence_classes(g, equiv);
  auto creach = class_reachability(g, reach, cls);

  auto joinable = [&](int a, int b) {
    if (a == b) return true;
    if (intersects(reach[a], reach[b])) return true;
    return equiv != nullptr && intersects(creach[a], creach[b]);
  };

  int n = static_cast<int>(g.nodes.size());
  for (int u = 0; u < n; ++u) {
    const auto& outs = g.out_edges[u];
    for (std::size_t i = 0; i < outs.size(); ++i)
      for (std::size_t j = i + 1; j < outs.size(); ++j) {
        const auto& e1 = g.edges[outs[i]];
        const auto& e2 = g.edges[outs[j]];
        if (e1.to == e2.to) continue;
        ++res.corners_checked;
        if (!joinable(e1.to, e2.to)) {
          res.status = OracleResult::Status::NonJoinable;
          res.witness = CornerWitness{g.nodes[u], g.nodes[e1.to], g.nodes[e2.to], e1.label,
                                      e2.label, false};
          return res;
        }
      }
  }
  if (equiv) {
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) {
        if (u == v || cls[u] != cls[v]) continue;
        for (std::size_t ei : g.out_edges[u]) {
          const auto& e = g.edges[ei];
          ++res.corners_checked;
          if (!joinable(v, e.to)) {
            res.status = OracleResult::Status::NonJoinable;
            res.witness =
                CornerWitness{g.nodes[u], g.nodes[v], g.nodes[e.to], std::nullopt, e.label, true};
            return res;
          }
        }
      }
  }
  res.status = g.truncated ? OracleResult::Status::Inconclusive : OracleResult::Status::AllJoinable;
  return res;
}

GlobalConfluenceResult oracle_global_confluence(const std::vector<CanonState>& inits,
                                                const Program& prog, const OracleEquiv* equiv,
                                                const EnumLimits& limits) {
  GlobalConfluenceResult res;
  TransitionGraph g = enumerate_reachable(inits, prog, limits);
  if (g.truncated) return res;
  res.complete = true;
  auto reach = g.reachability();
  auto cls = equivalence_classes(g, equiv);
  auto creach = class_reachability(g, reach, cls);

  auto joinable = [&](int a, int b) {
    if (a == b) return true;
    if (intersects(reach[a], reach[b])) return true;
    return equiv != nullptr && intersects(creach[a], creach[b]);
  };

  int n = static_cast<int>(g.nodes.size());
  // Strong formulation: ancestors are any equivalent pair (equal when no
  // equivalence is given).
  for (int u = 0; u < n; ++u)
    for (int v = u; v < n; ++v) {
      if (u != v && (!equiv || cls[u] != cls[v])) continue;
      std::vector<int> ru, rv;
      for (int i = 0; i < n; ++i) {
        if (TransitionGraph::bit(reach[u], i)) ru.push_back(i);
        if (TransitionGraph::bit(reach[v], i)) rv.push_back(i);
      }
      for (int a : ru)
        for (int b : rv)
          if (!joinable(a, b)) {
            res.confluent = false;
            res.counterexample = {g.nodes[a], g.nodes[b]};
            return res;
          }
    }
  res.confluent = true;
  return res;
}

std::string TransitionGraph::to_dot(const Program* prog) const {
  std::ostringstream os;
  os << "digraph states {\n  node [shape=box,fontname=\"monospace\"];\n";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    os << "  n" << i << " [label=\"" << nodes[i].key() << "\"];\n";
  }
  for (const Edge& e : edges) {
    os << "  n" << e.from << " -> n" << e.to << " [label=\"" << e.label.to_string(prog)
       << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string TransitionGraph::to_json(const Program* prog) const {
  nlohmann::json j;
  j["truncated"] = truncated;
  j["nodes"] = nlohmann::json::array();
  for (const CanonState& s : nodes) j["nodes"].push_back(s.key());
  j["edges"] = nlohmann::json::array();
  for (const Edge& e : edges) {
    j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"label", e.label.to_string(prog)}});
  }
  return j.dump(2);
}

}  // namespace chrconf
