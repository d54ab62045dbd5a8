#include "chrconf/confluence.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <sstream>

namespace chrconf {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Confluent: return "CONFLUENT";
    case Verdict::LocallyConfluent: return "LOCALLY_CONFLUENT";
    case Verdict::NotConfluent: return "NOT_CONFLUENT";
    case Verdict::CannotProve: return "CANNOT_PROVE";
  }
  return "?";
}

std::string to_string(CheckMode m) {
  switch (m) {
    case CheckMode::Classical: return "classical";
    case CheckMode::Invariant: return "invariant";
    case CheckMode::ModEquiv: return "mod-equiv";
  }
  return "?";
}

std::set<std::string> CriticalCorner::rigid_vars() const {
  std::set<std::string> vs = ancestor.var_set();
  for (const auto& v : left.var_set()) vs.insert(v);
  for (const auto& v : right.var_set()) vs.insert(v);
  for (const MetaConstraint& c : where) {
    std::set<std::string> cs;
    // reuse the template var collector via a scratch template
    StateTemplate scratch;
    (void)scratch;
    switch (c.kind) {
      case MetaConstraint::Kind::TypeOf:
        for (const auto& v : c.subject.var_set()) vs.insert(v);
        break;
      case MetaConstraint::Kind::Perm:
        for (const auto& v : c.perm_lhs.var_set()) vs.insert(v);
        for (const auto& v : c.perm_rhs.var_set()) vs.insert(v);
        break;
      case MetaConstraint::Kind::Modal:
        for (const Term& t : c.modal.hyp)
          for (const auto& v : t.var_set()) vs.insert(v);
        for (const Term& t : c.modal.concl)
          for (const auto& v : t.var_set()) vs.insert(v);
        if (c.modal.hyp_rest) vs.insert(*c.modal.hyp_rest);
        if (c.modal.concl_rest) vs.insert(*c.modal.concl_rest);
        break;
      default:
        break;
    }
    (void)cs;
  }
  return vs;
}

std::string CriticalCorner::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Alpha:
      os << "alpha corner (rules " << rule_left << "," << rule_right << ")";
      break;
    case Kind::BetaRule:
      os << "beta corner (rule " << rule_right << ")";
      break;
    case Kind::BetaBuiltin:
      os << "beta corner (built-in " << builtin_atom.to_string() << ")";
      break;
  }
  os << "\n  left:     " << left.to_string();
  os << "\n  ancestor: " << ancestor.to_string();
  os << "\n  right:    " << right.to_string();
  if (!where.empty()) {
    os << "\n  where:    ";
    for (std::size_t i = 0; i < where.size(); ++i) os << (i ? " & " : "") << where[i].to_string();
  }
  return os.str();
}

namespace {

std::string joint_render(const StateTemplate& ancestor, const StateTemplate& a,
                         const StateTemplate& b, const std::vector<MetaConstraint>& where) {
  // First-occurrence renaming over skeleton-sorted atoms of the three parts.
  auto sorted_atoms = [](const StateTemplate& st) {
    std::vector<Term> atoms = st.store;
    std::sort(atoms.begin(), atoms.end(),
              [](const Term& x, const Term& y) { return x.skeleton() < y.skeleton(); });
    return atoms;
  };
  Subst renaming;
  int counter = 0;
  auto name_vars = [&](const std::vector<Term>& atoms) {
    for (const Term& t : atoms) {
      std::vector<std::string> vs;
      t.collect_vars(vs);
      for (const auto& v : vs)
        if (!renaming.bound(v)) renaming.compose_bind(v, Term::var("V" + std::to_string(counter++)));
    }
  };
  auto name_rest = [&](const StateTemplate& st) {
    if (st.store_rest && !renaming.bound(*st.store_rest))
      renaming.compose_bind(*st.store_rest, Term::var("V" + std::to_string(counter++)));
    if (st.builtin_rest && !renaming.bound(*st.builtin_rest))
      renaming.compose_bind(*st.builtin_rest, Term::var("V" + std::to_string(counter++)));
  };
  std::vector<Term> sa = sorted_atoms(ancestor), s1 = sorted_atoms(a), s2 = sorted_atoms(b);
  name_vars(sa);
  name_rest(ancestor);
  name_vars(s1);
  name_rest(a);
  name_vars(s2);
  name_rest(b);
  for (const Term& t : ancestor.builtins) name_vars({t});

  auto rest_name = [&](const std::optional<std::string>& rest) -> std::string {
    if (!rest) return "";
    Term v = renaming.apply(Term::var(*rest));
    return "|" + (v.is_var() ? v.name() : v.to_string());
  };
  auto render = [&](const StateTemplate& st, const std::vector<Term>& atoms) {
    std::vector<std::string> parts;
    for (const Term& t : atoms) parts.push_back(renaming.apply(t).to_string());
    std::sort(parts.begin(), parts.end());
    std::string out = "{";
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
    out += rest_name(st.store_rest);
    out += "};";
    std::vector<std::string> bs;
    for (const Term& t : st.builtins) bs.push_back(renaming.apply(t).to_string());
    std::sort(bs.begin(), bs.end());
    for (std::size_t i = 0; i < bs.size(); ++i) out += (i ? "&" : "") + bs[i];
    out += rest_name(st.builtin_rest);
    return out;
  };
  std::string w;
  {
    std::vector<std::string> ws;
    for (const MetaConstraint& raw : where) {
      MetaConstraint c = raw.applied(renaming);
      if (c.kind == MetaConstraint::Kind::Perm) {
        // Perm is symmetric: render with sorted arguments.
        std::string x = c.perm_lhs.to_string(), y = c.perm_rhs.to_string();
        if (y < x) std::swap(x, y);
        ws.push_back("perm(" + x + "," + y + ")");
        continue;
      }
      ws.push_back(c.to_string());
    }
    std::sort(ws.begin(), ws.end());
    ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
    for (const auto& x : ws) w += x + ";";
  }
  return render(ancestor, sa) + " / " + render(a, s1) + " / " + render(b, s2) + " ? " + w;
}

}  // namespace

std::string CriticalCorner::canonical_key() const {
  std::string k1 = joint_render(ancestor, left, right, where);
  std::string k2 = joint_render(ancestor, right, left, where);
  return std::min(k1, k2);
}

// ---------------------------------------------------------------------------
// Pre-corner enumeration: all rule-pair overlaps, with the overlap mgu applied
// ---------------------------------------------------------------------------
namespace {

struct PreCorner {
  int rule_l = -1, rule_r = -1;
  std::vector<Term> ancestor, left, right;  // stores
  std::vector<Term> guards;                 // (G1 /\ G2) after the mgu
  std::vector<Term> guard_l, guard_r;
  std::set<std::string> locals_l, locals_r;
  std::vector<Term> overlap;
  Subst mgu;
};

void k_subsets(std::size_t n, std::size_t k, std::vector<std::size_t>& cur,
               std::size_t start, const std::function<void(const std::vector<std::size_t>&)>& f) {
  if (cur.size() == k) {
    f(cur);
    return;
  }
  for (std::size_t i = start; i < n; ++i) {
    cur.push_back(i);
    k_subsets(n, k, cur, i + 1, f);
    cur.pop_back();
  }
}

std::vector<PreCorner> enumerate_pre_corners(const Program& prog) {
  std::vector<PreCorner> out;
  int n = static_cast<int>(prog.rules.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      PreApplication pi = make_pre_application(prog.rules[i], i, Subst(), {});
      std::set<std::string> avoid = pi.instance.all_vars();
      PreApplication pj = make_pre_application(prog.rules[j], j, Subst(), avoid);

      const std::vector<Term>& Ki = pi.instance.kept;
      const std::vector<Term>& Ri = pi.instance.removed;
      std::vector<Term> heads_j = pj.instance.head();
      if (Ri.empty() || heads_j.empty()) continue;

      std::size_t maxk = std::min(Ri.size(), heads_j.size());
      for (std::size_t k = 1; k <= maxk; ++k) {
        std::vector<std::size_t> sa;
        k_subsets(Ri.size(), k, sa, 0, [&](const std::vector<std::size_t>& A) {
          std::vector<std::size_t> sb;
          k_subsets(heads_j.size(), k, sb, 0, [&](const std::vector<std::size_t>& Bfixed) {
            std::vector<std::size_t> B = Bfixed;
            std::sort(B.begin(), B.end());
            do {
              Subst mgu;
              bool ok = true;
              for (std::size_t t = 0; t < k && ok; ++t)
                ok = unify_extend(mgu, Ri[A[t]], heads_j[B[t]]);
              if (!ok) continue;

              PreCorner pc;
              pc.rule_l = i;
              pc.rule_r = j;
              pc.mgu = mgu;
              auto add_all = [&mgu](std::vector<Term>& dst, const std::vector<Term>& src,
                                    const std::vector<std::size_t>* skip = nullptr) {
                for (std::size_t p = 0; p < src.size(); ++p) {
                  if (skip && std::find(skip->begin(), skip->end(), p) != skip->end()) continue;
                  dst.push_back(mgu.apply(src[p]));
                }
              };
              // ancestor = Ki + (Ri \ A) + Kj + Rj
              add_all(pc.ancestor, Ki);
              add_all(pc.ancestor, Ri, &A);
              add_all(pc.ancestor, pj.instance.kept);
              add_all(pc.ancestor, pj.instance.removed);
              // left = Ki + (heads_j \ B) + C_i
              add_all(pc.left, Ki);
              add_all(pc.left, heads_j, &B);
              add_all(pc.left, pi.instance.body);
              // right = Ki + (Ri \ A) + Kj + C_j
              add_all(pc.right, Ki);
              add_all(pc.right, Ri, &A);
              add_all(pc.right, pj.instance.kept);
              add_all(pc.right, pj.instance.body);

              add_all(pc.guard_l, pi.instance.guard);
              add_all(pc.guard_r, pj.instance.guard);
              pc.guards = pc.guard_l;
              pc.guards.insert(pc.guards.end(), pc.guard_r.begin(), pc.guard_r.end());
              for (std::size_t t = 0; t < k; ++t) pc.overlap.push_back(mgu.apply(Ri[A[t]]));
              pc.locals_l = pi.local_vars;
              pc.locals_r = pj.local_vars;
              out.push_back(std::move(pc));
            } while (std::next_permutation(B.begin(), B.end()));
          });
        });
      }
    }
  }
  return out;
}

bool same_state_shared_vars(const std::vector<Term>& a, const std::vector<Term>& b) {
  // Syntactic multiset equality with shared variables held rigid.
  std::vector<Term> x = a, y = b;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

std::vector<Term> strip_true(std::vector<Term> atoms) {
  atoms.erase(std::remove_if(atoms.begin(), atoms.end(),
                             [](const Term& t) { return t.is_const() && t.name() == "true"; }),
              atoms.end());
  return atoms;
}

}  // namespace

std::vector<CriticalCorner> critical_alpha_corners_classical(const Program& prog) {
  std::vector<CriticalCorner> out;
  std::set<std::string> seen;
  for (const PreCorner& pc : enumerate_pre_corners(prog)) {
    BuiltinStore g = BuiltinStore::from_atoms(pc.guards);
    if (!g.satisfiable()) continue;
    if (same_state_shared_vars(pc.left, pc.right)) continue;

    CriticalCorner c;
    c.kind = CriticalCorner::Kind::Alpha;
    c.rule_left = pc.rule_l;
    c.rule_right = pc.rule_r;
    c.overlap = pc.overlap;
    c.unifier = pc.mgu;
    c.ancestor.store = pc.ancestor;
    c.ancestor.builtins = strip_true(pc.guards);
    c.left.store = pc.left;
    c.left.builtins = c.ancestor.builtins;
    c.right.store = pc.right;
    c.right.builtins = c.ancestor.builtins;
    if (seen.insert(c.canonical_key()).second) out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const CriticalCorner& a, const CriticalCorner& b) {
    return a.canonical_key() < b.canonical_key();
  });
  return out;
}

namespace {

// Lifts a pre-corner and assembles its WHERE part (invariant, store
// validity and guard-entailment obligations); emits one corner
// per invariant-template resolution that is not provably inconsistent.
void lift_alpha_corner(const PreCorner& pc, const MetaEngine& engine,
                       std::vector<CriticalCorner>& out, std::set<std::string>& seen) {
  Subst lift_map;
  CriticalCorner base;
  base.kind = CriticalCorner::Kind::Alpha;
  base.rule_left = pc.rule_l;
  base.rule_right = pc.rule_r;

  std::vector<Term> guards_m = meta::lift(strip_true(pc.guards), lift_map);
  base.ancestor.store = meta::lift(pc.ancestor, lift_map);
  base.left.store = meta::lift(pc.left, lift_map);
  base.right.store = meta::lift(pc.right, lift_map);
  std::vector<Term> guard_l_m = meta::lift(strip_true(pc.guard_l), lift_map);
  std::vector<Term> guard_r_m = meta::lift(strip_true(pc.guard_r), lift_map);
  for (const Term& t : pc.overlap) base.overlap.push_back(meta::lift(t, lift_map));

  std::string splus = fresh_var_name("S");
  std::string bplus = fresh_var_name("B");
  for (StateTemplate* st : {&base.ancestor, &base.left, &base.right}) {
    st->store_rest = splus;
    st->builtins = guards_m;
    st->builtin_rest = bplus;
  }

  auto lift_locals = [&lift_map](const std::set<std::string>& ls) {
    std::vector<std::string> out_ls;
    for (const auto& l : ls) {
      Term lv = lift_map.apply(Term::var(l));
      if (lv.is_var()) out_ls.push_back(lv.name());
    }
    return out_ls;
  };
  std::vector<std::string> locals_l = lift_locals(pc.locals_l);
  std::vector<std::string> locals_r = lift_locals(pc.locals_r);

  std::vector<MetaConstraint> M;
  if (engine.invariant()) M.push_back(MetaConstraint::inv(base.ancestor));
  if (auto b0 = MetaConstraint::modal_succeed(guards_m, bplus); true) M.push_back(b0);
  if (auto gl = MetaConstraint::modal_implies(guards_m, bplus, locals_l, guard_l_m);
      !guard_l_m.empty())
    M.push_back(gl);
  if (auto gr = MetaConstraint::modal_implies(guards_m, bplus, locals_r, guard_r_m);
      !guard_r_m.empty())
    M.push_back(gr);
  std::vector<std::string> all_locals = locals_l;
  all_locals.insert(all_locals.end(), locals_r.begin(), locals_r.end());
  if (!all_locals.empty()) M.push_back(MetaConstraint::fresh(all_locals));

  for (const MetaEngine::Resolution& r : engine.resolve(M)) {
    CriticalCorner c = base;
    c.ancestor = base.ancestor.applied(r.binding);
    c.left = base.left.applied(r.binding);
    c.right = base.right.applied(r.binding);
    c.where = r.residual;
    c.unifier = pc.mgu;
    MetaState anc{c.ancestor, c.where};
    if (engine.m_solve(anc).status == MetaEngine::Consistency::Inconsistent) continue;
    if (seen.insert(c.canonical_key()).second) out.push_back(std::move(c));
  }
}

}  // namespace

std::vector<CriticalCorner> critical_alpha_corners_meta(const Program& prog,
                                                        const MetaEngine& engine) {
  std::vector<CriticalCorner> out;
  std::set<std::string> seen;
  for (const PreCorner& pc : enumerate_pre_corners(prog)) {
    if (same_state_shared_vars(pc.left, pc.right)) continue;
    lift_alpha_corner(pc, engine, out, seen);
  }
  std::sort(out.begin(), out.end(), [](const CriticalCorner& a, const CriticalCorner& b) {
    return a.canonical_key() < b.canonical_key();
  });
  return out;
}

std::vector<CriticalCorner> critical_beta_corners(const Program& prog, const MetaEngine& engine) {
  std::vector<CriticalCorner> out;
  if (!engine.equivalence()) return out;
  std::set<std::string> seen;

  auto emit = [&](CriticalCorner base, std::vector<MetaConstraint> M,
                  const std::string& state_var) {
    for (const MetaEngine::Resolution& r : engine.resolve(M)) {
      CriticalCorner c = base;
      c.ancestor = base.ancestor.applied(r.binding);
      c.right = base.right.applied(r.binding);
      auto it = r.state_bindings.find(state_var);
      if (it == r.state_bindings.end()) continue;
      c.left = it->second.applied(r.binding);
      c.where = r.residual;
      MetaState anc{c.ancestor, c.where};
      if (engine.m_solve(anc).status == MetaEngine::Consistency::Inconsistent) continue;
      if (seen.insert(c.canonical_key()).second) out.push_back(std::move(c));
    }
  };

  // By rule application.
  for (int ri = 0; ri < static_cast<int>(prog.rules.size()); ++ri) {
    const Rule& rule = prog.rules[ri];
    Subst lift_map;
    std::vector<Term> kept_m = meta::lift(rule.kept, lift_map);
    std::vector<Term> removed_m = meta::lift(rule.removed, lift_map);
    std::vector<Term> guard_m = meta::lift(strip_true(rule.guard), lift_map);
    std::vector<Term> body_m = meta::lift(rule.body, lift_map);
    std::vector<std::string> locals_m;
    for (const auto& l : rule.local_vars()) {
      Term lv = lift_map.apply(Term::var(l));
      if (lv.is_var()) locals_m.push_back(lv.name());
    }
    std::string splus = fresh_var_name("S");
    std::string bplus = fresh_var_name("B");

    CriticalCorner base;
    base.kind = CriticalCorner::Kind::BetaRule;
    base.rule_right = ri;
    base.left_is_equiv = true;
    base.ancestor.store = kept_m;
    base.ancestor.store.insert(base.ancestor.store.end(), removed_m.begin(), removed_m.end());
    base.ancestor.store_rest = splus;
    base.ancestor.builtin_rest = bplus;
    base.right.store = kept_m;
    base.right.store.insert(base.right.store.end(), body_m.begin(), body_m.end());
    base.right.store_rest = splus;
    base.right.builtins = guard_m;
    base.right.builtin_rest = bplus;

    std::string state_var = fresh_var_name("Sigma");
    std::vector<MetaConstraint> M;
    if (engine.invariant()) M.push_back(MetaConstraint::inv(base.ancestor));
    M.push_back(MetaConstraint::modal_succeed({}, bplus));
    if (!guard_m.empty())
      M.push_back(MetaConstraint::modal_implies({}, bplus, locals_m, guard_m));
    if (!locals_m.empty()) M.push_back(MetaConstraint::fresh(locals_m));
    M.push_back(MetaConstraint::equiv_var(base.ancestor, state_var));
    emit(base, M, state_var);
  }

  // By built-in: one corner per built-in predicate occurring in rule bodies,
  // with fresh argument variables.
  std::set<std::pair<std::string, std::size_t>> body_builtins;
  for (const Rule& r : prog.rules)
    for (const Term& b : r.body) {
      if (b.is_var() || b.is_int()) continue;
      if (builtins::supported(b.functor(), b.arity()) && b.arity() > 0)
        body_builtins.insert({b.functor(), b.arity()});
    }
  for (const auto& [name, arity] : body_builtins) {
    std::vector<Term> args;
    std::vector<std::string> arg_names;
    for (std::size_t i = 0; i < arity; ++i) {
      std::string v = fresh_var_name("X");
      args.push_back(Term::var(v));
      arg_names.push_back(v);
    }
    Term batom = Term::compound(name, args);
    std::string splus = fresh_var_name("S");
    std::string bplus = fresh_var_name("B");

    CriticalCorner base;
    base.kind = CriticalCorner::Kind::BetaBuiltin;
    base.builtin_atom = batom;
    base.left_is_equiv = true;
    base.ancestor.store = {batom};
    base.ancestor.store_rest = splus;
    base.ancestor.builtin_rest = bplus;
    base.right.store_rest = splus;
    base.right.builtins = {batom};
    base.right.builtin_rest = bplus;

    std::string state_var = fresh_var_name("Sigma");
    std::vector<MetaConstraint> M;
    if (engine.invariant()) M.push_back(MetaConstraint::inv(base.ancestor));
    M.push_back(MetaConstraint::modal_succeed({}, bplus));
    M.push_back(MetaConstraint::fresh(arg_names));
    M.push_back(MetaConstraint::equiv_var(base.ancestor, state_var));
    emit(base, M, state_var);
  }

  std::sort(out.begin(), out.end(), [](const CriticalCorner& a, const CriticalCorner& b) {
    return a.canonical_key() < b.canonical_key();
  });
  return out;
}

// ---------------------------------------------------------------------------
// Joinability search
// ---------------------------------------------------------------------------
std::optional<JoinabilityProof> joinable(const CriticalCorner& corner, const MetaSemantics& sem,
                                         int join_depth, AuditSink* audit) {
  const MetaEngine& engine = sem.engine();
  std::set<std::string> rigid = corner.rigid_vars();

  struct Node {
    MetaState state;
    std::vector<JoinStep> path;
  };
  auto mk = [&](const StateTemplate& st) { return MetaState{st, corner.where}; };

  std::map<std::string, Node> seen_l, seen_r;
  std::vector<std::string> frontier_l, frontier_r;
  std::string kl = sem.normal_key(mk(corner.left), rigid);
  std::string kr = sem.normal_key(mk(corner.right), rigid);
  seen_l.emplace(kl, Node{mk(corner.left), {}});
  seen_r.emplace(kr, Node{mk(corner.right), {}});
  frontier_l.push_back(kl);
  frontier_r.push_back(kr);

  auto close = [&]() -> std::optional<JoinabilityProof> {
    for (const auto& [ka, na] : seen_l) {
      for (const auto& [kb, nb] : seen_r) {
        if (ka == kb) {
          JoinabilityProof p;
          p.left_path = na.path;
          p.right_path = nb.path;
          p.closed = JoinabilityProof::Closed::Equal;
          return p;
        }
      }
    }
    for (const auto& [ka, na] : seen_l) {
      for (const auto& [kb, nb] : seen_r) {
        StateTemplate sa = engine.normalize_state(corner.where, na.state.st);
        StateTemplate sb = engine.normalize_state(corner.where, nb.state.st);
        if (engine.entails_equiv(corner.where, sa, sb)) {
          JoinabilityProof p;
          p.left_path = na.path;
          p.right_path = nb.path;
          p.closed = JoinabilityProof::Closed::Equiv;
          return p;
        }
      }
    }
    return std::nullopt;
  };

  if (auto p = close()) return p;

  auto expand = [&](std::map<std::string, Node>& seen, std::vector<std::string>& frontier) {
    std::vector<std::string> next;
    for (const std::string& key : frontier) {
      Node node = seen.at(key);
      for (const MetaTransition& t : sem.successors(node.state)) {
        if (audit) audit->meta_transitions.push_back(t);
        std::string k = sem.normal_key(t.to, rigid);
        if (seen.count(k)) continue;
        Node nn{t.to, node.path};
        nn.path.push_back(JoinStep{t.label, t.to});
        seen.emplace(k, std::move(nn));
        next.push_back(k);
      }
    }
    frontier = std::move(next);
  };

  for (int depth = 0; depth < join_depth; ++depth) {
    if (frontier_l.empty() && frontier_r.empty()) break;
    expand(seen_l, frontier_l);
    if (auto p = close()) return p;
    expand(seen_r, frontier_r);
    if (auto p = close()) return p;
  }
  return std::nullopt;
}

bool SplitTree::split_joinable() const {
  switch (status) {
    case Status::Joinable:
    case Status::Inconsistent:
      return true;
    case Status::Stuck:
      return false;
    case Status::Split: {
      for (const SplitTree& c : children)
        if (!c.split_joinable()) return false;
      return true;
    }
  }
  return false;
}

namespace {

// Guard-derived case candidates: guard atoms of rules whose heads match a
// wing state, instantiated by the matching.
std::vector<Term> split_candidates(const CriticalCorner& corner, const MetaSemantics& sem,
                                   const std::vector<Term>& user_candidates) {
  const Program& prog = sem.program();
  const MetaEngine& engine = sem.engine();
  std::vector<Term> out;
  std::set<std::string> dedup;

  auto consider = [&](const Term& atom) {
    if (!atom.is_compound() || !builtins::is_comparison(atom.functor())) return;
    MetaConstraint c = MetaConstraint::modal_succeed({atom});
    if (engine.entails(corner.where, c) || engine.refutes(corner.where, c)) return;
    if (dedup.insert(atom.to_string()).second) out.push_back(atom);
  };

  for (const StateTemplate* wing : {&corner.left, &corner.right}) {
    for (const Rule& rule : prog.rules) {
      if (rule.guard.empty()) continue;
      Subst lift_map;
      std::vector<Term> heads_m = meta::lift(rule.head(), lift_map);
      std::vector<Term> guard_m = meta::lift(rule.guard, lift_map);
      std::vector<bool> used(wing->store.size(), false);
      std::vector<Subst> matches;
      std::function<void(std::size_t, const Subst&)> rec = [&](std::size_t k, const Subst& sigma) {
        if (k == heads_m.size()) {
          matches.push_back(sigma);
          return;
        }
        for (std::size_t p = 0; p < wing->store.size(); ++p) {
          if (used[p]) continue;
          Subst ext = sigma;
          if (!match_extend(ext, heads_m[k], wing->store[p])) continue;
          used[p] = true;
          rec(k + 1, ext);
          used[p] = false;
        }
      };
      rec(0, Subst());
      for (const Subst& sigma : matches) {
        for (const Term& g : sigma.apply(guard_m)) {
          // Skip candidates with free rule-local variables.
          bool free_locals = false;
          for (const auto& v : g.var_set())
            if (!corner.rigid_vars().count(v)) free_locals = true;
          if (!free_locals) consider(g);
        }
      }
    }
  }

  // User-declared case patterns: instantiate pattern variables over the
  // corner's integer-typed variables.
  auto vt = engine.var_types(corner.where);
  std::vector<std::string> int_vars;
  for (const auto& [v, ty] : vt)
    if (engine.types().resolve(ty).kind == TypeExpr::Kind::IntName) int_vars.push_back(v);
  for (const Term& pattern : user_candidates) {
    std::vector<std::string> pvars;
    pattern.collect_vars(pvars);
    std::function<void(std::size_t, Subst)> assign = [&](std::size_t k, Subst sigma) {
      if (k == pvars.size()) {
        consider(sigma.apply(pattern));
        return;
      }
      for (const auto& v : int_vars) {
        Subst ext = sigma;
        if (ext.compose_bind(pvars[k], Term::var(v))) assign(k + 1, ext);
      }
    };
    assign(0, Subst());
  }
  return out;
}

}  // namespace

SplitTree split_joinable(const CriticalCorner& corner, const MetaSemantics& sem,
                         const std::vector<Term>& user_candidates, int split_depth,
                         int join_depth, AuditSink* audit) {
  const MetaEngine& engine = sem.engine();
  SplitTree tree;
  tree.corner = corner;

  MetaState anc{corner.ancestor, corner.where};
  auto solve = engine.m_solve(anc);
  if (solve.status == MetaEngine::Consistency::Inconsistent) {
    tree.status = SplitTree::Status::Inconsistent;
    return tree;
  }
  if (auto proof = joinable(corner, sem, join_depth, audit)) {
    tree.status = SplitTree::Status::Joinable;
    tree.proof = std::move(proof);
    return tree;
  }
  if (split_depth <= 0) {
    tree.status = SplitTree::Status::Stuck;
    tree.stuck_reason = "split depth exhausted";
    return tree;
  }

  for (const Term& candidate : split_candidates(corner, sem, user_candidates)) {
    MetaConstraint cm = MetaConstraint::modal_succeed({candidate});
    SplitOutcome outcome;
    try {
      outcome = split(anc, cm, engine);
    } catch (const SplitError&) {
      continue;
    }
    if (outcome.pieces.empty()) continue;
    if (audit) {
      AuditSink::SplitEvent ev;
      ev.original = anc;
      ev.pieces = outcome.pieces;
      audit->splits.push_back(ev);
    }
    std::vector<SplitTree> children;
    bool all_ok = true;
    for (const MetaState& piece : outcome.pieces) {
      CriticalCorner sub = corner;
      sub.where = piece.where;
      SplitTree child =
          split_joinable(sub, sem, user_candidates, split_depth - 1, join_depth, audit);
      all_ok = all_ok && child.split_joinable();
      children.push_back(std::move(child));
      if (!all_ok) break;
    }
    for (const MetaState& piece : outcome.dropped) {
      SplitTree leaf;
      leaf.corner = corner;
      leaf.corner.where = piece.where;
      leaf.status = SplitTree::Status::Inconsistent;
      children.push_back(std::move(leaf));
    }
    if (all_ok) {
      tree.status = SplitTree::Status::Split;
      tree.case_constraint = cm;
      tree.children = std::move(children);
      return tree;
    }
  }
  tree.status = SplitTree::Status::Stuck;
  tree.stuck_reason = "no effective case constraint";
  return tree;
}

// ---------------------------------------------------------------------------
// check()
// ---------------------------------------------------------------------------
namespace {

// Ground instance of a classical corner: integer witnesses for variables
// constrained by the guards (varied across attempts), fresh inert constants
// elsewhere. Used only to certify non-joinability, never to prove it.
struct FrozenCorner {
  CanonState ancestor, left, right;
  bool valid = false;
};

FrozenCorner freeze_corner(const CriticalCorner& corner, const Program& prog,
                           std::uint64_t attempt) {
  FrozenCorner out;
  BuiltinStore g = BuiltinStore::from_atoms(corner.ancestor.builtins);
  if (!g.satisfiable()) return out;

  // Every variable occurring in a comparison guard must freeze to an
  // integer (equality merging may leave no residual difference bound for
  // it). Pin representatives one by one, walking outward from the solved
  // model by an attempt-dependent offset schedule.
  std::set<std::string> guard_int_vars;
  for (const Term& b : corner.ancestor.builtins)
    if (b.is_compound() && builtins::is_comparison(b.functor()))
      for (const auto& v : b.var_set()) guard_int_vars.insert(v);

  static const std::int64_t deltas[] = {0, -1, 1, -2, 2, -3, 3, -5, 5, -8, 8};
  BuiltinStore cur = g;
  Subst freeze;
  for (const auto& v : guard_int_vars) {
    Term rep = cur.apply(freeze.apply(Term::var(v)));
    if (!rep.is_var()) continue;  // already forced to a value
    auto model = cur.integer_model();
    std::int64_t base = model.count(rep.name()) ? model[rep.name()] : 0;
    bool pinned_ok = false;
    for (std::size_t i = 0; i < std::size(deltas); ++i) {
      std::int64_t c = base + deltas[(i + attempt) % std::size(deltas)];
      BuiltinStore pinned = cur.add(Term::compound("=", {rep, Term::integer(c)}));
      if (pinned.satisfiable()) {
        cur = pinned;
        freeze.compose_bind(rep.name(), Term::integer(c));
        pinned_ok = true;
        break;
      }
    }
    if (!pinned_ok) freeze.compose_bind(rep.name(), Term::integer(base));
  }
  int counter = 0;
  for (const auto& v : corner.rigid_vars()) {
    Term applied = freeze.apply(g.apply(Term::var(v)));
    if (applied.is_var() && applied.name() == v)
      freeze.compose_bind(v, Term::constant("$f" + std::to_string(++counter)));
  }

  auto mk = [&](const StateTemplate& st) {
    StateRepr repr;
    for (const Term& t : st.store) repr.store.push_back(freeze.apply(g.apply(t)));
    std::vector<Term> batoms;
    for (const Term& t : st.builtins) batoms.push_back(freeze.apply(g.apply(t)));
    for (const auto& v : repr.store)
      (void)v;
    repr.builtins = BuiltinStore::from_atoms(batoms);
    return canonicalize(repr);
  };
  out.ancestor = mk(corner.ancestor);
  out.left = mk(corner.left);
  out.right = mk(corner.right);

  // The witness is only usable when the corner's own transitions are real.
  bool saw_left = false, saw_right = false;
  for (const Transition& t : successors(out.ancestor, prog)) {
    if (t.to == out.left) saw_left = true;
    if (t.to == out.right) saw_right = true;
  }
  out.valid = saw_left && saw_right;
  return out;
}

}  // namespace

CheckResult check(const Program& prog, const CheckerSpec* spec, const CheckOptions& options) {
  auto t0 = std::chrono::steady_clock::now();
  CheckResult res;
  res.mode = options.mode;
  res.termination_asserted = options.assume_terminating;

  if (options.mode != CheckMode::Classical) {
    if (!spec) throw std::invalid_argument("invariant and mod-equiv modes require a spec file");
    if (spec->invariant.empty())
      throw std::invalid_argument("invariant and mod-equiv modes require invariant templates");
    if (options.mode == CheckMode::ModEquiv && spec->equivalence.empty())
      throw std::invalid_argument("mod-equiv mode requires equivalence templates");
  }

  if (options.mode == CheckMode::Classical) {
    std::vector<CriticalCorner> corners = critical_alpha_corners_classical(prog);
    TypeTable no_types;
    MetaEngine engine(no_types, nullptr, nullptr);
    MetaSemantics sem(prog, engine);
    bool all_joinable = true;
    bool any_certified = false;
    bool any_truncated = false;
    for (const CriticalCorner& corner : corners) {
      CornerReport report;
      report.corner = corner;
      report.tree.corner = corner;

      // Joinability must hold for every instance of the corner: reduce the
      // wings symbolically, with the corner's variables rigid and guard
      // entailment drawn from the corner's built-in store.
      CriticalCorner symbolic = corner;
      for (const Term& b : corner.ancestor.builtins)
        symbolic.where.push_back(MetaConstraint::modal_succeed({b}));
      if (auto proof = joinable(symbolic, sem, options.limits.join_depth, &res.audit)) {
        report.tree.status = SplitTree::Status::Joinable;
        report.tree.proof = std::move(proof);
        res.corners.push_back(std::move(report));
        continue;
      }
      all_joinable = false;

      // Not provably joinable: look for a ground instance certifying
      // non-joinability by exhaustive wing enumeration.
      report.tree.status = SplitTree::Status::Stuck;
      report.tree.stuck_reason = "not joinable within the search depth";
      for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
        FrozenCorner frozen = freeze_corner(corner, prog, attempt);
        if (!frozen.valid) continue;
        TransitionGraph gl = enumerate_reachable({frozen.left}, prog, options.limits.enumeration);
        TransitionGraph gr = enumerate_reachable({frozen.right}, prog, options.limits.enumeration);
        if (gl.truncated || gr.truncated) {
          any_truncated = true;
          continue;
        }
        bool intersect = false;
        for (const CanonState& s : gl.nodes)
          if (gr.index.count(s.key())) intersect = true;
        if (!intersect) {
          report.witness_ancestor = frozen.ancestor;
          report.exhaustive = true;
          report.wings_joinable = false;
          report.left_closure = gl.nodes.size();
          report.right_closure = gr.nodes.size();
          report.certified_nonjoinable = true;
          report.tree.stuck_reason = "wings have disjoint reachable closures on a ground witness";
          any_certified = true;
          break;
        }
      }
      res.corners.push_back(std::move(report));
    }
    if (any_certified)
      res.verdict = Verdict::NotConfluent;
    else if (all_joinable)
      res.verdict = options.assume_terminating ? Verdict::Confluent : Verdict::LocallyConfluent;
    else
      res.verdict = Verdict::CannotProve;
    if (any_truncated) res.notes.push_back("some wing enumerations were truncated");

    if (options.cross_check > 0) {
      bool positive =
          res.verdict == Verdict::Confluent || res.verdict == Verdict::LocallyConfluent;
      for (const CornerReport& r : res.corners) {
        if (!r.witness_ancestor) continue;
        OracleResult oracle = oracle_local_confluence({*r.witness_ancestor}, prog, nullptr,
                                                      options.limits.enumeration);
        CrossCheckEntry entry;
        entry.instance = r.witness_ancestor->key();
        entry.oracle_status = oracle.status == OracleResult::Status::AllJoinable ? "all-joinable"
                              : oracle.status == OracleResult::Status::NonJoinable
                                  ? "non-joinable-corner"
                                  : "inconclusive";
        entry.agrees = !(positive && oracle.status == OracleResult::Status::NonJoinable);
        res.cross_checks.push_back(std::move(entry));
      }
    }
  } else {
    const InvariantSpec* inv = &spec->invariant;
    const EquivSpec* eq = options.mode == CheckMode::ModEquiv ? &spec->equivalence : nullptr;
    MetaEngine engine(spec->types, inv, eq);
    MetaSemantics sem(prog, engine);
    OracleEquiv oe;
    oe.pairwise = [&engine](const CanonState& a, const CanonState& b) {
      return engine.equiv_ground(a, b);
    };

    std::vector<CriticalCorner> corners = critical_alpha_corners_meta(prog, engine);
    if (options.mode == CheckMode::ModEquiv && options.include_beta) {
      for (CriticalCorner& c : critical_beta_corners(prog, engine)) corners.push_back(std::move(c));
    }

    bool all_ok = true;
    for (const CriticalCorner& corner : corners) {
      // The corner's own transitions participate in the simulation audit.
      if (!corner.left_is_equiv) {
        TransitionLabel ll;
        ll.kind = TransitionLabel::Kind::RuleApp;
        ll.rule_index = corner.rule_left;
        res.audit.meta_transitions.push_back(
            MetaTransition{MetaState{corner.ancestor, corner.where},
                           MetaState{corner.left, corner.where}, ll});
      }
      TransitionLabel rl;
      if (corner.kind == CriticalCorner::Kind::BetaBuiltin) {
        rl.kind = TransitionLabel::Kind::Builtin;
        rl.builtin_atom = corner.builtin_atom;
      } else {
        rl.kind = TransitionLabel::Kind::RuleApp;
        rl.rule_index = corner.rule_right;
      }
      res.audit.meta_transitions.push_back(
          MetaTransition{MetaState{corner.ancestor, corner.where},
                         MetaState{corner.right, corner.where}, rl});

      CornerReport report;
      report.corner = corner;
      report.tree = split_joinable(corner, sem, spec->split_candidates,
                                   options.limits.split_depth, options.limits.join_depth,
                                   &res.audit);
      all_ok = all_ok && report.tree.split_joinable();
      res.corners.push_back(std::move(report));
    }

    if (all_ok) {
      res.verdict = options.assume_terminating ? Verdict::Confluent : Verdict::LocallyConfluent;
    } else {
      // Attempt an object-level certification of non-confluence from sampled
      // concretizations of the failed corners.
      res.verdict = Verdict::CannotProve;
      for (CornerReport& report : res.corners) {
        if (report.tree.split_joinable()) continue;
        MetaState anc{report.corner.ancestor, report.corner.where};
        for (const CanonState& s :
             sample_concretizations(anc, 4, options.limits.seed, engine)) {
          OracleResult oracle = oracle_local_confluence({s}, prog, eq ? &oe : nullptr,
                                                        options.limits.enumeration);
          if (oracle.status == OracleResult::Status::NonJoinable) {
            report.certified_nonjoinable = true;
            report.witness_ancestor = oracle.witness->ancestor;
            res.verdict = Verdict::NotConfluent;
            break;
          }
        }
        if (res.verdict == Verdict::NotConfluent) break;
      }
    }

    if (options.audit_invariant) {
      for (const InvariantTemplate& T : spec->invariant.templates) {
        MetaState ms{T.state, T.where};
        for (const CanonState& s : sample_concretizations(ms, 5, options.limits.seed, engine)) {
          for (const Transition& t : successors(s, prog)) {
            if (!engine.inv_holds_ground(t.to))
              res.invariant_warnings.push_back("invariant not preserved: " + s.key() + " -> " +
                                               t.to.key());
          }
        }
      }
    }

    if (options.cross_check > 0) {
      bool positive =
          res.verdict == Verdict::Confluent || res.verdict == Verdict::LocallyConfluent;
      for (const CornerReport& r : res.corners) {
        MetaState anc{r.corner.ancestor, r.corner.where};
        for (const CanonState& s :
             sample_concretizations(anc, options.cross_check, options.limits.seed, engine)) {
          OracleResult oracle =
              oracle_local_confluence({s}, prog, eq ? &oe : nullptr, options.limits.enumeration);
          CrossCheckEntry entry;
          entry.instance = s.key();
          entry.oracle_status = oracle.status == OracleResult::Status::AllJoinable
                                    ? "all-joinable"
                                    : oracle.status == OracleResult::Status::NonJoinable
                                        ? "non-joinable-corner"
                                        : "inconclusive";
          entry.agrees = !(positive && oracle.status == OracleResult::Status::NonJoinable);
          res.cross_checks.push_back(std::move(entry));
        }
      }
    }
  }

  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace chrconf
