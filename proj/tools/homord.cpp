// homord: command-line front end for the structure, group, path, sampler,
// statistics and CRO modules.
//
// Exit codes: 0 when every requested verdict passes, 1 when some verdict
// fails, 2 on invalid input or resource errors.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "homord/builders.hpp"
#include "homord/cro.hpp"
#include "homord/errors.hpp"
#include "homord/group.hpp"
#include "homord/io.hpp"
#include "homord/samplers.hpp"
#include "homord/stats.hpp"
#include "homord/tau_paths.hpp"

using namespace homord;

namespace {

struct Globals {
  std::uint64_t seed = 7;
  bool json = false;
  std::string out;
  unsigned workers = 1;
};

std::vector<Element> parse_list(const std::string& text) {
  std::vector<Element> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (item.empty()) continue;
    try {
      out.push_back(static_cast<Element>(std::stol(item)));
    } catch (const std::exception&) {
      throw ValidationError("expected a comma-separated list of elements, got '" + text + "'");
    }
  }
  return out;
}

// "0,1;2,3" -> tuples
std::vector<Tuple> parse_tuples(const std::string& text) {
  std::vector<Tuple> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ';');)
    if (!item.empty()) out.push_back(parse_list(item));
  return out;
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw ValidationError("cannot write '" + g.out + "'");
  f << text;
}

void emit(const Globals& g, const Json& j) { emit(g, j.dump(2) + "\n"); }

const FinStructure& pick_level(const StructureChain& chain, int level) {
  const int n = static_cast<int>(chain.levels.size());
  const int idx = level < 0 ? n + level : level;
  if (idx < 0 || idx >= n)
    throw ValidationError("level " + std::to_string(level) + " out of range (chain has " + std::to_string(n) + ")");
  return chain.levels[static_cast<std::size_t>(idx)];
}

TypeCode parse_tau(const FinStructure& s, const std::string& tau) {
  if (tau == "edge" || tau == "non-edge") {
    const auto E = s.signature().find("E");
    if (!E) throw ValidationError("--tau edge|non-edge needs a relation named E");
    const bool want = tau == "edge";
    std::optional<TypeCode> found;
    for_each_distinct_tuple(s.size(), 2, [&](std::span<const Element> t) {
      if (s.holds(*E, t[0], t[1]) == want) {
        found = canonical_type(s, t);
        return false;
      }
      return true;
    });
    if (!found) throw PreconditionError("no " + tau + " pair in the structure");
    return *found;
  }
  return TypeCode::from_hex(tau);
}

// Sampler construction shared by sample, estimate and test.
struct SamplerOptions {
  std::string in;
  int level = -1;
  std::string kind = "uniform";
  std::string points;
  std::string atoms;        // "loc:mass,loc:mass"
  std::string tie_order;    // elements, least first
  bool reverse_tie = false;
  double condition = -1;    // atom location to condition on
  Element anchor = 0;
  double beta = 0.5;
  std::uint64_t max_tries = 10'000'000;
};

void add_sampler_options(CLI::App* cmd, SamplerOptions& o) {
  cmd->add_option("--in", o.in, "structure or chain file (.json chain, else text format)")->required();
  cmd->add_option("--level", o.level, "chain level; negative counts from the end")->capture_default_str();
  cmd->add_option("--sampler", o.kind, "uniform|atoms|pq|bimin|involution|dual|biased|broken")
      ->capture_default_str();
  cmd->add_option("--points", o.points, "comma-separated elements");
  cmd->add_option("--atoms", o.atoms, "atoms as loc:mass,loc:mass");
  cmd->add_option("--tie-order", o.tie_order, "tie-break order, least first (default: lt if present, else ids)");
  cmd->add_flag("--reverse-tie", o.reverse_tie, "use the reverse of the tie-break order");
  cmd->add_option("--condition", o.condition, "condition the atom sampler on z = this atom at --points");
  cmd->add_option("--anchor", o.anchor, "anchor of the biased self-test sampler")->capture_default_str();
  cmd->add_option("--beta", o.beta, "key shift of the biased self-test sampler")->capture_default_str();
  cmd->add_option("--max-tries", o.max_tries, "rejection budget when conditioning")->capture_default_str();
}

AtomSpec parse_atoms(const SamplerOptions& o, const FinStructure& s, const std::vector<Element>& domain) {
  AtomSpec spec;
  FixedOrder order;
  if (!o.tie_order.empty()) {
    auto seq = parse_list(o.tie_order);
    if (o.reverse_tie) std::reverse(seq.begin(), seq.end());
    order = FixedOrder::listing("tie", seq);
  } else if (s.signature().find("lt")) {
    order = FixedOrder::from_structure(s, domain, o.reverse_tie);
  } else {
    auto seq = domain;
    if (o.reverse_tie) std::reverse(seq.begin(), seq.end());
    order = FixedOrder::listing(o.reverse_tie ? "ids-reversed" : "ids", seq);
  }
  spec.orders.push_back(order);
  std::stringstream in(o.atoms);
  for (std::string item; std::getline(in, item, ',');) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ValidationError("atom '" + item + "' needs loc:mass");
    try {
      spec.atoms.push_back(Atom{std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)), 0});
    } catch (const std::invalid_argument&) {
      throw ValidationError("atom '" + item + "' needs numeric loc:mass");
    }
  }
  return spec;
}

std::unique_ptr<Sampler> make_sampler(const SamplerOptions& o, const FinStructure& s) {
  auto points = parse_list(o.points);
  auto domain = points.empty() ? UniformOrderSampler::all_elements(s) : points;
  if (o.kind == "uniform") return std::make_unique<UniformOrderSampler>(domain);
  if (o.kind == "atoms") {
    auto spec = parse_atoms(o, s, domain);
    if (o.condition >= 0) return std::make_unique<ConditionedAtomSampler>(condition_on_atom(spec, o.condition, domain, o.max_tries));
    return std::make_unique<AtomOrderSampler>(domain, spec);
  }
  if (o.kind == "pq") return std::make_unique<PQOrderSampler>(s);
  if (o.kind == "bimin") return std::make_unique<BipartiteMinSampler>(s);
  if (o.kind == "involution") return std::make_unique<InvolutionSampler>(s);
  if (o.kind == "dual") return std::make_unique<DualFunctionalSampler>(s);
  if (o.kind == "biased") return std::make_unique<EdgeBiasedSampler>(s, o.anchor, o.beta);
  if (o.kind == "broken") return std::make_unique<BrokenCouplingSampler>(domain);
  throw ValidationError("unknown sampler '" + o.kind + "'");
}

std::string verdict_line(const TestVerdict& v) {
  std::ostringstream out;
  out << (v.pass ? "PASS " : "FAIL ") << v.name << ": statistic " << v.statistic << ", threshold " << v.threshold
      << " (" << v.rule << "), n " << v.n << ", seed " << v.seed;
  if (!v.detail.empty()) out << "; " << v.detail;
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homord: finite homogeneous structures, invariant orders and their tests"};
  app.set_config("--config", "", "key = value file mirroring the flags ([subcommand] sections)");
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_flag("--json", g.json, "machine-readable output");
  app.add_option("--out", g.out, "write output to this file instead of stdout");
  app.add_option("--workers", g.workers, "threads for Monte Carlo estimation")->capture_default_str();

  int status = 0;

  // build -------------------------------------------------------------------
  auto* build = app.add_subcommand("build", "build a chain of finite structures");
  std::string cls = "graph";
  int sat = 2;
  std::size_t cap = 64, size = 8, sizeP = 3, sizeQ = 3, mSize = 10;
  int paley = 0;
  std::string pairs = "2,4,6";
  build->add_option("--class", cls, "class name, e.g. graph, kn_free_graph:3, f2_vector_space:3")->capture_default_str();
  build->add_option("--sat", sat, "saturation target for witness completion")->capture_default_str();
  build->add_option("--cap", cap, "size cap for witness completion")->capture_default_str();
  build->add_option("--paley", paley, "graph: Paley graph P(q); 0 with --class paley-chain for P(5) < P(13)");
  build->add_option("--size", size, "linear_order size")->capture_default_str();
  build->add_option("--p", sizeP, "two_predicate_PQ: |P|")->capture_default_str();
  build->add_option("--q", sizeQ, "two_predicate_PQ: |Q|")->capture_default_str();
  build->add_option("--m", mSize, "bipartite_deg2: number of S0 elements")->capture_default_str();
  build->add_option("--pairs", pairs, "involution_order: pair counts per level")->capture_default_str();
  build->callback([&] {
    StructureChain chain;
    if (cls == "paley-chain") {
      chain = build_paley_chain();
    } else if (paley > 0) {
      chain.class_name = "graph";
      chain.seed = g.seed;
      chain.levels.push_back(build_paley_graph(paley));
      chain.saturation.push_back(saturation_depth(FraisseClassSpec::make(ClassKind::graph), chain.levels[0], 4));
      chain.relative_saturation.push_back(0);
    } else {
      const auto spec = FraisseClassSpec::parse(cls);
      auto single = [&](FinStructure s) {
        chain.class_name = spec.name();
        chain.seed = g.seed;
        chain.levels.push_back(std::move(s));
        chain.saturation.push_back(-1);
        chain.relative_saturation.push_back(0);
      };
      switch (spec.kind()) {
        case ClassKind::linear_order: single(build_linear_order(size)); break;
        case ClassKind::two_predicate_PQ: single(build_two_predicate_PQ(sizeP, sizeQ)); break;
        case ClassKind::bipartite_deg2: single(build_bipartite_deg2(mSize, g.seed)); break;
        case ClassKind::f2_vector_space: single(build_f2_vector_space(spec.param())); break;
        case ClassKind::involution_order: {
          std::vector<std::size_t> counts;
          for (auto c : parse_list(pairs)) counts.push_back(static_cast<std::size_t>(c));
          chain = build_involution_chain(counts, g.seed);
          break;
        }
        default: chain = build_generic(spec, sat, cap, g.seed);
      }
    }
    if (g.json || !g.out.empty()) {
      emit(g, to_json(chain));
    } else {
      std::ostringstream out;
      out << "class " << chain.class_name << ", " << chain.levels.size() << " levels\n";
      for (std::size_t i = 0; i < chain.levels.size(); ++i)
        out << "  level " << i << ": size " << chain.levels[i].size() << ", saturation " << chain.saturation[i]
            << ", relative " << chain.relative_saturation[i] << '\n';
      emit(g, out.str());
    }
  });

  // orbits ------------------------------------------------------------------
  auto* orb = app.add_subcommand("orbits", "orbits of a pointwise stabilizer on k-tuples");
  std::string in;
  int level = -1;
  std::size_t k = 2;
  std::string fix;
  orb->add_option("--in", in, "structure or chain file")->required();
  orb->add_option("--level", level, "chain level")->capture_default_str();
  orb->add_option("--k", k, "tuple length")->capture_default_str();
  orb->add_option("--fix", fix, "comma-separated fixed elements");
  orb->callback([&] {
    const auto chain = load_chain(in);
    const auto& s = pick_level(chain, level);
    const auto fixed = parse_list(fix);
    const auto p = orbits(s, k, fixed);
    if (g.json) {
      auto j = to_json(p);
      j["types"] = enumerate_types(s, k).size();
      emit(g, j);
    } else {
      std::ostringstream out;
      out << p.blocks.size() << " orbits on " << k << "-tuples\n";
      for (const auto& b : p.blocks) {
        out << "  [" << b.size() << "]";
        for (std::size_t i = 0; i < std::min<std::size_t>(b.size(), 6); ++i) {
          out << " (";
          for (std::size_t j = 0; j < b[i].size(); ++j) out << (j ? "," : "") << b[i][j];
          out << ")";
        }
        out << (b.size() > 6 ? " ...\n" : "\n");
      }
      emit(g, out.str());
    }
  });

  // acl ---------------------------------------------------------------------
  auto* acl = app.add_subcommand("acl", "orbit growth of b under the stabilizer of A along a chain");
  std::string aset;
  Element bpt = 0;
  acl->add_option("--in", in, "chain file")->required();
  acl->add_option("--A", aset, "comma-separated elements of A");
  acl->add_option("--b", bpt, "the element b")->required();
  acl->callback([&] {
    const auto chain = load_chain(in);
    const auto p = acl_profile(chain, parse_list(aset), bpt);
    if (g.json) {
      emit(g, to_json(p));
    } else {
      std::ostringstream out;
      out << to_string(p.verdict) << "; orbit sizes";
      for (auto sz : p.orbit_sizes) out << ' ' << sz;
      emit(g, out.str());
    }
  });

  // tau-path ----------------------------------------------------------------
  auto* tau = app.add_subcommand("tau-path", "alternating tau-path between two elements");
  Element pa = 0, pb = 1;
  std::string tau_text = "edge", avoid;
  std::size_t count = 1;
  tau->add_option("--in", in, "structure or chain file")->required();
  tau->add_option("--level", level, "chain level")->capture_default_str();
  tau->add_option("--a", pa, "start")->required();
  tau->add_option("--b", pb, "end")->required();
  tau->add_option("--tau", tau_text, "edge, non-edge, or a type code in hex")->capture_default_str();
  tau->add_option("--avoid", avoid, "comma-separated elements the interior must miss");
  tau->add_option("--count", count, "number of paths with disjoint interiors")->capture_default_str();
  tau->callback([&] {
    const auto chain = load_chain(in);
    const auto& s = pick_level(chain, level);
    const auto t = parse_tau(s, tau_text);
    if (count > 1) {
      const auto fam = disjoint_tau_paths(s, pa, pb, t, count);
      if (g.json) {
        emit(g, to_json(fam));
      } else {
        std::ostringstream out;
        out << fam.paths.size() << " of " << fam.requested << " disjoint paths\n";
        for (const auto& p : fam.paths) {
          for (std::size_t i = 0; i < p.nodes.size(); ++i) out << (i ? " " : "  ") << p.nodes[i];
          out << '\n';
        }
        emit(g, out.str());
      }
      if (fam.shortage) status = 1;
      return;
    }
    const auto avoid_list = parse_list(avoid);
    const auto p = find_tau_path(s, pa, pb, t, avoid_list);
    if (g.json) {
      emit(g, p ? to_json(*p) : Json{{"found", false}});
    } else if (p) {
      std::ostringstream out;
      for (std::size_t i = 0; i < p->nodes.size(); ++i) out << (i ? " " : "") << p->nodes[i];
      emit(g, out.str());
    } else {
      emit(g, std::string("no path\n"));
    }
    if (!p) status = 1;
  });

  // sample ------------------------------------------------------------------
  auto* sample = app.add_subcommand("sample", "draw orders from a sampler as CSV");
  SamplerOptions so;
  std::size_t n = 100'000;
  add_sampler_options(sample, so);
  sample->add_option("--n", n, "number of samples")->capture_default_str();
  sample->callback([&] {
    const auto chain = load_chain(so.in);
    const auto& s = pick_level(chain, so.level);
    const auto sampler = make_sampler(so, s);
    const auto pts = parse_list(so.points);
    std::ostringstream out;
    write_samples_csv(out, *sampler, n, g.seed, pts);
    emit(g, out.str());
  });

  // estimate ----------------------------------------------------------------
  auto* est = app.add_subcommand("estimate", "frequency of one order of the given points");
  SamplerOptions eo;
  std::string target;
  double expect = -1;
  add_sampler_options(est, eo);
  est->add_option("--n", n, "number of samples")->capture_default_str();
  est->add_option("--order", target, "target order of --points, least first")->required();
  est->add_option("--expect", expect, "exact target; the verdict passes within 3 standard errors");
  est->callback([&] {
    const auto chain = load_chain(eo.in);
    const auto& s = pick_level(chain, eo.level);
    const auto sampler = make_sampler(eo, s);
    const auto pts = parse_list(eo.points);
    const auto tgt = parse_list(target);
    const auto e = estimate_order_event(*sampler, pts, tgt, n, g.seed, g.workers);
    Json j = to_json(e);
    std::ostringstream out;
    out << "value " << e.value << ", stderr " << e.stderr_ << ", ci99 [" << e.ci99_low << ", " << e.ci99_high << "]";
    if (expect >= 0) {
      const bool pass = e.within(expect);
      j["expect"] = expect;
      j["pass"] = pass;
      out << (pass ? "; PASS" : "; FAIL") << " against " << expect;
      if (!pass) status = 1;
    }
    emit(g, g.json ? j.dump(2) + "\n" : out.str());
  });

  // test --------------------------------------------------------------------
  auto* test = app.add_subcommand("test", "hypothesis tests with Bonferroni correction at alpha");
  SamplerOptions to;
  std::string suite = "exchangeability", tuple_text, sequence = "iid";
  double alpha = kAlpha;
  bool no_type_check = false;
  std::size_t length = 256, block = 16;
  double p0 = 0.25, p1 = 0.75;
  add_sampler_options(test, to);
  test->get_option("--in")->required(false);
  test->add_option("--suite", suite, "exchangeability|independence|mutual|monotone|shift-ergodicity")
      ->capture_default_str();
  test->add_option("--n", n, "samples (sequences for shift-ergodicity)")->capture_default_str();
  test->add_option("--tuples", tuple_text,
                   "exchangeability: a;b pairs of tuples as '0,1;2,3|4,5;6,7'; others: '0,1;2,3' tuples");
  test->add_option("--alpha", alpha, "family-wise significance level")->capture_default_str();
  test->add_flag("--no-type-check", no_type_check, "skip the equal-type precondition (harness self-tests)");
  test->add_option("--sequence", sequence, "shift-ergodicity source: iid|mixture|constant")->capture_default_str();
  test->add_option("--length", length, "sequence length")->capture_default_str();
  test->add_option("--block", block, "block size")->capture_default_str();
  test->add_option("--p0", p0, "mixture component 0")->capture_default_str();
  test->add_option("--p1", p1, "mixture component 1")->capture_default_str();
  test->callback([&] {
    TestVerdict v;
    Json extra;
    if (suite == "shift-ergodicity") {
      std::unique_ptr<SequenceSampler> src;
      if (sequence == "iid") src = std::make_unique<IidUniformSequence>(length);
      else if (sequence == "mixture") src = std::make_unique<BernoulliMixtureSequence>(length, p0, p1);
      else if (sequence == "constant") src = std::make_unique<ConstantMixtureSequence>(length);
      else throw ValidationError("unknown sequence '" + sequence + "'");
      const auto r = test_shift_ergodicity(*src, block, n, g.seed);
      v = r.verdict;
      extra = {{"effect", r.effect}, {"effectStderr", r.effect_se}};
    } else {
      if (to.in.empty()) throw ValidationError("--in is required for suite " + suite);
      const auto chain = load_chain(to.in);
      const auto& s = pick_level(chain, to.level);
      const auto sampler = make_sampler(to, s);
      if (suite == "exchangeability") {
        std::vector<std::pair<Tuple, Tuple>> pairs_in;
        std::stringstream items(tuple_text);
        for (std::string item; std::getline(items, item, '|');) {
          const auto ts = parse_tuples(item);
          if (ts.size() != 2) throw ValidationError("exchangeability pairs look like '0,1;2,3'");
          pairs_in.emplace_back(ts[0], ts[1]);
        }
        if (pairs_in.empty()) throw ValidationError("--tuples is required for exchangeability");
        // Types on the sampled sort are read in that sort's trace language.
        std::optional<SortView> view;
        if (to.kind == "involution") view = involution_m_view(s);
        if (to.kind == "bimin") view = bipartite_m_view(s);
        std::vector<Element> to_view(s.size(), -1);
        if (view)
          for (std::size_t i = 0; i < view->to_parent.size(); ++i) to_view[view->to_parent[i]] = static_cast<Element>(i);
        TypeOracle oracle;
        if (!no_type_check) {
          oracle = [&](std::span<const Element> t) {
            if (!view) return canonical_type(s, t);
            Tuple local;
            for (auto e : t) {
              if (e < 0 || static_cast<std::size_t>(e) >= s.size() || to_view[e] < 0)
                throw PreconditionError("element " + std::to_string(e) + " is not in the sampled sort");
              local.push_back(to_view[e]);
            }
            return canonical_type(view->view, local);
          };
        }
        v = test_exchangeability(*sampler, pairs_in, n, g.seed, oracle, alpha, g.workers);
      } else if (suite == "independence" || suite == "monotone") {
        std::vector<std::pair<Element, Element>> pp;
        for (const auto& t : parse_tuples(tuple_text)) {
          if (t.size() != 2) throw ValidationError("pairs look like '0,1;2,3'");
          pp.emplace_back(t[0], t[1]);
        }
        if (suite == "independence") {
          if (pp.empty()) throw ValidationError("--tuples is required for independence");
          v = test_independence(*sampler, pp, n, g.seed, alpha, g.workers);
        } else {
          v = test_monotone_coupling(*sampler, pp, n, g.seed, g.workers);
        }
      } else if (suite == "mutual") {
        const auto ts = parse_tuples(tuple_text);
        if (ts.empty()) throw ValidationError("--tuples is required for mutual");
        v = test_mutual_independence(*sampler, ts, n, g.seed, alpha, g.workers);
      } else {
        throw ValidationError("unknown suite '" + suite + "'");
      }
    }
    if (!v.pass) status = 1;
    if (g.json) {
      Json j = to_json(v);
      for (auto& [key, val] : extra.items()) j[key] = val;
      emit(g, j);
    } else {
      emit(g, verdict_line(v));
    }
  });

  // cro ---------------------------------------------------------------------
  auto* cro = app.add_subcommand("cro", "exact consistency system for random orderings at truncation n");
  std::string cro_class = "graph", report;
  std::size_t cro_n = 3;
  int project = 0;
  cro->add_option("--class", cro_class, "hereditary class")->capture_default_str();
  cro->add_option("--n", cro_n, "truncation size")->capture_default_str();
  cro->add_option("--report", report, "write the JSON report here");
  cro->add_option("--project", project, "also report the projected dimension onto this level");
  cro->callback([&] {
    const auto system = build_cro_system(FraisseClassSpec::parse(cro_class), cro_n);
    const auto r = uniqueness_report(system);
    Json j = to_json(system, r);
    if (project > 0) j["projection"] = to_json(projected_dimension(system, static_cast<std::size_t>(project)));
    if (!report.empty()) {
      std::ofstream f(report);
      if (!f) throw ValidationError("cannot write '" + report + "'");
      f << j.dump(2) << '\n';
    }
    if (g.json) {
      emit(g, j);
    } else {
      std::ostringstream out;
      out << system.class_name << " n=" << cro_n << ": " << r.variables << " variables, " << r.equations
          << " equalities, rank " << r.rank << "\n  uniformFeasible " << (r.uniform_feasible ? "true" : "false")
          << ", nullspaceDim " << r.nullspace_dim << ", Dirac solutions " << r.dirac_solutions.size()
          << (r.dirac_search_complete ? "" : " (search truncated)");
      if (project > 0) {
        const auto p = projected_dimension(system, static_cast<std::size_t>(project));
        out << "\n  projection onto level " << project << ": dim " << p.by_rank << " (rank), " << p.by_elimination
            << " (elimination) of " << p.target_variables << " variables";
      }
      emit(g, out.str());
    }
    if (!r.uniform_feasible) status = 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << '\n';
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}
