// pinet: command-line front end for simulations, theory checks and the
// karate / political blog case studies.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pinet/pinet.hpp"

namespace {

struct Global {
  std::uint64_t seed = 1;
  int reps = 0;  // 0 = subcommand default
  std::string out;
  std::string format = "csv";
  int restarts = 50;
  long k = 0;  // 0 = subcommand default
  int threads = 1;
};

void write_output(const Global& g, const std::string& text) {
  if (g.out.empty() || g.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw pinet::IoError("cannot open '" + g.out + "' for writing");
  f << text;
  if (!f) throw pinet::IoError("write failed for '" + g.out + "'");
}

pinet::DetectOptions detect_options(const Global& g) {
  pinet::DetectOptions d;
  d.kmeans.restarts = g.restarts;
  return d;
}

std::pair<std::string, std::string> parse_pair(const std::string& s) {
  const auto pos = s.find_first_of("-,:");
  if (pos == std::string::npos || pos == 0 || pos + 1 == s.size())
    throw pinet::InvalidSpec("edge '" + s + "' must look like U-V");
  return {s.substr(0, pos), s.substr(pos + 1)};
}

int run_simulate(const Global& g, const std::string& model, const std::vector<long>& ns,
                 const std::vector<std::string>& qs, long anchor, bool no_partial, bool no_full) {
  pinet::ExperimentGrid grid;
  grid.model = pinet::parse_model(model);
  if (g.k != 0 && g.k != grid.K())
    throw pinet::InvalidSpec("--k " + std::to_string(g.k) + " does not match " + model + " (K=" +
                             std::to_string(grid.K()) + ")");
  if (!ns.empty()) grid.ns.assign(ns.begin(), ns.end());
  if (!qs.empty()) {
    grid.qs.clear();
    for (const auto& q : qs) grid.qs.push_back(pinet::QRule::parse(q));
  }
  grid.reps = g.reps > 0 ? g.reps : 100;
  grid.seed = g.seed;
  grid.anchor = anchor;
  grid.run_partial = !no_partial;
  grid.run_full = !no_full;
  grid.threads = g.threads;
  grid.detect = detect_options(g);
  const auto res = pinet::run_grid(grid);
  std::ostringstream os;
  if (g.format == "json")
    pinet::emit_json(res, os);
  else
    pinet::emit_csv(res, os);
  write_output(g, os.str());
  return 0;
}

int run_theory(const Global& g, long n_min, long n_max, double q_min, double q_max, bool strict, bool no_m) {
  pinet::TheoryCheckConfig cfg;
  cfg.instances = g.reps > 0 ? g.reps : 50;
  cfg.seed = g.seed;
  if (g.k != 0) cfg.Ks = {g.k};
  cfg.n_min = n_min;
  cfg.n_max = n_max;
  cfg.q_min = q_min;
  cfg.q_max = q_max;
  cfg.with_m_set = !no_m;
  cfg.detect = detect_options(g);
  const auto rep = pinet::run_theory_check(cfg);
  std::ostringstream os;
  if (g.format == "json") {
    os << pinet::to_json(rep).dump(2) << '\n';
  } else {
    os << "instance,K,n,q,rank_BE,gap_ratio,null_vector_residual,eigen_residual,root_match,closed_form_k1,"
          "orthogonality_max,diff_over_sigma_2K,proxy_over_BE,m_fraction,pass\n";
    for (std::size_t i = 0; i < rep.instances.size(); ++i) {
      const auto& r = rep.instances[i];
      os << i << ',' << r.K << ',' << r.n << ',' << pinet::format_number(r.q) << ',' << r.rank_BE << ','
         << pinet::format_number(r.gap_ratio) << ',' << pinet::format_number(r.h_residual_max) << ','
         << pinet::format_number(r.eigen_residual_max) << ',' << pinet::format_number(r.root_match_max) << ','
         << pinet::format_number(r.closed_form_error) << ',' << pinet::format_number(r.orthogonality_max) << ','
         << pinet::format_number(r.norms.diff_over_sigma) << ',' << pinet::format_number(r.norms.proxy_over_be)
         << ',' << pinet::format_number(r.m_fraction) << ',' << (r.pass ? 1 : 0) << '\n';
    }
  }
  write_output(g, os.str());
  std::cerr << "theory-check: " << rep.passed << "/" << rep.instances.size() << " instances pass\n";
  return strict && !rep.pass ? 2 : 0;
}

int run_karate_cmd(const Global& g, const std::vector<std::string>& anchors, const std::vector<std::string>& dels) {
  pinet::KarateOptions opt;
  opt.K = g.k != 0 ? g.k : 2;
  opt.seed = g.seed;
  opt.detect = detect_options(g);
  std::vector<std::pair<std::string, std::string>> deletions;
  for (const auto& d : dels) deletions.push_back(parse_pair(d));
  const auto rows = pinet::run_karate(anchors, deletions, opt);
  std::ostringstream os;
  if (g.format == "json")
    os << pinet::to_json(rows).dump(2) << '\n';
  else
    pinet::emit_karate_csv(rows, os);
  write_output(g, os.str());
  return 0;
}

int run_polblogs_cmd(const Global& g, const std::string& edges, const std::string& labels,
                     const std::vector<std::string>& anchors, int base) {
  pinet::PolblogsOptions opt;
  opt.K = g.k != 0 ? g.k : 2;
  opt.seed = g.seed;
  opt.edges.index_base = base;
  opt.detect = detect_options(g);
  const auto rep = pinet::run_polblogs(edges, labels, anchors, opt);
  std::ostringstream os;
  if (g.format == "json")
    os << pinet::to_json(rep).dump(2) << '\n';
  else
    pinet::emit_polblogs_csv(rep, os);
  write_output(g, os.str());
  return 0;
}

int run_perceive(const Global& g, const std::string& edges, const std::string& anchor_id, int depth, int base,
                 const std::string& view_out) {
  pinet::EdgeListOptions eo;
  eo.index_base = base;
  const auto A = pinet::load_edge_list(edges, eo);
  pinet::Index anchor = -1;
  for (pinet::Index i = 0; i < A.n() && anchor < 0; ++i)
    if (A.label(i) == anchor_id) anchor = i;
  if (anchor < 0) throw pinet::UnknownAnchor("unknown node id '" + anchor_id + "'");
  const auto view = pinet::perceive_based(A, anchor, depth);
  const auto st = pinet::view_stats(A, view);
  if (!view_out.empty()) pinet::save_edge_list(view.B, view_out, base);
  std::ostringstream os;
  if (g.format == "json") {
    pinet::ordered_json j;
    j["anchor"] = anchor_id;
    j["depth"] = depth;
    j["nodes"] = A.n();
    j["neighbors"] = view.neighbor_count();
    j["edges_full"] = st.observed_edge_ratio.den;
    j["edges_observed"] = st.observed_edge_ratio.num;
    j["observed_edge_ratio"] = st.observed_edge_ratio.value();
    j["within_depth_nodes"] = st.within_depth_fraction.num;
    j["within_depth_fraction"] = st.within_depth_fraction.value();
    j["within_subnet_edge_ratio"] = st.within_subnet_edge_ratio.value();
    os << j.dump(2) << '\n';
  } else {
    os << "anchor,depth,nodes,neighbors,edges_full,edges_observed,observed_edge_ratio,within_depth_nodes,"
          "within_depth_fraction,within_subnet_edge_ratio\n"
       << anchor_id << ',' << depth << ',' << A.n() << ',' << view.neighbor_count() << ','
       << st.observed_edge_ratio.den << ',' << st.observed_edge_ratio.num << ','
       << pinet::format_number(st.observed_edge_ratio.value()) << ',' << st.within_depth_fraction.num << ','
       << pinet::format_number(st.within_depth_fraction.value()) << ','
       << pinet::format_number(st.within_subnet_edge_ratio.value()) << '\n';
  }
  write_output(g, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partial-information network analysis"};
  app.fallthrough();
  app.require_subcommand(1);

  Global g;
  app.add_option("--seed", g.seed, "base random seed");
  app.add_option("--reps", g.reps, "replicates (simulate) or instances (theory-check)")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output file (default stdout)");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--restarts", g.restarts, "k-means restarts")->check(CLI::PositiveNumber);
  app.add_option("--k", g.k, "number of communities")->check(CLI::PositiveNumber);
  app.add_option("--threads", g.threads, "worker threads for simulate")->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo grid over n and q for one SBM model");
  std::string model = "model1";
  std::vector<long> ns;
  std::vector<std::string> qs;
  long sim_anchor = 0;
  bool no_partial = false, no_full = false;
  sim->add_option("--model", model, "model1, model2 or model3")->check(CLI::IsMember({"model1", "model2", "model3"}));
  sim->add_option("--n", ns, "node counts (default 300..2100 step 300)");
  sim->add_option("--q", qs,
                  "q rules: fixed(v) or a number, sqrt_logn_over_n, quarter_root_logn_over_n_half, inv_sqrt_n");
  sim->add_option("--anchor", sim_anchor, "anchor node (0-based)");
  sim->add_flag("--no-partial", no_partial, "skip two-stage detection on the anchor's view");
  sim->add_flag("--no-full", no_full, "skip the full-information baseline");

  auto* theory = app.add_subcommand("theory-check", "Numerical checks of the major-term spectrum");
  long n_min = 100, n_max = 400;
  double q_min = 0.1, q_max = 0.3;
  bool strict = false, no_m = false;
  theory->add_option("--n-min", n_min);
  theory->add_option("--n-max", n_max);
  theory->add_option("--q-min", q_min);
  theory->add_option("--q-max", q_max);
  theory->add_flag("--strict", strict, "exit 2 when any instance fails");
  theory->add_flag("--no-m-set", no_m, "skip the k-means based far-centroid fraction");

  auto* karate = app.add_subcommand("karate", "Karate club anchors, optionally after deleting edges");
  std::vector<std::string> k_anchors{"H", "2", "3", "A", "20", "32"};
  std::vector<std::string> k_dels;
  karate->add_option("--anchor", k_anchors, "member ids (1..34, H, A)");
  karate->add_option("--delete", k_dels, "edges to delete, e.g. A-20");

  auto* blogs = app.add_subcommand("polblogs", "Labelled edge list study on its largest component");
  std::string b_edges, b_labels;
  std::vector<std::string> b_anchors;
  int b_base = 1;
  blogs->add_option("--edges", b_edges, "edge list file")->required();
  blogs->add_option("--labels", b_labels, "id,community CSV")->required();
  blogs->add_option("--anchor", b_anchors, "anchor node ids")->required();
  blogs->add_option("--index-base", b_base)->check(CLI::IsMember({0, 1}));

  auto* perceive = app.add_subcommand("perceive", "View statistics for one anchor of an edge list");
  std::string p_edges, p_anchor, p_view;
  int p_depth = 2, p_base = 1;
  perceive->add_option("--edges", p_edges, "edge list file")->required();
  perceive->add_option("--anchor", p_anchor, "anchor node id")->required();
  perceive->add_option("--depth", p_depth, "knowledge depth (1 or 2)");
  perceive->add_option("--index-base", p_base)->check(CLI::IsMember({0, 1}));
  perceive->add_option("--emit-view", p_view, "write the perceived edge list here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) return run_simulate(g, model, ns, qs, sim_anchor, no_partial, no_full);
    if (*theory) return run_theory(g, n_min, n_max, q_min, q_max, strict, no_m);
    if (*karate) return run_karate_cmd(g, k_anchors, k_dels);
    if (*blogs) return run_polblogs_cmd(g, b_edges, b_labels, b_anchors, b_base);
    if (*perceive) return run_perceive(g, p_edges, p_anchor, p_depth, p_base, p_view);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
