// rescq: resilience and causal responsibility for conjunctive queries.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rescq/analysis.hpp"
#include "rescq/approx.hpp"
#include "rescq/bench.hpp"
#include "rescq/dlp.hpp"
#include "rescq/flow.hpp"
#include "rescq/generate.hpp"
#include "rescq/ijp.hpp"
#include "rescq/resilience.hpp"
#include "rescq/responsibility.hpp"
#include "rescq/witness.hpp"

using json = nlohmann::json;
using namespace rescq;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("io", "cannot write " + path);
    out << text;
}

json tuples_json(const Database& d, const std::vector<TupleId>& ts) {
    auto a = json::array();
    for (TupleId t : ts) a.push_back(d.tuple_string(t));
    return a;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json res_json(const Database& d, const ResilienceAnswer& a) {
    return {{"problem", "res"},
            {"semantics", to_string(d.semantics())},
            {"method", a.method},
            {"value", a.value},
            {"contingency", tuples_json(d, a.contingency)},
            {"integral", a.integral},
            {"status", to_string(a.status)},
            {"lp_bound", optional_json(a.lp_bound)},
            {"nodes", a.nodes},
            {"per_linearization", a.per_linearization},
            {"solve_seconds", a.solve_seconds}};
}

json rsp_json(const Database& d, TupleId t, const ResponsibilityAnswer& a) {
    return {{"problem", "rsp"},
            {"semantics", to_string(d.semantics())},
            {"tuple", d.tuple_string(t)},
            {"method", a.method},
            {"counterfactualizable", a.counterfactualizable},
            {"value", a.counterfactualizable ? json(a.value) : json(nullptr)},
            {"rho", a.rho()},
            {"contingency", tuples_json(d, a.contingency)},
            {"integral", a.integral},
            {"set_based", a.set_based},
            {"lp_bound", optional_json(a.lp_bound)},
            {"nodes", a.nodes},
            {"per_linearization", a.per_linearization},
            {"solve_seconds", a.solve_seconds}};
}

void print_contingency(const Database& d, const std::vector<TupleId>& ts) {
    std::cout << "contingency:";
    for (TupleId t : ts) std::cout << ' ' << d.tuple_string(t);
    std::cout << '\n';
}

// "R(1,2);R(2,3)" or repeated flags
std::vector<TupleRecord> parse_tuple_list(const std::vector<std::string>& items) {
    std::vector<TupleRecord> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ';'))
            if (part.find_first_not_of(" ") != std::string::npos) out.push_back(parse_tuple(part));
    }
    return out;
}

std::set<std::string> parse_constant_list(const std::string& s) {
    std::set<std::string> out;
    std::stringstream ss(s);
    std::string c;
    while (std::getline(ss, c, ','))
        if (!c.empty()) out.insert(c);
    return out;
}

Graph parse_graph(const std::string& text, int nodes) {
    Graph g;
    g.nodes = nodes;
    std::stringstream ss(text);
    std::string e;
    int max_node = -1;
    while (std::getline(ss, e, ',')) {
        auto dash = e.find('-');
        if (dash == std::string::npos) throw Error("usage", "edges are written u-v");
        int u = std::stoi(e.substr(0, dash)), v = std::stoi(e.substr(dash + 1));
        if (u < 0 || v < 0) throw Error("usage", "negative node id");
        g.edges.emplace_back(u, v);
        max_node = std::max({max_node, u, v});
    }
    g.nodes = std::max(g.nodes, max_node + 1);
    return g;
}

json checks_json(const IJPCertificate& c) { return json::parse(certificate_json(c)); }

void report_certificate(const IJPCertificate& cert, bool as_json, json extra = json::object()) {
    if (as_json) {
        json j = checks_json(cert);
        for (auto& [k, v] : extra.items()) j[k] = v;
        std::cout << j.dump(2) << '\n';
        return;
    }
    const auto& ch = cert.checks;
    std::cout << (cert.valid() ? "valid IJP" : "not an IJP") << "\n"
              << "c = " << cert.resilience_c << ", witnesses = " << cert.witnesses
              << ", triangle witnesses = " << cert.triangle_witnesses << "\n"
              << "reduced " << ch.reduced << ", connected " << ch.connected << ", endpoints " << ch.endpoints_valid
              << ", or-property " << ch.or_property << ", nonleaking " << ch.nonleaking << '\n';
    if (!cert.failure.empty()) std::cout << "failure: " << cert.failure << '\n';
    for (auto& [k, v] : extra.items()) std::cout << k << ": " << v.dump() << '\n';
    std::cout << "database:";
    for (const auto& r : cert.candidate.db.records()) std::cout << ' ' << to_string(r);
    std::cout << '\n';
}

struct Common {
    std::string query_path, data_dir, semantics = "set";
    bool as_json = false;
};

void add_query(CLI::App* app, Common& c, bool need_data) {
    app->add_option("-q,--query", c.query_path, "query file")->required()->check(CLI::ExistingFile);
    if (need_data) app->add_option("-d,--data", c.data_dir, "database directory")->required()->check(CLI::ExistingDirectory);
    app->add_option("--semantics", c.semantics, "set or bag")->check(CLI::IsMember({"set", "bag"}));
    app->add_flag("--json", c.as_json, "JSON output");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rescq: resilience and causal responsibility for conjunctive queries"};
    app.require_subcommand(1);

    // classify
    Common cl;
    std::string problem = "res", tuple_relation;
    auto* classify = app.add_subcommand("classify", "complexity verdict from the dichotomy");
    add_query(classify, cl, false);
    classify->add_option("--problem", problem)->check(CLI::IsMember({"res", "rsp"}));
    classify->add_option("--tuple-relation", tuple_relation, "relation of the responsibility tuple");

    // res / rsp / approx
    Common rc;
    std::string res_method = "ilp";
    int max_atoms = 7;
    auto* res = app.add_subcommand("res", "resilience");
    add_query(res, rc, true);
    res->add_option("--method", res_method)
        ->check(CLI::IsMember({"ilp", "lp", "flow", "brute", "round", "flow-ct", "flow-cw"}));
    res->add_option("--max-atoms", max_atoms, "Flow-CT atom cap");

    Common pc;
    std::string rsp_method = "ilp", tuple_text;
    auto* rsp = app.add_subcommand("rsp", "causal responsibility of one tuple");
    add_query(rsp, pc, true);
    rsp->add_option("--tuple", tuple_text, "tuple such as S(1,1)")->required();
    rsp->add_option("--method", rsp_method)
        ->check(CLI::IsMember({"ilp", "milp", "lp", "flow", "brute", "round", "flow-ct", "flow-cw"}));
    rsp->add_option("--max-atoms", max_atoms, "Flow-CT atom cap");

    Common ac;
    std::string approx_method = "round", approx_tuple;
    auto* approx = app.add_subcommand("approx", "approximations (resilience, or responsibility with --tuple)");
    add_query(approx, ac, true);
    approx->add_option("--method", approx_method)->check(CLI::IsMember({"round", "flow-ct", "flow-cw"}));
    approx->add_option("--tuple", approx_tuple);
    approx->add_option("--max-atoms", max_atoms, "Flow-CT atom cap");

    // ijp
    auto* ijp = app.add_subcommand("ijp", "independent join paths");
    ijp->require_subcommand(1);
    Common ic;
    std::vector<std::string> start_s, terminal_s;
    SearchOptions sopt;
    std::string exo_mode = "atoms", out_path;
    auto* search = ijp->add_subcommand("search", "bounded-domain certificate search");
    add_query(search, ic, false);
    search->add_option("--domain", sopt.domain)->check(CLI::Range(1, 6));
    search->add_option("--start", start_s, "start endpoint tuples, ';'-separated");
    search->add_option("--terminal", terminal_s, "terminal endpoint tuples");
    search->add_option("--max-witnesses", sopt.max_witnesses);
    search->add_option("--budget", sopt.budget, "expanded-state budget");
    search->add_option("--exogenous", exo_mode)->check(CLI::IsMember({"atoms", "dominating", "unrestricted"}));
    search->add_option("-o,--out", out_path, "write the certificate JSON here");

    Common vc;
    std::string cert_path, asp_path, end1, end2;
    auto* verify = ijp->add_subcommand("verify", "verify a certificate, candidate or solver model");
    verify->add_option("--cert", cert_path, "certificate JSON");
    verify->add_option("-q,--query", vc.query_path);
    verify->add_option("-d,--data", vc.data_dir);
    verify->add_option("--semantics", vc.semantics)->check(CLI::IsMember({"set", "bag"}));
    verify->add_option("--start", start_s);
    verify->add_option("--terminal", terminal_s);
    verify->add_option("--asp-model", asp_path, "solver output to re-verify");
    verify->add_option("--end1", end1, "start endpoint constants, comma-separated");
    verify->add_option("--end2", end2, "terminal endpoint constants");
    verify->add_option("-o,--out", out_path, "write the verified certificate JSON here");
    verify->add_flag("--json", vc.as_json);

    Common ec;
    int dlp_domain = 5;
    bool no_min = false;
    std::string clingo_path;
    auto* emit = ijp->add_subcommand("emit-dlp", "answer-set program for the certificate search");
    add_query(emit, ec, false);
    emit->add_option("--domain", dlp_domain)->check(CLI::Range(1, 50));
    emit->add_option("--start", start_s)->required();
    emit->add_option("--terminal", terminal_s)->required();
    emit->add_flag("--no-min-witnesses", no_min, "omit the weak constraint");
    emit->add_option("-o,--out", out_path);
    emit->add_option("--clingo-path", clingo_path, "run this solver and re-verify its last model")
        ->envname("RESCQ_CLINGO");

    Common rv;
    std::string graph_text, db_out;
    int graph_nodes = 0;
    bool solve_reduced = false;
    auto* reduce = ijp->add_subcommand("reduce-vc", "vertex-cover reduction database");
    reduce->add_option("--cert", cert_path)->required();
    reduce->add_option("--edges", graph_text, "edges such as 0-1,1-2")->required();
    reduce->add_option("--nodes", graph_nodes);
    reduce->add_option("-o,--out", db_out, "write the database here");
    reduce->add_flag("--solve", solve_reduced, "also compute resilience and the vertex cover");
    reduce->add_flag("--json", rv.as_json);

    // gen
    Common gc;
    int gen_domain = 10, max_bag = 5;
    long gen_n = 10;
    std::uint64_t seed = 1;
    auto* gen = app.add_subcommand("gen", "random instance");
    add_query(gen, gc, false);
    gen->add_option("--domain", gen_domain);
    gen->add_option("-n,--tuples", gen_n, "tuples per relation");
    gen->add_option("--max-bag", max_bag);
    gen->add_option("--seed", seed);
    gen->add_option("-o,--out", db_out)->required();

    // bench
    std::string config_path, csv_path, bucket_path;
    bool parallel = false, bench_json = false;
    auto* bench = app.add_subcommand("bench", "benchmark sweep");
    bench->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    bench->add_option("--csv", csv_path, "tidy CSV output (stdout if absent)");
    bench->add_option("--buckets", bucket_path, "log-bucket median CSV");
    bench->add_flag("--parallel", parallel, "run instances concurrently");
    bench->add_flag("--json", bench_json, "JSON summary");

    // witnesses
    Common wc;
    auto* wit = app.add_subcommand("witnesses", "list witnesses");
    add_query(wit, wc, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*classify) {
            Query q = load_query(cl.query_path);
            Semantics s = parse_semantics(cl.semantics);
            if (problem == "rsp" && tuple_relation.empty()) throw Error("usage", "--tuple-relation is required for rsp");
            ComplexityVerdict v = problem == "res" ? classify_res(q, s) : classify_rsp(q, s, tuple_relation);
            if (cl.as_json) {
                auto triads = json::array();
                for (const auto& t : v.triads) {
                    json atoms = json::array();
                    for (int a : t.atoms) atoms.push_back(q.atom(a).relation);
                    triads.push_back({{"atoms", atoms}, {"status", to_string(t.status)}});
                }
                std::cout << json{{"problem", to_string(v.problem)},
                                  {"semantics", to_string(v.semantics)},
                                  {"verdict", to_string(v.verdict)},
                                  {"reason", v.reason},
                                  {"triads", triads}}
                                 .dump(2)
                          << '\n';
            } else {
                std::cout << to_string(v.verdict) << ": " << v.reason << '\n';
            }
            return 0;
        }
        if (*res || *approx) {
            Common& c = *res ? rc : ac;
            Query q = load_query(c.query_path);
            Database d = load_database(c.data_dir, parse_semantics(c.semantics));
            const std::string m = *res ? res_method : approx_method;
            if (*approx && !approx_tuple.empty()) {
                TupleId t = lookup_tuple(d, approx_tuple);
                ResponsibilityAnswer a = m == "round"     ? lp_rounding_rsp(q, d, t)
                                         : m == "flow-ct" ? flow_ct_rsp(q, d, t, max_atoms)
                                                          : flow_cw_rsp(q, d, t);
                if (c.as_json) std::cout << rsp_json(d, t, a).dump(2) << '\n';
                else std::cout << (a.counterfactualizable ? std::to_string(a.value) : "not counterfactualizable") << '\n';
                return 0;
            }
            ResilienceAnswer a;
            if (m == "ilp") a = resilience_ilp(q, d);
            else if (m == "lp") a = resilience_lp(q, d);
            else if (m == "flow") a = resilience_via_flow(q, d);
            else if (m == "brute") a = brute_force_resilience(q, d);
            else if (m == "round") a = lp_rounding_res(q, d);
            else if (m == "flow-ct") a = flow_ct_res(q, d, max_atoms);
            else a = flow_cw_res(q, d);
            if (c.as_json) {
                std::cout << res_json(d, a).dump(2) << '\n';
            } else {
                std::cout << "resilience (" << a.method << "): " << a.value << '\n';
                print_contingency(d, a.contingency);
            }
            return 0;
        }
        if (*rsp) {
            Query q = load_query(pc.query_path);
            Database d = load_database(pc.data_dir, parse_semantics(pc.semantics));
            TupleId t = lookup_tuple(d, tuple_text);
            ResponsibilityAnswer a;
            const auto& m = rsp_method;
            if (m == "ilp") a = responsibility_ilp(q, d, t);
            else if (m == "milp" || m == "lp") a = responsibility_milp(q, d, t);
            else if (m == "flow") a = responsibility_via_flow(q, d, t);
            else if (m == "brute") a = brute_force_responsibility(q, d, t);
            else if (m == "round") a = lp_rounding_rsp(q, d, t);
            else if (m == "flow-ct") a = flow_ct_rsp(q, d, t, max_atoms);
            else a = flow_cw_rsp(q, d, t);
            if (pc.as_json) {
                std::cout << rsp_json(d, t, a).dump(2) << '\n';
            } else if (!a.counterfactualizable) {
                std::cout << d.tuple_string(t) << " cannot be made counterfactual (rho = 0)\n";
            } else {
                std::cout << "responsibility (" << a.method << "): " << a.value << ", rho = " << a.rho() << '\n';
                print_contingency(d, a.contingency);
            }
            return 0;
        }
        if (*search) {
            Query q = load_query(ic.query_path);
            sopt.semantics = parse_semantics(ic.semantics);
            sopt.exogenous = exo_mode == "atoms"     ? ExogenousMode::atoms
                             : exo_mode == "dominating" ? ExogenousMode::dominating
                                                        : ExogenousMode::unrestricted;
            auto s = parse_tuple_list(start_s), t = parse_tuple_list(terminal_s);
            if (s.empty() != t.empty()) throw Error("usage", "give both --start and --terminal, or neither");
            SearchResult r = s.empty() ? search_ijp_all(q, sopt) : search_ijp(q, s, t, sopt);
            json extra{{"status", to_string(r.status)}, {"explored", r.explored}, {"verified", r.verified}};
            if (r.certificate) {
                if (!out_path.empty()) write_file(out_path, certificate_json(*r.certificate) + "\n");
                report_certificate(*r.certificate, ic.as_json, extra);
            } else if (ic.as_json) {
                std::cout << extra.dump(2) << '\n';
            } else {
                std::cout << "no certificate (" << to_string(r.status) << ", " << r.explored << " states)\n";
            }
            return 0;
        }
        if (*verify) {
            auto finish = [&](const IJPCertificate& cert, json extra = json::object()) {
                if (!out_path.empty()) write_file(out_path, certificate_json(cert) + "\n");
                report_certificate(cert, vc.as_json, extra);
                return 0;
            };
            if (!cert_path.empty()) return finish(verify_ijp(candidate_from_json(read_file(cert_path))));
            if (vc.query_path.empty()) throw Error("usage", "verify needs --cert or --query");
            Query q = load_query(vc.query_path);
            Semantics sem = parse_semantics(vc.semantics);
            if (!asp_path.empty()) {
                if (end1.empty() || end2.empty()) throw Error("usage", "--asp-model needs --end1 and --end2");
                AspModel m = parse_asp_model(read_file(asp_path), q, parse_constant_list(end1), parse_constant_list(end2), sem);
                json extra{{"claimed_res", m.claimed_res ? json(*m.claimed_res) : json(nullptr)},
                           {"claimed_witnesses", m.claimed_witnesses ? json(*m.claimed_witnesses) : json(nullptr)}};
                return finish(verify_ijp(m.candidate), extra);
            }
            if (vc.data_dir.empty()) throw Error("usage", "verify needs --data with --query");
            JoinPathCandidate c{q, load_database(vc.data_dir, sem), parse_tuple_list(start_s), parse_tuple_list(terminal_s)};
            return finish(verify_ijp(c));
        }
        if (*emit) {
            Query q = load_query(ec.query_path);
            auto s = parse_tuple_list(start_s), t = parse_tuple_list(terminal_s);
            const std::string program = emit_dlp(q, dlp_domain, s, t, !no_min);
            if (clingo_path.empty()) {
                if (out_path.empty()) std::cout << program;
                else write_file(out_path, program);
                if (ec.as_json && !out_path.empty()) std::cout << json{{"program", out_path}}.dump(2) << '\n';
                return 0;
            }
            const std::string file = out_path.empty() ? "rescq_ijp.lp" : out_path;
            write_file(file, program);
            const std::string cmd = clingo_path + " '" + file + "' 2>&1";
            std::string output;
            FILE* pipe = popen(cmd.c_str(), "r");
            if (!pipe) throw Error("io", "cannot run " + clingo_path);
            char buf[4096];
            while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) output.append(buf, n);
            pclose(pipe);
            AspModel m = parse_asp_model(output, q, constants_of(s), constants_of(t), parse_semantics(ec.semantics));
            report_certificate(verify_ijp(m.candidate), ec.as_json,
                               {{"claimed_res", m.claimed_res ? json(*m.claimed_res) : json(nullptr)}});
            return 0;
        }
        if (*reduce) {
            IJPCertificate cert = verify_ijp(candidate_from_json(read_file(cert_path)));
            if (!cert.valid()) throw Error("precondition", "certificate does not verify: " + cert.failure);
            Graph g = parse_graph(graph_text, graph_nodes);
            VcReduction r = vertex_cover_reduction(cert, g);
            if (!db_out.empty()) write_database(r.db, db_out);
            json j{{"c", r.c}, {"edges", r.edge_count}, {"nodes", g.nodes}, {"tuples", r.db.tuple_count()}};
            if (solve_reduced) {
                const int vc_size = brute_force_vertex_cover(g);
                const double value = resilience_ilp(cert.candidate.query, r.db).value;
                j["vertex_cover"] = vc_size;
                j["predicted_resilience"] = r.predicted(vc_size);
                j["resilience"] = value;
            }
            if (rv.as_json) {
                std::cout << j.dump(2) << '\n';
            } else {
                for (auto& [k, v] : j.items()) std::cout << k << ": " << v.dump() << '\n';
            }
            return 0;
        }
        if (*gen) {
            Query q = load_query(gc.query_path);
            Database d = generate_instance(q, gen_domain, gen_n, parse_semantics(gc.semantics), max_bag, seed);
            write_database(d, db_out);
            if (gc.as_json)
                std::cout << json{{"out", db_out}, {"tuples", d.tuple_count()}, {"seed", seed}}.dump(2) << '\n';
            else
                std::cout << "wrote " << d.tuple_count() << " tuples to " << db_out << '\n';
            return 0;
        }
        if (*bench) {
            BenchConfig cfg = load_bench_config(config_path);
            if (parallel) cfg.parallel = true;
            auto rows = run_benchmark(cfg);
            if (csv_path.empty() && !bench_json) {
                write_bench_csv(std::cout, rows);
            } else if (!csv_path.empty()) {
                std::ofstream out(csv_path);
                write_bench_csv(out, rows);
            }
            if (!bucket_path.empty()) {
                std::ofstream out(bucket_path);
                write_bucket_csv(out, rows);
            }
            if (bench_json) {
                json slopes = json::object();
                for (const auto& r : rows) {
                    if (slopes.contains(r.method)) continue;
                    double s = loglog_slope(rows, r.method);
                    slopes[r.method] = std::isnan(s) ? json(nullptr) : json(s);
                }
                std::cout << json{{"rows", rows.size()}, {"csv", csv_path}, {"loglog_slope", slopes}}.dump(2) << '\n';
            }
            return 0;
        }
        if (*wit) {
            Query q = load_query(wc.query_path);
            Database d = load_database(wc.data_dir, parse_semantics(wc.semantics));
            WitnessSet ws = compute_witnesses(q, d);
            if (wc.as_json) {
                auto a = json::array();
                for (const auto& w : ws.witnesses) {
                    json val = json::object();
                    for (std::size_t i = 0; i < w.valuation.size(); ++i) val[q.variables()[i]] = d.constant_name(w.valuation[i]);
                    a.push_back({{"valuation", val}, {"tuples", tuples_json(d, w.tuples)}});
                }
                std::cout << json{{"count", ws.size()}, {"witnesses", a}}.dump(2) << '\n';
            } else {
                write_witness_csv(std::cout, q, d, ws);
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error (" << e.kind() << "): " << e.what() << '\n';
        return e.kind() == "usage" ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
