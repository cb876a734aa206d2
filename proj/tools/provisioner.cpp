#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "whatif/provision.hpp"
#include "whatif/service.hpp"

namespace {

using namespace whatif;

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kExtraction = 3;

double default_epsilon(QueryKind kind) {
  switch (kind) {
    case QueryKind::Count: return 0.1;
    case QueryKind::Quantile: return 0.25;
    case QueryKind::Regression:
    case QueryKind::RegressionDisjoint: return 0.5;
    default: return 0.2;
  }
}

struct Inputs {
  std::string query = "count";
  bool disjoint = false;
  std::optional<double> epsilon;
  double delta = 0.1;
  std::uint64_t seed = 0;
  std::string input;
  std::string hypotheticals;
  std::string query_file;
  std::string descriptor;
  std::optional<double> constant;
  std::optional<std::size_t> samples;

  ProvisionRequest request() const {
    ProvisionRequest r;
    r.kind = parse_kind(query);
    if (disjoint) {
      if (r.kind != QueryKind::Regression) throw Error(ErrorCode::InvalidArgument, "--disjoint applies to regression");
      r.kind = QueryKind::RegressionDisjoint;
    }
    r.epsilon = epsilon.value_or(default_epsilon(r.kind));
    r.delta = delta;
    r.seed = seed;
    if (!query_file.empty()) r.query_text = read_file(query_file);
    if (!descriptor.empty()) {
      try {
        r.descriptor = nlohmann::json::parse(read_file(descriptor));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("descriptor is not JSON: ") + e.what());
      }
    }
    r.reg_constant = constant;
    r.sample_override = samples;
    return r;
  }
};

void add_inputs(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--query", in.query, "count|sum|avg|quantile|regression|complex")->required();
  cmd->add_flag("--disjoint", in.disjoint, "exact scheme for pairwise disjoint regression hypotheticals");
  cmd->add_option("--epsilon", in.epsilon, "accuracy parameter");
  cmd->add_option("--delta", in.delta, "failure probability");
  cmd->add_option("--seed", in.seed, "random seed");
  cmd->add_option("--input", in.input, "instance CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--hypotheticals", in.hypotheticals, "hypotheticals JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--query-file", in.query_file, "UCQ text for complex queries")->check(CLI::ExistingFile);
  cmd->add_option("--descriptor", in.descriptor, "grouping and numeric descriptor JSON")->check(CLI::ExistingFile);
  cmd->add_option("--constant", in.constant, "regression sample constant");
  cmd->add_option("--samples", in.samples, "override the sample count (quantile, regression)");
}

struct Extraction {
  std::string scenario;
  std::optional<double> phi;
  std::optional<double> rank_of;

  AnswerParams params() const { return AnswerParams{phi, rank_of}; }
};

void add_extraction(CLI::App* cmd, Extraction& ex) {
  cmd->add_option("--scenario", ex.scenario, "1-based hypothetical indices, e.g. 1,3,5")->required();
  cmd->add_option("--phi", ex.phi, "quantile fraction in (0,1]");
  cmd->add_option("--rank-of", ex.rank_of, "weight whose rank to estimate");
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
}

int exit_code(const Error& e) { return is_extraction_error(e.code()) ? kExtraction : kValidation; }

ScenarioService* g_service = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"What-if provisioning: build sketches over hypothetical scenarios and answer from them"};
  app.require_subcommand(1);

  Inputs prov;
  std::string out_path;
  auto* provision_cmd = app.add_subcommand("provision", "compress an instance into a sketch container");
  add_inputs(provision_cmd, prov);
  provision_cmd->add_option("--out", out_path, "output container (stdout when omitted)");

  std::string sketch_path;
  Extraction ex;
  auto* answer_cmd = app.add_subcommand("answer", "answer a scenario from a sketch container");
  answer_cmd->add_option("--sketch", sketch_path, "sketch container")->required()->check(CLI::ExistingFile);
  add_extraction(answer_cmd, ex);

  Inputs orc;
  Extraction orc_ex;
  auto* oracle_cmd = app.add_subcommand("oracle", "exact answer computed from the instance");
  add_inputs(oracle_cmd, orc);
  add_extraction(oracle_cmd, orc_ex);

  std::string sketch_dir;
  std::string host = "0.0.0.0";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "serve loaded sketches over HTTP");
  serve_cmd->add_option("--sketch-dir", sketch_dir, "containers to load at boot")->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--port", port, "listening port");
  serve_cmd->add_option("--host", host, "listening address");

  std::string measure_path;
  auto* measure_cmd = app.add_subcommand("measure", "report container size per section");
  measure_cmd->add_option("--sketch", measure_path, "sketch container")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*provision_cmd) {
      const ProvisionRequest req = prov.request();
      const HypothesesFile hyps = read_hypotheticals(prov.hypotheticals);
      const SketchContainer c = is_regression(req.kind) ? provision(read_rows_csv(prov.input), hyps, req)
                                                        : provision(read_tuples_csv(prov.input), hyps, req);
      if (c.parameters.contains("warnings"))
        for (const auto& w : c.parameters["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
      write_output(out_path, save(c));
    } else if (*answer_cmd) {
      const SketchContainer c = load(read_file(sketch_path));
      const Scenario s = Scenario::parse(ex.scenario);
      std::cout << answer(c, s, ex.params()).to_json().dump() << "\n";
    } else if (*oracle_cmd) {
      const ProvisionRequest req = orc.request();
      const HypothesesFile hyps = read_hypotheticals(orc.hypotheticals);
      const Scenario s = Scenario::parse(orc_ex.scenario);
      const ScenarioAnswer a = is_regression(req.kind)
                                   ? oracle_answer(read_rows_csv(orc.input), hyps, req, s)
                                   : oracle_answer(read_tuples_csv(orc.input), hyps, req, s, orc_ex.params());
      std::cout << a.to_json().dump() << "\n";
    } else if (*serve_cmd) {
      SketchRegistry registry;
      if (!sketch_dir.empty()) registry.load_directory(sketch_dir, &std::cout);
      ScenarioService service(registry, &std::cout);
      g_service = &service;
      std::signal(SIGINT, [](int) {
        if (g_service) g_service->stop();
      });
      std::signal(SIGTERM, [](int) {
        if (g_service) g_service->stop();
      });
      std::cout << nlohmann::json{{"event", "listening"}, {"host", host}, {"port", port},
                                  {"sketches", registry.list().size()}}
                       .dump()
                << std::endl;
      if (!service.listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return kValidation;
      }
      g_service = nullptr;
    } else if (*measure_cmd) {
      std::cout << measure(load(read_file(measure_path))).to_json().dump() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
