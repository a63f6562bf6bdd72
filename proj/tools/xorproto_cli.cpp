// Command line front end. Exit status: 0 the property holds, 1 an attack or
// violation was found, 2 indeterminate within the bounds, 3 input error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "xorproto/xorproto.hpp"

using namespace xorproto;

namespace {

enum Exit { kHolds = 0, kViolated = 1, kIndeterminate = 2, kInputError = 3 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string bounds;
  std::string sessions;
  std::string sessions2;
  std::string format = "text";
  std::size_t bsca_cap = 8;
  std::optional<unsigned> seed;
  std::string trace_file;
  std::string scheme = "components";
  std::vector<std::string> files;
};

bool json(const Config& c) { return c.format == "json"; }

void emit(const Config& c, const report::Json& j, const std::string& text) {
  if (json(c)) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

BscaOptions bsca_options(const Config& c) {
  BscaOptions o;
  o.var_cap = c.bsca_cap;
  return o;
}

SolveOptions solve_options(const Config& c) {
  SolveOptions o;
  o.bsca = bsca_options(c);
  if (!c.bounds.empty()) {
    auto comma = c.bounds.find(',');
    try {
      o.max_depth = std::stoul(c.bounds.substr(0, comma));
      if (comma != std::string::npos) o.max_nodes = std::stoul(c.bounds.substr(comma + 1));
    } catch (const std::exception&) {
      throw InputError("--bounds expects DEPTH[,NODES], got '" + c.bounds + "'");
    }
    if (o.max_depth == 0 || o.max_nodes == 0) throw InputError("--bounds must be positive");
  }
  return o;
}

AttackOptions attack_options(const Config& c) {
  AttackOptions o;
  o.solve = solve_options(c);
  return o;
}

std::string file_arg(const Config& c, std::size_t i) {
  if (i >= c.files.size()) throw InputError("missing input file");
  return c.files[i];
}

std::string read_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// The i-th protocol argument, or a generated one when only --seed is given.
Protocol protocol_arg(const Config& c, std::size_t i) {
  if (i >= c.files.size() && c.seed) {
    std::mt19937 rng(*c.seed + static_cast<unsigned>(i));
    return corpus::random_protocol(rng, "r" + std::to_string(*c.seed + i));
  }
  return parse_protocol(read_input(file_arg(c, i)));
}

SessionPlan plan_for(const Protocol& p, const std::string& text) {
  if (text.empty()) return default_plan(p);
  if (text.find_first_not_of("0123456789") == std::string::npos) {
    auto n = std::stoul(text);
    if (n == 0) throw InputError("--sessions must be positive");
    return default_plan(p, n);
  }
  try {
    return parse_session_plan(p, text);
  } catch (const std::exception& e) {
    throw InputError(std::string("bad session plan: ") + e.what());
  }
}

void write_trace(const Config& c, const std::vector<std::string>& lines) {
  if (c.trace_file.empty()) return;
  std::ofstream out(c.trace_file);
  if (!out) throw InputError("cannot write " + c.trace_file);
  for (const auto& l : lines) out << l << "\n";
}

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::Holds: return kHolds;
    case Verdict::Violated: return kViolated;
    case Verdict::Indeterminate: return kIndeterminate;
  }
  return kIndeterminate;
}

int cmd_unify(const Config& c) {
  auto p = parse_equations(read_input(file_arg(c, 0)));
  try {
    auto u = unify_sua(p, bsca_options(c));
    emit(c, report::unify_json(p, u), report::unify_text(u));
    return kHolds;
  } catch (const CapExceeded& e) {
    emit(c, report::Json{{"command", "unify"}, {"error", "cap"}, {"message", e.what()}},
         std::string("indeterminate: ") + e.what() + "\n");
    return kIndeterminate;
  }
}

int cmd_check_nut(const Config& c) {
  auto r = check_nut(protocol_arg(c, 0));
  emit(c, report::nut_json("check-nut", r), report::nut_text(r));
  return r.ok() ? kHolds : kViolated;
}

int cmd_check_munut(const Config& c) {
  auto r = check_munut(protocol_arg(c, 0), protocol_arg(c, 1));
  emit(c, report::nut_json("check-munut", r), report::nut_text(r));
  return r.ok() ? kHolds : kViolated;
}

int cmd_tag(const Config& c) {
  TagScheme s = TagScheme::ComponentNumbers;
  if (c.scheme == "name") {
    s = TagScheme::ProtocolName;
  } else if (c.scheme != "components") {
    throw InputError("--scheme expects components or name");
  }
  auto p = insert_tags(protocol_arg(c, 0), s);
  auto text = print_protocol(p);
  emit(c, report::Json{{"command", "tag"}, {"scheme", c.scheme}, {"nut_ok", check_nut(p).ok()}, {"protocol", text}},
       text);
  return kHolds;
}

int cmd_solve(const Config& c) {
  ConstraintSequence cs;
  for (auto& pc : parse_constraints(read_input(file_arg(c, 0)))) {
    cs.constraints.emplace_back(std::move(pc.target), std::move(pc.terms));
  }
  auto r = solve(cs, solve_options(c));
  emit(c, report::solve_json(r), report::solve_text(r));
  return r.truncated ? kIndeterminate : kHolds;
}

int cmd_attack(const Config& c) {
  auto p = protocol_arg(c, 0);
  auto plan = plan_for(p, c.sessions);
  auto opt = attack_options(c);
  auto sec = check_secrecy(p, plan, opt);
  auto tf = check_type_flaw(p, plan, opt);
  Verdict v = Verdict::Holds;
  if (sec.verdict == Verdict::Violated || tf.verdict == Verdict::Violated) {
    v = Verdict::Violated;
  } else if (sec.verdict == Verdict::Indeterminate || tf.verdict == Verdict::Indeterminate) {
    v = Verdict::Indeterminate;
  }
  auto lines = report::trace_of(sec.witness ? sec : tf);
  write_trace(c, lines);
  report::Json j{{"command", "attack"},
                 {"protocol", p.name},
                 {"plan", to_string(plan)},
                 {"verdict", verdict_name(v)},
                 {"secrecy", report::attack_json(sec)},
                 {"type_flaw", report::attack_json(tf)}};
  emit(c, j,
       "protocol " + p.name + ", plan " + to_string(plan) + ": " + verdict_name(v) + "\n" + report::attack_text(sec) +
           report::attack_text(tf));
  return exit_for(v);
}

int cmd_multi(const Config& c) {
  auto p1 = protocol_arg(c, 0);
  auto p2 = protocol_arg(c, 1);
  auto r = check_multi_protocol(p1, plan_for(p1, c.sessions), p2, plan_for(p2, c.sessions2), attack_options(c));
  write_trace(c, report::trace_of(r.combined));
  emit(c, report::multi_json(r), report::multi_text(r));
  return exit_for(r.verdict);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic analysis of protocols with exclusive-or"};
  app.require_subcommand(1);
  Config cfg;

  auto common = [&](CLI::App* sub, const std::string& files_help) {
    sub->add_option("files", cfg.files, files_help);
    sub->add_option("--bounds", cfg.bounds, "solver bounds DEPTH[,NODES]");
    sub->add_option("--sessions", cfg.sessions, "strands per role, or a plan such as \"A{A=a} B{A=a,B=b}\"");
    sub->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--bsca-cap", cfg.bsca_cap, "variable cap of the combination enumeration")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "generate the input protocol from this seed");
    sub->add_option("--trace", cfg.trace_file, "write the attack trace to this file");
    return sub;
  };
  std::map<std::string, int (*)(const Config&)> handlers{
      {"unify", cmd_unify}, {"check-nut", cmd_check_nut}, {"check-munut", cmd_check_munut}, {"tag", cmd_tag},
      {"solve", cmd_solve}, {"attack", cmd_attack},       {"multi", cmd_multi}};
  common(app.add_subcommand("unify", "complete unifier set of an equation file"), "equation file");
  common(app.add_subcommand("check-nut", "check the NUT tagging conditions"), "protocol file");
  common(app.add_subcommand("check-munut", "check the two-protocol tagging conditions"), "two protocol files");
  common(app.add_subcommand("tag", "insert tags and print the protocol"), "protocol file")
      ->add_option("--scheme", cfg.scheme, "components or name");
  common(app.add_subcommand("solve", "solve a constraint sequence file"), "sequence file");
  common(app.add_subcommand("attack", "secrecy and type-flaw search"), "protocol file");
  common(app.add_subcommand("multi", "secrecy of the first protocol run next to the second"), "two protocol files")
      ->add_option("--sessions2", cfg.sessions2, "session plan of the second protocol");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    for (const auto& [name, run] : handlers) {
      if (app.got_subcommand(name)) return run(cfg);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const DslError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
