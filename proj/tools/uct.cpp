// uct — use-case transformations on text models.
//
//   uct validate --metamodel F [--model G]
//   uct run      --metamodel F --spec S --in M --out O
//                [--intermediate-dir D] [--no-verify] [--force] [--builtin gmf]
//   uct compile  --metamodel F --spec S --out-dir D [--builtin gmf]
//   uct eval     --metamodel F --model M -e EXPR
//   uct diff     --metamodel F A B
//
// Exit codes: 0 success, 1 semantic failure (invalid metamodel, failed
// assumption or verification, non-isomorphic models), 2 usage / IO / parse
// errors.

#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "uct/engine.hpp"
#include "uct/gmf.hpp"
#include "uct/model.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kSemanticFailure = 1;
constexpr int kUsageError = 2;

std::shared_ptr<const uct::Metamodel> load_metamodel(const std::string& path) {
  return std::make_shared<uct::Metamodel>(uct::parse_metamodel(uct::read_file(path)));
}

struct BuiltinOrFiles {
  std::shared_ptr<const uct::Metamodel> mm;
  std::vector<uct::UseCase> usecases;
};

BuiltinOrFiles load_spec(const std::string& builtin, const std::string& metamodel_path,
                         const std::string& spec_path, bool need_spec) {
  BuiltinOrFiles out;
  if (!builtin.empty()) {
    if (builtin != "gmf") throw uct::Error("unknown builtin " + builtin);
    out.mm = uct::gmf::bundled_metamodel();
    out.usecases = uct::parse_usecases(*out.mm, uct::gmf::kUseCasesText);
    return out;
  }
  if (metamodel_path.empty()) throw uct::Error("--metamodel is required");
  out.mm = load_metamodel(metamodel_path);
  if (need_spec) {
    if (spec_path.empty()) throw uct::Error("--spec is required");
    out.usecases = uct::parse_usecases(*out.mm, uct::read_file(spec_path));
  }
  return out;
}

int cmd_validate(const std::string& metamodel_path, const std::string& model_path) {
  auto mm = load_metamodel(metamodel_path);
  auto violations = uct::validate(*mm);
  for (const auto& v : violations) std::cout << v << "\n";
  if (!violations.empty()) return kSemanticFailure;
  if (!model_path.empty()) {
    uct::Model m = uct::parse_model(mm, uct::read_file(model_path));
    auto issues = m.conformance_violations();
    for (const auto& v : issues) std::cout << v << "\n";
    if (!issues.empty()) return kSemanticFailure;
  }
  return kOk;
}

int cmd_run(const BuiltinOrFiles& spec, const std::string& in_path,
            const std::string& out_path, const std::string& intermediate_dir,
            bool no_verify, bool force) {
  uct::Chain chain{spec.mm, spec.usecases};
  uct::ChainOptions options;
  options.verify = !no_verify;
  options.force = force;
  if (!intermediate_dir.empty()) options.intermediate_dir = intermediate_dir;
  uct::ChainResult result = uct::execute_chain(chain, in_path, out_path, options);
  for (const auto& r : result.reports) std::cout << r.to_text();
  for (const auto& f : result.intermediate_files)
    std::cout << "intermediate: " << f << "\n";
  return result.ok ? kOk : kSemanticFailure;
}

int cmd_compile(const BuiltinOrFiles& spec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::string order_text;
  for (const auto& uc : spec.usecases) {
    std::vector<uct::Phase> phases;
    for (const auto& c : uc.constraints)
      phases.push_back(uct::compile_constraint(c, *spec.mm));
    std::vector<std::string> warnings;
    auto order = uct::order_phases(phases, *spec.mm, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    order_text += uc.name + ":";
    for (size_t i : order) {
      const uct::Phase& p = phases[i];
      order_text += " " + p.constraint.name;
      fs::path file = fs::path(out_dir) / (uc.name + "_" + p.constraint.name + ".act");
      uct::write_file(file.string(), uct::print_stmt(p.activity) + "\n");
      std::cout << "wrote " << file.string() << "\n";
    }
    order_text += "\n";
  }
  fs::path order_file = fs::path(out_dir) / "phase_order.txt";
  uct::write_file(order_file.string(), order_text);
  std::cout << "wrote " << order_file.string() << "\n";
  return kOk;
}

int cmd_eval(const std::string& metamodel_path, const std::string& model_path,
             const std::string& expr_text) {
  auto mm = load_metamodel(metamodel_path);
  uct::Model m = uct::parse_model(mm, uct::read_file(model_path));
  uct::ExprPtr e = uct::parse_expr(expr_text);
  uct::Env env;
  env.model = &m;
  std::cout << uct::evaluate(e, env).to_string() << "\n";
  return kOk;
}

int cmd_diff(const std::string& metamodel_path, const std::string& a_path,
             const std::string& b_path) {
  auto mm = load_metamodel(metamodel_path);
  uct::Model a = uct::parse_model(mm, uct::read_file(a_path));
  uct::Model b = uct::parse_model(mm, uct::read_file(b_path));
  uct::IsoResult iso = uct::isomorphic(a, b);
  if (iso.ok) {
    std::cout << "isomorphic\n";
    return kOk;
  }
  std::cout << "not isomorphic: " << iso.mismatch << "\n";
  if (!iso.witness.empty()) {
    std::cout << "partial witness:";
    for (const auto& [x, y] : iso.witness) std::cout << " " << x << "->" << y;
    std::cout << "\n";
  }
  return kSemanticFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constraint-driven model transformations on text models"};
  app.require_subcommand(1);

  std::string metamodel_path, model_path, spec_path, in_path, out_path;
  std::string intermediate_dir, out_dir, expr_text, builtin;
  std::string diff_a, diff_b;
  bool no_verify = false, force = false;

  auto* validate = app.add_subcommand("validate", "check a metamodel (and optionally a model)");
  validate->add_option("--metamodel", metamodel_path)->required();
  validate->add_option("--model", model_path);

  auto* run = app.add_subcommand("run", "execute a transformation chain on a model");
  run->add_option("--metamodel", metamodel_path);
  run->add_option("--spec", spec_path);
  run->add_option("--in", in_path)->required();
  run->add_option("--out", out_path)->required();
  run->add_option("--intermediate-dir", intermediate_dir);
  run->add_option("--builtin", builtin, "bundled transformation (gmf)");
  run->add_flag("--no-verify", no_verify, "skip post-verification");
  run->add_flag("--force", force, "run even when assumptions fail");

  auto* compile = app.add_subcommand("compile", "emit the compiled phase activities");
  compile->add_option("--metamodel", metamodel_path);
  compile->add_option("--spec", spec_path);
  compile->add_option("--out-dir", out_dir)->required();
  compile->add_option("--builtin", builtin, "bundled transformation (gmf)");

  auto* eval = app.add_subcommand("eval", "evaluate an expression against a model");
  eval->add_option("--metamodel", metamodel_path)->required();
  eval->add_option("--model", model_path)->required();
  eval->add_option("-e,--expr", expr_text)->required();

  auto* diff = app.add_subcommand("diff", "isomorphism check between two models");
  diff->add_option("--metamodel", metamodel_path)->required();
  diff->add_option("a", diff_a)->required();
  diff->add_option("b", diff_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*validate) return cmd_validate(metamodel_path, model_path);
    if (*run) {
      BuiltinOrFiles spec = load_spec(builtin, metamodel_path, spec_path, true);
      try {
        return cmd_run(spec, in_path, out_path, intermediate_dir, no_verify, force);
      } catch (const uct::ParseError&) {
        throw;
      } catch (const uct::UnsupportedConstruct& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSemanticFailure;
      } catch (const uct::Error& e) {
        // runtime failure inside a phase (failed check, missing key, ...)
        std::string what = e.what();
        if (what.rfind("cannot read", 0) == 0 || what.rfind("cannot write", 0) == 0)
          throw;
        std::cerr << "error: " << what << "\n";
        return kSemanticFailure;
      }
    }
    if (*compile) {
      BuiltinOrFiles spec = load_spec(builtin, metamodel_path, spec_path, true);
      try {
        return cmd_compile(spec, out_dir);
      } catch (const uct::UnsupportedConstruct& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSemanticFailure;
      }
    }
    if (*eval) {
      try {
        return cmd_eval(metamodel_path, model_path, expr_text);
      } catch (const uct::ParseError&) {
        throw;
      } catch (const uct::Error& e) {
        std::string what = e.what();
        if (what.rfind("cannot read", 0) == 0) throw;
        std::cerr << "error: " << what << "\n";
        return kSemanticFailure;
      }
    }
    if (*diff) return cmd_diff(metamodel_path, diff_a, diff_b);
  } catch (const uct::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsageError;
  } catch (const uct::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}
