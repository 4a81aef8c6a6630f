#include "matchsim/config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace matchsim::io {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where, std::string& problems) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) problems += "unknown key '" + where + key + "'; ";
  }
}

// -inf / inf appear as strings since JSON has no literal for them.
double number_or_inf(const json& v, const std::string& where, std::string& problems) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  problems += "'" + where + "' must be a number or \"inf\"/\"-inf\"; ";
  return 0.0;
}

json inf_to_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

model::QuotaRule parse_quotas(const json& q, std::string& problems) {
  model::QuotaRule rule;
  reject_unknown(q, {"rule", "per_college", "fill", "values"}, "model.quotas.", problems);
  const std::string kind = q.value("rule", "proportional");
  if (kind == "uniform") {
    rule.kind = model::QuotaRule::Kind::uniform;
    rule.per_college = q.value("per_college", 1);
  } else if (kind == "proportional") {
    rule.kind = model::QuotaRule::Kind::proportional;
    rule.fill = q.value("fill", 0.75);
  } else if (kind == "explicit") {
    rule.kind = model::QuotaRule::Kind::explicit_values;
    if (q.contains("values")) rule.values = q["values"].get<std::vector<int>>();
  } else {
    problems += "'model.quotas.rule' must be uniform|proportional|explicit; ";
  }
  return rule;
}

json quotas_to_json(const model::QuotaRule& rule) {
  json q;
  switch (rule.kind) {
    case model::QuotaRule::Kind::uniform:
      q["rule"] = "uniform";
      q["per_college"] = rule.per_college;
      break;
    case model::QuotaRule::Kind::proportional:
      q["rule"] = "proportional";
      q["fill"] = rule.fill;
      break;
    case model::QuotaRule::Kind::explicit_values:
      q["rule"] = "explicit";
      q["values"] = rule.values;
      break;
  }
  return q;
}

model::SigmaRule parse_sigma(const json& s, std::string& problems) {
  model::SigmaRule rule;
  reject_unknown(s, {"rule", "value", "kappa", "a", "b"}, "model.sigma.", problems);
  const std::string kind = s.value("rule", "schedule");
  if (kind == "fixed") {
    rule.kind = model::SigmaRule::Kind::fixed;
    rule.value = s.value("value", 0.0);
  } else if (kind == "schedule") {
    rule.kind = model::SigmaRule::Kind::schedule;
    rule.kappa = s.value("kappa", 1.0);
    rule.a = s.value("a", 0.75);
    rule.b = s.value("b", 0.5);
  } else {
    problems += "'model.sigma.rule' must be fixed|schedule; ";
  }
  return rule;
}

json sigma_to_json(const model::SigmaRule& rule) {
  json s;
  if (rule.kind == model::SigmaRule::Kind::fixed) {
    s["rule"] = "fixed";
    s["value"] = rule.value;
  } else {
    s["rule"] = "schedule";
    s["kappa"] = rule.kappa;
    s["a"] = rule.a;
    s["b"] = rule.b;
  }
  return s;
}

model::Dist parse_dist(const json& d, const std::string& where, std::string& problems) {
  const std::string kind = d.is_string() ? d.get<std::string>() : "";
  if (kind == "normal") return model::Dist::normal;
  if (kind == "uniform") return model::Dist::uniform_pm1;
  problems += "'" + where + "' must be normal|uniform; ";
  return model::Dist::normal;
}

const char* dist_to_string(model::Dist d) {
  return d == model::Dist::normal ? "normal" : "uniform";
}

model::ModelConfig parse_model(const json& mj, std::string& problems) {
  model::ModelConfig mc;
  reject_unknown(mj,
                 {"n", "m", "quotas", "sigma", "lambda", "g", "eps_scale", "eta", "eps",
                  "outside", "threshold", "x_dim", "z_dim", "seed"},
                 "model.", problems);
  mc.n = mj.value("n", 100);
  mc.m = mj.value("m", 2);
  if (mj.contains("quotas")) mc.quotas = parse_quotas(mj["quotas"], problems);
  if (mj.contains("sigma")) mc.sigma = parse_sigma(mj["sigma"], problems);
  if (mj.contains("lambda")) {
    const std::string kind = mj["lambda"].is_string() ? mj["lambda"].get<std::string>() : "";
    if (kind == "x_first")
      mc.lambda = model::LambdaSpec::x_first;
    else if (kind == "x_mean")
      mc.lambda = model::LambdaSpec::x_mean;
    else
      problems += "'model.lambda' must be x_first|x_mean; ";
  }
  if (mj.contains("g")) {
    const std::string kind = mj["g"].is_string() ? mj["g"].get<std::string>() : "";
    if (kind == "dot")
      mc.g = model::GSpec::dot;
    else if (kind == "zero")
      mc.g = model::GSpec::zero;
    else
      problems += "'model.g' must be dot|zero; ";
  }
  mc.eps_scale = mj.value("eps_scale", 1.0);
  if (mj.contains("eta")) mc.eta_dist = parse_dist(mj["eta"], "model.eta", problems);
  if (mj.contains("eps")) mc.eps_dist = parse_dist(mj["eps"], "model.eps", problems);
  if (mj.contains("outside")) {
    const json& o = mj["outside"];
    reject_unknown(o, {"kind", "value"}, "model.outside.", problems);
    const std::string kind = o.value("kind", "const");
    if (kind == "const") {
      mc.outside.kind = model::OutsideSpec::Kind::constant;
      if (o.contains("value")) mc.outside.value = number_or_inf(o["value"], "model.outside.value", problems);
    } else if (kind == "noise") {
      mc.outside.kind = model::OutsideSpec::Kind::noise;
    } else {
      problems += "'model.outside.kind' must be const|noise; ";
    }
  }
  if (mj.contains("threshold")) {
    const json& t = mj["threshold"];
    reject_unknown(t, {"kind", "p"}, "model.threshold.", problems);
    const std::string kind = t.value("kind", "none");
    if (kind == "none") {
      mc.threshold.kind = model::ThresholdSpec::Kind::none;
    } else if (kind == "quantile") {
      mc.threshold.kind = model::ThresholdSpec::Kind::quantile;
      mc.threshold.p = t.value("p", 0.0);
    } else {
      problems += "'model.threshold.kind' must be none|quantile; ";
    }
  }
  mc.x_dim = mj.value("x_dim", 1);
  mc.z_dim = mj.value("z_dim", 1);
  mc.seed = mj.value("seed", std::uint64_t{1});
  return mc;
}

json model_to_json(const model::ModelConfig& mc) {
  json mj;
  mj["n"] = mc.n;
  mj["m"] = mc.m;
  mj["quotas"] = quotas_to_json(mc.quotas);
  mj["sigma"] = sigma_to_json(mc.sigma);
  mj["lambda"] = mc.lambda == model::LambdaSpec::x_first ? "x_first" : "x_mean";
  mj["g"] = mc.g == model::GSpec::dot ? "dot" : "zero";
  mj["eps_scale"] = mc.eps_scale;
  mj["eta"] = dist_to_string(mc.eta_dist);
  mj["eps"] = dist_to_string(mc.eps_dist);
  if (mc.outside.kind == model::OutsideSpec::Kind::constant)
    mj["outside"] = {{"kind", "const"}, {"value", inf_to_json(mc.outside.value)}};
  else
    mj["outside"] = {{"kind", "noise"}};
  if (mc.threshold.kind == model::ThresholdSpec::Kind::none)
    mj["threshold"] = {{"kind", "none"}};
  else
    mj["threshold"] = {{"kind", "quantile"}, {"p", mc.threshold.p}};
  mj["x_dim"] = mc.x_dim;
  mj["z_dim"] = mc.z_dim;
  mj["seed"] = mc.seed;
  return mj;
}

expt::StatisticSelector parse_statistic(const json& sj, std::string& problems) {
  expt::StatisticSelector sel;
  reject_unknown(sj, {"kind", "college", "x_cut"}, "experiment.statistic.", problems);
  const std::string kind = sj.value("kind", "college_frequency");
  if (kind == "college_frequency") {
    sel.kind = expt::StatisticSelector::Kind::college_frequency;
    sel.college = sj.value("college", 1);
  } else if (kind == "matched_fraction") {
    sel.kind = expt::StatisticSelector::Kind::matched_fraction;
  } else if (kind == "x_below") {
    sel.kind = expt::StatisticSelector::Kind::x_below;
    sel.x_cut = sj.value("x_cut", 0.5);
  } else {
    problems += "'experiment.statistic.kind' must be college_frequency|matched_fraction|x_below; ";
  }
  return sel;
}

json statistic_to_json(const expt::StatisticSelector& sel) {
  json sj;
  switch (sel.kind) {
    case expt::StatisticSelector::Kind::college_frequency:
      sj["kind"] = "college_frequency";
      sj["college"] = sel.college;
      break;
    case expt::StatisticSelector::Kind::matched_fraction:
      sj["kind"] = "matched_fraction";
      break;
    case expt::StatisticSelector::Kind::x_below:
      sj["kind"] = "x_below";
      sj["x_cut"] = sel.x_cut;
      break;
  }
  return sj;
}

expt::ExperimentConfig parse_experiment(const json& ej, std::string& problems) {
  expt::ExperimentConfig ec;
  reject_unknown(ej,
                 {"kind", "replications", "target_factor", "n_grid", "sigma_grid", "m_grid",
                  "t_grid", "statistic", "window", "audit_college_optimal", "probe_points",
                  "bandwidth_exponent", "fit_n"},
                 "experiment.", problems);
  ec.kind = ej.value("kind", "");
  ec.replications = ej.value("replications", 200);
  ec.target_factor = ej.value("target_factor", 20);
  if (ej.contains("n_grid")) ec.n_grid = ej["n_grid"].get<std::vector<int>>();
  if (ej.contains("sigma_grid")) ec.sigma_grid = ej["sigma_grid"].get<std::vector<double>>();
  if (ej.contains("m_grid")) ec.m_grid = ej["m_grid"].get<std::vector<int>>();
  if (ej.contains("t_grid")) ec.t_grid = ej["t_grid"].get<std::vector<double>>();
  if (ej.contains("statistic")) ec.statistic = parse_statistic(ej["statistic"], problems);
  if (ej.contains("window")) {
    const json& w = ej["window"];
    reject_unknown(w, {"kind", "rho"}, "experiment.window.", problems);
    const std::string kind = w.value("kind", "full");
    if (kind == "full") {
      ec.window.kind = expt::WindowRule::Kind::full;
    } else if (kind == "fraction") {
      ec.window.kind = expt::WindowRule::Kind::fraction;
      ec.window.rho = w.value("rho", 1.0);
    } else {
      problems += "'experiment.window.kind' must be full|fraction; ";
    }
  }
  ec.audit_college_optimal = ej.value("audit_college_optimal", true);
  if (ej.contains("probe_points")) ec.probe_points = ej["probe_points"].get<std::vector<double>>();
  ec.bandwidth_exponent = ej.value("bandwidth_exponent", -0.2);
  ec.fit_n = ej.value("fit_n", 0);
  return ec;
}

json experiment_to_json(const expt::ExperimentConfig& ec) {
  json ej;
  ej["kind"] = ec.kind;
  ej["replications"] = ec.replications;
  ej["target_factor"] = ec.target_factor;
  ej["n_grid"] = ec.n_grid;
  ej["sigma_grid"] = ec.sigma_grid;
  ej["m_grid"] = ec.m_grid;
  ej["t_grid"] = ec.t_grid;
  ej["statistic"] = statistic_to_json(ec.statistic);
  if (ec.window.kind == expt::WindowRule::Kind::full)
    ej["window"] = {{"kind", "full"}};
  else
    ej["window"] = {{"kind", "fraction"}, {"rho", ec.window.rho}};
  ej["audit_college_optimal"] = ec.audit_college_optimal;
  ej["probe_points"] = ec.probe_points;
  ej["bandwidth_exponent"] = ec.bandwidth_exponent;
  ej["fit_n"] = ec.fit_n;
  return ej;
}

LoadedConfig from_json(const json& root) {
  std::string problems;
  reject_unknown(root, {"model", "experiment", "output", "threads"}, "", problems);

  LoadedConfig config;
  model::ModelConfig mc;
  if (root.contains("model")) mc = parse_model(root["model"], problems);
  expt::ExperimentConfig ec;
  if (root.contains("experiment")) ec = parse_experiment(root["experiment"], problems);
  ec.model = mc;
  config.experiment = std::move(ec);
  if (root.contains("output")) {
    const json& o = root["output"];
    reject_unknown(o, {"dir", "format"}, "output.", problems);
    config.out_dir = o.value("dir", "out");
    config.format = o.value("format", "both");
    if (config.format != "csv" && config.format != "jsonl" && config.format != "both")
      problems += "'output.format' must be csv|jsonl|both; ";
  }
  config.experiment.threads = root.value("threads", 0);
  if (config.experiment.threads < 0) problems += "'threads' must be >= 0; ";

  if (!problems.empty()) throw ConfigError("config validation failed: " + problems);
  try {
    config.experiment.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config validation failed: ") + e.what());
  }
  return config;
}

}  // namespace

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

LoadedConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  return from_json(root);
}

std::string canonical_config(const LoadedConfig& config) {
  json root;
  root["model"] = model_to_json(config.experiment.model);
  json ej = experiment_to_json(config.experiment);
  root["experiment"] = ej;
  root["output"] = {{"dir", config.out_dir}, {"format", config.format}};
  root["threads"] = config.experiment.threads;
  // nlohmann::json keeps object keys sorted, so dump() is the canonical form.
  return root.dump(2) + "\n";
}

std::uint64_t config_hash(const LoadedConfig& config) {
  const std::string canon = canonical_config(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace matchsim::io
