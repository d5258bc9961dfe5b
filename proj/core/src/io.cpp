#include "live/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace live {

using nlohmann::json;

namespace {

constexpr const char* kArtifactVersion = "live 0.1.0";
constexpr const char* kConfigSchema = "live-sim-config/1";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw_io("parse error " + where + ": '" + s + "' is not a number");
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw_io("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

Dataset read_dataset_csv(const std::string& path, bool add_intercept) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw_io("'" + path + "': empty file");
  const std::vector<std::string> header = split_csv_line(line);
  int y_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == "y") y_col = static_cast<int>(j);
  if (y_col < 0) throw_io("'" + path + "': header has no 'y' column");
  const std::size_t n_fields = header.size();
  if (n_fields < 2) throw_io("'" + path + "': need at least one feature column");

  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != n_fields)
      throw_io("'" + path + "' line " + std::to_string(line_no) + ": expected " +
               std::to_string(n_fields) + " fields, got " +
               std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(n_fields - 1);
    for (std::size_t j = 0; j < n_fields; ++j) {
      const double v = parse_double(
          fields[j], "at '" + path + "' line " + std::to_string(line_no));
      if (static_cast<int>(j) == y_col)
        y.push_back(v);
      else
        row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw_io("'" + path + "': no data rows");

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index n_feat = static_cast<Eigen::Index>(rows.front().size());
  const Eigen::Index p = n_feat + (add_intercept ? 1 : 0);
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd yy(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (add_intercept) x(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < n_feat; ++j)
      x(i, j + (add_intercept ? 1 : 0)) = rows[i][j];
    yy[i] = y[i];
  }
  return validate_dataset(std::move(x), std::move(yy), add_intercept);
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out = open_output(path);
  out << "y";
  const Eigen::Index first = data.has_intercept_column ? 1 : 0;
  for (Eigen::Index j = first; j < data.p(); ++j) out << ",x" << (j - first + 1);
  out << "\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << format_double(data.y[i]);
    for (Eigen::Index j = first; j < data.p(); ++j)
      out << "," << format_double(data.x(i, j));
    out << "\n";
  }
}

std::vector<Loading> read_loadings_csv(const std::string& path,
                                       Eigen::Index expected_p) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw_io("'" + path + "': empty file");
  const std::size_t n_fields = split_csv_line(line).size();
  if (static_cast<Eigen::Index>(n_fields) != expected_p)
    throw_validation("'" + path + "': loading has " + std::to_string(n_fields) +
                     " columns but the model has p=" + std::to_string(expected_p) +
                     " (the intercept entry must be explicit)");
  std::vector<Loading> loadings;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != n_fields)
      throw_io("'" + path + "' line " + std::to_string(line_no) + ": expected " +
               std::to_string(n_fields) + " fields, got " +
               std::to_string(fields.size()));
    Eigen::VectorXd v(expected_p);
    for (Eigen::Index j = 0; j < expected_p; ++j)
      v[j] = parse_double(fields[j],
                          "at '" + path + "' line " + std::to_string(line_no));
    loadings.push_back(validate_loading(std::move(v), expected_p));
  }
  if (loadings.empty()) throw_io("'" + path + "': no loading rows");
  return loadings;
}

void write_loadings_csv(const std::string& path,
                        const std::vector<Loading>& loadings) {
  if (loadings.empty()) throw_validation("write_loadings_csv: nothing to write");
  std::ofstream out = open_output(path);
  const Eigen::Index p = loadings.front().values.size();
  for (Eigen::Index j = 0; j < p; ++j) out << (j ? "," : "") << "x" << (j + 1);
  out << "\n";
  for (const Loading& l : loadings) {
    for (Eigen::Index j = 0; j < p; ++j)
      out << (j ? "," : "") << format_double(l.values[j]);
    out << "\n";
  }
}

void write_model_file(const std::string& path, const FittedModel& model,
                      Eigen::Index p) {
  std::ofstream out = open_output(path);
  out << "# live model v1\n";
  out << "# p," << p << "\n";
  out << "# lambda," << format_double(model.lambda) << "\n";
  out << "# objective," << format_double(model.objective_value) << "\n";
  out << "# iterations," << model.iterations << "\n";
  out << "# converged," << (model.converged ? 1 : 0) << "\n";
  out << "index,value\n";
  for (Eigen::Index j = 0; j < model.beta_hat.size(); ++j)
    if (model.beta_hat[j] != 0.0)
      out << (j + 1) << "," << format_double(model.beta_hat[j]) << "\n";
}

FittedModel read_model_file(const std::string& path, Eigen::Index* p_out) {
  std::ifstream in = open_input(path);
  FittedModel model;
  Eigen::Index p = -1;
  std::string line;
  int line_no = 0;
  bool in_header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const std::vector<std::string> kv = split_csv_line(line.substr(2));
      if (kv.size() == 2) {
        const std::string where = "at '" + path + "' line " + std::to_string(line_no);
        if (kv[0] == "p") p = static_cast<Eigen::Index>(parse_double(kv[1], where));
        else if (kv[0] == "lambda") model.lambda = parse_double(kv[1], where);
        else if (kv[0] == "objective") model.objective_value = parse_double(kv[1], where);
        else if (kv[0] == "iterations") model.iterations = static_cast<int>(parse_double(kv[1], where));
        else if (kv[0] == "converged") model.converged = parse_double(kv[1], where) != 0.0;
      }
      continue;
    }
    if (in_header) {  // the "index,value" header row
      if (line != "index,value")
        throw_io("'" + path + "' line " + std::to_string(line_no) +
                 ": expected 'index,value' header");
      if (p <= 0) throw_io("'" + path + "': missing '# p,<dim>' metadata");
      model.beta_hat = Eigen::VectorXd::Zero(p);
      in_header = false;
      continue;
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 2)
      throw_io("'" + path + "' line " + std::to_string(line_no) +
               ": expected 2 fields, got " + std::to_string(fields.size()));
    const std::string where = "at '" + path + "' line " + std::to_string(line_no);
    const auto idx = static_cast<Eigen::Index>(parse_double(fields[0], where));
    if (idx < 1 || idx > p)
      throw_io("'" + path + "' line " + std::to_string(line_no) +
               ": index out of range");
    model.beta_hat[idx - 1] = parse_double(fields[1], where);
  }
  if (in_header) throw_io("'" + path + "': truncated model file");
  if (p_out) *p_out = p;
  return model;
}

std::string manifest_to_json(const RunManifest& manifest) {
  json j;
  j["command"] = manifest.command;
  j["config"] = manifest.config_snapshot.empty()
                    ? json()
                    : json::parse(manifest.config_snapshot);
  j["master_seed"] = manifest.master_seed;
  j["artifact_version"] =
      manifest.artifact_version.empty() ? kArtifactVersion : manifest.artifact_version;
  j["wall_clock_seconds"] = manifest.wall_clock_seconds;
  json phases = json::object();
  for (const auto& [name, secs] : manifest.phase_seconds) phases[name] = secs;
  j["phase_seconds"] = phases;
  return j.dump(2) + "\n";
}

void write_manifest(const std::string& output_path, const RunManifest& manifest) {
  std::ofstream out = open_output(output_path + ".manifest.json");
  out << manifest_to_json(manifest);
}

namespace {

void reject_unknown_fields(const json& j, const std::set<std::string>& known,
                           const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw_validation("config: unknown field '" + it.key() + "' " + where);
}

BetaSpec beta_from_json(const json& j) {
  reject_unknown_fields(j, {"kind", "decay_exponent", "intercept"}, "in beta");
  BetaSpec spec;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "exact_sparse") spec.kind = BetaSpec::Kind::exact_sparse;
  else if (kind == "decay") spec.kind = BetaSpec::Kind::decay;
  else if (kind == "exact_sparse_adversarial")
    spec.kind = BetaSpec::Kind::exact_sparse_adversarial;
  else if (kind == "exact_sparse_with_intercept")
    spec.kind = BetaSpec::Kind::exact_sparse_with_intercept;
  else throw_validation("config: unknown beta kind '" + kind + "'");
  if (j.contains("decay_exponent")) spec.decay_exponent = j["decay_exponent"].get<double>();
  if (j.contains("intercept")) spec.intercept = j["intercept"].get<double>();
  return spec;
}

json beta_to_json(const BetaSpec& spec) {
  json j;
  switch (spec.kind) {
    case BetaSpec::Kind::exact_sparse: j["kind"] = "exact_sparse"; break;
    case BetaSpec::Kind::decay:
      j["kind"] = "decay";
      j["decay_exponent"] = spec.decay_exponent;
      break;
    case BetaSpec::Kind::exact_sparse_adversarial:
      j["kind"] = "exact_sparse_adversarial";
      break;
    case BetaSpec::Kind::exact_sparse_with_intercept:
      j["kind"] = "exact_sparse_with_intercept";
      j["intercept"] = spec.intercept;
      break;
  }
  return j;
}

LoadingSpec loading_from_json(const json& j) {
  reject_unknown_fields(j, {"kind", "r"}, "in loading");
  LoadingSpec spec;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "loading1") spec.kind = LoadingSpec::Kind::loading1;
  else if (kind == "loading2") spec.kind = LoadingSpec::Kind::loading2;
  else if (kind == "loading3") spec.kind = LoadingSpec::Kind::loading3;
  else throw_validation("config: unknown loading kind '" + kind + "'");
  if (j.contains("r")) spec.r = j["r"].get<double>();
  return spec;
}

json loading_to_json(const LoadingSpec& spec) {
  json j;
  switch (spec.kind) {
    case LoadingSpec::Kind::loading1: j["kind"] = "loading1"; break;
    case LoadingSpec::Kind::loading2: j["kind"] = "loading2"; break;
    case LoadingSpec::Kind::loading3: j["kind"] = "loading3"; break;
  }
  j["r"] = spec.r;
  return j;
}

}  // namespace

SimulationConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw_io(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    reject_unknown_fields(j,
                          {"schema_version", "n", "p", "beta", "loading", "n_reps",
                           "alpha", "threshold", "master_seed", "methods"},
                          "at top level");
    if (!j.contains("schema_version") ||
        j["schema_version"].get<std::string>() != kConfigSchema)
      throw_validation(std::string("config: schema_version must be '") +
                       kConfigSchema + "'");
    SimulationConfig cfg;
    cfg.n = j.at("n").get<int>();
    cfg.p = j.at("p").get<int>();
    cfg.beta = beta_from_json(j.at("beta"));
    cfg.loading = loading_from_json(j.at("loading"));
    cfg.n_reps = j.at("n_reps").get<int>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("threshold")) cfg.threshold_c = j["threshold"].get<double>();
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j["methods"])
        cfg.methods.push_back(method_from_name(m.get<std::string>()));
    }
    validate_config(cfg);
    return cfg;
  } catch (const json::exception& e) {
    throw_validation(std::string("config: ") + e.what());
  }
}

SimulationConfig read_config_json(const std::string& path) {
  std::ifstream in = open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json_text(const SimulationConfig& config) {
  json j;
  j["schema_version"] = kConfigSchema;
  j["n"] = config.n;
  j["p"] = config.p;
  j["beta"] = beta_to_json(config.beta);
  j["loading"] = loading_to_json(config.loading);
  j["n_reps"] = config.n_reps;
  j["alpha"] = config.alpha;
  j["threshold"] = config.threshold_c;
  j["master_seed"] = config.master_seed;
  json methods = json::array();
  for (Method m : config.methods) methods.push_back(method_name(m));
  j["methods"] = methods;
  return j.dump(2) + "\n";
}

namespace {

json number_or_null(double v) {
  if (std::isnan(v)) return json();
  return json(v);
}

json result_to_json_obj(const InferenceResult& r) {
  json j;
  j["method"] = method_name(r.method);
  j["linear_estimate"] = r.linear_estimate;
  j["variance"] = number_or_null(r.variance);
  j["case_probability"] = r.case_probability;
  j["ci_lower"] = r.has_ci ? number_or_null(r.ci_lower) : json();
  j["ci_upper"] = r.has_ci ? number_or_null(r.ci_upper) : json();
  j["alpha"] = r.alpha;
  j["reject_null"] = r.reject_null;
  j["p_value"] = r.has_ci ? number_or_null(r.p_value) : json();
  j["threshold"] = r.threshold;
  j["degenerate"] = r.degenerate;
  j["separation"] = r.separation;
  j["clamped_weights"] = r.clamped_weights;
  if (r.certificate) {
    json c;
    c["linf_residual"] = r.certificate->linf_residual;
    c["loading_residual"] = r.certificate->loading_residual;
    c["lambda_n"] = r.certificate->lambda_n;
    c["mu"] = r.certificate->mu;
    c["feasible"] = r.certificate->feasible;
    j["certificate"] = c;
  } else {
    j["certificate"] = json();
  }
  return j;
}

}  // namespace

std::string inference_result_to_json(const InferenceResult& result) {
  return result_to_json_obj(result).dump(2) + "\n";
}

std::string inference_results_to_json(const std::vector<InferenceResult>& results) {
  json arr = json::array();
  for (const InferenceResult& r : results) arr.push_back(result_to_json_obj(r));
  return arr.dump(2) + "\n";
}

void write_summary_csv(const std::string& path, const SimulationConfig& config,
                       double truth, const SummaryMetrics& summary) {
  std::ofstream out = open_output(path);
  out << "method,n,p,n_reps,truth,Cov,ERR,Len,RMSE,Bias,SE,t,n_used,n_ci,n_failed\n";
  for (const auto& [method, m] : summary.per_method) {
    out << method_name(method) << "," << config.n << "," << config.p << ","
        << config.n_reps << "," << format_double(truth) << ","
        << format_double(m.cov) << "," << format_double(m.err) << ","
        << format_double(m.len) << "," << format_double(m.rmse) << ","
        << format_double(m.bias) << "," << format_double(m.se) << ","
        << format_double(m.mean_runtime) << "," << m.n_used << "," << m.n_ci
        << "," << m.n_failed << "\n";
  }
}

std::string replication_csv_header() {
  return "rep_index,truth,method,ok,error,linear_estimate,probability,ci_lower,"
         "ci_upper,has_ci,reject,degenerate,projection_feasible,runtime_seconds";
}

std::string replication_to_csv_rows(const ReplicationResult& rep) {
  std::string rows;
  for (const auto& [method, o] : rep.per_method) {
    std::string err = o.error;
    for (char& c : err)
      if (c == ',' || c == '\n') c = ';';
    rows += std::to_string(rep.rep_index) + "," + format_double(rep.truth) + "," +
            method_name(method) + "," + (o.ok ? "1" : "0") + "," + err + "," +
            format_double(o.linear_estimate) + "," + format_double(o.probability) +
            "," + format_double(o.ci_lower) + "," + format_double(o.ci_upper) +
            "," + (o.has_ci ? "1" : "0") + "," + (o.reject ? "1" : "0") + "," +
            (o.degenerate ? "1" : "0") + "," + (o.projection_feasible ? "1" : "0") +
            "," + format_double(o.runtime_seconds) + "\n";
  }
  return rows;
}

void write_replications_csv(const std::string& path,
                            const std::vector<ReplicationResult>& reps) {
  std::ofstream out = open_output(path);
  out << replication_csv_header() << "\n";
  for (const ReplicationResult& r : reps) out << replication_to_csv_rows(r);
}

ReplicationResult replication_from_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line) ||
      split_csv_line(line) != split_csv_line(replication_csv_header()))
    throw_io("'" + path + "': bad replication header");
  ReplicationResult rep;
  bool first = true;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 14)
      throw_io("'" + path + "' line " + std::to_string(line_no) +
               ": expected 14 fields, got " + std::to_string(f.size()));
    const std::string where = "at '" + path + "' line " + std::to_string(line_no);
    if (first) {
      rep.rep_index = static_cast<int>(parse_double(f[0], where));
      rep.truth = parse_double(f[1], where);
      first = false;
    }
    MethodOutcome o;
    o.ok = f[3] == "1";
    o.error = f[4];
    o.linear_estimate = parse_double(f[5], where);
    o.probability = parse_double(f[6], where);
    o.ci_lower = parse_double(f[7], where);
    o.ci_upper = parse_double(f[8], where);
    o.has_ci = f[9] == "1";
    o.reject = f[10] == "1";
    o.degenerate = f[11] == "1";
    o.projection_feasible = f[12] == "1";
    o.runtime_seconds = parse_double(f[13], where);
    rep.per_method.emplace_back(method_from_name(f[2]), o);
  }
  if (first) throw_io("'" + path + "': no replication rows");
  return rep;
}

void write_cv_curve_csv(const std::string& path, const CvResult& cv) {
  std::ofstream out = open_output(path);
  out << "lambda,cv_deviance,cv_se\n";
  for (Eigen::Index g = 0; g < cv.lambda_grid.size(); ++g)
    out << format_double(cv.lambda_grid[g]) << ","
        << format_double(cv.cv_deviance[g]) << "," << format_double(cv.cv_se[g])
        << "\n";
}

}  // namespace live
