#include "stgp/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stgp/simlab.hpp"

namespace stgp {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

double parse_num(const std::string& s, const std::string& where) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("non-numeric value '" + s + "' at " + where);
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<int> parse_columns(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : split(s, ',')) {
    const std::string t = trim(tok);
    if (t.empty()) continue;
    out.push_back(static_cast<int>(parse_num(t, "column list")) - 1);
  }
  return out;
}

}  // namespace

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

double Config::get_num(const std::string& key, double fallback) const {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : parse_num(it->second, "config key " + key);
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty key");
    cfg.kv[key] = val;
  }
  return cfg;
}

std::uint64_t config_hash(const Config& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  auto eat = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [k, v] : cfg.kv) {  // std::map iterates in sorted key order
    eat(k);
    eat("=");
    eat(v);
    eat("\n");
  }
  return h;
}

FitConfig fit_config_from(const Config& cfg) {
  FitConfig fc;
  fc.iterations = static_cast<int>(cfg.get_num("iterations", fc.iterations));
  fc.burn_in = static_cast<int>(cfg.get_num("burn_in", fc.burn_in));
  fc.thin = static_cast<int>(cfg.get_num("thin", fc.thin));
  fc.L = static_cast<int>(cfg.get_num("L", fc.L));
  fc.sigma2_a = cfg.get_num("sigma2_a", fc.sigma2_a);
  fc.sigma2_delta = cfg.get_num("sigma2_delta", fc.sigma2_delta);
  fc.normal_prior_var = cfg.get_num("normal_prior_var", fc.normal_prior_var);
  fc.ig_a_sigma2 = cfg.get_num("ig_a_sigma2", fc.ig_a_sigma2);
  fc.ig_b_sigma2 = cfg.get_num("ig_b_sigma2", fc.ig_b_sigma2);
  fc.ig_a_d2 = cfg.get_num("ig_a_d2", fc.ig_a_d2);
  fc.ig_b_d2 = cfg.get_num("ig_b_d2", fc.ig_b_d2);
  fc.seed = static_cast<std::uint64_t>(cfg.get_num("seed", 1));
  const std::string variant = cfg.get("variant", "st-gp");
  if (variant == "st-gp")
    fc.variant = Variant::StGp;
  else if (variant == "sn-gp")
    fc.variant = Variant::SnGp;
  else if (variant == "n-gp")
    fc.variant = Variant::NGp;
  else
    throw std::runtime_error("unknown variant '" + variant + "'");
  fc.validate();
  return fc;
}

void apply_column_structure(const Config& cfg, PanelDataset& data) {
  if (cfg.has("normal_prior_columns") || cfg.has("groups")) {
    data.normal_prior_columns = parse_columns(cfg.get("normal_prior_columns", ""));
    data.group_map.clear();
    for (const auto& g : split(cfg.get("groups", ""), ';')) {
      const auto cols = parse_columns(g);
      if (!cols.empty()) data.group_map.push_back(cols);
    }
  } else if (data.P == 10) {
    default_groups(data);
  } else {
    data.normal_prior_columns.clear();
    for (int c = 0; c < data.P; ++c) data.normal_prior_columns.push_back(c);
    data.group_map.clear();
  }
  data.validate();
}

std::string audit_line(std::uint64_t seed, std::uint64_t cfg_hash) {
  std::ostringstream os;
  os << "# stgp " << kToolVersion << " seed=" << seed << " config_hash=" << std::hex << cfg_hash;
  return os.str();
}

PanelDataset load_dataset(const std::string& path, bool scale) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path);
  std::string line;
  int lineno = 0;
  // skip audit comments
  do {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    ++lineno;
  } while (!line.empty() && line[0] == '#');
  const auto header = split(trim(line), ',');
  const std::vector<std::string> fixed = {"subject_id", "tooth_id", "pd", "cal", "weight"};
  if (header.size() < fixed.size() + 1)
    throw std::runtime_error(path + ": header must be subject_id,tooth_id,pd,cal,weight,x1..xP");
  for (size_t i = 0; i < fixed.size(); ++i)
    if (trim(header[i]) != fixed[i])
      throw std::runtime_error(path + ": missing column '" + fixed[i] + "'");
  const int P = static_cast<int>(header.size() - fixed.size());
  for (int c = 0; c < P; ++c)
    if (trim(header[fixed.size() + c]) != "x" + std::to_string(c + 1))
      throw std::runtime_error(path + ": covariate columns must be x1..xP in order");

  PanelDataset data;
  data.P = P;
  std::map<std::string, int> index;
  struct Row {
    double pd, cal;
    Eigen::RowVectorXd x;
  };
  std::vector<std::vector<Row>> rows;
  std::vector<std::string> ids;
  std::vector<double> weights;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path + ":" + std::to_string(lineno);
    if (trim(line).empty() || line[0] == '#') continue;
    const auto cells = split(trim(line), ',');
    if (static_cast<int>(cells.size()) != 5 + P)
      throw std::runtime_error(where + ": expected " + std::to_string(5 + P) + " cells");
    const std::string id = trim(cells[0]);
    Row r;
    r.pd = parse_num(trim(cells[2]), where);
    r.cal = parse_num(trim(cells[3]), where);
    const double w = parse_num(trim(cells[4]), where);
    r.x.resize(P);
    for (int c = 0; c < P; ++c) r.x[c] = parse_num(trim(cells[5 + c]), where);
    auto [it, fresh] = index.emplace(id, static_cast<int>(ids.size()));
    if (fresh) {
      ids.push_back(id);
      weights.push_back(w);
      rows.emplace_back();
    } else if (weights[it->second] != w) {
      throw std::runtime_error(where + ": weight differs from earlier rows of subject " + id);
    }
    rows[it->second].push_back(std::move(r));
  }
  for (size_t i = 0; i < ids.size(); ++i) {
    Subject s;
    s.id = ids[i];
    s.weight = weights[i];
    s.n_teeth = static_cast<int>(rows[i].size());
    s.y_pd.resize(s.n_teeth);
    s.y_cal.resize(s.n_teeth);
    s.X.resize(s.n_teeth, P);
    for (int j = 0; j < s.n_teeth; ++j) {
      s.y_pd[j] = rows[i][j].pd;
      s.y_cal[j] = rows[i][j].cal;
      s.X.row(j) = rows[i][j].x;
    }
    data.subjects.push_back(std::move(s));
  }
  if (scale) scale_rows(data);
  return data;
}

void save_dataset(const std::string& path, const PanelDataset& data, const std::string& audit) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (!audit.empty()) out << audit << "\n";
  out << "subject_id,tooth_id,pd,cal,weight";
  for (int c = 1; c <= data.P; ++c) out << ",x" << c;
  out << "\n";
  for (const auto& s : data.subjects)
    for (int j = 0; j < s.n_teeth; ++j) {
      out << s.id << "," << (j + 1) << "," << fmt(s.y_pd[j]) << "," << fmt(s.y_cal[j]) << ","
          << fmt(s.weight);
      for (int c = 0; c < data.P; ++c) out << "," << fmt(s.X(j, c));
      out << "\n";
    }
}

void save_draws(const std::string& path, const PosteriorDraws& draws, const std::string& audit) {
  if (draws.num_draws() < 1) throw std::runtime_error("save_draws: no draws");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const int P = static_cast<int>(draws.states[0].beta_raw.size());
  const int G = static_cast<int>(draws.states[0].lambda.size());
  const int M = static_cast<int>(draws.states[0].xi.size());
  if (!audit.empty()) out << audit << "\n";
  out << "replicate,a,delta,sigma2,d2,nu,rho1_sq,rho2,tau";
  for (int c = 1; c <= P; ++c) out << ",beta" << c;
  for (int g = 1; g <= G; ++g) out << ",lambda" << g;
  for (int k = 0; k < M; ++k) out << ",xi" << k;
  out << "\n";
  for (int d = 0; d < draws.num_draws(); ++d) {
    const ModelState& s = draws.states[d];
    const Eigen::VectorXd beta = s.beta();
    out << draws.replicate[d] << "," << fmt(s.a) << "," << fmt(s.delta) << "," << fmt(s.sigma2)
        << "," << fmt(s.d2) << "," << fmt(s.nu) << "," << fmt(s.rho1_sq) << "," << fmt(s.rho2)
        << "," << fmt(s.tau);
    for (int c = 0; c < P; ++c) out << "," << fmt(beta[c]);
    for (int g = 0; g < G; ++g) out << "," << fmt(s.lambda[g]);
    for (int k = 0; k < M; ++k) out << "," << fmt(s.xi[k]);
    out << "\n";
  }
}

PosteriorDraws load_draws(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open draws " + path);
  std::string line;
  do {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  } while (!line.empty() && line[0] == '#');
  const auto header = split(trim(line), ',');
  int P = 0, G = 0, M = 0;
  for (const auto& h : header) {
    const std::string t = trim(h);
    if (t.rfind("beta", 0) == 0) ++P;
    if (t.rfind("lambda", 0) == 0) ++G;
    if (t.rfind("xi", 0) == 0) ++M;
  }
  PosteriorDraws draws;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    const auto cells = split(trim(line), ',');
    if (static_cast<int>(cells.size()) != 9 + P + G + M)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad cell count");
    const std::string where = path + ":" + std::to_string(lineno);
    ModelState s;
    int at = 0;
    draws.replicate.push_back(static_cast<int>(parse_num(trim(cells[at++]), where)));
    s.a = parse_num(trim(cells[at++]), where);
    s.delta = parse_num(trim(cells[at++]), where);
    s.sigma2 = parse_num(trim(cells[at++]), where);
    s.d2 = parse_num(trim(cells[at++]), where);
    s.nu = parse_num(trim(cells[at++]), where);
    s.rho1_sq = parse_num(trim(cells[at++]), where);
    s.rho2 = parse_num(trim(cells[at++]), where);
    s.tau = parse_num(trim(cells[at++]), where);
    s.beta_raw.resize(P);
    for (int c = 0; c < P; ++c) s.beta_raw[c] = parse_num(trim(cells[at++]), where);
    s.lambda.resize(G);
    for (int g = 0; g < G; ++g) s.lambda[g] = parse_num(trim(cells[at++]), where);
    s.xi.resize(M);
    for (int k = 0; k < M; ++k) s.xi[k] = parse_num(trim(cells[at++]), where);
    draws.states.push_back(std::move(s));
  }
  if (draws.states.empty()) throw std::runtime_error(path + ": no draws");
  return draws;
}

void save_loglik(const std::string& path, const Eigen::MatrixXd& loglik,
                 const std::string& audit) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (!audit.empty()) out << audit << "\n";
  out << "draw";
  for (int j = 1; j <= loglik.cols(); ++j) out << ",subject" << j;
  out << "\n";
  for (int d = 0; d < loglik.rows(); ++d) {
    out << (d + 1);
    for (int j = 0; j < loglik.cols(); ++j) out << "," << fmt(loglik(d, j));
    out << "\n";
  }
}

void save_truth(const std::string& path, const std::map<std::string, double>& params,
                const std::string& audit) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (!audit.empty()) out << audit << "\n";
  out << "kind,key,value\n";
  for (const auto& [k, v] : params) out << "param," << k << "," << fmt(v) << "\n";
  for (int g = 0; g < 1000; ++g) {
    const double u = -1.0 + 2.0 * g / 999.0;
    out << "grid," << fmt(u) << "," << fmt(true_index(u)) << "\n";
  }
}

}  // namespace stgp
