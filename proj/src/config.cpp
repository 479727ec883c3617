#include "stfe/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace stfe {

namespace {

using toml::Document;
using toml::Value;

struct TableReader {
  const Document& doc;
  std::string table;
  std::set<std::string> seen;

  const Value* get(const std::string& key) {
    seen.insert(key);
    return doc.find(table, key);
  }
  double number(const std::string& key, double fallback) {
    const Value* v = get(key);
    return v ? v->as_number() : fallback;
  }
  int integer(const std::string& key, int fallback) {
    const Value* v = get(key);
    return v ? static_cast<int>(v->as_integer()) : fallback;
  }
  std::string text(const std::string& key, const std::string& fallback) {
    const Value* v = get(key);
    if (!v) return fallback;
    if (v->type != Value::Type::String)
      throw ConfigError("[" + table + "] " + key + ": expected a string");
    return v->str;
  }
  void finish() {
    const auto it = doc.tables.find(table);
    if (it == doc.tables.end()) return;
    for (const auto& [key, value] : it->second)
      if (!seen.count(key))
        throw ConfigError("[" + table + "] unknown key '" + key + "'");
  }
};

MobilitySpec mobility_from(const Document& doc, const std::string& table,
                           std::set<std::string>* visited) {
  visited->insert(table);
  TableReader t{doc, table, {}};
  const std::string kind = t.text("kind", "power");
  MobilitySpec spec;
  if (kind == "power") {
    spec = MobilitySpec::power_law(t.number("n", 2.0));
  } else if (kind == "mixed") {
    const Value* c = t.get("coeffs");
    const Value* e = t.get("exponents");
    if (!c || !e || c->type != Value::Type::Array ||
        e->type != Value::Type::Array || c->array.size() != e->array.size() ||
        c->array.empty())
      throw ConfigError("[" + table +
                        "] mixed mobility needs matching coeffs/exponents arrays");
    std::vector<std::pair<double, double>> terms;
    for (std::size_t i = 0; i < c->array.size(); ++i)
      terms.emplace_back(c->array[i], e->array[i]);
    spec = MobilitySpec::mixed_powers(std::move(terms));
  } else if (kind == "interp") {
    const double delta = t.number("delta", 1.0);
    if (!doc.has_table(table + ".inner") || !doc.has_table(table + ".inner2"))
      throw ConfigError("[" + table +
                        "] interp mobility needs [" + table + ".inner] and [" +
                        table + ".inner2]");
    spec = MobilitySpec::interpolation(
        delta, mobility_from(doc, table + ".inner", visited),
        mobility_from(doc, table + ".inner2", visited));
  } else {
    throw ConfigError("[" + table + "] kind must be power, mixed or interp");
  }
  t.finish();
  return spec;
}

}  // namespace

ExperimentConfig config_from_toml(const Document& doc, std::string raw_text) {
  ExperimentConfig cfg;
  cfg.raw_text = std::move(raw_text);
  SimConfig& sim = cfg.sim;

  std::set<std::string> visited{""};

  {
    TableReader t{doc, "grid", {}};
    sim.n = t.integer("n", sim.n);
    t.finish();
    visited.insert("grid");
  }
  {
    TableReader t{doc, "time", {}};
    sim.T = t.number("T", sim.T);
    sim.dt0 = t.number("dt0", sim.dt0);
    sim.dt_min = t.number("dt_min", sim.dt_min);
    t.finish();
    visited.insert("time");
  }
  {
    TableReader t{doc, "initial", {}};
    sim.init_mean = t.number("mean", sim.init_mean);
    sim.init_amp = t.number("amp", sim.init_amp);
    sim.init_freq = t.integer("freq", sim.init_freq);
    const std::string file = t.text("file", "");
    if (!file.empty()) sim.init_file = file;
    t.finish();
    visited.insert("initial");
  }
  if (doc.has_table("mobility"))
    sim.mobility = mobility_from(doc, "mobility", &visited);
  visited.insert("mobility");
  {
    TableReader t{doc, "potential", {}};
    const std::string kind = t.text("kind", "lennard_jones");
    if (kind == "none") {
      sim.potential.reset();
      t.finish();
    } else {
      const double theta = t.number("theta", 8.0);
      if (kind == "lennard_jones")
        sim.potential = PotentialSpec::lennard_jones(theta, t.number("c", 1.0));
      else if (kind == "pure_power")
        sim.potential = PotentialSpec::pure_power(theta);
      else
        throw ConfigError(
            "[potential] kind must be lennard_jones, pure_power or none");
      t.finish();
    }
    visited.insert("potential");
  }
  {
    TableReader t{doc, "noise", {}};
    const int K = t.integer("K", 0);
    const double decay = t.number("decay", 3.0);
    const double c = t.number("c", 0.25);
    if (K > 0) sim.noise = build_trig_basis(K, decay, c);
    t.finish();
    visited.insert("noise");
  }
  {
    TableReader t{doc, "scheme", {}};
    const std::string kind = t.text("kind", "ito");
    if (kind == "ito")
      sim.scheme = Scheme::Ito;
    else if (kind == "stratonovich")
      sim.scheme = Scheme::Stratonovich;
    else
      throw ConfigError("[scheme] kind must be ito or stratonovich");
    if (const Value* v = t.get("strat_correction_c")) {
      if (sim.scheme != Scheme::Ito)
        throw ConfigError("[scheme] strat_correction_c applies to the Ito scheme");
      sim.strat_correction_c = v->as_number();
    }
    t.finish();
    visited.insert("scheme");
  }
  if (doc.has_table("cutoff")) {
    TableReader t{doc, "cutoff", {}};
    sim.cutoff = CutoffSpec(t.integer("j", 1));
    t.finish();
  }
  visited.insert("cutoff");
  {
    TableReader t{doc, "adaptivity", {}};
    sim.pos_floor = t.number("pos_floor", sim.pos_floor);
    sim.drop_ratio = t.number("drop_ratio", sim.drop_ratio);
    sim.h1_max = t.number("h1_max", sim.h1_max);
    t.finish();
    visited.insert("adaptivity");
  }
  {
    TableReader t{doc, "diagnostics", {}};
    sim.beta_diag = t.number("beta", sim.beta_diag);
    if (const Value* v = t.get("gamma")) sim.gamma_diag = v->as_number();
    t.finish();
    visited.insert("diagnostics");
  }
  {
    TableReader t{doc, "output", {}};
    sim.output_stride = t.integer("stride", sim.output_stride);
    t.finish();
    visited.insert("output");
  }
  {
    TableReader t{doc, "run", {}};
    sim.seed = static_cast<std::uint64_t>(t.integer("seed", 0));
    sim.paths = t.integer("paths", sim.paths);
    t.finish();
    visited.insert("run");
  }
  {
    TableReader t{doc, "maxreg", {}};
    MaxregConfig& m = cfg.maxreg;
    m.lambda = t.number("lambda", m.lambda);
    m.trials = t.integer("trials", m.trials);
    m.pieces = t.integer("pieces", m.pieces);
    m.T = t.number("T", m.T);
    m.k_modes = t.integer("modes", m.k_modes);
    m.p = t.number("p", m.p);
    m.q = t.number("q", m.q);
    m.kappa = t.number("kappa", m.kappa);
    m.n_t = t.integer("n_t", m.n_t);
    m.cacc_lambda = t.number("cacc_lambda", m.cacc_lambda);
    m.cacc_trials = t.integer("cacc_trials", m.cacc_trials);
    if (const Value* v = t.get("cacc_scales")) {
      if (v->type != Value::Type::Array || v->array.empty())
        throw ConfigError("[maxreg] cacc_scales must be a numeric array");
      m.cacc_scales = v->array;
    }
    t.finish();
    visited.insert("maxreg");
  }

  for (const auto& [name, table] : doc.tables)
    if (!visited.count(name))
      throw ConfigError("unknown table [" + name + "]");
  return cfg;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void emit_mobility(std::ostringstream& os, const MobilitySpec& m,
                   const std::string& table) {
  os << "[" << table << "]\n";
  switch (m.kind) {
    case MobilitySpec::Kind::PowerLaw:
      os << "kind = \"power\"\nn = " << num(m.exponent) << "\n";
      break;
    case MobilitySpec::Kind::MixedPowers: {
      os << "kind = \"mixed\"\ncoeffs = [";
      for (std::size_t i = 0; i < m.terms.size(); ++i)
        os << (i ? ", " : "") << num(m.terms[i].first);
      os << "]\nexponents = [";
      for (std::size_t i = 0; i < m.terms.size(); ++i)
        os << (i ? ", " : "") << num(m.terms[i].second);
      os << "]\n";
      break;
    }
    case MobilitySpec::Kind::NonlinearInterp:
      os << "kind = \"interp\"\ndelta = " << num(m.delta) << "\n";
      emit_mobility(os, m.inner[0], table + ".inner");
      emit_mobility(os, m.inner[1], table + ".inner2");
      break;
  }
}

}  // namespace

std::string to_toml(const ExperimentConfig& cfg) {
  const SimConfig& s = cfg.sim;
  std::ostringstream os;
  os << "[grid]\nn = " << s.n << "\n";
  os << "[time]\nT = " << num(s.T) << "\ndt0 = " << num(s.dt0)
     << "\ndt_min = " << num(s.dt_min) << "\n";
  os << "[initial]\n";
  if (s.init_file) {
    os << "file = \"" << *s.init_file << "\"\n";
  } else {
    os << "mean = " << num(s.init_mean) << "\namp = " << num(s.init_amp)
       << "\nfreq = " << s.init_freq << "\n";
  }
  emit_mobility(os, s.mobility, "mobility");
  os << "[potential]\n";
  if (!s.potential) {
    os << "kind = \"none\"\n";
  } else if (s.potential->kind == PotentialSpec::Kind::LennardJonesType) {
    os << "kind = \"lennard_jones\"\ntheta = " << num(s.potential->theta)
       << "\nc = " << num(s.potential->c_theta) << "\n";
  } else {
    os << "kind = \"pure_power\"\ntheta = " << num(s.potential->theta) << "\n";
  }
  os << "[noise]\nK = " << s.noise.truncation;
  if (!s.noise.empty())
    os << "\ndecay = " << num(s.noise.decay)
       << "\nc = " << num(s.noise.amplitude_scale);
  os << "\n";
  os << "[scheme]\nkind = \""
     << (s.scheme == Scheme::Ito ? "ito" : "stratonovich") << "\"\n";
  if (s.strat_correction_c)
    os << "strat_correction_c = " << num(*s.strat_correction_c) << "\n";
  if (s.cutoff) os << "[cutoff]\nj = " << s.cutoff->j << "\n";
  os << "[adaptivity]\npos_floor = " << num(s.pos_floor)
     << "\ndrop_ratio = " << num(s.drop_ratio)
     << "\nh1_max = " << num(s.h1_max) << "\n";
  os << "[diagnostics]\nbeta = " << num(s.beta_diag) << "\n";
  if (s.gamma_diag) os << "gamma = " << num(*s.gamma_diag) << "\n";
  os << "[output]\nstride = " << s.output_stride << "\n";
  os << "[run]\nseed = " << s.seed << "\npaths = " << s.paths << "\n";
  const MaxregConfig& m = cfg.maxreg;
  os << "[maxreg]\nlambda = " << num(m.lambda) << "\ntrials = " << m.trials
     << "\npieces = " << m.pieces << "\nT = " << num(m.T)
     << "\nmodes = " << m.k_modes << "\np = " << num(m.p)
     << "\nq = " << num(m.q) << "\nkappa = " << num(m.kappa)
     << "\nn_t = " << m.n_t << "\ncacc_lambda = " << num(m.cacc_lambda)
     << "\ncacc_trials = " << m.cacc_trials << "\ncacc_scales = [";
  for (std::size_t i = 0; i < m.cacc_scales.size(); ++i)
    os << (i ? ", " : "") << num(m.cacc_scales[i]);
  os << "]\n";
  return os.str();
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  const std::string text = buf.str();
  try {
    return config_from_toml(toml::parse(text), text);
  } catch (const toml::ParseError& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
}

}  // namespace stfe
