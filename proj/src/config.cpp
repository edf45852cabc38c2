#include "lyaplab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "lyaplab/errors.hpp"

namespace lyaplab {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::main_theorem: return "main_theorem";
    case ExperimentKind::example_bound: return "example_bound";
    case ExperimentKind::semicontinuity: return "semicontinuity";
    case ExperimentKind::norm_properties: return "norm_properties";
    case ExperimentKind::corollary_scan: return "corollary_scan";
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& text, const std::string& where) {
  for (auto k : {ExperimentKind::main_theorem, ExperimentKind::example_bound, ExperimentKind::semicontinuity,
                 ExperimentKind::norm_properties, ExperimentKind::corollary_scan})
    if (to_string(k) == text) return k;
  throw ConfigError(where, "unknown experiment kind \"" + text +
                               "\" (expected main_theorem, example_bound, semicontinuity, norm_properties or "
                               "corollary_scan)");
}

MatrixCocycle nilpotent_pair_cocycle() {
  Matrix b0(2, 2);
  b0 << 0.0, 1.0, 0.0, 0.0;
  const Matrix b1 = 2.0 * Matrix::Identity(2, 2);
  return locally_constant_cocycle(2, 0, {b0, b1});
}

namespace {

using nlohmann::ordered_json;

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  std::string where(const toml::node* node, const std::string& field) const {
    std::ostringstream os;
    os << source_;
    if (node && node->source().begin.line > 0) os << ":" << node->source().begin.line;
    os << ": field " << field;
    return os.str();
  }
  std::string where(const toml::table& t, const std::string& field) const { return where(&t, field); }

  [[noreturn]] void fail(const toml::node* node, const std::string& field, const std::string& what) const {
    throw ConfigError(where(node, field), what);
  }

  void check_keys(const toml::table& t, const std::string& prefix, const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : t) {
      const std::string key(k.str());
      if (!allowed.count(key)) fail(&v, prefix.empty() ? key : prefix + "." + key, "unknown field");
    }
  }

  const toml::table* subtable(const toml::table& t, const std::string& key, const std::string& field) const {
    const toml::node* n = t.get(key);
    if (!n) return nullptr;
    if (!n->is_table()) fail(n, field, "expected a table");
    return n->as_table();
  }

  double number(const toml::node* n, const std::string& field) const {
    if (auto v = n->value<double>()) return *v;
    fail(n, field, "expected a number");
  }
  std::int64_t integer(const toml::node* n, const std::string& field) const {
    if (n->is_integer()) return n->as_integer()->get();
    fail(n, field, "expected an integer");
  }
  std::string string(const toml::node* n, const std::string& field) const {
    if (n->is_string()) return n->as_string()->get();
    fail(n, field, "expected a string");
  }
  bool boolean(const toml::node* n, const std::string& field) const {
    if (n->is_boolean()) return n->as_boolean()->get();
    fail(n, field, "expected true or false");
  }

  std::optional<double> opt_number(const toml::table& t, const std::string& key, const std::string& field) const {
    const toml::node* n = t.get(key);
    if (!n) return std::nullopt;
    return number(n, field);
  }
  std::optional<std::int64_t> opt_integer(const toml::table& t, const std::string& key,
                                          const std::string& field) const {
    const toml::node* n = t.get(key);
    if (!n) return std::nullopt;
    return integer(n, field);
  }
  std::optional<std::string> opt_string(const toml::table& t, const std::string& key, const std::string& field) const {
    const toml::node* n = t.get(key);
    if (!n) return std::nullopt;
    return string(n, field);
  }

  const toml::array& array(const toml::node* n, const std::string& field) const {
    if (!n->is_array()) fail(n, field, "expected an array");
    return *n->as_array();
  }

  std::vector<double> numbers(const toml::node* n, const std::string& field) const {
    std::vector<double> out;
    const auto& arr = array(n, field);
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(number(arr.get(i), field + "[" + std::to_string(i) + "]"));
    return out;
  }
  std::vector<std::int64_t> integers(const toml::node* n, const std::string& field) const {
    std::vector<std::int64_t> out;
    const auto& arr = array(n, field);
    for (std::size_t i = 0; i < arr.size(); ++i)
      out.push_back(integer(arr.get(i), field + "[" + std::to_string(i) + "]"));
    return out;
  }

  Matrix matrix(const toml::node* n, const std::string& field) const {
    const auto& rows = array(n, field);
    if (rows.empty()) fail(n, field, "matrix needs at least one row");
    const auto r = static_cast<Eigen::Index>(rows.size());
    Matrix m;
    for (Eigen::Index i = 0; i < r; ++i) {
      const std::string rf = field + "[" + std::to_string(i) + "]";
      const auto row = numbers(rows.get(static_cast<std::size_t>(i)), rf);
      if (i == 0) m.resize(r, static_cast<Eigen::Index>(row.size()));
      if (static_cast<Eigen::Index>(row.size()) != m.cols()) fail(rows.get(static_cast<std::size_t>(i)), rf, "ragged matrix rows");
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    if (m.rows() != m.cols()) fail(n, field, "matrix must be square");
    if (m.rows() > kMaxDimension) fail(n, field, "matrix dimension above " + std::to_string(kMaxDimension));
    return m;
  }

 private:
  std::string source_;
};

ordered_json matrix_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

struct BuiltCocycle {
  MatrixCocycle cocycle;
  std::optional<PaperExampleCocycle> paper;
  ordered_json echo;
};

BuiltCocycle build_cocycle(const Reader& rd, const toml::table& t, const std::string& prefix, const Subshift& space,
                           std::uint64_t seed, bool scalar_only);

BuiltCocycle build_paper_example(const Reader& rd, const toml::table& t, const std::string& prefix,
                                 const Subshift& space) {
  rd.check_keys(t, prefix, {"type", "theta", "a", "extra_diagonal"});
  if (space.alphabet_size() != 2 || !space.is_full())
    rd.fail(&t, prefix + ".type", "paper_example needs the full shift on two symbols");
  PaperExampleCocycle ex;
  ex.theta = rd.opt_number(t, "theta", prefix + ".theta").value_or(space.theta());
  ex.a = rd.opt_number(t, "a", prefix + ".a").value_or(3.0);
  if (const auto* n = t.get("extra_diagonal")) ex.extra_diagonal = rd.numbers(n, prefix + ".extra_diagonal");
  try {
    ex.validate();
  } catch (const Error& e) {
    rd.fail(&t, prefix, e.what());
  }
  ordered_json echo;
  echo["type"] = "paper_example";
  echo["theta"] = ex.theta;
  echo["a"] = ex.a;
  echo["extra_diagonal"] = ex.extra_diagonal;
  return {ex.cocycle(), ex, echo};
}

BuiltCocycle build_cocycle(const Reader& rd, const toml::table& t, const std::string& prefix, const Subshift& space,
                           std::uint64_t seed, bool scalar_only) {
  const toml::node* type_node = t.get("type");
  if (!type_node) rd.fail(&t, prefix + ".type", "missing cocycle type");
  const std::string type = rd.string(type_node, prefix + ".type");
  const int k = space.alphabet_size();
  ordered_json echo;
  echo["type"] = type;

  auto wrap = [&](auto&& make) -> MatrixCocycle {
    try {
      return make();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      rd.fail(&t, prefix, e.what());
    }
  };

  if (type == "paper_example") {
    auto built = build_paper_example(rd, t, prefix, space);
    if (scalar_only && built.cocycle.dimension() != 1)
      rd.fail(&t, prefix + ".extra_diagonal", "block_diagonal entries must be scalar");
    return built;
  }
  if (type == "constant") {
    rd.check_keys(t, prefix, {"type", "matrix", "value"});
    Matrix m;
    if (const auto* v = t.get("value")) {
      m = Matrix::Constant(1, 1, rd.number(v, prefix + ".value"));
    } else if (const auto* mn = t.get("matrix")) {
      m = rd.matrix(mn, prefix + ".matrix");
    } else {
      rd.fail(&t, prefix + ".matrix", "constant cocycle needs matrix or value");
    }
    if (scalar_only && m.rows() != 1) rd.fail(&t, prefix + ".matrix", "block_diagonal entries must be scalar");
    echo["matrix"] = matrix_json(m);
    return {wrap([&] { return constant_cocycle(m); }), std::nullopt, echo};
  }
  if (scalar_only) rd.fail(type_node, prefix + ".type", "block_diagonal entries must be constant or paper_example");
  if (type == "nilpotent_pair") {
    rd.check_keys(t, prefix, {"type"});
    if (k != 2) rd.fail(type_node, prefix + ".type", "nilpotent_pair needs two symbols");
    return {nilpotent_pair_cocycle(), std::nullopt, echo};
  }
  if (type == "locally_constant") {
    rd.check_keys(t, prefix, {"type", "window", "table"});
    const int window = static_cast<int>(rd.opt_integer(t, "window", prefix + ".window").value_or(0));
    const toml::node* tn = t.get("table");
    if (!tn) rd.fail(&t, prefix + ".table", "missing matrix table");
    const auto& arr = rd.array(tn, prefix + ".table");
    std::vector<Matrix> table;
    ordered_json tj = ordered_json::array();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      table.push_back(rd.matrix(arr.get(i), prefix + ".table[" + std::to_string(i) + "]"));
      tj.push_back(matrix_json(table.back()));
    }
    echo["window"] = window;
    echo["table"] = tj;
    try {
      return {locally_constant_cocycle(k, window, table), std::nullopt, echo};
    } catch (const Error& e) {
      rd.fail(tn, prefix + ".table", e.what());
    }
  }
  if (type == "random_locally_constant") {
    rd.check_keys(t, prefix, {"type", "dimension", "window", "low", "high", "seed"});
    const int dim = static_cast<int>(rd.opt_integer(t, "dimension", prefix + ".dimension").value_or(2));
    const int window = static_cast<int>(rd.opt_integer(t, "window", prefix + ".window").value_or(0));
    const double low = rd.opt_number(t, "low", prefix + ".low").value_or(0.5);
    const double high = rd.opt_number(t, "high", prefix + ".high").value_or(1.5);
    const auto s = static_cast<std::uint64_t>(rd.opt_integer(t, "seed", prefix + ".seed").value_or(static_cast<std::int64_t>(seed)));
    echo["dimension"] = dim;
    echo["window"] = window;
    echo["low"] = low;
    echo["high"] = high;
    echo["seed"] = s;
    return {wrap([&] { return random_locally_constant_cocycle(k, dim, window, low, high, s); }), std::nullopt, echo};
  }
  if (type == "block_diagonal") {
    rd.check_keys(t, prefix, {"type", "entries"});
    const toml::node* en = t.get("entries");
    if (!en) rd.fail(&t, prefix + ".entries", "missing entries");
    const auto& arr = rd.array(en, prefix + ".entries");
    std::vector<MatrixCocycle> parts;
    std::optional<PaperExampleCocycle> paper;
    ordered_json ej = ordered_json::array();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = prefix + ".entries[" + std::to_string(i) + "]";
      const toml::node* e = arr.get(i);
      if (!e->is_table()) rd.fail(e, f, "expected a table");
      auto built = build_cocycle(rd, *e->as_table(), f, space, seed, true);
      if (built.paper && !paper) paper = built.paper;
      parts.push_back(built.cocycle);
      ej.push_back(built.echo);
    }
    echo["entries"] = ej;
    return {wrap([&] { return block_diagonal(parts); }), paper, echo};
  }
  rd.fail(type_node, prefix + ".type", "unknown cocycle type \"" + type + "\"");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source_name,
                              const ConfigOverrides& overrides) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream where;
    where << source_name << ":" << e.source().begin.line;
    throw ConfigError(where.str(), std::string(e.description()));
  }
  const Reader rd(source_name);
  rd.check_keys(root, "", {"seed", "workers", "experiment", "subshift", "cocycle", "measure", "knobs", "output"});

  ExperimentConfig cfg;
  cfg.source = source_name;

  // seed and workers
  if (overrides.seed) {
    cfg.seed = *overrides.seed;
  } else if (const auto* n = root.get("seed")) {
    const auto v = rd.integer(n, "seed");
    if (v < 0) rd.fail(n, "seed", "seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(v);
  } else {
    throw ConfigError(source_name + ": field seed", "a seed is required (config key or --seed)");
  }
  if (overrides.workers) {
    cfg.workers = *overrides.workers;
  } else if (const auto* n = root.get("workers")) {
    cfg.workers = static_cast<int>(rd.integer(n, "workers"));
  }
  if (cfg.workers < 1) throw ConfigError(source_name + ": field workers", "workers must be >= 1");

  // experiment kind
  std::optional<std::string> kind;
  if (const auto* et = rd.subtable(root, "experiment", "experiment")) {
    rd.check_keys(*et, "experiment", {"kind"});
    if (const auto* n = et->get("kind")) {
      const std::string s = rd.string(n, "experiment.kind");
      cfg.kind = parse_kind(s, rd.where(n, "experiment.kind"));
      kind = s;
    }
  }
  if (overrides.kind) {
    cfg.kind = parse_kind(*overrides.kind, "command line: experiment kind");
    kind = overrides.kind;
  }

  // subshift
  int alphabet = 2;
  double theta = 0.5;
  std::vector<std::string> rows;
  if (const auto* st = rd.subtable(root, "subshift", "subshift")) {
    rd.check_keys(*st, "subshift", {"alphabet", "theta", "transitions"});
    if (const auto* n = st->get("alphabet")) alphabet = static_cast<int>(rd.integer(n, "subshift.alphabet"));
    if (const auto* n = st->get("theta")) theta = rd.number(n, "subshift.theta");
    if (const auto* n = st->get("transitions")) {
      const auto& arr = rd.array(n, "subshift.transitions");
      for (std::size_t i = 0; i < arr.size(); ++i)
        rows.push_back(rd.string(arr.get(i), "subshift.transitions[" + std::to_string(i) + "]"));
    }
    const toml::node* blame = st;
    std::string blame_field = "subshift";
    try {
      if (alphabet < 2 || alphabet > 36) {
        blame = st->get("alphabet"), blame_field = "subshift.alphabet";
        throw Error("alphabet size must be in 2..36");
      }
      if (!(theta > 0.0 && theta < 1.0) && st->get("theta")) blame = st->get("theta"), blame_field = "subshift.theta";
      if (!rows.empty()) blame = st->get("transitions"), blame_field = "subshift.transitions";
      if (rows.empty()) {
        cfg.space = Subshift::full(alphabet, theta);
      } else {
        if (static_cast<int>(rows.size()) != alphabet) throw Error("transitions needs one row per symbol");
        std::vector<std::vector<bool>> allowed;
        for (const auto& r : rows) {
          if (static_cast<int>(r.size()) != alphabet) throw Error("transition rows need one bit per symbol");
          std::vector<bool> row;
          for (char c : r) {
            if (c != '0' && c != '1') throw Error("transition rows are bit strings");
            row.push_back(c == '1');
          }
          allowed.push_back(row);
        }
        cfg.space = Subshift(alphabet, allowed, theta);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      rd.fail(blame, blame_field, e.what());
    }
  } else {
    cfg.space = Subshift::full(alphabet, theta);
  }
  if (rows.empty())
    for (int i = 0; i < alphabet; ++i) rows.push_back(std::string(static_cast<std::size_t>(alphabet), '1'));

  // cocycle
  ordered_json cocycle_echo;
  if (const auto* ct = rd.subtable(root, "cocycle", "cocycle")) {
    auto built = build_cocycle(rd, *ct, "cocycle", cfg.space, cfg.seed, false);
    cfg.cocycle = built.cocycle;
    cfg.paper = built.paper;
    cocycle_echo = built.echo;
  } else if (cfg.kind == ExperimentKind::semicontinuity) {
    if (alphabet != 2) throw ConfigError(source_name + ": field cocycle", "default nilpotent_pair needs two symbols");
    cfg.cocycle = nilpotent_pair_cocycle();
    cocycle_echo["type"] = "nilpotent_pair";
  } else if (cfg.kind == ExperimentKind::example_bound) {
    toml::table empty;
    empty.insert("type", "paper_example");
    auto built = build_cocycle(rd, empty, "cocycle", cfg.space, cfg.seed, false);
    cfg.cocycle = built.cocycle;
    cfg.paper = built.paper;
    cocycle_echo = built.echo;
  } else {
    throw ConfigError(source_name + ": field cocycle", "missing [cocycle] table");
  }
  cfg.cocycle_type = cocycle_echo["type"].get<std::string>();

  // measure
  ordered_json measure_echo;
  {
    std::string type = "bernoulli";
    const toml::table* mt = rd.subtable(root, "measure", "measure");
    if (mt) {
      rd.check_keys(*mt, "measure", {"type", "probabilities", "transition"});
      type = rd.opt_string(*mt, "type", "measure.type").value_or("bernoulli");
    }
    measure_echo["type"] = type;
    const toml::node* blame = mt;
    std::string blame_field = "measure";
    if (mt && mt->get("probabilities")) blame = mt->get("probabilities"), blame_field = "measure.probabilities";
    if (mt && mt->get("transition")) blame = mt->get("transition"), blame_field = "measure.transition";
    try {
      if (type == "bernoulli") {
        std::vector<double> p(static_cast<std::size_t>(alphabet), 1.0 / alphabet);
        if (mt)
          if (const auto* n = mt->get("probabilities")) p = rd.numbers(n, "measure.probabilities");
        if (static_cast<int>(p.size()) != alphabet) throw Error("probabilities needs one entry per symbol");
        cfg.law = SymbolLaw::bernoulli(p);
        measure_echo["probabilities"] = p;
      } else if (type == "markov") {
        const toml::node* n = mt ? mt->get("transition") : nullptr;
        if (!n) rd.fail(mt, "measure.transition", "markov measure needs a transition matrix");
        const auto& arr = rd.array(n, "measure.transition");
        std::vector<std::vector<double>> p;
        for (std::size_t i = 0; i < arr.size(); ++i)
          p.push_back(rd.numbers(arr.get(i), "measure.transition[" + std::to_string(i) + "]"));
        if (static_cast<int>(p.size()) != alphabet) throw Error("transition needs one row per symbol");
        cfg.law = SymbolLaw::markov(p);
        measure_echo["transition"] = p;
      } else {
        rd.fail(mt, "measure.type", "unknown measure type \"" + type + "\"");
      }
      cfg.space.check_law(cfg.law);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      rd.fail(blame, blame_field, e.what());
    }
  }

  // knobs, with per-kind defaults
  Knobs& kn = cfg.knobs;
  switch (cfg.kind) {
    case ExperimentKind::norm_properties: kn.max_period = 8; break;
    case ExperimentKind::corollary_scan:
      kn.max_period = 10;
      kn.n = 5000;
      break;
    default: break;
  }
  if (const auto* kt = rd.subtable(root, "knobs", "knobs")) {
    rd.check_keys(*kt, "knobs",
                  {"n", "samples", "max_period", "family_max", "levels", "max_n", "word_length", "tolerance",
                   "discrepancy_tolerance", "delta_fractions", "deltas", "delta_cap", "min_gap", "random_vectors",
                   "max_order", "kingman_n", "kingman_m", "kingman_samples", "kingman_min_drop", "closing_samples",
                   "closing_level"});
    auto positive_int = [&](const char* key, auto& target) {
      if (const auto* n = kt->get(key)) {
        const auto v = rd.integer(n, std::string("knobs.") + key);
        if (v < 1) rd.fail(n, std::string("knobs.") + key, "must be >= 1");
        target = static_cast<std::remove_reference_t<decltype(target)>>(v);
      }
    };
    auto positive_number = [&](const char* key, double& target) {
      if (const auto* n = kt->get(key)) {
        const double v = rd.number(n, std::string("knobs.") + key);
        if (!(v > 0.0)) rd.fail(n, std::string("knobs.") + key, "must be positive");
        target = v;
      }
    };
    positive_int("n", kn.n);
    positive_int("samples", kn.samples);
    positive_int("max_period", kn.max_period);
    positive_int("family_max", kn.family_max);
    positive_int("max_n", kn.max_n);
    positive_int("word_length", kn.word_length);
    positive_int("random_vectors", kn.random_vectors);
    positive_int("max_order", kn.max_order);
    positive_int("kingman_samples", kn.kingman_samples);
    positive_int("closing_samples", kn.closing_samples);
    positive_int("closing_level", kn.closing_level);
    positive_number("tolerance", kn.tolerance);
    positive_number("discrepancy_tolerance", kn.discrepancy_tolerance);
    positive_number("delta_cap", kn.delta_cap);
    positive_number("min_gap", kn.min_gap);
    if (const auto* n = kt->get("kingman_min_drop")) kn.kingman_min_drop = rd.number(n, "knobs.kingman_min_drop");
    if (const auto* n = kt->get("levels")) {
      kn.levels.clear();
      for (auto v : rd.integers(n, "knobs.levels")) {
        if (v < 1) rd.fail(n, "knobs.levels", "levels must be >= 1");
        kn.levels.push_back(static_cast<int>(v));
      }
      if (kn.levels.empty()) rd.fail(n, "knobs.levels", "need at least one level");
    }
    if (const auto* n = kt->get("delta_fractions")) {
      kn.delta_fractions = rd.numbers(n, "knobs.delta_fractions");
      for (double f : kn.delta_fractions)
        if (!(f > 0.0 && f < 1.0)) rd.fail(n, "knobs.delta_fractions", "fractions must lie in (0,1)");
    }
    if (const auto* n = kt->get("deltas")) {
      kn.deltas = rd.numbers(n, "knobs.deltas");
      for (double f : kn.deltas)
        if (!(f > 0.0)) rd.fail(n, "knobs.deltas", "deltas must be positive");
    }
    if (const auto* n = kt->get("kingman_n")) {
      kn.kingman_n = rd.integers(n, "knobs.kingman_n");
      for (auto v : kn.kingman_n)
        if (v < 1) rd.fail(n, "knobs.kingman_n", "entries must be >= 1");
    }
    if (const auto* n = kt->get("kingman_m")) {
      if (n->is_string()) {
        if (rd.string(n, "knobs.kingman_m") != "n") rd.fail(n, "knobs.kingman_m", "expected a number or \"n\"");
      } else {
        const double v = rd.number(n, "knobs.kingman_m");
        if (!(v > 0.0)) rd.fail(n, "knobs.kingman_m", "must be positive");
        kn.kingman_m = v;
      }
    }
  }
  if (kn.max_period > 24) throw ConfigError(source_name + ": field knobs.max_period", "above the enumeration budget");

  // output
  if (const auto* ot = rd.subtable(root, "output", "output")) {
    rd.check_keys(*ot, "output", {"dir", "format"});
    cfg.out_dir = rd.opt_string(*ot, "dir", "output.dir").value_or(cfg.out_dir);
    cfg.format = rd.opt_string(*ot, "format", "output.format").value_or("json");
  }
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  if (overrides.format) cfg.format = *overrides.format;
  if (cfg.format != "json" && cfg.format != "csv")
    throw ConfigError(source_name + ": field output.format", "format must be csv or json");

  ordered_json& e = cfg.echo;
  e["kind"] = to_string(cfg.kind);
  e["seed"] = cfg.seed;
  e["workers"] = cfg.workers;
  e["subshift"] = {{"alphabet", alphabet}, {"theta", cfg.space.theta()}, {"transitions", rows}};
  e["cocycle"] = cocycle_echo;
  e["measure"] = measure_echo;
  ordered_json k;
  k["n"] = kn.n;
  k["samples"] = kn.samples;
  k["max_period"] = kn.max_period;
  k["family_max"] = kn.family_max;
  k["levels"] = kn.levels;
  k["max_n"] = kn.max_n;
  k["word_length"] = kn.word_length;
  k["tolerance"] = kn.tolerance;
  k["discrepancy_tolerance"] = kn.discrepancy_tolerance;
  k["delta_fractions"] = kn.delta_fractions;
  k["deltas"] = kn.deltas;
  k["delta_cap"] = kn.delta_cap;
  k["min_gap"] = kn.min_gap;
  k["random_vectors"] = kn.random_vectors;
  k["max_order"] = kn.max_order;
  k["kingman_n"] = kn.kingman_n;
  if (kn.kingman_m)
    k["kingman_m"] = *kn.kingman_m;
  else
    k["kingman_m"] = "n";
  k["kingman_samples"] = kn.kingman_samples;
  k["kingman_min_drop"] = kn.kingman_min_drop;
  k["closing_samples"] = kn.closing_samples;
  k["closing_level"] = kn.closing_level;
  e["knobs"] = k;
  e["output"] = {{"dir", cfg.out_dir}, {"format", cfg.format}};
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path, overrides);
}

}  // namespace lyaplab
