#include "gshape/run_config.hpp"

#include "gshape/generators.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace gshape {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class SectionReader {
 public:
  SectionReader(Section& section, std::string name) : section_(section), name_(std::move(name)) {}

  template <typename F>
  void take(const std::string& key, F&& assign) {
    auto it = section_.find(key);
    if (it == section_.end()) return;
    try {
      assign(it->second.value);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(it->second.line, "[" + name_ + "] " + key + ": " + e.what());
    }
    section_.erase(it);
  }

  void finish() const {
    if (!section_.empty()) {
      const auto& [key, entry] = *section_.begin();
      throw ParseError(entry.line, "unknown key '" + key + "' in [" + name_ + "]");
    }
  }

 private:
  Section& section_;
  std::string name_;
};

template <typename T>
T to_integer(const std::string& s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) throw Error("expected an integer");
  return v;
}

double to_double(const std::string& s) {
  auto v = parse_double(s);
  if (!v) throw Error("expected a number");
  return *v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error("expected true or false");
}

LabeledConstellation base_constellation(const ConstellationSource& s) {
  const std::string& g = s.generator;
  auto wrap = [](Labeled l) { return LabeledConstellation{std::move(l.constellation), std::move(l.labeling)}; };
  if (g == "random") {
    Constellation c = random_constellation(s.num_points, s.dims, s.seed);
    std::optional<BitLabeling> lab;
    if (s.num_points > 1 && (s.num_points & (s.num_points - 1)) == 0) lab = natural_labeling(s.num_points);
    return {std::move(c), std::move(lab)};
  }
  if (g == "bpsk" || g == "qpsk") return wrap(cartesian_bpsk(s.dims));
  if (g == "qam") return wrap(qam(s.num_points));
  if (g == "apsk") return wrap(apsk_two_ring(s.ring_inner, s.ring_outer, s.radius_ratio, s.phase_offset));
  if (g == "sp12") return wrap(sp_bpsk_12d());
  if (g == "file") {
    if (s.path.empty()) throw Error("generator 'file' needs a path");
    return load_constellation(s.path);
  }
  throw Error("unknown generator '" + g + "'");
}

}  // namespace

LabeledConstellation make_constellation(const ConstellationSource& source) {
  if (source.repeat < 1) throw Error("repeat must be >= 1");
  LabeledConstellation base = base_constellation(source);
  if (source.repeat == 1) return base;
  if (!base.labeling) throw Error("repeat needs a labeled constellation");
  const Labeled unit{base.constellation, *base.labeling};
  Labeled acc = unit;
  for (int r = 1; r < source.repeat; ++r) acc = cartesian_product(acc, unit);
  return {std::move(acc.constellation), std::move(acc.labeling)};
}

RunConfig parse_run_config(std::istream& is) {
  static const std::set<std::string> kSections = {"constellation", "channel", "metric", "optimizer", "output"};
  std::map<std::string, Section> sections;
  std::string current;
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(lineno, "malformed section header");
      current = trim(line.substr(1, line.size() - 2));
      if (!kSections.count(current)) throw ParseError(lineno, "unknown section [" + current + "]");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value'");
    if (current.empty()) throw ParseError(lineno, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(lineno, "empty key");
    auto& section = sections[current];
    if (section.count(key)) throw ParseError(lineno, "duplicate key '" + key + "'");
    section[key] = Entry{value, lineno};
  }

  RunConfig cfg;
  {
    SectionReader r(sections["constellation"], "constellation");
    auto& c = cfg.constellation;
    r.take("generator", [&](const std::string& v) { c.generator = v; });
    r.take("M", [&](const std::string& v) { c.num_points = to_integer<int>(v); });
    r.take("N", [&](const std::string& v) { c.dims = to_integer<int>(v); });
    r.take("seed", [&](const std::string& v) { c.seed = to_integer<std::uint64_t>(v); });
    r.take("ring_inner", [&](const std::string& v) { c.ring_inner = to_integer<int>(v); });
    r.take("ring_outer", [&](const std::string& v) { c.ring_outer = to_integer<int>(v); });
    r.take("radius_ratio", [&](const std::string& v) { c.radius_ratio = to_double(v); });
    r.take("phase_offset", [&](const std::string& v) { c.phase_offset = to_double(v); });
    r.take("path", [&](const std::string& v) { c.path = v; });
    r.take("repeat", [&](const std::string& v) { c.repeat = to_integer<int>(v); });
    r.finish();
  }
  {
    SectionReader r(sections["channel"], "channel");
    r.take("snr_db", [&](const std::string& v) { cfg.snr_db = to_double(v); });
    r.finish();
  }
  {
    SectionReader r(sections["metric"], "metric");
    r.take("metric", [&](const std::string& v) { cfg.metric = parse_metric(v); });
    r.finish();
  }
  {
    SectionReader r(sections["optimizer"], "optimizer");
    auto& o = cfg.optimizer;
    r.take("iterations", [&](const std::string& v) { o.iterations = to_integer<int>(v); });
    r.take("learning_rate", [&](const std::string& v) { o.learning_rate = to_double(v); });
    r.take("lr_decay", [&](const std::string& v) { o.lr_decay = to_double(v); });
    r.take("beta1", [&](const std::string& v) { o.beta1 = to_double(v); });
    r.take("beta2", [&](const std::string& v) { o.beta2 = to_double(v); });
    r.take("epsilon", [&](const std::string& v) { o.epsilon = to_double(v); });
    r.take("quadrature_count", [&](const std::string& v) { o.quadrature_count = to_integer<int>(v); });
    r.take("redraw_nodes", [&](const std::string& v) { o.redraw_nodes = to_bool(v); });
    r.take("seed", [&](const std::string& v) { o.seed = to_integer<std::uint64_t>(v); });
    r.take("eval_every", [&](const std::string& v) { o.eval_every = to_integer<int>(v); });
    r.take("reference_eval", [&](const std::string& v) {
      if (v == "auto") {
        o.reference_eval.reset();
      } else {
        o.reference_eval = EstimatorSpec::parse(v);
        if (o.reference_eval->kind == EstimatorKind::RandomisedQuadrature) throw Error("must be auto, gh:n or mc:...");
      }
    });
    r.finish();
  }
  {
    SectionReader r(sections["output"], "output");
    r.take("directory", [&](const std::string& v) { cfg.output.directory = v; });
    r.take("trace", [&](const std::string& v) { cfg.output.write_trace = to_bool(v); });
    r.finish();
  }
  effective_optimizer_config(cfg).check();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  return parse_run_config(is);
}

OptimizerConfig effective_optimizer_config(const RunConfig& config) {
  OptimizerConfig o = config.optimizer;
  o.metric = config.metric;
  o.snr_db = config.snr_db;
  return o;
}

void write_run_config(std::ostream& os, const RunConfig& config) {
  const auto& c = config.constellation;
  const auto& o = config.optimizer;
  os << "# " << kVersion << "\n";
  os << "[constellation]\n";
  os << "generator = " << c.generator << '\n';
  os << "M = " << c.num_points << '\n';
  os << "N = " << c.dims << '\n';
  os << "seed = " << c.seed << '\n';
  os << "ring_inner = " << c.ring_inner << '\n';
  os << "ring_outer = " << c.ring_outer << '\n';
  os << "radius_ratio = " << format_double(c.radius_ratio) << '\n';
  os << "phase_offset = " << format_double(c.phase_offset) << '\n';
  os << "path = " << c.path << '\n';
  os << "repeat = " << c.repeat << '\n';
  os << "\n[channel]\n";
  os << "snr_db = " << format_double(config.snr_db) << '\n';
  os << "\n[metric]\n";
  os << "metric = " << metric_name(config.metric) << '\n';
  os << "\n[optimizer]\n";
  os << "iterations = " << o.iterations << '\n';
  os << "learning_rate = " << format_double(o.learning_rate) << '\n';
  os << "lr_decay = " << format_double(o.lr_decay) << '\n';
  os << "beta1 = " << format_double(o.beta1) << '\n';
  os << "beta2 = " << format_double(o.beta2) << '\n';
  os << "epsilon = " << format_double(o.epsilon) << '\n';
  os << "quadrature_count = " << o.quadrature_count << '\n';
  os << "redraw_nodes = " << (o.redraw_nodes ? "true" : "false") << '\n';
  os << "seed = " << o.seed << '\n';
  os << "eval_every = " << o.eval_every << '\n';
  os << "reference_eval = " << (o.reference_eval ? o.reference_eval->to_string() : std::string("auto")) << '\n';
  os << "\n[output]\n";
  os << "directory = " << config.output.directory << '\n';
  os << "trace = " << (config.output.write_trace ? "true" : "false") << '\n';
}

}  // namespace gshape
