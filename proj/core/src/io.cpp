#include "linsys/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace linsys {

namespace {

using nlohmann::json;

std::string with_position(const std::string& msg, std::size_t line, std::size_t column) {
  if (line == 0) return msg;
  std::ostringstream os;
  os << msg << " (line " << line << ", column " << column << ")";
  return os.str();
}

std::pair<std::size_t, std::size_t> locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = locate(text, e.byte > 0 ? e.byte - 1 : 0);
    throw io_error("malformed JSON", line, col);
  }
}

const json& need(const json& j, const char* key) {
  if (!j.is_object()) throw io_error("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw io_error(std::string("missing field \"") + key + "\"");
  return *it;
}

double as_number(const json& j, const char* what) {
  if (!j.is_number()) throw io_error(std::string(what) + " must be a number");
  return j.get<double>();
}

Index as_index(const json& j, const char* what) {
  if (!j.is_number_integer()) throw io_error(std::string(what) + " must be an integer");
  return static_cast<Index>(j.get<long long>());
}

bool as_bool(const json& j, const char* what) {
  if (!j.is_boolean()) throw io_error(std::string(what) + " must be a boolean");
  return j.get<bool>();
}

Vector vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw io_error(std::string(what) + " must be an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = as_number(j[static_cast<std::size_t>(i)], what);
  return v;
}

json vector_to_json(const Vector& v) {
  json j = json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw io_error(std::string(what) + " must be a nonempty array of rows");
  const auto& first = j[0];
  if (!first.is_array() || first.empty())
    throw io_error(std::string(what) + " rows must be nonempty arrays of numbers");
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(first.size()));
  for (Index r = 0; r < m.rows(); ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != m.cols())
      throw io_error(std::string(what) + " rows must all have the same length");
    for (Index c = 0; c < m.cols(); ++c)
      m(r, c) = as_number(row[static_cast<std::size_t>(c)], what);
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json j = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(std::move(row));
  }
  return j;
}

FeatureRef ref_from_json(const json& j) {
  if (j.is_string()) return FeatureRef(j.get<std::string>());
  if (j.is_number_integer()) return FeatureRef(static_cast<Index>(j.get<long long>()));
  throw io_error("feature reference must be a name or a 0-based column index");
}

json ref_to_json(const FeatureRef& f) {
  if (!f.name.empty()) return json(f.name);
  return json(static_cast<long long>(f.index));
}

EntrySpec entry_from_json(const json& j) {
  if (j.is_number()) return EntrySpec::constant(j.get<double>());  // shorthand
  if (!j.is_object()) throw io_error("entry must be a number or an object with a kind");
  const auto& kj = need(j, "kind");
  if (!kj.is_string()) throw io_error("entry kind must be a string");
  const std::string kind = kj.get<std::string>();
  if (kind == "constant") return EntrySpec::constant(as_number(need(j, "value"), "value"));
  if (kind == "mean") return EntrySpec::mean(ref_from_json(need(j, "feature")));
  if (kind == "smooth") {
    const auto& src = need(j, "expr");
    if (!src.is_string()) throw io_error("smooth expr must be a string");
    std::vector<FeatureRef> feats;
    if (j.contains("features")) {
      const auto& fj = j.at("features");
      if (!fj.is_array()) throw io_error("smooth features must be an array");
      for (const auto& f : fj) feats.push_back(ref_from_json(f));
    }
    try {
      return EntrySpec::smooth(src.get<std::string>(), std::move(feats));
    } catch (const std::invalid_argument& e) {
      throw io_error(e.what());
    }
  }
  throw io_error("entry kind must be constant, mean, or smooth");
}

json entry_to_json(const EntrySpec& e) {
  switch (e.kind) {
    case EntrySpec::Kind::Constant:
      return json{{"kind", "constant"}, {"value", e.value}};
    case EntrySpec::Kind::Mean:
      return json{{"kind", "mean"}, {"feature", ref_to_json(e.features.at(0))}};
    case EntrySpec::Kind::Smooth: {
      json feats = json::array();
      for (const auto& f : e.features) feats.push_back(ref_to_json(f));
      return json{{"kind", "smooth"}, {"expr", e.expr.source()}, {"features", std::move(feats)}};
    }
  }
  throw io_error("entry with unknown kind");
}

std::vector<std::vector<EntrySpec>> grid_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw io_error(std::string(what) + " must be an array of rows");
  std::vector<std::vector<EntrySpec>> grid;
  grid.reserve(j.size());
  for (const auto& row : j) {
    if (!row.is_array()) throw io_error(std::string(what) + " rows must be arrays");
    std::vector<EntrySpec> out;
    out.reserve(row.size());
    for (const auto& cell : row) out.push_back(entry_from_json(cell));
    grid.push_back(std::move(out));
  }
  return grid;
}

json grid_to_json(const std::vector<std::vector<EntrySpec>>& grid) {
  json j = json::array();
  for (const auto& row : grid) {
    json r = json::array();
    for (const auto& cell : row) r.push_back(entry_to_json(cell));
    j.push_back(std::move(r));
  }
  return j;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

double field_number(const std::string& s, std::size_t line, std::size_t column) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw io_error("bad numeric field \"" + s + "\"", line, column);
  return v;
}

Index field_count(const std::string& s, std::size_t line, std::size_t column) {
  const double v = field_number(s, line, column);
  const auto k = static_cast<long long>(std::llround(v));
  if (std::abs(v - static_cast<double>(k)) > 1e-9 || k < 0)
    throw io_error("expected a nonnegative integer, got \"" + s + "\"", line, column);
  return static_cast<Index>(k);
}

}  // namespace

io_error::io_error(const std::string& msg, std::size_t line, std::size_t column)
    : std::runtime_error(with_position(msg, line, column)), line_(line), column_(column) {}

Triple parse_triple_json(const std::string& text) {
  const json j = parse_json(text);
  Triple t;
  if (j.is_object() && j.contains("a0") && !j.at("a0").is_null())
    t.a0 = matrix_from_json(j.at("a0"), "a0");
  t.a1 = matrix_from_json(need(j, "a1"), "a1");
  t.beta = vector_from_json(need(j, "beta"), "beta");
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw io_error(e.what());
  }
  return t;
}

std::string triple_to_json(const Triple& t) {
  json j;
  j["a0"] = t.a0 ? matrix_to_json(*t.a0) : json(nullptr);
  j["a1"] = matrix_to_json(t.a1);
  j["beta"] = vector_to_json(t.beta);
  return j.dump(2) + "\n";
}

MomentModel parse_model_json(const std::string& text) {
  const json j = parse_json(text);
  MomentModel m;
  m.p = as_index(need(j, "p"), "p");
  m.d0 = as_index(need(j, "d0"), "d0");
  m.d1 = as_index(need(j, "d1"), "d1");
  if (j.contains("null_value") && !j.at("null_value").is_null())
    m.null_value = as_number(j.at("null_value"), "null_value");
  if (j.contains("a0") && !j.at("a0").is_null()) m.a0_entries = grid_from_json(j.at("a0"), "a0");
  m.b_entries = grid_from_json(need(j, "b"), "b");
  if (j.contains("deterministic_columns") && !j.at("deterministic_columns").is_null()) {
    const auto& dj = j.at("deterministic_columns");
    if (!dj.is_array()) throw io_error("deterministic_columns must be an array");
    std::vector<Index> cols;
    for (const auto& c : dj) {
      const Index one_based = as_index(c, "deterministic column");
      if (one_based < 1) throw io_error("deterministic columns are 1-based");
      cols.push_back(one_based - 1);
    }
    m.deterministic_override = std::move(cols);
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw io_error(e.what());
  }
  return m;
}

std::string model_to_json(const MomentModel& m) {
  json j;
  j["p"] = static_cast<long long>(m.p);
  j["d0"] = static_cast<long long>(m.d0);
  j["d1"] = static_cast<long long>(m.d1);
  j["null_value"] = m.null_value;
  if (!m.a0_entries.empty()) j["a0"] = grid_to_json(m.a0_entries);
  j["b"] = grid_to_json(m.b_entries);
  if (m.deterministic_override) {
    json cols = json::array();
    for (Index c : *m.deterministic_override) cols.push_back(static_cast<long long>(c + 1));
    j["deterministic_columns"] = std::move(cols);
  }
  return j.dump(2) + "\n";
}

std::string report_to_json(const MembershipReport& r) {
  json j;
  j["in_c0"] = r.in_c0;
  j["in_cbar0"] = r.in_cbar0;
  j["in_crd"] = r.in_crd;
  j["in_closure"] = r.in_closure;
  j["lp_value"] = r.lp_value;
  j["near_boundary"] = r.near_boundary;
  j["witness"] = r.witness ? vector_to_json(*r.witness) : json(nullptr);
  return j.dump(2) + "\n";
}

TestOutcome parse_outcome_json(const std::string& text) {
  const json j = parse_json(text);
  TestOutcome o;
  o.t_n = as_number(need(j, "t_stat"), "t_stat");
  o.p_value = as_number(need(j, "p_value"), "p_value");
  o.reject = as_bool(need(j, "reject"), "reject");
  o.alpha = as_number(need(j, "alpha"), "alpha");
  o.y_hat = vector_from_json(need(j, "y_hat"), "y_hat");
  o.direction_feasible = as_bool(need(j, "direction_feasible"), "direction_feasible");
  const auto& am = need(j, "argmin_j");
  o.argmin_j = am.is_null() ? -1 : as_index(am, "argmin_j") - 1;
  o.sigma_values = vector_from_json(need(j, "sigma_values"), "sigma_values");
  o.truncation_hits = as_index(need(j, "truncation_hits"), "truncation_hits");
  o.rank_gate_triggered = as_bool(need(j, "rank_gate_triggered"), "rank_gate_triggered");
  o.t_star = as_number(need(j, "t_star"), "t_star");
  o.weights = vector_from_json(need(j, "weights"), "weights");
  for (const auto& c : need(j, "j_star_set"))
    o.j_star_set.push_back(as_index(c, "j_star_set") - 1);
  o.n = as_index(need(j, "n"), "n");
  o.n1 = as_index(need(j, "n1"), "n1");
  o.n2 = as_index(need(j, "n2"), "n2");
  o.splits_used = as_index(need(j, "splits"), "splits");
  for (const auto& p : need(j, "split_pvalues"))
    o.split_pvalues.push_back(as_number(p, "split_pvalues"));
  return o;
}

std::string outcome_to_json(const TestOutcome& o) {
  json j;
  j["t_stat"] = o.t_n;
  j["p_value"] = o.p_value;
  j["reject"] = o.reject;
  j["alpha"] = o.alpha;
  j["y_hat"] = vector_to_json(o.y_hat);
  j["direction_feasible"] = o.direction_feasible;
  j["argmin_j"] = o.argmin_j < 0 ? json(nullptr) : json(static_cast<long long>(o.argmin_j + 1));
  j["sigma_values"] = vector_to_json(o.sigma_values);
  j["truncation_hits"] = static_cast<long long>(o.truncation_hits);
  j["rank_gate_triggered"] = o.rank_gate_triggered;
  j["t_star"] = o.t_star;
  j["weights"] = vector_to_json(o.weights);
  json js = json::array();
  for (Index c : o.j_star_set) js.push_back(static_cast<long long>(c + 1));
  j["j_star_set"] = std::move(js);
  j["n"] = static_cast<long long>(o.n);
  j["n1"] = static_cast<long long>(o.n1);
  j["n2"] = static_cast<long long>(o.n2);
  j["splits"] = static_cast<long long>(o.splits_used);
  j["split_pvalues"] = json(o.split_pvalues);
  return j.dump(2) + "\n";
}

std::string outcome_to_csv(const TestOutcome& o) {
  std::ostringstream os;
  os << "t_stat,p_value,reject,alpha,argmin_j,rank_gated,truncation_hits,n,n1,n2,splits\n";
  os << fmt(o.t_n) << ',' << fmt(o.p_value) << ',' << int(o.reject) << ',' << fmt(o.alpha)
     << ',' << (o.argmin_j < 0 ? 0 : o.argmin_j + 1) << ',' << int(o.rank_gate_triggered)
     << ',' << o.truncation_hits << ',' << o.n << ',' << o.n1 << ',' << o.n2 << ','
     << o.splits_used << '\n';
  return os.str();
}

ConfidenceSet parse_confidence_json(const std::string& text) {
  const json j = parse_json(text);
  ConfidenceSet c;
  c.alpha = as_number(need(j, "alpha"), "alpha");
  for (const auto& g : need(j, "grid")) c.grid.push_back(as_number(g, "grid"));
  for (const auto& p : need(j, "p_values")) c.p_values.push_back(as_number(p, "p_values"));
  for (const auto& a : need(j, "accepted")) c.accepted.push_back(as_bool(a, "accepted"));
  const auto& hull = need(j, "hull");
  if (!hull.is_null()) {
    if (!hull.is_array() || hull.size() != 2) throw io_error("hull must be null or [lo, hi]");
    c.interval_hull = {as_number(hull[0], "hull"), as_number(hull[1], "hull")};
  }
  if (c.grid.size() != c.p_values.size() || c.grid.size() != c.accepted.size())
    throw io_error("grid, p_values, accepted must have equal lengths");
  return c;
}

std::string confidence_to_json(const ConfidenceSet& c) {
  json j;
  j["alpha"] = c.alpha;
  j["grid"] = json(c.grid);
  j["p_values"] = json(c.p_values);
  json acc = json::array();
  for (bool b : c.accepted) acc.push_back(b);
  j["accepted"] = std::move(acc);
  j["hull"] = c.interval_hull
                  ? json::array({c.interval_hull->first, c.interval_hull->second})
                  : json(nullptr);
  return j.dump(2) + "\n";
}

ConfidenceSet parse_confidence_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "value,p_value,accepted,alpha,hull_lo,hull_hi")
    throw io_error("bad confidence-set CSV header", 1, 1);
  ConfidenceSet c;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    if (f.size() != 6) throw io_error("expected 6 fields", i + 1, 1);
    c.grid.push_back(field_number(f[0], i + 1, 1));
    c.p_values.push_back(field_number(f[1], i + 1, 2));
    c.accepted.push_back(field_count(f[2], i + 1, 3) != 0);
    const double alpha = field_number(f[3], i + 1, 4);
    if (i == 1) {
      c.alpha = alpha;
      if (!f[4].empty() != !f[5].empty())
        throw io_error("hull_lo and hull_hi must both be set or both empty", i + 1, 5);
      if (!f[4].empty())
        c.interval_hull = {field_number(f[4], i + 1, 5), field_number(f[5], i + 1, 6)};
    }
  }
  return c;
}

std::string confidence_to_csv(const ConfidenceSet& c) {
  std::ostringstream os;
  os << "value,p_value,accepted,alpha,hull_lo,hull_hi\n";
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    os << fmt(c.grid[i]) << ',' << fmt(c.p_values[i]) << ',' << int(bool(c.accepted[i]))
       << ',' << fmt(c.alpha) << ',';
    if (c.interval_hull) os << fmt(c.interval_hull->first);
    os << ',';
    if (c.interval_hull) os << fmt(c.interval_hull->second);
    os << '\n';
  }
  return os.str();
}

Dataset parse_dataset_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw io_error("empty CSV", 1, 1);
  Dataset d;
  d.feature_names = split_fields(lines[0]);
  const Index cols = static_cast<Index>(d.feature_names.size());
  if (lines.size() < 2) throw io_error("CSV has a header but no data rows", 1, 1);
  d.values.resize(static_cast<Index>(lines.size()) - 1, cols);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    if (static_cast<Index>(f.size()) != cols)
      throw io_error("row has " + std::to_string(f.size()) + " fields, header has " +
                         std::to_string(cols),
                     i + 1, 1);
    for (Index c = 0; c < cols; ++c)
      d.values(static_cast<Index>(i) - 1, c) =
          field_number(f[static_cast<std::size_t>(c)], i + 1, static_cast<std::size_t>(c) + 1);
  }
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw io_error(e.what());
  }
  return d;
}

std::string dataset_to_csv(const Dataset& d) {
  std::ostringstream os;
  for (std::size_t i = 0; i < d.feature_names.size(); ++i) {
    if (i) os << ',';
    os << d.feature_names[i];
  }
  os << '\n';
  for (Index r = 0; r < d.values.rows(); ++r) {
    for (Index c = 0; c < d.values.cols(); ++c) {
      if (c) os << ',';
      os << fmt(d.values(r, c));
    }
    os << '\n';
  }
  return os.str();
}

RejectionCurve parse_curve_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty() ||
      lines[0] != "value,reject_direct,se_direct,reject_screening,se_screening,reps,n")
    throw io_error("bad rejection-curve CSV header", 1, 1);
  RejectionCurve c;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    if (f.size() != 7) throw io_error("expected 7 fields", i + 1, 1);
    c.grid.push_back(field_number(f[0], i + 1, 1));
    c.reject_direct.push_back(field_number(f[1], i + 1, 2));
    c.se_direct.push_back(field_number(f[2], i + 1, 3));
    c.reject_screening.push_back(field_number(f[3], i + 1, 4));
    c.se_screening.push_back(field_number(f[4], i + 1, 5));
    const Index reps = field_count(f[5], i + 1, 6);
    const Index n = field_count(f[6], i + 1, 7);
    if (i == 1) {
      c.reps = reps;
      c.n = n;
    } else if (reps != c.reps || n != c.n) {
      throw io_error("reps/n differ across rows", i + 1, 6);
    }
  }
  return c;
}

std::string curve_to_csv(const RejectionCurve& c) {
  std::ostringstream os;
  os << "value,reject_direct,se_direct,reject_screening,se_screening,reps,n\n";
  for (std::size_t i = 0; i < c.grid.size(); ++i)
    os << fmt(c.grid[i]) << ',' << fmt(c.reject_direct[i]) << ',' << fmt(c.se_direct[i])
       << ',' << fmt(c.reject_screening[i]) << ',' << fmt(c.se_screening[i]) << ','
       << c.reps << ',' << c.n << '\n';
  return os.str();
}

std::string curve_to_svg(const RejectionCurve& c,
                         std::optional<std::pair<double, double>> band) {
  require(!c.grid.empty(), "curve_to_svg: empty curve");
  const double w = 640, h = 440, ml = 70, mr = 20, mt = 20, mb = 50;
  const double x0 = c.grid.front(), x1 = c.grid.back();
  const double span = x1 > x0 ? x1 - x0 : 1.0;
  const auto sx = [&](double v) { return ml + (v - x0) / span * (w - ml - mr); };
  const auto sy = [&](double f) { return mt + (1.0 - f) * (h - mt - mb); };
  const auto pt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  if (band) {
    const double lo = std::max(band->first, x0), hi = std::min(band->second, x1);
    if (hi > lo)
      os << "  <rect x=\"" << pt(sx(lo)) << "\" y=\"" << pt(sy(1.0)) << "\" width=\""
         << pt(sx(hi) - sx(lo)) << "\" height=\"" << pt(sy(0.0) - sy(1.0))
         << "\" fill=\"#cccccc\" fill-opacity=\"0.45\"/>\n";
  }
  os << "  <line x1=\"" << pt(ml) << "\" y1=\"" << pt(sy(0.0)) << "\" x2=\"" << pt(w - mr)
     << "\" y2=\"" << pt(sy(0.0)) << "\" stroke=\"black\"/>\n";
  os << "  <line x1=\"" << pt(ml) << "\" y1=\"" << pt(sy(0.0)) << "\" x2=\"" << pt(ml)
     << "\" y2=\"" << pt(sy(1.0)) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    os << "  <line x1=\"" << pt(ml - 5) << "\" y1=\"" << pt(sy(f)) << "\" x2=\"" << pt(ml)
       << "\" y2=\"" << pt(sy(f)) << "\" stroke=\"black\"/>\n";
    os << "  <text x=\"" << pt(ml - 9) << "\" y=\"" << pt(sy(f) + 4)
       << "\" text-anchor=\"end\" font-size=\"12\">" << fmt(f) << "</text>\n";
    const double v = x0 + f * span;
    os << "  <line x1=\"" << pt(sx(v)) << "\" y1=\"" << pt(sy(0.0)) << "\" x2=\""
       << pt(sx(v)) << "\" y2=\"" << pt(sy(0.0) + 5) << "\" stroke=\"black\"/>\n";
    char lab[32];
    std::snprintf(lab, sizeof lab, "%.4g", v);
    os << "  <text x=\"" << pt(sx(v)) << "\" y=\"" << pt(sy(0.0) + 20)
       << "\" text-anchor=\"middle\" font-size=\"12\">" << lab << "</text>\n";
  }
  const auto polyline = [&](const std::vector<double>& f, const char* extra) {
    os << "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"" << extra
       << " points=\"";
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      if (i) os << ' ';
      os << pt(sx(c.grid[i])) << ',' << pt(sy(f[i]));
    }
    os << "\"/>\n";
  };
  polyline(c.reject_direct, "");
  polyline(c.reject_screening, " stroke-dasharray=\"6 4\"");
  os << "  <text x=\"" << pt(w - mr) << "\" y=\"" << pt(mt + 12)
     << "\" text-anchor=\"end\" font-size=\"12\">solid: direct, dashed: screening</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::vector<double> parse_grid(const std::string& text) {
  const auto first = text.find(':');
  if (first == std::string::npos) return {field_number(text, 1, 1)};
  const auto second = text.find(':', first + 1);
  if (second == std::string::npos || text.find(':', second + 1) != std::string::npos)
    throw io_error("grid must be \"lo:hi:step\" or a single number");
  const double lo = field_number(text.substr(0, first), 1, 1);
  const double hi = field_number(text.substr(first + 1, second - first - 1), 1, 2);
  const double step = field_number(text.substr(second + 1), 1, 3);
  if (!(step > 0)) throw io_error("grid step must be positive");
  if (hi < lo - 1e-12) throw io_error("grid upper bound below lower bound");
  const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (count > 1000000) throw io_error("grid too fine (over 1e6 points)");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw io_error("read failure: " + path);
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write file: " + path);
  out << text;
  out.flush();
  if (!out) throw io_error("write failure: " + path);
}

}  // namespace linsys
