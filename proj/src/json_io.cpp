#include "fibenv/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fibenv/errors.hpp"

namespace fibenv {

namespace {

Json measure_weights_to_json(const WeightedMeasure& mu) {
  Json w = Json::object();
  for (const auto& [x, v] : mu.weights()) w[x] = v;
  return w;
}

std::map<PointId, double> weights_from_json(const Json& w) {
  std::map<PointId, double> out;
  for (auto it = w.begin(); it != w.end(); ++it) {
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

}  // namespace

Json system_to_json(const FiberedSystem& sys) {
  Json doc;
  const FiniteSpace& x = sys.map().source();
  doc["points"] = x.points();
  doc["infinity"] = x.infinity_point() ? Json(*x.infinity_point()) : Json(nullptr);
  Json m = Json::object();
  for (const auto& [a, b] : sys.map().assignment()) m[a] = b;
  doc["map"] = m;
  doc["weights"] = measure_weights_to_json(sys.measure_upstairs());
  return doc;
}

FiberedSystem system_from_json(const Json& doc) {
  try {
    std::vector<PointId> points = doc.at("points").get<std::vector<PointId>>();
    std::optional<PointId> inf;
    if (doc.contains("infinity") && !doc.at("infinity").is_null()) {
      inf = doc.at("infinity").get<PointId>();
    }
    FiniteSpace source(points, inf);

    std::map<PointId, PointId> assign;
    for (auto it = doc.at("map").begin(); it != doc.at("map").end(); ++it) {
      assign[it.key()] = it.value().get<PointId>();
    }
    // Target points in first-appearance order over the source point list.
    std::vector<PointId> targets;
    for (const auto& x : points) {
      auto it = assign.find(x);
      if (it == assign.end()) {
        throw ConfigError("map misses source point '" + x + "'");
      }
      if (std::find(targets.begin(), targets.end(), it->second) == targets.end()) {
        targets.push_back(it->second);
      }
    }
    std::optional<PointId> target_inf;
    if (inf) target_inf = assign.at(*inf);
    FiniteSpace target(targets, target_inf);
    FiberedMap map(source, target, std::move(assign));
    WeightedMeasure mu(source, weights_from_json(doc.at("weights")));
    return FiberedSystem(map, mu);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad space document: ") + e.what());
  }
}

Json function_to_json(const SampledFunction& f, const Json& space_ref) {
  Json doc;
  doc["space"] = space_ref;
  Json vals = Json::object();
  for (std::size_t i = 0; i < f.size(); ++i) {
    Complex v = f.at_index(i);
    vals[f.space().point_at(i)] = Json::array({v.real(), v.imag()});
  }
  doc["values"] = vals;
  return doc;
}

SampledFunction function_from_json(const Json& doc, const FiniteSpace& space) {
  try {
    const Json& vals = doc.contains("values") ? doc.at("values") : doc;
    std::vector<Complex> values(space.size(), Complex(0.0));
    for (auto it = vals.begin(); it != vals.end(); ++it) {
      if (!space.has_point(it.key())) {
        throw ConfigError("function value at unknown point '" + it.key() + "'");
      }
      Complex v;
      if (it.value().is_array()) {
        v = Complex(it.value().at(0).get<double>(),
                    it.value().size() > 1 ? it.value().at(1).get<double>() : 0.0);
      } else {
        v = Complex(it.value().get<double>());
      }
      values[space.index_of(it.key())] = v;
    }
    return SampledFunction(space, std::move(values));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad function document: ") + e.what());
  }
}

Json module_to_json(const PullbackModule& module) {
  Json doc;
  Json ag = Json::array();
  for (const auto& g : module.algebra().generators()) {
    ag.push_back(function_to_json(g)["values"]);
  }
  Json mg = Json::array();
  for (const auto& g : module.module_generators()) {
    mg.push_back(function_to_json(g)["values"]);
  }
  doc["algebra_generators"] = ag;
  doc["module_generators"] = mg;
  doc["degree_A"] = module.algebra().closure_degree();
  doc["degree_M"] = module.closure_degree();
  return doc;
}

PullbackModule module_from_json(const Json& doc, const FiberedSystem& sys) {
  try {
    std::vector<SampledFunction> ag;
    for (const auto& g : doc.at("algebra_generators")) {
      ag.push_back(function_from_json(g, sys.map().target()));
    }
    std::vector<SampledFunction> mg;
    for (const auto& g : doc.at("module_generators")) {
      mg.push_back(function_from_json(g, sys.map().source()));
    }
    int deg_a = doc.at("degree_A").get<int>();
    int deg_m = doc.at("degree_M").get<int>();
    BaseAlgebra algebra(sys.map().target(), std::move(ag), deg_a);
    return PullbackModule(sys, algebra, std::move(mg), deg_m);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad module document: ") + e.what());
  }
}

Json certificate_to_json(const EnvelopeCertificate& cert) {
  Json doc;
  doc["eps"] = cert.eps;
  doc["m1"] = function_to_json(cert.m1)["values"];
  doc["m2"] = function_to_json(cert.m2)["values"];
  if (cert.budget) {
    Json b;
    b["eps1"] = cert.budget->eps1;
    b["mc_sup"] = cert.budget->mc_sup;
    b["mc_mass"] = cert.budget->mc_mass;
    doc["budget"] = b;
  }
  return doc;
}

Json cover_to_json(const CoverResult& cover) {
  Json doc;
  doc["k_final"] = cover.k_final;
  doc["multiplicity"] = cover.multiplicity;
  Json witness = Json::array();
  for (const auto& c : cover.multiplicity_witness) witness.push_back(rat_to_string(c));
  doc["multiplicity_witness"] = witness;
  Json boxes = Json::array();
  for (std::size_t i = 0; i < cover.boxes.size(); ++i) {
    Json b;
    Json center = Json::array();
    for (const auto& c : cover.boxes[i].center) center.push_back(rat_to_string(c));
    b["center"] = center;
    b["width"] = rat_to_string(cover.boxes[i].width);
    Json sub = Json::array();
    for (const auto& c : cover.subordination[i]) sub.push_back(rat_to_string(c));
    b["witness"] = sub;
    boxes.push_back(b);
  }
  doc["boxes"] = boxes;
  return doc;
}

std::string cover_to_csv(const CoverResult& cover) {
  std::ostringstream out;
  std::vector<std::string> header = {"box_id"};
  std::size_t dim = cover.boxes.empty() ? 0 : cover.boxes[0].center.size();
  for (std::size_t a = 0; a < dim; ++a) header.push_back("center_" + std::to_string(a));
  header.push_back("width");
  header.push_back("witness");
  header.push_back("overlap_count");
  out << csv_row(header);
  for (std::size_t i = 0; i < cover.boxes.size(); ++i) {
    std::vector<std::string> row = {std::to_string(i)};
    for (const auto& c : cover.boxes[i].center) row.push_back(rat_to_string(c));
    row.push_back(rat_to_string(cover.boxes[i].width));
    std::string w;
    for (std::size_t a = 0; a < cover.subordination[i].size(); ++a) {
      if (a) w += ";";
      w += rat_to_string(cover.subordination[i][a]);
    }
    row.push_back(w);
    row.push_back(std::to_string(cover.multiplicity));
    out << csv_row(row);
  }
  return out.str();
}

Json trace_to_json(const ContradictionTrace& trace) {
  Json doc;
  doc["eps"] = trace.eps;
  doc["analytic_bound"] = trace.analytic_bound;
  doc["lp_exact"] = trace.lp_exact;
  doc["contradiction"] = trace.contradiction;
  doc["summary"] = trace.summary;
  Json steps = Json::array();
  for (const auto& s : trace.steps) {
    Json j;
    j["statement"] = s.statement;
    j["lhs"] = s.lhs;
    j["relation"] = s.relation;
    j["rhs"] = s.rhs;
    j["holds"] = s.holds;
    steps.push_back(j);
  }
  doc["steps"] = steps;
  if (trace.witness) doc["witness"] = certificate_to_json(*trace.witness);
  return doc;
}

Json avoidance_to_json(const AvoidanceInstance& inst) {
  Json doc;
  doc["S"] = inst.S;
  doc["T"] = inst.T_dual;
  return doc;
}

AvoidanceInstance avoidance_from_json(const Json& doc) {
  try {
    AvoidanceInstance inst;
    inst.S = doc.at("S").get<std::vector<std::vector<double>>>();
    inst.T_dual = doc.at("T").get<std::vector<std::vector<double>>>();
    if (inst.S.empty()) throw ConfigError("S must be nonempty");
    inst.dimension = (int)inst.S[0].size();
    return inst;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad avoidance instance: ") + e.what());
  }
}

MeasureSequence sequence_from_json(const Json& doc, const WeightedMeasure& base) {
  try {
    std::string kind = doc.at("kind").get<std::string>();
    if (kind == "perturbation") {
      std::string rate = doc.value("rate", "1/n");
      if (rate != "1/n") throw ConfigError("unsupported rate '" + rate + "'");
      WeightedMeasure nu(base.space(), weights_from_json(doc.at("nu")));
      int n_max = doc.value("n_max", 200);
      return MeasureSequence::perturbation(base, nu, n_max);
    }
    if (kind == "explicit") {
      std::vector<WeightedMeasure> terms;
      for (const auto& t : doc.at("terms")) {
        terms.emplace_back(base.space(), weights_from_json(t));
      }
      return MeasureSequence(base, std::move(terms));
    }
    throw ConfigError("unknown sequence kind '" + kind + "'");
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad sequence document: ") + e.what());
  }
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ",";
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\r\n") != std::string::npos) {
      out += '"';
      for (char c : f) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    } else {
      out += f;
    }
  }
  out += "\r\n";
  return out;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
}

}  // namespace fibenv
