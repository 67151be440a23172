#include <algorithm>
#include <fstream>
#include <sstream>

#include "wce/harness.hpp"

namespace wce::harness {

namespace {

cplx parse_complex(const ojson& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ValidationError(where, "complex values must be [re, im] arrays");
  return {j[0].get<double>(), j[1].get<double>()};
}

ojson complex_to_json(const cplx& z) {
  return ojson::array({z.real(), z.imag()});
}

std::vector<cplx> parse_complex_vector(const ojson& j, std::size_t n,
                                       const std::string& where) {
  if (!j.is_array())
    throw ValidationError(where, "expected an array of complex values");
  if (j.size() != n)
    throw ValidationError(where, "expected " + std::to_string(n) +
                                     " entries, got " + std::to_string(j.size()));
  std::vector<cplx> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(parse_complex(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

const LinOperator* Instance::find_operator(const std::string& name) const {
  for (const auto& [k, v] : operators)
    if (k == name) return &v;
  return nullptr;
}

const MFunction* Instance::find_vector(const std::string& name) const {
  for (const auto& [k, v] : vectors)
    if (k == name) return &v;
  return nullptr;
}

WCEOp make_wce(const Instance& inst) {
  return wce_build(inst.partition, inst.u, inst.w);
}

Instance parse_instance(const std::string& text, const std::string& where) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(where, std::string("parse error: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError(where, "top level must be an object");
  if (!j.contains("weights"))
    throw ValidationError(where + ": weights", "missing field");
  if (!j["weights"].is_array())
    throw ValidationError(where + ": weights", "expected an array of numbers");
  std::vector<double> weights;
  for (std::size_t i = 0; i < j["weights"].size(); ++i) {
    const auto& v = j["weights"][i];
    const std::string loc = where + ": weights[" + std::to_string(i) + "]";
    if (!v.is_number()) throw ValidationError(loc, "expected a number");
    const double d = v.get<double>();
    if (!(d > 0.0)) throw ValidationError(loc, "weights must be positive");
    weights.push_back(d);
  }
  MeasureSpace space(weights);
  const std::size_t n = space.size();

  if (!j.contains("blocks"))
    throw ValidationError(where + ": blocks", "missing field");
  std::vector<std::vector<std::size_t>> blocks;
  for (const auto& b : j["blocks"]) {
    if (!b.is_array())
      throw ValidationError(where + ": blocks", "each block must be an array");
    std::vector<std::size_t> block;
    for (const auto& e : b) {
      if (!e.is_number_integer())
        throw ValidationError(where + ": blocks", "atom indices must be integers");
      const long i = e.get<long>();
      if (i < 0 || static_cast<std::size_t>(i) >= n)
        throw ValidationError(where + ": blocks",
                              "atom index out of range: " + std::to_string(i));
      block.push_back(static_cast<std::size_t>(i));
    }
    blocks.push_back(std::move(block));
  }
  Partition partition = [&]() {
    try {
      return Partition(space, blocks);
    } catch (const UsageError& e) {
      throw ValidationError(where + ": blocks", e.what());
    }
  }();

  if (!j.contains("u")) throw ValidationError(where + ": u", "missing field");
  if (!j.contains("w")) throw ValidationError(where + ": w", "missing field");
  MFunction u(space, parse_complex_vector(j["u"], n, where + ": u"));
  MFunction w(space, parse_complex_vector(j["w"], n, where + ": w"));

  std::vector<std::pair<std::string, LinOperator>> operators;
  if (j.contains("operators")) {
    if (!j["operators"].is_object())
      throw ValidationError(where + ": operators", "expected an object");
    for (const auto& [name, rows] : j["operators"].items()) {
      const std::string loc = where + ": operators." + name;
      if (!rows.is_array() || rows.size() != n)
        throw ValidationError(loc, "expected " + std::to_string(n) + " rows");
      CMatrix m(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = parse_complex_vector(
            rows[i], n, loc + "[" + std::to_string(i) + "]");
        for (std::size_t k = 0; k < n; ++k) m(i, k) = row[k];
      }
      operators.emplace_back(name, LinOperator(space, std::move(m)));
    }
  }
  std::vector<std::pair<std::string, MFunction>> vectors;
  if (j.contains("vectors")) {
    if (!j["vectors"].is_object())
      throw ValidationError(where + ": vectors", "expected an object");
    for (const auto& [name, vals] : j["vectors"].items()) {
      vectors.emplace_back(
          name, MFunction(space, parse_complex_vector(
                              vals, n, where + ": vectors." + name)));
    }
  }
  return Instance{std::move(space), std::move(partition), std::move(u),
                  std::move(w), std::move(operators), std::move(vectors)};
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str(), path);
}

std::string instance_to_json(const Instance& inst) {
  ojson j;
  j["weights"] = inst.space.weights();
  ojson blocks = ojson::array();
  for (const auto& b : inst.partition.blocks()) blocks.push_back(b);
  j["blocks"] = std::move(blocks);
  ojson u = ojson::array(), w = ojson::array();
  for (std::size_t i = 0; i < inst.space.size(); ++i) {
    u.push_back(complex_to_json(inst.u[i]));
    w.push_back(complex_to_json(inst.w[i]));
  }
  j["u"] = std::move(u);
  j["w"] = std::move(w);
  auto sorted_names = [](const auto& pairs) {
    std::vector<std::string> names;
    for (const auto& [k, v] : pairs) names.push_back(k);
    std::sort(names.begin(), names.end());
    return names;
  };
  if (!inst.operators.empty()) {
    ojson ops;
    for (const std::string& name : sorted_names(inst.operators)) {
      const LinOperator* op = inst.find_operator(name);
      ojson rows = ojson::array();
      for (std::size_t i = 0; i < inst.space.size(); ++i) {
        ojson row = ojson::array();
        for (std::size_t k = 0; k < inst.space.size(); ++k)
          row.push_back(complex_to_json(op->matrix()(i, k)));
        rows.push_back(std::move(row));
      }
      ops[name] = std::move(rows);
    }
    j["operators"] = std::move(ops);
  }
  if (!inst.vectors.empty()) {
    ojson vecs;
    for (const std::string& name : sorted_names(inst.vectors)) {
      const MFunction* f = inst.find_vector(name);
      ojson vals = ojson::array();
      for (std::size_t i = 0; i < inst.space.size(); ++i)
        vals.push_back(complex_to_json((*f)[i]));
      vecs[name] = std::move(vals);
    }
    j["vectors"] = std::move(vecs);
  }
  return j.dump();
}

std::string instance_digest(const Instance& inst) {
  const std::string text = instance_to_json(inst);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace wce::harness
