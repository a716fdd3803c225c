// SPDX-License-Identifier: Apache-2.0

#include "equivar/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace equivar {

namespace {

using nlohmann::json;

// Parsing is strict: every object must carry exactly the expected keys.
void require_keys(const json& obj, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, const std::string& where) {
  if (!obj.is_object()) {
    throw ModelParseError(where + ": expected an object");
  }
  for (const char* key : required) {
    if (!obj.contains(key)) {
      throw ModelParseError(where + ": missing field '" + key + "'");
    }
  }
  for (const auto& item : obj.items()) {
    const std::string& key = item.key();
    bool known = false;
    for (const char* k : required) known = known || key == k;
    for (const char* k : optional) known = known || key == k;
    if (!known) {
      throw ModelParseError(where + ": unknown field '" + key + "'");
    }
  }
}

double finite_number(const json& v, const std::string& where) {
  if (!v.is_number()) {
    throw ModelParseError(where + ": expected a number");
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw ModelParseError(where + ": non-finite value");
  }
  return d;
}

json scalar_function_to_json(const ScalarFunction& f) {
  json j;
  j["kind"] = std::string(f.name());
  if (f.kind == ScalarFunction::Kind::leaky_relu || f.kind == ScalarFunction::Kind::step_leaky) {
    j["slope"] = f.slope;
  }
  if (f.kind == ScalarFunction::Kind::softsign_residue_profile) {
    j["residue"] = f.residue;
  }
  return j;
}

ScalarFunction scalar_function_from_json(const json& j, const std::string& where) {
  require_keys(j, {"kind"}, {"slope", "residue"}, where);
  if (!j["kind"].is_string()) {
    throw ModelParseError(where + ": 'kind' must be a string");
  }
  const std::string kind = j["kind"].get<std::string>();
  const double slope = j.contains("slope") ? finite_number(j["slope"], where + ".slope") : 0.0;
  const double residue =
      j.contains("residue") ? finite_number(j["residue"], where + ".residue") : 0.0;
  try {
    return ScalarFunction::from_name(kind, slope, residue);
  } catch (const std::invalid_argument& e) {
    throw ModelParseError(where + ": " + e.what());
  }
}

json activation_to_json(const ActivationSpec& s) {
  json j;
  j["family"] = std::string(s.family_name());
  switch (s.family) {
    case ActivationSpec::Family::softsign_residue:
      j["a"] = s.a;
      break;
    case ActivationSpec::Family::identity:
      break;
    case ActivationSpec::Family::leaky_relu_norm:
      j["k"] = s.k;
      j["c"] = s.c;
      break;
    case ActivationSpec::Family::generalized:
      // kappa lives in the per-node kappas array, not in the template.
      j["f"] = scalar_function_to_json(s.f);
      break;
  }
  return j;
}

ActivationSpec activation_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) {
    throw ModelParseError(where + ": expected an object with a 'family' string");
  }
  const std::string family = j["family"].get<std::string>();
  try {
    if (family == "softsign_residue") {
      require_keys(j, {"family", "a"}, {}, where);
      return ActivationSpec::softsign_residue(finite_number(j["a"], where + ".a"));
    }
    if (family == "identity") {
      require_keys(j, {"family"}, {}, where);
      return ActivationSpec::identity();
    }
    if (family == "leaky_relu_norm") {
      require_keys(j, {"family", "k", "c"}, {}, where);
      return ActivationSpec::leaky_relu_norm(finite_number(j["k"], where + ".k"),
                                             finite_number(j["c"], where + ".c"));
    }
    if (family == "generalized") {
      require_keys(j, {"family", "f"}, {}, where);
      return ActivationSpec::generalized(scalar_function_from_json(j["f"], where + ".f"), 0.0);
    }
  } catch (const std::invalid_argument& e) {
    throw ModelParseError(where + ": " + e.what());
  }
  throw ModelParseError(where + ": unknown family '" + family + "'");
}

}  // namespace

std::string model_to_json(const ModelParams& m) {
  m.validate();
  json doc;
  doc["schema"] = kModelSchema;
  doc["vector_dim"] = m.vector_dim;
  doc["layers"] = json::array();
  for (const LayerParams& p : m.layers) {
    json layer;
    json weights = json::array();
    for (Eigen::Index i = 0; i < p.fan_out(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < p.fan_in(); ++j) {
        row.push_back(p.weights(i, j));
      }
      weights.push_back(std::move(row));
    }
    layer["weights"] = std::move(weights);
    json kappas = json::array();
    for (Eigen::Index i = 0; i < p.kappas.size(); ++i) {
      kappas.push_back(p.kappas[i]);
    }
    layer["kappas"] = std::move(kappas);
    layer["activation"] = activation_to_json(p.activation);
    doc["layers"].push_back(std::move(layer));
  }
  return doc.dump(2) + "\n";
}

ModelParams model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  require_keys(doc, {"schema", "vector_dim", "layers"}, {}, "model");
  if (!doc["schema"].is_string() || doc["schema"].get<std::string>() != kModelSchema) {
    throw ModelParseError("model: unsupported schema (expected '" + std::string(kModelSchema) +
                          "')");
  }
  if (!doc["vector_dim"].is_number_integer() || doc["vector_dim"].get<long long>() < 1) {
    throw ModelParseError("model: 'vector_dim' must be a positive integer");
  }
  if (!doc["layers"].is_array() || doc["layers"].empty()) {
    throw ModelParseError("model: 'layers' must be a non-empty array");
  }

  ModelParams m;
  m.vector_dim = doc["vector_dim"].get<Eigen::Index>();
  int index = 0;
  for (const json& jl : doc["layers"]) {
    const std::string where = "layer " + std::to_string(index);
    require_keys(jl, {"weights", "kappas", "activation"}, {}, where);

    const json& jw = jl["weights"];
    if (!jw.is_array() || jw.empty()) {
      throw ModelParseError(where + ": 'weights' must be a non-empty array of rows");
    }
    const std::size_t rows = jw.size();
    if (!jw[0].is_array() || jw[0].empty()) {
      throw ModelParseError(where + ": weight rows must be non-empty arrays");
    }
    const std::size_t cols = jw[0].size();
    LayerParams p;
    p.weights.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
      if (!jw[i].is_array() || jw[i].size() != cols) {
        throw ModelParseError(where + ": weight rows have inconsistent lengths");
      }
      for (std::size_t j = 0; j < cols; ++j) {
        p.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            finite_number(jw[i][j], where + ".weights");
      }
    }

    const json& jk = jl["kappas"];
    if (!jk.is_array() || jk.size() != rows) {
      throw ModelParseError(where + ": 'kappas' must list one value per node (" +
                            std::to_string(rows) + ")");
    }
    p.kappas.resize(static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
      p.kappas[static_cast<Eigen::Index>(i)] = finite_number(jk[i], where + ".kappas");
    }

    p.activation = activation_from_json(jl["activation"], where + ".activation");
    m.layers.push_back(std::move(p));
    ++index;
  }

  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ModelParseError(e.what());
  }
  return m;
}

void save_model(const ModelParams& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_model: cannot open '" + path.string() + "' for writing");
  }
  out << model_to_json(m);
  if (!out) {
    throw std::runtime_error("save_model: write to '" + path.string() + "' failed");
  }
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_model: cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace equivar
