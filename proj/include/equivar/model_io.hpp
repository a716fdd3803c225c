// SPDX-License-Identifier: Apache-2.0

#ifndef EQUIVAR_MODEL_IO_HPP
#define EQUIVAR_MODEL_IO_HPP

#include <filesystem>
#include <stdexcept>
#include <string>

#include "equivar/net.hpp"

namespace equivar {

/// Model file schema identifier. Files with any other value are rejected.
inline constexpr const char* kModelSchema = "equivar-act/1";

/// Raised on malformed model files; the message names the offending layer
/// or field.
class ModelParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON document {schema, vector_dim, layers:[{weights, kappas, activation}]}.
/// Numbers round-trip bit exactly. Parsing is strict: unknown fields,
/// non-finite numbers, and width mismatches are rejected.
std::string model_to_json(const ModelParams& m);
ModelParams model_from_json(const std::string& text);

void save_model(const ModelParams& m, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace equivar

#endif  // EQUIVAR_MODEL_IO_HPP
