#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "vichoice/elbo.hpp"
#include "vichoice/model.hpp"

// File formats.
//
// Dataset (JSON lines): the first record is a header {"J": int, "K": int,
// ...}; any further header keys (e.g. the scenario that produced the data)
// are preserved as metadata. Every following record is one agent:
//   {"agent": int, "events": [{"x": [[...K reals...] x J rows], "y": int}]}
// with y 1-based.

namespace vichoice::io {

using nlohmann::json;

json to_json(const VectorXd& v);
json to_json(const MatrixXd& m);  // array of rows
VectorXd vector_from_json(const json& j);
MatrixXd matrix_from_json(const json& j);

json to_json(const PopulationParams& p);  // {"zeta", "omega"}
PopulationParams params_from_json(const json& j);

json to_json(const VariationalGlobal& g);
VariationalGlobal global_from_json(const json& j);

json to_json(const VariationalAgent& q);
VariationalAgent agent_from_json(const json& j, LseApprox approx);

json to_json(const Hyperpriors& hp);
Hyperpriors hyperpriors_from_json(const json& j);

void write_dataset(std::ostream& os, const ChoiceDataset& data, const json& header_extra = json::object());

struct LoadedDataset {
  ChoiceDataset data;
  json header;
};

LoadedDataset read_dataset(std::istream& is);

void write_dataset_file(const std::filesystem::path& path, const ChoiceDataset& data,
                        const json& header_extra = json::object());
LoadedDataset read_dataset_file(const std::filesystem::path& path);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

// One row per agent, K comma-separated columns, full precision.
void write_matrix_csv(const std::filesystem::path& path, const MatrixXd& m);
MatrixXd read_matrix_csv(const std::filesystem::path& path);

}  // namespace vichoice::io
