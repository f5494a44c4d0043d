#ifndef ROLEM_DATASET_IO_HPP
#define ROLEM_DATASET_IO_HPP

#include <string>
#include <vector>

#include "rolem/model.hpp"
#include "rolem/simgen.hpp"

namespace rolem::io {

// Long-format CSV with header subject_id,time_index,y_1..y_r,x_1..x_p.
// Rows with missing cells are rejected with a warning (strict mode drops the
// whole subject instead); duplicated (subject, time) pairs and non-numeric
// cells raise DataError with the offending line number.
model::LongitudinalDataset ingest(const std::string& path, bool strict = false,
                                  std::vector<std::string>* warnings = nullptr);

void write_dataset(const std::string& path,
                   const model::LongitudinalDataset& data);

void write_ground_truth(const std::string& path,
                        const simgen::GroundTruth& truth);
simgen::GroundTruth read_ground_truth(const std::string& path);

// Headerless rectangular numeric CSV (prior matrices and the like).
Eigen::MatrixXd read_matrix_csv(const std::string& path);

// %.17g: lossless decimal round trip for doubles.
std::string format_double(double value);

}  // namespace rolem::io

#endif  // ROLEM_DATASET_IO_HPP
