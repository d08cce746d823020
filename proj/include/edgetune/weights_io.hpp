#pragma once

// Batch-size weight files. A header line selects the column meaning:
//
//     b,r           relation ratios in (0, 1], one equal to 1
//     b,n_s_acc     positive sample counts
//
// followed by one `batch_size,value` row per batch size. '#' comments and
// blank lines are skipped.

#include <string>
#include <string_view>

#include "edgetune/core_model.hpp"

namespace edgetune {

/// Accepts either header; counts are normalized into ratios.
RelationVector load_relation_vector(std::string_view text, const std::string& source,
                                    std::string source_id = {});

/// Requires the `b,n_s_acc` header.
SampleCounts load_counts(std::string_view text, const std::string& source);

std::string save_relation_vector(const RelationVector& r);
std::string save_counts(const SampleCounts& counts);

}  // namespace edgetune
