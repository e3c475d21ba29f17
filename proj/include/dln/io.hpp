#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dln/fe_space.hpp"
#include "dln/field.hpp"

namespace dln {

/// CSV with a header line; every cell is preformatted text.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Resolved key = value run configuration.
void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);

/// Legacy ASCII VTK of the vertex part of a 2D field (triangle cells,
/// one point scalar).
void write_vtk_2d(const std::string& path, const FeSpace& space, const FieldVector& u,
                  const std::string& field_name = "u");

/// Two-column (x, u) profile of a 1D field at all P2 nodes.
void write_profile_csv(const std::string& path, const FeSpace& space, const FieldVector& u);

std::string format_sci(double v, int digits = 12);

}  // namespace dln
