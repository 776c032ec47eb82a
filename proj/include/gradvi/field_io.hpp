#pragma once

// CSV persistence of node fields.
//
// Header: "# shape=<descriptor> h=<h> nx=<nx> ny=<ny> components=<N>", then for
// each component a "# component=<l>" line followed by ny rows of nx values.
// Values use 17 significant digits; Exterior nodes are written as "nan".

#include "gradvi/grid.hpp"

#include <string>

namespace gradvi {

void export_field(const ScalarField& f, const std::string& path);
void export_field(const VectorField& f, const std::string& path);

/// Rebuilds the grid from the header; values are bit-identical to the export.
ScalarField import_scalar_field(const std::string& path);
VectorField import_vector_field(const std::string& path);

std::string field_to_csv(const VectorField& f);
VectorField field_from_csv(const std::string& text);

}  // namespace gradvi
