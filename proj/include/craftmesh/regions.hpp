#pragma once

#include "craftmesh/mesh.hpp"

#include <vector>

namespace craftmesh {

/// Vertex and face selections around the fusion seam. All index lists are
/// sorted ascending.
struct RegionSelection {
    std::vector<Vec3> seam_vertices;  ///< intersection points between the inputs
    std::vector<int> t_in;            ///< merged-mesh vertices within eps0 of the seam
    std::vector<int> e_in;            ///< reference-mesh vertices within eps0 of the seam
    std::vector<int> t_opt;           ///< merged-mesh vertices within eps1 (optimised)
    double eps0 = 0.08;
    double eps1 = 0.05;
    std::vector<int> new_faces;        ///< merged faces away from the original surface
    std::vector<int> preserved_faces;  ///< merged faces lying on the original surface

    /// Throws ValidationError if t_opt is not inside t_in, eps1 >= eps0, or
    /// (when a face classification is present) the face sets do not
    /// partition [0, face_count).
    void validate(std::size_t face_count) const;
};

/// Vertices of `mesh_t` / `mesh_e` closer than eps0 (eps1 for t_opt) to any
/// seam point. Throws ParameterError unless 0 < eps1 < eps0.
RegionSelection extract_regions(const TriMesh& mesh_t, const TriMesh& mesh_e,
                                const std::vector<Vec3>& seam, double eps0, double eps1);

struct FaceClassification {
    std::vector<int> new_faces;
    std::vector<int> preserved_faces;
};

/// A merged face is preserved iff all three vertices lie within `delta` of
/// the original surface.
FaceClassification classify_new_vs_preserved(const TriMesh& merged, const TriMesh& original,
                                             double delta);

/// Faces with at least one vertex in `vertices` (sorted), ascending.
std::vector<int> faces_touching(const TriMesh& mesh, const std::vector<int>& vertices);

}  // namespace craftmesh
