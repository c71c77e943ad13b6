#pragma once

#include "craftmesh/mesh.hpp"

#include <vector>

namespace craftmesh {

/// Closest point on triangle (a,b,c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Signed solid angle of triangle (a,b,c) seen from p, divided by 4*pi.
double triangle_winding(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct ClosestHit {
    int face = -1;
    Vec3 point = Vec3::Zero();
    double squared_distance = 0.0;
};

struct SignedDistance {
    double value = 0.0;  ///< negative inside when is_signed
    bool is_signed = false;
};

/// Bounding-volume hierarchy over the faces of a mesh, answering exact
/// closest-point and generalized winding number queries. Holds its own copy of
/// the geometry and is immutable after construction.
class DistanceIndex {
public:
    /// Throws ParameterError on an empty mesh.
    explicit DistanceIndex(const TriMesh& mesh);

    ClosestHit closest(const Vec3& p) const;
    double unsigned_distance(const Vec3& p) const;
    double winding_number(const Vec3& p) const;
    /// Unsigned with is_signed=false when the mesh is open.
    SignedDistance signed_distance(const Vec3& p) const;

    bool closed() const { return closed_; }
    std::size_t face_count() const { return faces_.size(); }

    /// Face indices stored in each leaf; used to verify that every face lands
    /// in exactly one leaf.
    std::vector<std::vector<int>> leaf_faces() const;

private:
    struct Node {
        Aabb box;
        int left = -1;
        int right = -1;
        int begin = 0;  ///< range into order_
        int end = 0;
        std::vector<std::array<int, 2>> boundary;  ///< oriented open edges of the subtree
        bool is_leaf() const { return left < 0; }
    };

    int build(int begin, int end, const std::vector<Vec3>& centroids);
    void closest_recursive(int node, const Vec3& p, ClosestHit& best) const;
    double winding_recursive(int node, const Vec3& p) const;
    double leaf_winding(const Node& node, const Vec3& p) const;

    std::vector<Vec3> vertices_;
    std::vector<Face> faces_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    double box_slack_ = 0.0;
    bool closed_ = false;
};

/// Signed distance of `point` to `mesh` through its index (negative inside).
SignedDistance signed_distance(const TriMesh& mesh, const DistanceIndex& index, const Vec3& point);

}  // namespace craftmesh
