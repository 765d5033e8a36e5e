#pragma once

#include <array>
#include <optional>

#include "msgfem/fem.hpp"

namespace msgfem {

enum class PatchKind { Interior, Boundary };

/// Oversampled patch: inner region omega inside omega_star, both aligned with
/// the coefficient grid. Rectangular patches use rect regions; disk/ellipse
/// patches carry element masks on a rectangular mesh.
struct PatchPair {
    Rect omega;      // inner region bounding rect (clipped against the domain)
    Rect omega_star; // oversampled bounding rect (clipped)
    PatchKind kind = PatchKind::Interior;
    std::array<bool, 4> star_sides_on_domain{false, false, false, false}; // L,R,B,T on dOmega
    MeshPtr mesh;    // mesh of omega_star (∩ domain)
    std::shared_ptr<const CoefficientField> field; // clipped, restricted to omega_star
    Region omega_region = Region::all();
    double rho = 0.0; // oversampling ratio as built

    bool touches_domain_boundary() const {
        return star_sides_on_domain[0] || star_sides_on_domain[1] || star_sides_on_domain[2] ||
               star_sides_on_domain[3];
    }
    /// Edges of the mesh that may carry snapshot data (excludes dOmega parts).
    EdgeSet snapshot_edges() const {
        return touches_domain_boundary() ? EdgeSet::not_on_sides(star_sides_on_domain)
                                         : EdgeSet::all_outer();
    }
};

/// Rectangular patch; `domain` clips omega_star and flags the dOmega sides.
/// The mesh resolves every coefficient cell `refine`-fold.
PatchPair make_rect_patch(const CoefficientField& field, Rect omega, Rect omega_star,
                          const Rect& domain, int refine = 1, bool clip_fibers = true);

/// Concentric elliptic masks { y^T diag(1, 1/b) y <= r^2 } in the eigenbasis
/// of a0, meshed on the bounding square of the outer ellipse; cells outside
/// the outer mask are excluded.
PatchPair make_ellipse_patch(const CoefficientField& field, const SymMat2& a0, double cx,
                             double cy, double r, double r_star, int refine = 1);

/// Node ids of the sub mesh mapped into an aligned super mesh.
std::vector<int> embed_nodes(const Mesh& sub, const Mesh& super);

} // namespace msgfem
