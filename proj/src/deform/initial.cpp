#include "deform/deform.hpp"

namespace drape {

InitialDeformation initial_deformation(const SurfaceMesh& mesh, const TargetShape& target,
                                       const CorrespondenceSet& corr, int arap_iterations) {
  corr.validate(mesh.vertex_count());
  InitialDeformation out;
  out.correspondences = corr.snapped(target);
  out.affine = estimate_global_affine(mesh, out.correspondences);
  if (out.correspondences.empty()) {
    out.vertices = out.affine.apply(mesh.vertices());
    return out;
  }
  out.vertices = biharmonic_deform(mesh, out.correspondences, out.affine);

  const CorrespondenceSet rigid = out.correspondences.rigid_only();
  if (!rigid.empty()) {
    // Rest shape is the globally aligned source; the biharmonic result only
    // seeds the iteration.
    const SurfaceMesh aligned = mesh.with_vertices(out.affine.apply(mesh.vertices()));
    out.vertices = arap_deform(aligned, rigid, arap_iterations, &out.vertices).vertices;
  }
  return out;
}

}  // namespace drape
