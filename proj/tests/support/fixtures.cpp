// drape_fixtures <dir>: writes sphere / ellipsoid test shapes as OBJ files.
#include "geometry/mesh_io.hpp"
#include "shapes.hpp"

#include <cstdio>
#include <filesystem>

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: drape_fixtures <dir>\n");
    return 2;
  }
  namespace t = drape::testing;
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  drape::save_mesh(t::icosphere(4), dir / "sphere2562.obj");
  drape::save_mesh(t::icosphere(3), dir / "sphere642.obj");
  drape::save_mesh(t::ellipsoid(4, {1.0, 0.7, 0.5}), dir / "ellipsoid2562.obj");
  drape::save_mesh(t::ellipsoid(3, {1.0, 0.7, 0.5}), dir / "ellipsoid642.obj");
  drape::save_mesh(t::bumpy_ellipsoid(4, {1.0, 0.7, 0.5}, 0.08, 6.0), dir / "bumpy2562.obj");
  return 0;
}
