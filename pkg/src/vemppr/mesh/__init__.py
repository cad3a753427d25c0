from .core import (MeshError, PlanarEdge, PolygonMesh, build_topology, cell_area_centroid,
                   planar_edges)
from .generators import MeshFamily, UNIT_SQUARE_FAMILIES, generate
from .refine import refine
from .io import load_json, mesh_from_dict, mesh_to_dict, save_json, to_svg, write_svg

__all__ = [
    "MeshError", "PlanarEdge", "PolygonMesh", "build_topology", "cell_area_centroid",
    "planar_edges", "MeshFamily", "UNIT_SQUARE_FAMILIES", "generate", "refine",
    "load_json", "mesh_from_dict", "mesh_to_dict", "save_json", "to_svg", "write_svg",
]
