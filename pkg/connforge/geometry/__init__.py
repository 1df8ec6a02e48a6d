from .frame import PointFrame
from .structure import (Chart, GeometryStructure, ConditionCheck, ValidationReport, StructureFile, GEOMETRY_SIGNS,
                        geometry_label, load_structure, dump_structure, structure_from_file, validate_structure)
