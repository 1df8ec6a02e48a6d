from .expr import ScalarExpr, parse, coordinate_symbols
from .tensor import (invert_metric, metric_signature, lower_first, raise_first, max_abs,
                     antisymmetry_defect_last_two, total_antisymmetry_defect)
