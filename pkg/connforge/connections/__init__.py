from .coefficients import (ConnectionCoeffs, TorsionForm, levi_civita, nabla_g, nabla_g_defect, nabla_J, nabla_J_defect,
                           torsion, torsion_condition_defect, j_star, project, s_tensor, lowered_s_tensor,
                           first_canonical, skew_connection, nabla_plus_minus, affine_combine, canonical_line, bismut,
                           synthetic_connection, synthetic_metric_connection)
from .solvers import (SolveReport, solve_chern, solve_skew, chern_connection, skew_torsion, three_form_basis,
                      RANK_CUTOFF, AMBIGUITY_BAND, RESIDUAL_TOL)
