import logging

from connforge import logger

logger.setLevel(logging.WARNING)

# --8<-- [start:structure]

from connforge import get_entry

entry = get_entry("hermitian_conformal_4d")
structure = entry.structure

report = structure.validate()
print(report.passed, structure.classify_kahler_type())

# --8<-- [end:structure]

# --8<-- [start:connections]

from connforge import levi_civita, first_canonical, project, solve_chern, solve_skew, nabla_plus_minus, bismut

frame = structure.frame_at((0.1, -0.3, 0.2, 0.5))

lc = levi_civita(frame)
first = first_canonical(frame)
chern = solve_chern(frame).solution
H = solve_skew(frame).solution
plus, minus = nabla_plus_minus(frame, H, 1), nabla_plus_minus(frame, H, -1)

print(project(lc, frame).distance(first))            # π(∇^g) = ∇⁰
print(project(minus, frame).distance(chern))         # π(∇⁻) = ∇^c
print(bismut(first, chern).distance(plus))           # 2∇⁰ − ∇^c = ∇⁺

# --8<-- [end:connections]

# --8<-- [start:verify]

from connforge import Verifier

summary = Verifier(points=20, seed=7, workers=4).verify_all()
for verify_report in summary.reports:
    print(verify_report.structure, verify_report.passed)

# --8<-- [end:verify]
