"""
Trust but verify: finite-difference gradient checks
===================================================

Every differentiable building block ships with an analytic backward
pass, and each one is compared against central finite differences under
a random linear probe. A plain sum would be blind to softmax and
layer-norm errors (their outputs sum to a constant), so the probe
weights every output element randomly.
"""

from clft.gradcheck import OP_IDS, grad_check, run_all

# One op, one seed: the report carries the worst element-wise errors.
report = grad_check("softmax", seed=0)
print(f"softmax seed 0: max_rel {report.max_rel_error:.3e}  "
      f"max_abs {report.max_abs_error:.3e}  passed={report.passed}")

# The full battery: every op, ten seeds, worst case per op.
print(f"\nall ops, 10 seeds each, tolerance 1e-4:")
for r in run_all(tolerance=1e-4, seeds=range(10)):
    print(f"  {r.op_name:<12} max_rel {r.max_rel_error:.3e}  {'ok' if r.passed else 'FAIL'}")

# Tightening the tolerance far below float64 finite-difference noise
# shows the check actually has teeth.
impossible = [r for r in run_all(tolerance=1e-14, seeds=range(2)) if not r.passed]
print(f"\nat tolerance 1e-14, {len(impossible)} of {len(OP_IDS)} ops fail (as they should)")
