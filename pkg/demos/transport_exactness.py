"""ESR against Strang on the 3D rotation transport problem.

Prints the L2 error against the pulled-back initial datum every 10 steps.
"""
import sys

from exactsplit.diagnostics import l2_error
from exactsplit.presets import get_preset
from exactsplit.propagators import make_stepper


def main(points=32, half_width=1.36, dt=0.3, steps=100):
    pre = get_preset("transport3d")
    spec = pre.grid(points=(points,) * 3, half_widths=(half_width,) * 3)
    f0 = pre.initial_field(spec)
    steppers = {s: make_stepper(pre.model, s, spec, dt) for s in ("esr", "strang")}
    fields = dict.fromkeys(steppers, f0)
    print(f"{'t':>6s} {'esr':>12s} {'strang':>12s}")
    for k in range(10, steps + 1, 10):
        row = []
        for name, st in steppers.items():
            fields[name] = st.advance(fields[name], 10)
            row.append(l2_error(fields[name], pre.exact, k * dt))
        print(f"{k * dt:6.1f} {row[0]:12.3e} {row[1]:12.3e}")
    for name, st in steppers.items():
        print(f"{name}: {st.shears_per_step} shears, {st.transforms_per_step()} transforms per step")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:2]))
