"""Mass and angular momentum of a rotating condensate under ESQM, ESR and BW."""
from exactsplit.diagnostics import angular_momentum, mass
from exactsplit.presets import get_preset
from exactsplit.propagators import make_stepper


def main(points=64, final_time=1.0):
    pre = get_preset("gpe2d", omega=-0.5, beta=100.0)
    spec = pre.grid(points=(points, points))
    psi0 = pre.initial_field(spec)
    m0, l0 = mass(psi0), angular_momentum(psi0)
    print(f"initial mass {m0:.12f}, Lz {l0:.12f}")
    for scheme in ("esqm", "esr", "bw"):
        for dt in (4e-3, 2e-3, 1e-3):
            st = make_stepper(pre.model, scheme, spec, dt)
            psi = st.advance(psi0, int(round(final_time / dt)))
            print(f"{scheme:5s} dt={dt:.0e}  mass drift {abs(mass(psi) - m0) / m0:.1e}  "
                  f"Lz error {abs(angular_momentum(psi) - l0):.2e}  "
                  f"transforms/step {st.transforms_per_step()}")


if __name__ == "__main__":
    main()
