"""Frozen regression values and the protocol that produced them.

Regenerate with ``python -m fermionic_nuclearity.golden`` (rewrites golden/reference.json).
"""
import json
from importlib import resources
from pathlib import Path

from . import ising
from .nuclearity import double_cone_intersection

PROTOCOL = (
    "start at the reference grid; double n_points until two successive refinements "
    "agree on trace_phi and trace_pi to 0.1%; record values at the reference grid"
)

REFERENCE_SCENARIO = {"mass": 1.0, "x0": 0.0, "x1": -1.0, "basis_size": 8, "kappa": 1.0,
                      "theta_max": 12.0, "n_points": 2000}
REFERENCE_ENERGY = {"mass": 1.0, "beta": 1.0, "basis_size": 8, "kappa": 1.0,
                    "theta_max": 12.0, "n_points": 2000}


def reference_scenario():
    p = REFERENCE_SCENARIO
    return ising.WedgeScenario(p["mass"], p["x0"], p["x1"], p["basis_size"], p["kappa"],
                               ising.make_grid(p["theta_max"], p["n_points"]))


def _spectral_entry(rep, confirmed_grid):
    return {
        "trace_phi": rep.trace_phi,
        "trace_pi": rep.trace_pi,
        "xi_bound": rep.xi_bound,
        "det_bound": rep.det_bound,
        "sigma_phi": rep.sigma_phi,
        "sigma_pi": rep.sigma_pi,
        "confirmed_at_n_points": confirmed_grid.n_points,
    }


def compute_golden():
    from .audits import nested_fixture

    sc = reference_scenario()
    _, fine = ising.refine_until_converged(lambda g: ising.modular_nuclearity_report(
        ising.WedgeScenario(sc.mass, sc.x0, sc.x1, sc.basis_size, sc.kappa, g), False), sc.grid)
    modular = ising.modular_nuclearity_report(sc, check_convergence=False)

    e = REFERENCE_ENERGY
    grid = ising.make_grid(e["theta_max"], e["n_points"])

    def energy(g):
        return ising.energy_nuclearity_report(e["mass"], e["beta"], e["basis_size"], e["kappa"], g, False)

    _, efine = ising.refine_until_converged(energy, grid)
    ctx1, ctx2 = nested_fixture()
    return {
        "protocol": PROTOCOL,
        "modular": {"params": REFERENCE_SCENARIO, **_spectral_entry(modular, fine)},
        "energy": {"params": REFERENCE_ENERGY, "beta": e["beta"], **_spectral_entry(energy(grid), efine)},
        "intersection": {"fixture": "nested d=3: L1 = Re1 + Re2 + iRe3, L2 = Re1",
                         "dimension": double_cone_intersection(ctx1, ctx2).dimension},
    }


def load_golden():
    text = resources.files(__package__).joinpath("golden/reference.json").read_text()
    return json.loads(text)


def main():
    path = Path(__file__).with_name("golden") / "reference.json"
    path.write_text(json.dumps(compute_golden(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
